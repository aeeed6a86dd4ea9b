#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "frobcount/local_densities.hpp"
#include "oracles.hpp"

#include <random>

using namespace fc;

namespace {

LinearFormSystem single_x() { return LinearFormSystem(1, {{{1}, 0}}); }
LinearFormSystem x_and_x_plus_y() { return LinearFormSystem(2, {{{1, 0}, 0}, {{1, 1}, 0}}); }

std::vector<std::vector<long long>> raw(const LinearFormSystem& sys) {
    std::vector<std::vector<long long>> out;
    for (const auto& f : sys.forms()) {
        auto row = f.coeffs;
        row.push_back(f.constant);
        out.push_back(row);
    }
    return out;
}

// Density by literal enumeration mod p^m of the given conditions.
Rational brute_density(const LinearFormSystem& sys, long long p, int m, const std::vector<LocalCondition>& conds) {
    long long mod = oracle::ipow(p, m);
    long long count = oracle::residue_count(raw(sys), sys.s(), mod, [&](const std::vector<long long>& vals) {
        for (size_t i = 0; i < conds.size(); ++i) {
            long long pe = oracle::ipow(p, conds[i].e);
            long long t = (long long)conds[i].target;
            if (oracle::pmod(vals[i] - t, pe) != 0) return false;
            if (conds[i].exact && oracle::pmod(vals[i] - t, pe * p) == 0) return false;
        }
        return true;
    });
    return Rational(count, oracle::ipow(mod, sys.s()));
}

Rational R(long long a, long long b = 1) { return Rational(a, b); }

}  // namespace

TEST_CASE("systems reject dependent or vanishing forms") {
    CHECK_THROWS_AS(LinearFormSystem(1, {{{1}, 0}, {{2}, 1}}), ConfigError);
    CHECK_THROWS_AS(LinearFormSystem(2, {{{1, 2}, 0}, {{2, 4}, 3}}), ConfigError);
    CHECK_THROWS_AS(LinearFormSystem(2, {{{0, 0}, 1}}), ConfigError);
    CHECK_THROWS_AS(LinearFormSystem(2, {{{1}, 0}}), ConfigError);
    LinearFormSystem sys(2, {{{1, 0}, 0}, {{1, 1}, 0}, {{2, -3}, 5}});
    CHECK(sys.r() == 3);
    CHECK(sys.max_norm() == 5);
}

TEST_CASE("divisor densities on small examples") {
    CHECK(alpha_local(single_x(), 3, {2}) == R(1, 9));
    CHECK(alpha_local(single_x(), 3, {0}) == 1);
    CHECK(alpha_local(x_and_x_plus_y(), 5, {0, 0}) == 1);
    CHECK(alpha_local(x_and_x_plus_y(), 5, {1, 1}) == R(1, 25));
    CHECK(alpha_multi(x_and_x_plus_y(), {1, 1}) == 1);
    CHECK(alpha_multi(x_and_x_plus_y(), {2, 3}) == R(1, 6));
    CHECK(alpha_multi(single_x(), {12}) == R(1, 12));
    auto d = alpha_density(x_and_x_plus_y(), 2, {2, 1});
    CHECK(d.p == 2);
    CHECK(d.value == R(1, 8));
}

TEST_CASE("beta factors") {
    CHECK(beta_local(single_x(), 2, {1}, {1}) == R(1, 2));
    CHECK(beta_local(single_x(), 3, {3}, {1}) == R(1, 9));
    LinearFormSystem sys(2, {{{1, 0}, 0}, {{1, 2}, 0}});
    // x odd against x + 2y = 2 A (mod 4).
    CHECK(beta_local(sys, 2, {1, 2}, {1, 1}) == 0);
    CHECK_THROWS_AS(beta_local(single_x(), 4, {1}, {2}), DomainError);
}

TEST_CASE("digit walk, lattice index and literal enumeration agree") {
    std::mt19937_64 rng(7);
    std::vector<LinearFormSystem> systems = {
        single_x(),
        LinearFormSystem(1, {{{3}, 2}}),
        x_and_x_plus_y(),
        LinearFormSystem(2, {{{2, 1}, 1}, {{1, -3}, 4}}),
        LinearFormSystem(2, {{{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, 1}}),
    };
    for (const auto& sys : systems)
        for (long long p : {2, 3, 5})
            for (int trial = 0; trial < 30; ++trial) {
                std::vector<LocalCondition> conds;
                int depth = 0;
                for (int i = 0; i < sys.r(); ++i) {
                    LocalCondition c;
                    c.e = int(rng() % 3);
                    c.exact = rng() % 3 == 0;
                    c.target = (long long)(rng() % 20) - 10;
                    depth = std::max(depth, c.e + (c.exact ? 1 : 0));
                    conds.push_back(c);
                }
                if (oracle::ipow(p, depth * sys.s()) > 200000) continue;
                Rational expect = brute_density(sys, p, std::max(depth, 1), conds);
                CHECK(local_density(sys, uint64_t(p), conds) == expect);
                CHECK(local_density_lattice(sys, uint64_t(p), conds) == expect);
                int m = std::max(depth, 1) + 1;
                CHECK(Rational(count_solutions(sys, uint64_t(p), m, conds), BigInt(oracle::ipow(oracle::ipow(p, m), sys.s()))) ==
                      expect);
            }
}

TEST_CASE("alpha-beta identity examples") {
    auto one = alpha_beta_identity_check(single_x(), 3, 1, {0});
    CHECK(one.holds);
    CHECK(one.lhs == R(2, 3));

    auto two = alpha_beta_identity_check(x_and_x_plus_y(), 2, 1, {1, 0});
    CHECK(two.holds);
    auto a = [&](int c1, int c2) { return alpha_local(x_and_x_plus_y(), 2, {c1, c2}); };
    CHECK(two.rhs == a(1, 0) - a(2, 0) - a(1, 1) + a(2, 1));

    auto three = alpha_beta_identity_check(single_x(), 5, 1, {1});
    CHECK(three.holds);
    CHECK(three.lhs == R(4, 25));

    CHECK_THROWS_AS(alpha_beta_identity_check(single_x(), 5, 0, {1}), DomainError);
    CHECK_THROWS_AS(alpha_beta_identity_check(single_x(), 5, 1, {2}, 2), DomainError);
}

TEST_CASE("alpha-beta identity on a grid of systems") {
    std::vector<LinearFormSystem> systems = {
        LinearFormSystem(1, {{{2}, 1}}),
        LinearFormSystem(2, {{{2, 1}, 1}, {{1, -3}, 4}}),
        LinearFormSystem(2, {{{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, 1}}),
    };
    int checked = 0;
    for (const auto& sys : systems)
        for (uint64_t p : {2, 3, 5})
            for (int a : {1, 2}) {
                std::vector<int> c(sys.r(), 0);
                for (int code = 0; code < (sys.r() == 3 ? 8 : 9); ++code) {
                    int t = code;
                    for (int i = 0; i < sys.r(); ++i) {
                        c[i] = sys.r() == 3 ? t % 2 : t % 3;
                        t /= sys.r() == 3 ? 2 : 3;
                    }
                    auto res = alpha_beta_identity_check(sys, p, a, c);
                    CHECK(res.holds);
                    ++checked;
                }
            }
    CHECK(checked > 100);
}

TEST_CASE("alpha evaluations away from small primes") {
    std::vector<LinearFormSystem> systems = {
        x_and_x_plus_y(),
        LinearFormSystem(2, {{{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, 0}}),
        LinearFormSystem(2, {{{1, 1}, 1}, {{1, -1}, 0}}),
    };
    for (const auto& sys : systems) {
        double threshold = 2.0 * double(sys.max_norm()) * sys.r() * sys.s();
        for (uint64_t p : {11, 13, 17, 19, 23}) {
            if (double(p) <= threshold) continue;
            for (int code = 0; code < 27; ++code) {
                std::vector<int> c(sys.r());
                int t = code;
                for (int i = 0; i < sys.r(); ++i) {
                    c[i] = t % 3;
                    t /= 3;
                }
                int positive = 0, top = 0, pair = 0;
                for (int i = 0; i < sys.r(); ++i) {
                    if (c[i] > 0) ++positive;
                    top = std::max(top, c[i]);
                    for (int j = i + 1; j < sys.r(); ++j) pair = std::max(pair, c[i] + c[j]);
                }
                Rational v = alpha_local(sys, p, c);
                if (positive == 0) CHECK(v == 1);
                if (positive == 1) CHECK(v == Rational(1, BigInt(oracle::ipow(p, top))));
                if (positive >= 2) CHECK(v <= Rational(1, BigInt(oracle::ipow(p, pair))));
            }
        }
    }
}

TEST_CASE("alpha is multiplicative over coprime tuples") {
    auto sys = x_and_x_plus_y();
    int checked = 0;
    for (uint64_t n1 = 1; n1 <= 200; ++n1)
        for (uint64_t n2 = 1; n1 * n2 <= 200; ++n2)
            for (uint64_t m1 = 1; n1 * n2 * m1 <= 200; ++m1)
                for (uint64_t m2 = 1; n1 * n2 * m1 * m2 <= 200; ++m2) {
                    if (std::gcd(n1 * n2, m1 * m2) != 1) continue;
                    if (n1 * n2 == 1 || m1 * m2 == 1) continue;
                    CHECK(alpha_multi(sys, {n1 * m1, n2 * m2}) == alpha_multi(sys, {n1, n2}) * alpha_multi(sys, {m1, m2}));
                    ++checked;
                }
    CHECK(checked > 100);
}

TEST_CASE("beta does not grow under refinement") {
    LinearFormSystem sys(2, {{{2, 1}, 1}, {{1, -3}, 4}});
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        uint64_t W = 1 + rng() % 12, p = std::vector<uint64_t>{2, 3, 5}[rng() % 3];
        std::vector<uint64_t> w = {1 + rng() % 4, 1 + rng() % 4};
        std::vector<i128> A(2);
        for (auto& x : A)
            do x = i128(rng() % 60);
            while (gcd128(x, i128(W * p)) != 1);
        Rational coarse = beta_local(sys, W, w, A);
        Rational fine = beta_local(sys, W * p, w, A);
        CHECK(fine <= coarse);
    }
}

TEST_CASE("large prime factors") {
    const uint64_t p = 101;
    auto tau = large_prime_factor(single_x(), {FrobMultSpec::divisor_function()}, p, 40);
    double pd = double(p);
    double closed = 1.0 / ((1 - 1 / pd) * (1 - 1 / pd));
    CHECK(tau.exact.value().real() == doctest::Approx(closed).epsilon(1e-12));
    CHECK(tau.approx.value().real() == doctest::Approx(1 + 2 / pd));
    CHECK(tau.gap > 3 / (pd * pd));
    CHECK(tau.gap < 3.1 / (pd * pd));
    CHECK(tau.gap <= tau.gap_bound);

    auto vanish = FrobMultSpec::completely_multiplicative(FrobenianSpec::constant(0), 1);
    auto z = large_prime_factor(single_x(), {vanish}, p);
    CHECK(z.exact == 1);
    CHECK(z.approx == 1);
    CHECK(z.gap == 0);

    auto ind = FrobMultSpec::completely_multiplicative(FrobenianSpec::residue_indicator(4, {1}), 1);
    for (uint64_t q : {13, 29, 31, 97}) {
        auto two = large_prime_factor(x_and_x_plus_y(), {ind, FrobMultSpec::two_squares()}, q, 20);
        CHECK(two.gap <= two.gap_bound);
        CHECK(two.gap_constant < 1e4);
    }
    CHECK_THROWS_AS(large_prime_factor(single_x(), {FrobMultSpec::divisor_function()}, 2), DomainError);
    CHECK_THROWS_AS(large_prime_factor(LinearFormSystem(1, {{{7}, 1}}), {ind}, 7), DomainError);
}

TEST_CASE("truncated leading constant") {
    auto one = truncated_leading_constant(single_x(), {FrobMultSpec::one()}, 7, 10000);
    CHECK(one.characters[0].size() == 1);
    CHECK(one.interval_lo <= 1.0);
    CHECK(one.interval_hi >= 1.0);
    CHECK(one.normalized == doctest::Approx(1.0).epsilon(0.05));
    CHECK(one.c_star_partial[1] <= one.c_star_partial[2] + 1e-15);

    auto ind = FrobMultSpec::completely_multiplicative(FrobenianSpec::residue_indicator(4, {1}), 1);
    auto rep = truncated_leading_constant(single_x(), {ind}, 7, 100000);
    CHECK(rep.characters[0].size() == 2);
    CHECK(rep.character_modulus[0] == 4);
    CHECK(rep.normalized > 0);
    // Same data through the Euler product of the partial sums.
    double sd = selberg_delange_constant(ind, 1000000);
    CHECK(rep.normalized == doctest::Approx(sd).epsilon(0.05));

    auto zero = truncated_leading_constant(LinearFormSystem(1, {{{4}, 3}}), {ind}, 7, 10000);
    CHECK(zero.c_star == 0);
}
