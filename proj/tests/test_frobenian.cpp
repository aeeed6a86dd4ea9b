#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "frobcount/frobenian.hpp"
#include "oracles.hpp"

#include <numeric>

using namespace fc;

namespace {

FrobenianSpec split_x2m2_combo() {
    auto chi8 = DirichletCharacter::kronecker(8);
    auto s = FrobenianSpec::character_combo(
        {{DirichletCharacter::principal(8), Scalar(Rational(1, 2))}, {chi8, Scalar(Rational(1, 2))}});
    s.exceptional[2] = 1;
    return s;
}

FrobenianSpec split_x2m2_pattern() {
    auto s = FrobenianSpec::root_indicator({-2, 0, 1});
    s.exceptional[2] = 1;
    return s;
}

FrobenianSpec mod4_indicator() { return FrobenianSpec::residue_indicator(4, {1}); }

long long phi(long long n) {
    long long c = 0;
    for (long long k = 1; k <= n; ++k)
        if (std::gcd(k, n) == 1) ++c;
    return c;
}

long long mobius(long long n) {
    int k = 0;
    for (long long p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            n /= p;
            if (n % p == 0) return 0;
            ++k;
        }
    if (n > 1) ++k;
    return k % 2 ? -1 : 1;
}

}  // namespace

TEST_CASE("characters") {
    for (uint64_t q = 1; q <= 40; ++q) {
        auto cs = characters_mod(q);
        CHECK((long long)cs.size() == phi(q));
        long long prim = 0;
        for (const auto& c : cs) {
            if (c.is_primitive()) ++prim;
            CHECK(q % c.conductor() == 0);
            for (uint64_t a = 0; a < q; ++a)
                for (uint64_t b = 0; b < q; ++b)
                    CHECK(std::abs(c.value(a * b) - c.value(a) * c.value(b)) < 1e-12);
            std::complex<double> s = 0;
            for (uint64_t a = 0; a < q; ++a) s += c.value(a);
            CHECK(std::abs(s - (c.is_principal() ? double(phi(q)) : 0.0)) < 1e-9);
            CHECK(c.primitive().is_primitive());
            CHECK((c * c.conj()).is_principal());
        }
        long long want = 0;
        for (long long d = 1; d <= (long long)q; ++d)
            if (q % d == 0) want += mobius(q / d) * phi(d);
        CHECK(prim == want);
    }
    CHECK(DirichletCharacter::kronecker(-4).conductor() == 4);
    CHECK(DirichletCharacter::kronecker(8).conductor() == 8);
    CHECK(DirichletCharacter::kronecker(5).conductor() == 5);
    CHECK(DirichletCharacter::kronecker(8).label() == "chi_8");
    CHECK(DirichletCharacter::kronecker(-4).primitive().label() == "chi_-4");
    auto chi8 = DirichletCharacter::kronecker(8);
    for (long long n = 1; n < 100; n += 2) CHECK(chi8.value(n).real() == kronecker_symbol(8, n));
    CHECK_THROWS_AS(DirichletCharacter(4, 2, {0, 0, -1, 1}), ConfigError);
}

TEST_CASE("eval_prime") {
    for (const auto& s : {split_x2m2_combo(), split_x2m2_pattern()}) {
        CHECK(eval_prime(s, 7) == Scalar(1));
        CHECK(eval_prime(s, 3) == Scalar(0));
        CHECK(eval_prime(s, 2) == Scalar(1));
        CHECK(s.S.count(2));
    }
    auto a = split_x2m2_combo(), b = split_x2m2_pattern();
    for (uint64_t p : sieve_primes(20000)) CHECK(eval_prime(a, p) == eval_prime(b, p));
    CHECK_THROWS_AS(FrobenianSpec::split_pattern({{1, 0, 1}}, {{"1,1", 1}}), ConfigError);
}

TEST_CASE("means") {
    auto m = mean(split_x2m2_combo());
    CHECK(m.exact);
    CHECK(m.value == Scalar(Rational(1, 2)));
    CHECK(mean(FrobenianSpec::constant(2)).value == Scalar(2));
    auto x3 = FrobenianSpec::root_indicator({-2, 0, 0, 1});
    auto e = mean(x3, 1000000);
    CHECK(!e.exact);
    CHECK(e.heuristic);
    CHECK(std::abs(e.value.value().real() - 2.0 / 3.0) < 3 * e.error);
    std::map<std::string, Rational> dist{{"1,1,1", Rational(1, 6)}, {"1,2", Rational(1, 2)}, {"3", Rational(1, 3)}};
    auto inert = FrobenianSpec::split_pattern({{-2, 0, 0, 1}}, {{"1,1,1", 0}, {"1,2", 0}, {"3", 1}}, dist);
    CHECK(mean(inert).exact);
    CHECK(mean(inert).value == Scalar(Rational(1, 3)));
    auto inert_emp = FrobenianSpec::split_pattern({{-2, 0, 0, 1}}, {{"1,1,1", 0}, {"1,2", 0}, {"3", 1}});
    auto ie = mean(inert_emp, 1000000);
    CHECK(std::abs(ie.value.value().real() - 1.0 / 3.0) < 3 * ie.error);
    CHECK(mean(FrobenianSpec::root_indicator({-2, 0, 0, 1}, dist)).value == Scalar(Rational(2, 3)));
    auto seeded = mean(x3, 1000000, 17);
    CHECK(seeded.sample_bound != e.sample_bound);
}

TEST_CASE("empirical means of character combinations match exact means") {
    for (const auto& s : {split_x2m2_combo(), mod4_indicator(), FrobenianSpec::residue_indicator(5, {1, 4})}) {
        auto exact = mean(s).value.value();
        std::complex<double> sum = 0;
        long long n = 0;
        for_each_prime_segment(500001, 1000000, [&](const std::vector<uint64_t>& ps) {
            for (uint64_t p : ps) {
                sum += eval_prime_value(s, p);
                ++n;
            }
        });
        CHECK(std::abs(sum / double(n) - exact) < 3.0 / std::sqrt(double(n)));
    }
}

TEST_CASE("prime sums") {
    auto s = split_x2m2_combo();
    auto r1 = prime_sum_check(s, 1000000, 1);
    CHECK(r1.deviation < 0.01);
    // oracle: direct count
    long long direct = 0;
    for (uint64_t p : oracle::trial_division_primes(100000))
        if (p == 2 || p % 8 == 1 || p % 8 == 7) ++direct;
    CHECK(prime_sum_check(s, 100000, 1).observed.real() == doctest::Approx(double(direct)));
    auto r2 = prime_sum_check(s, 1000000, 2);
    REQUIRE(r2.constants.size() == 4);
    CHECK(std::abs(r2.constants[3] - r2.constants[2]) < 0.01);
    auto one = FrobenianSpec::constant(1);
    auto r3 = prime_sum_check(one, 1000000, 3);
    CHECK(r3.deviation < 0.01);
    auto r4 = prime_sum_check(one, 1000000, 4);
    // Mertens: prod (1 + 1/p) ~ (6/pi^2) e^gamma log x
    CHECK(std::abs(r4.constant_estimate.real() - 6.0 / (M_PI * M_PI) * std::exp(0.5772156649)) < 0.01);
    CHECK_THROWS_AS(prime_sum_check(FrobenianSpec::constant(0), 100000, 1), DomainError);
    CHECK(offset_li(1000000) == doctest::Approx(78626.5).epsilon(1e-5));
}

TEST_CASE("twists") {
    auto s = split_x2m2_combo();
    auto triv = twist(s, DirichletCharacter::principal(1));
    for (uint64_t p : sieve_primes(2000))
        if (!s.S.count(p)) CHECK(eval_prime(triv, p) == eval_prime(s, p));
    auto t8 = twist(s, DirichletCharacter::kronecker(8));
    for (uint64_t p : sieve_primes(2000))
        if (!t8.S.count(p)) CHECK(eval_prime(t8, p) == eval_prime(s, p));
    auto zero = twist(FrobenianSpec::constant(0), DirichletCharacter::kronecker(-4));
    for (uint64_t p : sieve_primes(200)) CHECK(eval_prime(zero, p).is_zero());
    CHECK(t8.S.count(2));
    auto t3 = twist(s, DirichletCharacter::kronecker(-3));
    CHECK(t3.S.count(3));
    CHECK(eval_prime(t3, 3).is_zero());
    // associativity with character products, off the union of exceptional sets
    auto chars = primitive_characters(15);
    for (const auto& c1 : chars)
        for (const auto& c2 : chars) {
            auto lhs = twist(twist(s, c1), c2);
            auto rhs = twist(s, c1 * c2);
            for (uint64_t p : sieve_primes(300)) {
                if (lhs.S.count(p) || rhs.S.count(p)) continue;
                CHECK(std::abs(eval_prime_value(lhs, p) - eval_prime_value(rhs, p)) < 1e-12);
            }
        }
}

TEST_CASE("twisted means are bounded by the mean") {
    auto chars = primitive_characters(24);
    for (const auto& s : {split_x2m2_combo(), mod4_indicator(), FrobenianSpec::constant(1),
                          FrobenianSpec::residue_indicator(3, {1})}) {
        double m = mean(s).value.value().real();
        for (const auto& chi : chars) CHECK(std::abs(mean(twist(s, chi)).value.value()) <= m + 1e-12);
    }
}

TEST_CASE("exceptional characters") {
    auto e4 = exceptional_characters(mod4_indicator(), 24);
    CHECK(e4.exact);
    CHECK(e4.complete);
    REQUIRE(e4.characters.size() == 2);
    CHECK(e4.characters[0].is_principal());
    CHECK(e4.characters[1] == DirichletCharacter::kronecker(-4).primitive());
    auto e1 = exceptional_characters(FrobenianSpec::constant(1), 24);
    REQUIRE(e1.characters.size() == 1);
    CHECK(e1.characters[0].is_principal());
    auto e8 = exceptional_characters(split_x2m2_combo(), 24);
    REQUIRE(e8.characters.size() == 2);
    CHECK(e8.characters[1] == DirichletCharacter::kronecker(8));
    auto e8p = exceptional_characters(split_x2m2_pattern(), 24);
    CHECK(!e8p.exact);
    REQUIRE(e8p.characters.size() == 2);
    CHECK(e8p.characters[1] == DirichletCharacter::kronecker(8));
    // membership of the trivial character, checked on the first 10^4 primes off S
    for (const auto& s : {mod4_indicator(), split_x2m2_combo()}) {
        auto ec = exceptional_characters(s, 30);
        for (const auto& chi : ec.characters) {
            int checked = 0;
            for (uint64_t p : sieve_primes(110000)) {
                if (s.S.count(p) || chi.modulus() % p == 0) continue;
                CHECK(std::abs(eval_prime_value(s, p) * chi.value(p) - eval_prime_value(s, p)) < 1e-12);
                if (++checked == 10000) break;
            }
        }
    }
}
