#include "frobcount/local_densities.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace fc {

i128 LinearForm::eval(const std::vector<long long>& x) const {
    i128 v = constant;
    for (size_t i = 0; i < coeffs.size(); ++i) v += i128(coeffs[i]) * x[i];
    return v;
}

std::string LinearForm::str() const {
    std::ostringstream os;
    bool first = true;
    for (size_t i = 0; i < coeffs.size(); ++i) {
        long long c = coeffs[i];
        if (c == 0) continue;
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        long long a = c < 0 ? -c : c;
        if (a != 1) os << a << "*";
        os << "x" << i;
        first = false;
    }
    if (constant != 0 || first) {
        if (!first) os << (constant < 0 ? " - " : " + ") << (constant < 0 ? -constant : constant);
        else os << constant;
    }
    return os.str();
}

LinearFormSystem::LinearFormSystem(int s, std::vector<LinearForm> forms) : s_(s), forms_(std::move(forms)) {
    if (s < 1) throw ConfigError("linear form system needs at least one variable");
    if (forms_.empty()) throw ConfigError("linear form system needs at least one form");
    for (const auto& f : forms_) {
        if (int(f.coeffs.size()) != s) throw ConfigError("form " + f.str() + " has the wrong number of coefficients");
        if (std::all_of(f.coeffs.begin(), f.coeffs.end(), [](long long c) { return c == 0; }))
            throw ConfigError("form with vanishing homogeneous part");
    }
    for (int i = 0; i < r(); ++i)
        for (int j = i + 1; j < r(); ++j) {
            bool independent = false;
            for (int a = 0; a < s && !independent; ++a)
                for (int b = a + 1; b < s && !independent; ++b) {
                    i128 minor = i128(forms_[i].coeffs[a]) * forms_[j].coeffs[b] -
                                 i128(forms_[i].coeffs[b]) * forms_[j].coeffs[a];
                    if (minor != 0) independent = true;
                }
            if (!independent)
                throw ConfigError("forms " + forms_[i].str() + " and " + forms_[j].str() + " are dependent");
        }
}

long long LinearFormSystem::norm(int i) const {
    long long n = std::llabs(forms_[i].constant);
    for (long long c : forms_[i].coeffs) n = std::max(n, std::llabs(c));
    return n;
}

long long LinearFormSystem::max_norm() const {
    long long n = 0;
    for (int i = 0; i < r(); ++i) n = std::max(n, norm(i));
    return n;
}

std::string LinearFormSystem::str() const {
    std::string out = "(";
    for (int i = 0; i < r(); ++i) out += (i ? ", " : "") + forms_[i].str();
    return out + ")";
}

namespace {

i128 ipow(uint64_t p, int k) {
    i128 v = 1;
    for (int i = 0; i < k; ++i) v *= p;
    return v;
}

BigInt bigpow(uint64_t p, int k) {
    BigInt v = 1;
    for (int i = 0; i < k; ++i) v *= p;
    return v;
}

i128 mod_pos(i128 a, i128 m) {
    i128 r = a % m;
    return r < 0 ? r + m : r;
}

void check_condition_sizes(const LinearFormSystem& sys, uint64_t p, const std::vector<LocalCondition>& conds) {
    if (!is_prime_u64(p)) throw DomainError("local densities need a prime");
    if (int(conds.size()) != sys.r()) throw DomainError("one condition per form expected");
    for (const auto& c : conds) {
        if (c.e < 0) throw DomainError("negative exponent");
        if (std::log2(double(p)) * (c.e + 1) > 60) throw CapacityError("prime power modulus exceeds 2^60");
    }
}

// The digit walk: a state holds, for every row still open at level k,
// (target - phi(u)) / p^k modulo p^(n - k) for the residue u mod p^k.
u128 digit_walk(const LinearFormSystem& sys, uint64_t p, const std::vector<LocalCondition>& conds, int& depth) {
    const int r = sys.r(), s = sys.s();
    std::vector<int> need(r);
    depth = 0;
    for (int i = 0; i < r; ++i) {
        need[i] = conds[i].e + (conds[i].exact ? 1 : 0);
        depth = std::max(depth, need[i]);
    }
    if (std::log2(double(p)) * s * depth > 120) throw CapacityError("solution count exceeds 128 bits");

    const uint64_t digits = uint64_t(ipow(p, s));
    std::vector<std::vector<long long>> psi(digits, std::vector<long long>(r));
    for (uint64_t d = 0; d < digits; ++d) {
        std::vector<long long> dv(s);
        uint64_t t = d;
        for (int j = 0; j < s; ++j) {
            dv[j] = (long long)(t % p);
            t /= p;
        }
        for (int i = 0; i < r; ++i) {
            long long v = 0;
            for (int j = 0; j < s; ++j) v += sys[i].coeffs[j] * dv[j];
            psi[d][i] = v;
        }
    }

    auto encode = [&](const std::vector<i128>& res, int k) {
        u128 key = 0, radix = 1;
        for (int i = 0; i < r; ++i) {
            if (need[i] <= k) continue;
            key += u128(res[i]) * radix;
            radix *= u128(ipow(p, need[i] - k));
        }
        return key;
    };
    auto decode = [&](u128 key, int k, std::vector<i128>& res) {
        for (int i = 0; i < r; ++i) {
            if (need[i] <= k) {
                res[i] = 0;
                continue;
            }
            u128 m = u128(ipow(p, need[i] - k));
            res[i] = i128(key % m);
            key /= m;
        }
    };

    std::vector<i128> res(r);
    for (int i = 0; i < r; ++i)
        res[i] = need[i] > 0 ? mod_pos(conds[i].target - sys[i].constant, ipow(p, need[i])) : 0;
    struct KeyHash {
        size_t operator()(u128 k) const { return std::hash<uint64_t>()(uint64_t(k) ^ uint64_t(k >> 64) * 0x9e3779b97f4a7c15ull); }
    };
    std::unordered_map<u128, u128, KeyHash> level, following;
    level[encode(res, 0)] = 1;

    const unsigned long long budget = capacity().enumeration_budget;
    unsigned long long work = 0;
    std::vector<i128> nres(r);
    for (int k = 0; k < depth; ++k) {
        following.clear();
        work += level.size() * digits;
        if (work > budget) throw CapacityError("local density enumeration exceeds the budget");
        for (const auto& [key, count] : level) {
            decode(key, k, res);
            for (uint64_t d = 0; d < digits; ++d) {
                bool ok = true;
                for (int i = 0; i < r && ok; ++i) {
                    if (need[i] <= k) {
                        nres[i] = 0;
                        continue;
                    }
                    i128 m = ipow(p, need[i] - k);
                    i128 delta = mod_pos(res[i] - psi[d][i], m);
                    bool zero_digit = delta % p == 0;
                    if (conds[i].exact && k == conds[i].e) {
                        if (zero_digit) ok = false;
                        nres[i] = 0;
                    } else {
                        if (!zero_digit) ok = false;
                        nres[i] = delta / p;
                    }
                }
                if (ok) following[encode(nres, k + 1)] += count;
            }
        }
        level.swap(following);
        if (level.empty()) return 0;
    }
    u128 total = 0;
    for (const auto& kv : level) total += kv.second;
    return total;
}

BigInt to_big(u128 v) {
    BigInt hi = BigInt(uint64_t(v >> 64));
    return (hi << 64) + BigInt(uint64_t(v));
}

// Lower-triangular basis of the lattice spanned by the generators in Z^r.
struct Lattice {
    std::vector<std::vector<BigInt>> basis;
    BigInt index = 1;

    Lattice(std::vector<std::vector<BigInt>> gens, int r) {
        for (int i = 0; i < r; ++i) {
            while (true) {
                int piv = -1;
                for (size_t g = 0; g < gens.size(); ++g)
                    if (gens[g][i] != 0 && (piv < 0 || abs(gens[g][i]) < abs(gens[piv][i]))) piv = int(g);
                if (piv < 0) throw DomainError("degenerate lattice");
                for (size_t g = 0; g < gens.size(); ++g) {
                    if (int(g) == piv || gens[g][i] == 0) continue;
                    BigInt q = gens[g][i] / gens[piv][i];
                    for (int t = i; t < r; ++t) gens[g][t] -= q * gens[piv][t];
                }
                bool alone = true;
                for (size_t g = 0; g < gens.size(); ++g)
                    if (int(g) != piv && gens[g][i] != 0) alone = false;
                if (alone) {
                    basis.push_back(gens[piv]);
                    index *= abs(gens[piv][i]);
                    gens.erase(gens.begin() + piv);
                    break;
                }
            }
        }
    }

    bool contains(std::vector<BigInt> t) const {
        for (size_t i = 0; i < basis.size(); ++i) {
            if (t[i] % basis[i][i] != 0) return false;
            BigInt q = t[i] / basis[i][i];
            if (q != 0)
                for (size_t j = i; j < t.size(); ++j) t[j] -= q * basis[i][j];
        }
        return true;
    }
};

Lattice congruence_lattice(const LinearFormSystem& sys, uint64_t p, const std::vector<int>& e) {
    const int r = sys.r(), s = sys.s();
    std::vector<std::vector<BigInt>> gens;
    for (int j = 0; j < s; ++j) {
        std::vector<BigInt> g(r);
        for (int i = 0; i < r; ++i) g[i] = sys[i].coeffs[j];
        gens.push_back(g);
    }
    for (int i = 0; i < r; ++i) {
        std::vector<BigInt> g(r, 0);
        g[i] = bigpow(p, e[i]);
        gens.push_back(g);
    }
    return Lattice(gens, r);
}

// Density of phi_i = t_i (mod p^e_i) for all i.
Rational congruence_density(const LinearFormSystem& sys, uint64_t p, const std::vector<i128>& t,
                            const std::vector<int>& e) {
    Lattice L = congruence_lattice(sys, p, e);
    std::vector<BigInt> target(sys.r());
    for (int i = 0; i < sys.r(); ++i) target[i] = BigInt(to_string(t[i] - sys[i].constant));
    if (!L.contains(target)) return 0;
    int total = std::accumulate(e.begin(), e.end(), 0);
    return Rational(L.index, bigpow(p, total));
}

Scalar rho_power(const FrobMultSpec& spec, uint64_t p, int k) {
    return k == 0 ? Scalar(1) : spec.prime_power(p, k);
}

template <class F>
void for_each_tuple(const std::vector<int>& sizes, F&& f) {
    std::vector<int> idx(sizes.size(), 0);
    for (int s : sizes)
        if (s <= 0) return;
    while (true) {
        f(idx);
        size_t i = 0;
        while (i < idx.size()) {
            if (++idx[i] < sizes[i]) break;
            idx[i] = 0;
            ++i;
        }
        if (i == idx.size()) return;
    }
}

}  // namespace

BigInt count_solutions(const LinearFormSystem& sys, uint64_t p, int m, const std::vector<LocalCondition>& conds) {
    check_condition_sizes(sys, p, conds);
    int depth = 0;
    u128 c = digit_walk(sys, p, conds, depth);
    if (m < depth) throw DomainError("modulus exponent below the condition depth");
    return to_big(c) * bigpow(p, sys.s() * (m - depth));
}

Rational local_density(const LinearFormSystem& sys, uint64_t p, const std::vector<LocalCondition>& conds) {
    check_condition_sizes(sys, p, conds);
    int depth = 0;
    u128 c = digit_walk(sys, p, conds, depth);
    return Rational(to_big(c), bigpow(p, sys.s() * depth));
}

Rational local_density_lattice(const LinearFormSystem& sys, uint64_t p, const std::vector<LocalCondition>& conds) {
    check_condition_sizes(sys, p, conds);
    const int r = sys.r();
    std::vector<int> exact_rows;
    for (int i = 0; i < r; ++i)
        if (conds[i].exact) exact_rows.push_back(i);
    Rational total = 0;
    for (unsigned mask = 0; mask < (1u << exact_rows.size()); ++mask) {
        std::vector<int> e(r);
        std::vector<i128> t(r);
        for (int i = 0; i < r; ++i) {
            e[i] = conds[i].e;
            t[i] = conds[i].target;
        }
        int bits = 0;
        for (size_t b = 0; b < exact_rows.size(); ++b)
            if (mask >> b & 1) {
                ++e[exact_rows[b]];
                ++bits;
            }
        Rational d = congruence_density(sys, p, t, e);
        total += bits % 2 ? -d : d;
    }
    return total;
}

Rational alpha_local(const LinearFormSystem& sys, uint64_t p, const std::vector<int>& c) {
    if (int(c.size()) != sys.r()) throw DomainError("one exponent per form expected");
    std::vector<LocalCondition> conds;
    for (int ci : c) conds.push_back({0, ci, false});
    return local_density(sys, p, conds);
}

LocalDensity alpha_density(const LinearFormSystem& sys, uint64_t p, const std::vector<int>& c) {
    return {p, c, alpha_local(sys, p, c)};
}

Rational alpha_multi(const LinearFormSystem& sys, const std::vector<uint64_t>& n) {
    if (int(n.size()) != sys.r()) throw DomainError("one modulus per form expected");
    std::set<uint64_t> primes;
    for (uint64_t v : n) {
        if (v == 0) throw DomainError("alpha_multi needs positive integers");
        for (const auto& f : factor_integer(i128(v)).factors) primes.insert(f.p);
    }
    Rational out = 1;
    for (uint64_t p : primes) {
        std::vector<int> c;
        for (uint64_t v : n) c.push_back(int(padic_valuation(i128(v), p)));
        out *= alpha_local(sys, p, c);
    }
    return out;
}

Rational beta_local(const LinearFormSystem& sys, uint64_t W, const std::vector<uint64_t>& w,
                    const std::vector<i128>& A) {
    const int r = sys.r();
    if (int(w.size()) != r || int(A.size()) != r) throw DomainError("one scale and residue per form expected");
    if (W == 0) throw DomainError("beta_local needs W >= 1");
    std::set<uint64_t> primes;
    for (const auto& f : factor_integer(i128(W)).factors) primes.insert(f.p);
    for (int i = 0; i < r; ++i) {
        if (w[i] == 0) throw DomainError("beta_local needs positive scales");
        if (gcd128(A[i], i128(W)) != 1) throw DomainError("beta_local residues must be units mod W");
        for (const auto& f : factor_integer(i128(w[i])).factors) primes.insert(f.p);
    }
    Rational out = 1;
    for (uint64_t p : primes) {
        std::vector<LocalCondition> conds;
        for (int i = 0; i < r; ++i) {
            int e = int(padic_valuation(i128(w[i]), p) + padic_valuation(i128(W), p));
            conds.push_back({i128(w[i]) * A[i], e, false});
        }
        out *= local_density(sys, p, conds);
        if (out == 0) break;
    }
    return out;
}

AlphaBetaIdentity alpha_beta_identity_check(const LinearFormSystem& sys, uint64_t p, int a, const std::vector<int>& c,
                                            int m) {
    const int r = sys.r();
    if (int(c.size()) != r) throw DomainError("one exponent per form expected");
    if (a < 1) throw DomainError("the identity needs a >= 1");
    int cmax = *std::max_element(c.begin(), c.end());
    if (m == 0) m = a + cmax;
    if (m < a + cmax) throw DomainError("the identity needs m >= a + max c");

    AlphaBetaIdentity out;
    out.p = p;
    out.a = a;
    out.c = c;
    out.m = m;

    // Sum over unit tuples: the congruence lattice does not depend on the
    // residues, only membership does.
    std::vector<int> e(r);
    for (int i = 0; i < r; ++i) e[i] = a + c[i];
    Lattice L = congruence_lattice(sys, p, e);
    const i128 pa = ipow(p, a);
    std::vector<i128> units;
    for (i128 x = 1; x < pa; ++x)
        if (x % p != 0) units.push_back(x);
    BigInt consistent = 0;
    std::vector<BigInt> t(r);
    for_each_tuple(std::vector<int>(r, int(units.size())), [&](const std::vector<int>& idx) {
        for (int i = 0; i < r; ++i) t[i] = BigInt(to_string(ipow(p, c[i]) * units[idx[i]] - sys[i].constant));
        if (L.contains(t)) consistent += 1;
    });
    out.lhs = Rational(consistent * L.index, bigpow(p, std::accumulate(e.begin(), e.end(), 0)));

    auto counted = [&](int mm, Rational& exact_power, Rational& rhs) {
        std::vector<LocalCondition> conds;
        for (int i = 0; i < r; ++i) conds.push_back({0, c[i], true});
        const BigInt denom = bigpow(p, sys.s() * mm);
        exact_power = Rational(count_solutions(sys, p, mm, conds), denom);
        rhs = 0;
        for (unsigned mask = 0; mask < (1u << r); ++mask) {
            std::vector<LocalCondition> ac;
            int bits = 0;
            for (int i = 0; i < r; ++i) {
                int ei = c[i] + int(mask >> i & 1);
                bits += int(mask >> i & 1);
                ac.push_back({0, ei, false});
            }
            Rational v(count_solutions(sys, p, mm, ac), denom);
            rhs += bits % 2 ? -v : v;
        }
    };
    counted(m, out.exact_power, out.rhs);
    counted(m + 1, out.exact_power_next, out.rhs_next);
    out.holds = out.lhs == out.exact_power && out.exact_power == out.rhs && out.exact_power_next == out.exact_power &&
                out.rhs_next == out.rhs;
    return out;
}

IdentityGridReport identity_grid(const std::vector<LinearFormSystem>& systems, const std::vector<uint64_t>& primes,
                                 int c_max, int a_max) {
    if (c_max < 0 || a_max < 1) throw ConfigError("identity grid needs c_max >= 0 and a_max >= 1");
    IdentityGridReport out;
    for (size_t k = 0; k < systems.size(); ++k)
        for (uint64_t p : primes)
            for (int a = 1; a <= a_max; ++a) {
                std::vector<int> c(size_t(systems[k].r()), 0);
                while (true) {
                    out.results.push_back(alpha_beta_identity_check(systems[k], p, a, c));
                    out.system.push_back(int(k));
                    out.failures += !out.results.back().holds;
                    size_t i = 0;
                    while (i < c.size() && ++c[i] > c_max) c[i++] = 0;
                    if (i == c.size()) break;
                }
            }
    return out;
}

std::vector<LinearFormSystem> identity_grid_systems(int r_max) {
    std::vector<LinearFormSystem> out;
    if (r_max >= 1) {
        out.emplace_back(2, std::vector<LinearForm>{{{1, 0}, 0}});
        out.emplace_back(2, std::vector<LinearForm>{{{2, 1}, 1}});
    }
    if (r_max >= 2) {
        out.emplace_back(2, std::vector<LinearForm>{{{1, 0}, 0}, {{1, 1}, 0}});
        out.emplace_back(2, std::vector<LinearForm>{{{2, 1}, 1}, {{1, -3}, 4}});
    }
    if (r_max >= 3) {
        out.emplace_back(2, std::vector<LinearForm>{{{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, 0}});
        out.emplace_back(2, std::vector<LinearForm>{{{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, 1}});
    }
    return out;
}

AlphaBoundReport alpha_bound_grid(const std::vector<LinearFormSystem>& systems, const std::vector<uint64_t>& primes,
                                  int c_max) {
    AlphaBoundReport out;
    for (const auto& sys : systems)
        for (uint64_t p : primes) {
            if (double(p) <= 2.0 * double(sys.max_norm()) * sys.r() * sys.s()) {
                ++out.skipped_primes;
                continue;
            }
            std::vector<int> c(size_t(sys.r()), 0);
            while (true) {
                int positive = 0, top = 0, pair = 0;
                for (size_t i = 0; i < c.size(); ++i) {
                    if (c[i] > 0) ++positive;
                    top = std::max(top, c[i]);
                    for (size_t j = i + 1; j < c.size(); ++j) pair = std::max(pair, c[i] + c[j]);
                }
                Rational v = alpha_local(sys, p, c);
                Rational bound = 1;
                for (int k = 0; k < (positive == 1 ? top : pair); ++k) bound /= p;
                bool ok = positive == 0 ? v == 1 : positive == 1 ? v == bound : v <= bound;
                ++out.checks;
                out.failures += !ok;
                size_t i = 0;
                while (i < c.size() && ++c[i] > c_max) c[i++] = 0;
                if (i == c.size()) break;
            }
        }
    return out;
}

namespace {

void check_large_prime(const LinearFormSystem& sys, uint64_t p) {
    for (int i = 0; i < sys.r(); ++i) {
        bool unit = false;
        for (long long c : sys[i].coeffs)
            if (c % (long long)p != 0) unit = true;
        if (!unit) throw DomainError("p divides a homogeneous part");
        for (int j = i + 1; j < sys.r(); ++j) {
            bool independent = false;
            for (int a = 0; a < sys.s() && !independent; ++a)
                for (int b = a + 1; b < sys.s() && !independent; ++b) {
                    i128 minor = i128(sys[i].coeffs[a]) * sys[j].coeffs[b] - i128(sys[i].coeffs[b]) * sys[j].coeffs[a];
                    if (minor % i128(p) != 0) independent = true;
                }
            if (!independent) throw DomainError("two forms are dependent modulo p");
        }
    }
}

// Sum over k > from of 2^r (k+1)^r H^(rk) p^-k.
double level_tail(int r, double H, double p, int from) {
    double ratio = std::pow(H, r) / p;
    if (ratio >= 1) return INFINITY;
    double total = 0;
    for (int k = from + 1; k < 100000; ++k) {
        double term = std::pow(2.0, r) * std::pow(k + 1.0, r) * std::exp(k * std::log(ratio));
        total += term;
        if (term < 1e-30 * (total > 0 ? total : 1) && k > from + 10) break;
    }
    return total;
}

}  // namespace

LargePrimeFactor large_prime_factor(const LinearFormSystem& sys, const std::vector<FrobMultSpec>& specs, uint64_t p,
                                    int k_max) {
    const int r = sys.r();
    if (int(specs.size()) != r) throw DomainError("one spec per form expected");
    if (k_max < 1) throw DomainError("k_max must be positive");
    check_large_prime(sys, p);
    long long H = 1;
    for (const auto& sp : specs) {
        if (uint64_t(sp.H) >= p) throw DomainError("growth constant H >= p: the local factor diverges");
        H = std::max(H, sp.H);
    }

    std::map<std::vector<int>, Rational> alpha_cache;
    auto alpha = [&](const std::vector<int>& c) -> const Rational& {
        auto it = alpha_cache.find(c);
        if (it != alpha_cache.end()) return it->second;
        std::vector<i128> t(r, 0);
        return alpha_cache[c] = congruence_density(sys, p, t, c);
    };

    std::vector<std::vector<Scalar>> rho(r);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k <= k_max; ++k) rho[i].push_back(rho_power(specs[i], p, k));

    Scalar sum = 0;
    for_each_tuple(std::vector<int>(r, k_max + 1), [&](const std::vector<int>& a) {
        Scalar coeff = 1;
        for (int i = 0; i < r; ++i) coeff *= rho[i][a[i]];
        if (coeff.is_zero()) return;
        Rational dens = 0;
        for (unsigned mask = 0; mask < (1u << r); ++mask) {
            std::vector<int> c(a);
            int bits = 0;
            for (int i = 0; i < r; ++i)
                if (mask >> i & 1) {
                    ++c[i];
                    ++bits;
                }
            dens += bits % 2 ? -alpha(c) : alpha(c);
        }
        if (dens != 0) sum += coeff * Scalar(dens);
    });

    Rational factor = 1;
    for (int i = 0; i < r; ++i) factor *= Rational(p, p - 1);

    LargePrimeFactor out;
    out.p = p;
    out.k_max = k_max;
    out.exact = sum * Scalar(factor);
    Scalar approx = 1;
    Scalar first = Scalar(1) - Scalar(Rational(r, p));
    for (int i = 0; i < r; ++i) {
        Scalar term = rho[i][1] * Scalar(Rational(1, p));
        approx *= Scalar(1) + term;
        first += term;
    }
    out.approx = approx;
    out.gap = std::abs(out.exact.value() - out.approx.value());

    const double f = to_double(factor);
    out.tail_bound = f * level_tail(r, double(H), double(p), k_max);
    out.gap_bound = f * level_tail(r, double(H), double(p), 1) +
                    std::abs(f * first.value() - approx.value()) + out.tail_bound;
    out.gap_constant = out.gap_bound * double(p) * double(p);
    return out;
}

namespace {

struct SmoothTerm {
    uint64_t u;
    std::vector<int> exps;  // per small prime
    std::complex<double> rho;
};

void smooth_numbers(const std::vector<uint64_t>& primes, size_t i, uint64_t u, uint64_t bound, std::vector<int>& exps,
                    std::vector<std::pair<uint64_t, std::vector<int>>>& out) {
    if (i == primes.size()) {
        out.push_back({u, exps});
        return;
    }
    uint64_t v = u;
    for (int k = 0;; ++k) {
        exps[i] = k;
        smooth_numbers(primes, i + 1, v, bound, exps, out);
        if (v > bound / primes[i]) break;
        v *= primes[i];
    }
    exps[i] = 0;
}

}  // namespace

LeadingConstantReport truncated_leading_constant(const LinearFormSystem& sys, const std::vector<FrobMultSpec>& specs,
                                                 uint64_t B0, uint64_t u_bound, uint64_t normalization_bound) {
    const int r = sys.r();
    if (int(specs.size()) != r) throw DomainError("one spec per form expected");
    if (B0 < 2) throw DomainError("B0 must be at least 2");
    if (u_bound < 1) throw DomainError("u_bound must be positive");

    LeadingConstantReport out;
    out.B0 = double(B0);
    out.u_bound = u_bound;
    out.half_width = 1.0 / std::sqrt(double(B0));

    const std::vector<uint64_t> small = sieve_primes(B0);
    std::vector<double> means(r);
    std::vector<std::vector<DirichletCharacter>> E(r);
    uint64_t q_all = 1;
    long long H = 1;
    for (int j = 0; j < r; ++j) {
        const auto& base = specs[j].base;
        for (const auto& v : prime_value_set(base))
            if (!v.is_real() || v.value().real() < -1e-12)
                throw DomainError("the leading constant needs non-negative specs");
        means[j] = mean(base).value.value().real();
        uint64_t bound = 64;
        if (base.kind == FrobenianSpec::Kind::CharacterCombo) bound = std::max<uint64_t>(bound, base.combo_modulus());
        E[j] = exceptional_characters(base, bound).characters;
        uint64_t qj = 1;
        std::vector<std::string> labels;
        for (const auto& chi : E[j]) {
            qj = std::lcm(qj, chi.modulus());
            q_all *= chi.modulus();
            labels.push_back(chi.label());
        }
        out.character_modulus.push_back(qj);
        out.characters.push_back(labels);
        H = std::max(H, specs[j].H);
    }
    out.means = means;

    uint64_t largest = 1;
    for (const auto& f : factor_integer(i128(q_all)).factors) largest = std::max(largest, f.p);
    out.b0_above_conductor_primes = B0 > largest;
    out.b0_above_growth_threshold = double(B0) > 2.0 * r * std::pow(double(H), r);
    if (largest > B0) throw DomainError("B0 must cover every prime of the exceptional conductors");

    std::vector<int> ep;  // exponent of p in Q0
    out.Q0 = 1;
    for (uint64_t p : small) {
        int e = 1 + int(padic_valuation(i128(q_all), p));
        ep.push_back(e);
        for (int k = 0; k < e; ++k) {
            if (out.Q0 > (uint64_t(1) << 62) / p) throw CapacityError("Q0 exceeds 2^62");
            out.Q0 *= p;
        }
    }

    double gamma_factor = 1;
    for (int j = 0; j < r; ++j) {
        if (means[j] <= 1e-12) gamma_factor = 0;
        else gamma_factor *= std::exp(-0.5772156649015329 * means[j]) / std::tgamma(means[j]);
    }
    double mertens = 1;
    for (uint64_t p : small) mertens *= std::pow(1.0 - 1.0 / double(p), -double(r));

    // Smooth u with nonzero rho_j(u), per form.
    std::vector<std::pair<uint64_t, std::vector<int>>> smooth;
    std::vector<int> exps(small.size(), 0);
    smooth_numbers(small, 0, 1, u_bound, exps, smooth);
    std::sort(smooth.begin(), smooth.end());
    std::vector<std::vector<SmoothTerm>> U(r);
    for (int j = 0; j < r; ++j)
        for (const auto& [u, ex] : smooth) {
            std::vector<PrimePower> f;
            for (size_t i = 0; i < small.size(); ++i)
                if (ex[i]) f.push_back({small[i], ex[i]});
            auto v = evaluate_value(specs[j], from_factors(1, f));
            if (std::abs(v) > 1e-15) U[j].push_back({u, ex, v});
        }

    // Local factor at p: sum over unit tuples A mod p^e with A_j = cls_j mod
    // p^(v_p(q_j)) of the density of L_j = p^k_j A_j (mod p^(k_j + e)).
    std::map<std::tuple<size_t, std::vector<int>, std::vector<uint64_t>>, double> local_cache;
    auto local_factor = [&](size_t pi, const std::vector<int>& k, const std::vector<uint64_t>& cls) {
        auto key = std::make_tuple(pi, k, cls);
        auto it = local_cache.find(key);
        if (it != local_cache.end()) return it->second;
        const uint64_t p = small[pi];
        const int e = ep[pi];
        const i128 pe = ipow(p, e);
        std::vector<int> mod_e(r);
        for (int j = 0; j < r; ++j) mod_e[j] = k[j] + e;
        Lattice L = congruence_lattice(sys, p, mod_e);
        std::vector<std::vector<i128>> choices(r);
        for (int j = 0; j < r; ++j) {
            i128 qm = ipow(p, int(padic_valuation(i128(out.character_modulus[j]), p)));
            for (i128 A = 1; A < pe; ++A)
                if (A % p != 0 && A % qm == i128(cls[j]) % qm) choices[j].push_back(A);
        }
        std::vector<int> sizes(r);
        for (int j = 0; j < r; ++j) sizes[j] = int(choices[j].size());
        BigInt consistent = 0;
        std::vector<BigInt> t(r);
        for_each_tuple(sizes, [&](const std::vector<int>& idx) {
            for (int j = 0; j < r; ++j) t[j] = BigInt(to_string(ipow(p, k[j]) * choices[j][idx[j]] - sys[j].constant));
            if (L.contains(t)) consistent += 1;
        });
        int total = std::accumulate(mod_e.begin(), mod_e.end(), 0);
        double v = to_double(Rational(consistent * L.index, bigpow(p, total)));
        return local_cache[key] = v;
    };

    out.partial_bounds = {std::max<uint64_t>(1, u_bound / 4), std::max<uint64_t>(1, u_bound / 2), u_bound};
    std::vector<double> partial(3, 0.0);

    std::vector<std::vector<uint64_t>> units(r);
    std::vector<int> usizes(r);
    for (int j = 0; j < r; ++j) {
        for (uint64_t b = 1; b <= out.character_modulus[j]; ++b)
            if (std::gcd(b, out.character_modulus[j]) == 1) units[j].push_back(b % out.character_modulus[j]);
        usizes[j] = int(units[j].size());
    }
    std::vector<int> sizes(r);
    for (int j = 0; j < r; ++j) sizes[j] = int(U[j].size());

    for_each_tuple(usizes, [&](const std::vector<int>& bi) {
        std::complex<double> weight = 1;
        for (int j = 0; j < r; ++j) {
            std::complex<double> s = 0;
            for (const auto& chi : E[j]) s += std::conj(chi.lift(out.character_modulus[j]).value(i128(units[j][bi[j]])));
            weight *= s;
        }
        if (std::abs(weight) < 1e-12) return;
        for_each_tuple(sizes, [&](const std::vector<int>& ui) {
            std::complex<double> term = weight;
            uint64_t umax = 0;
            for (int j = 0; j < r; ++j) {
                term *= U[j][ui[j]].rho;
                umax = std::max(umax, U[j][ui[j]].u);
            }
            double local = 1;
            for (size_t pi = 0; pi < small.size() && local != 0; ++pi) {
                const uint64_t p = small[pi];
                std::vector<int> k(r);
                std::vector<uint64_t> cls(r);
                for (int j = 0; j < r; ++j) {
                    k[j] = U[j][ui[j]].exps[pi];
                    uint64_t qm = uint64_t(ipow(p, int(padic_valuation(i128(out.character_modulus[j]), p))));
                    uint64_t unit = U[j][ui[j]].u;
                    for (int t = 0; t < k[j]; ++t) unit /= p;
                    cls[j] = qm == 1 ? 0 : mulmod(units[j][bi[j]] % qm, unit % qm, qm);
                }
                local *= local_factor(pi, k, cls);
            }
            if (local == 0) return;
            ++out.terms;
            for (int b = 0; b < 3; ++b)
                if (umax <= out.partial_bounds[b]) partial[b] += (term * local).real();
        });
    });

    for (double& v : partial) v *= gamma_factor * mertens;
    out.c_star_partial = partial;
    out.c_star = partial[2];

    double norm = 1;
    for (int j = 0; j < r; ++j) {
        // (log B)^(-m) prod_{B0 < p <= B} (1 + rho(p)/p) as B grows.
        double lg = 0;
        for_each_prime_segment(2, normalization_bound, [&](const std::vector<uint64_t>& ps) {
            for (uint64_t p : ps) {
                double z = specs[j].prime_power_value(p, 1).real();
                lg += std::log1p(z / double(p)) + means[j] * std::log1p(-1.0 / double(p));
                if (p <= B0) lg -= std::log1p(z / double(p));
            }
        });
        norm *= std::exp(0.5772156649015329 * means[j] + lg);
    }
    out.normalized = out.c_star * norm;
    out.interval_lo = out.normalized * (1 - out.half_width);
    out.interval_hi = out.normalized * (1 + out.half_width);
    return out;
}

}  // namespace fc
