#pragma once

#include "frobcount/multiplicative.hpp"

#include <string>
#include <vector>

namespace fc {

// coeffs[0] x_0 + ... + coeffs[s-1] x_{s-1} + constant
struct LinearForm {
    std::vector<long long> coeffs;
    long long constant = 0;

    i128 eval(const std::vector<long long>& x) const;
    bool homogeneous() const { return constant == 0; }
    std::string str() const;
};

class LinearFormSystem {
public:
    // Throws ConfigError unless every form has s coefficients, no homogeneous
    // part vanishes and the homogeneous parts are pairwise independent.
    LinearFormSystem(int s, std::vector<LinearForm> forms);

    int s() const { return s_; }
    int r() const { return int(forms_.size()); }
    const std::vector<LinearForm>& forms() const { return forms_; }
    const LinearForm& operator[](int i) const { return forms_[i]; }
    // Largest coefficient modulus of form i, constant included.
    long long norm(int i) const;
    long long max_norm() const;
    std::string str() const;

private:
    int s_;
    std::vector<LinearForm> forms_;
};

struct LocalDensity {
    uint64_t p = 0;
    std::vector<int> c;
    Rational value;
};

// phi_i(u) = target (mod p^e); with exact set, additionally phi_i(u) != target (mod p^(e+1)).
struct LocalCondition {
    i128 target = 0;
    int e = 0;
    bool exact = false;
};

// Number of u in (Z/p^m Z)^s meeting every condition, by a digit-by-digit
// walk over residues. Needs m >= e (+1 when exact) for every condition.
BigInt count_solutions(const LinearFormSystem& sys, uint64_t p, int m, const std::vector<LocalCondition>& conds);
Rational local_density(const LinearFormSystem& sys, uint64_t p, const std::vector<LocalCondition>& conds);
// Same density from the index of the lattice spanned by the homogeneous
// parts and the prime power moduli.
Rational local_density_lattice(const LinearFormSystem& sys, uint64_t p, const std::vector<LocalCondition>& conds);

Rational alpha_local(const LinearFormSystem& sys, uint64_t p, const std::vector<int>& c);
LocalDensity alpha_density(const LinearFormSystem& sys, uint64_t p, const std::vector<int>& c);
Rational alpha_multi(const LinearFormSystem& sys, const std::vector<uint64_t>& n);

// Density of v with phi_j(v) = w_j A_j (mod w_j W).
Rational beta_local(const LinearFormSystem& sys, uint64_t W, const std::vector<uint64_t>& w,
                    const std::vector<i128>& A);

struct AlphaBetaIdentity {
    uint64_t p = 0;
    int a = 0;
    std::vector<int> c;
    int m = 0;
    Rational lhs;           // sum over unit tuples mod p^a
    Rational exact_power;   // density of p^c_j || phi_j, counted mod p^m
    Rational rhs;           // alternating sum of alpha, counted mod p^m
    Rational exact_power_next, rhs_next;  // the same counted mod p^(m+1)
    bool holds = false;
};

// Requires a >= 1 and m >= a + max c (DomainError otherwise); m = 0 picks a + max c.
AlphaBetaIdentity alpha_beta_identity_check(const LinearFormSystem& sys, uint64_t p, int a, const std::vector<int>& c,
                                            int m = 0);

// One check per (system, p, a, c) with c in {0..c_max}^r and 1 <= a <= a_max.
struct IdentityGridReport {
    std::vector<AlphaBetaIdentity> results;
    std::vector<int> system;  // index into the systems per result
    uint64_t failures = 0;
    bool all_passed() const { return !results.empty() && failures == 0; }
};

IdentityGridReport identity_grid(const std::vector<LinearFormSystem>& systems, const std::vector<uint64_t>& primes,
                                 int c_max, int a_max);

// Fixed binary systems with 1..r_max forms.
std::vector<LinearFormSystem> identity_grid_systems(int r_max);

// alpha = p^-max c with one positive exponent, alpha <= p^-(c_i + c_j) with
// two or more; checked for the primes p > 2 max|phi| r s of the list.
struct AlphaBoundReport {
    uint64_t checks = 0;
    uint64_t failures = 0;
    uint64_t skipped_primes = 0;
};

AlphaBoundReport alpha_bound_grid(const std::vector<LinearFormSystem>& systems, const std::vector<uint64_t>& primes,
                                  int c_max);

struct LargePrimeFactor {
    uint64_t p = 0;
    int k_max = 0;
    Scalar exact;        // the a-sum truncated at a_i <= k_max
    Scalar approx;       // prod (1 + rho_i(p) / p)
    double gap = 0;      // |exact - approx|
    double tail_bound = 0;     // bound on the discarded a_i > k_max terms
    double gap_bound = 0;      // C / p^2 from the term-by-term estimate
    double gap_constant = 0;   // C
};

// DomainError when p divides every coefficient of some homogeneous part or
// when H >= p for some spec.
LargePrimeFactor large_prime_factor(const LinearFormSystem& sys, const std::vector<FrobMultSpec>& specs, uint64_t p,
                                    int k_max = 24);

struct LeadingConstantReport {
    double B0 = 0;
    uint64_t u_bound = 0;
    uint64_t Q0 = 1;
    std::vector<uint64_t> character_modulus;        // q_rho per spec
    std::vector<std::vector<std::string>> characters;  // labels of E_rho per spec
    std::vector<double> means;
    double c_star = 0;               // truncated at u_i <= u_bound
    std::vector<double> c_star_partial;   // at u_bound / 4, u_bound / 2, u_bound
    std::vector<uint64_t> partial_bounds;
    double normalized = 0;           // coefficient of B^(n+1) prod (log B)^(m_j - 1)
    double half_width = 0;           // B0^(-1/2), relative
    double interval_lo = 0;
    double interval_hi = 0;
    uint64_t terms = 0;              // u tuples with nonzero weight
    bool b0_above_conductor_primes = false;
    bool b0_above_growth_threshold = false;  // B0 > 2 r H^r
};

// Finite version of the leading constant for non-negative specs, built from
// exceptional characters, the small-prime densities and the Gamma factors.
// normalization_bound is the prime bound used for the products over B0 < p.
LeadingConstantReport truncated_leading_constant(const LinearFormSystem& sys, const std::vector<FrobMultSpec>& specs,
                                                 uint64_t B0, uint64_t u_bound,
                                                 uint64_t normalization_bound = 1000000);

}  // namespace fc
