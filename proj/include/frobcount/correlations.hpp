#pragma once

#include "frobcount/local_densities.hpp"

#include <set>
#include <vector>

namespace fc {

// normal . y <= bound
struct HalfSpace {
    std::vector<long long> normal;
    Rational bound;
};

// Integer points x with (x - shift) / B in the region, the region lying in [-1, 1]^s.
struct LatticeBox {
    int s = 1;
    Rational B = 1;
    std::vector<HalfSpace> region;
    std::vector<Rational> shift;

    static LatticeBox cube(int s, Rational B);       // [-1, 1]^s
    static LatticeBox unit_cube(int s, Rational B);  // [0, 1]^s

    // Throws ConfigError when dimensions disagree, the region leaves
    // [-1, 1]^s or has no interior point on a fine rational grid.
    void validate() const;
    bool contains(const std::vector<long long>& x) const;
    // Integer range of coordinate i over the bounding cube.
    std::pair<long long, long long> coordinate_range(int i) const;
};

struct CorrelationOptions {
    int threads = 1;
    long long slab = 256;  // first-coordinate values per work unit
};

struct CorrelationValue {
    SumValue value;
    uint64_t points = 0;       // lattice points visited
    uint64_t nonzero = 0;      // points with a nonzero summand
};

// Sum over the box of prod rho_j(L_j(x)), with rho_j(n) = 0 for n <= 0.
CorrelationValue correlation_sum(const LatticeBox& box, const LinearFormSystem& sys,
                                 const std::vector<FrobMultSpec>& specs, const CorrelationOptions& opt = {});

struct ConstraintSet {
    bool primitive = true;       // gcd(x) = 1
    bool coprime_to_S = false;   // gcd(x, p) = 1 for p in S
    std::vector<long long> anchor;
    Rational delta = Rational(1, 2);
    std::set<uint64_t> S;
    bool archimedean = true;

    // Throws ConfigError unless delta > 0 (and delta < 1 when S is not empty),
    // the anchor is primitive and y_0 != 0.
    void validate(int s) const;
};

// Closeness of x to the anchor at a prime of S, from valuations.
bool padic_close(const std::vector<long long>& x, const ConstraintSet& c, uint64_t p);
bool archimedean_close(const std::vector<long long>& x, const ConstraintSet& c);

// The same conditions at the primes of S together with gcd(x, S) = 1,
// expressed as residues modulo M.
class CongruenceEncoding {
public:
    CongruenceEncoding(const ConstraintSet& c, int s);

    uint64_t M() const { return M_; }
    bool member(const std::vector<long long>& x) const;
    // Residue classes mod M of the accepted set, when enumerable (else -1).
    long long class_count() const;

private:
    struct Prime {
        uint64_t p;
        int m;       // |z|_p < delta iff |z|_p <= p^-m
        int K;       // modulus exponent
        uint64_t pK;
    };
    bool member_at(const Prime& pr, const std::vector<long long>& x) const;

    ConstraintSet c_;
    int s_;
    std::vector<Prime> primes_;
    uint64_t M_ = 1;
    std::vector<uint8_t> table_;  // over (Z/M)^s when small
};

enum class ConstraintPath { Valuation, Encoding };

// DomainError for specs given by a power table or with overrides.
CorrelationValue constrained_correlation_sum(const LatticeBox& box, const LinearFormSystem& sys,
                                             const std::vector<FrobMultSpec>& specs, const ConstraintSet& c,
                                             ConstraintPath path = ConstraintPath::Valuation,
                                             const CorrelationOptions& opt = {});

struct FitSample {
    double B = 0;
    double N = 0;
};

struct FitReport {
    double c_est = 0;
    double spread = 0;
    double delta_est = 0;   // N ~ c B^d (log B)^(-delta_est) by least squares
    int drift = 0;          // sign of the ratio change over the top half
    int monotone = 0;       // +1 / -1 when the whole ratio sequence is strictly monotone
    double delta_used = 0;
    double dimension = 0;
    std::vector<double> ratios;
};

// ratio_k = N_k (log B_k)^Delta / B_k^d. Needs at least six geometrically
// spaced samples (DomainError otherwise).
FitReport fit_asymptotic(const std::vector<FitSample>& samples, double d, double delta);

}  // namespace fc
