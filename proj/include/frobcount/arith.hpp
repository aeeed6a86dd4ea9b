#pragma once

#include "frobcount/errors.hpp"
#include "frobcount/scalar.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fc {

struct PrimePower {
    uint64_t p;
    int e;
    bool operator==(const PrimePower& o) const { return p == o.p && e == o.e; }
};

// value = sign * prod p^e, primes increasing; zero has sign 0 and no factors.
struct FactoredInteger {
    i128 value = 0;
    int sign = 0;
    std::vector<PrimePower> factors;

    int valuation(uint64_t p) const;
    bool check() const;
};

// Builds a FactoredInteger from a sign and prime powers (merged and sorted).
FactoredInteger from_factors(int sign, std::vector<PrimePower> factors);
FactoredInteger multiply(const FactoredInteger& a, const FactoredInteger& b);

std::vector<uint64_t> sieve_primes(uint64_t limit);

// Calls fn(primes in segment) for consecutive segments covering [lo, hi].
void for_each_prime_segment(uint64_t lo, uint64_t hi,
                            const std::function<void(const std::vector<uint64_t>&)>& fn);

class SpfTable {
public:
    explicit SpfTable(uint64_t bound);

    uint64_t bound() const { return bound_; }
    uint32_t smallest(uint64_t n) const { return spf_[n]; }
    const std::vector<uint32_t>& primes() const { return primes_; }

private:
    uint64_t bound_;
    std::vector<uint32_t> spf_;
    std::vector<uint32_t> primes_;
};

// Shared read-only table of at least the requested bound (grown on demand).
std::shared_ptr<const SpfTable> shared_spf(uint64_t bound);

bool is_prime_u64(uint64_t n);

// Table walk for |n| <= bound; beyond that, trial division by the table's
// primes, then Miller-Rabin and Pollard rho on a cofactor below 2^64.
FactoredInteger spf_factor(i128 n, const SpfTable& table);
FactoredInteger factor_integer(i128 n);

uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m);
uint64_t powmod(uint64_t a, uint64_t e, uint64_t m);
uint64_t invmod(uint64_t a, uint64_t m);
uint64_t mod_of(i128 a, uint64_t m);
i128 gcd128(i128 a, i128 b);
uint64_t isqrt(u128 n);
bool is_square(i128 n);
i128 squarefree_part(i128 n);

int jacobi_symbol(i128 a, i128 n);
int kronecker_symbol(i128 a, i128 n);
int legendre_symbol(i128 a, uint64_t p);
unsigned padic_valuation(i128 n, uint64_t p);
uint64_t sqrt_mod_prime(uint64_t a, uint64_t p);

struct Place {
    uint64_t p = 0;  // 0 is the real place
    static Place real() { return {0}; }
    static Place prime(uint64_t q) { return {q}; }
    bool is_real() const { return p == 0; }
};

struct QRational {
    FactoredInteger num;
    FactoredInteger den;
};

QRational make_qrational(i128 num, i128 den = 1);

int hilbert_symbol(i128 a, i128 b, Place v);
int hilbert_symbol(const QRational& a, const QRational& b, Place v);

// Coefficients from the constant term upwards.
using IntPoly = std::vector<long long>;

int degree(const IntPoly& f);
IntPoly derivative(const IntPoly& f);
BigInt resultant(const IntPoly& f, const IntPoly& g);
BigInt discriminant(const IntPoly& f);
i128 eval_poly(const IntPoly& f, i128 x);
std::string poly_string(const IntPoly& f);

struct SplittingPattern {
    std::vector<int> degrees;  // ascending
    bool ramified = false;

    std::string key() const;  // "1,1,2" or "R"
    static SplittingPattern parse(const std::string& key);
    bool operator==(const SplittingPattern& o) const {
        return ramified == o.ramified && degrees == o.degrees;
    }
};

SplittingPattern splitting_pattern(const IntPoly& f, uint64_t p);

// All partitions of n as pattern keys.
std::vector<std::string> pattern_keys(int n);

// Irreducibility over Q via rational roots (degree <= 3) or factor-degree
// compatibility across splitting patterns. Returns false when not certified.
bool certify_irreducible(const IntPoly& f);

struct QuadraticPrimeSplit {
    enum class Kind { Split, Inert, Ramified };
    i128 d = 0;
    uint64_t p = 0;
    Kind kind = Kind::Ramified;
    uint64_t root = 0;  // valid when split
};

QuadraticPrimeSplit quadratic_prime_split(i128 d, uint64_t p);
// Same prime with the other root of x^2 = d.
QuadraticPrimeSplit conjugate_split(const QuadraticPrimeSplit& s);

struct QuadElem {
    i128 a = 0;
    i128 b = 0;  // a + b sqrt(d)
};

int residue_symbol_deg1(const QuadElem& beta, const QuadraticPrimeSplit& split);

}  // namespace fc
