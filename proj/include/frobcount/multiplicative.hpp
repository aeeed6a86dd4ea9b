#pragma once

#include "frobcount/frobenian.hpp"

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fc {

enum class TailRule { Zero, RepeatLast, Cycle, Arithmetic };

// rho(p^k) for k = 1..K, continued past K by the tail rule. Cycle repeats the
// last `period` entries; Arithmetic continues the last difference.
struct PowerRow {
    std::vector<Scalar> values;
    TailRule tail = TailRule::RepeatLast;
    int period = 1;

    Scalar at(int k) const;
};

struct FrobMultSpec {
    enum class Rule { CompletelyMultiplicative, Table, IndicatorSet };

    FrobenianSpec base;
    Rule rule = Rule::CompletelyMultiplicative;
    // Table rule: one row per value of rho(p); values[0] must equal that value.
    std::vector<std::pair<Scalar, PowerRow>> rows;
    std::map<uint64_t, PowerRow> overrides;
    long long H = 1;
    std::string label;
    // Set by indicator_from_prime_set: primes of S are given the value 1.
    bool exceptional_set_to_one = false;
    // The zero function, including at n = 1.
    bool vanishes = false;

    // Throws ConfigError when the rule is not total or violates the growth bound.
    void validate() const;
    bool integer_valued() const;

    Scalar prime_power(uint64_t p, int k) const;
    std::complex<double> prime_power_value(uint64_t p, int k) const;

    static FrobMultSpec completely_multiplicative(FrobenianSpec base, long long H);
    static FrobMultSpec table(FrobenianSpec base, std::vector<std::pair<Scalar, PowerRow>> rows, long long H);

    // Library functions used throughout the tests.
    static FrobMultSpec divisor_function();   // tau
    static FrobMultSpec two_squares();        // b(n) = 1 iff n is a sum of two squares
    static FrobMultSpec squarefree();         // mu^2
    static FrobMultSpec one();                // constant 1
    static FrobMultSpec zero();
};

Scalar evaluate(const FrobMultSpec& spec, const FactoredInteger& n);
std::complex<double> evaluate_value(const FrobMultSpec& spec, const FactoredInteger& n);

// Exact integer total when rho is integer valued, otherwise a
// compensated floating sum.
struct SumValue {
    bool integral = true;
    i128 exact = 0;
    std::complex<double> approx{0.0, 0.0};

    std::complex<double> value() const { return integral ? std::complex<double>(double(exact), 0.0) : approx; }
    bool operator==(const SumValue& o) const;
};

SumValue partial_sum(const FrobMultSpec& spec, uint64_t x);

struct ProgressionSum {
    uint64_t x = 0;
    uint64_t q = 1;
    uint64_t A = 0;
    SumValue value;
    bool normalized = false;
    std::complex<double> normalized_value;  // value * q / x
};

ProgressionSum partial_sum_progression(const FrobMultSpec& spec, uint64_t x, uint64_t q, uint64_t A);
// All residues A = 0..q-1 in one pass.
std::vector<SumValue> partial_sums_by_residue(const FrobMultSpec& spec, uint64_t x, uint64_t q);
// Partial sums at each checkpoint (ascending) in one pass.
std::vector<SumValue> partial_sums_at(const FrobMultSpec& spec, const std::vector<uint64_t>& checkpoints);

// rho(n) for 0 <= n <= N (entry 0 is 0).
std::vector<long long> integer_value_table(const FrobMultSpec& spec, uint64_t N);
std::vector<std::complex<double>> value_table(const FrobMultSpec& spec, uint64_t N);

struct SelbergDelangeFit {
    double c_est = 0;
    double spread = 0;
    int drift = 0;  // sign of the change of the ratio across the top half
    std::vector<uint64_t> grid;
    std::vector<double> ratios;
};

std::vector<uint64_t> geometric_grid(double lo, double hi, int points);

SelbergDelangeFit selberg_delange_fit(const FrobMultSpec& spec, const MeanValue& m, const std::vector<uint64_t>& grid);

FrobMultSpec indicator_from_prime_set(const FrobenianSpec& base);

Scalar mertens_product(const FrobenianSpec& spec, uint64_t x, const std::set<uint64_t>& exclude);

struct EulerProductReport {
    std::complex<double> value;
    double tail_error = 0;
    std::vector<uint64_t> divergent_primes;
};

EulerProductReport euler_product_limit(const FrobMultSpec& spec, uint64_t P);
// The constant G(1) / Gamma(m) predicted for partial sums.
double selberg_delange_constant(const FrobMultSpec& spec, uint64_t P);

}  // namespace fc
