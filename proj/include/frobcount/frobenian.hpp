#pragma once

#include "frobcount/arith.hpp"

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fc {

// Values are e(k / order) for the stored exponents k; non-units carry -1.
class DirichletCharacter {
public:
    DirichletCharacter() : exps_{0} {}
    DirichletCharacter(uint64_t modulus, uint64_t order, std::vector<int> exponents);

    static DirichletCharacter principal(uint64_t q);
    // n -> kronecker(d, n) on the modulus |d| (d = 0, 1 mod 4) or 4|d|.
    static DirichletCharacter kronecker(i128 d);

    uint64_t modulus() const { return q_; }
    uint64_t order() const { return order_; }
    const std::vector<int>& exponents() const { return exps_; }

    // -1 when gcd(n, q) > 1.
    int exponent(i128 n) const { return exps_[mod_of(n, q_)]; }
    std::complex<double> value(i128 n) const;
    // Exact when the order divides 4.
    Scalar exact_value(i128 n) const;

    bool is_principal() const;
    bool is_real() const { return order_ <= 2; }
    uint64_t conductor() const;
    bool is_primitive() const { return conductor() == q_; }
    DirichletCharacter primitive() const;
    // Same character read modulo a multiple of the modulus.
    DirichletCharacter lift(uint64_t multiple) const;
    DirichletCharacter conj() const;
    std::string label() const;

    bool operator==(const DirichletCharacter& o) const {
        return q_ == o.q_ && order_ == o.order_ && exps_ == o.exps_;
    }
    bool operator!=(const DirichletCharacter& o) const { return !(*this == o); }
    bool operator<(const DirichletCharacter& o) const;

    friend DirichletCharacter operator*(const DirichletCharacter& a, const DirichletCharacter& b);

private:
    void normalize();

    uint64_t q_ = 1;
    uint64_t order_ = 1;
    std::vector<int> exps_;
};

std::vector<DirichletCharacter> characters_mod(uint64_t q);
// Every primitive character with conductor <= bound, sorted by conductor.
std::vector<DirichletCharacter> primitive_characters(uint64_t bound);

struct CharacterTerm {
    DirichletCharacter chi;
    Scalar coeff;
};

struct FrobenianSpec {
    enum class Kind { CharacterCombo, SplitPattern };

    Kind kind = Kind::CharacterCombo;
    std::string label;

    std::vector<CharacterTerm> terms;

    // Pattern keys of several polynomials are joined with '|'. A "*" entry
    // is the default for unlisted keys.
    std::vector<IntPoly> polys;
    std::map<std::string, Scalar> table;
    std::optional<std::map<std::string, Rational>> distribution;

    // Pointwise character factors applied by twist().
    std::vector<DirichletCharacter> twists;

    std::set<uint64_t> S;
    std::map<uint64_t, Scalar> exceptional;
    Scalar default_exceptional = 0;

    static FrobenianSpec character_combo(std::vector<CharacterTerm> terms);
    static FrobenianSpec constant(Scalar c);
    static FrobenianSpec split_pattern(std::vector<IntPoly> polys, std::map<std::string, Scalar> table,
                                       std::optional<std::map<std::string, Rational>> distribution = {});
    // Indicator of primes where the polynomial has a root (pattern contains a 1).
    static FrobenianSpec root_indicator(const IntPoly& f,
                                        std::optional<std::map<std::string, Rational>> distribution = {});
    // Primes p with p = r mod q for r in residues.
    static FrobenianSpec residue_indicator(uint64_t q, const std::set<uint64_t>& residues);

    // Adds ramified primes to S and rebuilds lookup caches; throws ConfigError
    // when the class function table is not total.
    void finalize();
    Scalar exceptional_value(uint64_t p) const;
    // Residue-class modulus of a CharacterCombo spec including twists.
    uint64_t combo_modulus() const;
    bool real_valued() const;

    struct Cache;
    std::shared_ptr<const Cache> cache;
};

Scalar eval_prime(const FrobenianSpec& spec, uint64_t p);
// Distinct values taken on primes, exceptional values included.
std::vector<Scalar> prime_value_set(const FrobenianSpec& spec);
std::complex<double> eval_prime_value(const FrobenianSpec& spec, uint64_t p);

struct MeanValue {
    Scalar value;
    bool exact = true;
    double sample_bound = 0;  // X of the window (X/2, X]
    double error = 0;
    bool heuristic = false;  // empirical without a certified bound
};

MeanValue mean(const FrobenianSpec& spec, uint64_t X = 1000000, uint64_t seed = 0);

// Offset logarithmic integral li(x) - li(2).
double offset_li(double x);

struct PrimeSumReport {
    int variant = 1;
    double X = 0;
    std::complex<double> observed;
    std::complex<double> predicted;
    double deviation = 0;
    // Constant estimates at X/8, X/4, X/2, X for variants 2 and 4.
    std::vector<std::complex<double>> constants;
    std::complex<double> constant_estimate;
};

PrimeSumReport prime_sum_check(const FrobenianSpec& spec, uint64_t X, int variant);

FrobenianSpec twist(const FrobenianSpec& spec, const DirichletCharacter& chi);

struct ExceptionalCharacters {
    std::vector<DirichletCharacter> characters;
    bool exact = false;     // decided on residue classes rather than sampled primes
    bool complete = false;  // every primitive character with rho chi = rho is listed
};

ExceptionalCharacters exceptional_characters(const FrobenianSpec& spec, uint64_t conductor_bound);

}  // namespace fc
