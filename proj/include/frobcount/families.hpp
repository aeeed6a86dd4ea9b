#pragma once

#include "frobcount/correlations.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fc {

// c0 x0 + c1 x1, the homogenisation of L(t) = c0 + c1 t with t = x1 / x0.
struct BinaryForm {
    long long c0 = 0;
    long long c1 = 0;

    i128 eval(long long x0, long long x1) const { return i128(c0) * x0 + i128(c1) * x1; }
    LinearForm linear() const { return {{c0, c1}, 0}; }
    std::string str() const;
};

// x^2 - a y^2 = L_1(t)^a_1 ... L_r(t)^a_r z^2 over t = x1 / x0. The fibre at
// infinity enters through x0 when the total degree is odd.
class ConicBundleFamily {
public:
    ConicBundleFamily(i128 a, std::vector<BinaryForm> forms, std::vector<int> exponents = {},
                      std::string label = "");

    i128 a() const { return a_; }  // squarefree part of the given a
    const std::vector<BinaryForm>& forms() const { return forms_; }
    const std::vector<int>& exponents() const { return exps_; }
    bool infinity_odd() const { return infinity_odd_; }
    const std::set<uint64_t>& S0() const { return S0_; }  // primes of 2a and the resultants
    const std::string& label() const { return label_; }
    // Forms over the non-split fibres: odd exponents, then x0 when infinity_odd.
    std::vector<BinaryForm> theta_forms() const;
    std::vector<std::string> theta_labels() const;

private:
    i128 a_;
    std::vector<BinaryForm> forms_;
    std::vector<int> exps_;
    bool infinity_odd_ = false;
    std::set<uint64_t> S0_;
    std::string label_;
};

struct NamedConicFamily {
    std::string name;
    ConicBundleFamily family;
};

std::vector<NamedConicFamily> conic_family_library();

// Sign times the primes with odd exponent in M(x); nullopt for M(x) = 0.
std::optional<i128> conic_fibre_class(const ConicBundleFamily& fam, long long x0, long long x1);
// DomainError for a degenerate fibre.
bool conic_fibre_soluble(const ConicBundleFamily& fam, long long x0, long long x1, Place v);
// Soluble at the real place and every prime dividing 2a M(x).
bool conic_fibre_els(const ConicBundleFamily& fam, long long x0, long long x1);

struct CountRow {
    uint64_t B = 0;
    uint64_t N = 0;            // soluble fibres (certified, for multinorm)
    uint64_t undetermined = 0;
    uint64_t degenerate = 0;
    uint64_t points = 0;       // projective points of height <= B
};

// Called with the fibre and its verdict (1 soluble, 0 not, -1 undetermined).
using FibreVisitor = std::function<void(long long x0, long long x1, int verdict)>;

// Projective points (x0 : x1) with x0 > 0, or (0 : 1), of height <= B, one
// row per B of the increasing grid. The visitor sees nondegenerate fibres of height
// <= max B in a fixed order and disables threading.
std::vector<CountRow> count_conic_bundle(const ConicBundleFamily& fam, const std::vector<uint64_t>& grid,
                                         const CorrelationOptions& opt = {}, const FibreVisitor& visit = {});

// The indicator of primes p with kronecker(a, p) = 1, and 1 on S0 and S.
FrobMultSpec conic_detector_spec(const ConicBundleFamily& fam, const std::set<uint64_t>& S = {});
// prod over theta of the detector at |L_theta(x)|.
int conic_detector_value(const ConicBundleFamily& fam, long long x0, long long x1);

// A delta for which every fibre in the window keeps the anchor's square
// classes at the primes of S and the real signs of the forms.
Rational anchor_delta(const ConicBundleFamily& fam, const std::vector<long long>& anchor,
                      const std::set<uint64_t>& S);

// First nondegenerate, everywhere locally soluble fibre of height <= H with x0 > 0.
std::optional<std::vector<long long>> find_soluble_anchor(const ConicBundleFamily& fam, long long H);

struct DetectorCount {
    CorrelationValue value;
    ConstraintSet constraints;   // with the enlarged S and the delta used
    std::vector<LinearForm> forms;  // sign adjusted theta forms
};

// S is enlarged by S0 and the primes dividing the theta forms at the anchor.
// DomainError when the anchor fibre is degenerate or not everywhere locally soluble.
DetectorCount detector_lower_count(const ConicBundleFamily& fam, uint64_t B, const std::set<uint64_t>& S,
                                   const std::vector<long long>& anchor, std::optional<Rational> delta = {},
                                   const CorrelationOptions& opt = {});

// Everywhere locally soluble fibres of height <= B in the window of c.
uint64_t count_conic_window(const ConicBundleFamily& fam, uint64_t B, const ConstraintSet& c);

struct DivisorContribution {
    std::string label;
    Rational delta;      // delta_D
    Rational deficit;    // 1 - delta_D
    bool exact = true;
};

struct DeltaExponent {
    std::vector<DivisorContribution> divisors;
    Rational total;
    bool exact = true;
    double approx = 0;   // total as a double, including empirical densities
};

DeltaExponent delta_pi(const ConicBundleFamily& fam);

enum class LocalNorm { Norm, NotNorm, Undetermined };
std::string to_string(LocalNorm v);

// Norm_{E/Q}(t) = x0^a0 L_1^a_1 ... L_r^a_r with E the product of the fields
// Q[x]/(g_i) and a0 = -(a_1 + ... + a_r) mod e.
class MultinormFamily {
public:
    // ConfigError unless every g_i is monic and certified irreducible. The
    // distribution gives the densities of the joint splitting pattern keys.
    MultinormFamily(std::vector<IntPoly> fields, std::vector<BinaryForm> forms, std::vector<int> exponents = {},
                    std::optional<std::map<std::string, Rational>> distribution = {}, std::string label = "");

    const std::vector<IntPoly>& fields() const { return fields_; }
    const std::vector<BinaryForm>& forms() const { return forms_; }
    const std::vector<int>& exponents() const { return exps_; }
    int e() const { return e_; }
    int a0() const { return a0_; }
    const std::set<uint64_t>& S() const { return S_; }  // primes dividing a discriminant
    bool all_quadratic() const;
    bool real_norms_all() const { return real_all_; }  // some E_i has a real place
    const std::optional<std::map<std::string, Rational>>& distribution() const { return dist_; }
    const std::string& label() const { return label_; }

    // gcd of the local degrees at an unramified p.
    int local_degree_gcd(uint64_t p) const;

    struct NormGroup {
        int k0 = 0;                 // 1 + U_k0 lies in the norm group
        uint64_t modulus = 1;       // p^k0
        std::set<std::pair<int, uint64_t>> elements;  // (v mod e, unit mod p^k0)
        bool stable = false;        // unchanged at one more digit of precision
        bool complete = false;      // enumeration finished within the budget
    };
    // Norms from Z_p[theta_i] generating the image of the norm group in
    // Q_p^* / (p^e, 1 + p^k0 Z_p).
    const NormGroup& norm_group(uint64_t p) const;

private:
    std::vector<IntPoly> fields_;
    std::vector<BinaryForm> forms_;
    std::vector<int> exps_;
    int e_ = 1;
    int a0_ = 0;
    std::set<uint64_t> S_;
    bool real_all_ = false;
    std::optional<std::map<std::string, Rational>> dist_;
    std::string label_;
    struct GroupCache {
        std::mutex mu;
        std::map<uint64_t, NormGroup> groups;
    };
    std::shared_ptr<GroupCache> cache_ = std::make_shared<GroupCache>();
};

LocalNorm multinorm_local_test(const MultinormFamily& fam, const FactoredInteger& value, uint64_t p);
LocalNorm multinorm_real_test(const MultinormFamily& fam, int sign);
// DomainError when x0 = 0 or some form vanishes.
LocalNorm multinorm_fibre(const MultinormFamily& fam, long long x0, long long x1);

// Same enumeration as count_conic_bundle; x0 = 0 is degenerate here.
std::vector<CountRow> count_multinorm(const MultinormFamily& fam, const std::vector<uint64_t>& grid,
                                      const FibreVisitor& visit = {});

DeltaExponent delta_pi(const MultinormFamily& fam, uint64_t X = 1000000);

// Quaternion classes (a_i, prod_D D^m_iD) on the complement of hyperplanes in P^n.
struct BrauerClass {
    i128 a = 1;
    std::vector<int> m;  // one exponent per hyperplane, summing to 0
};

class QuaternionBrauerFamily {
public:
    QuaternionBrauerFamily(int n, std::vector<std::vector<long long>> hyperplanes, std::vector<BrauerClass> classes);

    int n() const { return n_; }
    const std::vector<std::vector<long long>>& hyperplanes() const { return hyper_; }
    const std::vector<BrauerClass>& classes() const { return classes_; }

private:
    int n_;
    std::vector<std::vector<long long>> hyper_;
    std::vector<BrauerClass> classes_;
};

DeltaExponent brauer_delta(const QuaternionBrauerFamily& fam);
// nullopt when x lies on a hyperplane.
std::optional<bool> brauer_classes_vanish(const QuaternionBrauerFamily& fam, const std::vector<long long>& x);
// Primitive x with first nonzero coordinate positive, off the hyperplanes.
// CapacityError for n > 2.
std::vector<CountRow> brauer_zero_locus_count(const QuaternionBrauerFamily& fam, const std::vector<uint64_t>& grid);

// x^2 - t y^2 = (t^2 - 2) z^2 at t = t0 / t1.
bool dp4_fibre_soluble(long long t0, long long t1, Place v);

struct PencilWitness {
    uint64_t p = 0;
    long long t0 = 0, t1 = 0;     // p = t0^2 - 2 t1^2
    bool soluble_plus = false;    // fibre over (t0 : t1)
    bool soluble_minus = false;   // fibre over (t0 : -t1)
};

std::vector<PencilWitness> pencil_counterexample_search(uint64_t P);

// Detectors at the points x0 - alpha x1 over k = Q(sqrt d) (here t = x0 / x1):
// p splits through (p, x0 - r x1) and the prime counts when beta is a square
// mod that prime. Rational parts test kronecker(a_j, p) = 1 on the primes of L_j(x).
struct PencilDetector {
    i128 d = 2;
    QuadElem beta;
    std::vector<std::pair<BinaryForm, i128>> rational;
    std::set<uint64_t> S;

    void validate() const;  // DomainError unless d is squarefree and not 0 or 1

    static PencilDetector dp4();  // the pencil x^2 - t y^2 = (t^2 - 2) z^2
    // x^2 - a y^2 = (t^2 - d) z^2 with beta = a.
    static PencilDetector split_conic(i128 a, i128 d);
};

int pencil_detector_value(const PencilDetector& pd, long long x0, long long x1);

struct PencilSum {
    uint64_t B = 0;
    long long value = 0;
    uint64_t points = 0;
};

// Over all coprime (x0, x1) with |x_i| <= B, both signs, optionally in a window.
PencilSum pencil_detector_sum(const PencilDetector& pd, uint64_t B, const std::optional<ConstraintSet>& c = {});

}  // namespace fc
