#include "frobcount/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

namespace fc::cli {

namespace {

ConfigError config_error(const std::string& what) { return ConfigError(what); }

const Json& require(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw config_error(std::string("missing key '") + key + "'");
    return j.at(key);
}

long long parse_ll(const Json& j) {
    i128 v = parse_integer(j);
    if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min())
        throw config_error("integer out of range");
    return (long long)v;
}

uint64_t parse_u64(const Json& j) {
    i128 v = parse_integer(j);
    if (v < 0 || v > i128(std::numeric_limits<uint64_t>::max())) throw config_error("expected a non-negative integer");
    return uint64_t(v);
}

// Integral doubles such as 1e5 are accepted where integers are expected.
uint64_t parse_count(const Json& j) {
    if (j.is_number_float()) {
        double d = j.get<double>();
        if (!(d >= 0) || d != std::floor(d) || d > 9e15) throw config_error("expected a non-negative integer");
        return uint64_t(d);
    }
    return parse_u64(j);
}

std::vector<int> parse_ints(const Json& j) {
    if (!j.is_array()) throw config_error("expected an array of integers");
    std::vector<int> out;
    for (const auto& x : j) {
        long long v = parse_ll(x);
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
            throw config_error("integer out of range");
        out.push_back(int(v));
    }
    return out;
}

std::set<uint64_t> parse_primes(const Json& j) {
    if (!j.is_array()) throw config_error("expected an array of primes");
    std::set<uint64_t> out;
    for (const auto& x : j) {
        uint64_t p = parse_u64(x);
        if (p < 2 || factor_integer(i128(p)).factors.size() != 1 || factor_integer(i128(p)).factors[0].e != 1)
            throw config_error("not a prime: " + std::to_string(p));
        out.insert(p);
    }
    return out;
}

BinaryForm parse_binary_form(const Json& j) {
    if (!j.is_array() || j.size() != 2) throw config_error("binary forms are [c0, c1] for c0 + c1 t");
    return {parse_ll(j[0]), parse_ll(j[1])};
}

std::vector<BinaryForm> parse_binary_forms(const Json& j) {
    if (!j.is_array()) throw config_error("expected an array of forms");
    std::vector<BinaryForm> out;
    for (const auto& f : j) out.push_back(parse_binary_form(f));
    return out;
}

DirichletCharacter parse_character(const Json& j) {
    if (j.contains("principal")) return DirichletCharacter::principal(parse_u64(j["principal"]));
    if (j.contains("kronecker")) return DirichletCharacter::kronecker(parse_integer(j["kronecker"]));
    if (j.contains("modulus")) {
        std::vector<int> e = parse_ints(require(j, "exponents"));
        return DirichletCharacter(parse_u64(j["modulus"]), parse_u64(require(j, "order")), e);
    }
    throw config_error("characters need 'principal', 'kronecker' or 'modulus'");
}

std::optional<std::map<std::string, Rational>> parse_distribution(const Json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    std::map<std::string, Rational> out;
    for (const auto& [k, v] : j.at(key).items()) out[k] = parse_rational_json(v);
    return out;
}

std::string rational_str(const Rational& r) { return to_string(r); }

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string sum_str(const SumValue& v) {
    if (v.integral) return to_string(v.exact);
    return fmt_double(v.approx.real());
}

Json sum_json(const SumValue& v) {
    Json j;
    j["integral"] = v.integral;
    if (v.integral) j["value"] = to_string(v.exact);
    else {
        j["re"] = v.approx.real();
        j["im"] = v.approx.imag();
    }
    return j;
}

Json delta_json(const DeltaExponent& d) {
    Json j;
    j["total"] = rational_str(d.total);
    j["approx"] = d.approx;
    j["exact"] = d.exact;
    Json per = Json::array();
    for (const auto& c : d.divisors) {
        Json e;
        e["divisor"] = c.label;
        e["delta"] = rational_str(c.delta);
        e["deficit"] = rational_str(c.deficit);
        e["exact"] = c.exact;
        per.push_back(e);
    }
    j["per_divisor"] = per;
    return j;
}

struct Output {
    Json summary = Json::object();
    std::optional<Table> table;
};

Table rows_table(const std::vector<CountRow>& rows) {
    Table t{{"B", "N", "undetermined", "degenerate", "points"}, {}};
    for (const auto& r : rows)
        t.rows.push_back({std::to_string(r.B), std::to_string(r.N), std::to_string(r.undetermined),
                          std::to_string(r.degenerate), std::to_string(r.points)});
    return t;
}

Json rows_json(const std::vector<CountRow>& rows) {
    Json a = Json::array();
    for (const auto& r : rows)
        a.push_back({{"B", r.B}, {"N", r.N}, {"undetermined", r.undetermined}, {"degenerate", r.degenerate},
                     {"points", r.points}});
    return a;
}

const char* kind_of(const Family& f) {
    return std::visit(
        [](const auto& x) -> const char* {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ConicBundleFamily>) return "conic";
            else if constexpr (std::is_same_v<T, MultinormFamily>) return "multinorm";
            else return "brauer";
        },
        f);
}

std::vector<CountRow> count_family(const Family& fam, const std::vector<uint64_t>& grid, const RunConfig& rc) {
    CorrelationOptions opt;
    opt.threads = rc.threads;
    if (auto* c = std::get_if<ConicBundleFamily>(&fam)) return count_conic_bundle(*c, grid, opt);
    if (auto* m = std::get_if<MultinormFamily>(&fam)) return count_multinorm(*m, grid);
    return brauer_zero_locus_count(std::get<QuaternionBrauerFamily>(fam), grid);
}

DeltaExponent family_delta(const Family& fam, uint64_t X) {
    if (auto* c = std::get_if<ConicBundleFamily>(&fam)) return delta_pi(*c);
    if (auto* m = std::get_if<MultinormFamily>(&fam)) return delta_pi(*m, X);
    return brauer_delta(std::get<QuaternionBrauerFamily>(fam));
}

std::string family_label(const Family& fam) {
    if (auto* c = std::get_if<ConicBundleFamily>(&fam)) return c->label();
    if (auto* m = std::get_if<MultinormFamily>(&fam)) return m->label();
    return "brauer";
}

double family_dimension(const Family& fam) {
    if (auto* b = std::get_if<QuaternionBrauerFamily>(&fam)) return b->n() + 1;
    return 2;
}

uint64_t mean_window(const Json& c) { return c.contains("mean_X") ? parse_count(c["mean_X"]) : 1000000; }

Output cmd_sum(const Json& c, const RunConfig& rc) {
    std::vector<LinearForm> forms;
    for (const auto& f : require(c, "forms")) forms.push_back(parse_linear_form(f));
    if (forms.empty()) throw config_error("sum needs at least one form");
    const int s = int(forms[0].coeffs.size());
    LinearFormSystem sys(s, forms);
    std::vector<FrobMultSpec> specs;
    if (c.contains("specs")) {
        for (const auto& sp : c["specs"]) specs.push_back(parse_spec(sp));
        if (specs.size() != forms.size()) throw config_error("one spec per form expected");
    } else {
        specs.assign(forms.size(), parse_spec(require(c, "spec")));
    }
    std::string box = c.value("box", std::string("cube"));
    if (box != "cube" && box != "unit_cube") throw config_error("box is 'cube' or 'unit_cube'");
    auto grid = parse_grid(c);
    std::optional<ConstraintSet> cons;
    ConstraintPath path = ConstraintPath::Valuation;
    if (c.contains("constraints")) {
        cons = parse_constraints(c["constraints"]);
        std::string p = c["constraints"].value("path", std::string("valuation"));
        if (p == "encoding") path = ConstraintPath::Encoding;
        else if (p != "valuation") throw config_error("constraint path is 'valuation' or 'encoding'");
    }
    CorrelationOptions opt;
    opt.threads = rc.threads;
    Output o;
    Table t{{"B", "value", "value_im", "integral", "points", "nonzero"}, {}};
    Json rows = Json::array();
    for (uint64_t B : grid) {
        LatticeBox lb = box == "cube" ? LatticeBox::cube(s, Rational(B)) : LatticeBox::unit_cube(s, Rational(B));
        CorrelationValue v = cons ? constrained_correlation_sum(lb, sys, specs, *cons, path, opt)
                                  : correlation_sum(lb, sys, specs, opt);
        t.rows.push_back({std::to_string(B), sum_str(v.value), v.value.integral ? "0" : fmt_double(v.value.approx.imag()),
                          v.value.integral ? "1" : "0", std::to_string(v.points), std::to_string(v.nonzero)});
        Json r;
        r["B"] = B;
        r["value"] = sum_json(v.value);
        r["points"] = v.points;
        r["nonzero"] = v.nonzero;
        rows.push_back(r);
    }
    o.summary["system"] = sys.str();
    o.summary["rows"] = rows;
    o.table = t;
    return o;
}

Output cmd_count(const Json& c, const RunConfig& rc) {
    Family fam = parse_family(require(c, "family"));
    auto grid = parse_grid(c);
    auto rows = count_family(fam, grid, rc);
    Output o;
    o.summary["family"] = family_label(fam);
    o.summary["kind"] = kind_of(fam);
    o.summary["delta"] = delta_json(family_delta(fam, mean_window(c)));
    o.summary["rows"] = rows_json(rows);
    o.table = rows_table(rows);
    return o;
}

Json fit_json(const FitReport& f) {
    Json j;
    j["c_est"] = f.c_est;
    j["spread"] = f.spread;
    j["delta_est"] = f.delta_est;
    j["drift"] = f.drift;
    j["monotone"] = f.monotone;
    j["delta_used"] = f.delta_used;
    j["dimension"] = f.dimension;
    j["ratios"] = f.ratios;
    return j;
}

Output cmd_fit(const Json& c, const RunConfig& rc) {
    Output o;
    if (c.contains("spec")) {
        FrobMultSpec spec = parse_spec(c["spec"]);
        auto grid = parse_grid(c);
        MeanValue m = mean(spec.base, mean_window(c), rc.seed);
        auto f = selberg_delange_fit(spec, m, grid);
        o.summary["mean"] = m.value.str();
        o.summary["mean_exact"] = m.exact;
        o.summary["c_est"] = f.c_est;
        o.summary["spread"] = f.spread;
        o.summary["drift"] = f.drift;
        o.summary["ratios"] = f.ratios;
        Table t{{"B", "ratio"}, {}};
        for (size_t i = 0; i < f.grid.size(); ++i) t.rows.push_back({std::to_string(f.grid[i]), fmt_double(f.ratios[i])});
        o.table = t;
        return o;
    }
    std::vector<FitSample> samples;
    double delta = 0, dim = 2;
    if (c.contains("samples")) {
        for (const auto& s : c["samples"]) samples.push_back({require(s, "B").get<double>(), require(s, "N").get<double>()});
        delta = to_double(parse_rational_json(require(c, "delta")));
        if (c.contains("dimension")) dim = c["dimension"].get<double>();
    } else {
        Family fam = parse_family(require(c, "family"));
        auto grid = parse_grid(c);
        auto rows = count_family(fam, grid, rc);
        for (const auto& r : rows) samples.push_back({double(r.B), double(r.N)});
        DeltaExponent d = family_delta(fam, mean_window(c));
        delta = c.contains("delta") ? to_double(parse_rational_json(c["delta"])) : d.approx;
        dim = c.contains("dimension") ? c["dimension"].get<double>() : family_dimension(fam);
        o.summary["family"] = family_label(fam);
        o.summary["delta_pi"] = delta_json(d);
        o.summary["rows"] = rows_json(rows);
    }
    FitReport f = fit_asymptotic(samples, dim, delta);
    Json fj = fit_json(f);
    for (const auto& [k, v] : fj.items()) o.summary[k] = v;
    Table t{{"B", "N", "ratio"}, {}};
    for (size_t i = 0; i < samples.size(); ++i)
        t.rows.push_back({fmt_double(samples[i].B), fmt_double(samples[i].N), fmt_double(f.ratios[i])});
    o.table = t;
    return o;
}

Output cmd_densities(const Json& c, const RunConfig&) {
    Json g = c.contains("identity_grid") ? c["identity_grid"] : Json::object();
    std::vector<uint64_t> primes = {2, 3, 5, 7};
    if (g.contains("primes")) {
        auto ps = parse_primes(g["primes"]);
        primes.assign(ps.begin(), ps.end());
    }
    const int r_max = g.contains("r_max") ? int(parse_ll(g["r_max"])) : 3;
    const int c_max = g.contains("c_max") ? int(parse_ll(g["c_max"])) : 2;
    const int a_max = g.contains("a_max") ? int(parse_ll(g["a_max"])) : 2;
    std::vector<LinearFormSystem> systems;
    if (g.contains("systems")) {
        for (const auto& sj : g["systems"]) {
            std::vector<LinearForm> forms;
            for (const auto& f : sj) forms.push_back(parse_linear_form(f));
            if (forms.empty()) throw config_error("empty system");
            systems.emplace_back(int(forms[0].coeffs.size()), forms);
        }
    } else {
        systems = identity_grid_systems(r_max);
    }
    auto rep = identity_grid(systems, primes, c_max, a_max);
    Output o;
    Table t{{"system", "p", "a", "c", "m", "lhs", "rhs", "rhs_next", "holds"}, {}};
    for (size_t i = 0; i < rep.results.size(); ++i) {
        const auto& r = rep.results[i];
        std::string cs;
        for (size_t k = 0; k < r.c.size(); ++k) cs += (k ? " " : "") + std::to_string(r.c[k]);
        t.rows.push_back({systems[size_t(rep.system[i])].str(), std::to_string(r.p), std::to_string(r.a), cs,
                          std::to_string(r.m), rational_str(r.lhs), rational_str(r.rhs), rational_str(r.rhs_next),
                          r.holds ? "1" : "0"});
    }
    o.summary["checks"] = rep.results.size();
    o.summary["failures"] = rep.failures;
    o.summary["all_passed"] = rep.all_passed();
    std::vector<uint64_t> bound_primes = {11, 13, 17, 19, 23, 29, 31};
    if (g.contains("bound_primes")) {
        auto ps = parse_primes(g["bound_primes"]);
        bound_primes.assign(ps.begin(), ps.end());
    }
    auto ab = alpha_bound_grid(systems, bound_primes, c_max);
    o.summary["alpha_bounds"] = {{"checks", ab.checks}, {"failures", ab.failures}, {"skipped_primes", ab.skipped_primes}};
    o.table = t;
    return o;
}

Output cmd_detect(const Json& c, const RunConfig& rc) {
    Family fam = parse_family(require(c, "family"));
    auto* conic = std::get_if<ConicBundleFamily>(&fam);
    if (!conic) throw config_error("detect needs a conic family");
    auto grid = parse_grid(c);
    std::set<uint64_t> S = c.contains("S") ? parse_primes(c["S"]) : std::set<uint64_t>{};
    std::vector<long long> anchor;
    if (c.contains("anchor")) {
        for (const auto& x : c["anchor"]) anchor.push_back(parse_ll(x));
    } else {
        long long H = c.contains("anchor_height") ? parse_ll(c["anchor_height"]) : 20;
        auto y = find_soluble_anchor(*conic, H);
        if (!y) throw DomainError("no everywhere locally soluble fibre of height <= " + std::to_string(H));
        anchor = *y;
    }
    std::optional<Rational> delta;
    if (c.contains("delta")) delta = parse_rational_json(c["delta"]);
    CorrelationOptions opt;
    opt.threads = rc.threads;
    Output o;
    Table t{{"B", "detector", "window_count"}, {}};
    Json rows = Json::array();
    ConstraintSet used;
    for (uint64_t B : grid) {
        auto d = detector_lower_count(*conic, B, S, anchor, delta, opt);
        uint64_t window = count_conic_window(*conic, B, d.constraints);
        used = d.constraints;
        t.rows.push_back({std::to_string(B), sum_str(d.value.value), std::to_string(window)});
        rows.push_back({{"B", B}, {"detector", sum_json(d.value.value)}, {"window_count", window}});
    }
    o.summary["family"] = conic->label();
    o.summary["anchor"] = anchor;
    o.summary["S"] = std::vector<uint64_t>(used.S.begin(), used.S.end());
    o.summary["delta"] = rational_str(used.delta);
    o.summary["theta"] = conic->theta_labels();
    o.summary["rows"] = rows;
    o.table = t;
    return o;
}

Output cmd_search(const Json& c, const RunConfig&) {
    uint64_t P = c.contains("P") ? parse_count(c["P"]) : 100;
    auto ws = pencil_counterexample_search(P);
    Output o;
    Table t{{"p", "t0", "t1", "soluble_plus", "soluble_minus"}, {}};
    Json arr = Json::array();
    for (const auto& w : ws) {
        t.rows.push_back({std::to_string(w.p), std::to_string(w.t0), std::to_string(w.t1), w.soluble_plus ? "1" : "0",
                          w.soluble_minus ? "1" : "0"});
        arr.push_back({{"p", w.p}, {"t0", w.t0}, {"t1", w.t1}, {"soluble_plus", w.soluble_plus},
                       {"soluble_minus", w.soluble_minus}});
    }
    o.summary["P"] = P;
    o.summary["witnesses"] = arr;
    if (c.contains("pencil")) {
        const Json& pj = c["pencil"];
        std::string kind = pj.value("kind", std::string("dp4"));
        PencilDetector pd;
        if (kind == "dp4") pd = PencilDetector::dp4();
        else if (kind == "split_conic") pd = PencilDetector::split_conic(parse_integer(require(pj, "a")), parse_integer(require(pj, "d")));
        else throw config_error("pencil kind is 'dp4' or 'split_conic'");
        Json sums = Json::array();
        for (uint64_t B : parse_grid(pj)) {
            auto s = pencil_detector_sum(pd, B);
            sums.push_back({{"B", B}, {"value", s.value}, {"points", s.points}});
        }
        o.summary["pencil_sums"] = sums;
    }
    o.table = t;
    return o;
}

}  // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"sum", "count", "fit", "densities", "detect", "search"};
    return c;
}

i128 parse_integer(const Json& j) {
    if (j.is_number_integer()) return j.is_number_unsigned() ? i128(j.get<uint64_t>()) : i128(j.get<long long>());
    if (j.is_string()) {
        try {
            return parse_i128(j.get<std::string>());
        } catch (const std::exception&) {
            throw config_error("not an integer: " + j.get<std::string>());
        }
    }
    throw config_error("expected an integer, got " + j.dump());
}

Rational parse_rational_json(const Json& j) {
    if (j.is_number_integer()) return Rational(BigInt(to_string(parse_integer(j))));
    if (j.is_string()) {
        try {
            return parse_rational(j.get<std::string>());
        } catch (const std::exception&) {
            throw config_error("not a rational: " + j.get<std::string>());
        }
    }
    throw config_error("expected an integer or a rational string, got " + j.dump());
}

Scalar parse_scalar(const Json& j) {
    if (j.is_object()) {
        Rational re = j.contains("re") ? parse_rational_json(j["re"]) : Rational(0);
        Rational im = j.contains("im") ? parse_rational_json(j["im"]) : Rational(0);
        return Scalar(re, im);
    }
    return Scalar(parse_rational_json(j));
}

IntPoly parse_poly(const Json& j) {
    if (!j.is_array() || j.empty()) throw config_error("polynomials are coefficient arrays, constant term first");
    IntPoly p;
    for (const auto& c : j) p.push_back(parse_ll(c));
    return p;
}

FrobMultSpec parse_spec(const Json& j) {
    if (!j.is_object()) throw config_error("specs are JSON objects");
    if (j.contains("library")) {
        std::string name = j["library"].get<std::string>();
        if (name == "tau") return FrobMultSpec::divisor_function();
        if (name == "two_squares") return FrobMultSpec::two_squares();
        if (name == "squarefree") return FrobMultSpec::squarefree();
        if (name == "one") return FrobMultSpec::one();
        if (name == "zero") return FrobMultSpec::zero();
        throw config_error("unknown library spec '" + name + "'");
    }
    FrobenianSpec base;
    if (j.contains("character_combo")) {
        std::vector<CharacterTerm> terms;
        for (const auto& t : j["character_combo"])
            terms.push_back({parse_character(require(t, "character")), parse_scalar(require(t, "coeff"))});
        base = FrobenianSpec::character_combo(terms);
    } else if (j.contains("residue_indicator")) {
        const Json& r = j["residue_indicator"];
        std::set<uint64_t> res;
        for (const auto& x : require(r, "residues")) res.insert(parse_u64(x));
        base = FrobenianSpec::residue_indicator(parse_u64(require(r, "q")), res);
    } else if (j.contains("split_pattern")) {
        const Json& r = j["split_pattern"];
        std::vector<IntPoly> polys;
        for (const auto& p : require(r, "polys")) polys.push_back(parse_poly(p));
        std::map<std::string, Scalar> table;
        for (const auto& [k, v] : require(r, "table").items()) table[k] = parse_scalar(v);
        base = FrobenianSpec::split_pattern(polys, table, parse_distribution(r, "distribution"));
    } else if (j.contains("root_indicator")) {
        const Json& r = j["root_indicator"];
        base = FrobenianSpec::root_indicator(parse_poly(require(r, "poly")), parse_distribution(r, "distribution"));
    } else {
        throw config_error("spec needs 'library', 'character_combo', 'residue_indicator', 'split_pattern' or 'root_indicator'");
    }
    if (j.contains("S")) {
        auto S = parse_primes(j["S"]);
        base.S.insert(S.begin(), S.end());
    }
    if (j.contains("label")) base.label = j["label"].get<std::string>();
    base.finalize();
    std::string rule = j.value("rule", std::string("multiplicative"));
    FrobMultSpec spec;
    if (rule == "indicator") spec = indicator_from_prime_set(base);
    else if (rule == "multiplicative") spec = FrobMultSpec::completely_multiplicative(base, j.contains("H") ? parse_ll(j["H"]) : 1);
    else throw config_error("rule is 'multiplicative' or 'indicator'");
    if (j.contains("label")) spec.label = j["label"].get<std::string>();
    spec.validate();
    return spec;
}

LinearForm parse_linear_form(const Json& j) {
    LinearForm f;
    if (j.is_array()) {
        for (const auto& c : j) f.coeffs.push_back(parse_ll(c));
        return f;
    }
    for (const auto& c : require(j, "coeffs")) f.coeffs.push_back(parse_ll(c));
    if (j.contains("constant")) f.constant = parse_ll(j["constant"]);
    return f;
}

std::vector<uint64_t> parse_grid(const Json& j) {
    std::vector<uint64_t> g;
    if (j.contains("B")) {
        const Json& b = j["B"];
        if (b.is_array())
            for (const auto& x : b) g.push_back(parse_count(x));
        else
            g.push_back(parse_count(b));
    } else if (j.contains("grid")) {
        const Json& gr = j["grid"];
        double lo = require(gr, "min").get<double>(), hi = require(gr, "max").get<double>();
        long long n = parse_ll(require(gr, "points"));
        if (n < 2 || n > 100000) throw config_error("grid points must be between 2 and 100000");
        try {
            g = geometric_grid(lo, hi, int(n));
        } catch (const DomainError& e) {
            throw config_error(e.what());
        }
    } else {
        throw config_error("missing 'B' or 'grid'");
    }
    if (g.empty()) throw config_error("empty B grid");
    for (size_t i = 0; i < g.size(); ++i) {
        if (g[i] < 1) throw config_error("B must be positive");
        if (i && g[i] <= g[i - 1]) throw config_error("B grid must be strictly increasing");
    }
    return g;
}

ConstraintSet parse_constraints(const Json& j) {
    ConstraintSet c;
    for (const auto& x : require(j, "anchor")) c.anchor.push_back(parse_ll(x));
    if (j.contains("delta")) c.delta = parse_rational_json(j["delta"]);
    if (j.contains("S")) c.S = parse_primes(j["S"]);
    c.primitive = j.value("primitive", true);
    c.coprime_to_S = j.value("coprime_to_S", false);
    c.archimedean = j.value("archimedean", true);
    return c;
}

Family parse_family(const Json& j) {
    std::string kind = require(j, "kind").get<std::string>();
    if (kind == "conic") {
        if (j.contains("library")) {
            std::string name = j["library"].get<std::string>();
            for (auto& nf : conic_family_library())
                if (nf.name == name) return nf.family;
            throw config_error("unknown conic family '" + name + "'");
        }
        std::vector<int> e = j.contains("exponents") ? parse_ints(j["exponents"]) : std::vector<int>{};
        return ConicBundleFamily(parse_integer(require(j, "a")), parse_binary_forms(require(j, "forms")), e,
                                 j.value("label", std::string()));
    }
    if (kind == "multinorm") {
        std::vector<IntPoly> fields;
        for (const auto& g : require(j, "fields")) fields.push_back(parse_poly(g));
        std::vector<int> e = j.contains("exponents") ? parse_ints(j["exponents"]) : std::vector<int>{};
        return MultinormFamily(fields, parse_binary_forms(require(j, "forms")), e, parse_distribution(j, "distribution"),
                               j.value("label", std::string()));
    }
    if (kind == "brauer") {
        std::vector<std::vector<long long>> hyper;
        for (const auto& h : require(j, "hyperplanes")) {
            std::vector<long long> row;
            for (const auto& x : h) row.push_back(parse_ll(x));
            hyper.push_back(row);
        }
        std::vector<BrauerClass> classes;
        for (const auto& b : require(j, "classes")) classes.push_back({parse_integer(require(b, "a")), parse_ints(require(b, "m"))});
        return QuaternionBrauerFamily(int(parse_ll(require(j, "n"))), hyper, classes);
    }
    throw config_error("family kind is 'conic', 'multinorm' or 'brauer'");
}

std::string to_csv(const Table& t) {
    auto cell = [](const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + "\"";
    };
    std::string out;
    auto line = [&](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += cell(row[i]);
        }
        out += '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

void write_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw CapacityError("cannot write " + tmp.string());
        f << contents;
        f.flush();
        if (!f) throw CapacityError("cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw CapacityError("cannot rename to " + target.string() + ": " + ec.message());
    }
}

int run(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    auto fail = [&](const char* kind, const std::string& msg, int code) {
        Json e;
        e["error"] = {{"kind", kind}, {"message", msg}};
        err << e.dump() << "\n";
        return code;
    };
    try {
        if (std::find(commands().begin(), commands().end(), rc.command) == commands().end())
            throw config_error("unknown command '" + rc.command + "'");
        if (rc.threads < 1) throw config_error("threads must be at least 1");
        if (!rc.config.is_object()) throw config_error("the config must be a JSON object");
        if (!rc.capacity.empty()) apply_capacity_overrides(rc.capacity);
        if (rc.config.contains("capacity")) {
            const Json& cap = rc.config["capacity"];
            if (cap.is_string()) apply_capacity_overrides(cap.get<std::string>());
            else
                for (const auto& [k, v] : cap.items()) apply_capacity_overrides(k + "=" + std::to_string(parse_count(v)));
        }
        Output o;
        const Json& c = rc.config;
        err << "frobcount: running " << rc.command << "\n";
        if (rc.command == "sum") o = cmd_sum(c, rc);
        else if (rc.command == "count") o = cmd_count(c, rc);
        else if (rc.command == "fit") o = cmd_fit(c, rc);
        else if (rc.command == "densities") o = cmd_densities(c, rc);
        else if (rc.command == "detect") o = cmd_detect(c, rc);
        else o = cmd_search(c, rc);

        Json summary;
        summary["command"] = rc.command;
        for (const auto& [k, v] : o.summary.items()) summary[k] = v;
        if (!rc.out_dir.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(rc.out_dir, ec);
            if (ec) throw config_error("cannot create output directory " + rc.out_dir);
            const std::string base = (std::filesystem::path(rc.out_dir) / rc.command).string();
            write_atomic(base + ".json", summary.dump(2) + "\n");
            if (o.table) write_atomic(base + ".csv", to_csv(*o.table));
        }
        out << summary.dump() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        return fail("config", e.what(), 2);
    } catch (const DomainError& e) {
        return fail("domain", e.what(), 2);
    } catch (const Json::exception& e) {
        return fail("config", e.what(), 2);
    } catch (const CapacityError& e) {
        return fail("capacity", e.what(), 1);
    } catch (const RangeError& e) {
        return fail("capacity", e.what(), 1);
    } catch (const std::bad_alloc&) {
        return fail("capacity", "out of memory", 1);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Frobenian multiplicative functions, correlation sums and locally soluble fibre counts"};
    RunConfig rc;
    std::string config_path;
    app.add_option("command", rc.command, "sum, count, fit, densities, detect or search")->required();
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", rc.out_dir, "output directory for CSV and JSON reports");
    app.add_option("--threads", rc.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", rc.seed, "seed for empirical mean sampling");
    auto fail = [&](const std::string& msg) {
        Json e;
        e["error"] = {{"kind", "config"}, {"message", msg}};
        err << e.dump() << "\n";
        return 2;
    };
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(e.what());
    }
    if (const char* cap = std::getenv("FROBCOUNT_CAPACITY")) rc.capacity = cap;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) return fail("cannot read config " + config_path);
        try {
            rc.config = Json::parse(f);
        } catch (const Json::exception& e) {
            return fail(std::string("malformed config: ") + e.what());
        }
    }
    return run(rc, out, err);
}

}  // namespace fc::cli
