#include "frobcount/correlations.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>

namespace fc {

namespace {

Rational floor_rational(const Rational& q) {
    BigInt n = numerator(q), d = denominator(q);
    BigInt f = n / d;
    if (n < 0 && f * d != n) f -= 1;
    return Rational(f);
}

long long floor_ll(const Rational& q) { return (long long)numerator(floor_rational(q)); }
long long ceil_ll(const Rational& q) { return -floor_ll(-q); }

// floor(a / b) and ceil(a / b) for b != 0.
long long floor_div(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return (long long)q;
}
long long ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

}  // namespace

LatticeBox LatticeBox::cube(int s, Rational B) {
    LatticeBox box;
    box.s = s;
    box.B = B;
    box.shift.assign(s, 0);
    for (int i = 0; i < s; ++i)
        for (int sign : {1, -1}) {
            HalfSpace h;
            h.normal.assign(s, 0);
            h.normal[i] = sign;
            h.bound = 1;
            box.region.push_back(h);
        }
    return box;
}

LatticeBox LatticeBox::unit_cube(int s, Rational B) {
    LatticeBox box = cube(s, B);
    for (auto& h : box.region)
        for (int i = 0; i < s; ++i)
            if (h.normal[i] == -1) h.bound = 0;
    return box;
}

void LatticeBox::validate() const {
    if (s < 1) throw ConfigError("box dimension must be positive");
    if (B <= 0) throw ConfigError("box scale must be positive");
    if (int(shift.size()) != s) throw ConfigError("shift has the wrong dimension");
    for (const auto& h : region)
        if (int(h.normal.size()) != s) throw ConfigError("half-space has the wrong dimension");
    // The region must sit in the cube: each coordinate bound is implied by
    // the half-spaces when the cube's own faces are among them.
    for (int i = 0; i < s; ++i)
        for (int sign : {1, -1}) {
            bool found = false;
            for (const auto& h : region) {
                bool axis = true;
                for (int j = 0; j < s; ++j)
                    if (h.normal[j] != (j == i ? sign : 0)) axis = false;
                if (axis && h.bound <= 1) found = true;
            }
            if (!found) throw ConfigError("region must include the faces of [-1, 1]^s");
        }
    // An interior point on a grid of step 1/8.
    const int steps = 16;
    std::vector<std::vector<double>> normals;
    std::vector<double> bounds;
    for (const auto& h : region) {
        normals.emplace_back(h.normal.begin(), h.normal.end());
        bounds.push_back(double(h.bound));
    }
    size_t total = 1;
    for (int i = 0; i < s && total < 400000; ++i) total *= steps + 1;
    std::vector<double> y(s);
    for (size_t n = 0; n < total; ++n) {
        size_t t = n;
        for (int i = 0; i < s; ++i) {
            y[i] = double(int(t % (steps + 1)) - steps / 2) / (steps / 2);
            t /= steps + 1;
        }
        bool interior = true;
        for (size_t k = 0; k < normals.size() && interior; ++k) {
            double v = 0;
            for (int i = 0; i < s; ++i) v += normals[k][i] * y[i];
            interior = v < bounds[k] - 1e-12;
        }
        if (interior) return;
    }
    throw ConfigError("region has no interior point");
}

bool LatticeBox::contains(const std::vector<long long>& x) const {
    for (const auto& h : region) {
        Rational v = 0;
        for (int i = 0; i < s; ++i) v += Rational(h.normal[i]) * (Rational(x[i]) - shift[i]);
        if (v > h.bound * B) return false;
    }
    return true;
}

std::pair<long long, long long> LatticeBox::coordinate_range(int i) const {
    return {ceil_ll(shift[i] - B), floor_ll(shift[i] + B)};
}

namespace {

// rho_j on positive integers, from a table when the values are small.
class Evaluator {
public:
    Evaluator(const FrobMultSpec& spec, uint64_t max_value) : spec_(spec), integral_(spec.integer_valued()) {
        if (max_value <= (uint64_t(1) << 22)) {
            if (integral_) itab_ = integer_value_table(spec, max_value);
            else ctab_ = value_table(spec, max_value);
            tabled_ = true;
        } else if (max_value <= capacity().spf_bound) {
            spf_ = shared_spf(max_value);
        }
    }

    bool integral() const { return integral_; }

    long long int_at(uint64_t n) const {
        if (tabled_) return itab_[n];
        return std::llround(evaluate_value(spec_, factor(n)).real());
    }
    std::complex<double> at(uint64_t n) const {
        if (tabled_) return integral_ ? std::complex<double>(double(itab_[n]), 0.0) : ctab_[n];
        return evaluate_value(spec_, factor(n));
    }

private:
    FactoredInteger factor(uint64_t n) const { return spf_ ? spf_factor(i128(n), *spf_) : factor_integer(i128(n)); }

    const FrobMultSpec& spec_;
    bool integral_;
    bool tabled_ = false;
    std::vector<long long> itab_;
    std::vector<std::complex<double>> ctab_;
    std::shared_ptr<const SpfTable> spf_;
};

struct Plan {
    int s;
    std::vector<std::vector<long long>> normals;
    std::vector<long long> limits;  // normal . x <= limit
    std::vector<std::pair<long long, long long>> range;
};

Plan make_plan(const LatticeBox& box) {
    box.validate();
    Plan plan;
    plan.s = box.s;
    for (const auto& h : box.region) {
        Rational rhs = h.bound * box.B;
        for (int i = 0; i < box.s; ++i) rhs += Rational(h.normal[i]) * box.shift[i];
        plan.normals.push_back(h.normal);
        plan.limits.push_back(floor_ll(rhs));
    }
    for (int i = 0; i < box.s; ++i) plan.range.push_back(box.coordinate_range(i));
    return plan;
}

// Anchor window |x_i y_0 - y_i x_0| < delta |x_0 y_0| for i >= 1.
struct Window {
    std::vector<long long> y;
    i128 num = 1, den = 1;  // delta
};

bool window_ok(const Window& w, const std::vector<long long>& x, int i) {
    i128 diff = i128(x[i]) * w.y[0] - i128(w.y[i]) * x[0];
    if (diff < 0) diff = -diff;
    i128 scale = i128(x[0]) * w.y[0];
    if (scale < 0) scale = -scale;
    return diff * w.den < w.num * scale;
}

// Visits every lattice point of the plan with x_0 in [lo, hi].
void enumerate(const Plan& plan, long long lo, long long hi, const Window* win,
               const std::function<void(const std::vector<long long>&)>& visit) {
    const int s = plan.s;
    std::vector<long long> x(s, 0);
    std::function<void(int)> rec = [&](int i) {
        long long a = plan.range[i].first, b = plan.range[i].second;
        if (i == 0) {
            a = std::max(a, lo);
            b = std::min(b, hi);
        }
        if (win && i > 0) {
            if (x[0] == 0) return;
            long double c = (long double)x[0] * win->y[i] / win->y[0];
            long double d = (long double)std::llabs(x[0]) * (long double)win->num / (long double)win->den;
            a = std::max(a, (long long)std::floor(c - d) - 1);
            b = std::min(b, (long long)std::ceil(c + d) + 1);
        }
        if (i == s - 1) {
            // Exact interval for the last coordinate from the half-spaces.
            for (size_t h = 0; h < plan.normals.size(); ++h) {
                i128 rest = plan.limits[h];
                for (int j = 0; j < s - 1; ++j) rest -= i128(plan.normals[h][j]) * x[j];
                long long n = plan.normals[h][s - 1];
                if (n > 0) b = std::min<long long>(b, floor_div(rest, n));
                else if (n < 0) a = std::max<long long>(a, ceil_div(-rest, -n));
                else if (rest < 0) return;
            }
            for (long long v = a; v <= b; ++v) {
                x[i] = v;
                if (win && !window_ok(*win, x, i)) continue;
                visit(x);
            }
            return;
        }
        for (long long v = a; v <= b; ++v) {
            x[i] = v;
            if (win && i > 0 && !window_ok(*win, x, i)) continue;
            rec(i + 1);
        }
    };
    rec(0);
}

struct SlabResult {
    i128 exact = 0;
    CompensatedSum approx;
    uint64_t points = 0, nonzero = 0;
};

uint64_t max_form_value(const Plan& plan, const LinearFormSystem& sys) {
    u128 best = 0;
    for (const auto& f : sys.forms()) {
        u128 v = u128(std::llabs(f.constant));
        for (int i = 0; i < plan.s; ++i) {
            u128 m = u128(std::max(std::llabs(plan.range[i].first), std::llabs(plan.range[i].second)));
            v += u128(std::llabs(f.coeffs[i])) * m;
        }
        best = std::max(best, v);
    }
    if (best >= u128(capacity().value_bound)) throw CapacityError("linear form values exceed the value bound");
    return uint64_t(best);
}

CorrelationValue run_sum(const Plan& plan, const LinearFormSystem& sys, const std::vector<FrobMultSpec>& specs,
                         const CorrelationOptions& opt, const Window* win,
                         const std::function<bool(const std::vector<long long>&)>& accept) {
    if (sys.s() != plan.s) throw DomainError("system and box dimensions differ");
    if (int(specs.size()) != sys.r()) throw DomainError("one spec per form expected");
    if (opt.threads < 1) throw ConfigError("thread count must be positive");
    if (opt.slab < 1) throw ConfigError("slab size must be positive");
    const uint64_t maxv = max_form_value(plan, sys);
    std::vector<Evaluator> evals;
    evals.reserve(specs.size());
    bool integral = true;
    for (const auto& sp : specs) {
        evals.emplace_back(sp, std::max<uint64_t>(maxv, 1));
        integral = integral && evals.back().integral();
    }

    const long long lo = plan.range[0].first, hi = plan.range[0].second;
    const long long nslabs = hi < lo ? 0 : (hi - lo) / opt.slab + 1;
    std::vector<SlabResult> results(size_t(std::max<long long>(nslabs, 0)));
    std::atomic<long long> next{0};
    auto worker = [&]() {
        while (true) {
            long long k = next.fetch_add(1);
            if (k >= nslabs) return;
            SlabResult& res = results[size_t(k)];
            long long a = lo + k * opt.slab, b = std::min(hi, a + opt.slab - 1);
            enumerate(plan, a, b, win, [&](const std::vector<long long>& x) {
                ++res.points;
                if (accept && !accept(x)) return;
                if (integral) {
                    i128 prod = 1;
                    for (int j = 0; j < sys.r() && prod != 0; ++j) {
                        i128 v = sys[j].eval(x);
                        prod = v <= 0 ? 0 : prod * evals[j].int_at(uint64_t(v));
                    }
                    if (prod != 0) {
                        ++res.nonzero;
                        res.exact += prod;
                    }
                } else {
                    std::complex<double> prod = 1;
                    for (int j = 0; j < sys.r(); ++j) {
                        i128 v = sys[j].eval(x);
                        if (v <= 0) {
                            prod = 0;
                            break;
                        }
                        prod *= evals[j].at(uint64_t(v));
                    }
                    if (prod != std::complex<double>(0.0, 0.0)) {
                        ++res.nonzero;
                        res.approx.add(prod);
                    }
                }
            });
        }
    };
    int nthreads = int(std::min<long long>(opt.threads, std::max<long long>(nslabs, 1)));
    if (nthreads <= 1) worker();
    else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    CorrelationValue out;
    out.value.integral = integral;
    CompensatedSum total;
    for (const auto& r : results) {
        out.points += r.points;
        out.nonzero += r.nonzero;
        out.value.exact += r.exact;
        total.add(r.approx.value());
    }
    if (!integral) out.value.approx = total.value();
    return out;
}

}  // namespace

CorrelationValue correlation_sum(const LatticeBox& box, const LinearFormSystem& sys,
                                 const std::vector<FrobMultSpec>& specs, const CorrelationOptions& opt) {
    return run_sum(make_plan(box), sys, specs, opt, nullptr, {});
}

void ConstraintSet::validate(int s) const {
    if (int(anchor.size()) != s) throw ConfigError("anchor has the wrong dimension");
    if (anchor[0] == 0) throw ConfigError("anchor needs y_0 != 0");
    i128 g = 0;
    for (long long v : anchor) g = gcd128(g, i128(v));
    if (g != 1) throw ConfigError("anchor must be primitive");
    if (!(delta > 0)) throw ConfigError("delta must be positive");
    if (!S.empty() && !(delta < 1)) throw ConfigError("delta must be below 1 when S is not empty");
    for (uint64_t p : S)
        if (!is_prime_u64(p)) throw ConfigError("S must consist of primes");
}

bool archimedean_close(const std::vector<long long>& x, const ConstraintSet& c) {
    if (x[0] == 0) return false;
    Window w{c.anchor, i128(numerator(c.delta)), i128(denominator(c.delta))};
    for (size_t i = 1; i < x.size(); ++i)
        if (!window_ok(w, x, int(i))) return false;
    return true;
}

bool padic_close(const std::vector<long long>& x, const ConstraintSet& c, uint64_t p) {
    if (x[0] == 0) return false;
    const long long y0 = c.anchor[0];
    for (size_t i = 1; i < x.size(); ++i) {
        i128 diff = i128(x[i]) * y0 - i128(c.anchor[i]) * x[0];
        if (diff == 0) continue;
        // |diff / (x_0 y_0)|_p = p^-v
        int v = int(padic_valuation(diff, p)) - int(padic_valuation(i128(x[0]), p)) -
                int(padic_valuation(i128(y0), p));
        Rational dist = 1;
        for (int k = 0; k < std::abs(v); ++k) dist *= p;
        if (v > 0) dist = 1 / dist;
        if (!(dist < c.delta)) return false;
    }
    return true;
}

CongruenceEncoding::CongruenceEncoding(const ConstraintSet& c, int s) : c_(c), s_(s) {
    c.validate(s);
    for (uint64_t p : c.S) {
        Prime pr{p, 1, 0, 1};
        // Largest m with delta <= p^(1 - m).
        Rational bound = Rational(1, p);
        while (c.delta <= bound) {
            ++pr.m;
            bound /= p;
        }
        int r = int(padic_valuation(i128(c.anchor[0]), p));
        pr.K = pr.m + 2 * r + 1;
        for (int k = 0; k < pr.K; ++k) {
            if (pr.pK > (uint64_t(1) << 40) / p) throw CapacityError("encoding modulus too large");
            pr.pK *= p;
        }
        if (M_ > (uint64_t(1) << 62) / pr.pK) throw CapacityError("encoding modulus too large");
        M_ *= pr.pK;
        primes_.push_back(pr);
    }
    auto residues = [&](size_t idx, uint64_t mod, std::vector<long long>& x) {
        for (int i = 0; i < s; ++i) {
            x[i] = (long long)(idx % mod);
            idx /= mod;
        }
    };
    std::vector<long long> x(s, 0);
    long double cells = std::pow((long double)M_, s);
    if (cells <= (long double)(1 << 14)) {
        table_.assign(size_t(cells), 0);
        for (size_t idx = 0; idx < table_.size(); ++idx) {
            residues(idx, M_, x);
            bool ok = true;
            for (const auto& pr : primes_)
                if (!member_at(pr, x)) {
                    ok = false;
                    break;
                }
            table_[idx] = ok;
        }
    }
}

bool CongruenceEncoding::member_at(const Prime& pr, const std::vector<long long>& xin) const {
    const uint64_t p = pr.p;
    const i128 pK = i128(pr.pK);
    std::vector<i128> x(s_);
    for (int i = 0; i < s_; ++i) x[i] = i128(mod_of(i128(xin[i]), pr.pK));
    auto pw = [&](int k) {
        i128 v = 1;
        for (int i = 0; i < k; ++i) v *= p;
        return v;
    };
    auto cong = [&](i128 a, i128 b, int k) { return mod_of(a - b, uint64_t(pw(k))) == 0; };
    const auto& y = c_.anchor;
    const int r = int(padic_valuation(i128(y[0]), p));

    if (x[0] % p != 0) {
        // y_i / y_0 must be p-integral; then x_i = (y_i / y_0) x_0 mod p^m.
        const uint64_t pm = uint64_t(pw(pr.m));
        const i128 y0u = i128(y[0]) / pw(r);
        for (int i = 1; i < s_; ++i) {
            if (y[i] != 0 && int(padic_valuation(i128(y[i]), p)) < r) return false;
            i128 yi = y[i] == 0 ? 0 : i128(y[i]) / pw(r);
            uint64_t z = mulmod(mod_of(yi, pm), invmod(mod_of(y0u, pm), pm), pm);
            if (!cong(x[i], i128(z) * x[0], pr.m)) return false;
        }
        return true;
    }
    int u = -1;
    for (int i = 1; i < s_; ++i)
        if (x[i] % p != 0) {
            u = i;
            break;
        }
    if (u < 0) return false;  // p divides every coordinate
    if (y[u] == 0) return false;
    const int t = int(padic_valuation(i128(y[u]), p));
    if (r <= t) return false;
    const int sh = 2 * r - t;
    if (!cong(x[0] * y[u], x[u] * y[0], pr.m + sh)) return false;
    for (int j = 1; j < s_; ++j) {
        if (j == u) continue;
        if (!cong(x[j] * y[u], i128(y[j]) * x[u], pr.m + r)) return false;
    }
    (void)pK;
    return true;
}

long long CongruenceEncoding::class_count() const {
    std::vector<long long> x(s_, 0);
    // Class count by CRT from the per-prime counts.
    long long classes = 1;
    for (const auto& pr : primes_) {
        long double cells = std::pow((long double)pr.pK, s_);
        if (cells > (long double)(1 << 22)) {
            return -1;
        }
        long long count = 0;
        for (size_t idx = 0; idx < size_t(cells); ++idx) {
            size_t t = idx;
            for (int i = 0; i < s_; ++i) {
                x[i] = (long long)(t % pr.pK);
                t /= pr.pK;
            }
            count += member_at(pr, x);
        }
        classes *= count;
    }
    return classes;
}

bool CongruenceEncoding::member(const std::vector<long long>& x) const {
    if (!table_.empty()) {
        size_t idx = 0, mul = 1;
        for (int i = 0; i < s_; ++i) {
            idx += size_t(mod_of(i128(x[i]), M_)) * mul;
            mul *= M_;
        }
        return table_[idx];
    }
    for (const auto& pr : primes_)
        if (!member_at(pr, x)) return false;
    return true;
}

CorrelationValue constrained_correlation_sum(const LatticeBox& box, const LinearFormSystem& sys,
                                             const std::vector<FrobMultSpec>& specs, const ConstraintSet& c,
                                             ConstraintPath path, const CorrelationOptions& opt) {
    c.validate(box.s);
    for (const auto& sp : specs)
        if (sp.rule == FrobMultSpec::Rule::Table || !sp.overrides.empty())
            throw DomainError("constrained sums need completely multiplicative specs");
    Plan plan = make_plan(box);
    std::unique_ptr<CongruenceEncoding> enc;
    if (path == ConstraintPath::Encoding) {
        if (!c.primitive && !c.coprime_to_S)
            throw DomainError("the congruence encoding includes gcd(x, S) = 1");
        enc = std::make_unique<CongruenceEncoding>(c, box.s);
    }
    Window win{c.anchor, i128(numerator(c.delta)), i128(denominator(c.delta))};
    auto accept = [&](const std::vector<long long>& x) {
        if (x[0] == 0) return false;
        if (c.primitive) {
            i128 g = 0;
            for (long long v : x) g = gcd128(g, i128(v));
            if (g != 1) return false;
        }
        if (enc) return enc->member(x);
        for (uint64_t p : c.S) {
            if (c.coprime_to_S) {
                bool unit = false;
                for (long long v : x)
                    if (v % (long long)p != 0) unit = true;
                if (!unit) return false;
            }
            if (!padic_close(x, c, p)) return false;
        }
        return true;
    };
    return run_sum(plan, sys, specs, opt, c.archimedean ? &win : nullptr, accept);
}

FitReport fit_asymptotic(const std::vector<FitSample>& samples, double d, double delta) {
    const size_t n = samples.size();
    if (n < 6) throw DomainError("fit_asymptotic needs at least six samples");
    for (size_t i = 0; i < n; ++i) {
        if (!(samples[i].B > 1) || !(samples[i].N > 0)) throw DomainError("fit samples need B > 1 and N > 0");
        if (i && !(samples[i].B > samples[i - 1].B)) throw DomainError("fit samples must be increasing in B");
    }
    const double step = std::log(samples[n - 1].B / samples[0].B) / double(n - 1);
    for (size_t i = 1; i < n; ++i) {
        double s = std::log(samples[i].B / samples[i - 1].B);
        if (std::abs(s - step) > 0.05 * step + 0.02) throw DomainError("fit samples must be geometrically spaced");
    }
    FitReport out;
    out.delta_used = delta;
    out.dimension = d;
    for (const auto& sm : samples)
        out.ratios.push_back(sm.N * std::pow(std::log(sm.B), delta) / std::pow(sm.B, d));
    std::vector<double> top(out.ratios.begin() + long(n / 2), out.ratios.end());
    std::vector<double> sorted = top;
    std::sort(sorted.begin(), sorted.end());
    size_t h = sorted.size();
    out.c_est = h % 2 ? sorted[h / 2] : 0.5 * (sorted[h / 2 - 1] + sorted[h / 2]);
    out.spread = (sorted.back() - sorted.front()) / out.c_est;
    double change = top.back() - top.front();
    out.drift = change > 0 ? 1 : change < 0 ? -1 : 0;
    bool up = true, down = true;
    for (size_t i = 1; i < n; ++i) {
        if (!(out.ratios[i] > out.ratios[i - 1])) up = false;
        if (!(out.ratios[i] < out.ratios[i - 1])) down = false;
    }
    out.monotone = up ? 1 : down ? -1 : 0;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& sm : samples) {
        double xv = std::log(std::log(sm.B));
        double yv = std::log(sm.N / std::pow(sm.B, d));
        sx += xv;
        sy += yv;
        sxx += xv * xv;
        sxy += xv * yv;
    }
    double denom = double(n) * sxx - sx * sx;
    out.delta_est = denom == 0 ? 0 : -(double(n) * sxy - sx * sy) / denom;
    return out;
}

}  // namespace fc
