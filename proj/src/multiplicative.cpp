#include "frobcount/multiplicative.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fc {

Scalar PowerRow::at(int k) const {
    if (k == 0) return 1;
    const int K = int(values.size());
    if (k <= K) return values[k - 1];
    switch (tail) {
        case TailRule::Zero: return 0;
        case TailRule::RepeatLast: return values.back();
        case TailRule::Cycle: return values[K - period + (k - K - 1) % period];
        case TailRule::Arithmetic: {
            Scalar d = values[K - 1] - values[K - 2];
            return values[K - 1] + Scalar(k - K) * d;
        }
    }
    return 0;
}

namespace {

const PowerRow* find_row(const FrobMultSpec& spec, const Scalar& v) {
    for (const auto& [key, row] : spec.rows)
        if (key == v) return &row;
    return nullptr;
}

bool is_integral(const Scalar& s) {
    return s.is_integer();
}

}  // namespace

void FrobMultSpec::validate() const {
    if (H < 1) throw ConfigError("growth bound H must be positive");
    auto values = prime_value_set(base);
    const double Hd = double(H);
    auto check_row = [&](const PowerRow& row) {
        if (row.values.empty()) throw ConfigError("prime-power row without values");
        if (row.tail == TailRule::Cycle && (row.period < 1 || row.period > int(row.values.size())))
            throw ConfigError("cycle period must lie in 1..K");
        if (row.tail == TailRule::Arithmetic && row.values.size() < 2)
            throw ConfigError("arithmetic tail needs K >= 2");
        for (int k = 1; k <= int(row.values.size()) + 64; ++k)
            if (std::abs(row.at(k).value()) > std::pow(Hd, k) * (1 + 1e-12))
                throw ConfigError("prime-power value exceeds the growth bound H^k");
    };
    switch (rule) {
        case Rule::IndicatorSet:
            for (const auto& v : values)
                if (!(v == Scalar(0)) && !(v == Scalar(1))) throw ConfigError("indicator spec takes a value outside {0,1}");
            break;
        case Rule::CompletelyMultiplicative:
            for (const auto& v : values)
                if (std::abs(v.value()) > Hd * (1 + 1e-12)) throw ConfigError("prime value exceeds the growth bound H");
            break;
        case Rule::Table:
            for (const auto& v : values) {
                const PowerRow* row = find_row(*this, v);
                if (!row) throw ConfigError("prime-power table has no row for rho(p) = " + v.str());
                if (!(row->values.front() == v)) throw ConfigError("row for rho(p) = " + v.str() + " must start with that value");
            }
            for (const auto& [key, row] : rows) check_row(row);
            break;
    }
    for (const auto& [p, row] : overrides) check_row(row);
}

bool FrobMultSpec::integer_valued() const {
    for (const auto& v : prime_value_set(base))
        if (!is_integral(v)) return false;
    auto row_integral = [](const PowerRow& r) {
        return std::all_of(r.values.begin(), r.values.end(), [](const Scalar& s) { return s.is_integer(); });
    };
    for (const auto& [key, row] : rows)
        if (!row_integral(row)) return false;
    for (const auto& [p, row] : overrides)
        if (!row_integral(row)) return false;
    return true;
}

Scalar FrobMultSpec::prime_power(uint64_t p, int k) const {
    if (k == 0) return 1;
    auto it = overrides.find(p);
    if (it != overrides.end()) return it->second.at(k);
    Scalar v = eval_prime(base, p);
    if (rule == Rule::Table) {
        const PowerRow* row = find_row(*this, v);
        if (!row) throw ConfigError("prime-power table has no row for rho(p) = " + v.str());
        return row->at(k);
    }
    Scalar r = 1;
    for (int i = 0; i < k; ++i) r *= v;
    return r;
}

std::complex<double> FrobMultSpec::prime_power_value(uint64_t p, int k) const {
    if (k == 0) return 1.0;
    if (!overrides.empty()) {
        auto it = overrides.find(p);
        if (it != overrides.end()) return it->second.at(k).value();
    }
    std::complex<double> v = eval_prime_value(base, p);
    if (k == 1) return v;
    if (rule == Rule::Table) {
        for (const auto& [key, row] : rows)
            if (std::abs(key.value() - v) < 1e-9) return row.at(k).value();
        throw ConfigError("prime-power table has no row for the value at p = " + std::to_string(p));
    }
    return std::pow(v, k);
}

FrobMultSpec FrobMultSpec::completely_multiplicative(FrobenianSpec base, long long H) {
    FrobMultSpec s;
    s.base = std::move(base);
    s.rule = Rule::CompletelyMultiplicative;
    s.H = H;
    s.validate();
    return s;
}

FrobMultSpec FrobMultSpec::table(FrobenianSpec base, std::vector<std::pair<Scalar, PowerRow>> rows, long long H) {
    FrobMultSpec s;
    s.base = std::move(base);
    s.rule = Rule::Table;
    s.rows = std::move(rows);
    s.H = H;
    s.validate();
    return s;
}

FrobMultSpec FrobMultSpec::divisor_function() {
    auto s = table(FrobenianSpec::constant(2), {{Scalar(2), PowerRow{{2, 3}, TailRule::Arithmetic, 1}}}, 2);
    s.label = "tau";
    return s;
}

FrobMultSpec FrobMultSpec::two_squares() {
    auto base = FrobenianSpec::residue_indicator(4, {1});
    base.exceptional[2] = 1;
    auto s = table(base,
                   {{Scalar(1), PowerRow{{1}, TailRule::RepeatLast, 1}}, {Scalar(0), PowerRow{{0, 1}, TailRule::Cycle, 2}}},
                   1);
    s.label = "two_squares";
    return s;
}

FrobMultSpec FrobMultSpec::squarefree() {
    auto s = table(FrobenianSpec::constant(1), {{Scalar(1), PowerRow{{1}, TailRule::Zero, 1}}}, 1);
    s.label = "mu_squared";
    return s;
}

FrobMultSpec FrobMultSpec::one() {
    auto s = completely_multiplicative(FrobenianSpec::constant(1), 1);
    s.label = "one";
    return s;
}

FrobMultSpec FrobMultSpec::zero() {
    auto s = completely_multiplicative(FrobenianSpec::constant(0), 1);
    s.vanishes = true;
    s.label = "zero";
    return s;
}

Scalar evaluate(const FrobMultSpec& spec, const FactoredInteger& n) {
    if (n.sign <= 0 || spec.vanishes) return 0;
    Scalar r = 1;
    for (const auto& f : n.factors) {
        r *= spec.prime_power(f.p, f.e);
        if (r.is_zero()) return 0;
    }
    return r;
}

std::complex<double> evaluate_value(const FrobMultSpec& spec, const FactoredInteger& n) {
    if (n.sign <= 0 || spec.vanishes) return 0.0;
    std::complex<double> r = 1.0;
    for (const auto& f : n.factors) r *= spec.prime_power_value(f.p, f.e);
    return r;
}

bool SumValue::operator==(const SumValue& o) const {
    if (integral && o.integral) return exact == o.exact;
    return std::abs(value() - o.value()) <= 1e-9 * (1.0 + std::abs(value()));
}

namespace {

// Calls emit(n, value) for n in [lo, hi] in increasing order, factoring each
// segment by sieving with the primes up to sqrt(hi).
template <class T, class Emit>
void sieve_values(const FrobMultSpec& spec, uint64_t lo, uint64_t hi, Emit&& emit) {
    if (hi > capacity().stream_limit)
        throw RangeError("partial sums beyond " + std::to_string(capacity().stream_limit) + " exceed the streaming capacity");
    lo = std::max<uint64_t>(lo, 1);
    if (hi < lo) return;
    const uint64_t root = isqrt(hi);
    std::vector<uint64_t> primes = root >= 2 ? sieve_primes(root) : std::vector<uint64_t>{};
    auto to_T = [](std::complex<double> v) -> T {
        if constexpr (std::is_same_v<T, long long>) return (long long)std::llround(v.real());
        else return v;
    };
    std::vector<std::vector<T>> powers(primes.size());
    for (size_t i = 0; i < primes.size(); ++i) {
        uint64_t p = primes[i];
        int kmax = 0;
        for (u128 pk = p; pk <= hi; pk *= p) ++kmax;
        powers[i].resize(kmax + 1);
        for (int k = 0; k <= kmax; ++k) {
            if constexpr (std::is_same_v<T, long long>) {
                Scalar v = spec.prime_power(p, k);
                powers[i][k] = v.to_int();
            } else {
                powers[i][k] = spec.prime_power_value(p, k);
            }
        }
    }
    const uint64_t seg = 1 << 16;
    std::vector<uint64_t> rem(seg);
    std::vector<T> val(seg);
    for (uint64_t start = lo;; start += seg) {
        const uint64_t end = std::min(hi, start + seg - 1);
        const size_t len = size_t(end - start + 1);
        for (size_t i = 0; i < len; ++i) {
            rem[i] = start + i;
            val[i] = T(1);
        }
        for (size_t pi = 0; pi < primes.size(); ++pi) {
            const uint64_t p = primes[pi];
            if (p * p > end) break;
            uint64_t first = (start + p - 1) / p * p;
            for (uint64_t m = first; m <= end; m += p) {
                size_t i = size_t(m - start);
                int k = 0;
                uint64_t r = rem[i];
                do {
                    r /= p;
                    ++k;
                } while (r % p == 0);
                rem[i] = r;
                val[i] *= powers[pi][k];
            }
        }
        for (size_t i = 0; i < len; ++i) {
            if (rem[i] > 1) val[i] *= to_T(spec.prime_power_value(rem[i], 1));
            emit(start + i, spec.vanishes ? T(0) : val[i]);
        }
        if (end == hi) break;
    }
}

template <class Visit>
void dispatch(const FrobMultSpec& spec, uint64_t lo, uint64_t hi, Visit&& visit) {
    if (spec.integer_valued())
        sieve_values<long long>(spec, lo, hi, [&](uint64_t n, long long v) { visit(n, v); });
    else
        sieve_values<std::complex<double>>(spec, lo, hi, [&](uint64_t n, std::complex<double> v) { visit(n, v); });
}

struct Accumulator {
    bool integral = true;
    i128 exact = 0;
    CompensatedSum approx;

    void add(long long v) { exact += v; }
    void add(std::complex<double> v) {
        integral = false;
        approx.add(v);
    }
    SumValue result() const {
        SumValue s;
        s.integral = integral;
        s.exact = exact;
        s.approx = integral ? std::complex<double>(double(exact), 0.0) : approx.value();
        return s;
    }
};

}  // namespace

SumValue partial_sum(const FrobMultSpec& spec, uint64_t x) {
    if (x < 1) throw DomainError("partial_sum needs x >= 1");
    Accumulator acc;
    acc.integral = spec.integer_valued();
    dispatch(spec, 1, x, [&](uint64_t, auto v) { acc.add(v); });
    return acc.result();
}

std::vector<SumValue> partial_sums_at(const FrobMultSpec& spec, const std::vector<uint64_t>& checkpoints) {
    if (checkpoints.empty()) return {};
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) throw DomainError("checkpoints must ascend");
    const bool integral = spec.integer_valued();
    Accumulator acc;
    acc.integral = integral;
    std::vector<SumValue> out;
    size_t next = 0;
    while (next < checkpoints.size() && checkpoints[next] < 1) {
        out.push_back(acc.result());
        ++next;
    }
    dispatch(spec, 1, checkpoints.back(), [&](uint64_t n, auto v) {
        acc.add(v);
        while (next < checkpoints.size() && checkpoints[next] == n) {
            out.push_back(acc.result());
            ++next;
        }
    });
    return out;
}

std::vector<SumValue> partial_sums_by_residue(const FrobMultSpec& spec, uint64_t x, uint64_t q) {
    if (q < 1) throw DomainError("modulus must be positive");
    const bool integral = spec.integer_valued();
    std::vector<Accumulator> acc(q);
    for (auto& a : acc) a.integral = integral;
    if (x >= 1)
        dispatch(spec, 1, x, [&](uint64_t n, auto v) { acc[n % q].add(v); });
    std::vector<SumValue> out;
    for (const auto& a : acc) out.push_back(a.result());
    return out;
}

ProgressionSum partial_sum_progression(const FrobMultSpec& spec, uint64_t x, uint64_t q, uint64_t A) {
    if (q < 1 || A >= q) throw DomainError("progression needs q >= 1 and 0 <= A < q");
    const bool integral = spec.integer_valued();
    Accumulator acc;
    acc.integral = integral;
    if (x >= 1)
        dispatch(spec, 1, x, [&](uint64_t n, auto v) {
            if (n % q == A) acc.add(v);
        });
    ProgressionSum ps;
    ps.x = x;
    ps.q = q;
    ps.A = A;
    ps.value = acc.result();
    ps.normalized = true;
    ps.normalized_value = x ? ps.value.value() * double(q) / double(x) : 0.0;
    return ps;
}

std::vector<long long> integer_value_table(const FrobMultSpec& spec, uint64_t N) {
    if (N > capacity().table_bound) throw CapacityError("value table beyond table_bound");
    if (!spec.integer_valued()) throw DomainError("integer value table needs an integer-valued spec");
    std::vector<long long> t(N + 1, 0);
    if (N >= 1) sieve_values<long long>(spec, 1, N, [&](uint64_t n, long long v) { t[n] = v; });
    return t;
}

std::vector<std::complex<double>> value_table(const FrobMultSpec& spec, uint64_t N) {
    if (N > capacity().table_bound) throw CapacityError("value table beyond table_bound");
    std::vector<std::complex<double>> t(N + 1, 0.0);
    if (N >= 1) sieve_values<std::complex<double>>(spec, 1, N, [&](uint64_t n, std::complex<double> v) { t[n] = v; });
    return t;
}

std::vector<uint64_t> geometric_grid(double lo, double hi, int points) {
    if (points < 2 || lo < 1 || hi <= lo) throw DomainError("geometric grid needs 1 <= lo < hi and >= 2 points");
    std::vector<uint64_t> g;
    for (int i = 0; i < points; ++i) {
        double v = lo * std::pow(hi / lo, double(i) / (points - 1));
        uint64_t r = uint64_t(std::llround(v));
        if (!g.empty() && r <= g.back()) throw DomainError("geometric grid is not strictly increasing");
        g.push_back(r);
    }
    return g;
}

SelbergDelangeFit selberg_delange_fit(const FrobMultSpec& spec, const MeanValue& m, const std::vector<uint64_t>& grid) {
    const std::complex<double> mv = m.value.value();
    if (!(mv.real() > 0) || std::abs(mv.imag()) > 1e-12) throw DomainError("Selberg-Delange fit needs a positive real mean");
    if (grid.size() < 6) throw DomainError("Selberg-Delange fit needs at least 6 grid points");
    for (size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw DomainError("grid must be strictly increasing");
    if (grid.front() < 3) throw DomainError("grid must start at x >= 3");
    const double r0 = std::log(double(grid[1]) / double(grid[0]));
    for (size_t i = 2; i < grid.size(); ++i) {
        double r = std::log(double(grid[i]) / double(grid[i - 1]));
        if (std::abs(r - r0) > 0.05 * r0 + 1e-9) throw DomainError("grid is not geometric");
    }
    auto sums = partial_sums_at(spec, grid);
    SelbergDelangeFit fit;
    fit.grid = grid;
    for (size_t i = 0; i < grid.size(); ++i) {
        double x = double(grid[i]);
        fit.ratios.push_back(sums[i].value().real() / (x * std::pow(std::log(x), mv.real() - 1)));
    }
    const size_t half = grid.size() / 2;
    std::vector<double> top(fit.ratios.begin() + long(half), fit.ratios.end());
    std::vector<double> sorted = top;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    fit.c_est = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    fit.spread = fit.c_est != 0 ? (sorted.back() - sorted.front()) / std::abs(fit.c_est) : 0;
    double d = top.back() - top.front();
    fit.drift = d > 0 ? 1 : (d < 0 ? -1 : 0);
    return fit;
}

FrobMultSpec indicator_from_prime_set(const FrobenianSpec& base) {
    FrobenianSpec b = base;
    b.exceptional.clear();
    b.default_exceptional = 1;
    b.finalize();
    for (const auto& v : prime_value_set(b))
        if (!(v == Scalar(0)) && !(v == Scalar(1))) throw DomainError("indicator_from_prime_set needs values in {0,1}");
    FrobMultSpec s;
    s.base = std::move(b);
    s.rule = FrobMultSpec::Rule::IndicatorSet;
    s.H = 1;
    s.exceptional_set_to_one = true;
    s.label = base.label.empty() ? "indicator" : "indicator(" + base.label + ")";
    return s;
}

Scalar mertens_product(const FrobenianSpec& spec, uint64_t x, const std::set<uint64_t>& exclude) {
    if (x < 2) return 1;
    auto primes = sieve_primes(x);
    bool exact = x <= 3000;
    if (exact) {
        Scalar r = 1;
        for (uint64_t p : primes) {
            if (exclude.count(p)) continue;
            Scalar v = eval_prime(spec, p);
            if (!v.exact()) {
                exact = false;
                break;
            }
            r *= Scalar(1) + v * Scalar(Rational(1, p));
        }
        if (exact) return r;
    }
    std::complex<long double> r = 1.0L;
    for (uint64_t p : primes) {
        if (exclude.count(p)) continue;
        std::complex<double> v = eval_prime_value(spec, p);
        r *= std::complex<long double>(1.0L + (long double)v.real() / p, (long double)v.imag() / p);
    }
    return Scalar::approx(std::complex<double>(double(r.real()), double(r.imag())));
}

EulerProductReport euler_product_limit(const FrobMultSpec& spec, uint64_t P) {
    if (P < 2) throw DomainError("Euler product truncation must be >= 2");
    const std::complex<double> m = mean(spec.base).value.value();
    EulerProductReport rep;
    CompensatedSum logsum;
    CompensatedSum window;
    const int cutoff = 200;
    for (uint64_t p : sieve_primes(P)) {
        const double dp = double(p);
        std::complex<double> local = 1.0;
        std::complex<double> rho_p = spec.prime_power_value(p, 1);
        if (std::abs(rho_p) >= dp) rep.divergent_primes.push_back(p);
        double pk = 1.0;
        const double ratio = double(spec.H) / dp;
        for (int k = 1; k <= cutoff; ++k) {
            pk *= dp;
            local += spec.prime_power_value(p, k) / pk;
            if (ratio < 1 && std::pow(ratio, k + 1) / (1 - ratio) < 1e-17) break;
        }
        logsum.add(std::log(local) + m * std::log1p(-1.0 / dp));
        if (2 * p > P) window.add((rho_p - m) / dp);
    }
    rep.value = std::exp(logsum.value());
    const double Hd = double(spec.H);
    const double Pd = double(P);
    rep.tail_error = (Hd + 1) * (Hd + 1) / (Pd * std::log(Pd)) + std::abs(window.value());
    return rep;
}

double selberg_delange_constant(const FrobMultSpec& spec, uint64_t P) {
    const double m = mean(spec.base).value.value().real();
    if (!(m > 0)) throw DomainError("Selberg-Delange constant needs a positive mean");
    return euler_product_limit(spec, P).value.real() / std::tgamma(m);
}

}  // namespace fc
