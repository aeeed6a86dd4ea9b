#include "frobcount/families.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace fc {

namespace {

std::set<uint64_t> prime_divisors(i128 n) {
    std::set<uint64_t> out;
    if (n == 0) return out;
    for (const auto& pp : factor_integer(n).factors) out.insert(pp.p);
    return out;
}

std::set<uint64_t> prime_divisors(const BigInt& n) {
    if (n == 0) return {};
    BigInt m = n < 0 ? BigInt(-n) : n;
    if (m > BigInt(std::numeric_limits<long long>::max())) throw CapacityError("discriminant too large to factor");
    return prime_divisors(i128((long long)m));
}

int sgn(i128 v) { return v > 0 ? 1 : v < 0 ? -1 : 0; }

bool padic_square(i128 x, uint64_t p) {
    if (x == 0) return true;
    unsigned v = padic_valuation(x, p);
    if (v % 2) return false;
    i128 u = x;
    for (unsigned i = 0; i < v; ++i) u /= i128(p);
    if (p == 2) return mod_of(u, 8) == 1;
    return legendre_symbol(u, p) == 1;
}

// Square-class representative of prod over forms of L_j^e_j.
struct ClassBuilder {
    int sign = 1;
    std::map<uint64_t, int> parity;
    void add(i128 v, int e) {
        if (e % 2 == 0) return;
        if (v < 0) sign = -sign;
        for (const auto& pp : factor_integer(v).factors)
            if (pp.e % 2) parity[pp.p] ^= 1;
    }
    i128 rep() const {
        i128 r = sign;
        for (const auto& [p, odd] : parity)
            if (odd) r *= i128(p);
        return r;
    }
};

void check_forms(const std::vector<BinaryForm>& forms, std::vector<int>& exps) {
    if (forms.empty()) throw ConfigError("at least one form is required");
    if (exps.empty()) exps.assign(forms.size(), 1);
    if (exps.size() != forms.size()) throw ConfigError("one exponent per form expected");
    for (int e : exps)
        if (e < 1) throw ConfigError("exponents must be positive");
    for (const auto& f : forms) {
        if (f.c1 == 0) throw ConfigError("forms must have degree 1 in t");
        if (std::gcd(std::llabs(f.c0), std::llabs(f.c1)) != 1) throw ConfigError("forms must be primitive");
    }
    for (size_t i = 0; i < forms.size(); ++i)
        for (size_t j = i + 1; j < forms.size(); ++j)
            if (i128(forms[i].c0) * forms[j].c1 - i128(forms[i].c1) * forms[j].c0 == 0)
                throw ConfigError("forms must be pairwise independent");
}

// Points (x0 : x1) of height <= B: (0 : 1), then x0 = 1..B with x1 = -B..B coprime.
template <class Row>
void for_each_row(uint64_t B, long long x0lo, long long x0hi, Row&& row) {
    std::vector<uint8_t> mark(2 * B + 1, 0);
    auto spf = shared_spf(std::max<uint64_t>(B, 2));
    const long long b = (long long)B;
    for (long long x0 = x0lo; x0 <= x0hi; ++x0) {
        std::vector<uint64_t> ps;
        for (const auto& pp : spf_factor(x0, *spf).factors) ps.push_back(pp.p);
        for (uint64_t p : ps)
            for (long long k = -(b / (long long)p); k <= b / (long long)p; ++k) mark[size_t(k * (long long)p + b)] = 1;
        row(x0, mark);
        for (uint64_t p : ps)
            for (long long k = -(b / (long long)p); k <= b / (long long)p; ++k) mark[size_t(k * (long long)p + b)] = 0;
    }
}

std::vector<uint16_t> grid_bins(const std::vector<uint64_t>& grid) {
    if (grid.empty()) throw ConfigError("empty B grid");
    for (size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 1) throw ConfigError("B must be positive");
        if (i && grid[i] <= grid[i - 1]) throw ConfigError("B grid must be strictly increasing");
    }
    if (grid.size() > 60000) throw ConfigError("B grid too long");
    if (grid.back() > capacity().table_bound) throw CapacityError("B exceeds the table bound");
    std::vector<uint16_t> bin(grid.back() + 1, 0);
    size_t g = 0;
    for (uint64_t h = 0; h <= grid.back(); ++h) {
        while (grid[g] < h) ++g;
        bin[h] = uint16_t(g);
    }
    return bin;
}

std::vector<CountRow> finish_rows(const std::vector<uint64_t>& grid, std::vector<CountRow> bins) {
    for (size_t g = 0; g < grid.size(); ++g) {
        bins[g].B = grid[g];
        if (g) {
            bins[g].N += bins[g - 1].N;
            bins[g].undetermined += bins[g - 1].undetermined;
            bins[g].degenerate += bins[g - 1].degenerate;
            bins[g].points += bins[g - 1].points;
        }
    }
    return bins;
}

// Square classes of 1..N at the primes of S0 as bit masks.
// Bit 0 is the sign; bits for p = 2 are (v odd, unit mod 8); for odd p (v odd, non-residue).
class ConicTables {
public:
    static constexpr uint32_t BAD = 1u << 30;

    ConicTables(const ConicBundleFamily& fam, uint64_t N) : a_(fam.a()) {
        if (N > capacity().table_bound) throw CapacityError("form values exceed the table bound");
        int bit = 1;
        for (uint64_t p : fam.S0()) {
            Slot pl{p, bit, p == 2 ? 3 : 2, {}};
            bit += pl.width;
            places_.push_back(pl);
        }
        if (bit > 30) throw CapacityError("too many primes in S0 for the conic tables");
        bits_ = bit;
        for (auto& pl : places_) {
            const uint64_t p = pl.p;
            uint64_t nonres = 2;
            if (p != 2)
                while (legendre_symbol(i128(nonres), p) != -1) ++nonres;
            for (int c = 0; c < (1 << pl.width); ++c) {
                i128 rep = (c & 1) ? i128(p) : 1;
                int u = c >> 1;
                if (p == 2) rep *= (u == 0 ? 1 : u == 1 ? 3 : u == 2 ? 5 : 7);
                else if (u) rep *= i128(nonres);
                pl.allowed.push_back(hilbert_symbol(a_, rep, Place::prime(p)) == 1);
            }
        }
        if (bits_ <= 20) {
            verdict_.resize(size_t(1) << bits_);
            for (uint32_t m = 0; m < verdict_.size(); ++m) verdict_[m] = slow_ok(m);
        }
        auto spf = shared_spf(std::max<uint64_t>(N, 2));
        mask_.assign(N + 1, 0);
        for (uint64_t n = 1; n <= N; ++n) {
            uint32_t m = 0;
            for (const auto& pp : spf_factor(i128(n), *spf).factors) {
                bool in_S0 = std::any_of(places_.begin(), places_.end(), [&](const Slot& q) { return q.p == pp.p; });
                if (!in_S0 && pp.e % 2 && legendre_symbol(a_, pp.p) != 1) m |= BAD;
            }
            for (const auto& pl : places_) {
                uint64_t u = n;
                uint32_t c = 0;
                while (u % pl.p == 0) {
                    u /= pl.p;
                    c ^= 1;
                }
                if (pl.p == 2) {
                    uint64_t r = u % 8;
                    c |= (r == 1 ? 0u : r == 3 ? 1u : r == 5 ? 2u : 3u) << 1;
                } else if (legendre_symbol(i128(u % pl.p), pl.p) == -1) {
                    c |= 2;
                }
                m |= c << pl.offset;
            }
            mask_[n] = m;
        }
    }

    // Mask of a nonzero value.
    uint32_t mask(i128 v) const { return v < 0 ? (mask_[size_t(-v)] ^ 1u) : mask_[size_t(v)]; }

    bool ok(uint32_t xor_mask, uint32_t or_mask) const {
        if (or_mask & BAD) return false;
        uint32_t m = xor_mask & ((1u << bits_) - 1);
        return verdict_.empty() ? slow_ok(m) : verdict_[m] != 0;
    }

private:
    struct Slot {
        uint64_t p;
        int offset;
        int width;
        std::vector<bool> allowed;
    };

    bool slow_ok(uint32_t m) const {
        const bool negative = m & 1;
        if (negative && a_ < 0) return false;
        for (const auto& pl : places_) {
            uint32_t c = (m >> pl.offset) & ((1u << pl.width) - 1);
            // Masks are taken of |v|; a negative product multiplies the unit by -1.
            if (negative) c ^= pl.p == 2 ? 6u : (pl.p % 4 == 3 ? 2u : 0u);
            if (!pl.allowed[c]) return false;
        }
        return true;
    }

    i128 a_;
    std::vector<Slot> places_;
    int bits_ = 1;
    std::vector<uint8_t> verdict_;
    std::vector<uint32_t> mask_;
};

}  // namespace

std::string BinaryForm::str() const {
    std::ostringstream os;
    auto coef = [&](long long c, bool lead) {
        if (lead) {
            if (c == -1) os << "-";
            else if (c != 1) os << c << " ";
        } else {
            os << (c < 0 ? " - " : " + ");
            if (std::llabs(c) != 1) os << std::llabs(c) << " ";
        }
    };
    coef(c1, true);
    os << "t";
    if (c0) os << (c0 < 0 ? " - " : " + ") << std::llabs(c0);
    return os.str();
}

ConicBundleFamily::ConicBundleFamily(i128 a, std::vector<BinaryForm> forms, std::vector<int> exponents,
                                     std::string label)
    : forms_(std::move(forms)), exps_(std::move(exponents)), label_(std::move(label)) {
    if (a == 0) throw ConfigError("a must be nonzero");
    a_ = squarefree_part(a);
    if (a_ == 1) throw ConfigError("a must not be a square");
    check_forms(forms_, exps_);
    int total = 0;
    for (int e : exps_) total += e;
    infinity_odd_ = total % 2;
    S0_ = prime_divisors(2 * a_);
    for (size_t i = 0; i < forms_.size(); ++i) {
        for (size_t j = i + 1; j < forms_.size(); ++j)
            for (uint64_t p : prime_divisors(i128(forms_[i].c0) * forms_[j].c1 - i128(forms_[i].c1) * forms_[j].c0))
                S0_.insert(p);
        if (infinity_odd_)
            for (uint64_t p : prime_divisors(i128(forms_[i].c1))) S0_.insert(p);
    }
    if (label_.empty()) {
        std::ostringstream os;
        os << "a=" << (long long)a_;
        for (size_t i = 0; i < forms_.size(); ++i) {
            os << (i ? ", " : ": ") << "(" << forms_[i].str() << ")";
            if (exps_[i] != 1) os << "^" << exps_[i];
        }
        label_ = os.str();
    }
}

std::vector<BinaryForm> ConicBundleFamily::theta_forms() const {
    std::vector<BinaryForm> out;
    for (size_t i = 0; i < forms_.size(); ++i)
        if (exps_[i] % 2) out.push_back(forms_[i]);
    if (infinity_odd_) out.push_back({1, 0});
    return out;
}

std::vector<std::string> ConicBundleFamily::theta_labels() const {
    std::vector<std::string> out;
    for (size_t i = 0; i < forms_.size(); ++i)
        if (exps_[i] % 2) out.push_back(forms_[i].str());
    if (infinity_odd_) out.push_back("infinity");
    return out;
}

std::vector<NamedConicFamily> conic_family_library() {
    return {
        {"a5_t", ConicBundleFamily(5, {{0, 1}})},
        {"a5_t_t-1", ConicBundleFamily(5, {{0, 1}, {-1, 1}})},
        {"a5_t_t-1_t+1", ConicBundleFamily(5, {{0, 1}, {-1, 1}, {1, 1}})},
        {"a5_t_t-1_t-4", ConicBundleFamily(5, {{0, 1}, {-1, 1}, {-4, 1}})},
        {"a-1_t", ConicBundleFamily(-1, {{0, 1}})},
        {"a3_t_t+2", ConicBundleFamily(3, {{0, 1}, {2, 1}})},
        {"a-5_t_(t-2)^2", ConicBundleFamily(-5, {{0, 1}, {-2, 1}}, {1, 2})},
        {"a2_2t+3", ConicBundleFamily(2, {{3, 2}})},
    };
}

std::optional<i128> conic_fibre_class(const ConicBundleFamily& fam, long long x0, long long x1) {
    ClassBuilder cb;
    for (size_t j = 0; j < fam.forms().size(); ++j) {
        i128 v = fam.forms()[j].eval(x0, x1);
        if (v == 0) return std::nullopt;
        cb.add(v, fam.exponents()[j]);
    }
    if (fam.infinity_odd()) {
        if (x0 == 0) return std::nullopt;
        cb.add(x0, 1);
    }
    return cb.rep();
}

bool conic_fibre_soluble(const ConicBundleFamily& fam, long long x0, long long x1, Place v) {
    auto rep = conic_fibre_class(fam, x0, x1);
    if (!rep) throw DomainError("degenerate fibre");
    if (v.is_real()) return fam.a() > 0 || *rep > 0;
    return hilbert_symbol(fam.a(), *rep, v) == 1;
}

bool conic_fibre_els(const ConicBundleFamily& fam, long long x0, long long x1) {
    auto rep = conic_fibre_class(fam, x0, x1);
    if (!rep) throw DomainError("degenerate fibre");
    if (fam.a() < 0 && *rep < 0) return false;
    std::set<uint64_t> places = fam.S0();
    for (uint64_t p : prime_divisors(*rep)) places.insert(p);
    for (uint64_t p : places)
        if (hilbert_symbol(fam.a(), *rep, Place::prime(p)) != 1) return false;
    return true;
}

std::vector<CountRow> count_conic_bundle(const ConicBundleFamily& fam, const std::vector<uint64_t>& grid,
                                         const CorrelationOptions& opt, const FibreVisitor& visit) {
    auto bin = grid_bins(grid);
    const uint64_t B = grid.back();
    long long cmax = 1;
    for (const auto& f : fam.forms()) cmax = std::max(cmax, std::llabs(f.c0) + std::llabs(f.c1));
    ConicTables tables(fam, uint64_t(cmax) * B);

    struct Odd {
        long long c0, c1;
        bool odd;
    };
    std::vector<Odd> forms;
    for (size_t j = 0; j < fam.forms().size(); ++j)
        forms.push_back({fam.forms()[j].c0, fam.forms()[j].c1, fam.exponents()[j] % 2 == 1});

    std::vector<CountRow> total(grid.size());
    // The point (0 : 1).
    {
        total[bin[1]].points++;
        auto rep = conic_fibre_class(fam, 0, 1);
        if (!rep) total[bin[1]].degenerate++;
        else {
            bool ok = conic_fibre_els(fam, 0, 1);
            total[bin[1]].N += ok;
            if (visit) visit(0, 1, ok);
        }
    }

    auto run = [&](long long lo, long long hi, std::vector<CountRow>& acc, const FibreVisitor* vis) {
        const long long b = (long long)B;
        for_each_row(B, lo, hi, [&](long long x0, const std::vector<uint8_t>& mark) {
            const uint32_t row = fam.infinity_odd() ? tables.mask(x0) : 0;
            for (long long x1 = -b; x1 <= b; ++x1) {
                if (mark[size_t(x1 + b)]) continue;
                CountRow& r = acc[bin[std::max<long long>(x0, std::llabs(x1))]];
                ++r.points;
                uint32_t xm = row, om = row;
                bool degenerate = false;
                for (const auto& f : forms) {
                    i128 v = i128(f.c0) * x0 + i128(f.c1) * x1;
                    if (v == 0) {
                        degenerate = true;
                        break;
                    }
                    if (!f.odd) continue;
                    uint32_t m = tables.mask(v);
                    xm ^= m;
                    om |= m;
                }
                if (degenerate) {
                    ++r.degenerate;
                    continue;
                }
                bool ok = tables.ok(xm, om);
                r.N += ok;
                if (vis) (*vis)(x0, x1, ok);
            }
        });
    };

    const long long slab = std::max<long long>(opt.slab, 1);
    const long long nslabs = ((long long)B + slab - 1) / slab;
    if (visit || opt.threads <= 1) {
        std::vector<CountRow> acc(grid.size());
        run(1, (long long)B, acc, visit ? &visit : nullptr);
        for (size_t g = 0; g < grid.size(); ++g) {
            total[g].N += acc[g].N;
            total[g].degenerate += acc[g].degenerate;
            total[g].points += acc[g].points;
        }
    } else {
        std::vector<std::vector<CountRow>> parts(size_t(nslabs), std::vector<CountRow>(grid.size()));
        std::atomic<long long> next{0};
        auto worker = [&]() {
            while (true) {
                long long k = next.fetch_add(1);
                if (k >= nslabs) return;
                long long lo = 1 + k * slab, hi = std::min<long long>((long long)B, lo + slab - 1);
                run(lo, hi, parts[size_t(k)], nullptr);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < opt.threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        for (const auto& part : parts)
            for (size_t g = 0; g < grid.size(); ++g) {
                total[g].N += part[g].N;
                total[g].degenerate += part[g].degenerate;
                total[g].points += part[g].points;
            }
    }
    return finish_rows(grid, total);
}

FrobMultSpec conic_detector_spec(const ConicBundleFamily& fam, const std::set<uint64_t>& S) {
    auto chi = DirichletCharacter::kronecker(fam.a());
    auto base = FrobenianSpec::character_combo({{DirichletCharacter::principal(chi.modulus()), Scalar(Rational(1, 2))},
                                                {chi, Scalar(Rational(1, 2))}});
    base.S = fam.S0();
    base.S.insert(S.begin(), S.end());
    for (uint64_t p : prime_divisors(i128(chi.modulus()))) base.S.insert(p);
    base.label = "kronecker(" + std::to_string((long long)fam.a()) + ", p) = 1";
    return indicator_from_prime_set(base);
}

int conic_detector_value(const ConicBundleFamily& fam, long long x0, long long x1) {
    for (const auto& f : fam.theta_forms()) {
        i128 v = f.eval(x0, x1);
        if (v == 0) return 0;
        for (uint64_t p : prime_divisors(v))
            if (!fam.S0().count(p) && legendre_symbol(fam.a(), p) != 1) return 0;
    }
    return 1;
}

Rational anchor_delta(const ConicBundleFamily& fam, const std::vector<long long>& y, const std::set<uint64_t>& S) {
    if (y.size() != 2 || y[0] == 0) throw DomainError("anchor must be (y0, y1) with y0 != 0");
    Rational delta(1, 2);
    for (size_t j = 0; j < fam.forms().size(); ++j) {
        const auto& f = fam.forms()[j];
        i128 Ly = f.eval(y[0], y[1]);
        if (Ly == 0) throw DomainError("anchor fibre is degenerate");
        // |t - t_y| < |L(y)| / (|y0| |c1|) keeps the sign of L.
        Rational real = Rational(BigInt(Ly < 0 ? -Ly : Ly)) / (Rational(std::llabs(y[0])) * std::llabs(f.c1));
        delta = std::min(delta, real);
        if (fam.exponents()[j] % 2 == 0) continue;
        for (uint64_t p : S) {
            int k = p == 2 ? 3 : 1;
            int v = int(padic_valuation(Ly, p)) - int(padic_valuation(y[0], p)) - int(padic_valuation(f.c1, p));
            int m = k + v;
            Rational d = 1;
            for (int i = 0; i < std::abs(m); ++i) d *= p;
            if (m > 0) d = 1 / d;
            delta = std::min(delta, d);
        }
    }
    return delta;
}

std::optional<std::vector<long long>> find_soluble_anchor(const ConicBundleFamily& fam, long long H) {
    for (long long h = 1; h <= H; ++h)
        for (long long x0 = 1; x0 <= h; ++x0)
            for (long long x1 = -h; x1 <= h; ++x1) {
                if (std::max(x0, std::llabs(x1)) != h || std::gcd(x0, std::llabs(x1)) != 1) continue;
                if (!conic_fibre_class(fam, x0, x1)) continue;
                if (conic_fibre_els(fam, x0, x1)) return std::vector<long long>{x0, x1};
            }
    return std::nullopt;
}

DetectorCount detector_lower_count(const ConicBundleFamily& fam, uint64_t B, const std::set<uint64_t>& S,
                                   const std::vector<long long>& anchor, std::optional<Rational> delta,
                                   const CorrelationOptions& opt) {
    if (anchor.size() != 2 || anchor[0] == 0) throw DomainError("anchor must be (y0, y1) with y0 != 0");
    if (!conic_fibre_class(fam, anchor[0], anchor[1])) throw DomainError("anchor fibre is degenerate");
    if (!conic_fibre_els(fam, anchor[0], anchor[1])) throw DomainError("anchor fibre is not everywhere locally soluble");
    auto theta = fam.theta_forms();
    if (theta.empty()) throw DomainError("the family has no non-split fibres");
    std::set<uint64_t> Seff = S;
    Seff.insert(fam.S0().begin(), fam.S0().end());
    DetectorCount out;
    for (const auto& f : theta) {
        i128 v = f.eval(anchor[0], anchor[1]);
        for (uint64_t p : prime_divisors(v)) Seff.insert(p);
        LinearForm lf = f.linear();
        if (v < 0)
            for (auto& c : lf.coeffs) c = -c;
        out.forms.push_back(lf);
    }
    ConstraintSet c;
    c.anchor = anchor;
    c.S = Seff;
    c.delta = delta ? *delta : anchor_delta(fam, anchor, Seff);
    out.constraints = c;
    LinearFormSystem sys(2, out.forms);
    std::vector<FrobMultSpec> specs(out.forms.size(), conic_detector_spec(fam, Seff));
    out.value = constrained_correlation_sum(LatticeBox::cube(2, Rational(B)), sys, specs, c,
                                            ConstraintPath::Valuation, opt);
    return out;
}

uint64_t count_conic_window(const ConicBundleFamily& fam, uint64_t B, const ConstraintSet& c) {
    c.validate(2);
    uint64_t n = 0;
    const long long b = (long long)B;
    const long long y0 = c.anchor[0], y1 = c.anchor[1];
    for (long long x0 = 1; x0 <= b; ++x0) {
        long long lo = -b, hi = b;
        if (c.archimedean) {
            long double mid = (long double)x0 * y1 / y0;
            long double w = (long double)x0 * (long double)double(c.delta);
            lo = std::max<long long>(lo, (long long)std::floor(mid - w) - 1);
            hi = std::min<long long>(hi, (long long)std::ceil(mid + w) + 1);
        }
        for (long long x1 = lo; x1 <= hi; ++x1) {
            std::vector<long long> x = {x0, x1};
            if (std::gcd(x0, std::llabs(x1)) != 1) continue;
            if (c.archimedean && !archimedean_close(x, c)) continue;
            bool close = true;
            for (uint64_t p : c.S)
                if (!padic_close(x, c, p)) close = false;
            if (!close || !conic_fibre_class(fam, x0, x1)) continue;
            n += conic_fibre_els(fam, x0, x1);
        }
    }
    return n;
}

DeltaExponent delta_pi(const ConicBundleFamily& fam) {
    DeltaExponent out;
    for (size_t j = 0; j < fam.forms().size(); ++j) {
        Rational d = fam.exponents()[j] % 2 ? Rational(1, 2) : Rational(1);
        out.divisors.push_back({fam.forms()[j].str(), d, 1 - d, true});
    }
    Rational d = fam.infinity_odd() ? Rational(1, 2) : Rational(1);
    out.divisors.push_back({"infinity", d, 1 - d, true});
    for (const auto& c : out.divisors) out.total += c.deficit;
    out.approx = to_double(out.total);
    return out;
}

std::string to_string(LocalNorm v) {
    switch (v) {
        case LocalNorm::Norm: return "norm";
        case LocalNorm::NotNorm: return "not_norm";
        default: return "undetermined";
    }
}

namespace {

// Real roots of a squarefree integer polynomial, by a Sturm sequence.
bool has_real_root(const IntPoly& g) {
    int n = degree(g);
    if (n % 2) return true;
    using RP = std::vector<Rational>;
    auto deg = [](const RP& f) {
        int d = int(f.size()) - 1;
        while (d >= 0 && f[size_t(d)] == 0) --d;
        return d;
    };
    auto rem = [&](RP a, const RP& b) {
        int db = deg(b);
        for (int da = deg(a); da >= db && da >= 0; da = deg(a)) {
            Rational q = a[size_t(da)] / b[size_t(db)];
            for (int i = 0; i <= db; ++i) a[size_t(da - db + i)] -= q * b[size_t(i)];
        }
        a.resize(size_t(std::max(deg(a), 0) + 1));
        return a;
    };
    RP f(g.begin(), g.end()), df;
    for (size_t i = 1; i < g.size(); ++i) df.push_back(Rational(g[i]) * long(i));
    std::vector<RP> seq = {f, df};
    while (deg(seq.back()) > 0) {
        RP r = rem(seq[seq.size() - 2], seq.back());
        for (auto& c : r) c = -c;
        if (deg(r) < 0 || (deg(r) == 0 && r[0] == 0)) break;
        seq.push_back(r);
    }
    // Sign changes at -infinity and +infinity.
    auto changes = [&](bool plus) {
        int count = 0, last = 0;
        for (const auto& p : seq) {
            int d = deg(p);
            if (d < 0) continue;
            int s = p[size_t(d)] > 0 ? 1 : -1;
            if (!plus && d % 2) s = -s;
            if (last && s != last) ++count;
            last = s;
        }
        return count;
    };
    return changes(false) - changes(true) > 0;
}

uint64_t upow(uint64_t p, int k) {
    uint64_t v = 1;
    for (int i = 0; i < k; ++i) v *= p;
    return v;
}

// Unit part of n / p^v(n) modulo m.
uint64_t unit_mod(const FactoredInteger& n, uint64_t p, uint64_t m) {
    uint64_t u = n.sign < 0 ? m - 1 : 1 % m;
    for (const auto& pp : n.factors)
        if (pp.p != p)
            for (int i = 0; i < pp.e; ++i) u = mulmod(u, pp.p % m, m);
    return u;
}

}  // namespace

MultinormFamily::MultinormFamily(std::vector<IntPoly> fields, std::vector<BinaryForm> forms, std::vector<int> exponents,
                                 std::optional<std::map<std::string, Rational>> distribution, std::string label)
    : fields_(std::move(fields)), forms_(std::move(forms)), exps_(std::move(exponents)), dist_(std::move(distribution)),
      label_(std::move(label)) {
    if (fields_.empty()) throw ConfigError("at least one field is required");
    e_ = 0;
    for (auto& g : fields_) {
        while (g.size() > 1 && g.back() == 0) g.pop_back();
        int d = degree(g);
        if (d < 1) throw ConfigError("field polynomials must have positive degree");
        if (g.back() != 1) throw ConfigError("field polynomials must be monic");
        if (d >= 2 && !certify_irreducible(g)) throw ConfigError("field polynomial not certified irreducible: " + poly_string(g));
        e_ = std::gcd(e_, d);
        if (d >= 2)
            for (uint64_t p : prime_divisors(discriminant(g))) S_.insert(p);
        real_all_ = real_all_ || has_real_root(g);
    }
    check_forms(forms_, exps_);
    int total = 0;
    for (int a : exps_) total += a;
    a0_ = ((-total) % e_ + e_) % e_;
    if (label_.empty()) {
        std::ostringstream os;
        os << "E:";
        for (const auto& g : fields_) os << " (" << poly_string(g) << ")";
        label_ = os.str();
    }
}

bool MultinormFamily::all_quadratic() const {
    for (const auto& g : fields_)
        if (degree(g) != 2) return false;
    return true;
}

int MultinormFamily::local_degree_gcd(uint64_t p) const {
    int f = 0;
    for (const auto& g : fields_) {
        if (degree(g) == 1) return 1;
        auto pat = splitting_pattern(g, p);
        if (pat.ramified) throw DomainError("local_degree_gcd needs an unramified prime");
        for (int d : pat.degrees) f = std::gcd(f, d);
    }
    return f;
}

const MultinormFamily::NormGroup& MultinormFamily::norm_group(uint64_t p) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->groups.find(p);
    if (it != cache_->groups.end()) return it->second;

    NormGroup grp;
    int vmin = 64;
    for (const auto& g : fields_) vmin = std::min(vmin, int(padic_valuation(degree(g), p)));
    grp.k0 = (p == 2 ? 2 : 1) + vmin;
    grp.modulus = upow(p, grp.k0);
    const uint64_t M = grp.modulus;
    const int e = e_;

    auto closure = [&](int kb, bool& complete) {
        std::set<std::pair<int, uint64_t>> gens;
        complete = true;
        for (const auto& g : fields_) {
            const int n = degree(g);
            const uint64_t q = upow(p, kb);
            long double cells = std::pow((long double)q, n);
            if (cells > (long double)(1 << 22)) {
                complete = false;
                continue;
            }
            IntPoly beta(size_t(n), 0);
            for (uint64_t idx = 0; idx < uint64_t(cells); ++idx) {
                uint64_t t = idx;
                bool unit_coeff = false;
                for (int i = 0; i < n; ++i) {
                    beta[size_t(i)] = (long long)(t % q);
                    t /= q;
                    if (beta[size_t(i)] % (long long)p) unit_coeff = true;
                }
                if (!unit_coeff) continue;
                IntPoly b = beta;
                while (b.size() > 1 && b.back() == 0) b.pop_back();
                BigInt N = resultant(g, b);
                if (N == 0) continue;
                int v = 0;
                while (N % p == 0) {
                    N /= p;
                    ++v;
                }
                BigInt r = N % BigInt(M);
                if (r < 0) r += M;
                gens.insert({v % e, uint64_t(r)});
            }
        }
        std::set<std::pair<int, uint64_t>> H = {{0, 1 % M}};
        std::vector<std::pair<int, uint64_t>> frontier(H.begin(), H.end());
        while (!frontier.empty()) {
            std::vector<std::pair<int, uint64_t>> next;
            for (const auto& h : frontier)
                for (const auto& gv : gens) {
                    std::pair<int, uint64_t> prod{(h.first + gv.first) % e, mulmod(h.second, gv.second, M)};
                    if (H.insert(prod).second) next.push_back(prod);
                }
            frontier = std::move(next);
        }
        return H;
    };
    bool c1 = false, c2 = false;
    auto H1 = closure(grp.k0, c1);
    auto H2 = closure(grp.k0 + 1, c2);
    grp.elements = H2;
    grp.stable = H1 == H2;
    grp.complete = c1 && c2;
    return cache_->groups.emplace(p, std::move(grp)).first->second;
}

LocalNorm multinorm_local_test(const MultinormFamily& fam, const FactoredInteger& value, uint64_t p) {
    if (value.sign == 0) throw DomainError("multinorm_local_test needs a nonzero value");
    for (const auto& g : fam.fields())
        if (degree(g) == 1) return LocalNorm::Norm;
    const int v = value.valuation(p);
    if (!fam.S().count(p)) return v % fam.local_degree_gcd(p) == 0 ? LocalNorm::Norm : LocalNorm::NotNorm;
    if (fam.all_quadratic()) {
        std::vector<i128> d;
        for (const auto& g : fam.fields()) d.push_back(squarefree_part(i128(g[1]) * g[1] - 4 * i128(g[0])));
        for (i128 di : d)
            if (padic_square(di, p)) return LocalNorm::Norm;
        for (size_t i = 1; i < d.size(); ++i)
            if (!padic_square(d[0] * d[i], p)) return LocalNorm::Norm;
        i128 rep = value.sign;
        for (const auto& pp : value.factors)
            if (pp.e % 2) rep *= i128(pp.p);
        return hilbert_symbol(d[0], rep, Place::prime(p)) == 1 ? LocalNorm::Norm : LocalNorm::NotNorm;
    }
    const auto& grp = fam.norm_group(p);
    std::pair<int, uint64_t> cls{v % fam.e(), unit_mod(value, p, grp.modulus)};
    if (grp.elements.count(cls)) return LocalNorm::Norm;
    return grp.stable && grp.complete ? LocalNorm::NotNorm : LocalNorm::Undetermined;
}

LocalNorm multinorm_real_test(const MultinormFamily& fam, int sign) {
    if (sign == 0) throw DomainError("multinorm_real_test needs a nonzero value");
    return fam.real_norms_all() || sign > 0 ? LocalNorm::Norm : LocalNorm::NotNorm;
}

namespace {

LocalNorm multinorm_verdict(const MultinormFamily& fam, const FactoredInteger& value) {
    LocalNorm out = multinorm_real_test(fam, value.sign);
    if (out == LocalNorm::NotNorm) return out;
    std::set<uint64_t> primes = fam.S();
    for (const auto& pp : value.factors) primes.insert(pp.p);
    for (uint64_t p : primes) {
        LocalNorm l = multinorm_local_test(fam, value, p);
        if (l == LocalNorm::NotNorm) return l;
        if (l == LocalNorm::Undetermined) out = l;
    }
    return out;
}

void add_power(std::map<uint64_t, int>& acc, const FactoredInteger& f, int e) {
    for (const auto& pp : f.factors) acc[pp.p] += pp.e * e;
}

FactoredInteger multinorm_value(const MultinormFamily& fam, long long x0, long long x1,
                                const std::function<FactoredInteger(i128)>& factor) {
    if (x0 == 0) throw DomainError("multinorm fibres need x0 != 0");
    std::map<uint64_t, int> acc;
    int sign = (x0 < 0 && fam.a0() % 2) ? -1 : 1;
    if (fam.a0()) add_power(acc, factor(x0 < 0 ? -i128(x0) : i128(x0)), fam.a0());
    for (size_t j = 0; j < fam.forms().size(); ++j) {
        i128 v = fam.forms()[j].eval(x0, x1);
        if (v == 0) throw DomainError("degenerate multinorm fibre");
        if (v < 0 && fam.exponents()[j] % 2) sign = -sign;
        add_power(acc, factor(v < 0 ? -v : v), fam.exponents()[j]);
    }
    FactoredInteger out;
    out.sign = sign;
    for (const auto& [p, e] : acc) out.factors.push_back({p, e});
    return out;
}

}  // namespace

LocalNorm multinorm_fibre(const MultinormFamily& fam, long long x0, long long x1) {
    return multinorm_verdict(fam, multinorm_value(fam, x0, x1, [](i128 n) { return factor_integer(n); }));
}

std::vector<CountRow> count_multinorm(const MultinormFamily& fam, const std::vector<uint64_t>& grid,
                                      const FibreVisitor& visit) {
    auto bin = grid_bins(grid);
    const uint64_t B = grid.back();
    long long cmax = 1;
    for (const auto& f : fam.forms()) cmax = std::max(cmax, std::llabs(f.c0) + std::llabs(f.c1));
    const uint64_t N = uint64_t(cmax) * B;
    if (N > capacity().table_bound) throw CapacityError("form values exceed the table bound");
    auto spf = shared_spf(std::max<uint64_t>(N, 2));
    auto factor = [&](i128 n) { return spf_factor(n, *spf); };
    std::vector<int8_t> fcache(N + 1, 0);
    bool trivial = false;
    for (const auto& g : fam.fields()) trivial = trivial || degree(g) == 1;

    std::vector<CountRow> total(grid.size());
    total[bin[1]].points++;
    total[bin[1]].degenerate++;
    const long long b = (long long)B;
    for_each_row(B, 1, b, [&](long long x0, const std::vector<uint8_t>& mark) {
        for (long long x1 = -b; x1 <= b; ++x1) {
            if (mark[size_t(x1 + b)]) continue;
            CountRow& r = total[bin[std::max<long long>(x0, std::llabs(x1))]];
            ++r.points;
            bool degenerate = false;
            for (const auto& f : fam.forms())
                if (f.eval(x0, x1) == 0) degenerate = true;
            if (degenerate) {
                ++r.degenerate;
                continue;
            }
            FactoredInteger value = multinorm_value(fam, x0, x1, factor);
            LocalNorm verdict = multinorm_real_test(fam, value.sign);
            if (verdict == LocalNorm::Norm && !trivial) {
                for (const auto& pp : value.factors) {
                    if (fam.S().count(pp.p)) continue;
                    int8_t& f = fcache[pp.p];
                    if (!f) f = int8_t(fam.local_degree_gcd(pp.p));
                    if (pp.e % f) {
                        verdict = LocalNorm::NotNorm;
                        break;
                    }
                }
                if (verdict == LocalNorm::Norm)
                    for (uint64_t p : fam.S()) {
                        LocalNorm l = multinorm_local_test(fam, value, p);
                        if (l == LocalNorm::NotNorm) {
                            verdict = l;
                            break;
                        }
                        if (l == LocalNorm::Undetermined) verdict = l;
                    }
            }
            if (verdict == LocalNorm::Norm) ++r.N;
            else if (verdict == LocalNorm::Undetermined) ++r.undetermined;
            if (visit) visit(x0, x1, verdict == LocalNorm::Norm ? 1 : verdict == LocalNorm::NotNorm ? 0 : -1);
        }
    });
    return finish_rows(grid, total);
}

DeltaExponent delta_pi(const MultinormFamily& fam, uint64_t X) {
    DeltaExponent out;
    std::vector<std::pair<std::string, int>> divisors = {{"x0", fam.a0()}};
    for (size_t j = 0; j < fam.forms().size(); ++j) divisors.push_back({fam.forms()[j].str(), fam.exponents()[j]});

    bool trivial = false;
    for (const auto& g : fam.fields()) trivial = trivial || degree(g) == 1;
    for (const auto& [label, a] : divisors) {
        DivisorContribution c;
        c.label = label;
        if (trivial || a % fam.e() == 0) {
            c.delta = 1;
        } else if (fam.all_quadratic()) {
            // Density of primes split in some field: 1 - sum_T (-1)^|T| [prod_T d square] / 2^k.
            std::vector<i128> d;
            for (const auto& g : fam.fields()) d.push_back(squarefree_part(i128(g[1]) * g[1] - 4 * i128(g[0])));
            const size_t k = d.size();
            Rational inert = 0;
            for (uint64_t T = 0; T < (uint64_t(1) << k); ++T) {
                i128 prod = 1;
                int bits = 0;
                for (size_t i = 0; i < k; ++i)
                    if (T >> i & 1) {
                        prod = squarefree_part(prod * d[i]);
                        ++bits;
                    }
                if (prod == 1) inert += bits % 2 ? -1 : 1;
            }
            for (size_t i = 0; i < k; ++i) inert /= 2;
            c.delta = 1 - inert;
        } else {
            // Joint splitting pattern keys with gcd of the degrees dividing a.
            std::vector<std::vector<std::string>> keys;
            for (const auto& g : fam.fields()) keys.push_back(pattern_keys(degree(g)));
            std::map<std::string, Scalar> table;
            std::vector<size_t> idx(keys.size(), 0);
            while (true) {
                std::string key;
                int f = 0;
                for (size_t i = 0; i < keys.size(); ++i) {
                    if (i) key += "|";
                    key += keys[i][idx[i]];
                    for (int dd : SplittingPattern::parse(keys[i][idx[i]]).degrees) f = std::gcd(f, dd);
                }
                table[key] = a % f == 0 ? 1 : 0;
                size_t i = 0;
                while (i < keys.size() && ++idx[i] == keys[i].size()) idx[i++] = 0;
                if (i == keys.size()) break;
            }
            auto spec = FrobenianSpec::split_pattern(fam.fields(), table, fam.distribution());
            auto m = mean(spec, X);
            if (m.exact && m.value.exact()) {
                c.delta = m.value.re();
            } else {
                c.delta = make_rational(BigInt((long long)std::llround(m.value.value().real() * 1e9)), BigInt(1000000000));
                c.exact = false;
            }
        }
        c.deficit = 1 - c.delta;
        out.exact = out.exact && c.exact;
        out.total += c.deficit;
        out.divisors.push_back(c);
    }
    out.approx = to_double(out.total);
    return out;
}

QuaternionBrauerFamily::QuaternionBrauerFamily(int n, std::vector<std::vector<long long>> hyperplanes,
                                               std::vector<BrauerClass> classes)
    : n_(n), hyper_(std::move(hyperplanes)), classes_(std::move(classes)) {
    if (n < 1) throw ConfigError("dimension must be positive");
    if (hyper_.empty()) throw ConfigError("at least one hyperplane is required");
    for (const auto& h : hyper_) {
        if (int(h.size()) != n + 1) throw ConfigError("hyperplanes need n + 1 coefficients");
        long long g = 0;
        for (long long c : h) g = std::gcd(g, std::llabs(c));
        if (g != 1) throw ConfigError("hyperplanes must be primitive");
    }
    for (const auto& b : classes_) {
        if (b.a == 0) throw ConfigError("quaternion classes need a != 0");
        if (b.m.size() != hyper_.size()) throw ConfigError("one exponent per hyperplane expected");
        if (std::accumulate(b.m.begin(), b.m.end(), 0) != 0) throw ConfigError("rational functions must have degree 0");
    }
}

DeltaExponent brauer_delta(const QuaternionBrauerFamily& fam) {
    DeltaExponent out;
    // Square classes of the a_i over the basis -1, primes.
    std::vector<std::set<uint64_t>> cls;
    for (const auto& b : fam.classes()) {
        std::set<uint64_t> s;
        i128 sq = squarefree_part(b.a);
        if (sq < 0) s.insert(0);
        for (uint64_t p : prime_divisors(sq)) s.insert(p);
        cls.push_back(s);
    }
    for (size_t k = 0; k < fam.hyperplanes().size(); ++k) {
        std::vector<std::set<uint64_t>> rows;
        for (size_t i = 0; i < fam.classes().size(); ++i)
            if (fam.classes()[i].m[k] % 2 && !cls[i].empty()) rows.push_back(cls[i]);
        // Rank over F_2 by elimination on the largest element.
        int rank = 0;
        while (!rows.empty()) {
            auto it = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
                return a.empty() ? true : b.empty() ? false : *a.rbegin() < *b.rbegin();
            });
            if (it->empty()) break;
            std::set<uint64_t> pivot = *it;
            rows.erase(it);
            ++rank;
            uint64_t lead = *pivot.rbegin();
            for (auto& r : rows)
                if (r.count(lead)) {
                    std::set<uint64_t> x;
                    std::set_symmetric_difference(r.begin(), r.end(), pivot.begin(), pivot.end(),
                                                  std::inserter(x, x.begin()));
                    r = x;
                }
            rows.erase(std::remove_if(rows.begin(), rows.end(), [](const auto& r) { return r.empty(); }), rows.end());
        }
        Rational order = 1;
        for (int i = 0; i < rank; ++i) order *= 2;
        std::ostringstream os;
        os << "(";
        for (size_t i = 0; i < fam.hyperplanes()[k].size(); ++i) os << (i ? "," : "") << fam.hyperplanes()[k][i];
        os << ")";
        Rational delta = 1 / order;
        out.divisors.push_back({os.str(), delta, 1 - delta, true});
        out.total += 1 - delta;
    }
    out.approx = to_double(out.total);
    return out;
}

std::optional<bool> brauer_classes_vanish(const QuaternionBrauerFamily& fam, const std::vector<long long>& x) {
    if (int(x.size()) != fam.n() + 1) throw DomainError("point has the wrong dimension");
    std::vector<i128> vals;
    for (const auto& h : fam.hyperplanes()) {
        i128 v = 0;
        for (size_t i = 0; i < x.size(); ++i) v += i128(h[i]) * x[i];
        if (v == 0) return std::nullopt;
        vals.push_back(v);
    }
    for (const auto& b : fam.classes()) {
        ClassBuilder cb;
        for (size_t k = 0; k < vals.size(); ++k) cb.add(vals[k], std::abs(b.m[k]));
        i128 rep = cb.rep();
        if (b.a < 0 && rep < 0) return false;
        std::set<uint64_t> places = prime_divisors(2 * b.a);
        for (uint64_t p : prime_divisors(rep)) places.insert(p);
        for (uint64_t p : places)
            if (hilbert_symbol(b.a, rep, Place::prime(p)) != 1) return false;
    }
    return true;
}

std::vector<CountRow> brauer_zero_locus_count(const QuaternionBrauerFamily& fam, const std::vector<uint64_t>& grid) {
    if (fam.n() > 2) throw CapacityError("brauer_zero_locus_count supports n <= 2");
    auto bin = grid_bins(grid);
    const long long B = (long long)grid.back();
    const int s = fam.n() + 1;
    std::vector<CountRow> total(grid.size());
    std::vector<long long> x(size_t(s), -B);
    while (true) {
        long long g = 0, h = 0;
        int first = 0;
        for (long long v : x) {
            g = std::gcd(g, std::llabs(v));
            h = std::max(h, std::llabs(v));
            if (!first && v) first = v > 0 ? 1 : -1;
        }
        if (g == 1 && first > 0) {
            CountRow& r = total[bin[size_t(h)]];
            ++r.points;
            auto v = brauer_classes_vanish(fam, x);
            if (!v) ++r.degenerate;
            else r.N += *v;
        }
        int j = 0;
        while (j < s && ++x[size_t(j)] > B) x[size_t(j++)] = -B;
        if (j == s) break;
    }
    return finish_rows(grid, total);
}

bool dp4_fibre_soluble(long long t0, long long t1, Place v) {
    if (t1 == 0) return true;
    if (t0 == 0) throw DomainError("the fibre over t = 0 is degenerate");
    i128 t = i128(t0) * t1;
    i128 f = i128(t0) * t0 - 2 * i128(t1) * t1;
    if (v.is_real()) return t > 0 || f > 0;
    return hilbert_symbol(t, f, v) == 1;
}

std::vector<PencilWitness> pencil_counterexample_search(uint64_t P) {
    std::vector<PencilWitness> out;
    if (P < 7) return out;
    for (uint64_t p : sieve_primes(P)) {
        if (p % 8 != 7) continue;
        for (long long t1 = 1; t1 <= (long long)p; ++t1) {
            i128 sq = i128(p) + 2 * i128(t1) * t1;
            if (!is_square(sq)) continue;
            long long t0 = (long long)isqrt(u128(sq));
            PencilWitness w{p, t0, t1, dp4_fibre_soluble(t0, t1, Place::prime(p)),
                            dp4_fibre_soluble(t0, -t1, Place::prime(p))};
            if (w.soluble_plus != w.soluble_minus) {
                out.push_back(w);
                break;
            }
        }
    }
    return out;
}

void PencilDetector::validate() const {
    if (d == 0 || d == 1) throw DomainError("d must not be 0 or 1");
    if (squarefree_part(d) != d) throw DomainError("d must be squarefree");
}

PencilDetector PencilDetector::dp4() {
    PencilDetector pd;
    pd.d = 2;
    pd.beta = {0, 1};
    pd.rational = {{{1, 0}, -2}};
    pd.S = {2};
    return pd;
}

PencilDetector PencilDetector::split_conic(i128 a, i128 d) {
    PencilDetector pd;
    pd.d = d;
    pd.beta = {a, 0};
    pd.S = prime_divisors(2 * a * d);
    return pd;
}

int pencil_detector_value(const PencilDetector& pd, long long x0, long long x1) {
    pd.validate();
    if (std::gcd(std::llabs(x0), std::llabs(x1)) != 1) throw DomainError("pencil detector needs coprime (x0, x1)");
    auto excluded = [&](uint64_t p) { return pd.S.count(p) || p == 2 || pd.d % i128(p) == 0; };
    i128 F = i128(x0) * x0 - pd.d * i128(x1) * x1;
    i128 nb = pd.beta.a * pd.beta.a - pd.d * pd.beta.b * pd.beta.b;
    for (uint64_t p : prime_divisors(F)) {
        if (excluded(p) || (nb != 0 && nb % i128(p) == 0)) continue;
        uint64_t r = mulmod(mod_of(x0, p), invmod(mod_of(x1, p), p), p);
        auto split = quadratic_prime_split(pd.d, p);
        if (split.kind != QuadraticPrimeSplit::Kind::Split) return 0;
        if (split.root != r) split = conjugate_split(split);
        if (residue_symbol_deg1(pd.beta, split) != 1) return 0;
    }
    for (const auto& [form, a] : pd.rational) {
        i128 v = form.eval(x0, x1);
        if (v == 0) return 0;
        for (uint64_t p : prime_divisors(v)) {
            if (excluded(p) || a % i128(p) == 0) continue;
            if (legendre_symbol(a, p) != 1) return 0;
        }
    }
    return 1;
}

PencilSum pencil_detector_sum(const PencilDetector& pd, uint64_t B, const std::optional<ConstraintSet>& c) {
    pd.validate();
    if (c) c->validate(2);
    PencilSum out;
    out.B = B;
    const long long b = (long long)B;
    for (long long x0 = -b; x0 <= b; ++x0)
        for (long long x1 = -b; x1 <= b; ++x1) {
            if (std::gcd(std::llabs(x0), std::llabs(x1)) != 1) continue;
            std::vector<long long> x = {x0, x1};
            if (c) {
                if (x0 == 0) continue;
                if (c->archimedean && !archimedean_close(x, *c)) continue;
                bool close = true;
                for (uint64_t p : c->S)
                    if (!padic_close(x, *c, p)) close = false;
                if (!close) continue;
            }
            ++out.points;
            out.value += pencil_detector_value(pd, x0, x1);
        }
    return out;
}

}  // namespace fc
