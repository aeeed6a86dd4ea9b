#include "frobcount/frobenian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fc {

namespace {

const double kTwoPi = 6.283185307179586476925286766559;

uint64_t lcm_u64(uint64_t a, uint64_t b) { return a / std::gcd(a, b) * b; }

std::vector<uint64_t> divisors_of(uint64_t n) {
    std::vector<uint64_t> d;
    for (uint64_t i = 1; i * i <= n; ++i)
        if (n % i == 0) {
            d.push_back(i);
            if (i * i != n) d.push_back(n / i);
        }
    std::sort(d.begin(), d.end());
    return d;
}

struct Generator {
    uint64_t order;
    std::vector<int> log;  // indexed by n mod q; -1 off units
};

uint64_t primitive_root_prime_power(uint64_t p, int k) {
    uint64_t pk = 1;
    for (int i = 0; i < k; ++i) pk *= p;
    auto fs = factor_integer(p - 1).factors;
    for (uint64_t g = 2; g < p; ++g) {
        bool ok = true;
        for (const auto& f : fs)
            if (powmod(g, (p - 1) / f.p, p) == 1) ok = false;
        if (!ok) continue;
        if (k >= 2 && powmod(g, p - 1, p * p) == 1) g += p;
        return g % pk;
    }
    return 1;  // p = 2 handled elsewhere
}

// Generators of (Z/q)^* with discrete-log tables on the full residue range.
std::vector<Generator> unit_generators(uint64_t q) {
    std::vector<Generator> gens;
    if (q == 1) return gens;
    for (const auto& f : factor_integer(q).factors) {
        uint64_t pk = 1;
        for (int i = 0; i < f.e; ++i) pk *= f.p;
        if (f.p == 2) {
            if (f.e == 1) continue;
            // n = (-1)^a 5^b mod 2^k
            uint64_t o5 = f.e >= 3 ? pk / 4 : 1;
            std::vector<int> la(pk, -1), lb(pk, -1);
            uint64_t x = 1;
            for (uint64_t b = 0; b < o5; ++b) {
                la[x] = 0;
                lb[x] = int(b);
                la[pk - x] = 1;
                lb[pk - x] = int(b);
                x = x * 5 % pk;
            }
            Generator ga{2, std::vector<int>(q)}, gb{o5, std::vector<int>(q)};
            for (uint64_t n = 0; n < q; ++n) {
                ga.log[n] = la[n % pk];
                gb.log[n] = lb[n % pk];
            }
            gens.push_back(std::move(ga));
            if (o5 > 1) gens.push_back(std::move(gb));
        } else {
            uint64_t g = primitive_root_prime_power(f.p, f.e);
            uint64_t order = pk / f.p * (f.p - 1);
            std::vector<int> lg(pk, -1);
            uint64_t x = 1;
            for (uint64_t i = 0; i < order; ++i) {
                lg[x] = int(i);
                x = x * g % pk;
            }
            Generator gen{order, std::vector<int>(q)};
            for (uint64_t n = 0; n < q; ++n) gen.log[n] = lg[n % pk];
            gens.push_back(std::move(gen));
        }
    }
    return gens;
}

}  // namespace

DirichletCharacter::DirichletCharacter(uint64_t modulus, uint64_t order, std::vector<int> exponents)
    : q_(modulus), order_(order), exps_(std::move(exponents)) {
    if (q_ == 0 || order_ == 0 || exps_.size() != q_) throw ConfigError("malformed Dirichlet character");
    for (uint64_t n = 0; n < q_; ++n) {
        bool unit = std::gcd(n, q_) == 1;
        if (unit != (exps_[n] >= 0)) throw ConfigError("character exponent table must mark exactly the non-units");
        if (exps_[n] >= int64_t(order_)) throw ConfigError("character exponent out of range");
    }
    if (exps_[1 % q_] != 0) throw ConfigError("character must send 1 to 1");
    for (uint64_t a = 1; a < q_ && q_ <= 4096; ++a) {
        if (exps_[a] < 0) continue;
        for (uint64_t b = a; b < q_; ++b)
            if (exps_[b] >= 0 && exps_[a * b % q_] != int((exps_[a] + exps_[b]) % order_))
                throw ConfigError("character is not multiplicative");
    }
    normalize();
}

void DirichletCharacter::normalize() {
    uint64_t g = order_;
    for (int e : exps_)
        if (e > 0) g = std::gcd(g, uint64_t(e));
    if (g > 1) {
        order_ /= g;
        for (int& e : exps_)
            if (e > 0) e = int(e / g);
    }
}

DirichletCharacter DirichletCharacter::principal(uint64_t q) {
    if (q == 0) throw ConfigError("modulus 0");
    std::vector<int> e(q);
    for (uint64_t n = 0; n < q; ++n) e[n] = std::gcd(n, q) == 1 ? 0 : -1;
    DirichletCharacter c;
    c.q_ = q;
    c.order_ = 1;
    c.exps_ = std::move(e);
    return c;
}

DirichletCharacter DirichletCharacter::kronecker(i128 d) {
    if (d == 0) throw ConfigError("kronecker character of 0");
    uint64_t ad = uint64_t(d < 0 ? -d : d);
    uint64_t m = (mod_of(d, 4) == 1 || mod_of(d, 4) == 0) ? ad : 4 * ad;
    std::vector<int> e(m);
    for (uint64_t n = 0; n < m; ++n) {
        if (std::gcd(n, m) != 1) {
            e[n] = -1;
            continue;
        }
        e[n] = kronecker_symbol(d, (i128)(n == 0 ? m : n)) == 1 ? 0 : 1;
    }
    DirichletCharacter c;
    c.q_ = m;
    c.order_ = 2;
    c.exps_ = std::move(e);
    c.normalize();
    return c;
}

std::complex<double> DirichletCharacter::value(i128 n) const {
    int e = exponent(n);
    if (e < 0) return 0.0;
    if (e == 0) return 1.0;
    if (2 * uint64_t(e) == order_) return -1.0;
    return std::polar(1.0, kTwoPi * double(e) / double(order_));
}

Scalar DirichletCharacter::exact_value(i128 n) const {
    int e = exponent(n);
    if (e < 0) return 0;
    if (e == 0) return 1;
    if (4 % order_ == 0) {
        int k = int(e * (4 / order_)) % 4;
        switch (k) {
            case 1: return Scalar(0, 1);
            case 2: return -1;
            case 3: return Scalar(0, -1);
            default: return 1;
        }
    }
    return Scalar::approx(value(n));
}

bool DirichletCharacter::is_principal() const {
    return std::all_of(exps_.begin(), exps_.end(), [](int e) { return e <= 0; });
}

uint64_t DirichletCharacter::conductor() const {
    for (uint64_t d : divisors_of(q_)) {
        bool ok = true;
        for (uint64_t n = 1 % d; n < q_ && ok; n += d)
            if (exps_[n] > 0) ok = false;
        if (ok) return d;
    }
    return q_;
}

DirichletCharacter DirichletCharacter::primitive() const {
    uint64_t f = conductor();
    std::vector<int> e(f, -1);
    for (uint64_t r = 0; r < f; ++r) {
        if (std::gcd(r, f) != 1) continue;
        for (uint64_t n = r; n < q_ + f; n += f)
            if (exps_[n % q_] >= 0) {
                e[r] = exps_[n % q_];
                break;
            }
    }
    DirichletCharacter c;
    c.q_ = f;
    c.order_ = order_;
    c.exps_ = std::move(e);
    if (f == 1) c.exps_[0] = 0;
    c.normalize();
    return c;
}

DirichletCharacter DirichletCharacter::lift(uint64_t multiple) const {
    if (multiple % q_ != 0) throw DomainError("lift needs a multiple of the modulus");
    std::vector<int> e(multiple);
    for (uint64_t n = 0; n < multiple; ++n) e[n] = std::gcd(n, multiple) == 1 ? exps_[n % q_] : -1;
    DirichletCharacter c;
    c.q_ = multiple;
    c.order_ = order_;
    c.exps_ = std::move(e);
    return c;
}

DirichletCharacter DirichletCharacter::conj() const {
    DirichletCharacter c = *this;
    for (int& e : c.exps_)
        if (e > 0) e = int(order_ - e);
    return c;
}

std::string DirichletCharacter::label() const {
    std::ostringstream os;
    const uint64_t f = conductor();
    if (order_ == 1) {
        os << "chi_1 mod " << q_;
        return os.str();
    }
    if (order_ == 2) {
        DirichletCharacter p = primitive();
        for (long long d : {(long long)f, -(long long)f}) {
            if (DirichletCharacter::kronecker(d).primitive() == p) {
                os << "chi_" << d;
                if (q_ != f) os << " mod " << q_;
                return os.str();
            }
        }
    }
    os << "chi[q=" << q_ << ",ord=" << order_ << ",f=" << f << "]";
    return os.str();
}

bool DirichletCharacter::operator<(const DirichletCharacter& o) const {
    if (q_ != o.q_) return q_ < o.q_;
    if (order_ != o.order_) return order_ < o.order_;
    return exps_ < o.exps_;
}

DirichletCharacter operator*(const DirichletCharacter& a, const DirichletCharacter& b) {
    uint64_t L = lcm_u64(a.q_, b.q_);
    uint64_t N = lcm_u64(a.order_, b.order_);
    std::vector<int> e(L);
    for (uint64_t n = 0; n < L; ++n) {
        if (std::gcd(n, L) != 1) {
            e[n] = -1;
            continue;
        }
        uint64_t x = uint64_t(a.exps_[n % a.q_]) * (N / a.order_) + uint64_t(b.exps_[n % b.q_]) * (N / b.order_);
        e[n] = int(x % N);
    }
    DirichletCharacter c;
    c.q_ = L;
    c.order_ = N;
    c.exps_ = std::move(e);
    c.normalize();
    return c;
}

std::vector<DirichletCharacter> characters_mod(uint64_t q) {
    auto gens = unit_generators(q);
    uint64_t N = 1;
    for (const auto& g : gens) N = lcm_u64(N, g.order);
    std::vector<DirichletCharacter> out;
    std::vector<uint64_t> j(gens.size(), 0);
    while (true) {
        std::vector<int> e(q);
        for (uint64_t n = 0; n < q; ++n) {
            if (std::gcd(n, q) != 1) {
                e[n] = -1;
                continue;
            }
            uint64_t x = 0;
            for (size_t i = 0; i < gens.size(); ++i) x += j[i] * uint64_t(gens[i].log[n]) * (N / gens[i].order);
            e[n] = int(x % N);
        }
        if (q == 1) e[0] = 0;
        out.emplace_back(q, N, std::move(e));
        size_t i = 0;
        while (i < gens.size() && ++j[i] == gens[i].order) j[i++] = 0;
        if (i == gens.size()) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<DirichletCharacter> primitive_characters(uint64_t bound) {
    std::vector<DirichletCharacter> out;
    for (uint64_t f = 1; f <= bound; ++f)
        for (auto& c : characters_mod(f))
            if (c.is_primitive()) out.push_back(std::move(c));
    return out;
}

struct FrobenianSpec::Cache {
    uint64_t modulus = 0;
    std::vector<Scalar> exact;
    std::vector<std::complex<double>> approx;
    std::map<std::string, std::complex<double>> table_value;
};

FrobenianSpec FrobenianSpec::character_combo(std::vector<CharacterTerm> terms) {
    FrobenianSpec s;
    s.kind = Kind::CharacterCombo;
    s.terms = std::move(terms);
    s.finalize();
    return s;
}

FrobenianSpec FrobenianSpec::constant(Scalar c) {
    return character_combo({{DirichletCharacter::principal(1), std::move(c)}});
}

FrobenianSpec FrobenianSpec::split_pattern(std::vector<IntPoly> polys, std::map<std::string, Scalar> table,
                                           std::optional<std::map<std::string, Rational>> distribution) {
    FrobenianSpec s;
    s.kind = Kind::SplitPattern;
    s.polys = std::move(polys);
    s.table = std::move(table);
    s.distribution = std::move(distribution);
    s.finalize();
    return s;
}

FrobenianSpec FrobenianSpec::root_indicator(const IntPoly& f,
                                            std::optional<std::map<std::string, Rational>> distribution) {
    std::map<std::string, Scalar> table;
    for (const auto& key : pattern_keys(degree(f))) {
        auto sp = SplittingPattern::parse(key);
        table[key] = sp.degrees.front() == 1 ? 1 : 0;
    }
    return split_pattern({f}, std::move(table), std::move(distribution));
}

FrobenianSpec FrobenianSpec::residue_indicator(uint64_t q, const std::set<uint64_t>& residues) {
    auto chars = characters_mod(q);
    Rational inv_phi(1, chars.size());
    std::vector<CharacterTerm> terms;
    for (const auto& chi : chars) {
        Scalar c = 0;
        for (uint64_t r : residues) c += chi.conj().exact_value(r);
        c *= Scalar(inv_phi);
        if (!c.is_zero() && std::abs(c.value()) > 1e-14) terms.push_back({chi, c});
    }
    if (terms.empty()) terms.push_back({DirichletCharacter::principal(q), 0});
    FrobenianSpec s = character_combo(std::move(terms));
    for (const auto& f : factor_integer(q).factors) s.S.insert(f.p);
    return s;
}

void FrobenianSpec::finalize() {
    auto add_primes = [&](uint64_t n) {
        for (const auto& f : factor_integer(n).factors) S.insert(f.p);
    };
    auto c = std::make_shared<Cache>();
    for (const auto& t : twists) add_primes(t.modulus());
    if (kind == Kind::CharacterCombo) {
        if (terms.empty()) throw ConfigError("character combination without terms");
        for (const auto& t : terms) add_primes(t.chi.modulus());
        uint64_t M = combo_modulus();
        if (M <= (1u << 22)) {
            c->modulus = M;
            c->exact.assign(M, Scalar(0));
            c->approx.assign(M, 0.0);
            for (uint64_t r = 0; r < M; ++r) {
                if (std::gcd(r, M) != 1) continue;
                Scalar v = 0;
                for (const auto& t : terms) v += t.coeff * t.chi.exact_value(r);
                for (const auto& tw : twists) v *= tw.exact_value(r);
                c->exact[r] = v;
                c->approx[r] = v.value();
            }
        }
    } else {
        if (polys.empty()) throw ConfigError("split-pattern spec without polynomials");
        for (const auto& f : polys) {
            if (degree(f) < 1) throw ConfigError("split-pattern polynomial must have degree >= 1");
            BigInt disc = discriminant(f);
            if (disc == 0) throw ConfigError("polynomial " + poly_string(f) + " is not separable");
            if (boost::multiprecision::abs(disc) >= (BigInt(1) << 126))
                throw ConfigError("discriminant too large to factor");
            i128 d = parse_i128(disc.str());
            for (const auto& pp : factor_integer(d).factors) S.insert(pp.p);
            long long lc = f[degree(f)];
            if (lc != 1 && lc != -1)
                for (const auto& pp : factor_integer(lc).factors) S.insert(pp.p);
        }
        if (!table.count("*")) {
            std::vector<std::string> keys{""};
            for (size_t i = 0; i < polys.size(); ++i) {
                std::vector<std::string> next;
                for (const auto& k : keys)
                    for (const auto& pk : pattern_keys(degree(polys[i]))) next.push_back(k.empty() && i == 0 ? pk : k + "|" + pk);
                keys = std::move(next);
            }
            for (const auto& k : keys)
                if (!table.count(k)) throw ConfigError("class function table has no entry for pattern " + k);
        }
        for (const auto& [k, v] : table) c->table_value[k] = v.value();
        if (distribution) {
            Rational total = 0;
            for (const auto& [k, w] : *distribution) {
                if (w < 0) throw ConfigError("negative pattern density");
                total += w;
            }
            if (total != 1) throw ConfigError("pattern distribution does not sum to 1");
        }
    }
    cache = c;
}

Scalar FrobenianSpec::exceptional_value(uint64_t p) const {
    auto it = exceptional.find(p);
    return it == exceptional.end() ? default_exceptional : it->second;
}

uint64_t FrobenianSpec::combo_modulus() const {
    uint64_t M = 1;
    for (const auto& t : terms) M = lcm_u64(M, t.chi.modulus());
    for (const auto& t : twists) M = lcm_u64(M, t.modulus());
    return M;
}

bool FrobenianSpec::real_valued() const {
    for (const auto& [p, v] : exceptional)
        if (!v.is_real() && std::abs(v.value().imag()) > 1e-12) return false;
    if (kind == Kind::CharacterCombo) {
        if (cache && cache->modulus) {
            for (const auto& v : cache->approx)
                if (std::abs(v.imag()) > 1e-12) return false;
            return true;
        }
        for (const auto& t : terms)
            if (!t.chi.is_real() || std::abs(t.coeff.value().imag()) > 1e-12) return false;
        return true;
    }
    for (const auto& [k, v] : table)
        if (std::abs(v.value().imag()) > 1e-12) return false;
    for (const auto& t : twists)
        if (!t.is_real()) return false;
    return true;
}

namespace {

std::string joint_key(const FrobenianSpec& spec, uint64_t p) {
    std::string key;
    for (size_t i = 0; i < spec.polys.size(); ++i) {
        if (i) key += '|';
        key += splitting_pattern(spec.polys[i], p).key();
    }
    return key;
}

}  // namespace

Scalar eval_prime(const FrobenianSpec& spec, uint64_t p) {
    if (spec.S.count(p)) return spec.exceptional_value(p);
    if (spec.kind == FrobenianSpec::Kind::CharacterCombo) {
        if (spec.cache && spec.cache->modulus) return spec.cache->exact[p % spec.cache->modulus];
        Scalar v = 0;
        for (const auto& t : spec.terms) v += t.coeff * t.chi.exact_value(p);
        for (const auto& tw : spec.twists) v *= tw.exact_value(p);
        return v;
    }
    std::string key = joint_key(spec, p);
    auto it = spec.table.find(key);
    if (it == spec.table.end()) it = spec.table.find("*");
    if (it == spec.table.end()) throw ConfigError("class function table has no entry for pattern " + key);
    Scalar v = it->second;
    for (const auto& tw : spec.twists) v *= tw.exact_value(p);
    return v;
}

std::complex<double> eval_prime_value(const FrobenianSpec& spec, uint64_t p) {
    if (spec.S.count(p)) return spec.exceptional_value(p).value();
    if (spec.kind == FrobenianSpec::Kind::CharacterCombo && spec.cache && spec.cache->modulus)
        return spec.cache->approx[p % spec.cache->modulus];
    if (spec.kind == FrobenianSpec::Kind::SplitPattern && spec.cache) {
        std::string key = joint_key(spec, p);
        auto it = spec.cache->table_value.find(key);
        if (it == spec.cache->table_value.end()) it = spec.cache->table_value.find("*");
        if (it == spec.cache->table_value.end()) throw ConfigError("class function table has no entry for pattern " + key);
        std::complex<double> v = it->second;
        for (const auto& tw : spec.twists) v *= tw.value(p);
        return v;
    }
    return eval_prime(spec, p).value();
}

std::vector<Scalar> prime_value_set(const FrobenianSpec& spec) {
    std::vector<Scalar> out;
    auto add = [&](const Scalar& v) {
        for (const auto& w : out)
            if (w == v) return;
        out.push_back(v);
    };
    for (uint64_t p : spec.S) add(spec.exceptional_value(p));
    if (spec.kind == FrobenianSpec::Kind::CharacterCombo) {
        if (!spec.cache || !spec.cache->modulus) throw DomainError("value set needs a cached residue table");
        const uint64_t M = spec.cache->modulus;
        for (uint64_t r = 0; r < M; ++r)
            if (std::gcd(r, M) == 1) add(spec.cache->exact[r]);
        return out;
    }
    std::vector<Scalar> twist_values{Scalar(1)};
    for (const auto& tw : spec.twists) {
        std::vector<Scalar> next;
        for (uint64_t r = 0; r < tw.modulus(); ++r) {
            if (tw.exponent(r) < 0) continue;
            for (const auto& z : twist_values) next.push_back(z * tw.exact_value(r));
        }
        twist_values = std::move(next);
    }
    for (const auto& [k, v] : spec.table)
        for (const auto& z : twist_values) add(v * z);
    return out;
}

MeanValue mean(const FrobenianSpec& spec, uint64_t X, uint64_t seed) {
    MeanValue m;
    if (spec.kind == FrobenianSpec::Kind::CharacterCombo) {
        Scalar v = 0;
        for (const auto& t : spec.terms) {
            DirichletCharacter c = t.chi;
            for (const auto& tw : spec.twists) c = c * tw;
            if (c.is_principal()) v += t.coeff;
        }
        m.value = v;
        m.exact = true;
        return m;
    }
    if (spec.distribution && spec.twists.empty()) {
        Scalar v = 0;
        for (const auto& [key, w] : *spec.distribution) {
            auto it = spec.table.find(key);
            if (it == spec.table.end()) it = spec.table.find("*");
            if (it == spec.table.end()) throw ConfigError("distribution key " + key + " missing from table");
            v += Scalar(w) * it->second;
        }
        m.value = v;
        m.exact = true;
        return m;
    }
    uint64_t Xs = X + (seed ? (seed % 1000) * (X / 10000 + 1) : 0);
    std::complex<double> sum = 0, comp = 0;
    uint64_t count = 0;
    for_each_prime_segment(Xs / 2 + 1, Xs, [&](const std::vector<uint64_t>& ps) {
        for (uint64_t p : ps) {
            if (spec.S.count(p)) continue;
            std::complex<double> y = eval_prime_value(spec, p) - comp;
            std::complex<double> t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            ++count;
        }
    });
    if (count == 0) throw DomainError("empty prime window for the empirical mean");
    m.value = Scalar::approx(sum / double(count));
    m.exact = false;
    m.sample_bound = double(Xs);
    m.error = 1.0 / std::sqrt(double(count));
    m.heuristic = true;
    return m;
}

double offset_li(double x) {
    auto li = [](double y) {
        const double gamma = 0.57721566490153286061;
        double L = std::log(y);
        double term = 1, sum = 0;
        for (int k = 1; k < 400; ++k) {
            term *= L / k;
            double add = term / k;
            sum += add;
            if (add < 1e-17 * sum) break;
        }
        return gamma + std::log(L) + sum;
    };
    return li(x) - li(2.0);
}

PrimeSumReport prime_sum_check(const FrobenianSpec& spec, uint64_t X, int variant) {
    if (variant < 1 || variant > 4) throw DomainError("prime_sum_check variant must be 1..4");
    if (X < 16) throw DomainError("prime_sum_check needs X >= 16");
    const std::complex<double> m = mean(spec, std::max<uint64_t>(X, 1000000)).value.value();
    if (std::abs(m) < 1e-12) throw DomainError("prime_sum_check needs a nonzero mean");
    PrimeSumReport r;
    r.variant = variant;
    r.X = double(X);
    const uint64_t checkpoints[4] = {X / 8, X / 4, X / 2, X};
    int next = 0;
    std::complex<double> s = 0;
    auto constant_at = [&](double x) -> std::complex<double> {
        double ll = std::log(std::log(x));
        if (variant == 2) return s - m * ll;
        if (variant == 4) return std::exp(s - m * ll);
        return 0.0;
    };
    const std::complex<double> zero = 0;
    for_each_prime_segment(2, X, [&](const std::vector<uint64_t>& ps) {
        for (uint64_t p : ps) {
            while (next < 4 && p > checkpoints[next]) r.constants.push_back(constant_at(double(checkpoints[next++])));
            std::complex<double> v = eval_prime_value(spec, p);
            double dp = double(p);
            switch (variant) {
                case 1: s += v; break;
                case 2: s += v / dp; break;
                case 3: s += v * std::log(dp); break;
                default:
                    if (v + dp != zero) s += std::log(1.0 + v / dp);
            }
        }
    });
    while (next < 4) r.constants.push_back(constant_at(double(checkpoints[next++])));
    const double x = double(X);
    switch (variant) {
        case 1:
            r.observed = s;
            r.predicted = m * offset_li(x);
            break;
        case 2:
            r.observed = s;
            r.predicted = m * std::log(std::log(x));
            break;
        case 3:
            r.observed = s;
            r.predicted = m * x;
            break;
        default:
            r.observed = std::exp(s);
            r.predicted = std::exp(m * std::log(std::log(x)));
    }
    r.deviation = std::abs(r.observed - r.predicted) / std::abs(r.predicted);
    if (!r.constants.empty()) r.constant_estimate = r.constants.back();
    if (variant == 1 || variant == 3) r.constants.clear();
    return r;
}

FrobenianSpec twist(const FrobenianSpec& spec, const DirichletCharacter& chi) {
    FrobenianSpec out = spec;
    for (uint64_t p : spec.S) out.exceptional[p] = spec.exceptional_value(p) * chi.exact_value(p);
    for (const auto& f : factor_integer(chi.modulus()).factors)
        if (!out.S.count(f.p)) {
            out.S.insert(f.p);
            out.exceptional[f.p] = 0;
        }
    if (!chi.is_principal() || chi.modulus() > 1) out.twists.push_back(chi);
    out.finalize();
    return out;
}

ExceptionalCharacters exceptional_characters(const FrobenianSpec& spec, uint64_t conductor_bound) {
    if (!spec.real_valued()) throw DomainError("exceptional_characters needs a real-valued spec");
    ExceptionalCharacters out;
    auto chars = primitive_characters(conductor_bound);
    if (spec.kind == FrobenianSpec::Kind::CharacterCombo && spec.cache && spec.cache->modulus) {
        const uint64_t M = spec.cache->modulus;
        for (const auto& v : spec.cache->approx)
            if (v.real() < -1e-12) throw DomainError("exceptional_characters needs a nonnegative spec");
        for (const auto& chi : chars) {
            uint64_t L = lcm_u64(M, chi.modulus());
            bool ok = true;
            for (uint64_t r = 1; r < L && ok; ++r) {
                if (std::gcd(r, L) != 1) continue;
                if (std::abs(spec.cache->approx[r % M]) < 1e-12) continue;
                if (chi.exponent(r) != 0) ok = false;
            }
            if (ok) out.characters.push_back(chi);
        }
        out.exact = true;
        out.complete = M <= conductor_bound;
        return out;
    }
    std::vector<uint64_t> primes;
    std::vector<std::complex<double>> vals;
    for (uint64_t limit = 200000; primes.size() < 10000; limit *= 2) {
        primes.clear();
        vals.clear();
        for (uint64_t p : sieve_primes(limit)) {
            if (spec.S.count(p)) continue;
            primes.push_back(p);
            if (primes.size() == 10000) break;
        }
    }
    for (uint64_t p : primes) {
        auto v = eval_prime_value(spec, p);
        if (v.real() < -1e-12) throw DomainError("exceptional_characters needs a nonnegative spec");
        vals.push_back(v);
    }
    for (const auto& chi : chars) {
        bool ok = true;
        for (size_t i = 0; i < primes.size() && ok; ++i) {
            if (chi.modulus() % primes[i] == 0) continue;
            if (std::abs(vals[i]) < 1e-12) continue;
            if (chi.exponent(primes[i]) != 0) ok = false;
        }
        if (ok) out.characters.push_back(chi);
    }
    return out;
}

}  // namespace fc
