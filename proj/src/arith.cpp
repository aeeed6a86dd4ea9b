#include "frobcount/arith.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

namespace fc {

int FactoredInteger::valuation(uint64_t p) const {
    for (const auto& f : factors)
        if (f.p == p) return f.e;
    return 0;
}

bool FactoredInteger::check() const {
    if (value == 0) return sign == 0 && factors.empty();
    if (sign != (value > 0 ? 1 : -1)) return false;
    u128 prod = 1;
    uint64_t last = 0;
    for (const auto& f : factors) {
        if (f.e < 1 || f.p <= last || !is_prime_u64(f.p)) return false;
        last = f.p;
        for (int i = 0; i < f.e; ++i) prod *= f.p;
    }
    u128 mag = value < 0 ? -(u128)value : (u128)value;
    return prod == mag;
}

FactoredInteger from_factors(int sign, std::vector<PrimePower> factors) {
    std::sort(factors.begin(), factors.end(),
              [](const PrimePower& a, const PrimePower& b) { return a.p < b.p; });
    FactoredInteger out;
    out.sign = sign;
    if (sign == 0) return out;
    u128 v = 1;
    for (const auto& f : factors) {
        if (f.e == 0) continue;
        if (!out.factors.empty() && out.factors.back().p == f.p)
            out.factors.back().e += f.e;
        else
            out.factors.push_back(f);
        for (int i = 0; i < f.e; ++i) {
            u128 nv = v * f.p;
            if (nv / f.p != v || (nv >> 127)) throw RangeError("factored value exceeds 2^127");
            v = nv;
        }
    }
    out.value = sign < 0 ? -(i128)v : (i128)v;
    return out;
}

FactoredInteger multiply(const FactoredInteger& a, const FactoredInteger& b) {
    if (a.sign == 0 || b.sign == 0) return {};
    std::vector<PrimePower> f = a.factors;
    f.insert(f.end(), b.factors.begin(), b.factors.end());
    return from_factors(a.sign * b.sign, std::move(f));
}

namespace {

std::vector<uint32_t> small_primes(uint64_t limit) {
    std::vector<char> comp(limit + 1, 0);
    std::vector<uint32_t> out;
    for (uint64_t i = 2; i <= limit; ++i) {
        if (comp[i]) continue;
        out.push_back(uint32_t(i));
        for (uint64_t j = i * i; j <= limit; j += i) comp[j] = 1;
    }
    return out;
}

}  // namespace

void for_each_prime_segment(uint64_t lo, uint64_t hi,
                            const std::function<void(const std::vector<uint64_t>&)>& fn) {
    if (hi < 2 || lo > hi) return;
    lo = std::max<uint64_t>(lo, 2);
    const uint64_t root = isqrt(hi);
    const auto base = small_primes(root);
    const uint64_t seg = 1 << 18;
    std::vector<char> mark(seg);
    std::vector<uint64_t> found;
    for (uint64_t start = lo; start <= hi; start += seg) {
        uint64_t end = std::min(hi, start + seg - 1);
        std::fill(mark.begin(), mark.begin() + (end - start + 1), 0);
        for (uint32_t p : base) {
            uint64_t pp = uint64_t(p) * p;
            if (pp > end) break;
            uint64_t first = std::max(pp, (start + p - 1) / p * p);
            for (uint64_t j = first; j <= end; j += p) mark[j - start] = 1;
        }
        found.clear();
        for (uint64_t n = start; n <= end; ++n)
            if (!mark[n - start]) found.push_back(n);
        if (!found.empty()) fn(found);
        if (end == hi) break;
    }
}

std::vector<uint64_t> sieve_primes(uint64_t limit) {
    if (limit < 2) throw DomainError("sieve_primes needs limit >= 2");
    if (limit > capacity().sieve_limit)
        throw CapacityError("sieve limit " + std::to_string(limit) + " exceeds the memory budget");
    std::vector<uint64_t> out;
    for_each_prime_segment(2, limit, [&](const std::vector<uint64_t>& ps) {
        out.insert(out.end(), ps.begin(), ps.end());
    });
    return out;
}

SpfTable::SpfTable(uint64_t bound) : bound_(std::max<uint64_t>(bound, 2)) {
    if (bound_ > capacity().spf_bound || bound_ >= (1ull << 32))
        throw CapacityError("spf table bound " + std::to_string(bound_) + " exceeds capacity");
    spf_.assign(bound_ + 1, 0);
    spf_[1] = 1;
    for (uint64_t i = 2; i <= bound_; ++i) {
        if (spf_[i] == 0) {
            spf_[i] = uint32_t(i);
            primes_.push_back(uint32_t(i));
        }
        for (uint32_t p : primes_) {
            uint64_t ip = i * p;
            if (p > spf_[i] || ip > bound_) break;
            spf_[ip] = p;
        }
    }
}

std::shared_ptr<const SpfTable> shared_spf(uint64_t bound) {
    static std::mutex mu;
    static std::shared_ptr<const SpfTable> table;
    std::lock_guard<std::mutex> lock(mu);
    bound = std::max<uint64_t>(bound, 1 << 16);
    if (!table || table->bound() < bound) table = std::make_shared<const SpfTable>(bound);
    return table;
}

uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) { return uint64_t((u128)a * b % m); }

uint64_t powmod(uint64_t a, uint64_t e, uint64_t m) {
    uint64_t r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

uint64_t invmod(uint64_t a, uint64_t m) {
    i128 t = 0, nt = 1, r = m, nr = a % m;
    while (nr) {
        i128 q = r / nr;
        std::swap(t, nt);
        nt -= q * t;
        std::swap(r, nr);
        nr -= q * r;
    }
    if (r != 1) throw DomainError("not invertible");
    if (t < 0) t += m;
    return uint64_t(t);
}

uint64_t mod_of(i128 a, uint64_t m) {
    i128 r = a % (i128)m;
    if (r < 0) r += m;
    return uint64_t(r);
}

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

uint64_t isqrt(u128 n) {
    if (n == 0) return 0;
    uint64_t r = uint64_t(std::sqrt((long double)n));
    while ((u128)r * r > n) --r;
    while ((u128)(r + 1) * (r + 1) <= n) ++r;
    return r;
}

bool is_square(i128 n) {
    if (n < 0) return false;
    uint64_t r = isqrt((u128)n);
    return (i128)r * r == n;
}

bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % p == 0) return n == p;
    }
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool comp = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                comp = false;
                break;
            }
        }
        if (comp) return false;
    }
    return true;
}

namespace {

uint64_t rho(uint64_t n) {
    if (n % 2 == 0) return 2;
    for (uint64_t c = 1;; ++c) {
        uint64_t x = 2, y = 2, d = 1, q = 1, ys = 0;
        auto f = [&](uint64_t v) { return (mulmod(v, v, n) + c) % n; };
        uint64_t r = 1;
        do {
            x = y;
            for (uint64_t i = 0; i < r; ++i) y = f(y);
            uint64_t k = 0;
            do {
                ys = y;
                for (uint64_t i = 0; i < std::min<uint64_t>(128, r - k); ++i) {
                    y = f(y);
                    q = mulmod(q, x > y ? x - y : y - x, n);
                }
                d = std::gcd(q, n);
                k += 128;
            } while (k < r && d == 1);
            r <<= 1;
        } while (d == 1);
        if (d == n) {
            do {
                ys = f(ys);
                d = std::gcd(x > ys ? x - ys : ys - x, n);
            } while (d == 1);
        }
        if (d != n) return d;
    }
}

void factor_u64(uint64_t n, std::vector<PrimePower>& out) {
    if (n == 1) return;
    if (is_prime_u64(n)) {
        out.push_back({n, 1});
        return;
    }
    uint64_t d = rho(n);
    factor_u64(d, out);
    factor_u64(n / d, out);
}

FactoredInteger factor_with(i128 n, const SpfTable& t, bool full_trial) {
    if (n == 0) return {};
    int sign = n < 0 ? -1 : 1;
    u128 m = n < 0 ? -(u128)n : (u128)n;
    std::vector<PrimePower> f;
    if (m <= t.bound()) {
        uint64_t v = uint64_t(m);
        while (v > 1) {
            uint32_t p = t.smallest(v);
            int e = 0;
            while (v % p == 0) {
                v /= p;
                ++e;
            }
            f.push_back({p, e});
        }
        return from_factors(sign, std::move(f));
    }
    bool exhausted = true;
    for (uint32_t p : t.primes()) {
        if ((u128)p * p > m) {
            exhausted = false;
            break;
        }
        if (m % p == 0) {
            int e = 0;
            while (m % p == 0) {
                m /= p;
                ++e;
            }
            f.push_back({p, e});
            if (m <= t.bound()) {
                uint64_t v = uint64_t(m);
                while (v > 1) {
                    uint32_t q = t.smallest(v);
                    int k = 0;
                    while (v % q == 0) {
                        v /= q;
                        ++k;
                    }
                    f.push_back({q, k});
                }
                m = 1;
                exhausted = false;
                break;
            }
        }
    }
    (void)full_trial;
    if (m > 1) {
        u128 b = t.bound();
        if (!exhausted || m <= b * b) {
            if (m >> 64) throw RangeError("cofactor exceeds 64 bits");
            f.push_back({uint64_t(m), 1});
        } else if ((m >> 64) == 0) {
            factor_u64(uint64_t(m), f);
        } else {
            throw RangeError("value " + to_string(n) + " exceeds the factorization range");
        }
    }
    return from_factors(sign, std::move(f));
}

}  // namespace

FactoredInteger spf_factor(i128 n, const SpfTable& table) { return factor_with(n, table, true); }

FactoredInteger factor_integer(i128 n) {
    static const SpfTable small(1 << 20);
    return factor_with(n, small, false);
}

i128 squarefree_part(i128 n) {
    if (n == 0) throw DomainError("squarefree part of 0");
    auto f = factor_integer(n);
    i128 r = f.sign;
    for (const auto& pp : f.factors)
        if (pp.e % 2) r *= pp.p;
    return r;
}

int jacobi_symbol(i128 a, i128 n) {
    if (n <= 0 || n % 2 == 0) throw DomainError("jacobi_symbol needs odd positive n");
    u128 m = (u128)n;
    i128 r = a % n;
    if (r < 0) r += n;
    u128 x = (u128)r;
    int s = 1;
    while (x) {
        while ((x & 1) == 0) {
            x >>= 1;
            unsigned mm = unsigned(m & 7);
            if (mm == 3 || mm == 5) s = -s;
        }
        std::swap(x, m);
        if ((x & 3) == 3 && (m & 3) == 3) s = -s;
        x %= m;
    }
    return m == 1 ? s : 0;
}

int kronecker_symbol(i128 a, i128 n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    int s = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) s = -s;
    }
    while (n % 2 == 0) {
        n /= 2;
        if (a % 2 == 0) return 0;
        unsigned r = unsigned(mod_of(a, 8));
        if (r == 3 || r == 5) s = -s;
    }
    if (n == 1) return s;
    return s * jacobi_symbol(a, n);
}

int legendre_symbol(i128 a, uint64_t p) {
    if (p == 2) throw DomainError("legendre symbol at p = 2");
    return jacobi_symbol(a, (i128)p);
}

unsigned padic_valuation(i128 n, uint64_t p) {
    if (n == 0) throw DomainError("valuation of 0");
    unsigned v = 0;
    while (n % (i128)p == 0) {
        n /= (i128)p;
        ++v;
    }
    return v;
}

uint64_t sqrt_mod_prime(uint64_t a, uint64_t p) {
    a %= p;
    if (p == 2 || a == 0) return a;
    if (powmod(a, (p - 1) / 2, p) != 1) throw DomainError("not a quadratic residue");
    if (p % 4 == 3) return powmod(a, (p + 1) / 4, p);
    uint64_t q = p - 1;
    int s = 0;
    while (q % 2 == 0) {
        q /= 2;
        ++s;
    }
    uint64_t z = 2;
    while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
    uint64_t m = s, c = powmod(z, q, p), t = powmod(a, q, p), r = powmod(a, (q + 1) / 2, p);
    while (t != 1) {
        uint64_t i = 0, tt = t;
        while (tt != 1) {
            tt = mulmod(tt, tt, p);
            ++i;
        }
        uint64_t b = c;
        for (uint64_t j = 0; j + i + 1 < m; ++j) b = mulmod(b, b, p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    return r;
}

QRational make_qrational(i128 num, i128 den) {
    if (den == 0) throw DomainError("zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    return {factor_integer(num), factor_integer(den)};
}

namespace {

// (-1)^(alpha beta eps(p)) (u/p)^beta (w/p)^alpha, or the eps/omega form at 2.
int hilbert_core(uint64_t p, int alpha, uint64_t u, int beta, uint64_t w) {
    if (p == 2) {
        auto eps = [](uint64_t x) { return int(((x - 1) / 2) & 1); };
        auto omega = [](uint64_t x) { return int(((x * x - 1) / 8) & 1); };
        int e = eps(u) * eps(w) + alpha * omega(w) + beta * omega(u);
        return (e & 1) ? -1 : 1;
    }
    int s = 1;
    if ((alpha & 1) && (beta & 1) && (p % 4 == 3)) s = -s;
    if (beta & 1) s *= legendre_symbol((i128)u, p);
    if (alpha & 1) s *= legendre_symbol((i128)w, p);
    return s;
}

}  // namespace

int hilbert_symbol(i128 a, i128 b, Place v) {
    if (a == 0 || b == 0) throw DomainError("hilbert_symbol of zero");
    if (v.is_real()) return (a < 0 && b < 0) ? -1 : 1;
    const uint64_t p = v.p;
    const uint64_t m = p == 2 ? 8 : p;
    int alpha = 0, beta = 0;
    while (a % (i128)p == 0) {
        a /= (i128)p;
        ++alpha;
    }
    while (b % (i128)p == 0) {
        b /= (i128)p;
        ++beta;
    }
    return hilbert_core(p, alpha, mod_of(a, m), beta, mod_of(b, m));
}

int hilbert_symbol(const QRational& a, const QRational& b, Place v) {
    if (a.num.sign == 0 || b.num.sign == 0) throw DomainError("hilbert_symbol of zero");
    const int sa = a.num.sign * a.den.sign, sb = b.num.sign * b.den.sign;
    if (v.is_real()) return (sa < 0 && sb < 0) ? -1 : 1;
    const uint64_t p = v.p;
    const uint64_t m = p == 2 ? 8 : p;
    auto unit = [&](const QRational& q, int sign, int& val) {
        uint64_t r = sign < 0 ? m - 1 : 1;
        val = 0;
        for (const FactoredInteger* f : {&q.num, &q.den}) {
            for (const auto& pp : f->factors) {
                if (pp.p == p) {
                    val += pp.e;
                    continue;
                }
                r = mulmod(r, powmod(pp.p % m, pp.e, m), m);
            }
        }
        return r;
    };
    int alpha = 0, beta = 0;
    uint64_t u = unit(a, sa, alpha), w = unit(b, sb, beta);
    return hilbert_core(p, alpha, u, beta, w);
}

int degree(const IntPoly& f) {
    int d = int(f.size()) - 1;
    while (d >= 0 && f[d] == 0) --d;
    return d;
}

IntPoly derivative(const IntPoly& f) {
    IntPoly d;
    for (size_t i = 1; i < f.size(); ++i) d.push_back(f[i] * (long long)i);
    if (d.empty()) d.push_back(0);
    return d;
}

i128 eval_poly(const IntPoly& f, i128 x) {
    i128 r = 0;
    for (size_t i = f.size(); i-- > 0;) r = r * x + f[i];
    return r;
}

std::string poly_string(const IntPoly& f) {
    std::ostringstream os;
    bool first = true;
    for (int i = degree(f); i >= 0; --i) {
        if (f[i] == 0) continue;
        long long c = f[i];
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        long long a = c < 0 ? -c : c;
        if (a != 1 || i == 0) os << a;
        if (i >= 1) os << "x";
        if (i >= 2) os << "^" << i;
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

namespace {

BigInt bareiss_det(std::vector<std::vector<BigInt>> a) {
    const size_t n = a.size();
    if (n == 0) return 1;
    int sign = 1;
    BigInt prev = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            size_t r = k + 1;
            while (r < n && a[r][k] == 0) ++r;
            if (r == n) return 0;
            std::swap(a[k], a[r]);
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

}  // namespace

BigInt resultant(const IntPoly& f, const IntPoly& g) {
    int m = degree(f), n = degree(g);
    if (m < 0 || n < 0) return 0;
    if (m == 0) return boost::multiprecision::pow(BigInt(f[0]), n);
    if (n == 0) return boost::multiprecision::pow(BigInt(g[0]), m);
    const int N = m + n;
    std::vector<std::vector<BigInt>> s(N, std::vector<BigInt>(N, 0));
    for (int r = 0; r < n; ++r)
        for (int i = 0; i <= m; ++i) s[r][r + i] = f[m - i];
    for (int r = 0; r < m; ++r)
        for (int i = 0; i <= n; ++i) s[n + r][r + i] = g[n - i];
    return bareiss_det(std::move(s));
}

BigInt discriminant(const IntPoly& f) {
    int n = degree(f);
    if (n < 1) throw DomainError("discriminant of a constant");
    BigInt r = resultant(f, derivative(f)) / BigInt(f[n]);
    if ((n * (n - 1) / 2) % 2) r = -r;
    return r;
}

namespace {

using ModPoly = std::vector<uint64_t>;

void trim(ModPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

ModPoly poly_mod(ModPoly a, const ModPoly& b, uint64_t p) {
    trim(a);
    const size_t db = b.size() - 1;
    const uint64_t inv = invmod(b.back(), p);
    while (a.size() > db) {
        uint64_t c = mulmod(a.back(), inv, p);
        size_t shift = a.size() - 1 - db;
        for (size_t i = 0; i <= db; ++i) a[shift + i] = (a[shift + i] + p - mulmod(c, b[i], p)) % p;
        trim(a);
    }
    return a;
}

ModPoly poly_divide(ModPoly a, const ModPoly& b, uint64_t p) {
    trim(a);
    const size_t db = b.size() - 1;
    const uint64_t inv = invmod(b.back(), p);
    if (a.size() <= db) return {};
    ModPoly q(a.size() - db, 0);
    while (a.size() > db) {
        uint64_t c = mulmod(a.back(), inv, p);
        size_t shift = a.size() - 1 - db;
        q[shift] = c;
        for (size_t i = 0; i <= db; ++i) a[shift + i] = (a[shift + i] + p - mulmod(c, b[i], p)) % p;
        a.pop_back();
        trim(a);
    }
    return q;
}

ModPoly poly_mulmod(const ModPoly& a, const ModPoly& b, const ModPoly& m, uint64_t p) {
    if (a.empty() || b.empty()) return {};
    ModPoly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + mulmod(a[i], b[j], p)) % p;
    return poly_mod(r, m, p);
}

ModPoly poly_gcd(ModPoly a, ModPoly b, uint64_t p) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        ModPoly r = poly_mod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        uint64_t inv = invmod(a.back(), p);
        for (auto& c : a) c = mulmod(c, inv, p);
    }
    return a;
}

}  // namespace

std::string SplittingPattern::key() const {
    if (ramified) return "R";
    std::string s;
    for (size_t i = 0; i < degrees.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(degrees[i]);
    }
    return s;
}

SplittingPattern SplittingPattern::parse(const std::string& key) {
    SplittingPattern sp;
    if (key == "R") {
        sp.ramified = true;
        return sp;
    }
    std::stringstream ss(key);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            sp.degrees.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ConfigError("bad splitting pattern key: " + key);
        }
    }
    std::sort(sp.degrees.begin(), sp.degrees.end());
    return sp;
}

SplittingPattern splitting_pattern(const IntPoly& f, uint64_t p) {
    const int n = degree(f);
    if (n < 1) throw DomainError("splitting_pattern needs deg f >= 1");
    SplittingPattern sp;
    ModPoly g(n + 1);
    for (int i = 0; i <= n; ++i) g[i] = mod_of(f[i], p);
    if (g[n] == 0) {
        sp.ramified = true;
        return sp;
    }
    uint64_t inv = invmod(g[n], p);
    for (auto& c : g) c = mulmod(c, inv, p);
    ModPoly dg;
    for (int i = 1; i <= n; ++i) dg.push_back(mulmod(g[i], uint64_t(i) % p, p));
    trim(dg);
    if (dg.empty() || poly_gcd(g, dg, p).size() > 1) {
        sp.ramified = true;
        return sp;
    }
    ModPoly rest = g;
    ModPoly w{0, 1};

    for (int d = 1;; ++d) {
        int dr = int(rest.size()) - 1;
        if (dr < 2 * d) {
            if (dr > 0) sp.degrees.push_back(dr);
            break;
        }
        // w = x^(p^d) mod rest
        ModPoly acc{1};
        ModPoly base = poly_mod(w, rest, p);
        uint64_t e = p;
        while (e) {
            if (e & 1) acc = poly_mulmod(acc, base, rest, p);
            base = poly_mulmod(base, base, rest, p);
            e >>= 1;
        }
        w = acc;
        ModPoly diff = w;
        if (diff.size() < 2) diff.resize(2, 0);
        diff[1] = (diff[1] + p - 1) % p;
        trim(diff);
        ModPoly h = diff.empty() ? rest : poly_gcd(rest, diff, p);
        int dh = int(h.size()) - 1;
        if (dh > 0) {
            for (int k = 0; k < dh / d; ++k) sp.degrees.push_back(d);
            rest = poly_divide(rest, h, p);
            w = poly_mod(w, rest, p);
        }
    }
    std::sort(sp.degrees.begin(), sp.degrees.end());
    return sp;
}

std::vector<std::string> pattern_keys(int n) {
    std::vector<std::string> out;
    std::vector<int> cur;
    std::function<void(int, int)> rec = [&](int left, int minpart) {
        if (left == 0) {
            SplittingPattern sp;
            sp.degrees = cur;
            out.push_back(sp.key());
            return;
        }
        for (int k = minpart; k <= left; ++k) {
            cur.push_back(k);
            rec(left - k, k);
            cur.pop_back();
        }
    };
    rec(n, 1);
    return out;
}

bool certify_irreducible(const IntPoly& f) {
    const int n = degree(f);
    if (n < 1) return false;
    if (n == 1) return true;
    BigInt content = 0;
    for (int i = 0; i <= n; ++i) content = gcd(content, BigInt(f[i] < 0 ? -f[i] : f[i]));
    if (content != 1) return false;
    if (n <= 3) {
        if (f[0] == 0) return false;
        // rational roots r/s with r | f0, s | fn
        auto divisors = [](long long v) {
            std::vector<long long> d;
            auto fi = factor_integer(v < 0 ? -v : v);
            d.push_back(1);
            for (const auto& pp : fi.factors) {
                size_t sz = d.size();
                long long pw = 1;
                for (int e = 1; e <= pp.e; ++e) {
                    pw *= (long long)pp.p;
                    for (size_t i = 0; i < sz; ++i) d.push_back(d[i] * pw);
                }
            }
            return d;
        };
        for (long long r : divisors(f[0]))
            for (long long s : divisors(f[n]))
                for (long long sg : {1LL, -1LL}) {
                    // s^n f(r/s) = sum f_i r^i s^(n-i)
                    i128 acc = 0, rp = 1;
                    for (int i = 0; i <= n; ++i) {
                        i128 sp = 1;
                        for (int k = 0; k < n - i; ++k) sp *= s;
                        acc += (i128)f[i] * rp * sp;
                        rp *= sg * r;
                    }
                    if (acc == 0) return false;
                }
        return true;
    }
    std::set<int> possible;
    for (int k = 1; k < n; ++k) possible.insert(k);
    BigInt disc = discriminant(f);
    for (uint64_t p : sieve_primes(5000)) {
        if (disc % p == 0 || f[n] % (long long)p == 0) continue;
        auto sp = splitting_pattern(f, p);
        std::set<int> sums{0};
        for (int d : sp.degrees) {
            std::set<int> next = sums;
            for (int s : sums) next.insert(s + d);
            sums = std::move(next);
        }
        for (auto it = possible.begin(); it != possible.end();)
            it = sums.count(*it) ? std::next(it) : possible.erase(it);
        if (possible.empty()) return true;
    }
    return false;
}

QuadraticPrimeSplit quadratic_prime_split(i128 d, uint64_t p) {
    QuadraticPrimeSplit s;
    s.d = d;
    s.p = p;
    if (p == 2 || d % (i128)p == 0) {
        s.kind = QuadraticPrimeSplit::Kind::Ramified;
        return s;
    }
    int l = legendre_symbol(d, p);
    if (l == 1) {
        s.kind = QuadraticPrimeSplit::Kind::Split;
        uint64_t r = sqrt_mod_prime(mod_of(d, p), p);
        s.root = std::min(r, p - r);
    } else {
        s.kind = QuadraticPrimeSplit::Kind::Inert;
    }
    return s;
}

QuadraticPrimeSplit conjugate_split(const QuadraticPrimeSplit& s) {
    if (s.kind != QuadraticPrimeSplit::Kind::Split) throw DomainError("conjugate of a non-split prime");
    QuadraticPrimeSplit c = s;
    c.root = (s.p - s.root) % s.p;
    return c;
}

int residue_symbol_deg1(const QuadElem& beta, const QuadraticPrimeSplit& split) {
    if (split.kind != QuadraticPrimeSplit::Kind::Split)
        throw DomainError("residue_symbol_deg1 needs a split prime");
    const uint64_t p = split.p;
    uint64_t v = (mod_of(beta.a, p) + mulmod(mod_of(beta.b, p), split.root, p)) % p;
    return legendre_symbol((i128)v, p);
}

}  // namespace fc
