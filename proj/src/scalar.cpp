#include "frobcount/scalar.hpp"
#include "frobcount/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace fc {

namespace {
Capacity g_capacity;
}

Capacity& capacity() { return g_capacity; }

void apply_capacity_overrides(const std::string& text) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("capacity override without '=': " + item);
        std::string key = item.substr(0, eq);
        unsigned long long v = 0;
        try {
            v = std::stoull(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("capacity override is not an integer: " + item);
        }
        Capacity& c = g_capacity;
        if (key == "spf_bound") c.spf_bound = v;
        else if (key == "sieve_limit") c.sieve_limit = v;
        else if (key == "table_bound") c.table_bound = v;
        else if (key == "value_bound") c.value_bound = v;
        else if (key == "enumeration_budget") c.enumeration_budget = v;
        else if (key == "stream_limit") c.stream_limit = v;
        else throw ConfigError("unknown capacity key: " + key);
    }
}

std::string to_string(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    u128 u = neg ? -(u128)v : (u128)v;
    std::string s;
    while (u) {
        s.push_back(char('0' + int(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    return std::string(s.rbegin(), s.rend());
}

i128 parse_i128(const std::string& s) {
    if (s.empty()) throw ConfigError("empty integer");
    size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) throw ConfigError("bad integer: " + s);
    u128 v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw ConfigError("bad integer: " + s);
        u128 nv = v * 10 + u128(s[i] - '0');
        if (nv / 10 != v) throw ConfigError("integer overflow: " + s);
        v = nv;
    }
    if (v >> 127) throw ConfigError("integer overflow: " + s);
    return neg ? -(i128)v : (i128)v;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string to_string(const Rational& r) {
    std::ostringstream os;
    os << numerator(r);
    if (denominator(r) != 1) os << '/' << denominator(r);
    return os.str();
}

Rational make_rational(BigInt n, BigInt d) {
    if (d < 0) {
        n = -n;
        d = -d;
    }
    return Rational(n, d);
}

Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(s));
        BigInt n(s.substr(0, slash)), d(s.substr(slash + 1));
        if (d == 0) throw ConfigError("zero denominator: " + s);
        return make_rational(n, d);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("bad rational: " + s);
    }
}

Scalar Scalar::approx(std::complex<double> z) {
    Scalar s;
    s.exact_ = false;
    s.z_ = z;
    return s;
}

std::complex<double> Scalar::value() const {
    if (!exact_) return z_;
    return {to_double(re_), to_double(im_)};
}

bool Scalar::is_zero() const { return exact_ ? (re_ == 0 && im_ == 0) : z_ == std::complex<double>(0, 0); }
bool Scalar::is_real() const { return exact_ ? im_ == 0 : z_.imag() == 0.0; }

bool Scalar::is_integer() const {
    if (!exact_) return false;
    return im_ == 0 && denominator(re_) == 1;
}

long long Scalar::to_int() const { return numerator(re_).convert_to<long long>(); }

Scalar Scalar::conj() const {
    if (!exact_) return approx(std::conj(z_));
    return Scalar(re_, -im_);
}

Scalar Scalar::operator-() const {
    if (!exact_) return approx(-z_);
    return Scalar(-re_, -im_);
}

Scalar& Scalar::operator+=(const Scalar& o) {
    if (exact_ && o.exact_) {
        re_ += o.re_;
        im_ += o.im_;
    } else {
        *this = approx(value() + o.value());
    }
    return *this;
}

Scalar& Scalar::operator*=(const Scalar& o) {
    if (exact_ && o.exact_) {
        Rational r = re_ * o.re_ - im_ * o.im_;
        Rational i = re_ * o.im_ + im_ * o.re_;
        re_ = std::move(r);
        im_ = std::move(i);
    } else {
        *this = approx(value() * o.value());
    }
    return *this;
}

bool Scalar::operator==(const Scalar& o) const {
    if (exact_ && o.exact_) return re_ == o.re_ && im_ == o.im_;
    return std::abs(value() - o.value()) <= 1e-12 * (1.0 + std::abs(value()));
}

std::string Scalar::str() const {
    std::ostringstream os;
    if (exact_) {
        os << to_string(re_);
        if (im_ != 0) os << (im_ > 0 ? "+" : "") << to_string(im_) << "i";
    } else {
        os.precision(17);
        os << z_.real();
        if (z_.imag() != 0) os << (z_.imag() > 0 ? "+" : "") << z_.imag() << "i";
    }
    return os.str();
}

}  // namespace fc
