#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

namespace fc {

using i128 = __int128;
using u128 = unsigned __int128;
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

std::string to_string(i128 v);
i128 parse_i128(const std::string& s);
// n / d for d != 0; the two-argument constructor rejects negative d.
Rational make_rational(BigInt n, BigInt d);
double to_double(const Rational& r);
std::string to_string(const Rational& r);
Rational parse_rational(const std::string& s);

// A complex number held exactly as a Gaussian rational when possible.
class Scalar {
public:
    Scalar() = default;
    Scalar(int v) : re_(v) {}
    Scalar(long v) : re_(v) {}
    Scalar(long long v) : re_(v) {}
    Scalar(Rational re, Rational im = 0) : re_(std::move(re)), im_(std::move(im)) {}

    static Scalar approx(std::complex<double> z);

    bool exact() const { return exact_; }
    const Rational& re() const { return re_; }
    const Rational& im() const { return im_; }
    std::complex<double> value() const;

    bool is_zero() const;
    bool is_real() const;
    bool is_integer() const;
    // Valid when is_integer().
    long long to_int() const;

    Scalar conj() const;
    Scalar operator-() const;
    Scalar& operator+=(const Scalar& o);
    Scalar& operator*=(const Scalar& o);
    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a += -b; }
    friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }

    // Exact equality when both sides are exact, otherwise within 1e-12.
    bool operator==(const Scalar& o) const;
    bool operator!=(const Scalar& o) const { return !(*this == o); }

    std::string str() const;

private:
    bool exact_ = true;
    Rational re_ = 0;
    Rational im_ = 0;
    std::complex<double> z_{0.0, 0.0};
};

// Neumaier-compensated running sum.
struct CompensatedSum {
    std::complex<double> sum{0.0, 0.0};
    std::complex<double> comp{0.0, 0.0};

    void add(std::complex<double> v) {
        sum_part(sum.real(), comp, v.real(), true);
        sum_part(sum.imag(), comp, v.imag(), false);
    }
    std::complex<double> value() const { return sum + comp; }

private:
    void sum_part(double s, std::complex<double>& c, double v, bool re) {
        double t = s + v;
        double e = std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        if (re) {
            sum.real(t);
            c.real(c.real() + e);
        } else {
            sum.imag(t);
            c.imag(c.imag() + e);
        }
    }
};

}  // namespace fc
