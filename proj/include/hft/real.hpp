#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/float128.hpp>

#include <string>

namespace hft {

using real = boost::multiprecision::float128;

inline const real kPi = boost::math::constants::pi<real>();
inline const real kTwoPi = 2 * boost::math::constants::pi<real>();

inline double to_double(const real& x) { return static_cast<double>(x); }
std::string to_string(const real& x, int digits = 36);
real parse_real(const std::string& s);

struct cplx {
    real re = 0;
    real im = 0;

    cplx() = default;
    cplx(const real& r) : re(r) {}  // NOLINT
    cplx(double r) : re(r) {}       // NOLINT
    cplx(int r) : re(r) {}          // NOLINT
    cplx(const real& r, const real& i) : re(r), im(i) {}

    bool is_real() const { return im == 0; }

    cplx& operator+=(const cplx& o) { re += o.re; im += o.im; return *this; }
    cplx& operator-=(const cplx& o) { re -= o.re; im -= o.im; return *this; }
    cplx& operator*=(const cplx& o);
    cplx& operator/=(const cplx& o);
};

inline cplx operator-(const cplx& a) { return {-a.re, -a.im}; }
inline cplx operator+(cplx a, const cplx& b) { return a += b; }
inline cplx operator-(cplx a, const cplx& b) { return a -= b; }

inline cplx operator*(const cplx& a, const cplx& b) {
    if (a.im == 0 && b.im == 0) return {a.re * b.re, real(0)};
    if (b.im == 0) return {a.re * b.re, a.im * b.re};
    if (a.im == 0) return {a.re * b.re, a.re * b.im};
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline cplx operator/(const cplx& a, const cplx& b) {
    if (b.im == 0) return {a.re / b.re, a.im / b.re};
    // Smith's algorithm
    using boost::multiprecision::fabs;
    if (fabs(b.re) >= fabs(b.im)) {
        real t = b.im / b.re, d = b.re + b.im * t;
        return {(a.re + a.im * t) / d, (a.im - a.re * t) / d};
    }
    real t = b.re / b.im, d = b.re * t + b.im;
    return {(a.re * t + a.im) / d, (a.im * t - a.re) / d};
}

inline cplx& cplx::operator*=(const cplx& o) { return *this = *this * o; }
inline cplx& cplx::operator/=(const cplx& o) { return *this = *this / o; }

inline bool operator==(const cplx& a, const cplx& b) { return a.re == b.re && a.im == b.im; }

inline cplx conj(const cplx& a) { return {a.re, -a.im}; }
real abs(const cplx& a);
inline real norm2(const cplx& a) { return a.re * a.re + a.im * a.im; }

cplx exp(const cplx& a);
cplx log(const cplx& a);
cplx sqrt(const cplx& a);
cplx sin(const cplx& a);
cplx cos(const cplx& a);
cplx sinh(const cplx& a);
cplx cosh(const cplx& a);
cplx pow_int(const cplx& a, int n);
cplx pow(const cplx& a, const cplx& b);
// e^{i t} for real t
cplx expi(const real& t);

bool isfinite(const cplx& a);

}  // namespace hft
