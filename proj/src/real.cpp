#include "hft/real.hpp"

#include <quadmath.h>

#include <stdexcept>

namespace hft {

using boost::multiprecision::fabs;

std::string to_string(const real& x, int digits) {
    char buf[128];
    quadmath_snprintf(buf, sizeof buf, "%.*Qg", digits, x.backend().value());
    return buf;
}

real parse_real(const std::string& s) {
    char* end = nullptr;
    __float128 v = strtoflt128(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw std::invalid_argument("not a number: " + s);
    return real(v);
}

real abs(const cplx& a) {
    if (a.im == 0) return fabs(a.re);
    if (a.re == 0) return fabs(a.im);
    return hypot(a.re, a.im);
}

cplx expi(const real& t) {
    __float128 s, c;
    sincosq(t.backend().value(), &s, &c);
    return {real(c), real(s)};
}

cplx exp(const cplx& a) {
    real m = boost::multiprecision::exp(a.re);
    if (a.im == 0) return {m, real(0)};
    cplx e = expi(a.im);
    return {m * e.re, m * e.im};
}

cplx log(const cplx& a) {
    if (a.im == 0 && a.re > 0) return {boost::multiprecision::log(a.re), real(0)};
    return {boost::multiprecision::log(abs(a)), atan2(a.im, a.re)};
}

cplx sqrt(const cplx& a) {
    if (a.im == 0 && a.re >= 0) return {boost::multiprecision::sqrt(a.re), real(0)};
    real r = abs(a);
    real u = boost::multiprecision::sqrt((r + fabs(a.re)) / 2);
    if (a.re >= 0) return {u, a.im / (2 * u)};
    real v = a.im >= 0 ? u : -u;
    return {fabs(a.im) / (2 * u), v};
}

cplx sin(const cplx& a) {
    if (a.im == 0) return {boost::multiprecision::sin(a.re), real(0)};
    cplx e = expi(a.re);
    return {e.im * boost::multiprecision::cosh(a.im), e.re * boost::multiprecision::sinh(a.im)};
}

cplx cos(const cplx& a) {
    if (a.im == 0) return {boost::multiprecision::cos(a.re), real(0)};
    cplx e = expi(a.re);
    return {e.re * boost::multiprecision::cosh(a.im), -e.im * boost::multiprecision::sinh(a.im)};
}

cplx sinh(const cplx& a) {
    if (a.im == 0) return {boost::multiprecision::sinh(a.re), real(0)};
    cplx e = expi(a.im);
    return {boost::multiprecision::sinh(a.re) * e.re, boost::multiprecision::cosh(a.re) * e.im};
}

cplx cosh(const cplx& a) {
    if (a.im == 0) return {boost::multiprecision::cosh(a.re), real(0)};
    cplx e = expi(a.im);
    return {boost::multiprecision::cosh(a.re) * e.re, boost::multiprecision::sinh(a.re) * e.im};
}

cplx pow_int(const cplx& a, int n) {
    if (n < 0) return cplx(1) / pow_int(a, -n);
    cplx r(1), b = a;
    while (n) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

cplx pow(const cplx& a, const cplx& b) {
    if (a.im == 0 && b.im == 0 && a.re > 0) return {boost::multiprecision::pow(a.re, b.re), real(0)};
    if (a.re == 0 && a.im == 0) return cplx(0);
    return exp(b * log(a));
}

bool isfinite(const cplx& a) {
    return boost::multiprecision::isfinite(a.re) && boost::multiprecision::isfinite(a.im);
}

}  // namespace hft
