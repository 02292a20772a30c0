#include "hft/gauge_ring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace hft {

namespace {

constexpr double kFloor = 1e-300;   // samples below this count as order +inf
constexpr double kSlopeTol = 0.05;  // |slope| below this reads as bounded
constexpr double kFitTol = 0.5;     // max log-residual of a regular power law

struct Fit {
    double slope = 0, intercept = 0, resid = 0;
    int n = 0;
};

Fit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    Fit f;
    f.n = static_cast<int>(x.size());
    if (f.n == 0) return f;
    double mx = 0, my = 0;
    for (int i = 0; i < f.n; ++i) mx += x[i], my += y[i];
    mx /= f.n;
    my /= f.n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < f.n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    f.slope = sxx > 0 ? sxy / sxx : 0;
    f.intercept = my - f.slope * mx;
    for (int i = 0; i < f.n; ++i)
        f.resid = std::max(f.resid, std::abs(y[i] - (f.intercept + f.slope * x[i])));
    return f;
}

// (log rho, log|x|) over tail samples above the floor
void tail_logs(const GenNumber& x, std::vector<double>& lr, std::vector<double>& lx) {
    const auto& g = *x.grid();
    for (std::size_t i = g.tail_begin(); i < g.size(); ++i) {
        real a = boost::multiprecision::fabs(x[i]);
        if (a < kFloor) continue;
        lr.push_back(to_double(boost::multiprecision::log(g.rho[i])));
        lx.push_back(to_double(boost::multiprecision::log(a)));
    }
}

template <class F>
GenNumber pointwise(const GenNumber& x, const GenNumber& y, F f) {
    check_same_grid(x.grid(), y.grid());
    std::vector<real> s(x.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = f(x[i], y[i]);
    return GenNumber(x.grid(), std::move(s));
}

}  // namespace

GaugeKind parse_gauge(const std::string& s) {
    if (s == "identity") return GaugeKind::identity;
    if (s == "log") return GaugeKind::log;
    throw ConfigError("unknown gauge: " + s);
}

std::string gauge_name(GaugeKind g) { return g == GaugeKind::identity ? "identity" : "log"; }

std::string EpsGrid::canonical() const {
    std::ostringstream os;
    os << "grid:" << gauge_name(gauge) << ":q" << q_check << ":n" << n_max;
    for (std::size_t i = 0; i < size(); ++i) os << ":" << to_string(eps[i]) << "/" << to_string(rho[i]);
    return os.str();
}

Grid make_grid(int depth, double base, GaugeKind gauge, int q_check, int n_max) {
    if (depth < 8) throw ConfigError("grid depth must be >= 8 (tail regression needs >= 4 tail points)");
    if (!(base > 0 && base < 1)) throw ConfigError("grid base must lie in (0,1)");
    std::vector<real> eps(depth), rho(depth);
    // shortest decimal form, so base 0.1 gives exact powers of ten in quad precision
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, base);
    real b = parse_real(std::string(buf, res.ptr));
    for (int i = 0; i < depth; ++i) {
        eps[i] = boost::multiprecision::pow(b, i + 1);
        rho[i] = gauge == GaugeKind::identity ? eps[i] : 1 / (1 - boost::multiprecision::log(eps[i]));
    }
    auto g = std::make_shared<EpsGrid>();
    g->eps = std::move(eps);
    g->rho = std::move(rho);
    g->gauge = gauge;
    g->q_check = q_check;
    g->n_max = n_max;
    return g;
}

Grid make_grid(std::vector<real> eps, std::vector<real> rho, int q_check, int n_max) {
    if (eps.size() != rho.size()) throw ConfigError("eps and gauge arrays differ in length");
    if (eps.size() < 8) throw ConfigError("grid depth must be >= 8");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0 && eps[i] <= 1)) throw ConfigError("eps values must lie in (0,1]");
        if (!(rho[i] > 0 && rho[i] <= 1)) throw ConfigError("gauge values must lie in (0,1]");
        if (i && !(eps[i] < eps[i - 1])) throw ConfigError("eps values must be strictly decreasing");
        if (i && !(rho[i] < rho[i - 1])) throw ConfigError("gauge values must be strictly decreasing");
    }
    auto g = std::make_shared<EpsGrid>();
    bool ident = true;
    for (std::size_t i = 0; i < eps.size(); ++i) ident = ident && eps[i] == rho[i];
    g->gauge = ident ? GaugeKind::identity : GaugeKind::log;
    g->eps = std::move(eps);
    g->rho = std::move(rho);
    g->q_check = q_check;
    g->n_max = n_max;
    return g;
}

void check_same_grid(const Grid& a, const Grid& b) {
    if (a == b) return;
    if (!a || !b || a->eps != b->eps || a->rho != b->rho) throw ConfigError("nets live on different grids");
}

std::string to_string(Magnitude m) {
    switch (m) {
        case Magnitude::infinitesimal: return "infinitesimal";
        case Magnitude::finite: return "finite";
        case Magnitude::infinite: return "infinite";
        case Magnitude::mixed: return "mixed";
    }
    return "?";
}

std::string to_string(InfiniteKind k) {
    switch (k) {
        case InfiniteKind::none: return "none";
        case InfiniteKind::strong: return "strong";
        case InfiniteKind::weak: return "weak";
        case InfiniteKind::neither: return "neither";
    }
    return "?";
}

std::string to_string(OrderRel r) {
    switch (r) {
        case OrderRel::leq: return "leq";
        case OrderRel::geq_strict_on_tail: return "geq_strict_on_tail";
        case OrderRel::undecided: return "undecided";
    }
    return "?";
}

GenNumber::GenNumber(Grid g, std::vector<real> samples)
    : grid_(std::move(g)), s_(std::move(samples)), cache_(std::make_shared<Cache>()) {
    if (!grid_) throw ConfigError("net without grid");
    if (s_.size() != grid_->size()) throw ConfigError("net length differs from grid length");
    for (std::size_t i = 0; i < s_.size(); ++i)
        if (!boost::multiprecision::isfinite(s_[i]))
            throw RingError("non-finite sample at eps index " + std::to_string(i), {static_cast<int>(i)});
}

GenNumber GenNumber::constant(const Grid& g, const real& c) { return GenNumber(g, std::vector<real>(g->size(), c)); }
GenNumber GenNumber::rho(const Grid& g) { return GenNumber(g, g->rho); }
GenNumber GenNumber::eps(const Grid& g) { return GenNumber(g, g->eps); }

GenNumber GenNumber::from_fn(const Grid& g, const std::function<real(std::size_t)>& f) {
    std::vector<real> s(g->size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = f(i);
    return GenNumber(g, std::move(s));
}

const Classification& GenNumber::classify() const {
    std::call_once(cache_->once, [this] {
        Classification c;
        c.sharp_order = sharp_order(*this);
        c.moderate = c.sharp_order > -std::numeric_limits<double>::infinity() && c.sharp_order >= -grid_->n_max;
        c.negligible = negligible(*this, grid_->q_check);
        cache_->value = c;
    });
    return cache_->value;
}

GenNumber operator+(const GenNumber& x, const GenNumber& y) {
    return pointwise(x, y, [](const real& a, const real& b) { return a + b; });
}
GenNumber operator-(const GenNumber& x, const GenNumber& y) {
    return pointwise(x, y, [](const real& a, const real& b) { return a - b; });
}
GenNumber operator*(const GenNumber& x, const GenNumber& y) {
    return pointwise(x, y, [](const real& a, const real& b) { return a * b; });
}

GenNumber operator/(const GenNumber& x, const GenNumber& y) {
    auto bad = non_invertible_indices(y);
    if (!bad.empty()) throw RingError("division by a non-invertible net", bad);
    return pointwise(x, y, [](const real& a, const real& b) { return a / b; });
}

GenNumber operator-(const GenNumber& x) { return map(x, [](const real& a) { return -a; }); }
GenNumber operator*(const real& c, const GenNumber& x) { return map(x, [&](const real& a) { return c * a; }); }
GenNumber abs(const GenNumber& x) { return map(x, [](const real& a) { return boost::multiprecision::fabs(a); }); }

GenNumber min(const GenNumber& x, const GenNumber& y) {
    return pointwise(x, y, [](const real& a, const real& b) { return a < b ? a : b; });
}
GenNumber max(const GenNumber& x, const GenNumber& y) {
    return pointwise(x, y, [](const real& a, const real& b) { return a > b ? a : b; });
}

GenNumber pow(const GenNumber& x, int n) {
    if (n < 0) {
        auto bad = non_invertible_indices(x);
        if (!bad.empty()) throw RingError("negative power of a non-invertible net", bad);
    }
    return map(x, [n](const real& a) { return pow_int(cplx(a), n).re; });
}

GenNumber pow(const GenNumber& x, const GenNumber& y) {
    return pointwise(x, y, [](const real& a, const real& b) { return boost::multiprecision::pow(a, b); });
}

GenNumber log(const GenNumber& x) { return map(x, [](const real& a) { return boost::multiprecision::log(a); }); }
GenNumber exp(const GenNumber& x) { return map(x, [](const real& a) { return boost::multiprecision::exp(a); }); }

GenNumber map(const GenNumber& x, const std::function<real(const real&)>& f) {
    std::vector<real> s(x.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = f(x[i]);
    return GenNumber(x.grid(), std::move(s));
}

double sharp_order(const GenNumber& x) {
    std::vector<double> lr, lx;
    tail_logs(x, lr, lx);
    if (lr.empty()) return std::numeric_limits<double>::infinity();
    if (lr.size() == 1) return lx[0] / lr[0];
    return fit_line(lr, lx).slope;
}

double certified_order(const GenNumber& x) {
    const auto& g = *x.grid();
    double q = std::numeric_limits<double>::infinity();
    for (std::size_t i = g.tail_begin(); i < g.size(); ++i) {
        real a = boost::multiprecision::fabs(x[i]);
        if (a < kFloor) continue;
        q = std::min(q, to_double(boost::multiprecision::log(a / 2) / boost::multiprecision::log(g.rho[i])));
    }
    return q;
}

bool negligible(const GenNumber& x, int q) {
    const auto& g = *x.grid();
    for (std::size_t i = g.tail_begin(); i < g.size(); ++i)
        if (boost::multiprecision::fabs(x[i]) > 2 * boost::multiprecision::pow(g.rho[i], q)) return false;
    return true;
}

bool moderate(const GenNumber& x) { return x.classify().moderate; }

bool eq_up_to_negligible(const GenNumber& x, const GenNumber& y, int q) { return negligible(x - y, q); }

OrderRel order_compare(const GenNumber& x, const GenNumber& y) {
    GenNumber d = x - y;
    const auto& g = *d.grid();
    bool leq = true, geq = true;
    for (std::size_t i = g.tail_begin(); i < g.size(); ++i) {
        if (d[i] > boost::multiprecision::pow(g.rho[i], g.q_check)) leq = false;
        if (!(d[i] >= boost::multiprecision::pow(g.rho[i], g.n_max))) geq = false;
    }
    if (leq) return OrderRel::leq;
    if (geq) return OrderRel::geq_strict_on_tail;
    return OrderRel::undecided;
}

std::vector<int> non_invertible_indices(const GenNumber& x) {
    const auto& g = *x.grid();
    std::vector<int> bad;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (x[i] == 0) bad.push_back(static_cast<int>(i));
    if (!bad.empty()) return bad;
    for (std::size_t i = g.tail_begin(); i < g.size(); ++i)
        if (boost::multiprecision::fabs(x[i]) < boost::multiprecision::pow(g.rho[i], g.n_max))
            bad.push_back(static_cast<int>(i));
    if (!bad.empty()) return bad;
    // indistinguishable from zero at the verification order
    if (negligible(x, g.q_check))
        for (std::size_t i = g.tail_begin(); i < g.size(); ++i) bad.push_back(static_cast<int>(i));
    return bad;
}

bool invertible(const GenNumber& x) { return non_invertible_indices(x).empty(); }

MagnitudeClass magnitude(const GenNumber& x) {
    MagnitudeClass m;
    if (negligible(x, x.grid()->q_check)) {
        m.cls = Magnitude::infinitesimal;
        return m;
    }
    std::vector<double> lr, lx;
    tail_logs(x, lr, lx);
    if (lr.size() < 3) {
        m.cls = Magnitude::mixed;
        return m;
    }
    Fit p = fit_line(lr, lx);
    if (p.resid > kFitTol) {
        // irregular tail: only a decaying or flat trend is conclusive
        if (p.slope > kSlopeTol) m.cls = Magnitude::infinitesimal;
        else if (p.slope >= -kSlopeTol) m.cls = Magnitude::finite;
        else m.cls = Magnitude::mixed;
        return m;
    }
    if (p.slope > kSlopeTol) {
        m.cls = Magnitude::infinitesimal;
    } else if (p.slope >= -kSlopeTol) {
        m.cls = Magnitude::finite;
    } else {
        m.cls = Magnitude::infinite;
        std::vector<double> llr(lr.size());
        for (std::size_t i = 0; i < lr.size(); ++i) llr[i] = std::log(-lr[i]);
        Fit w = fit_line(llr, lx);
        if (w.resid < p.resid && w.slope > 0) m.sub = InfiniteKind::weak;
        else if (p.resid <= kFitTol / 2) m.sub = InfiniteKind::strong;
        else m.sub = InfiniteKind::neither;
    }
    return m;
}

GenComplex::GenComplex(GenNumber re) : re_(re), im_(GenNumber::constant(re.grid(), 0)) {}

GenComplex::GenComplex(GenNumber re, GenNumber im) : re_(std::move(re)), im_(std::move(im)) {
    check_same_grid(re_.grid(), im_.grid());
}

GenComplex GenComplex::from_fn(const Grid& g, const std::function<cplx(std::size_t)>& f) {
    std::vector<real> re(g->size()), im(g->size());
    for (std::size_t i = 0; i < re.size(); ++i) {
        cplx v = f(i);
        re[i] = v.re;
        im[i] = v.im;
    }
    return {GenNumber(g, std::move(re)), GenNumber(g, std::move(im))};
}

bool GenComplex::is_real() const {
    for (std::size_t i = 0; i < size(); ++i)
        if (im_[i] != 0) return false;
    return true;
}

GenComplex operator+(const GenComplex& x, const GenComplex& y) { return {x.re() + y.re(), x.im() + y.im()}; }
GenComplex operator-(const GenComplex& x, const GenComplex& y) { return {x.re() - y.re(), x.im() - y.im()}; }
GenComplex operator-(const GenComplex& x) { return {-x.re(), -x.im()}; }
GenComplex conj(const GenComplex& x) { return {x.re(), -x.im()}; }

GenComplex operator*(const GenComplex& x, const GenComplex& y) {
    check_same_grid(x.grid(), y.grid());
    return GenComplex::from_fn(x.grid(), [&](std::size_t i) { return x[i] * y[i]; });
}

GenComplex operator/(const GenComplex& x, const GenComplex& y) {
    check_same_grid(x.grid(), y.grid());
    auto bad = non_invertible_indices(abs(y));
    if (!bad.empty()) throw RingError("division by a non-invertible net", bad);
    return GenComplex::from_fn(x.grid(), [&](std::size_t i) { return x[i] / y[i]; });
}

GenNumber abs(const GenComplex& x) {
    return GenNumber::from_fn(x.grid(), [&](std::size_t i) { return abs(x[i]); });
}

bool eq_up_to_negligible(const GenComplex& x, const GenComplex& y, int q) { return negligible(abs(x - y), q); }

}  // namespace hft
