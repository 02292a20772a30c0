#include "hft/embedding.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hft {

namespace {

using boost::multiprecision::fabs;

constexpr double kMassTol = 1e-6;

real horner(const std::vector<real>& c, const real& u) {
    real r = 0;
    for (std::size_t k = c.size(); k-- > 0;) r = r * u + c[k];
    return r;
}

// coefficient vectors of He_0..He_n
std::vector<std::vector<real>> hermite_he(int n) {
    std::vector<std::vector<real>> he(n + 1);
    he[0] = {1};
    if (n >= 1) he[1] = {0, 1};
    for (int k = 1; k < n; ++k) {
        std::vector<real> next(k + 2, 0);
        for (std::size_t j = 0; j < he[k].size(); ++j) next[j + 1] += he[k][j];
        for (std::size_t j = 0; j < he[k - 1].size(); ++j) next[j] -= k * he[k - 1][j];
        he[k + 1] = next;
    }
    return he;
}

struct HermiteData {
    real sigma;
    std::vector<real> p0;     // psi = pref * e^{-u^2/2} p0(u), u = x / sqrt(2 sigma)
    std::vector<real> q;      // Psi = erfc part - (2 pi)^{-1/2} e^{-u^2/2} q(u)
    real scale_u;             // 1 / sqrt(2 sigma)
    real pref;
};

class HermiteFn : public SpecialFn {
public:
    HermiteFn(std::shared_ptr<const HermiteData> d, int n, std::vector<real> poly, real pref)
        : d_(std::move(d)), n_(n), poly_(std::move(poly)), pref_(pref) {}

    std::string name() const override { return n_ == 0 ? "psi" : "psi-d" + std::to_string(n_); }

    cplx eval(const real& x) const override {
        real u = x * d_->scale_u;
        real g = boost::multiprecision::exp(-u * u / 2);
        if (g == 0) return real(0);
        return pref_ * g * horner(poly_, u);
    }

    std::shared_ptr<const SpecialFn> derivative() const override {
        // d/du [e^{-u^2/2} P] = e^{-u^2/2} (P' - u P)
        std::vector<real> next(poly_.size() + 1, 0);
        for (std::size_t j = 1; j < poly_.size(); ++j) next[j - 1] += j * poly_[j];
        for (std::size_t j = 0; j < poly_.size(); ++j) next[j + 1] -= poly_[j];
        return std::make_shared<HermiteFn>(d_, n_ + 1, next, pref_ * d_->scale_u);
    }

private:
    std::shared_ptr<const HermiteData> d_;
    int n_;
    std::vector<real> poly_;
    real pref_;
};

class HermitePrimitive : public SpecialFn {
public:
    explicit HermitePrimitive(std::shared_ptr<const HermiteData> d) : d_(std::move(d)) {}
    std::string name() const override { return "psi-primitive"; }

    cplx eval(const real& x) const override {
        real u = x * d_->scale_u;
        static const real inv_sqrt2 = 1 / boost::multiprecision::sqrt(real(2));
        static const real inv_sqrt2pi = 1 / boost::multiprecision::sqrt(kTwoPi);
        real main = boost::math::erfc(-u * inv_sqrt2) / 2;
        real g = boost::multiprecision::exp(-u * u / 2);
        if (g == 0) return main;
        return main - inv_sqrt2pi * g * horner(d_->q, u);
    }

    std::shared_ptr<const SpecialFn> derivative() const override {
        return std::make_shared<HermiteFn>(d_, 0, d_->p0, d_->pref);
    }

private:
    std::shared_ptr<const HermiteData> d_;
};

// Natural cubic spline on a uniform grid.
struct Spline {
    real x0, h;
    std::vector<real> y, m;  // values and second derivatives
    std::vector<real> cum;   // integral from x0 to node i
    real scale = 1;          // applied on output
    real left = 0, right = 0;  // value outside (only used by the primitive)

    static std::shared_ptr<Spline> build(real x0, real h, std::vector<real> y) {
        auto s = std::make_shared<Spline>();
        s->x0 = x0;
        s->h = h;
        std::size_t n = y.size();
        s->y = std::move(y);
        s->m.assign(n, 0);
        // tridiagonal solve, natural ends
        std::vector<real> c(n, 0), d(n, 0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            real rhs = 6 * (s->y[i + 1] - 2 * s->y[i] + s->y[i - 1]) / (h * h);
            real denom = 4 - c[i - 1];
            c[i] = 1 / denom;
            d[i] = (rhs - d[i - 1]) / denom;
        }
        for (std::size_t i = n - 1; i-- > 1;) s->m[i] = d[i] - c[i] * s->m[i + 1];
        s->cum.assign(n, 0);
        for (std::size_t i = 0; i + 1 < n; ++i)
            s->cum[i + 1] = s->cum[i] + h * (s->y[i] + s->y[i + 1]) / 2 - h * h * h * (s->m[i] + s->m[i + 1]) / 24;
        return s;
    }

    real xmax() const { return x0 + h * static_cast<int>(y.size() - 1); }

    // derivative `d` (0..3) of the spline, zero outside
    real eval(const real& x, int d) const {
        if (x < x0 || x > xmax()) return 0;
        std::size_t n = y.size();
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(to_double((x - x0) / h)), n - 2);
        real t = x - (x0 + h * static_cast<int>(i));
        real a = h - t;
        real mi = m[i], mj = m[i + 1], yi = y[i], yj = y[i + 1];
        switch (d) {
            case 0:
                return (mi * a * a * a + mj * t * t * t) / (6 * h) + (yi / h - mi * h / 6) * a + (yj / h - mj * h / 6) * t;
            case 1:
                return (-mi * a * a + mj * t * t) / (2 * h) - (yi / h - mi * h / 6) + (yj / h - mj * h / 6);
            case 2: return (mi * a + mj * t) / h;
            default: return (mj - mi) / h;
        }
    }

    real integral_to(const real& x) const {
        if (x <= x0) return 0;
        if (x >= xmax()) return cum.back();
        std::size_t n = y.size();
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(to_double((x - x0) / h)), n - 2);
        real t = x - (x0 + h * static_cast<int>(i));
        real a = h - t;
        real mi = m[i], mj = m[i + 1], yi = y[i], yj = y[i + 1];
        real ci = yi / h - mi * h / 6, cj = yj / h - mj * h / 6;
        // antiderivative on the piece, zero at t = 0
        auto anti = [&](const real& tt, const real& aa) {
            return (-mi * aa * aa * aa * aa + mj * tt * tt * tt * tt) / (24 * h) - ci * aa * aa / 2 + cj * tt * tt / 2;
        };
        return cum[i] + anti(t, a) - anti(real(0), h);
    }
};

class TableFn : public SpecialFn {
public:
    TableFn(std::shared_ptr<const Spline> s, int d) : s_(std::move(s)), d_(d) {}
    std::string name() const override { return d_ == 0 ? "psi-table" : "psi-table-d" + std::to_string(d_); }
    cplx eval(const real& x) const override { return s_->scale * s_->eval(x, d_); }
    std::shared_ptr<const SpecialFn> derivative() const override {
        if (d_ >= 3) throw CapabilityError("spline-tabulated mollifier has no derivative beyond order 3");
        return std::make_shared<TableFn>(s_, d_ + 1);
    }

private:
    std::shared_ptr<const Spline> s_;
    int d_;
};

class TablePrimitive : public SpecialFn {
public:
    TablePrimitive(std::shared_ptr<const Spline> s, real mass) : s_(std::move(s)), mass_(mass) {}
    std::string name() const override { return "psi-table-primitive"; }
    cplx eval(const real& x) const override { return s_->integral_to(x) / mass_; }
    std::shared_ptr<const SpecialFn> derivative() const override {
        auto scaled = std::make_shared<Spline>(*s_);
        scaled->scale = 1 / mass_;
        return std::make_shared<TableFn>(scaled, 0);
    }

private:
    std::shared_ptr<const Spline> s_;
    real mass_;
};

double flat(double u) { return u > 0 ? std::exp(-1 / u) : 0.0; }

double step_d(double u) {
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    double a = flat(u), b = flat(1 - u);
    return a / (a + b);
}

double beta_compact(double t, double p, double s) {
    t = std::fabs(t);
    return step_d((s - t) / (s * (1 - p)));
}

// (1/pi) int_0^s beta(t) cos(x t) dt in double
double psi_compact(double x, double p, double s) {
    using GL = boost::math::quadrature::gauss<double, 30>;
    double a = p * s;
    double flat_part = x == 0 ? a : std::sin(a * x) / x;
    const int panels = 16;
    double w = (s - a) / panels, acc = 0;
    for (int k = 0; k < panels; ++k) {
        double lo = a + k * w;
        acc += GL::integrate([&](double t) { return beta_compact(t, p, s) * std::cos(x * t); }, lo, lo + w);
    }
    return (flat_part + acc) / M_PI;
}

}  // namespace

MollifierSpec MollifierSpec::defaults(const Grid& g) {
    MollifierSpec s;
    s.b = GenNumber::from_fn(g, [&](std::size_t i) { return 1 / g->rho[i]; });
    return s;
}

void MollifierSpec::validate() const {
    if (b.size() == 0) throw ConfigError("mollifier scale b is not set");
    MagnitudeClass m = magnitude(b);
    if (m.cls != Magnitude::infinite || m.sub != InfiniteKind::strong)
        throw ConfigError("mollifier scale b must be a strong infinite number");
    if (!(beta_plateau > 0 && beta_plateau < 1)) throw ConfigError("beta_plateau must lie in (0,1)");
    if (beta_support != 1.0) throw ConfigError("beta_support is fixed to 1");
    if (!(sigma > 0)) throw ConfigError("sigma must be positive");
    if (order < 0 || order > 20) throw ConfigError("hermite order must be in 0..20");
    if (table_resolution < 16) throw ConfigError("table_resolution must be at least 16");
    if (!(table_halfwidth > 0)) throw ConfigError("table_halfwidth must be positive");
}

std::string MollifierSpec::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "mollifier;kind=" << (kind == MollifierKind::hermite ? "hermite" : "table");
    if (kind == MollifierKind::hermite) os << ";sigma=" << sigma << ";order=" << order;
    else
        os << ";plateau=" << beta_plateau << ";support=" << beta_support << ";resolution=" << table_resolution
           << ";halfwidth=" << table_halfwidth;
    os << ";b=";
    for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << to_string(b[i], 36);
    return os.str();
}

std::shared_ptr<const SpecialFn> Mollifier::psi(int deriv) const {
    std::shared_ptr<const SpecialFn> f = psi_;
    for (int j = 0; j < deriv; ++j) f = f->derivative();
    return f;
}

real Mollifier::beta(const real& t) const { return beta_(t); }

MollifierTable Mollifier::table() const {
    MollifierTable t;
    int n = spec_.table_resolution;
    double hw = spec_.table_halfwidth;
    for (int i = 0; i <= n; ++i) {
        real x = real(-hw) + real(2 * hw) * i / n;
        t.x.push_back(to_double(x));
        t.psi.push_back(to_double(psi_->eval(x).re));
        t.Psi.push_back(to_double(Psi_->eval(x).re));
    }
    return t;
}

namespace {

real find_radius(const SpecialFn& f) {
    // outermost point where |psi| exceeds 1e-40, scanning outward
    real last = 0;
    for (int k = 0; k <= 1600; ++k) {
        real x = real(k) / 4;
        if (fabs(f.eval(x).re) > real(1e-40)) last = x;
    }
    return last + 1;
}

}  // namespace

Mollifier build_mollifier(const MollifierSpec& spec) {
    spec.validate();
    Mollifier m;
    m.spec_ = spec;
    if (spec.kind == MollifierKind::hermite) {
        auto d = std::make_shared<HermiteData>();
        d->sigma = spec.sigma;
        d->scale_u = 1 / boost::multiprecision::sqrt(2 * real(spec.sigma));
        d->pref = 1 / boost::multiprecision::sqrt(2 * kTwoPi * real(spec.sigma));
        int J = spec.order;
        auto he = hermite_he(2 * J);
        d->p0.assign(2 * J + 1, 0);
        d->q.assign(std::max(2 * J, 1), 0);
        real coef = 1;  // (-1/2)^j / j!
        for (int j = 0; j <= J; ++j) {
            if (j > 0) coef *= real(-0.5) / j;
            for (std::size_t k = 0; k < he[2 * j].size(); ++k) d->p0[k] += coef * he[2 * j][k];
            if (j > 0)
                for (std::size_t k = 0; k < he[2 * j - 1].size(); ++k) d->q[k] += coef * he[2 * j - 1][k];
        }
        m.psi_ = std::make_shared<HermiteFn>(d, 0, d->p0, d->pref);
        m.Psi_ = std::make_shared<HermitePrimitive>(d);
        real sg = spec.sigma;
        m.beta_ = [sg, J](const real& t) {
            real s = sg * t * t, term = 1, sum = 1;
            for (int j = 1; j <= J; ++j) {
                term *= s / j;
                sum += term;
            }
            return boost::multiprecision::exp(-s) * sum;
        };
        m.radius_ = find_radius(*m.psi_);
        return m;
    }
    int n = spec.table_resolution;
    double hw = spec.table_halfwidth, p = spec.beta_plateau, s = spec.beta_support;
    MollifierTable t;
    for (int i = 0; i <= n; ++i) t.x.push_back(-hw + 2 * hw * i / n);
    std::vector<double> vals(n + 1);
    for (int i = 0; i <= n; ++i) {
        int mirror = n - i;
        if (mirror < i) vals[i] = vals[mirror];
        else vals[i] = psi_compact(t.x[i], p, s);
    }
    t.psi = vals;
    Mollifier out = import_mollifier(t, spec);
    out.beta_ = [p, s](const real& tt) { return real(beta_compact(to_double(tt), p, s)); };
    return out;
}

Mollifier import_mollifier(const MollifierTable& t, const MollifierSpec& spec_in) {
    MollifierSpec spec = spec_in;
    spec.kind = MollifierKind::table;
    std::size_t n = t.x.size();
    if (n < 17 || t.psi.size() != n) throw MollifierError("mollifier table needs matching x/psi arrays of length >= 17");
    double h = (t.x.back() - t.x.front()) / static_cast<double>(n - 1);
    if (!(h > 0)) throw MollifierError("mollifier table x must be increasing");
    for (std::size_t i = 0; i < n; ++i)
        if (std::fabs(t.x[i] - (t.x.front() + h * static_cast<double>(i))) > 1e-9 * std::max(1.0, std::fabs(t.x[i])))
            throw MollifierError("mollifier table x must be uniform");
    spec.table_resolution = static_cast<int>(n - 1);
    spec.table_halfwidth = std::max(std::fabs(t.x.front()), std::fabs(t.x.back()));
    spec.validate();
    std::vector<real> ys(t.psi.begin(), t.psi.end());
    auto s = Spline::build(real(t.x.front()), real(t.x.back() - t.x.front()) / static_cast<int>(n - 1), ys);
    real mass = s->cum.back();
    if (fabs(mass - 1) > kMassTol) {
        std::ostringstream os;
        os << "mollifier table mass " << to_string(mass, 12) << " deviates from 1 by more than " << kMassTol
           << " (table halfwidth or resolution too small)";
        throw MollifierError(os.str());
    }
    Mollifier m;
    m.spec_ = spec;
    m.psi_ = std::make_shared<TableFn>(s, 0);
    m.Psi_ = std::make_shared<TablePrimitive>(s, mass);
    // beta = F(psi) by trapezoid on the table (only used as a diagnostic oracle)
    m.beta_ = [s](const real& om) {
        real acc = 0;
        for (std::size_t i = 0; i < s->y.size(); ++i) {
            real x = s->x0 + s->h * static_cast<int>(i);
            real w = (i == 0 || i + 1 == s->y.size()) ? real(0.5) : real(1);
            acc += w * s->y[i] * boost::multiprecision::cos(om * x);
        }
        return acc * s->h;
    };
    m.radius_ = real(spec.table_halfwidth);
    return m;
}

Expr delta_expr(const Mollifier& m, const Expr& arg, int deriv) {
    using namespace sym;
    Expr b = m.b();
    return mul(pow_int(b, deriv + 1), special(m.psi(deriv), mul(b, arg)));
}

Expr heaviside_expr(const Mollifier& m, const Expr& arg) {
    return sym::special(m.primitive(), sym::mul(m.b(), arg));
}

GSFunc dirac_delta(const Mollifier& m, int n) {
    if (n < 1) throw DomainError("dirac_delta needs n >= 1");
    Expr e = delta_expr(m, sym::var(0));
    for (int j = 1; j < n; ++j) e = sym::mul(e, delta_expr(m, sym::var(j)));
    return GSFunc(e, n, {});
}

GSFunc heaviside(const Mollifier& m) { return GSFunc(heaviside_expr(m, sym::var(0)), 1, {}); }

Atom Atom::parse(const std::string& name) {
    Atom a;
    if (name == "delta") return a;
    if (name == "heaviside" || name == "H") {
        a.kind = heaviside;
        return a;
    }
    std::size_t primes = 0;
    while (primes < name.size() && name[name.size() - 1 - primes] == '\'') ++primes;
    if (primes > 0 && name.substr(0, name.size() - primes) == "delta") {
        a.kind = delta_derivative;
        a.order = static_cast<int>(primes);
        return a;
    }
    const std::string pre = "delta_derivative(";
    if (name.rfind(pre, 0) == 0 && name.back() == ')') {
        std::string num = name.substr(pre.size(), name.size() - pre.size() - 1);
        char* end = nullptr;
        long j = std::strtol(num.c_str(), &end, 10);
        if (end && *end == 0 && !num.empty() && j >= 0 && j <= 64) {
            a.kind = delta_derivative;
            a.order = static_cast<int>(j);
            return a;
        }
    }
    throw CapabilityError("unsupported embedding atom '" + name + "'");
}

GSFunc embed(const std::vector<EmbedTerm>& combo, const Mollifier& m) {
    using namespace sym;
    Expr sum = cnst(0.0);
    bool cv = false;
    for (std::size_t t = 0; t < combo.size(); ++t) {
        const EmbedTerm& term = combo[t];
        Expr x = var(0);
        if (term.atom.shift.size() > 0) {
            MagnitudeClass mc = magnitude(term.atom.shift);
            if (mc.cls == Magnitude::infinite || mc.cls == Magnitude::mixed)
                throw DomainError("embedding shift must be finite");
            x = sub(x, param("s" + std::to_string(t), term.atom.shift));
        }
        Expr atom;
        switch (term.atom.kind) {
            case Atom::delta: atom = delta_expr(m, x); break;
            case Atom::delta_derivative: atom = delta_expr(m, x, term.atom.order); break;
            case Atom::heaviside: atom = heaviside_expr(m, x); break;
        }
        if (!term.coef.is_real()) cv = true;
        sum = add(sum, mul(param("c" + std::to_string(t), term.coef), atom));
    }
    return GSFunc(sum, 1, {}, cv);
}

namespace {

class ConvolutionOp : public LazyOp {
public:
    ConvolutionOp(Expr f, Expr g, int arity, GenNumber lo, GenNumber hi, QuadratureConfig cfg)
        : f_(std::move(f)), g_(std::move(g)), m_(arity), lo_(std::move(lo)), hi_(std::move(hi)), cfg_(cfg) {
        // f in y = x_m; g at (x0 - y, x1, ...)
        std::vector<Expr> fv{sym::var(m_)};
        std::vector<Expr> gv;
        for (int j = 0; j < m_; ++j) gv.push_back(j == 0 ? sym::sub(sym::var(0), sym::var(m_)) : sym::var(j));
        integrand_ = sym::mul(substitute(f_, fv), substitute(g_, gv));
        // evaluated thousands of times under an outer quadrature: start coarse, let adaptivity refine
        inner_ = cfg_;
        inner_.base_panels = std::max(8, cfg_.base_panels / 8);
    }

    std::string describe() const override { return "(convolve " + to_sexpr(f_) + " " + to_sexpr(g_) + ")"; }

    cplx eval(const EvalCtx& ctx) const override {
        std::vector<real> extra;
        if (ctx.nx > 0) extra.push_back(ctx.x[0]);
        return integrate_eps(integrand_, m_, lo_[ctx.idx], hi_[ctx.idx], 0, ctx, inner_, extra);
    }

    Expr derivative(int v) const override {
        if (v >= m_) return sym::cnst(0.0);
        Expr dg = hft::derivative(g_, v);
        if (is_zero(dg)) return sym::cnst(0.0);
        return sym::lazy(std::make_shared<ConvolutionOp>(f_, dg, m_, lo_, hi_, cfg_));
    }

    int arity() const override { return m_; }
    bool eps_invariant() const override {
        return hft::eps_invariant(f_) && hft::eps_invariant(g_) && constant_net(lo_) && constant_net(hi_);
    }

private:
    Expr f_, g_;
    int m_;
    GenNumber lo_, hi_;
    QuadratureConfig cfg_, inner_;
    Expr integrand_;
};

}  // namespace

GSFunc convolve(const GSFunc& f, const GSFunc& g, const GenBox& hint_f, const QuadratureConfig& cfg) {
    cfg.validate();
    if (f.arity != 1) throw CapabilityError("convolution supports an arity-1 left factor");
    if (hint_f.dim() != 1) throw DomainError("support hint must be one-dimensional");
    const GenNumber& lo = hint_f.lo[0];
    const GenNumber& hi = hint_f.hi[0];
    const Grid& grid = lo.grid();
    for (const GenNumber* edge : {&lo, &hi}) {
        GenComplex v = eval_expr(f.expr, {*edge}, grid);
        if (!negligible(abs(v), grid->q_check))
            throw SupportError("left convolution factor is not negligible at the support hint boundary");
    }
    GenBox dom;
    if (g.domain.dim() > 0) {
        dom = g.domain;
        dom.lo[0] = dom.lo[0] + lo;
        dom.hi[0] = dom.hi[0] + hi;
    }
    auto op = std::make_shared<ConvolutionOp>(f.expr, g.expr, std::max(g.arity, 1), lo, hi, cfg);
    return GSFunc(sym::lazy(op), std::max(g.arity, 1), dom, f.complex_valued || g.complex_valued);
}

TameReport tame_check(const GSFunc& f, const GenNumber& x, const GenNumber& b, int max_order, double radius) {
    if (f.arity != 1) throw CapabilityError("tame_check supports arity-1 functions");
    if (max_order < 1) throw DomainError("tame_check needs max_order >= 1");
    const Grid& grid = x.grid();
    std::vector<Expr> ders{f.expr};
    for (int j = 1; j <= max_order; ++j) ders.push_back(derivative(ders.back(), 0));
    const double offs[] = {-1, -0.5, 0, 0.5, 1};
    std::size_t n = grid->size();
    std::vector<real> M(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<real> logm(max_order + 1);
        std::vector<real> mj(max_order + 1, 0);
        for (int j = 0; j <= max_order; ++j) {
            for (double o : offs) {
                real y = x[i] + real(o * radius);
                EvalCtx ctx{i, grid.get(), &y, 1};
                mj[j] = std::max(mj[j], abs(eval(ders[j], ctx)));
            }
        }
        bool higher = false;
        for (int j = 1; j <= max_order; ++j) higher = higher || mj[j] > 0;
        if (!higher) {
            // only the constant term: any c > 0 works, report the infimum
            c[i] = 0;
            M[i] = mj[0];
            continue;
        }
        // M >= M_0 is forced by j = 0; with M = M_0 the smallest admissible c is max_j (M_j / M_0)^{1/j}
        real m0 = mj[0] > 0 ? mj[0] : real(1);
        real cc = 0;
        for (int j = 1; j <= max_order; ++j)
            if (mj[j] > 0) cc = std::max(cc, boost::multiprecision::pow(mj[j] / m0, real(1) / j));
        c[i] = cc;
        M[i] = m0;
    }
    TameReport r;
    r.M = GenNumber(grid, M);
    r.c = GenNumber(grid, c);
    if (!invertible(r.c) && negligible(r.c, grid->q_check)) {
        // c can be taken arbitrarily small, so b/c exceeds every power of rho^{-1}
        r.b_over_c_class = {Magnitude::infinite, InfiniteKind::strong};
        r.tame = true;
        return r;
    }
    r.b_over_c = b / r.c;
    r.b_over_c_class = magnitude(r.b_over_c);
    r.tame = r.b_over_c_class.cls == Magnitude::infinite && r.b_over_c_class.sub == InfiniteKind::strong;
    return r;
}

}  // namespace hft
