#include "hft/integration.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

namespace hft {

namespace {

const real kTiny30("1e-30");
const real kTiny36("1e-36");
const real kSeed("1e-300");
const real kHuge("1e1000");
const real kUnhuge("1e-1000");
const real kDropFrac("1e-6");
const real kDirectSeries("1e-4");

using boost::multiprecision::fabs;
constexpr int N = kFilonNodes;
constexpr std::size_t kMaxTerms = 64;

// Gauss-Legendre nodes on [-1,1] and the map from samples to Legendre coefficients.
struct Rule {
    std::array<real, N> t, w;
    std::array<std::array<real, N>, N> m;  // c_j = sum_k m[j][k] A(t_k)

    Rule() {
        using G = boost::math::quadrature::gauss<real, N>;
        const auto& ab = G::abscissa();
        const auto& wt = G::weights();
        int h = N / 2;
        for (int k = 0; k < h; ++k) {
            t[h - 1 - k] = -ab[k];
            w[h - 1 - k] = wt[k];
            t[h + k] = ab[k];
            w[h + k] = wt[k];
        }
        for (int k = 0; k < N; ++k) {
            real p0 = 1, p1 = t[k];
            for (int j = 0; j < N; ++j) {
                real pj;
                if (j == 0) pj = p0;
                else if (j == 1) pj = p1;
                else {
                    pj = ((2 * j - 1) * t[k] * p1 - (j - 1) * p0) / j;
                    p0 = p1;
                    p1 = pj;
                }
                m[j][k] = real(2 * j + 1) / 2 * w[k] * pj;
            }
        }
    }
};

const Rule& rule() {
    static const Rule r;
    return r;
}

// ---- affine detection and decomposition into modulated terms ----

struct Affine {
    bool ok = false;
    cplx a, c;  // a x + c
};

Affine affine(const Expr& e, int v, const EvalCtx& ctx) {
    if (!depends_on(e, v)) return {true, 0, eval(e, ctx)};
    const Node& nd = *e;
    switch (nd.op) {
        case Op::Var: return {true, 1, 0};
        case Op::Add:
        case Op::Sub: {
            Affine l = affine(nd.kids[0], v, ctx);
            if (!l.ok) return {};
            Affine r = affine(nd.kids[1], v, ctx);
            if (!r.ok) return {};
            if (nd.op == Op::Add) return {true, l.a + r.a, l.c + r.c};
            return {true, l.a - r.a, l.c - r.c};
        }
        case Op::Neg: {
            Affine l = affine(nd.kids[0], v, ctx);
            return {l.ok, -l.a, -l.c};
        }
        case Op::Mul: {
            int fixed = !depends_on(nd.kids[0], v) ? 0 : (!depends_on(nd.kids[1], v) ? 1 : -1);
            if (fixed < 0) return {};
            cplx s = eval(nd.kids[fixed], ctx);
            Affine l = affine(nd.kids[1 - fixed], v, ctx);
            return {l.ok, s * l.a, s * l.c};
        }
        case Op::Div: {
            if (depends_on(nd.kids[1], v)) return {};
            cplx s = eval(nd.kids[1], ctx);
            Affine l = affine(nd.kids[0], v, ctx);
            return {l.ok, l.a / s, l.c / s};
        }
        default: return {};
    }
}

struct Term {
    cplx coef;
    real a;  // frequency: the term is coef * amp(x) * e^{i a x}
    Expr amp;
};
using Terms = std::vector<Term>;

struct Window {
    real lo, hi;
};

class Decomposer {
public:
    Decomposer(int v, const EvalCtx& ctx, real len, int base_panels)
        : v_(v), ctx_(ctx), len_(len), slow_(kTwoPi * base_panels / len) {}

    Terms run(const Expr& e) { return dec(e); }
    std::vector<Window> windows;

private:
    Terms opaque(const Expr& e) const { return {{cplx(1), real(0), e}}; }

    Expr affine_expr(const Affine& af) const {
        return sym::add(sym::mul(sym::cnst(af.a), sym::var(v_)), sym::cnst(af.c));
    }

    static Terms scaled(Terms t, const cplx& s) {
        for (auto& x : t) x.coef *= s;
        return t;
    }

    Terms dec(const Expr& e) {
        if (!depends_on(e, v_)) return {{eval(e, ctx_), real(0), sym::cnst(1.0)}};
        const Node& nd = *e;
        switch (nd.op) {
            case Op::Add:
            case Op::Sub: {
                Terms l = dec(nd.kids[0]), r = dec(nd.kids[1]);
                if (nd.op == Op::Sub) r = scaled(std::move(r), cplx(-1));
                l.insert(l.end(), r.begin(), r.end());
                if (l.size() > kMaxTerms) return opaque(e);
                return l;
            }
            case Op::Neg: return scaled(dec(nd.kids[0]), cplx(-1));
            case Op::Mul: return product(e, dec(nd.kids[0]), dec(nd.kids[1]));
            case Op::Div: {
                if (!depends_on(nd.kids[1], v_)) return scaled(dec(nd.kids[0]), cplx(1) / eval(nd.kids[1], ctx_));
                Terms d = dec(nd.kids[1]);
                for (auto& t : d)
                    if (t.a != 0) return opaque(e);
                Terms n = dec(nd.kids[0]);
                for (auto& t : n) {
                    if (d.size() == 1) {
                        t.coef /= d[0].coef;
                        t.amp = sym::div(t.amp, d[0].amp);
                    } else {
                        // slow denominator with several terms, e.g. a polynomial symbol
                        t.amp = sym::div(t.amp, nd.kids[1]);
                    }
                }
                return n;
            }
            case Op::PowInt: {
                if (nd.n < 2 || nd.n > 4) return opaque(e);
                Terms base = dec(nd.kids[0]);
                if (base.size() == 1 && base[0].a == 0) return opaque(e);
                Terms r = base;
                for (int j = 1; j < nd.n; ++j) r = product(e, r, base);
                return r;
            }
            case Op::Conj: {
                Terms t = dec(nd.kids[0]);
                for (auto& x : t) {
                    x.coef = conj(x.coef);
                    x.a = -x.a;
                    x.amp = sym::conj(x.amp);
                }
                return t;
            }
            case Op::Expi:
            case Op::Exp: {
                Affine af = affine(nd.kids[0], v_, ctx_);
                if (!af.ok) return opaque(e);
                // exponent as growth g x + phase-frequency f x + constant
                cplx ex = nd.op == Op::Expi ? cplx(-af.a.im, af.a.re) : af.a;
                cplx c0 = nd.op == Op::Expi ? cplx(-af.c.im, af.c.re) : af.c;
                if (ex.im == 0 || fabs(ex.im) <= slow_) return opaque(e);
                Expr amp = ex.re == 0 ? sym::cnst(1.0) : sym::exp(sym::mul(sym::cnst(cplx(ex.re)), sym::var(v_)));
                return {{exp(c0), ex.im, amp}};
            }
            case Op::Sin:
            case Op::Cos: {
                Affine af = affine(nd.kids[0], v_, ctx_);
                if (!af.ok || af.a.im != 0 || fabs(af.a.re) <= slow_) return opaque(e);
                cplx ic(-af.c.im, af.c.re);
                cplx ep = exp(ic), em = exp(-ic);
                Expr one = sym::cnst(1.0);
                if (nd.op == Op::Cos) return {{ep / cplx(2), af.a.re, one}, {em / cplx(2), -af.a.re, one}};
                cplx two_i(0, 2);
                return {{ep / two_i, af.a.re, one}, {-em / two_i, -af.a.re, one}};
            }
            case Op::Sinc: {
                if (nd.n != 0) return opaque(e);
                Affine af = affine(nd.kids[0], v_, ctx_);
                if (!af.ok || af.a.im != 0 || fabs(af.a.re) <= slow_) return opaque(e);
                real a = af.a.re;
                real rad = 4 * kPi / fabs(a);
                if (2 * rad >= len_) return opaque(e);
                real x0 = -af.c.re / a;
                windows.push_back({x0 - rad, x0 + rad});
                cplx ic(-af.c.im, af.c.re);
                Expr amp = sym::div(sym::cnst(1.0), sym::mul(sym::cnst(cplx(0, 2)), affine_expr(af)));
                return {{exp(ic), a, amp}, {-exp(-ic), -a, amp}};
            }
            default: return opaque(e);
        }
    }

    Terms product(const Expr& e, const Terms& l, const Terms& r) const {
        if (l.size() * r.size() > kMaxTerms) return opaque(e);
        Terms out;
        for (auto& x : l)
            for (auto& y : r) out.push_back({x.coef * y.coef, x.a + y.a, sym::mul(x.amp, y.amp)});
        return out;
    }

    int v_;
    const EvalCtx& ctx_;
    real len_;
    real slow_;  // frequencies below this are left to the base panels
};

// ---- breakpoints: nonlinear nodes with affine arguments mark a feature at their root ----

struct Feature {
    real x0, scale;
};

void collect_features(const Expr& e, int v, const EvalCtx& ctx, std::vector<Feature>& out) {
    if (!depends_on(e, v)) return;
    const Node& nd = *e;
    if (nd.op == Op::Lazy) return;
    auto mark = [&](const Expr& k, real s) {
        Affine af = affine(k, v, ctx);
        if (!af.ok || abs(af.a) == 0) return;
        cplx root = -af.c / af.a;
        out.push_back({root.re, s / abs(af.a)});
    };
    switch (nd.op) {
        case Op::Exp:
        case Op::Log:
        case Op::Sinc:
        case Op::Cosh:
        case Op::Sinh:
        case Op::Sqrt:
        case Op::PowInt:
        case Op::Pow:
        case Op::Abs:
        case Op::FlatExp: mark(nd.kids[0], 1); break;
        case Op::Special: mark(nd.kids[0], nd.special->scale()); break;
        case Op::Div: mark(nd.kids[1], 1); break;
        case Op::Apply:
            for (std::size_t i = 1; i < nd.kids.size(); ++i) mark(nd.kids[i], 1);
            break;
        default: break;
    }
    for (std::size_t i = nd.op == Op::Apply ? 1 : 0; i < nd.kids.size(); ++i) collect_features(nd.kids[i], v, ctx, out);
}

// largest angular frequency of oscillation left inside an amplitude
real hidden_frequency(const Expr& e, int v, const EvalCtx& ctx) {
    if (!depends_on(e, v)) return 0;
    const Node& nd = *e;
    real f = 0;
    if (nd.op == Op::Lazy) return nd.lazy->frequency_hint(v, ctx);
    if (nd.op == Op::Sin || nd.op == Op::Cos || nd.op == Op::Expi || nd.op == Op::Sinc || nd.op == Op::Exp) {
        Affine af = affine(nd.kids[0], v, ctx);
        if (af.ok) f = nd.op == Op::Exp ? fabs(af.a.im) : fabs(af.a.re);
    }
    for (auto& k : nd.kids) f = std::max(f, hidden_frequency(k, v, ctx));
    return f;
}

struct Group {
    real a;
    std::vector<std::pair<cplx, Expr>> parts;
};

// groups with their amplitudes deduplicated
struct GroupSet {
    std::vector<Expr> amps;
    std::vector<std::vector<std::pair<cplx, std::size_t>>> parts;

    explicit GroupSet(const std::vector<Group>& gs) {
        std::map<const Node*, std::size_t> seen;
        for (auto& g : gs) {
            parts.emplace_back();
            for (auto& [c, amp] : g.parts) {
                auto it = seen.find(amp.get());
                if (it == seen.end()) {
                    it = seen.emplace(amp.get(), amps.size()).first;
                    amps.push_back(amp);
                }
                parts.back().emplace_back(c, it->second);
            }
        }
    }
};

struct Segment {
    real lo, hi;
    std::shared_ptr<GroupSet> groups;
    std::shared_ptr<std::vector<real>> freqs;
    real max_len;
};

std::vector<Group> group_terms(const Terms& t) {
    std::map<real, std::size_t> idx;
    std::vector<Group> g;
    for (auto& x : t) {
        if (x.coef == cplx(0)) continue;
        auto it = idx.find(x.a);
        if (it == idx.end()) {
            idx[x.a] = g.size();
            g.push_back({x.a, {}});
            it = idx.find(x.a);
        }
        g[it->second].parts.emplace_back(x.coef, x.amp);
    }
    return g;
}

struct Work {
    real lo, hi;
    int seg;
    std::vector<std::array<cplx, N>> coef;
    real err = 0, l1 = 0;
};

class Engine {
public:
    Engine(int var, const EvalCtx& outer, const QuadratureConfig& cfg) : var_(var), cfg_(cfg) {
        xs_.assign(outer.x, outer.x + outer.nx);
        if (xs_.size() <= static_cast<std::size_t>(var)) xs_.resize(var + 1, real(0));
        ctx_ = outer;
        ctx_.x = xs_.data();
        ctx_.nx = xs_.size();
    }

    const EvalCtx& ctx() const { return ctx_; }

    void fill(Work& w, const std::vector<Segment>& segs) {
        const Rule& R = rule();
        const GroupSet& gs = *segs[w.seg].groups;
        real mid = (w.lo + w.hi) / 2, rad = (w.hi - w.lo) / 2;
        std::size_t ng = gs.parts.size();
        w.coef.assign(ng, {});
        w.err = 0;
        w.l1 = 0;
        std::vector<cplx> av(gs.amps.size());
        std::vector<std::array<cplx, N>> vals(ng);
        bool real_valued = true;
        for (int k = 0; k < N; ++k) {
            xs_[var_] = mid + rad * R.t[k];
            for (std::size_t a = 0; a < av.size(); ++a) av[a] = eval(gs.amps[a], ctx_);
            for (std::size_t g = 0; g < ng; ++g) {
                cplx acc = 0;
                for (auto& [c, ai] : gs.parts[g]) acc += c * av[ai];
                if (!isfinite(acc))
                    throw OverflowError("non-finite integrand at x = " + to_string(xs_[var_], 12) + ", eps index " +
                                            std::to_string(ctx_.idx),
                                        static_cast<int>(ctx_.idx));
                vals[g][k] = acc;
                real_valued = real_valued && acc.im == 0;
                w.l1 += rad * R.w[k] * abs(acc);
            }
        }
        for (std::size_t g = 0; g < ng; ++g) {
            auto& c = w.coef[g];
            for (int j = 0; j < N; ++j) {
                if (real_valued) {
                    real s2 = 0;
                    for (int k = 0; k < N; ++k) s2 += R.m[j][k] * vals[g][k].re;
                    c[j] = s2;
                } else {
                    real sr = 0, si = 0;
                    for (int k = 0; k < N; ++k) sr += R.m[j][k] * vals[g][k].re, si += R.m[j][k] * vals[g][k].im;
                    c[j] = cplx(sr, si);
                }
            }
            w.err += 2 * rad * (abs(c[N - 1]) + abs(c[N - 2]));
        }
        if (w.err <= 1000 * std::numeric_limits<real>::epsilon() * w.l1) w.err = 0;
    }

    real tolerance(const real& l1) const {
        real q = boost::multiprecision::pow(ctx_.rho(), ctx_.grid->q_check + 1) / 10;
        real rel = real(cfg_.rel_tol) * l1;
        return std::max(kTiny30 * l1, std::min(rel, q));
    }

    int var_;
    const QuadratureConfig& cfg_;
    std::vector<real> xs_;
    EvalCtx ctx_;
};

void add_grading(std::vector<real>& pts, const Feature& f, const real& lo, const real& hi) {
    if (!(f.scale > 0)) return;
    if (f.x0 > lo && f.x0 < hi) pts.push_back(f.x0);
    real d = f.scale;
    for (int j = 0; j < 400; ++j, d *= 2) {
        real l = f.x0 - d, r = f.x0 + d;
        if (l <= lo && r >= hi) break;
        if (l > lo && l < hi) pts.push_back(l);
        if (r > lo && r < hi) pts.push_back(r);
    }
}

}  // namespace

void QuadratureConfig::validate() const {
    if (base_panels < 8) throw ConfigError("base_panels must be >= 8");
    if (points_per_wavelength < 4) throw ConfigError("points_per_wavelength must be >= 4");
    if (max_panels < base_panels) throw ConfigError("max_panels must be >= base_panels");
    if (!(rel_tol > 0)) throw ConfigError("rel_tol must be positive");
}

std::string QuadratureConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "quad:gl" << N << ":filon:" << base_panels << ":" << points_per_wavelength << ":" << max_panels << ":"
       << rel_tol;
    return os.str();
}

void spherical_bessel(const real& theta, std::array<real, N>& out) {
    real th = fabs(theta);
    if (th < real(0.25)) {
        // j_n = th^n/(2n+1)!! * sum_m (-th^2/2)^m / (m! (2n+3)(2n+5)...(2n+2m+1))
        auto series = [&](int n, const real& pw, const real& dfact) {
            real term = 1, sum = 1, h = -th * th / 2;
            for (int m = 1; m < 60; ++m) {
                term *= h / (m * real(2 * n + 2 * m + 1));
                sum += term;
                if (fabs(term) < kTiny36 * fabs(sum)) break;
            }
            return pw / dfact * sum;
        };
        real pw = 1, dfact = 1;
        if (th < kDirectSeries) {
            for (int n = 0; n < N; ++n) {
                if (n) pw *= th, dfact *= (2 * n + 1);
                out[n] = series(n, pw, dfact);
            }
        } else {
            // top two orders by series, the rest by the (stable) downward recurrence
            for (int n = 1; n < N - 1; ++n) pw *= th, dfact *= (2 * n + 1);
            out[N - 2] = series(N - 2, pw, dfact);
            out[N - 1] = series(N - 1, pw * th, dfact * (2 * N - 1));
            real inv = 1 / th;
            for (int n = N - 2; n >= 1; --n) out[n - 1] = (2 * n + 1) * inv * out[n] - out[n + 1];
        }
    } else {
        cplx e = expi(th);
        real s = e.im, c = e.re;
        real j0 = s / th, j1 = s / (th * th) - c / th;
        if (th >= N) {
            out[0] = j0;
            out[1] = j1;
            for (int n = 1; n + 1 < N; ++n) out[n + 1] = (2 * n + 1) / th * out[n] - out[n - 1];
        } else {
            // start where j_top/j_N has fallen below ~1e-36
            double lt = std::log(to_double(th)), acc = 0;
            int top = N;
            while (acc > -84) acc += lt - std::log(2.0 * top + 3), ++top;
            top += 4;
            real fnext = 0, fcur = kSeed;
            std::array<real, N> tmp;
            real inv = 1 / th;
            for (int n = top; n >= 1; --n) {
                real fprev = (2 * n + 1) * inv * fcur - fnext;  // index n-1
                fnext = fcur;
                fcur = fprev;
                if (n - 1 < N) tmp[n - 1] = fcur;
                if (fabs(fcur) > kHuge) {
                    fcur *= kUnhuge;
                    fnext *= kUnhuge;
                    for (int j = std::max(n - 1, 0); j < N; ++j) tmp[j] *= kUnhuge;
                }
            }
            real scale = fabs(j0) >= fabs(j1) ? j0 / tmp[0] : j1 / tmp[1];
            for (int n = 0; n < N; ++n) out[n] = tmp[n] * scale;
        }
    }
    if (theta < 0)
        for (int n = 1; n < N; n += 2) out[n] = -out[n];
}

cplx PreparedIntegral::eval(const real& omega) const { return sum(omega, 0, panels_.size()); }

cplx PreparedIntegral::eval(const real& omega, const real& lo, const real& hi) const {
    auto below = [](const Panel& p, const real& x) { return p.mid < x; };
    std::size_t a = std::lower_bound(panels_.begin(), panels_.end(), lo, below) - panels_.begin();
    std::size_t b = std::lower_bound(panels_.begin(), panels_.end(), hi, below) - panels_.begin();
    return sum(omega, a, b);
}

cplx PreparedIntegral::sum(const real& omega, std::size_t from, std::size_t to) const {
    std::array<real, N> jb;
    cplx total = 0;
    for (std::size_t pi = from; pi < to; ++pi) {
        const Panel& p = panels_[pi];
        cplx ps = 0;
        for (std::size_t g = 0; g < p.coef.size(); ++g) {
            real w = (*p.freqs)[g] + omega;
            const auto& c = p.coef[g];
            cplx acc = 0;
            if (w == 0) {
                acc = c[0] * cplx(2);
            } else {
                spherical_bessel(w * p.rad, jb);
                // sum_j c_j 2 i^j j_j
                real re = 0, im = 0;
                for (int j = 0; j < N; j += 4) {
                    re += c[j].re * jb[j] - c[j + 1].im * jb[j + 1] - c[j + 2].re * jb[j + 2] + c[j + 3].im * jb[j + 3];
                    im += c[j].im * jb[j] + c[j + 1].re * jb[j + 1] - c[j + 2].im * jb[j + 2] - c[j + 3].re * jb[j + 3];
                }
                acc = cplx(2 * re, 2 * im) * expi(w * p.mid);
            }
            ps += acc;
        }
        total += ps * cplx(p.rad);
    }
    return sign_ < 0 ? -total : total;
}

PreparedIntegral prepare_integral(const Expr& f, int var, const real& lo_in, const real& hi_in, const EvalCtx& outer,
                                  const QuadratureConfig& cfg, const std::vector<real>& extra_points) {
    PreparedIntegral out;
    if (lo_in == hi_in) return out;
    real lo = lo_in, hi = hi_in;
    if (lo > hi) {
        std::swap(lo, hi);
        out.sign_ = -1;
    }
    if (!boost::multiprecision::isfinite(lo) || !boost::multiprecision::isfinite(hi))
        throw OverflowError("non-finite integration limits at eps index " + std::to_string(outer.idx),
                            static_cast<int>(outer.idx));
    Engine eng(var, outer, cfg);
    const EvalCtx& ctx = eng.ctx();
    real len = hi - lo;

    Decomposer dec(var, ctx, len, cfg.base_panels);
    Terms terms = dec.run(f);
    std::vector<Group> groups = group_terms(terms);
    if (groups.size() > kMaxTerms) {
        groups = {Group{0, {{cplx(1), f}}}};
        dec.windows.clear();
    }
    std::vector<Group> raw{Group{0, {{cplx(1), f}}}};

    // merge windows, then split [lo,hi] into decomposed and raw segments
    auto& win = dec.windows;
    std::sort(win.begin(), win.end(), [](const Window& a, const Window& b) { return a.lo < b.lo; });
    std::vector<Window> merged;
    for (auto& w : win) {
        Window c{std::max(w.lo, lo), std::min(w.hi, hi)};
        if (c.lo >= c.hi) continue;
        if (!merged.empty() && c.lo <= merged.back().hi) merged.back().hi = std::max(merged.back().hi, c.hi);
        else merged.push_back(c);
    }
    std::vector<real> freq_dec, freq_raw{0};
    for (auto& g : groups) freq_dec.push_back(g.a);
    auto fd = std::make_shared<std::vector<real>>(freq_dec);
    auto fr = std::make_shared<std::vector<real>>(freq_raw);
    out.freqs_ = {fd, fr};

    auto max_len_for = [&](const GroupSet& gs) {
        real osc = 0;
        for (auto& amp : gs.amps) osc = std::max(osc, hidden_frequency(amp, var, ctx));
        if (osc == 0) return len;
        return real(N) * kTwoPi / (real(cfg.points_per_wavelength) * osc);
    };
    auto gdec = std::make_shared<GroupSet>(groups), graw = std::make_shared<GroupSet>(raw);
    real len_dec = max_len_for(*gdec), len_raw = max_len_for(*graw);

    std::vector<Segment> segs;
    real cur = lo;
    for (auto& w : merged) {
        if (w.lo > cur) segs.push_back({cur, w.lo, gdec, fd, len_dec});
        segs.push_back({w.lo, w.hi, graw, fr, len_raw});
        cur = w.hi;
    }
    if (cur < hi) segs.push_back({cur, hi, gdec, fd, len_dec});

    // breakpoints
    std::vector<Feature> feats;
    collect_features(f, var, ctx, feats);
    feats.push_back({0, 1});
    std::vector<real> pts{lo, hi};
    for (int j = 1; j < cfg.base_panels; ++j) pts.push_back(lo + len * j / cfg.base_panels);
    for (auto& ft : feats) add_grading(pts, ft, lo, hi);
    for (auto& x : extra_points)
        if (x > lo && x < hi) pts.push_back(x);
    for (auto& s : segs) pts.push_back(s.lo), pts.push_back(s.hi);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    std::vector<Work> work;
    std::size_t si = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        real a = pts[i], b = pts[i + 1];
        while (si + 1 < segs.size() && a >= segs[si].hi) ++si;
        const Segment& s = segs[si];
        long pieces = 1;
        if (b - a > s.max_len) {
            real np = boost::multiprecision::ceil((b - a) / s.max_len);
            if (np > real(cfg.max_panels))
                throw QuadratureFailure("oscillation needs more than max_panels panels", static_cast<int>(ctx.idx),
                                        std::numeric_limits<double>::infinity());
            pieces = static_cast<long>(np);
        }
        for (long p = 0; p < pieces; ++p) {
            Work w;
            w.lo = a + (b - a) * p / pieces;
            w.hi = p + 1 == pieces ? b : a + (b - a) * (p + 1) / pieces;
            w.seg = static_cast<int>(si);
            work.push_back(std::move(w));
        }
        if (static_cast<long>(work.size()) > cfg.max_panels)
            throw QuadratureFailure("initial partition exceeds max_panels", static_cast<int>(ctx.idx),
                                    std::numeric_limits<double>::infinity());
    }
    for (auto& w : work) eng.fill(w, segs);

    using Item = std::pair<real, std::size_t>;
    std::priority_queue<Item> pq;
    real err = 0, l1 = 0, frozen = 0;
    for (std::size_t i = 0; i < work.size(); ++i) {
        err += work[i].err;
        l1 += work[i].l1;
        if (work[i].err > 0) pq.push({work[i].err, i});
    }
    long iter = 0;
    while (err > eng.tolerance(l1) && !pq.empty()) {
        if (static_cast<long>(work.size()) >= cfg.max_panels)
            throw QuadratureFailure("max_panels reached before the tolerance was met", static_cast<int>(ctx.idx),
                                    to_double(err));
        auto [e, i] = pq.top();
        pq.pop();
        Work& w = work[i];
        real m = (w.lo + w.hi) / 2;
        if (!(m > w.lo && m < w.hi) || (w.hi - w.lo) <= kTiny30 * (fabs(w.lo) + fabs(w.hi))) {
            frozen += w.err;
            err -= w.err;
            w.err = 0;
            if (frozen > eng.tolerance(l1))
                throw QuadratureFailure("panel width underflow near x = " + to_string(m, 12),
                                        static_cast<int>(ctx.idx), to_double(frozen));
            continue;
        }
        Work right;
        right.lo = m;
        right.hi = w.hi;
        right.seg = w.seg;
        err -= w.err;
        l1 -= w.l1;
        w.hi = m;
        eng.fill(w, segs);
        eng.fill(right, segs);
        err += w.err + right.err;
        l1 += w.l1 + right.l1;
        work.push_back(std::move(right));
        std::size_t j = work.size() - 1;
        if (work[i].err > 0) pq.push({work[i].err, i});
        if (work[j].err > 0) pq.push({work[j].err, j});
        if (++iter % 1024 == 0) {
            err = frozen;
            l1 = 0;
            for (auto& x : work) err += x.err, l1 += x.l1;
            err -= frozen;
        }
    }

    std::sort(work.begin(), work.end(), [](const Work& a, const Work& b) { return a.lo < b.lo; });
    // panels whose amplitude bound is far below the tolerance only cost time at eval
    real drop_budget = eng.tolerance(l1) * kDropFrac, dropped = 0;
    out.panels_.reserve(work.size());
    for (auto& w : work) {
        real bound = 0;
        for (auto& c : w.coef)
            for (auto& v : c) bound += abs(v);
        bound *= w.hi - w.lo;
        if (dropped + bound <= drop_budget) {
            dropped += bound;
            continue;
        }
        PreparedIntegral::Panel p;
        p.mid = (w.lo + w.hi) / 2;
        p.rad = (w.hi - w.lo) / 2;
        p.coef = std::move(w.coef);
        p.freqs = segs[w.seg].freqs.get();
        out.panels_.push_back(std::move(p));
    }
    out.l1_ = l1;
    out.err_ = err + frozen + dropped;
    return out;
}

cplx integrate_eps(const Expr& f, int var, const real& lo, const real& hi, const real& omega, const EvalCtx& outer,
                   const QuadratureConfig& cfg, const std::vector<real>& extra_points) {
    return prepare_integral(f, var, lo, hi, outer, cfg, extra_points).eval(omega);
}

namespace {

class IntegralOp : public LazyOp {
public:
    IntegralOp(Expr g, int var, Expr lo, Expr hi, QuadratureConfig cfg)
        : g_(std::move(g)), var_(var), lo_(std::move(lo)), hi_(std::move(hi)), cfg_(cfg) {
        int ga = arity_of(g_);
        arity_ = std::max({arity_of(lo_), arity_of(hi_), ga == var_ + 1 ? var_ : ga});
    }

    std::string describe() const override {
        return "(integral x" + std::to_string(var_) + " " + to_sexpr(lo_) + " " + to_sexpr(hi_) + " " + to_sexpr(g_) +
               ")";
    }

    cplx eval(const EvalCtx& ctx) const override {
        real lo = hft::eval(lo_, ctx).re, hi = hft::eval(hi_, ctx).re;
        return integrate_eps(g_, var_, lo, hi, 0, ctx, cfg_);
    }

    Expr derivative(int v) const override {
        using namespace sym;
        if (v == var_) return cnst(0.0);
        Expr r = cnst(0.0);
        Expr dg = hft::derivative(g_, v);
        if (!is_zero(dg)) r = lazy(std::make_shared<IntegralOp>(dg, var_, lo_, hi_, cfg_));
        Expr dhi = hft::derivative(hi_, v), dlo = hft::derivative(lo_, v);
        if (!is_zero(dhi)) r = add(r, mul(at(hi_), dhi));
        if (!is_zero(dlo)) r = sub(r, mul(at(lo_), dlo));
        return r;
    }

    int arity() const override { return arity_; }
    bool eps_invariant() const override {
        return hft::eps_invariant(g_) && hft::eps_invariant(lo_) && hft::eps_invariant(hi_);
    }

private:
    Expr at(const Expr& limit) const {
        int n = std::max(arity_of(g_), var_ + 1);
        std::vector<Expr> vars;
        for (int j = 0; j < n; ++j) vars.push_back(j == var_ ? limit : sym::var(j));
        return substitute(g_, vars);
    }

    Expr g_;
    int var_;
    Expr lo_, hi_;
    QuadratureConfig cfg_;
    int arity_;
};

Expr net_expr(const std::string& name, const GenNumber& x) { return sym::param(name, x); }

// Additive terms of e, pulling constant factors and divisors inside.
void summands(const Expr& e, const Expr& scale, std::vector<Expr>& out) {
    const Node& nd = *e;
    auto konst = [](const Expr& x) { return arity_of(x) == 0 && x->op != Op::Lazy; };
    switch (nd.op) {
        case Op::Add: summands(nd.kids[0], scale, out); summands(nd.kids[1], scale, out); return;
        case Op::Sub:
            summands(nd.kids[0], scale, out);
            summands(nd.kids[1], sym::neg(scale), out);
            return;
        case Op::Neg: summands(nd.kids[0], sym::neg(scale), out); return;
        case Op::Mul:
            if (konst(nd.kids[0])) return summands(nd.kids[1], sym::mul(scale, nd.kids[0]), out);
            if (konst(nd.kids[1])) return summands(nd.kids[0], sym::mul(scale, nd.kids[1]), out);
            break;
        case Op::Div:
            if (konst(nd.kids[1])) return summands(nd.kids[0], sym::div(scale, nd.kids[1]), out);
            break;
        default: break;
    }
    out.push_back(sym::mul(scale, e));
}

// Flatten products, and exponentials of sums, into factors.
void factors(const Expr& e, std::vector<Expr>& out) {
    const Node& nd = *e;
    if (nd.op == Op::Mul) {
        factors(nd.kids[0], out);
        factors(nd.kids[1], out);
        return;
    }
    if (nd.op == Op::Exp) {
        std::vector<Expr> terms;
        summands(nd.kids[0], sym::cnst(1.0), terms);
        if (terms.size() > 1) {
            for (auto& t : terms) out.push_back(sym::exp(t));
            return;
        }
    }
    out.push_back(e);
}

// f = prod_j f_j(x_j) ? (factor j depends on x_j only)
bool separate(const Expr& e, std::size_t n, std::vector<Expr>& parts) {
    std::vector<Expr> fs;
    factors(e, fs);
    parts.assign(n, sym::cnst(1.0));
    for (auto& f : fs) {
        int owner = -1;
        for (std::size_t j = 0; j < n; ++j)
            if (depends_on(f, static_cast<int>(j))) {
                if (owner >= 0) return false;
                owner = static_cast<int>(j);
            }
        if (f->op == Op::Lazy || f->op == Op::Apply) return false;
        parts[owner < 0 ? 0 : owner] = sym::mul(parts[owner < 0 ? 0 : owner], f);
    }
    return true;
}

}  // namespace

bool separate_variables(const Expr& e, std::size_t n, std::vector<Expr>& parts) {
    if (!separate(e, n, parts)) return false;
    for (std::size_t j = 1; j < n; ++j) {
        std::vector<Expr> v(n, sym::cnst(0.0));
        v[j] = sym::var(0);
        parts[j] = substitute(parts[j], v);
    }
    return true;
}

Expr integral_node(const Expr& g, int var, const Expr& lo, const Expr& hi, const QuadratureConfig& cfg) {
    return sym::lazy(std::make_shared<IntegralOp>(g, var, lo, hi, cfg));
}

GenComplex integrate_1d(const GSFunc& f, const GenNumber& a, const GenNumber& b, const QuadratureConfig& cfg) {
    cfg.validate();
    if (f.arity != 1) throw DomainError("integrate_1d needs an arity-1 function");
    if (order_compare(a, b) != OrderRel::leq) throw DomainError("integrate_1d needs a <= b");
    const Grid& g = a.grid();
    if (g->size() > 0 && constant_net(a) && constant_net(b) && eps_invariant(f.expr)) {
        std::size_t last = g->size() - 1;
        EvalCtx c{last, g.get(), nullptr, 0};
        cplx v = integrate_eps(f.expr, 0, a[last], b[last], 0, c, cfg);
        return GenComplex::from_fn(g, [&](std::size_t) { return v; });
    }
    return GenComplex::from_fn(g, [&](std::size_t i) {
        EvalCtx c{i, g.get(), nullptr, 0};
        return integrate_eps(f.expr, 0, a[i], b[i], 0, c, cfg);
    });
}

GenComplex integrate_box(const GSFunc& f, const GenBox& box, const QuadratureConfig& cfg) {
    cfg.validate();
    std::size_t n = box.dim();
    if (n == 0 || n != static_cast<std::size_t>(f.arity)) throw DomainError("box dimension differs from function arity");
    if (n > 3) throw CapabilityError("integrate_box supports at most 3 dimensions");
    for (std::size_t j = 0; j < n; ++j)
        if (order_compare(box.lo[j], box.hi[j]) != OrderRel::leq) throw DomainError("box edges are not ordered");
    if (n == 1) return integrate_1d(f, box.lo[0], box.hi[0], cfg);
    std::vector<Expr> parts;
    if (separate(f.expr, n, parts)) {
        // Fubini on a product of one-variable factors
        GenComplex r = integrate_1d(GSFunc(parts[0], 1, {}), box.lo[0], box.hi[0], cfg);
        for (std::size_t j = 1; j < n; ++j) {
            Expr pj = substitute(parts[j], [&] {
                std::vector<Expr> v(n, sym::cnst(0.0));
                v[j] = sym::var(0);
                return v;
            }());
            r = r * integrate_1d(GSFunc(pj, 1, {}), box.lo[j], box.hi[j], cfg);
        }
        return r;
    }
    Expr e = f.expr;
    for (std::size_t j = n; j-- > 1;)
        e = integral_node(e, static_cast<int>(j), net_expr("lo" + std::to_string(j), box.lo[j]),
                          net_expr("hi" + std::to_string(j), box.hi[j]), cfg);
    GSFunc outer(e, 1, {});
    return integrate_1d(outer, box.lo[0], box.hi[0], cfg);
}

GenComplex integrate_compact_support(const GSFunc& f, const GenBox& hint, const QuadratureConfig& cfg) {
    GenComplex i1 = integrate_box(f, hint, cfg);
    GenBox wide;
    for (std::size_t j = 0; j < hint.dim(); ++j) {
        GenNumber c = real(0.5) * (hint.lo[j] + hint.hi[j]);
        GenNumber w = hint.hi[j] - hint.lo[j];
        wide.lo.push_back(c - w);
        wide.hi.push_back(c + w);
    }
    GenComplex i2 = integrate_box(f, wide, cfg);
    const Grid& g = i1.grid();
    if (!eq_up_to_negligible(i1, i2, g->q_check))
        throw SupportError("integral changes when the support hint is doubled; the function is not supported in the hint");
    return i1;
}

GenNumber p_norm(const GSFunc& f, const GenNumber& p, const GenBox& hint, const QuadratureConfig& cfg) {
    const Grid& g = p.grid();
    for (std::size_t i = 0; i < g->size(); ++i)
        if (!(p[i] >= 1)) throw DomainError("p_norm needs p >= 1");
    if (magnitude(p).cls != Magnitude::finite) throw DomainError("p_norm needs a finite exponent p");
    Expr e = sym::pow(sym::abs(f.expr), sym::param("p", p));
    GSFunc fp(e, f.arity, f.domain);
    GenComplex v = integrate_box(fp, hint, cfg);
    return GenNumber::from_fn(g, [&](std::size_t i) { return boost::multiprecision::pow(v.re()[i], 1 / p[i]); });
}

}  // namespace hft
