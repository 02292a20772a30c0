#include "hft/applications.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_poly.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace hft {

namespace {

using boost::multiprecision::fabs;
using namespace sym;

// Evaluates its expression as a black box: the integrator will not split it into oscillatory groups.
class OpaqueOp : public LazyOp {
public:
    explicit OpaqueOp(Expr e) : e_(std::move(e)) {}
    std::string describe() const override { return "(opaque " + to_sexpr(e_) + ")"; }
    cplx eval(const EvalCtx& ctx) const override { return hft::eval(e_, ctx); }
    Expr derivative(int v) const override { return lazy(std::make_shared<OpaqueOp>(hft::derivative(e_, v))); }
    int arity() const override { return arity_of(e_); }
    bool eps_invariant() const override { return hft::eps_invariant(e_); }

private:
    Expr e_;
};

// num / den, refusing non-invertible denominators
class GuardedDivOp : public LazyOp {
public:
    GuardedDivOp(Expr n, Expr d, std::string what) : n_(std::move(n)), d_(std::move(d)), what_(std::move(what)) {}
    std::string describe() const override { return "(guarded-div " + to_sexpr(n_) + " " + to_sexpr(d_) + ")"; }
    cplx eval(const EvalCtx& ctx) const override {
        cplx d = hft::eval(d_, ctx);
        real floor = boost::multiprecision::pow(ctx.rho(), ctx.grid->n_max);
        if (!(abs(d) > floor)) {
            double w = ctx.nx ? to_double(ctx.x[0]) : 0;
            throw SingularSymbolError(what_ + " is not invertible at w = " + std::to_string(w) + ", eps index " +
                                          std::to_string(ctx.idx),
                                      w, static_cast<int>(ctx.idx));
        }
        return hft::eval(n_, ctx) / d;
    }
    Expr derivative(int v) const override {
        Expr dn = hft::derivative(n_, v), dd = hft::derivative(d_, v);
        return lazy(std::make_shared<GuardedDivOp>(sub(mul(dn, d_), mul(n_, dd)), mul(d_, d_), what_));
    }
    int arity() const override { return std::max(arity_of(n_), arity_of(d_)); }
    bool eps_invariant() const override { return hft::eps_invariant(n_) && hft::eps_invariant(d_); }

private:
    Expr n_, d_;
    std::string what_;
};

// Remembers values by (grid index, arguments); the moment integrals revisit the same nodes.
class MemoOp : public LazyOp {
public:
    explicit MemoOp(Expr e) : e_(std::move(e)) {}
    std::string describe() const override { return to_sexpr(e_); }
    cplx eval(const EvalCtx& ctx) const override {
        std::vector<real> key(ctx.x, ctx.x + ctx.nx);
        key.push_back(real(static_cast<double>(ctx.idx)));
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = memo_.find(key);
            if (it != memo_.end()) return it->second;
        }
        cplx v = hft::eval(e_, ctx);
        std::lock_guard<std::mutex> lock(mu_);
        memo_.emplace(std::move(key), v);
        return v;
    }
    Expr derivative(int v) const override { return hft::derivative(e_, v); }
    int arity() const override { return arity_of(e_); }
    bool eps_invariant() const override { return hft::eps_invariant(e_); }

private:
    Expr e_;
    mutable std::mutex mu_;
    mutable std::map<std::vector<real>, cplx> memo_;
};

using Windows = std::vector<std::vector<std::pair<real, real>>>;  // per eps, sorted, disjoint

// x -> (2 pi)^{-1} int_{-h}^{h} S(w) e^{i w x} dw, with S integrated as a black box inside the windows
class SymbolInverseOp : public LazyOp {
public:
    SymbolInverseOp(Expr S, GenNumber h, std::shared_ptr<const Windows> win, QuadratureConfig cfg)
        : S_(std::move(S)), h_(std::move(h)), win_(std::move(win)), cfg_(cfg), cache_(h_.size()) {}

    std::string describe() const override { return "(symbol-inverse " + to_sexpr(S_) + ")"; }

    cplx eval(const EvalCtx& ctx) const override {
        const auto& P = prepared(ctx);
        cplx v = 0;
        for (const auto& p : P) v += p.eval(ctx.x[0]);
        return v / cplx(kTwoPi);
    }

    Expr derivative(int v) const override {
        if (v != 0) return cnst(0.0);
        Expr dS = mul(mul(imag_unit(), var(0)), S_);
        return lazy(std::make_shared<SymbolInverseOp>(dS, h_, win_, cfg_));
    }

    int arity() const override { return 1; }

private:
    const std::vector<PreparedIntegral>& prepared(const EvalCtx& ctx) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto& slot = cache_.at(ctx.idx);
        if (!slot) {
            auto v = std::make_shared<std::vector<PreparedIntegral>>();
            EvalCtx c{ctx.idx, ctx.grid, nullptr, 0};
            const real& h = h_[ctx.idx];
            Expr raw = lazy(std::make_shared<OpaqueOp>(S_));
            real cur = -h;
            if (win_)
                for (const auto& [a, b] : (*win_)[ctx.idx]) {
                    real lo = std::max(a, -h), hi = std::min(b, h);
                    if (lo >= hi) continue;
                    if (lo > cur) v->push_back(prepare_integral(S_, 0, cur, lo, c, cfg_));
                    v->push_back(prepare_integral(raw, 0, lo, hi, c, cfg_));
                    cur = hi;
                }
            if (cur < h) v->push_back(prepare_integral(S_, 0, cur, h, c, cfg_));
            slot = v;
        }
        return *slot;
    }

    Expr S_;
    GenNumber h_;
    std::shared_ptr<const Windows> win_;
    QuadratureConfig cfg_;
    mutable std::mutex mu_;
    mutable std::vector<std::shared_ptr<std::vector<PreparedIntegral>>> cache_;
};

GSFunc symbol_inverse(const Expr& S, const GenNumber& h, std::shared_ptr<const Windows> win,
                      const QuadratureConfig& cfg) {
    return GSFunc(lazy(std::make_shared<SymbolInverseOp>(S, h, std::move(win), cfg)), 1, {}, true);
}

double order_span(const GenNumber& a, const GenNumber& b) { return sharp_order(a) - sharp_order(b); }

void finish(ReconstructionReport& r, const std::function<cplx(std::size_t, const real&)>& reference) {
    const Grid& g = r.probes.front().grid();
    for (std::size_t j = 0; j < r.solutions.size(); ++j) {
        std::vector<GenComplex> vals;
        for (const GenNumber& x : r.probes) vals.push_back(eval_expr(r.solutions[j].expr, {x}, g));
        r.values.push_back(vals);
        if (!reference) continue;
        std::vector<GenNumber> errs;
        GenNumber mx = GenNumber::constant(g, 0);
        for (std::size_t p = 0; p < r.probes.size(); ++p) {
            const GenNumber& x = r.probes[p];
            GenComplex ref = GenComplex::from_fn(g, [&](std::size_t i) { return reference(i, x[i]); });
            errs.push_back(abs(vals[p] - ref));
            mx = max(mx, errs.back());
        }
        r.errors.push_back(errs);
        r.max_error.push_back(mx);
        r.sharp_orders.push_back(sharp_order(mx));
    }
    if (r.sharp_orders.size() >= 2) {
        r.order_gain = r.sharp_orders.back() - r.sharp_orders.front();
        r.monotone = true;
        for (std::size_t j = 0; j + 1 < r.sharp_orders.size(); ++j) {
            double need = 0.9 * order_span(r.h_sequence[j], r.h_sequence[j + 1]);
            if (!(r.sharp_orders[j + 1] - r.sharp_orders[j] >= need)) r.monotone = false;
        }
    }
}

Expr cparam(const std::string& name, const GenComplex& v) { return param(name, v); }

}  // namespace

void OdeProblem::validate() const {
    if (a.size() < 2) throw DomainError("ODE needs order >= 1 (coefficients a_0..a_n)");
    std::size_t n = a.size() - 1;
    if (y_plus_k.size() != n || y_minus_k.size() != n)
        throw DomainError("ODE needs y^(p)(+-k) for p = 0..n-1");
    if (k.size() == 0) throw DomainError("ODE needs the window k");
    if (!invertible(abs(a.back()))) throw PreconditionError("leading coefficient a_n is not invertible");
}

GSFunc ode_symbol(const OdeProblem& p) {
    Expr P = cnst(0.0);
    Expr iw = mul(imag_unit(), var(0));
    for (std::size_t j = 0; j < p.a.size(); ++j)
        P = add(P, mul(cparam("a" + std::to_string(j), p.a[j]), pow_int(iw, static_cast<int>(j))));
    return GSFunc(P, 1, {}, true);
}

GSFunc ode_boundary_term(const OdeProblem& p) {
    Expr kp = param("k", p.k);
    Expr iw = mul(imag_unit(), var(0));
    Expr em = expi(neg(mul(kp, var(0)))), ep = expi(mul(kp, var(0)));
    std::size_t n = p.a.size() - 1;
    std::vector<Expr> dl(n);
    for (std::size_t q = 0; q < n; ++q)
        dl[q] = sub(mul(cparam("yk" + std::to_string(q), p.y_plus_k[q]), em),
                    mul(cparam("ymk" + std::to_string(q), p.y_minus_k[q]), ep));
    Expr D = cnst(0.0);
    for (std::size_t j = 1; j <= n; ++j) {
        Expr inner = cnst(0.0);
        for (std::size_t q = 1; q <= j; ++q) inner = add(inner, mul(pow_int(iw, static_cast<int>(j - q)), dl[q - 1]));
        D = add(D, mul(cparam("a" + std::to_string(j), p.a[j]), inner));
    }
    return GSFunc(D, 1, {}, true);
}

std::vector<std::vector<real>> real_symbol_roots(const OdeProblem& p) {
    p.validate();
    const Grid& g = p.k.grid();
    std::size_t n = p.a.size() - 1;
    static const cplx ipow[4] = {cplx(1), cplx(0, 1), cplx(-1), cplx(0, -1)};
    std::vector<std::vector<real>> out(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) {
        std::vector<cplx> b(n + 1);
        for (std::size_t j = 0; j <= n; ++j) b[j] = p.a[j][i] * ipow[j & 3];
        auto B = [&](const cplx& w, cplx& d) {
            cplx v = 0;
            d = 0;
            for (std::size_t j = n + 1; j-- > 0;) {
                d = d * w + v;
                v = v * w + b[j];
            }
            return v;
        };
        // |B|^2 on the real line has real coefficients: q_m = sum_j b_j conj(b_{m-j})
        std::vector<double> q(2 * n + 1, 0.0);
        real qmax = 0;
        std::vector<real> qr(2 * n + 1, 0);
        for (std::size_t m = 0; m <= 2 * n; ++m) {
            cplx s = 0;
            for (std::size_t j = 0; j <= n; ++j)
                if (m >= j && m - j <= n) s += b[j] * conj(b[m - j]);
            qr[m] = s.re;
            qmax = std::max(qmax, fabs(s.re));
        }
        for (std::size_t m = 0; m <= 2 * n; ++m) q[m] = to_double(qr[m] / qmax);
        std::vector<double> z(4 * n);
        gsl_error_handler_t* old = gsl_set_error_handler_off();
        gsl_poly_complex_workspace* ws = gsl_poly_complex_workspace_alloc(2 * n + 1);
        int status = gsl_poly_complex_solve(q.data(), 2 * n + 1, ws, z.data());
        gsl_poly_complex_workspace_free(ws);
        gsl_set_error_handler(old);
        if (status != GSL_SUCCESS) throw CapabilityError("root finding for the ODE symbol did not converge");
        std::vector<real> found;
        for (std::size_t r = 0; r < 2 * n; ++r) {
            cplx w(z[2 * r], z[2 * r + 1]), d;
            for (int it = 0; it < 60; ++it) {
                cplx v = B(w, d);
                if (abs(d) == 0) break;
                cplx step = v / d;
                w = w - step;
                if (abs(step) <= real(1e-32) * (1 + abs(w))) break;
            }
            cplx v = B(w, d);
            real scale = 0, aw = abs(w), pw = 1;
            for (std::size_t j = 0; j <= n; ++j, pw *= aw) scale += abs(b[j]) * pw;
            if (abs(v) > real(1e-12) * scale) continue;  // a conjugate partner of a non-real root
            if (fabs(w.im) > real(1e-12) * (1 + aw)) continue;
            bool dup = false;
            for (const real& f : found) dup = dup || fabs(f - w.re) <= real(1e-10) * (1 + aw);
            if (!dup) found.push_back(w.re);
        }
        std::sort(found.begin(), found.end());
        out[i] = found;
    }
    return out;
}

ReconstructionReport solve_const_coeff_ode(const OdeProblem& p, const std::vector<GenNumber>& h_list,
                                           const std::vector<GenNumber>& x_probes,
                                           const std::function<cplx(std::size_t, const real&)>& reference,
                                           const QuadratureConfig& cfg) {
    p.validate();
    if (h_list.empty() || x_probes.empty()) throw DomainError("ODE solve needs h values and probes");
    const Grid& g = p.k.grid();
    Expr P = ode_symbol(p).expr;
    Expr D = ode_boundary_term(p).expr;
    Expr N = neg(D);
    Expr Fg;
    if (p.g.expr) {
        Fg = hft::hft(p.g, p.k, cfg).func.expr;
        N = add(Fg, N);
    }
    Expr S = div(N, P);

    // real roots of P must be removable: the numerator vanishes there as well
    auto roots = real_symbol_roots(p);
    real hmax = 0;
    for (const GenNumber& h : h_list)
        for (std::size_t i = 0; i < g->size(); ++i) hmax = std::max(hmax, h[i]);
    auto windows = std::make_shared<Windows>(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) {
        const auto& rs = roots[i];
        for (std::size_t r = 0; r < rs.size(); ++r) {
            const real& w = rs[r];
            if (fabs(w) >= hmax) continue;
            EvalCtx c{i, g.get(), &w, 1};
            cplx nv = eval(N, c);
            // scale: size of the individual boundary contributions at w
            real scale = 0;
            for (std::size_t q = 0; q < p.y_plus_k.size(); ++q)
                scale += abs(p.y_plus_k[q][i]) + abs(p.y_minus_k[q][i]);
            for (std::size_t j = 0; j < p.a.size(); ++j) scale *= std::max(real(1), abs(p.a[j][i]) * (1 + fabs(w)));
            if (Fg) scale += abs(eval(Fg, c));
            if (abs(nv) > real(1e-20) * std::max(scale, real(1)))
                throw SingularSymbolError("symbol P vanishes at a real frequency where the data do not", to_double(w),
                                          static_cast<int>(i));
            real half = real(0.5);
            if (r > 0) half = std::min(half, (w - rs[r - 1]) / 2);
            if (r + 1 < rs.size()) half = std::min(half, (rs[r + 1] - w) / 2);
            (*windows)[i].push_back({w - half, w + half});
        }
    }

    ReconstructionReport rep;
    rep.probes = x_probes;
    rep.h_sequence = h_list;
    for (const GenNumber& h : h_list) rep.solutions.push_back(symbol_inverse(S, h, windows, cfg));
    finish(rep, reference);

    // plug the last reconstruction back into the equation
    const Expr& y = rep.solutions.back().expr;
    Expr op = cnst(0.0), dy = y;
    for (std::size_t j = 0; j < p.a.size(); ++j) {
        if (j) dy = derivative(dy, 0);
        op = add(op, mul(cparam("a" + std::to_string(j), p.a[j]), dy));
    }
    if (p.g.expr) op = sub(op, p.g.expr);
    for (const GenNumber& x : x_probes) {
        rep.residuals.push_back(eval_expr(op, {x}, g));
        rep.residual_class.push_back(magnitude(abs(rep.residuals.back())));
    }
    return rep;
}

ReconstructionReport solve_exp_ode(const GenComplex& c, const GenNumber& k, const std::vector<GenNumber>& h_list,
                                   const std::vector<GenNumber>& x_probes, bool zero_delta,
                                   const QuadratureConfig& cfg) {
    const Grid& g = k.grid();
    OdeProblem p;
    p.a = {GenComplex(GenNumber::constant(g, -1)), GenComplex(GenNumber::constant(g, 1))};
    p.k = k;
    GenComplex zero(GenNumber::constant(g, 0));
    p.y_plus_k = {zero_delta ? zero : c * GenComplex(exp(k))};
    p.y_minus_k = {zero_delta ? zero : c * GenComplex(exp(-k))};
    std::function<cplx(std::size_t, const real&)> ref = [c](std::size_t i, const real& x) {
        return c[i] * cplx(boost::multiprecision::exp(x));
    };
    return solve_const_coeff_ode(p, h_list, x_probes, ref, cfg);
}

WaveReport wave_dalembert(const GSFunc& f, const GSFunc& g, const GenNumber& c,
                          const std::vector<std::pair<GenNumber, GenNumber>>& probes, const QuadratureConfig& cfg) {
    if (f.arity != 1 || g.arity != 1) throw DomainError("wave data f and g are functions of one variable");
    if (!invertible(c)) throw PreconditionError("wave speed must be invertible");
    const Grid& grid = c.grid();
    Expr cp = param("c", c);
    Expr x = var(0), t = var(1);
    Expr lo = sub(x, mul(cp, t)), hi = add(x, mul(cp, t));
    Expr half = cnst(0.5);
    Expr u = mul(half, add(substitute(f.expr, {lo}), substitute(f.expr, {hi})));
    if (!is_zero(g.expr)) {
        Expr gs = substitute(g.expr, {var(2)});
        Expr I = integral_node(gs, 2, lo, hi, cfg);
        u = add(u, div(mul(half, I), cp));
    }
    WaveReport rep;
    rep.u = GSFunc(u, 2, {});
    rep.probes = probes;
    Expr res = sub(derivative(u, {0, 2}), mul(mul(cp, cp), derivative(u, {2, 0})));
    Expr ut = derivative(u, {0, 1});
    GenNumber zero = GenNumber::constant(grid, 0);
    rep.residual_negligible = true;
    for (const auto& [px, pt] : probes) {
        rep.values.push_back(eval_expr(u, {px, pt}, grid));
        rep.residuals.push_back(eval_expr(res, {px, pt}, grid));
        rep.residual_negligible = rep.residual_negligible && negligible(abs(rep.residuals.back()), 4);
        rep.initial_value.push_back(eval_expr(u, {px, zero}, grid) - eval_expr(f.expr, {px}, grid));
        rep.initial_rate.push_back(eval_expr(ut, {px, zero}, grid) - eval_expr(g.expr, {px}, grid));
    }
    return rep;
}

GSFunc heat_kernel(const GenNumber& a) {
    Expr ap = param("a", a);
    Expr x = var(0), t = var(1);
    Expr e = exp(neg(div(pow_int(x, 2), mul(mul(cnst(4.0), pow_int(ap, 2)), t))));
    Expr norm = mul(mul(cnst(2.0), ap), sqrt(mul(cnst(kPi), t)));
    return GSFunc(div(e, norm), 2, {});
}

HeatReport heat_solution(const GSFunc& f, const GenBox& hint_f, const GenNumber& a,
                         const std::vector<std::pair<GenNumber, GenNumber>>& probes, const GenNumber& k_in,
                         const QuadratureConfig& cfg) {
    if (f.arity != 1) throw DomainError("heat data f is a function of one variable");
    const Grid& g = a.grid();
    GenNumber k = k_in.size() ? k_in : -log(GenNumber::rho(g));
    HeatReport rep;
    // t <= -N log(rho) / (a^2 k^2) on the tail for some N <= n_max
    for (const auto& pr : probes) {
        const GenNumber& t = pr.second;
        int need = 0;
        for (std::size_t i = g->tail_begin(); i < g->size(); ++i) {
            if (!(t[i] > 0)) throw PreconditionError("heat probes need t > 0");
            real unit = -boost::multiprecision::log(g->rho[i]) / (a[i] * a[i] * k[i] * k[i]);
            real N = boost::multiprecision::ceil(t[i] / unit);
            need = std::max(need, static_cast<int>(to_double(N)));
        }
        if (need > g->n_max)
            throw PreconditionError("t lies outside the validity window -N log(rho)/(a^2 k^2) for N <= n_max");
        rep.window_N = std::max(rep.window_N, std::max(need, 1));
    }
    rep.u = convolve(f, heat_kernel(a), hint_f, cfg);
    rep.probes = probes;
    Expr ap = param("a", a);
    Expr res = sub(derivative(rep.u.expr, {0, 1}), mul(pow_int(ap, 2), derivative(rep.u.expr, {2, 0})));
    rep.residual_negligible = true;
    for (const auto& [px, pt] : probes) {
        rep.values.push_back(eval_expr(rep.u.expr, {px, pt}, g));
        rep.residuals.push_back(eval_expr(res, {px, pt}, g));
        rep.residual_negligible = rep.residual_negligible && negligible(abs(rep.residuals.back()), 4);
    }
    return rep;
}

Moments moments(const GSFunc& u, const GenNumber& lo, const GenNumber& hi, const QuadratureConfig& cfg) {
    Expr x = var(0);
    Expr w = lazy(std::make_shared<MemoOp>(u.expr));
    GenNumber m0 = integrate_1d(GSFunc(w, 1, {}), lo, hi, cfg).re();
    GenNumber m1 = integrate_1d(GSFunc(mul(x, w), 1, {}), lo, hi, cfg).re();
    GenNumber m2 = integrate_1d(GSFunc(mul(pow_int(x, 2), w), 1, {}), lo, hi, cfg).re();
    Moments m;
    m.mass = m0;
    m.mean = m1 / m0;
    m.variance = m2 / m0 - m.mean * m.mean;
    return m;
}

ConvolutionEqReport solve_convolution_eq(const GSFunc& f, const GenBox& hint_f, const GSFunc& g, const GenNumber& k,
                                         const std::vector<GenNumber>& h_list, const std::vector<GenNumber>& x_probes,
                                         const std::function<cplx(std::size_t, const real&)>& reference,
                                         const QuadratureConfig& cfg) {
    if (h_list.empty() || x_probes.empty()) throw DomainError("convolution equation needs h values and probes");
    const Grid& grid = k.grid();
    Expr Ff = hft::hft(f, k, cfg).func.expr;
    Expr Fg = hft::hft(g, k, cfg).func.expr;
    // fail early on the symbol at the window edges and the origin
    for (const GenNumber& h : h_list)
        for (const GenNumber& w : {GenNumber::constant(grid, 0), h, -h, real(0.5) * h}) {
            GenNumber m = abs(eval_expr(Ff, {w}, grid));
            for (std::size_t i = 0; i < grid->size(); ++i)
                if (!(m[i] > boost::multiprecision::pow(grid->rho[i], grid->n_max)))
                    throw SingularSymbolError("transform of the kernel is not invertible", to_double(w[i]),
                                              static_cast<int>(i));
        }
    Expr S = lazy(std::make_shared<GuardedDivOp>(Fg, Ff, "transform of the kernel"));
    ConvolutionEqReport rep;
    rep.recon.probes = x_probes;
    rep.recon.h_sequence = h_list;
    for (const GenNumber& h : h_list) rep.recon.solutions.push_back(symbol_inverse(S, h, nullptr, cfg));
    finish(rep.recon, reference);

    const GSFunc& y = rep.recon.solutions.back();
    GSFunc fy = convolve(f, y, hint_f, cfg);
    GSFunc band = symbol_inverse(Fg, h_list.back(), nullptr, cfg);
    for (const GenNumber& x : x_probes) {
        GenComplex v = eval_expr(fy.expr, {x}, grid);
        rep.band_limited_residual.push_back(v - eval_expr(band.expr, {x}, grid));
        rep.classical_residual.push_back(v - eval_expr(g.expr, {x}, grid));
        rep.recon.residuals.push_back(rep.band_limited_residual.back());
        rep.recon.residual_class.push_back(magnitude(abs(rep.band_limited_residual.back())));
    }
    return rep;
}

}  // namespace hft
