#include "hft/hft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace hft {

namespace {

using boost::multiprecision::fabs;
using namespace sym;

class TransformOp : public LazyOp {
public:
    TransformOp(Expr f, int n, GenNumber k, int sign, real scale, QuadratureConfig cfg)
        : f_(std::move(f)), n_(n), k_(std::move(k)), sign_(sign), scale_(scale), cfg_(cfg) {
        if (n_ == 1) parts_ = {f_};
        else if (!separate_variables(f_, n_, parts_)) parts_.clear();
        if (parts_.empty()) {
            // nested lazy integrals: x_j lives in slot n + j
            std::vector<Expr> xs;
            for (int j = 0; j < n_; ++j) xs.push_back(var(n_ + j));
            Expr phase = cnst(0.0);
            for (int j = 0; j < n_; ++j) phase = add(phase, mul(var(j), var(n_ + j)));
            Expr e = mul(substitute(f_, xs), expi(mul(cnst(real(sign_)), phase)));
            Expr kp = param("k", k_);
            for (int j = 2 * n_ - 1; j >= n_; --j) e = integral_node(e, j, neg(kp), kp, cfg_);
            nested_ = e;
        }
        cache_.resize(k_.size());
        // eps-invariant amplitudes and growing windows: one preparation over the widest window
        shared_ = !parts_.empty();
        for (const Expr& p : parts_) shared_ = shared_ && hft::eps_invariant(p);
        for (std::size_t i = 1; shared_ && i < k_.size(); ++i) shared_ = k_[i] >= k_[i - 1] && k_[0] > 0;
    }

    std::string describe() const override {
        return std::string(sign_ < 0 ? "(hft " : "(ihft ") + to_sexpr(f_) + ")";
    }

    cplx eval(const EvalCtx& ctx) const override {
        if (parts_.empty()) return scale_ * hft::eval(nested_, ctx);
        cplx v = scale_;
        if (shared_) {
            const auto& P = prepared_shared(ctx);
            const real& k = k_[ctx.idx];
            for (int j = 0; j < n_; ++j) v *= P[j].eval(real(sign_) * ctx.x[j], -k, k);
            return v;
        }
        const auto& P = prepared(ctx);
        for (int j = 0; j < n_; ++j) v *= P[j].eval(real(sign_) * ctx.x[j]);
        return v;
    }

    Expr derivative(int v) const override {
        if (v >= n_) return cnst(0.0);
        Expr g = mul(mul(cnst(cplx(0, real(sign_))), var(v)), f_);
        return lazy(std::make_shared<TransformOp>(g, n_, k_, sign_, scale_, cfg_));
    }

    int arity() const override { return n_; }

    bool eps_invariant() const override { return shared_ && constant_net(k_); }

private:
    const std::vector<PreparedIntegral>& prepared(const EvalCtx& ctx) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto& slot = cache_.at(ctx.idx);
        if (!slot) {
            auto v = std::make_shared<std::vector<PreparedIntegral>>();
            EvalCtx c{ctx.idx, ctx.grid, nullptr, 0};
            const real& k = k_[ctx.idx];
            for (int j = 0; j < n_; ++j) v->push_back(prepare_integral(parts_[j], 0, -k, k, c, cfg_));
            slot = v;
        }
        return *slot;
    }

    const std::vector<PreparedIntegral>& prepared_shared(const EvalCtx& ctx) const {
        std::lock_guard<std::mutex> lock(mu_);
        if (!whole_) {
            auto v = std::make_shared<std::vector<PreparedIntegral>>();
            // the last index has the strictest tolerance
            std::size_t last = k_.size() - 1;
            EvalCtx c{last, ctx.grid, nullptr, 0};
            std::vector<real> cuts;
            for (std::size_t i = 0; i < last; ++i) cuts.push_back(-k_[i]), cuts.push_back(k_[i]);
            const real& k = k_[last];
            for (int j = 0; j < n_; ++j) v->push_back(prepare_integral(parts_[j], 0, -k, k, c, cfg_, cuts));
            whole_ = v;
        }
        return *whole_;
    }

    Expr f_;
    int n_;
    GenNumber k_;
    int sign_;
    real scale_;
    QuadratureConfig cfg_;
    std::vector<Expr> parts_;
    Expr nested_;
    mutable std::mutex mu_;
    mutable std::vector<std::shared_ptr<std::vector<PreparedIntegral>>> cache_;
    bool shared_ = false;
    mutable std::shared_ptr<std::vector<PreparedIntegral>> whole_;
};

std::string net_canonical(const GenNumber& x) {
    std::string s;
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + to_string(x[i], 36);
    return s;
}

Expr make_transform(const Expr& f, int n, const GenNumber& k, int sign, const QuadratureConfig& cfg) {
    real scale = sign < 0 ? real(1) : 1 / boost::multiprecision::pow(kTwoPi, real(n));
    return lazy(std::make_shared<TransformOp>(f, n, k, sign, scale, cfg));
}

TransformResult transform(const GSFunc& f, const GenNumber& k, int sign, const QuadratureConfig& cfg) {
    cfg.validate();
    if (f.arity < 1) throw DomainError("transform needs arity >= 1");
    if (k.size() == 0) throw PreconditionError("transform needs a window k");
    MagnitudeClass m = magnitude(k);
    if (m.cls != Magnitude::infinite) throw PreconditionError("hyperfinite transform needs an infinite k");
    for (std::size_t i = 0; i < f.domain.dim(); ++i) {
        if (order_compare(f.domain.lo[i], -k) != OrderRel::leq || order_compare(k, f.domain.hi[i]) != OrderRel::leq)
            throw PreconditionError("function domain does not contain [-k,k]^n");
    }
    TransformResult r;
    r.func = GSFunc(make_transform(f.expr, f.arity, k, sign, cfg), f.arity, {}, true);
    r.k = k;
    r.source_hash = sha256_hex(std::string(sign < 0 ? "hft|" : "ihft|") + canonical_expr(f.expr) + "|" +
                               net_canonical(k) + "|" + cfg.canonical());
    return r;
}

GenNumber absmax(const GenNumber& a, const GenNumber& b) {
    if (a.size() == 0) return b;
    return max(a, b);
}

GenComplex at(const GSFunc& f, const GenNumber& w) { return eval_expr(f.expr, {w}, w.grid()); }

// tail median of x_i * h_i
double tail_median_product(const GenNumber& x, const GenNumber& h) {
    const Grid& g = x.grid();
    std::vector<double> v;
    for (std::size_t i = g->tail_begin(); i < g->size(); ++i) v.push_back(to_double(x[i] * h[i]));
    std::sort(v.begin(), v.end());
    return v.empty() ? 0 : v[v.size() / 2];
}

// sample points for sup estimates on [-k,k]: log-spaced around 0 and uniform
std::vector<real> sup_samples(const real& k) {
    std::vector<real> xs{0};
    for (int m = -60; m <= 80; ++m) {
        real r = boost::multiprecision::ldexp(real(1), m);
        if (r > k) break;
        for (int s = 0; s < 4; ++s) {
            real x = r * (1 + real(s) / 4);
            if (x > k) break;
            xs.push_back(x);
            xs.push_back(-x);
        }
    }
    for (int j = -200; j <= 200; ++j) xs.push_back(k * j / 200);
    return xs;
}

GenNumber sup_abs(const Expr& f, const GenNumber& k) {
    const Grid& g = k.grid();
    return GenNumber::from_fn(g, [&](std::size_t i) {
        real m = 0;
        for (const real& x : sup_samples(k[i])) {
            EvalCtx c{i, g.get(), &x, 1};
            m = std::max(m, abs(hft::eval(f, c)));
        }
        return m;
    });
}

void finish_convergence(ConvergenceReport& r) {
    r.sharp_orders.clear();
    r.fitted_C.clear();
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
        r.sharp_orders.push_back(sharp_order(r.errors[i]));
        r.fitted_C.push_back(tail_median_product(r.errors[i], r.h_sequence[i]));
    }
    r.monotone = r.errors.size() >= 2;
    for (std::size_t i = 0; i + 1 < r.errors.size(); ++i) {
        double need = 0.9 * (sharp_order(r.h_sequence[i]) - sharp_order(r.h_sequence[i + 1]));
        double gain = r.sharp_orders[i + 1] - r.sharp_orders[i];
        if (!(gain >= need)) r.monotone = false;
    }
    // single C for error ~ C / h: geometric mean of the per-h constants
    double lc = 0;
    int cnt = 0;
    for (double c : r.fitted_C)
        if (c > 0) {
            lc += std::log(c);
            ++cnt;
        }
    double C = cnt ? std::exp(lc / cnt) : 0;
    std::ostringstream os;
    os.precision(4);
    os << "error ~ C/h with C = " << C << " (per h:";
    for (double c : r.fitted_C) os << " " << c;
    os << "); sharp orders:";
    for (double s : r.sharp_orders) os << " " << s;
    r.estimated_rate = os.str();
    // every per-h constant must sit within a factor 3 of its bound
    r.rate_consistent = true;
    for (std::size_t i = 0; i < r.bound_C.size() && i < r.fitted_C.size(); ++i) {
        double B = r.bound_C[i], c = r.fitted_C[i];
        if (B > 0 && !(c >= B / 3 && c <= 3 * B)) r.rate_consistent = false;
    }
    r.passes = r.monotone && r.rate_consistent;
}

}  // namespace

TransformResult hft(const GSFunc& f, const GenNumber& k, const QuadratureConfig& cfg) { return transform(f, k, -1, cfg); }

TransformResult ihft(const GSFunc& g, const GenNumber& k, const QuadratureConfig& cfg) { return transform(g, k, 1, cfg); }

GSFunc dirichlet_delta(const GenNumber& h, int n) {
    if (n < 1) throw DomainError("dirichlet_delta needs n >= 1");
    if (magnitude(h).cls != Magnitude::infinite) throw PreconditionError("Dirichlet delta needs an infinite h");
    Expr hp = param("h", h);
    Expr e = cnst(1.0);
    for (int j = 0; j < n; ++j) e = mul(e, mul(div(hp, cnst(kPi)), sinc(mul(hp, var(j)))));
    return GSFunc(e, n, {});
}

GSFunc delta_term(const GSFunc& f, const GenNumber& k, int j, const QuadratureConfig& cfg) {
    int n = f.arity;
    if (j < 0 || j >= n) throw DomainError("delta_term: coordinate out of range");
    if (n > 2) throw CapabilityError("boundary terms are implemented for n <= 2");
    Expr kp = param("k", k);
    if (n == 1) {
        Expr fk = substitute(f.expr, {kp}), fm = substitute(f.expr, {neg(kp)});
        Expr e = sub(mul(fk, expi(neg(mul(kp, var(0))))), mul(fm, expi(mul(kp, var(0)))));
        return GSFunc(e, 1, {}, true);
    }
    int o = 1 - j;
    auto trace = [&](const Expr& edge) {
        std::vector<Expr> v(2);
        v[j] = edge;
        v[o] = var(0);
        Expr tr = substitute(f.expr, v);
        Expr T = make_transform(tr, 1, k, -1, cfg);
        std::vector<Expr> w{var(o)};
        return substitute(T, w);
    };
    Expr e = sub(mul(expi(neg(mul(kp, var(j)))), trace(kp)), mul(expi(mul(kp, var(j))), trace(neg(kp))));
    return GSFunc(e, 2, {}, true);
}

Identity parse_identity(const std::string& s) {
    static const std::map<std::string, Identity> m = {
        {"conjugate", Identity::conjugate}, {"reflect", Identity::reflect},     {"dilate", Identity::dilate},
        {"translate", Identity::translate}, {"modulate", Identity::modulate},   {"scale_odot", Identity::scale_odot},
        {"convolution", Identity::convolution}};
    auto it = m.find(s);
    if (it == m.end()) throw ConfigError("unknown transform identity '" + s + "'");
    return it->second;
}

std::string to_string(Identity id) {
    switch (id) {
        case Identity::conjugate: return "conjugate";
        case Identity::reflect: return "reflect";
        case Identity::dilate: return "dilate";
        case Identity::translate: return "translate";
        case Identity::modulate: return "modulate";
        case Identity::scale_odot: return "scale_odot";
        case Identity::convolution: return "convolution";
    }
    return "?";
}

IdentityReport transform_identity(const GSFunc& f, const GenNumber& k, Identity which, const IdentityArgs& args,
                                  const std::vector<GenNumber>& omegas, const QuadratureConfig& cfg) {
    if (f.arity != 1) throw CapabilityError("transform identities are checked for n = 1");
    if (omegas.empty()) throw DomainError("identity check needs omega probes");
    const Grid& g = k.grid();
    IdentityReport rep;
    rep.identity = to_string(which);
    auto F = [&](const Expr& e, const GenNumber& kk) { return GSFunc(make_transform(e, 1, kk, -1, cfg), 1, {}, true); };
    if (magnitude(k).cls != Magnitude::infinite) throw PreconditionError("identity check needs an infinite k");
    GSFunc Ff = F(f.expr, k);
    std::function<GenComplex(const GenNumber&)> lhs, rhs;
    const GenNumber& s = args.s;
    auto need_s = [&] {
        if (s.size() == 0) throw PreconditionError(rep.identity + " needs a parameter s");
    };
    switch (which) {
        case Identity::conjugate: {
            GSFunc L = F(conj(f.expr), k);
            lhs = [=](const GenNumber& w) { return at(L, w); };
            rhs = [=](const GenNumber& w) { return conj(at(Ff, -w)); };
            break;
        }
        case Identity::reflect: {
            GSFunc L = F(substitute(f.expr, {neg(var(0))}), k);
            lhs = [=](const GenNumber& w) { return at(L, w); };
            rhs = [=](const GenNumber& w) { return at(Ff, -w); };
            break;
        }
        case Identity::dilate: {
            need_s();
            for (std::size_t i = 0; i < s.size(); ++i)
                if (!(s[i] > 0)) throw PreconditionError("dilation needs t > 0");
            if (!invertible(s)) throw PreconditionError("dilation needs an invertible t");
            GenNumber tk = s * k;
            if (magnitude(tk).cls != Magnitude::infinite) throw PreconditionError("dilation needs t k infinite");
            GSFunc L = F(substitute(f.expr, {mul(param("t", s), var(0))}), k);
            GSFunc R = F(f.expr, tk);
            GenNumber inv = GenNumber::constant(g, 1) / s;
            lhs = [=](const GenNumber& w) { return at(L, w); };
            rhs = [=](const GenNumber& w) { return GenComplex(inv) * at(R, w * inv); };
            break;
        }
        case Identity::translate: {
            need_s();
            if (args.support_h.size() == 0) throw PreconditionError("translate needs the support radius h");
            const GenNumber& h = args.support_h;
            if (order_compare(h, k) != OrderRel::leq || order_compare(abs(s), k - h) != OrderRel::leq)
                throw PreconditionError("translate needs h < k and |s| <= k - h");
            for (const GenNumber& edge : {h, -h}) {
                GenComplex v = eval_expr(f.expr, {edge}, g);
                if (!negligible(abs(v), g->q_check))
                    throw PreconditionError("translate needs f supported in [-h,h] (boundary value not negligible)");
            }
            GSFunc L = F(substitute(f.expr, {sub(var(0), param("s", s))}), k);
            lhs = [=](const GenNumber& w) { return at(L, w); };
            rhs = [=](const GenNumber& w) {
                GenComplex ph = GenComplex::from_fn(g, [&](std::size_t i) { return expi(-s[i] * w[i]); });
                return ph * at(Ff, w);
            };
            break;
        }
        case Identity::modulate: {
            need_s();
            GSFunc L = F(mul(expi(mul(param("s", s), var(0))), f.expr), k);
            lhs = [=](const GenNumber& w) { return at(L, w); };
            rhs = [=](const GenNumber& w) { return at(Ff, w - s); };
            break;
        }
        case Identity::scale_odot: {
            need_s();
            for (std::size_t i = 0; i < s.size(); ++i)
                if (!(s[i] > 0)) throw PreconditionError("scale needs s > 0");
            if (!invertible(s)) throw PreconditionError("scale needs an invertible s");
            GenNumber ks = k / s;
            if (magnitude(ks).cls != Magnitude::infinite) throw PreconditionError("scale needs k/s infinite");
            Expr sp = param("s", s);
            GSFunc L = F(div(substitute(f.expr, {div(var(0), sp)}), sp), k);
            GSFunc R = F(f.expr, ks);
            lhs = [=](const GenNumber& w) { return at(L, w); };
            rhs = [=](const GenNumber& w) { return at(R, s * w); };
            break;
        }
        case Identity::convolution: {
            if (args.g.expr == nullptr) throw PreconditionError("convolution identity needs a partner g");
            if (args.support_f.dim() != 1) throw PreconditionError("convolution identity needs the support hint of f");
            GSFunc c = convolve(f, args.g, args.support_f, cfg);
            GSFunc L = F(c.expr, k);
            GSFunc Fg = F(args.g.expr, k);
            lhs = [=](const GenNumber& w) { return at(L, w); };
            rhs = [=](const GenNumber& w) { return at(Ff, w) * at(Fg, w); };
            break;
        }
    }
    for (const GenNumber& w : omegas) {
        GenComplex r = rhs(w);
        GenNumber d = abs(lhs(w) - r);
        rep.max_diff = absmax(rep.max_diff, d);
        rep.max_scale = absmax(rep.max_scale, abs(r));
    }
    rep.sharp_order = sharp_order(rep.max_diff);
    rep.negligible = negligible(rep.max_diff, g->q_check);
    return rep;
}

DerivativeRuleReport derivative_rule(const GSFunc& f, const GenNumber& k, int j, const std::vector<std::vector<GenNumber>>& omegas,
                                     const QuadratureConfig& cfg) {
    int n = f.arity;
    if (j < 0 || j >= n) throw DomainError("derivative_rule: coordinate out of range");
    TransformResult Ff = hft(f, k, cfg);
    GSFunc df = derivative(f, [&] {
        std::vector<int> a(n, 0);
        a[j] = 1;
        return a;
    }());
    TransformResult Fd = hft(df, k, cfg);
    GSFunc D = delta_term(f, k, j, cfg);
    DerivativeRuleReport rep;
    const Grid& g = k.grid();
    for (const auto& w : omegas) {
        if (static_cast<int>(w.size()) != n) throw DomainError("omega probe dimension differs from arity");
        GenComplex a = eval_expr(Fd.func.expr, w, g);
        GenComplex Fw = eval_expr(Ff.func.expr, w, g);
        GenComplex iwF = GenComplex(GenNumber::constant(g, 0), w[j]) * Fw;
        GenComplex dl = eval_expr(D.expr, w, g);
        GenNumber diff = abs(a - iwF - dl);
        GenNumber scale = max(max(max(abs(a), abs(iwF)), abs(dl)), abs(Fw));
        GenNumber rel = GenNumber::from_fn(g, [&](std::size_t i) { return scale[i] > 0 ? diff[i] / scale[i] : real(0); });
        rep.max_abs_diff = absmax(rep.max_abs_diff, diff);
        rep.max_rel_diff = absmax(rep.max_rel_diff, rel);
        rep.max_delta = absmax(rep.max_delta, abs(dl));
    }
    rep.delta_negligible = rep.max_delta.size() > 0 && negligible(rep.max_delta, g->q_check);
    return rep;
}

std::vector<ConvergenceReport> inversion_check(const GSFunc& f, const GenNumber& k, const std::vector<GenNumber>& h_list,
                                               const std::vector<GenNumber>& probes, const QuadratureConfig& cfg,
                                               const InversionOptions& opt) {
    if (f.arity != 1) throw CapabilityError("inversion check is implemented for n = 1");
    if (h_list.empty()) throw DomainError("inversion check needs at least one h");
    if (magnitude(k).cls != Magnitude::infinite) throw PreconditionError("inversion check needs an infinite k");
    const Grid& g = k.grid();
    for (const GenNumber& y : probes)
        if (!invertible(k - abs(y))) throw PreconditionError("inversion probe is not sharply interior to [-k,k]");
    GenNumber M0 = sup_abs(f.expr, k), M1 = sup_abs(derivative(f.expr, 0), k);
    real dl = opt.delta;
    std::vector<ConvergenceReport> out;
    for (const GenNumber& y : probes) {
        ConvergenceReport rep;
        GenComplex fy = eval_expr(f.expr, {y}, g);
        GenNumber bound = GenNumber::from_fn(g, [&](std::size_t i) {
            real a = 2 * M0[i] / fabs(y[i] + k[i]) + (y[i] - dl + k[i]) * M1[i] / dl;
            real b = 2 * M0[i] / fabs(y[i] - k[i]) + (k[i] - y[i] - dl) * M1[i] / dl;
            return a + b;
        });
        GenComplex first;
        for (const GenNumber& h : h_list) {
            if (magnitude(h).cls != Magnitude::infinite) throw PreconditionError("inversion needs infinite h");
            // F_h^{-1}(F_k f)(y) = int_{-k}^{k} delta_h(y - x) f(x) dx
            Expr hp = param("h", h);
            Expr kern = mul(div(hp, cnst(kPi)), sinc(mul(hp, sub(param("y", y), var(0)))));
            GenComplex v = integrate_1d(GSFunc(mul(kern, f.expr), 1, {}), -k, k, cfg);
            if (first.size() == 0) first = v;
            rep.h_sequence.push_back(h);
            rep.errors.push_back(abs(v - fy));
            double B = tail_median_product(bound, GenNumber::constant(g, 1));
            rep.bound_C.push_back(B);
        }
        finish_convergence(rep);
        if (opt.spot_check) {
            GSFunc Fk = hft(f, k, cfg).func;
            GSFunc inv = ihft(Fk, h_list.front(), cfg).func;
            std::size_t i = g->tail_begin();
            EvalCtx c{i, g.get(), &y[i], 1};
            rep.spot_check = to_double(abs(hft::eval(inv.expr, c) - first[i]));
            rep.spot_index = static_cast<int>(i);
        }
        out.push_back(std::move(rep));
    }
    return out;
}

PlancherelReport parseval_check(const GSFunc& f, const GSFunc& gfun, const GenNumber& k, const std::vector<GenNumber>& h_list,
                                const QuadratureConfig& cfg) {
    if (f.arity != 1 || gfun.arity != 1) throw CapabilityError("Parseval check is implemented for n = 1");
    if (h_list.empty()) throw DomainError("Parseval check needs at least one h");
    const Grid& g = k.grid();
    PlancherelReport rep;
    GenComplex l = integrate_1d(GSFunc(mul(f.expr, conj(gfun.expr)), 1, {}), -k, k, cfg);
    rep.lhs = abs(l) * GenNumber::constant(g, kTwoPi);
    GenComplex lhs = GenComplex(GenNumber::constant(g, kTwoPi)) * l;
    Expr Fg = hft(gfun, k, cfg).func.expr;
    for (const GenNumber& h : h_list) {
        Expr Fh = hft(f, h, cfg).func.expr;
        GenComplex r = integrate_1d(GSFunc(mul(Fh, conj(Fg)), 1, {}), -k, k, cfg);
        rep.conv.h_sequence.push_back(h);
        rep.conv.errors.push_back(abs(lhs - r));
    }
    finish_convergence(rep.conv);
    return rep;
}

PlancherelReport plancherel_check(const GSFunc& f, const GenNumber& k, const std::vector<GenNumber>& h_list,
                                  const QuadratureConfig& cfg) {
    if (f.arity != 1) throw CapabilityError("Plancherel check is implemented for n = 1");
    if (h_list.empty()) throw DomainError("Plancherel check needs at least one h");
    const Grid& g = k.grid();
    PlancherelReport rep;
    GenComplex l = integrate_1d(GSFunc(mul(f.expr, conj(f.expr)), 1, {}), -k, k, cfg);
    rep.lhs = l.re() * GenNumber::constant(g, kTwoPi);
    for (const GenNumber& h : h_list) {
        Expr Fh = hft(f, h, cfg).func.expr;
        GenComplex r = integrate_1d(GSFunc(mul(Fh, conj(Fh)), 1, {}), -k, k, cfg);
        rep.conv.h_sequence.push_back(h);
        rep.conv.errors.push_back(abs(rep.lhs - r.re()));
    }
    finish_convergence(rep.conv);
    return rep;
}

RiemannLebesgueReport riemann_lebesgue_check(const GSFunc& f, const GenBox& hint, const std::vector<int>& N_list,
                                             const std::vector<GenNumber>& omegas, const GenNumber& b,
                                             const QuadratureConfig& cfg) {
    if (f.arity != 1 || hint.dim() != 1) throw CapabilityError("Riemann-Lebesgue check is implemented for n = 1");
    const Grid& g = b.grid();
    const GenNumber& lo = hint.lo[0];
    const GenNumber& hi = hint.hi[0];
    RiemannLebesgueReport rep;
    GenNumber mid = real(0.5) * (lo + hi);
    TameReport tr = tame_check(f, mid, b, 6);
    rep.tame = tr.tame;
    rep.Q = tr.c.size() ? -sharp_order(tr.c) : 0;
    auto transform_at = [&](const GenNumber& w) {
        return GenComplex::from_fn(g, [&](std::size_t i) {
            EvalCtx c{i, g.get(), nullptr, 0};
            return integrate_eps(f.expr, 0, lo[i], hi[i], -w[i], c, cfg);
        });
    };
    GenNumber l1 = p_norm(f, GenNumber::constant(g, 1), hint, cfg);
    rep.all_hold = true;
    for (int N : N_list) {
        std::vector<int> alpha{N};
        GSFunc dN = derivative(f, alpha);
        GenNumber mass = p_norm(dN, GenNumber::constant(g, 1), hint, cfg);
        for (const GenNumber& w : omegas) {
            RLSample s;
            s.N = N;
            s.omega = w;
            if (!invertible(w)) {
                s.skipped = true;
                s.note = "omega is not invertible; bound inapplicable";
                rep.samples.push_back(s);
                continue;
            }
            s.lhs = abs(transform_at(w));
            s.bound = mass / pow(abs(w), N);
            s.holds = true;
            for (std::size_t i = 0; i < g->size(); ++i) {
                real slack = real(1e-25) * l1[i];
                if (!(s.lhs[i] <= s.bound[i] * (1 + real(1e-8)) + slack)) s.holds = false;
            }
            rep.all_hold = rep.all_hold && s.holds;
            rep.samples.push_back(s);
        }
    }
    for (const GenNumber& w : omegas) {
        if (sharp_order(w) <= -(rep.Q + 1)) rep.high_freq_negligible.push_back(negligible(abs(transform_at(w)), g->q_check));
    }
    return rep;
}

UncertaintyReport uncertainty_check(const GSFunc& psi, const GenBox& hint, const GenNumber& omega_direct_k,
                                    const QuadratureConfig& cfg) {
    if (psi.arity != 1 || hint.dim() != 1) throw CapabilityError("uncertainty check is implemented for n = 1");
    const Grid& g = hint.lo[0].grid();
    Expr p = psi.expr, x = var(0);
    Expr dp = derivative(p, 0);
    auto I = [&](const Expr& e) { return integrate_1d(GSFunc(e, 1, {}), hint.lo[0], hint.hi[0], cfg).re(); };
    UncertaintyReport r;
    GenNumber two_pi = GenNumber::constant(g, kTwoPi);
    r.x_var = I(mul(pow_int(x, 2), mul(p, conj(p))));
    r.omega_var = two_pi * I(mul(dp, conj(dp)));
    GenNumber n2 = I(mul(p, conj(p)));
    // |F psi|_2^2 = 2 pi |psi|_2^2
    r.bound = real(0.25) * n2 * (two_pi * n2);
    r.product = r.x_var * r.omega_var;
    r.product_vs_bound = order_compare(r.product, r.bound);
    r.x_class = magnitude(r.x_var);
    r.omega_class = magnitude(r.omega_var);
    r.x_invertible = invertible(r.x_var);
    if (omega_direct_k.size() > 0) {
        real kh = 0;
        for (std::size_t i = 0; i < g->size(); ++i) kh = std::max({kh, fabs(hint.lo[0][i]), fabs(hint.hi[0][i])});
        GenNumber ks = GenNumber::from_fn(g, [&](std::size_t i) {
            return std::max(fabs(hint.lo[0][i]), fabs(hint.hi[0][i]));
        });
        Expr F = make_transform(p, 1, ks, -1, cfg);
        Expr integrand = mul(pow_int(x, 2), mul(F, conj(F)));
        r.omega_var_direct = integrate_1d(GSFunc(integrand, 1, {}), -omega_direct_k, omega_direct_k, cfg).re();
    }
    return r;
}

namespace {

struct OneEntry {
    GSFunc one;
    GenNumber radius;
};

std::mutex one_mu;
std::map<std::string, OneEntry>& one_cache() {
    static std::map<std::string, OneEntry> c;
    return c;
}

OneEntry& one_entry(const Mollifier& m, const GenNumber& k, const QuadratureConfig& cfg) {
    std::string key = sha256_hex(m.spec().canonical() + "|" + net_canonical(k) + "|" + cfg.canonical());
    std::lock_guard<std::mutex> lock(one_mu);
    auto it = one_cache().find(key);
    if (it != one_cache().end()) return it->second;
    OneEntry e;
    e.one = hft(dirac_delta(m), k, cfg).func;
    const Grid& g = k.grid();
    const GenNumber& b = m.spec().b;
    e.radius = GenNumber::from_fn(g, [&](std::size_t i) {
        real thr = boost::multiprecision::pow(g->rho[i], real(g->q_check));
        for (int s = 1; s <= 256; ++s) {
            real x = b[i] * real(s) / 4;
            EvalCtx c{i, g.get(), &x, 1};
            if (abs(hft::eval(e.one.expr, c)) < thr) return x;
        }
        return b[i] * 64;
    });
    return one_cache().emplace(key, e).first->second;
}

}  // namespace

GSFunc finite_one(const Mollifier& m, const GenNumber& k, const QuadratureConfig& cfg) { return one_entry(m, k, cfg).one; }

GenNumber one_radius(const Mollifier& m, const GenNumber& k, const QuadratureConfig& cfg) {
    return one_entry(m, k, cfg).radius;
}

FinitePartReport finite_part_check(const GSFunc& f, const GenNumber& k, const std::vector<GenNumber>& omegas,
                                   const Mollifier& m, const std::function<cplx(const real&)>& classical,
                                   const QuadratureConfig& cfg) {
    if (f.arity != 1) throw CapabilityError("finite-part check is implemented for n = 1");
    const Grid& g = k.grid();
    OneEntry one = one_entry(m, k, cfg);
    FinitePartReport rep;
    rep.one_radius = one.radius;
    GSFunc withone(make_transform(mul(f.expr, one.one.expr), 1, one.radius, -1, cfg), 1, {}, true);
    GSFunc plain = hft(f, k, cfg).func;
    for (const GenNumber& w : omegas) {
        FinitePartSample s;
        s.omega = w;
        s.with_one = at(withone, w);
        s.plain = at(plain, w);
        s.agree = eq_up_to_negligible(s.with_one, s.plain, g->q_check);
        if (classical) {
            s.classical = GenComplex::from_fn(g, [&](std::size_t i) { return classical(w[i]); });
            s.agree_classical = eq_up_to_negligible(s.with_one, s.classical, g->q_check) &&
                                eq_up_to_negligible(s.plain, s.classical, g->q_check);
        }
        TameReport tr = tame_check(plain, w, m.spec().b, 4);
        if (!tr.tame) {
            rep.tame = false;
            rep.note += "transform not tame at omega probe " + std::to_string(rep.samples.size()) + "; ";
        }
        rep.samples.push_back(std::move(s));
    }
    return rep;
}

std::vector<GenNumber> default_omega_probes(const Grid& g) {
    GenNumber r = GenNumber::rho(g);
    GenNumber sq = GenNumber::from_fn(g, [&](std::size_t i) { return boost::multiprecision::sqrt(g->rho[i]); });
    GenNumber isq = GenNumber::constant(g, 1) / sq;
    std::vector<GenNumber> out{GenNumber::constant(g, 0)};
    for (double v : {0.5, 1.0, 3.0}) {
        out.push_back(GenNumber::constant(g, v));
        out.push_back(GenNumber::constant(g, -v));
    }
    out.push_back(sq);
    out.push_back(-sq);
    out.push_back(isq);
    out.push_back(-isq);
    (void)r;
    return out;
}

}  // namespace hft
