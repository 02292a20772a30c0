#include "doctest.h"
#include "hft/hft.hpp"

#include <gsl/gsl_sf_expint.h>

#include <cmath>
#include <random>

using namespace hft;
using namespace hft::sym;

namespace {

const Grid& small() {
    static Grid g = make_grid(8, 0.5);
    return g;
}
const Grid& desk() {
    static Grid g = make_grid(12, 0.5);
    return g;
}
GenNumber cst(const Grid& g, double v) { return GenNumber::constant(g, v); }
GenNumber inv_rho(const Grid& g) { return cst(g, 1) / GenNumber::rho(g); }
Expr gauss_expr() { return exp(neg(mul(cnst(0.5), pow_int(var(0), 2)))); }
GSFunc on(const Expr& e, const GenNumber& r, int n = 1) { return GSFunc(e, n, GenBox::symmetric(r, n)); }

double max_rel(const GenComplex& v, const std::function<cplx(std::size_t)>& ref) {
    double w = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        cplx r = ref(i);
        w = std::max(w, to_double(abs(v[i] - r) / abs(r)));
    }
    return w;
}

GenComplex at(const TransformResult& t, const GenNumber& w) { return eval_expr(t.func.expr, {w}, w.grid()); }

const Mollifier& moll(const Grid& g) {
    static Mollifier m8 = build_mollifier(MollifierSpec::defaults(small()));
    static Mollifier m12 = build_mollifier(MollifierSpec::defaults(desk()));
    return g == small() ? m8 : m12;
}

}  // namespace

TEST_CASE("transform of 1 is 2 sin(k w)/w") {
    const Grid& g = small();
    GenNumber k = inv_rho(g);
    TransformResult F = hft::hft(on(cnst(1.0), real(2) * k), k);
    for (double w : {0.5, 1.0, 3.0}) {
        INFO("w " << w);
        CHECK(max_rel(at(F, cst(g, w)), [&](std::size_t i) { return cplx(2 * sin(k[i] * w) / w); }) < 1e-9);
    }
    CHECK(max_rel(at(F, cst(g, 0)), [&](std::size_t i) { return cplx(2 * k[i]); }) < 1e-12);
    CHECK(magnitude(abs(at(F, cst(g, 0)))).cls == Magnitude::infinite);
}

TEST_CASE("Gaussian is its own transform up to sqrt(2 pi)") {
    const Grid& g = small();
    GenNumber k = inv_rho(g);
    TransformResult F = hft::hft(on(gauss_expr(), real(2) * k), k);
    for (double w : {0.0, 0.5, -1.0, 3.0}) {
        GenComplex v = at(F, cst(g, w));
        GenComplex ref(cst(g, std::sqrt(2 * M_PI) * std::exp(-w * w / 2)));
        INFO("w " << w);
        CHECK(eq_up_to_negligible(v, ref, g->q_check));
        CHECK(certified_order(abs(v - ref)) >= 6);
    }
}

TEST_CASE("exponential transform with a logarithmic window") {
    const Grid& g = small();
    GenNumber k = -log(GenNumber::rho(g));
    TransformResult F = hft::hft(on(exp(var(0)), real(2) * k), k);
    for (double w : {0.0, 1.0, 5.0}) {
        GenComplex v = at(F, cst(g, w));
        INFO("w " << w);
        CHECK(max_rel(v, [&](std::size_t i) {
                  cplx z(1, -w), a = z * cplx(k[i]);
                  return (exp(a) - exp(-a)) / z;
              }) < 1e-9);
        CHECK(magnitude(abs(v)).cls == Magnitude::infinite);
    }
}

TEST_CASE("transform preconditions") {
    const Grid& g = small();
    GenNumber k = inv_rho(g);
    CHECK_THROWS_AS(hft::hft(on(cnst(1.0), real(2) * k), cst(g, 3)), PreconditionError);
    CHECK_THROWS_AS(hft::hft(on(cnst(1.0), cst(g, 10)), k), PreconditionError);
    CHECK_THROWS_AS(dirichlet_delta(cst(g, 2), 1), PreconditionError);
    GSFunc free(cnst(1.0), 1, {});
    CHECK_NOTHROW(hft::hft(free, k));
}

TEST_CASE("delta transforms to 1 and vanishes at high frequency") {
    const Grid& g = desk();
    GenNumber k = inv_rho(g);
    GSFunc d = dirac_delta(moll(g));
    TransformResult F = hft::hft(d, k);
    for (double w : {0.0, 1.0, -3.0})
        CHECK(negligible(abs(at(F, cst(g, w)) - GenComplex(cst(g, 1))), 4));
    GenNumber r = GenNumber::rho(g);
    CHECK(negligible(abs(at(F, cst(g, 1) / pow(r, 3))), 4));
    // at w = b the bump is at beta(1), a fixed non-zero number
    GenComplex mid = at(F, inv_rho(g));
    double ref = to_double(moll(g).beta(1));
    for (std::size_t i = g->tail_begin(); i < g->size(); ++i)
        CHECK(to_double(mid[i].re) == doctest::Approx(ref).epsilon(1e-20));
}

TEST_CASE("heaviside transform matches its closed form") {
    // F_k(H_b)(w) = int_{-k}^{k} H_b e^{-iwx}; compare with the direct primitive route
    const Grid& g = small();
    GenNumber k = inv_rho(g);
    GSFunc H = heaviside(moll(g));
    TransformResult F = hft::hft(H, k);
    GenNumber w = cst(g, 0.7);
    GenComplex v = at(F, w);
    GenComplex direct = integrate_1d(GSFunc(mul(H.expr, expi(mul(cnst(-0.7), var(0)))), 1, {}), -k, k);
    CHECK(negligible(abs(v - direct), g->q_check));
    // away from the jump H is 1, so the right half dominates: F ~ (1 - e^{-iwk}) / (iw)
    CHECK(max_rel(v, [&](std::size_t i) { return (cplx(1) - expi(-real(0.7) * k[i])) / cplx(0, 0.7); }) < 0.2);
}

TEST_CASE("inverse transform of 1 is the Dirichlet delta") {
    const Grid& g = small();
    GenNumber h = inv_rho(g);
    TransformResult inv = ihft(on(cnst(1.0), real(2) * h), h);
    GSFunc D = dirichlet_delta(h, 1);
    for (double x : {0.0, 0.3, -2.0}) {
        GenComplex v = eval_expr(inv.func.expr, {cst(g, x)}, g);
        INFO("x " << x);
        CHECK(max_rel(v, [&](std::size_t i) {
                  return x == 0 ? cplx(h[i] / kPi) : cplx(sin(h[i] * x) / (kPi * x));
              }) < 1e-9);
        CHECK(negligible(abs(v - eval_expr(D.expr, {cst(g, x)}, g)), g->q_check));
    }
}

TEST_CASE("Dirichlet delta mass against the sine integral") {
    const Grid& g = small();
    GenNumber k = inv_rho(g);
    for (const GenNumber& h : {k, k * k}) {
        GenComplex m = integrate_1d(dirichlet_delta(h, 1), -k, k);
        for (std::size_t i = 0; i < g->size(); ++i) {
            double hk = to_double(h[i] * k[i]);
            double ref = 2 / M_PI * gsl_sf_Si(hk);
            CHECK(to_double(m[i].re) == doctest::Approx(ref).epsilon(1e-12));
            CHECK(std::fabs(to_double(m[i].re) - 1) <= 8 / (M_PI * hk));
        }
    }
    // two dimensions: product of the one-dimensional masses
    GenComplex m2 = integrate_box(dirichlet_delta(k, 2), GenBox::symmetric(k, 2));
    GenComplex m1 = integrate_1d(dirichlet_delta(k, 1), -k, k);
    CHECK(max_rel(m2, [&](std::size_t i) { return m1[i] * m1[i]; }) < 1e-9);
}

TEST_CASE("two-dimensional Gaussians: separable and coupled") {
    const Grid& g = small();
    GenNumber k = cst(g, 12) + inv_rho(g);
    Expr sep = mul(gauss_expr(), substitute(gauss_expr(), {var(1)}));
    TransformResult F = hft::hft(on(sep, real(2) * k, 2), k);
    GenComplex v = eval_expr(F.func.expr, {cst(g, 0.5), cst(g, -1)}, g);
    CHECK(max_rel(v, [&](std::size_t) { return cplx(kTwoPi * exp(real(-0.625))); }) < 1e-25);

    // x^T A x with A = [[1, 1/2], [1/2, 1]]: 2 pi / sqrt(det A) exp(-w^T A^{-1} w / 2)
    Expr q = add(add(pow_int(var(0), 2), mul(var(0), var(1))), pow_int(var(1), 2));
    QuadratureConfig cfg;
    cfg.base_panels = 16;
    TransformResult Fc = hft::hft(on(exp(neg(mul(cnst(0.5), q))), real(2) * k, 2), k, cfg);
    double w0 = 0.4, w1 = -0.3;
    double quad = (4.0 / 3) * (w0 * w0 - w0 * w1 + w1 * w1);
    double ref = 2 * M_PI / std::sqrt(0.75) * std::exp(-quad / 2);
    // the nested route is ~k^2 per index; two tail indices suffice
    for (std::size_t i = g->tail_begin(); i < g->tail_begin() + 2; ++i) {
        real w[2] = {real(w0), real(w1)};
        EvalCtx c{i, g.get(), w, 2};
        CHECK(to_double(hft::eval(Fc.func.expr, c).re) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("transform identities hold up to negligible differences") {
    const Grid& g = small();
    GenNumber k = inv_rho(g);
    std::vector<GenNumber> om{cst(g, 0), cst(g, 0.5), cst(g, -1.3), cst(g, 2)};
    GSFunc f = on(mul(add(cnst(1.0), mul(cnst(0.3), var(0))), gauss_expr()), real(4) * k);
    GSFunc cf = on(mul(expi(mul(cnst(0.7), var(0))), gauss_expr()), real(4) * k);
    IdentityArgs none;
    for (Identity id : {Identity::conjugate, Identity::reflect}) {
        for (const GSFunc& u : {f, cf}) {
            IdentityReport r = transform_identity(u, k, id, none, om);
            INFO(r.identity);
            CHECK(r.negligible);
        }
    }
    IdentityArgs a;
    a.s = cst(g, 1.5);
    CHECK(transform_identity(f, k, Identity::dilate, a, om).negligible);
    CHECK(transform_identity(f, k, Identity::modulate, a, om).negligible);
    CHECK(transform_identity(f, k, Identity::scale_odot, a, om).negligible);
    a.support_h = real(0.5) * k;
    CHECK(transform_identity(f, k, Identity::translate, a, om).negligible);
    IdentityArgs c;
    c.g = on(exp(neg(pow_int(sub(var(0), cnst(0.5)), 2))), real(4) * k);
    c.support_f = GenBox::interval(cst(g, -12), cst(g, 12));
    CHECK(transform_identity(f, k, Identity::convolution, c, {cst(g, 0), cst(g, 0.8)}).negligible);

    a.s = cst(g, 4) * GenNumber::rho(g);  // t k = 4 is finite
    CHECK_THROWS_AS(transform_identity(f, k, Identity::dilate, a, om), PreconditionError);
    a.s = cst(g, 1.5);
    a.support_h = k;
    CHECK_THROWS_AS(transform_identity(f, k, Identity::translate, a, om), PreconditionError);
    CHECK(parse_identity("scale_odot") == Identity::scale_odot);
    CHECK_THROWS_AS(parse_identity("rotate"), ConfigError);
}

TEST_CASE("derivative rule with boundary terms") {
    const Grid& g = small();
    GenNumber kl = -log(GenNumber::rho(g));
    std::vector<std::vector<GenNumber>> om{{cst(g, 0)}, {cst(g, 0.5)}, {cst(g, -1)}, {cst(g, 2)}, {cst(g, 5)}};
    DerivativeRuleReport r = derivative_rule(on(exp(var(0)), real(2) * kl), kl, 0, om);
    CHECK(to_double(r.max_rel_diff[g->size() - 1]) < 1e-8);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(to_double(r.max_rel_diff[i]) < 1e-8);
    CHECK_FALSE(r.delta_negligible);

    GenNumber k = inv_rho(g);
    DerivativeRuleReport gr = derivative_rule(on(gauss_expr(), real(2) * k), k, 0, om);
    CHECK(gr.delta_negligible);
    CHECK(negligible(gr.max_abs_diff, g->q_check));

    // two variables, boundary trace in the first coordinate only
    Expr f2 = mul(exp(var(0)), substitute(gauss_expr(), {var(1)}));
    std::vector<std::vector<GenNumber>> om2{{cst(g, 0), cst(g, 0.5)}, {cst(g, 1), cst(g, -1)}};
    GenNumber k2 = cst(g, 3) + kl;
    DerivativeRuleReport r2 = derivative_rule(on(f2, real(2) * k2, 2), k2, 0, om2);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(to_double(r2.max_rel_diff[i]) < 1e-8);
    DerivativeRuleReport r3 = derivative_rule(on(f2, real(2) * k2, 2), k2, 1, om2);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(to_double(r3.max_rel_diff[i]) < 1e-8);
}

TEST_CASE("inversion through the Dirichlet form") {
    const Grid& g = small();
    GenNumber k = inv_rho(g);
    GSFunc f = on(cnst(1.0), real(2) * k);
    // f = 1, y = 0: the form is (2/pi) Si(h k), so the error is |1 - (2/pi) Si(h k)|
    InversionOptions opt;
    opt.spot_check = true;
    auto reps = inversion_check(f, k, {k, k * k}, {cst(g, 0)}, {}, opt);
    REQUIRE(reps.size() == 1);
    const ConvergenceReport& r = reps[0];
    REQUIRE(r.errors.size() == 2);
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < g->size(); ++i) {
            double hk = to_double(r.h_sequence[j][i] * k[i]);
            double ref = std::fabs(1 - 2 / M_PI * gsl_sf_Si(hk));
            CHECK(to_double(r.errors[j][i]) == doctest::Approx(ref).epsilon(1e-6));
        }
    CHECK(r.spot_index == static_cast<int>(g->tail_begin()));
    CHECK(r.spot_check >= 0);
    CHECK(r.spot_check < 1e-12);
    CHECK_THROWS_AS(inversion_check(f, k, {k}, {k}), PreconditionError);
}

TEST_CASE("Plancherel and Parseval left sides") {
    const Grid& g = small();
    GenNumber k = inv_rho(g);
    GSFunc f = on(gauss_expr(), k * k);
    PlancherelReport p = plancherel_check(f, k, {k});
    for (std::size_t i = g->tail_begin(); i < g->size(); ++i)
        CHECK(to_double(p.lhs[i]) == doctest::Approx(2 * M_PI * std::sqrt(M_PI)).epsilon(1e-12));
    CHECK(negligible(p.conv.errors[0], g->q_check));
    GSFunc f2 = on(mul(var(0), gauss_expr()), k * k);
    PlancherelReport q = parseval_check(f, f2, k, {k});
    // <f, x f> = 0 by symmetry
    CHECK(negligible(q.lhs, g->q_check));
    CHECK(negligible(q.conv.errors[0], g->q_check));
}

TEST_CASE("Riemann-Lebesgue bounds for a smooth bump and for delta") {
    const Grid& g = small();
    GSFunc f = on(gauss_expr(), cst(g, 1e6));
    GenBox hint = GenBox::interval(cst(g, -14), cst(g, 14));
    RiemannLebesgueReport r = riemann_lebesgue_check(f, hint, {1, 2, 3}, {cst(g, 0), cst(g, 2), cst(g, 7)}, inv_rho(g));
    CHECK(r.all_hold);
    CHECK(r.tame);
    int skipped = 0;
    for (auto& s : r.samples) skipped += s.skipped;
    CHECK(skipped == 3);  // omega = 0 is not invertible

    const Grid& g12 = desk();
    GSFunc d = dirac_delta(moll(g12));
    GenNumber rr = GenNumber::rho(g12);
    RiemannLebesgueReport rd = riemann_lebesgue_check(d, GenBox::interval(cst(g12, -40), cst(g12, 40)), {1, 2},
                                                      {cst(g12, 1), cst(g12, 1) / pow(rr, 3)}, moll(g12).spec().b);
    CHECK(rd.all_hold);
    CHECK_FALSE(rd.tame);
    REQUIRE(rd.high_freq_negligible.size() == 1);
    CHECK(rd.high_freq_negligible[0]);
}

TEST_CASE("uncertainty principle: delta and Gaussian") {
    const Grid& g = desk();
    GenBox hint = GenBox::interval(cst(g, -40), cst(g, 40));
    UncertaintyReport d = uncertainty_check(dirac_delta(moll(g)), hint);
    CHECK(d.x_class.cls == Magnitude::infinitesimal);
    CHECK(d.x_invertible);
    CHECK(d.omega_class.cls == Magnitude::infinite);
    CHECK(d.product_vs_bound == OrderRel::geq_strict_on_tail);

    UncertaintyReport u = uncertainty_check(on(gauss_expr(), cst(g, 1e3)), hint, cst(g, 14));
    for (std::size_t i = 0; i < g->size(); ++i) {
        // x variance sqrt(pi)/2, omega variance 2 pi sqrt(pi)/2, bound pi^2/2
        CHECK(fabs(u.x_var[i] - sqrt(kPi) / 2) < real(1e-25));
        CHECK(fabs(u.product[i] / u.bound[i] - 1) < real(1e-25));
        CHECK(to_double(u.omega_var_direct[i]) == doctest::Approx(to_double(u.omega_var[i])).epsilon(1e-12));
    }
}

TEST_CASE("finite one and finite parts") {
    const Grid& g = desk();
    GenNumber k = inv_rho(g);
    const Mollifier& m = moll(g);
    GSFunc one = finite_one(m, k);
    GenComplex v = eval_expr(one.expr, {cst(g, 2)}, g);
    CHECK(negligible(abs(v - GenComplex(cst(g, 1))), 4));
    GenNumber R = one_radius(m, k);
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(R[i] > m.spec().b[i]);
        CHECK(R[i] < 12 * m.spec().b[i]);
    }
    FinitePartReport fp = finite_part_check(on(gauss_expr(), real(8) * k), k, {cst(g, 0), cst(g, 1.5)}, m,
                                            [](const real& w) { return cplx(sqrt(kTwoPi) * exp(-w * w / 2)); });
    for (auto& s : fp.samples) {
        CHECK(s.agree);
        CHECK(s.agree_classical);
    }
    CHECK(fp.tame);
}

TEST_CASE("source hashes are deterministic and sensitive") {
    const Grid& g = small();
    GenNumber k = inv_rho(g);
    GSFunc f = on(gauss_expr(), real(2) * k);
    std::string a = hft::hft(f, k).source_hash, b = hft::hft(f, k).source_hash;
    CHECK(a == b);
    CHECK(a.size() == 64);
    CHECK(a != hft::hft(f, real(1.5) * k).source_hash);
    CHECK(a != ihft(f, k).source_hash);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("property: transform is linear and real functions have hermitian transforms") {
    const Grid& g = small();
    GenNumber k = inv_rho(g);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int trial = 0; trial < 3; ++trial) {
        double a = U(rng), c = U(rng), s = U(rng), w = U(rng);
        Expr f1 = exp(neg(pow_int(sub(var(0), cnst(s)), 2)));
        Expr f2 = mul(var(0), gauss_expr());
        GenNumber W = cst(g, w);
        GenComplex lhs = at(hft::hft(on(add(mul(cnst(a), f1), mul(cnst(c), f2)), real(2) * k), k), W);
        GenComplex rhs = GenComplex(cst(g, a)) * at(hft::hft(on(f1, real(2) * k), k), W) +
                         GenComplex(cst(g, c)) * at(hft::hft(on(f2, real(2) * k), k), W);
        CHECK(negligible(abs(lhs - rhs), g->q_check));
        GenComplex neg_w = at(hft::hft(on(f1, real(2) * k), k), -W);
        CHECK(negligible(abs(conj(at(hft::hft(on(f1, real(2) * k), k), W)) - neg_w), g->q_check));
    }
}

TEST_CASE("derivative of a transform multiplies by -ix") {
    const Grid& g = small();
    GenNumber k = inv_rho(g);
    TransformResult F = hft::hft(on(gauss_expr(), real(2) * k), k);
    GSFunc dF = derivative(F.func, {1});
    for (double w : {0.0, 0.8}) {
        // d/dw sqrt(2pi) e^{-w^2/2} = -w sqrt(2pi) e^{-w^2/2}
        GenComplex v = eval_expr(dF.expr, {cst(g, w)}, g);
        GenComplex ref(cst(g, -w * std::sqrt(2 * M_PI) * std::exp(-w * w / 2)));
        CHECK(negligible(abs(v - ref), g->q_check));
    }
}

TEST_CASE("default omega probes") {
    const Grid& g = small();
    auto p = default_omega_probes(g);
    CHECK(p.size() == 11);
    CHECK(magnitude(p.back()).cls == Magnitude::infinite);
    CHECK(magnitude(p[7]).cls == Magnitude::infinitesimal);
}
