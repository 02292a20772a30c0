#include "doctest.h"
#include "hft/gsf.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace hft;
using namespace hft::sym;

namespace {

Grid dflt() { return make_grid(12, 0.5); }

GenNumber cst(const Grid& g, double v) { return GenNumber::constant(g, v); }

cplx at(const Expr& e, double x, const Grid& g, std::size_t i = 11) {
    real xs[1] = {real(x)};
    EvalCtx c{i, g.get(), xs, 1};
    return eval(e, c);
}

// S^(n)(z) = 1/2 int_{-1}^{1} (it)^n e^{izt} dt by composite Simpson in double
std::complex<double> sinc_oracle(double z, int n) {
    const int m = 20000;
    std::complex<double> s = 0;
    for (int j = 0; j <= m; ++j) {
        double t = -1 + 2.0 * j / m;
        double w = (j == 0 || j == m) ? 1 : (j % 2 ? 4 : 2);
        s += w * std::pow(std::complex<double>(0, t), n) * std::exp(std::complex<double>(0, z * t));
    }
    return s * (2.0 / m) / 3.0 / 2.0;
}

}  // namespace

TEST_CASE("eval examples") {
    auto g = dflt();
    GSFunc f(exp(var(0)), 1, {});
    auto v = eval(f, {cst(g, 0)});
    for (std::size_t i = 0; i < 12; ++i) CHECK(v[i] == cplx(1));
    auto k = -log(GenNumber::rho(g));
    auto ek = eval(f, {k});
    for (std::size_t i = 0; i < 12; ++i) CHECK(abs(ek[i].re * g->rho[i] - 1) < real("1e-30"));
    GSFunc sq(pow_int(var(0), 2), 1, {});
    auto r = eval(sq, {GenNumber::rho(g)});
    for (std::size_t i = 0; i < 12; ++i) CHECK(r[i].re == g->rho[i] * g->rho[i]);
}

TEST_CASE("domain and overflow errors") {
    auto g = dflt();
    GSFunc f(var(0), 1, GenBox::interval(cst(g, -1), cst(g, 1)));
    CHECK_THROWS_AS(eval(f, {cst(g, 3)}), DomainError);
    CHECK_NOTHROW(eval(f, {cst(g, 1)}));
    GSFunc big(exp(div(cnst(1.0), rho()) * cnst(1e6)), 1, {});
    try {
        eval(big, {cst(g, 0)});
        CHECK(false);
    } catch (const OverflowError& e) {
        CHECK(e.eps_index >= 0);
    }
}

TEST_CASE("derivative examples") {
    auto g = dflt();
    auto d = derivative(exp(var(0)), 0);
    CHECK(at(d, 0.3, g) == at(exp(var(0)), 0.3, g));
    auto xy = mul(var(0), var(1));
    auto dxy = derivative(xy, std::vector<int>{1, 1});
    CHECK(is_const(dxy));
    CHECK(dxy->value == cplx(1));
    auto d2 = derivative(pow_int(var(0), 3), 0);
    CHECK(abs(at(d2, 2.0, g) - cplx(12)) < real("1e-30"));
}

TEST_CASE("property: symbolic derivative matches central differences") {
    auto g = dflt();
    std::vector<Expr> trees = {
        mul(sin(mul(cnst(3.0), var(0))), exp(neg(pow_int(var(0), 2)))),
        div(cosh(var(0)), add(cnst(2.0), sinh(var(0)))),
        sinc(mul(cnst(5.0), var(0))),
        sqrt(add(cnst(1.0), pow_int(var(0), 2))),
        mul(log(add(cnst(3.0), var(0))), pow(add(cnst(2.0), var(0)), cnst(1.5))),
        plateau(var(0), 0, 1, 0.25),
        mul(expi(mul(cnst(2.0), var(0))), cos(var(0))),
    };
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (auto& t : trees) {
        auto d = derivative(t, 0);
        for (int rep = 0; rep < 5; ++rep) {
            double x = u(rng);
            double errs[2];
            double hs[2] = {1e-3, 1e-4};
            for (int j = 0; j < 2; ++j) {
                double h = hs[j];
                cplx fd = (at(t, x + h, g) - at(t, x - h, g)) / cplx(real(2 * h));
                errs[j] = to_double(abs(fd - at(d, x, g)));
            }
            if (errs[0] > 1e-20) {
                double order = std::log10(errs[0] / errs[1]);
                CHECK(order >= 1.8);
            }
        }
    }
}

TEST_CASE("property: Leibniz and chain rules at probes") {
    auto g = dflt();
    Expr f = sin(mul(cnst(2.0), var(0))), h = exp(mul(cnst(0.5), var(0)));
    Expr lhs = derivative(mul(f, h), 0);
    Expr rhs = add(mul(derivative(f, 0), h), mul(f, derivative(h, 0)));
    Expr comp = substitute(f, {h});
    Expr chain = mul(substitute(derivative(f, 0), {h}), derivative(h, 0));
    for (double x : {-0.7, 0.1, 0.9})
        for (std::size_t i = 0; i < 12; ++i) {
            cplx a = at(lhs, x, g, i), b = at(rhs, x, g, i);
            CHECK(to_double(abs(a - b) / (abs(a) + 1e-300)) < 1e-12);
            cplx c1 = at(derivative(comp, 0), x, g, i), c2 = at(chain, x, g, i);
            CHECK(to_double(abs(c1 - c2) / (abs(c1) + 1e-300)) < 1e-12);
        }
}

TEST_CASE("sinc derivatives against quadrature oracle") {
    for (int n = 0; n <= 4; ++n)
        for (double z : {0.0, 1e-3, 0.5, 2.0, 7.5, 30.0, -12.0}) {
            cplx v = sinc_deriv(cplx(real(z)), n);
            auto o = sinc_oracle(z, n);
            CHECK(std::abs(to_double(v.re) - o.real()) < 1e-9);
            CHECK(std::abs(to_double(v.im) - o.imag()) < 1e-9);
        }
    CHECK(sinc_deriv(cplx(0), 0) == cplx(1));
    CHECK(abs(sinc_deriv(cplx(real(1e-3)), 0) - cplx(boost::multiprecision::sin(real(1e-3)) / real(1e-3))) < real("1e-33"));
}

TEST_CASE("flat exp and smooth step") {
    CHECK(flat_exp_deriv(real(-1), 3) == 0);
    CHECK(flat_exp_deriv(real(0), 0) == 0);
    for (int n = 0; n < 4; ++n) {
        real u = real(0.7), h = real(1e-6);
        real fd = (flat_exp_deriv(u + h, n) - flat_exp_deriv(u - h, n)) / (2 * h);
        CHECK(to_double(abs(fd - flat_exp_deriv(u, n + 1))) < 1e-8);
    }
    auto g = dflt();
    Expr p = plateau(var(0), 0, 1, 0.5);
    CHECK(at(p, 0.0, g) == cplx(1));
    CHECK(at(p, 0.5, g) == cplx(1));
    CHECK(at(p, 1.0, g) == cplx(0));
    CHECK(at(p, -1.5, g) == cplx(0));
    CHECK(to_double(at(p, 0.75, g).re) == doctest::Approx(0.5));
    Expr st = smooth_step(var(0));
    CHECK(to_double(at(st, 0.5, g).re) == doctest::Approx(0.5));
}

TEST_CASE("parser round trips") {
    auto g = dflt();
    ParseEnv env;
    auto e1 = parse_expr("(mul (pow-int x0 2) (exp (neg x0)))", env);
    auto e2 = parse_expr("mul(pow-int(x0,2),exp(neg(x0)))", env);
    CHECK(at(e1, 1.3, g) == at(e2, 1.3, g));
    CHECK(abs(at(e1, 1.0, g) - cplx(boost::multiprecision::exp(real(-1)))) < real("1e-33"));
    auto e3 = parse_expr(to_sexpr(e1), env);
    CHECK(at(e3, 0.4, g) == at(e1, 0.4, g));
    CHECK_THROWS_AS(parse_expr("(mul x0", env), ParseError);
    CHECK_THROWS_AS(parse_expr("frob(x0)", env), ParseError);
    env.params["k"] = GenComplex(cst(g, 2));
    auto e4 = parse_expr("mul(k,x0)", env);
    CHECK(at(e4, 3.0, g) == cplx(6));
}

TEST_CASE("net mini-language") {
    auto g = dflt();
    auto n = parse_net("pow(rho,-3)", g);
    CHECK(n.classify().sharp_order == doctest::Approx(-3).epsilon(1e-9));
    auto k = parse_net("neg(log(rho))", g);
    CHECK(abs(k[11] - boost::multiprecision::log(real(4096))) < real("1e-30"));
    auto inv = parse_net("inv(eps)", g);
    CHECK(inv[0] == 2);
    CHECK_THROWS_AS(parse_net("x0", g), ParseError);
}

TEST_CASE("composition and algebra") {
    auto g = dflt();
    GSFunc f(sin(var(0)), 1, {}), id(var(0), 1, {}), h(exp(var(0)), 1, {});
    auto c = compose(f, {id});
    auto p = cst(g, 0.3);
    CHECK(eval(c, {p})[4] == eval(f, {p})[4]);
    auto s = combine(f, h, '+');
    CHECK(eval(s, {p})[7] == eval(f, {p})[7] + eval(h, {p})[7]);
    GSFunc two(mul(var(0), var(1)), 2, {});
    CHECK_THROWS_AS(combine(f, two, '+'), DomainError);
}

TEST_CASE("moderate_check examples") {
    auto g = dflt();
    auto k = -log(GenNumber::rho(g));
    GSFunc f(exp(var(0)), 1, GenBox::interval(-k, k));
    auto rep = moderate_check(f, {{cst(g, 0)}, {k}, {-k}}, 3);
    CHECK(rep.all_moderate);
    CHECK(rep.worst_order == doctest::Approx(-1).epsilon(0.01));
    auto K = pow(GenNumber::rho(g), -1);
    GSFunc f2(exp(var(0)), 1, GenBox::interval(-K, K));
    auto rep2 = moderate_check(f2, {{K}}, 0);
    CHECK_FALSE(rep2.all_moderate);
}

TEST_CASE("property: representative independence") {
    auto g = dflt();
    GSFunc f(mul(sin(var(0)), exp(var(0))), 1, {});
    auto p = cst(g, 0.4);
    auto eta = pow(GenNumber::rho(g), 12);
    CHECK(eq_up_to_negligible(eval(f, {p}), eval(f, {p + eta}), g->q_check));
}
