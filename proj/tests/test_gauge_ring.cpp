#include "doctest.h"
#include "hft/gauge_ring.hpp"

#include <cmath>
#include <random>

using namespace hft;

namespace {

Grid dflt() { return make_grid(12, 0.5); }

GenNumber rho_pow(const Grid& g, int n) { return pow(GenNumber::rho(g), n); }

}  // namespace

TEST_CASE("grid construction") {
    auto g = make_grid(12, 0.5);
    CHECK(g->size() == 12);
    CHECK(g->eps[0] == real(0.5));
    CHECK(g->eps[11] == real(1.0 / 4096));
    CHECK(g->rho == g->eps);
    auto g10 = make_grid(8, 0.1);
    CHECK(abs(g10->eps[7] - real("1e-8")) < real("1e-30"));
    CHECK_THROWS_AS(make_grid(4, 0.5), ConfigError);
    CHECK_THROWS_AS(make_grid(12, 1.5), ConfigError);
    auto gl = make_grid(12, 0.5, GaugeKind::log);
    for (std::size_t i = 0; i < gl->size(); ++i) {
        CHECK(gl->rho[i] > 0);
        CHECK(gl->rho[i] <= 1);
        if (i) CHECK(gl->rho[i] < gl->rho[i - 1]);
    }
}

TEST_CASE("classify examples") {
    auto g = dflt();
    auto c = rho_pow(g, -3).classify();
    CHECK(c.moderate);
    CHECK_FALSE(c.negligible);
    CHECK(c.sharp_order == doctest::Approx(-3).epsilon(1e-9));

    auto big = GenNumber::from_fn(g, [&](std::size_t i) { return boost::multiprecision::exp(1 / g->rho[i]); });
    CHECK_FALSE(big.classify().moderate);

    auto s = GenNumber::from_fn(g, [&](std::size_t i) {
        return g->rho[i] * g->rho[i] * boost::multiprecision::sin(1 / g->eps[i]);
    });
    auto cs = s.classify();
    CHECK(cs.moderate);
    CHECK_FALSE(cs.negligible);
    // oracle: regression in double over the tail
    double mx = 0, my = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int i = 6; i < 12; ++i) {
        double e = std::pow(0.5, i + 1);
        double v = std::abs(e * e * std::sin(1 / e));
        mx += std::log(e), my += std::log(v), ++n;
    }
    mx /= n, my /= n;
    for (int i = 6; i < 12; ++i) {
        double e = std::pow(0.5, i + 1);
        double v = std::abs(e * e * std::sin(1 / e));
        sxx += (std::log(e) - mx) * (std::log(e) - mx);
        sxy += (std::log(e) - mx) * (std::log(v) - my);
    }
    CHECK(cs.sharp_order == doctest::Approx(sxy / sxx).epsilon(1e-6));
    CHECK(cs.sharp_order == doctest::Approx(2).epsilon(0.15));
}

TEST_CASE("zero samples do not crash classification") {
    auto g = dflt();
    std::vector<real> v(12, real(0));
    v[11] = 1;
    GenNumber x(g, v);
    CHECK(x.classify().moderate);
    CHECK(GenNumber::constant(g, 0).classify().negligible);
}

TEST_CASE("non-finite samples rejected") {
    auto g = dflt();
    std::vector<real> v(12, real(1));
    v[3] = std::numeric_limits<real>::infinity();
    CHECK_THROWS_AS(GenNumber(g, v), RingError);
}

TEST_CASE("ring ops examples") {
    auto g = dflt();
    auto one = GenNumber::constant(g, 1);
    auto r = GenNumber::rho(g);
    auto s = one + r;
    for (std::size_t i = 0; i < 12; ++i) CHECK(s[i] == 1 + g->rho[i]);
    auto a = abs(-pow(r, -1));
    for (std::size_t i = 0; i < 12; ++i) CHECK(a[i] == 1 / g->rho[i]);
    auto m = max(r, pow(r, 2));
    CHECK(m.samples() == r.samples());
    CHECK_THROWS_AS(one / GenNumber::constant(g, 0), RingError);
    try {
        (void)(one / GenNumber::constant(g, 0));
    } catch (const RingError& e) {
        CHECK(e.indices.size() == 12);
    }
}

TEST_CASE("eq_up_to_negligible examples") {
    auto g = dflt();
    auto one = GenNumber::constant(g, 1);
    auto r = GenNumber::rho(g);
    CHECK(eq_up_to_negligible(r, r, 6));
    CHECK(eq_up_to_negligible(one, one + pow(r, 10), 6));
    CHECK_FALSE(eq_up_to_negligible(one, one + pow(r, 3), 6));
}

TEST_CASE("order_compare examples") {
    auto g = dflt();
    auto one = GenNumber::constant(g, 1);
    auto r = GenNumber::rho(g);
    CHECK(order_compare(r, one) == OrderRel::leq);
    CHECK(order_compare(one + r, one) == OrderRel::geq_strict_on_tail);
    auto alt = GenNumber::from_fn(g, [&](std::size_t i) { return (i % 2 ? -1 : 1) * g->rho[i]; });
    CHECK(order_compare(alt, GenNumber::constant(g, 0)) == OrderRel::undecided);
}

TEST_CASE("invertible examples") {
    auto g = dflt();
    CHECK(invertible(pow(GenNumber::rho(g), 5)));
    CHECK_FALSE(invertible(GenNumber::constant(g, 0)));
    auto tiny = GenNumber::from_fn(g, [&](std::size_t i) { return boost::multiprecision::exp(-1 / g->eps[i]); });
    CHECK_FALSE(invertible(tiny));
}

TEST_CASE("magnitude examples") {
    auto g = dflt();
    auto r = GenNumber::rho(g);
    CHECK(magnitude(r).cls == Magnitude::infinitesimal);
    auto w = magnitude(-log(r));
    CHECK(w.cls == Magnitude::infinite);
    CHECK(w.sub == InfiniteKind::weak);
    auto st = magnitude(pow(r, -2));
    CHECK(st.cls == Magnitude::infinite);
    CHECK(st.sub == InfiniteKind::strong);
    CHECK(magnitude(GenNumber::constant(g, 3)).cls == Magnitude::finite);
    auto osc = GenNumber::from_fn(g, [&](std::size_t i) { return boost::multiprecision::sin(1 / g->eps[i]) / g->eps[i]; });
    CHECK(magnitude(osc).cls == Magnitude::mixed);
}

TEST_CASE("property: magnitude of rho powers") {
    auto g = dflt();
    auto r = GenNumber::rho(g);
    for (int n = 1; n <= 8; ++n) {
        auto m = magnitude(pow(r, -n));
        CHECK(m.cls == Magnitude::infinite);
        CHECK(m.sub == InfiniteKind::strong);
        CHECK(magnitude(pow(r, n)).cls == Magnitude::infinitesimal);
    }
}

TEST_CASE("property: negligibility is monotone in q and excludes invertibility") {
    auto g = dflt();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ord(-3, 14), amp(0.1, 10);
    for (int t = 0; t < 200; ++t) {
        double q = ord(rng), a = amp(rng);
        auto x = GenNumber::from_fn(g, [&](std::size_t i) {
            return real(a) * boost::multiprecision::pow(g->rho[i], real(q)) * (1 + real(0.1) * ((i * 7) % 3));
        });
        for (int qq = 1; qq <= 12; ++qq)
            if (negligible(x, qq))
                for (int p = 0; p < qq; ++p) CHECK(negligible(x, p));
        CHECK_FALSE((invertible(x) && x.classify().negligible));
    }
}

TEST_CASE("property: ring axioms on samples") {
    auto g = dflt();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5, 5), e(-4, 4);
    auto rnd = [&] {
        double a = u(rng), p = e(rng);
        return GenNumber::from_fn(g, [&](std::size_t i) { return real(a) * boost::multiprecision::pow(g->rho[i], real(p)); });
    };
    for (int t = 0; t < 100; ++t) {
        auto x = rnd(), y = rnd(), z = rnd();
        CHECK((x * y).samples() == (y * x).samples());
        CHECK((x + y).samples() == (y + x).samples());
        auto a1 = (x + y) + z, a2 = x + (y + z), d1 = x * (y + z), d2 = x * y + x * z;
        for (std::size_t i = 0; i < 12; ++i) {
            real scale = abs(x[i]) + abs(y[i]) + abs(z[i]);
            CHECK(abs(a1[i] - a2[i]) <= 4 * std::numeric_limits<real>::epsilon() * scale);
            CHECK(abs(d1[i] - d2[i]) <= 4 * std::numeric_limits<real>::epsilon() * abs(x[i]) * scale);
        }
        auto lhs = abs(x * y), rhs = abs(x) * abs(y);
        CHECK(lhs.samples() == rhs.samples());
        auto s = abs(x + y), t2 = abs(x) + abs(y);
        for (std::size_t i = 0; i < 12; ++i) CHECK(s[i] <= t2[i]);
        CHECK(order_compare(x, x) == OrderRel::leq);
        auto oxy = order_compare(x, y), oyx = order_compare(y, x);
        if (oxy == OrderRel::leq && oyx == OrderRel::leq) CHECK(eq_up_to_negligible(x, y, g->q_check));
    }
}

TEST_CASE("complex nets") {
    auto g = dflt();
    GenComplex z(GenNumber::constant(g, 3), GenNumber::constant(g, 4));
    auto a = abs(z);
    CHECK(a[5] == 5);
    auto q = z / z;
    CHECK(abs(q[3].re - 1) < real("1e-30"));
    CHECK(conj(z).im()[0] == -4);
    CHECK_THROWS_AS(z / GenComplex(GenNumber::constant(g, 0)), RingError);
}

TEST_CASE("property: ring axioms are bit-exact on dyadic nets") {
    auto g = dflt();
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> c(-1000, 1000), p(-4, 4);
    auto rnd = [&] {
        int a = c(rng), q = p(rng);
        return GenNumber::from_fn(g, [&](std::size_t i) { return real(a + c(rng)) * boost::multiprecision::pow(g->rho[i], q); });
    };
    for (int t = 0; t < 100; ++t) {
        auto x = rnd(), y = rnd(), z = rnd();
        CHECK(((x + y) + z).samples() == (x + (y + z)).samples());
        CHECK((x * (y + z)).samples() == (x * y + x * z).samples());
        CHECK(((x * y) * z).samples() == (x * (y * z)).samples());
    }
}
