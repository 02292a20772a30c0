#pragma once

#include "hft/gsf.hpp"

#include <array>

namespace hft {

struct QuadratureConfig {
    int base_panels = 64;
    double points_per_wavelength = 6;
    long max_panels = 1L << 20;
    double rel_tol = 1e-10;

    void validate() const;
    std::string canonical() const;
};

struct QuadratureFailure : std::runtime_error {
    QuadratureFailure(const std::string& what, int idx, double res)
        : std::runtime_error(what), eps_index(idx), residual(res) {}
    int eps_index;
    double residual;
};

struct SupportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kFilonNodes = 24;

// Spherical Bessel j_0..j_{n-1} at theta.
void spherical_bessel(const real& theta, std::array<real, kFilonNodes>& out);

// Integral of f over [lo,hi] in variable `var`, with the amplitudes resolved once so that
// the integral against e^{i Omega x} can be taken for any Omega afterwards.
class PreparedIntegral {
public:
    cplx eval(const real& omega = 0) const;
    // only the panels inside [lo, hi]; exact when lo and hi were breakpoints of the preparation
    cplx eval(const real& omega, const real& lo, const real& hi) const;
    const real& l1() const { return l1_; }
    const real& error() const { return err_; }
    std::size_t panels() const { return panels_.size(); }

private:
    friend PreparedIntegral prepare_integral(const Expr&, int, const real&, const real&, const EvalCtx&,
                                             const QuadratureConfig&, const std::vector<real>&);
    struct Panel {
        real mid, rad;
        std::vector<std::array<cplx, kFilonNodes>> coef;  // Legendre coefficients per group
        const std::vector<real>* freqs = nullptr;
    };
    cplx sum(const real& omega, std::size_t from, std::size_t to) const;
    std::vector<Panel> panels_;
    std::vector<std::shared_ptr<std::vector<real>>> freqs_;
    real l1_ = 0, err_ = 0;
    int sign_ = 1;
};

PreparedIntegral prepare_integral(const Expr& f, int var, const real& lo, const real& hi, const EvalCtx& outer,
                                  const QuadratureConfig& cfg, const std::vector<real>& extra_points = {});

// int_lo^hi f e^{i omega x_var} dx_var at one grid index
cplx integrate_eps(const Expr& f, int var, const real& lo, const real& hi, const real& omega, const EvalCtx& outer,
                   const QuadratureConfig& cfg, const std::vector<real>& extra_points = {});

// Lazy node: int_{lo}^{hi} g dx_var, a function of the remaining variables.
Expr integral_node(const Expr& g, int var, const Expr& lo, const Expr& hi, const QuadratureConfig& cfg);

// f = prod_j parts[j](x_j)? Each part is returned as a function of x0.
bool separate_variables(const Expr& e, std::size_t n, std::vector<Expr>& parts);

GenComplex integrate_1d(const GSFunc& f, const GenNumber& a, const GenNumber& b, const QuadratureConfig& cfg = {});
GenComplex integrate_box(const GSFunc& f, const GenBox& box, const QuadratureConfig& cfg = {});
// Integral over the hint, checked against the hint doubled about its centre.
GenComplex integrate_compact_support(const GSFunc& f, const GenBox& hint, const QuadratureConfig& cfg = {});
GenNumber p_norm(const GSFunc& f, const GenNumber& p, const GenBox& hint, const QuadratureConfig& cfg = {});

}  // namespace hft
