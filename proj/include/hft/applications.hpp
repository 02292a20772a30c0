#pragma once

#include "hft/hft.hpp"

#include <optional>

namespace hft {

// A symbol (P, or the transform of a convolution kernel) vanishes at a real frequency.
struct SingularSymbolError : std::runtime_error {
    SingularSymbolError(const std::string& what, double omega, int eps_index)
        : std::runtime_error(what), omega(omega), eps_index(eps_index) {}
    double omega;
    int eps_index;
};

// Reconstructions y_h for each h in the list, sampled at the probes.
struct ReconstructionReport {
    std::vector<GenNumber> probes;
    std::vector<GenNumber> h_sequence;
    std::vector<GSFunc> solutions;                 // y_h, one per h
    std::vector<std::vector<GenComplex>> values;   // [h][probe]
    std::vector<std::vector<GenNumber>> errors;    // [h][probe], against the reference when one is known
    std::vector<GenNumber> max_error;              // [h]
    std::vector<double> sharp_orders;              // [h], of max_error
    double order_gain = 0;                         // last minus first sharp order
    bool monotone = false;                         // each consecutive gain >= 0.9
    // operator applied to y_h(last) minus the forcing, per probe; infinitesimal but not negligible
    // for windowed reconstructions (Dirichlet ringing from the boundary terms at +-k)
    std::vector<GenComplex> residuals;
    std::vector<MagnitudeClass> residual_class;
};

// y' = y on [-k,k], y(0) = c, through y_h = F_h^{-1}(Delta_y / (1 - i w)) with y(+-k) = c e^{+-k}.
// zero_delta drops the boundary terms (the reconstruction is then 0 for every h).
ReconstructionReport solve_exp_ode(const GenComplex& c, const GenNumber& k, const std::vector<GenNumber>& h_list,
                                   const std::vector<GenNumber>& x_probes, bool zero_delta = false,
                                   const QuadratureConfig& cfg = {});

struct OdeProblem {
    std::vector<GenComplex> a;           // a_0 .. a_n, a_n invertible
    GSFunc g;                            // forcing; null expression means 0
    std::vector<GenComplex> y_plus_k;    // y^(p)(k), p = 0..n-1
    std::vector<GenComplex> y_minus_k;   // y^(p)(-k)
    GenNumber k;
    void validate() const;
};

// P(w) = sum_j a_j (i w)^j
GSFunc ode_symbol(const OdeProblem& p);
// Delta_y(w) = sum_j a_j sum_{p=1..j} (i w)^{j-p} Delta_{1k} y^{(p-1)}(w)
GSFunc ode_boundary_term(const OdeProblem& p);
// real roots of P per eps (complex roots with |Im| below 1e-12 (1 + |w|))
std::vector<std::vector<real>> real_symbol_roots(const OdeProblem& p);

ReconstructionReport solve_const_coeff_ode(const OdeProblem& p, const std::vector<GenNumber>& h_list,
                                           const std::vector<GenNumber>& x_probes,
                                           const std::function<cplx(std::size_t, const real&)>& reference = {},
                                           const QuadratureConfig& cfg = {});

struct WaveReport {
    GSFunc u;  // u(x0 = x, x1 = t)
    std::vector<std::pair<GenNumber, GenNumber>> probes;
    std::vector<GenComplex> values;
    std::vector<GenComplex> residuals;      // u_tt - c^2 u_xx
    std::vector<GenComplex> initial_value;  // u(x,0) - f(x) at the probe abscissae
    std::vector<GenComplex> initial_rate;   // u_t(x,0) - g(x)
    bool residual_negligible = false;       // at q = 4
};

// d'Alembert: u = (f(x-ct) + f(x+ct))/2 + (1/2c) int_{x-ct}^{x+ct} g
WaveReport wave_dalembert(const GSFunc& f, const GSFunc& g, const GenNumber& c,
                          const std::vector<std::pair<GenNumber, GenNumber>>& probes, const QuadratureConfig& cfg = {});

struct HeatReport {
    GSFunc u;  // u(x0 = x, x1 = t)
    std::vector<std::pair<GenNumber, GenNumber>> probes;
    std::vector<GenComplex> values;
    std::vector<GenComplex> residuals;  // u_t - a^2 u_xx
    bool residual_negligible = false;   // at q = 4
    int window_N = 0;                   // smallest N with t <= -N log(rho)/(a^2 k^2) on the tail
};

// H_t^a(x) = exp(-x^2 / (4 a^2 t)) / (2 a sqrt(pi t)) as a function of (x, t)
GSFunc heat_kernel(const GenNumber& a);

// u = f * H_t^a; hint_f is where f is not negligible; k defaults to -log(rho)
HeatReport heat_solution(const GSFunc& f, const GenBox& hint_f, const GenNumber& a,
                         const std::vector<std::pair<GenNumber, GenNumber>>& probes, const GenNumber& k = {},
                         const QuadratureConfig& cfg = {});

struct Moments {
    GenNumber mass, mean, variance;
};
// moments of x -> u(x) over [lo, hi]
Moments moments(const GSFunc& u, const GenNumber& lo, const GenNumber& hi, const QuadratureConfig& cfg = {});

struct ConvolutionEqReport {
    ReconstructionReport recon;
    std::vector<GenComplex> band_limited_residual;  // f * y_h - F_h^{-1}(F_k g)   (last h)
    std::vector<GenComplex> classical_residual;     // f * y_h - g
};

// f * y = g through y_h = F_h^{-1}(F_k g / F_k f); f is negligible outside hint_f
ConvolutionEqReport solve_convolution_eq(const GSFunc& f, const GenBox& hint_f, const GSFunc& g, const GenNumber& k,
                                         const std::vector<GenNumber>& h_list, const std::vector<GenNumber>& x_probes,
                                         const std::function<cplx(std::size_t, const real&)>& reference = {},
                                         const QuadratureConfig& cfg = {});

}  // namespace hft
