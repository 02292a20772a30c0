#pragma once

#include "hft/embedding.hpp"

namespace hft {

struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& data);
// printable form of an expression including every parameter's samples
std::string canonical_expr(const Expr& e);

struct TransformResult {
    GSFunc func;  // function of omega, arity n
    GenNumber k;
    std::string source_hash;
};

// F_k(f)(w) = int_{[-k,k]^n} f(x) e^{-i x.w} dx, lazily per w and eps (amplitudes resolved once per eps)
TransformResult hft(const GSFunc& f, const GenNumber& k, const QuadratureConfig& cfg = {});
// F_k^{-1}(g)(x) = (2 pi)^{-n} int_{[-k,k]^n} g(w) e^{i x.w} dw
TransformResult ihft(const GSFunc& g, const GenNumber& k, const QuadratureConfig& cfg = {});

// (h/pi)^n prod_j S(h x_j)
GSFunc dirichlet_delta(const GenNumber& h, int n);

// Delta_{jk} f as a function of omega (j is 0-based); n <= 2
GSFunc delta_term(const GSFunc& f, const GenNumber& k, int j, const QuadratureConfig& cfg = {});

struct IdentityReport {
    std::string identity;
    GenNumber max_diff;   // max over probes of |LHS - RHS| per eps
    GenNumber max_scale;  // max over probes of |RHS|
    double sharp_order = 0;
    bool negligible = false;  // max_diff negligible at q_check
    std::string note;
};

enum class Identity { conjugate, reflect, dilate, translate, modulate, scale_odot, convolution };
Identity parse_identity(const std::string& s);
std::string to_string(Identity id);

struct IdentityArgs {
    GenNumber s;             // dilation t, shift s, modulation s or scale s
    GenNumber support_h;     // translate: f supported in [-h,h]
    GSFunc g;                // convolution partner
    GenBox support_f;        // convolution: hint for f
};

IdentityReport transform_identity(const GSFunc& f, const GenNumber& k, Identity which, const IdentityArgs& args,
                                  const std::vector<GenNumber>& omegas, const QuadratureConfig& cfg = {});

struct DerivativeRuleReport {
    GenNumber max_rel_diff;  // |F(d_j f) - i w_j F(f) - Delta| / max(|F(d_j f)|, |Delta|, |w F(f)|, |F(f)|)
    GenNumber max_abs_diff;
    GenNumber max_delta;     // max |Delta_{jk} f| over probes
    bool delta_negligible = false;
};

DerivativeRuleReport derivative_rule(const GSFunc& f, const GenNumber& k, int j, const std::vector<std::vector<GenNumber>>& omegas,
                                     const QuadratureConfig& cfg = {});

struct ConvergenceReport {
    std::vector<GenNumber> h_sequence;
    std::vector<GenNumber> errors;
    std::vector<double> sharp_orders;
    std::vector<double> fitted_C;   // median over the tail of error * h, per h
    std::vector<double> bound_C;    // tail-bound constant per h (0 when not applicable)
    std::string estimated_rate;
    bool monotone = false;          // consecutive sharp-order gains >= 0.9
    bool rate_consistent = false;   // fitted C within factor 3 of the bound
    bool passes = false;
    // |Dirichlet form - nested transform| at h_0 and one grid index (the nested route costs ~k^2 per index)
    double spot_check = -1;         // -1 when skipped
    int spot_index = -1;
};

struct InversionOptions {
    bool spot_check = false;
    double delta = 1;  // inner radius used by the tail bound
};

// one report per probe y
std::vector<ConvergenceReport> inversion_check(const GSFunc& f, const GenNumber& k, const std::vector<GenNumber>& h_list,
                                               const std::vector<GenNumber>& probes, const QuadratureConfig& cfg = {},
                                               const InversionOptions& opt = {});

struct PlancherelReport {
    GenNumber lhs;
    ConvergenceReport conv;
};

PlancherelReport plancherel_check(const GSFunc& f, const GenNumber& k, const std::vector<GenNumber>& h_list,
                                  const QuadratureConfig& cfg = {});
PlancherelReport parseval_check(const GSFunc& f, const GSFunc& g, const GenNumber& k, const std::vector<GenNumber>& h_list,
                                const QuadratureConfig& cfg = {});

struct RLSample {
    int N = 0;
    GenNumber omega;
    GenNumber lhs, bound;
    bool holds = false;
    bool skipped = false;
    std::string note;
};

struct RiemannLebesgueReport {
    std::vector<RLSample> samples;
    bool tame = false;
    double Q = 0;
    std::vector<bool> high_freq_negligible;  // per omega with sharp order <= -(Q+1)
    bool all_hold = false;
};

RiemannLebesgueReport riemann_lebesgue_check(const GSFunc& f, const GenBox& hint, const std::vector<int>& N_list,
                                             const std::vector<GenNumber>& omegas, const GenNumber& b,
                                             const QuadratureConfig& cfg = {});

struct UncertaintyReport {
    GenNumber x_var, omega_var, omega_var_direct, product, bound;
    OrderRel product_vs_bound = OrderRel::undecided;
    MagnitudeClass x_class, omega_class;
    bool x_invertible = false;
};

// omega_direct_k: window for the direct omega-variance quadrature (empty skips it)
UncertaintyReport uncertainty_check(const GSFunc& psi, const GenBox& hint, const GenNumber& omega_direct_k = {},
                                    const QuadratureConfig& cfg = {});

struct FinitePartSample {
    GenNumber omega;
    GenComplex with_one, plain;
    GenComplex classical;  // empty unless a closed form was given
    bool agree = false, agree_classical = false;
};

struct FinitePartReport {
    std::vector<FinitePartSample> samples;
    GenNumber one_radius;  // where |1| drops below rho^{q_check}
    bool tame = true;
    std::string note;
};

// one = F(delta) as a function; cached per mollifier, k and quadrature
GSFunc finite_one(const Mollifier& m, const GenNumber& k, const QuadratureConfig& cfg = {});
GenNumber one_radius(const Mollifier& m, const GenNumber& k, const QuadratureConfig& cfg = {});

FinitePartReport finite_part_check(const GSFunc& f, const GenNumber& k, const std::vector<GenNumber>& omegas,
                                   const Mollifier& m, const std::function<cplx(const real&)>& classical = {},
                                   const QuadratureConfig& cfg = {});

std::vector<GenNumber> default_omega_probes(const Grid& g);

}  // namespace hft
