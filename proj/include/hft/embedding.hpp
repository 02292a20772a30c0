#pragma once

#include "hft/integration.hpp"

namespace hft {

enum class MollifierKind { hermite, table };

struct MollifierSpec {
    MollifierKind kind = MollifierKind::hermite;
    GenNumber b;  // strong infinite scale, default dρ^{-1}
    // Hermite-Gauss bump beta_J(t) = e^{-s t^2} sum_{j<=J} (s t^2)^j / j!
    double sigma = 1;
    int order = 6;
    // compactly supported bump for the table kind
    double beta_plateau = 0.5;
    double beta_support = 1.0;
    int table_resolution = 4096;
    double table_halfwidth = 40;

    static MollifierSpec defaults(const Grid& g);
    void validate() const;
    std::string canonical() const;
};

struct MollifierError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MollifierTable {
    std::vector<double> x, psi, Psi;
};

class Mollifier {
public:
    const MollifierSpec& spec() const { return spec_; }
    std::shared_ptr<const SpecialFn> psi(int deriv = 0) const;
    std::shared_ptr<const SpecialFn> primitive() const { return Psi_; }
    // bump beta = F(psi)
    real beta(const real& t) const;
    // |psi| below `thresh` outside this radius
    real effective_radius() const { return radius_; }
    Expr b() const { return sym::param("b", spec_.b); }
    MollifierTable table() const;

private:
    friend Mollifier build_mollifier(const MollifierSpec&);
    friend Mollifier import_mollifier(const MollifierTable&, const MollifierSpec&);
    MollifierSpec spec_;
    std::shared_ptr<const SpecialFn> psi_, Psi_;
    std::function<real(const real&)> beta_;
    real radius_ = 40;
};

Mollifier build_mollifier(const MollifierSpec& spec);
// Table kind from explicit samples (uniform x); checks the mass like construction does.
Mollifier import_mollifier(const MollifierTable& t, const MollifierSpec& spec);

// b^{j+1} psi^{(j)}(b * arg)
Expr delta_expr(const Mollifier& m, const Expr& arg, int deriv = 0);
// Psi(b * arg)
Expr heaviside_expr(const Mollifier& m, const Expr& arg);

GSFunc dirac_delta(const Mollifier& m, int n = 1);
GSFunc heaviside(const Mollifier& m);

struct Atom {
    enum Kind { delta, heaviside, delta_derivative } kind = delta;
    int order = 0;
    GenNumber shift;  // empty grid means no shift

    static Atom parse(const std::string& name);
};

struct EmbedTerm {
    GenComplex coef;
    Atom atom;
};

GSFunc embed(const std::vector<EmbedTerm>& combo, const Mollifier& m);

// f*g (x) = int_hint f(y) g(x - y, x1, ...) dy as a lazy node
GSFunc convolve(const GSFunc& f, const GSFunc& g, const GenBox& hint_f, const QuadratureConfig& cfg = {});

struct TameReport {
    GenNumber M, c, b_over_c;  // b_over_c is empty when c is negligible
    MagnitudeClass b_over_c_class;
    bool tame = false;
};

TameReport tame_check(const GSFunc& f, const GenNumber& x, const GenNumber& b, int max_order, double radius = 0.5);

}  // namespace hft
