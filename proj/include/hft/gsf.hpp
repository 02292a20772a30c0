#pragma once

#include "hft/gauge_ring.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hft {

struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OverflowError : std::runtime_error {
    OverflowError(const std::string& what, int idx) : std::runtime_error(what), eps_index(idx) {}
    int eps_index;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Op {
    Const, Param, Var, Eps, Rho,
    Add, Sub, Mul, Div, Neg,
    PowInt, Pow, Exp, Log, Sin, Cos, Sinc, Cosh, Sinh, Sqrt,
    Expi, Conj, Abs, FlatExp,
    Special, Apply, Lazy
};

struct Node;
using Expr = std::shared_ptr<const Node>;

struct EvalCtx {
    std::size_t idx = 0;
    const EpsGrid* grid = nullptr;
    const real* x = nullptr;
    std::size_t nx = 0;

    const real& eps() const { return grid->eps[idx]; }
    const real& rho() const { return grid->rho[idx]; }
};

// Unary function of one real argument with a closed family of derivatives
// (mollifier psi^(n), its primitive, spline tables).
class SpecialFn {
public:
    virtual ~SpecialFn() = default;
    virtual std::string name() const = 0;
    virtual cplx eval(const real& u) const = 0;
    virtual std::shared_ptr<const SpecialFn> derivative() const = 0;
    // width of the non-trivial region in the argument variable (quadrature breakpoints)
    virtual real scale() const { return 1; }
};

// Quadrature-backed node (convolution, transform, integral with variable limits).
class LazyOp {
public:
    virtual ~LazyOp() = default;
    virtual std::string describe() const = 0;
    virtual cplx eval(const EvalCtx& ctx) const = 0;
    virtual Expr derivative(int var) const = 0;
    // highest outer variable index read + 1
    virtual int arity() const = 0;
    // angular frequency of hidden oscillation in variable var (0 when unknown or none)
    virtual real frequency_hint(int /*var*/, const EvalCtx& /*ctx*/) const { return 0; }
    // same value at every grid index for equal arguments
    virtual bool eps_invariant() const { return false; }
};

struct Node {
    Op op = Op::Const;
    cplx value;  // Const
    int n = 0;   // Var index, PowInt exponent, Sinc/FlatExp derivative order
    std::vector<Expr> kids;
    std::string name;  // Param name
    std::shared_ptr<const GenComplex> param;
    std::shared_ptr<const SpecialFn> special;
    std::shared_ptr<const LazyOp> lazy;
};

namespace sym {
Expr cnst(const cplx& v);
Expr cnst(double v);
Expr imag_unit();
Expr var(int i);
Expr eps();
Expr rho();
Expr param(const std::string& name, const GenComplex& v);
Expr param(const std::string& name, const GenNumber& v);
Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr mul(const Expr& a, const Expr& b);
Expr div(const Expr& a, const Expr& b);
Expr neg(const Expr& a);
Expr pow_int(const Expr& a, int n);
Expr pow(const Expr& a, const Expr& b);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr sinc(const Expr& a, int deriv = 0);
Expr cosh(const Expr& a);
Expr sinh(const Expr& a);
Expr sqrt(const Expr& a);
Expr expi(const Expr& a);
Expr conj(const Expr& a);
Expr abs(const Expr& a);
Expr flat_exp(const Expr& a, int deriv = 0);
Expr special(std::shared_ptr<const SpecialFn> fn, const Expr& a);
Expr apply(const Expr& callee, std::vector<Expr> args);
Expr lazy(std::shared_ptr<const LazyOp> op);
// smooth step 0 -> 1 on [0,1], flat at both ends
Expr smooth_step(const Expr& u);
// smooth even plateau: 1 on [-p*w, p*w], 0 outside [-w, w], centred at c, scaled by height
Expr plateau(const Expr& x, const real& c, const real& w, const real& p, const real& height = 1);
}  // namespace sym

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

bool is_zero(const Expr& e);
bool is_const(const Expr& e);
bool depends_on(const Expr& e, int var);
int arity_of(const Expr& e);
// no eps/rho and only grid-constant parameters (lazy nodes answer for themselves)
bool eps_invariant(const Expr& e);
bool constant_net(const GenNumber& x);

cplx eval(const Expr& e, const EvalCtx& ctx);
Expr derivative(const Expr& e, int var);
Expr derivative(const Expr& e, const std::vector<int>& multi_index);
// Replace variable i by vars[i] (lazy subtrees are wrapped in Apply).
Expr substitute(const Expr& e, const std::vector<Expr>& vars);

std::string to_sexpr(const Expr& e);

// Sinc derivative S^(n)(z), S(z) = 1/2 int_{-1}^{1} cos(zt) dt.
cplx sinc_deriv(const cplx& z, int n);
// d^n/du^n exp(-1/u) for u > 0, zero otherwise.
real flat_exp_deriv(const real& u, int n);

struct ParseEnv {
    std::map<std::string, GenComplex> params;
    std::map<std::string, std::function<Expr(const std::vector<Expr>&)>> functions;
    Grid grid;  // needed for param-free numeric constants bound to the grid
};

// Accepts prefix S-expressions "(mul (pow-int x0 2) x1)" and call syntax "mul(pow-int(x0,2),x1)".
Expr parse_expr(const std::string& text, const ParseEnv& env = {});
// Net mini-language: rho, eps, numbers, pow, neg, log, inv, exp, mul, div, add, sub.
GenNumber parse_net(const std::string& text, const Grid& grid);

struct GenBox {
    std::vector<GenNumber> lo, hi;
    std::size_t dim() const { return lo.size(); }
    static GenBox interval(const GenNumber& a, const GenNumber& b);
    static GenBox symmetric(const GenNumber& k, std::size_t n);
    bool contains(const std::vector<GenNumber>& p) const;
};

struct GSFunc {
    Expr expr;
    int arity = 1;
    GenBox domain;
    bool complex_valued = false;

    GSFunc() = default;
    GSFunc(Expr e, int n, GenBox dom, bool cv = false)
        : expr(std::move(e)), arity(n), domain(std::move(dom)), complex_valued(cv) {}
};

GenComplex eval(const GSFunc& f, const std::vector<GenNumber>& p);
// no domain check; grid taken from the point
GenComplex eval_expr(const Expr& e, const std::vector<GenNumber>& p, const Grid& grid);
GSFunc derivative(const GSFunc& f, const std::vector<int>& multi_index);
GSFunc compose(const GSFunc& f, const std::vector<GSFunc>& g);
GSFunc combine(const GSFunc& f, const GSFunc& g, char op);

struct ModerateIssue {
    std::vector<int> alpha;
    std::size_t probe = 0;
    double sharp_order = 0;
};

struct ModerateReport {
    bool all_moderate = true;
    double worst_order = 0;
    std::vector<ModerateIssue> issues;
};

ModerateReport moderate_check(const GSFunc& f, const std::vector<std::vector<GenNumber>>& probes, int max_order);

}  // namespace hft
