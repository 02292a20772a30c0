#include "hft/gsf.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace hft {

namespace {

using boost::multiprecision::fabs;

Expr make(Op op, std::vector<Expr> kids, int n = 0) {
    auto node = std::make_shared<Node>();
    node->op = op;
    node->kids = std::move(kids);
    node->n = n;
    return node;
}

bool is_one(const Expr& e) { return e->op == Op::Const && e->value == cplx(1); }

cplx const_value(const Expr& e) { return e->value; }

}  // namespace

bool is_zero(const Expr& e) { return e->op == Op::Const && e->value == cplx(0); }
bool is_const(const Expr& e) { return e->op == Op::Const; }

namespace sym {

Expr cnst(const cplx& v) {
    auto node = std::make_shared<Node>();
    node->op = Op::Const;
    node->value = v;
    return node;
}

Expr cnst(double v) { return cnst(cplx(real(v))); }
Expr imag_unit() { return cnst(cplx(real(0), real(1))); }

Expr var(int i) {
    auto node = std::make_shared<Node>();
    node->op = Op::Var;
    node->n = i;
    return node;
}

Expr eps() { return make(Op::Eps, {}); }
Expr rho() { return make(Op::Rho, {}); }

Expr param(const std::string& name, const GenComplex& v) {
    auto node = std::make_shared<Node>();
    node->op = Op::Param;
    node->name = name;
    node->param = std::make_shared<const GenComplex>(v);
    return node;
}

Expr param(const std::string& name, const GenNumber& v) { return param(name, GenComplex(v)); }

Expr add(const Expr& a, const Expr& b) {
    if (is_zero(a)) return b;
    if (is_zero(b)) return a;
    if (is_const(a) && is_const(b)) return cnst(const_value(a) + const_value(b));
    return make(Op::Add, {a, b});
}

Expr sub(const Expr& a, const Expr& b) {
    if (is_zero(b)) return a;
    if (is_zero(a)) return neg(b);
    if (is_const(a) && is_const(b)) return cnst(const_value(a) - const_value(b));
    return make(Op::Sub, {a, b});
}

Expr mul(const Expr& a, const Expr& b) {
    if (is_zero(a) || is_zero(b)) return cnst(0.0);
    if (is_one(a)) return b;
    if (is_one(b)) return a;
    if (is_const(a) && is_const(b)) return cnst(const_value(a) * const_value(b));
    if (is_const(b)) return make(Op::Mul, {b, a});
    return make(Op::Mul, {a, b});
}

Expr div(const Expr& a, const Expr& b) {
    if (is_zero(a)) return cnst(0.0);
    if (is_one(b)) return a;
    if (is_const(a) && is_const(b) && !is_zero(b)) return cnst(const_value(a) / const_value(b));
    return make(Op::Div, {a, b});
}

Expr neg(const Expr& a) {
    if (is_const(a)) return cnst(-const_value(a));
    if (a->op == Op::Neg) return a->kids[0];
    return make(Op::Neg, {a});
}

Expr pow_int(const Expr& a, int n) {
    if (n == 0) return cnst(1.0);
    if (n == 1) return a;
    if (is_const(a)) return cnst(hft::pow_int(const_value(a), n));
    return make(Op::PowInt, {a}, n);
}

Expr pow(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return cnst(hft::pow(const_value(a), const_value(b)));
    return make(Op::Pow, {a, b});
}

#define HFT_UNARY(fname, OP, fold)                           \
    Expr fname(const Expr& a) {                              \
        if (is_const(a)) return cnst(fold(const_value(a)));  \
        return make(Op::OP, {a});                            \
    }

HFT_UNARY(exp, Exp, hft::exp)
HFT_UNARY(log, Log, hft::log)
HFT_UNARY(sin, Sin, hft::sin)
HFT_UNARY(cos, Cos, hft::cos)
HFT_UNARY(cosh, Cosh, hft::cosh)
HFT_UNARY(sinh, Sinh, hft::sinh)
HFT_UNARY(sqrt, Sqrt, hft::sqrt)
HFT_UNARY(conj, Conj, hft::conj)
#undef HFT_UNARY

Expr sinc(const Expr& a, int deriv) {
    if (is_const(a)) return cnst(sinc_deriv(const_value(a), deriv));
    return make(Op::Sinc, {a}, deriv);
}

Expr expi(const Expr& a) {
    if (is_const(a)) return cnst(hft::exp(cplx(-const_value(a).im, const_value(a).re)));
    return make(Op::Expi, {a});
}

Expr abs(const Expr& a) {
    if (is_const(a)) return cnst(cplx(hft::abs(const_value(a))));
    return make(Op::Abs, {a});
}

Expr flat_exp(const Expr& a, int deriv) {
    if (is_const(a)) return cnst(cplx(flat_exp_deriv(const_value(a).re, deriv)));
    return make(Op::FlatExp, {a}, deriv);
}

Expr special(std::shared_ptr<const SpecialFn> fn, const Expr& a) {
    auto node = std::make_shared<Node>();
    node->op = Op::Special;
    node->special = std::move(fn);
    node->kids = {a};
    return node;
}

Expr apply(const Expr& callee, std::vector<Expr> args) {
    std::vector<Expr> kids{callee};
    for (auto& a : args) kids.push_back(a);
    return make(Op::Apply, std::move(kids));
}

Expr lazy(std::shared_ptr<const LazyOp> op) {
    auto node = std::make_shared<Node>();
    node->op = Op::Lazy;
    node->lazy = std::move(op);
    return node;
}

Expr smooth_step(const Expr& u) {
    Expr a = flat_exp(u);
    Expr b = flat_exp(sub(cnst(1.0), u));
    return div(a, add(a, b));
}

Expr plateau(const Expr& x, const real& c, const real& w, const real& p, const real& height) {
    Expr d = sub(x, cnst(cplx(c)));
    Expr s = cnst(cplx(w * (1 - p)));
    Expr wl = cnst(cplx(w));
    Expr right = smooth_step(div(sub(wl, d), s));
    Expr left = smooth_step(div(add(wl, d), s));
    return mul(cnst(cplx(height)), mul(left, right));
}

}  // namespace sym

Expr operator+(const Expr& a, const Expr& b) { return sym::add(a, b); }
Expr operator-(const Expr& a, const Expr& b) { return sym::sub(a, b); }
Expr operator*(const Expr& a, const Expr& b) { return sym::mul(a, b); }
Expr operator/(const Expr& a, const Expr& b) { return sym::div(a, b); }
Expr operator-(const Expr& a) { return sym::neg(a); }

bool depends_on(const Expr& e, int var) {
    switch (e->op) {
        case Op::Var: return e->n == var;
        case Op::Lazy: return e->lazy->arity() > var;
        case Op::Apply:
            for (std::size_t i = 1; i < e->kids.size(); ++i)
                if (depends_on(e->kids[i], var)) return true;
            return false;
        default:
            for (auto& k : e->kids)
                if (depends_on(k, var)) return true;
            return false;
    }
}

int arity_of(const Expr& e) {
    switch (e->op) {
        case Op::Var: return e->n + 1;
        case Op::Lazy: return e->lazy->arity();
        case Op::Apply: {
            int a = 0;
            for (std::size_t i = 1; i < e->kids.size(); ++i) a = std::max(a, arity_of(e->kids[i]));
            return a;
        }
        default: {
            int a = 0;
            for (auto& k : e->kids) a = std::max(a, arity_of(k));
            return a;
        }
    }
}

cplx sinc_deriv(const cplx& z, int n) {
    real az = abs(z);
    if (az <= n + 2) {
        // sum_m (-1)^m z^(2m-n) / ((2m-n)! (2m+1)) over 2m >= n
        int m = (n + 1) / 2;
        cplx zp = pow_int(z, 2 * m - n);
        real fact = 1;
        for (int j = 2; j <= 2 * m - n; ++j) fact *= j;
        cplx z2 = z * z;
        cplx sum = 0;
        for (int it = 0; it < 400; ++it, ++m) {
            cplx term = zp / cplx(fact * (2 * m + 1));
            if (m & 1) term = -term;
            sum += term;
            if (abs(term) <= real(1e-36) * abs(sum) && it > 2) break;
            zp *= z2;
            fact *= real(2 * m + 1 - n) * real(2 * m + 2 - n);
        }
        return sum;
    }
    if (n == 0) return sin(z) / z;
    auto in = [n](const cplx& w) {
        cplx iw(-w.im, w.re);
        cplx e = exp(iw);
        cplx v = (e - cplx(1)) / iw;
        for (int m = 1; m <= n; ++m) v = (e - cplx(real(m)) * v) / iw;
        return v;
    };
    cplx ip = pow_int(cplx(0, 1), n), im = pow_int(cplx(0, -1), n);
    return (ip * in(z) + im * in(-z)) / cplx(2);
}

real flat_exp_deriv(const real& u, int n) {
    if (u <= 0) return 0;
    real s = 1 / u;
    if (s > 11000) return 0;
    std::vector<real> p{1};
    for (int k = 0; k < n; ++k) {
        // P_{k+1}(s) = s^2 (P_k(s) - P_k'(s))
        std::vector<real> q(p.size() + 2, 0);
        for (std::size_t j = 0; j < p.size(); ++j) {
            q[j + 2] += p[j];
            if (j) q[j + 1] -= j * p[j];
        }
        p = std::move(q);
    }
    real v = 0;
    for (std::size_t j = p.size(); j-- > 0;) v = v * s + p[j];
    return v * boost::multiprecision::exp(-s);
}

cplx eval(const Expr& e, const EvalCtx& c) {
    const Node& nd = *e;
    switch (nd.op) {
        case Op::Const: return nd.value;
        case Op::Param: return (*nd.param)[c.idx];
        case Op::Var:
            if (static_cast<std::size_t>(nd.n) >= c.nx) throw DomainError("variable x" + std::to_string(nd.n) + " not bound");
            return c.x[nd.n];
        case Op::Eps: return c.eps();
        case Op::Rho: return c.rho();
        case Op::Add: return eval(nd.kids[0], c) + eval(nd.kids[1], c);
        case Op::Sub: return eval(nd.kids[0], c) - eval(nd.kids[1], c);
        case Op::Mul: {
            cplx a = eval(nd.kids[0], c);
            if (a == cplx(0)) return a;
            return a * eval(nd.kids[1], c);
        }
        case Op::Div: {
            cplx a = eval(nd.kids[0], c);
            if (a == cplx(0)) return a;
            return a / eval(nd.kids[1], c);
        }
        case Op::Neg: return -eval(nd.kids[0], c);
        case Op::PowInt: return pow_int(eval(nd.kids[0], c), nd.n);
        case Op::Pow: return pow(eval(nd.kids[0], c), eval(nd.kids[1], c));
        case Op::Exp: return exp(eval(nd.kids[0], c));
        case Op::Log: return log(eval(nd.kids[0], c));
        case Op::Sin: return sin(eval(nd.kids[0], c));
        case Op::Cos: return cos(eval(nd.kids[0], c));
        case Op::Sinc: return sinc_deriv(eval(nd.kids[0], c), nd.n);
        case Op::Cosh: return cosh(eval(nd.kids[0], c));
        case Op::Sinh: return sinh(eval(nd.kids[0], c));
        case Op::Sqrt: return sqrt(eval(nd.kids[0], c));
        case Op::Expi: {
            cplx a = eval(nd.kids[0], c);
            return exp(cplx(-a.im, a.re));
        }
        case Op::Conj: return conj(eval(nd.kids[0], c));
        case Op::Abs: return cplx(abs(eval(nd.kids[0], c)));
        case Op::FlatExp: return cplx(flat_exp_deriv(eval(nd.kids[0], c).re, nd.n));
        case Op::Special: return nd.special->eval(eval(nd.kids[0], c).re);
        case Op::Apply: {
            std::vector<real> xs(nd.kids.size() - 1);
            for (std::size_t i = 1; i < nd.kids.size(); ++i) xs[i - 1] = eval(nd.kids[i], c).re;
            EvalCtx inner = c;
            inner.x = xs.data();
            inner.nx = xs.size();
            return eval(nd.kids[0], inner);
        }
        case Op::Lazy: return nd.lazy->eval(c);
    }
    return 0;
}

Expr derivative(const Expr& e, int v) {
    using namespace sym;
    const Node& nd = *e;
    if (nd.op != Op::Lazy && nd.op != Op::Apply && !depends_on(e, v)) return cnst(0.0);
    auto d = [v](const Expr& k) { return derivative(k, v); };
    switch (nd.op) {
        case Op::Const:
        case Op::Param:
        case Op::Eps:
        case Op::Rho: return cnst(0.0);
        case Op::Var: return cnst(nd.n == v ? 1.0 : 0.0);
        case Op::Add: return add(d(nd.kids[0]), d(nd.kids[1]));
        case Op::Sub: return sub(d(nd.kids[0]), d(nd.kids[1]));
        case Op::Neg: return neg(d(nd.kids[0]));
        case Op::Mul: return add(mul(d(nd.kids[0]), nd.kids[1]), mul(nd.kids[0], d(nd.kids[1])));
        case Op::Div: {
            const Expr &a = nd.kids[0], &b = nd.kids[1];
            Expr db = d(b);
            if (is_zero(db)) return div(d(a), b);
            return sub(div(d(a), b), div(mul(a, db), pow_int(b, 2)));
        }
        case Op::PowInt:
            return mul(mul(cnst(double(nd.n)), pow_int(nd.kids[0], nd.n - 1)), d(nd.kids[0]));
        case Op::Pow: {
            const Expr &a = nd.kids[0], &b = nd.kids[1];
            Expr t = add(mul(d(b), log(a)), div(mul(b, d(a)), a));
            return mul(e, t);
        }
        case Op::Exp: return mul(e, d(nd.kids[0]));
        case Op::Log: return div(d(nd.kids[0]), nd.kids[0]);
        case Op::Sin: return mul(cos(nd.kids[0]), d(nd.kids[0]));
        case Op::Cos: return neg(mul(sin(nd.kids[0]), d(nd.kids[0])));
        case Op::Sinc: return mul(sinc(nd.kids[0], nd.n + 1), d(nd.kids[0]));
        case Op::Cosh: return mul(sinh(nd.kids[0]), d(nd.kids[0]));
        case Op::Sinh: return mul(cosh(nd.kids[0]), d(nd.kids[0]));
        case Op::Sqrt: return div(d(nd.kids[0]), mul(cnst(2.0), e));
        case Op::Expi: return mul(mul(imag_unit(), e), d(nd.kids[0]));
        case Op::Conj: return conj(d(nd.kids[0]));
        case Op::Abs: throw CapabilityError("abs is not differentiable");
        case Op::FlatExp: return mul(flat_exp(nd.kids[0], nd.n + 1), d(nd.kids[0]));
        case Op::Special: return mul(special(nd.special->derivative(), nd.kids[0]), d(nd.kids[0]));
        case Op::Apply: {
            Expr sum = cnst(0.0);
            for (std::size_t j = 1; j < nd.kids.size(); ++j) {
                Expr da = d(nd.kids[j]);
                if (is_zero(da)) continue;
                std::vector<Expr> args(nd.kids.begin() + 1, nd.kids.end());
                sum = add(sum, mul(sym::apply(derivative(nd.kids[0], static_cast<int>(j - 1)), args), da));
            }
            return sum;
        }
        case Op::Lazy: return nd.lazy->derivative(v);
    }
    return cnst(0.0);
}

Expr derivative(const Expr& e, const std::vector<int>& alpha) {
    Expr r = e;
    for (std::size_t j = 0; j < alpha.size(); ++j)
        for (int k = 0; k < alpha[j]; ++k) r = derivative(r, static_cast<int>(j));
    return r;
}

Expr substitute(const Expr& e, const std::vector<Expr>& vars) {
    using namespace sym;
    const Node& nd = *e;
    auto s = [&](std::size_t i) { return substitute(nd.kids[i], vars); };
    switch (nd.op) {
        case Op::Const:
        case Op::Param:
        case Op::Eps:
        case Op::Rho: return e;
        case Op::Var:
            if (static_cast<std::size_t>(nd.n) >= vars.size()) throw DomainError("substitution misses a variable");
            return vars[nd.n];
        case Op::Lazy: return sym::apply(e, vars);
        case Op::Apply: {
            std::vector<Expr> args;
            for (std::size_t i = 1; i < nd.kids.size(); ++i) args.push_back(s(i));
            return sym::apply(nd.kids[0], args);
        }
        case Op::Add: return add(s(0), s(1));
        case Op::Sub: return sub(s(0), s(1));
        case Op::Mul: return mul(s(0), s(1));
        case Op::Div: return div(s(0), s(1));
        case Op::Pow: return pow(s(0), s(1));
        default: {
            auto node = std::make_shared<Node>(nd);
            for (std::size_t i = 0; i < node->kids.size(); ++i) node->kids[i] = s(i);
            return node;
        }
    }
}

namespace {

const char* op_name(Op op) {
    switch (op) {
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
        case Op::Neg: return "neg";
        case Op::PowInt: return "pow-int";
        case Op::Pow: return "pow";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Sinc: return "sinc_smooth";
        case Op::Cosh: return "cosh";
        case Op::Sinh: return "sinh";
        case Op::Sqrt: return "sqrt";
        case Op::Expi: return "expi";
        case Op::Conj: return "conj";
        case Op::Abs: return "abs";
        case Op::FlatExp: return "flat-exp";
        default: return "?";
    }
}

void print(const Expr& e, std::ostream& os) {
    const Node& nd = *e;
    switch (nd.op) {
        case Op::Const:
            if (nd.value.im == 0) os << to_string(nd.value.re);
            else os << "(complex " << to_string(nd.value.re) << " " << to_string(nd.value.im) << ")";
            return;
        case Op::Param: os << nd.name; return;
        case Op::Var: os << "x" << nd.n; return;
        case Op::Eps: os << "eps"; return;
        case Op::Rho: os << "rho"; return;
        case Op::Special: os << "(" << nd.special->name() << " "; print(nd.kids[0], os); os << ")"; return;
        case Op::Lazy: os << nd.lazy->describe(); return;
        case Op::Apply:
            os << "(apply";
            for (auto& k : nd.kids) os << " ", print(k, os);
            os << ")";
            return;
        case Op::PowInt:
            os << "(pow-int ";
            print(nd.kids[0], os);
            os << " " << nd.n << ")";
            return;
        case Op::Sinc:
        case Op::FlatExp:
            if (nd.n) {
                os << "(" << op_name(nd.op) << "-d " << nd.n << " ";
                print(nd.kids[0], os);
                os << ")";
                return;
            }
            [[fallthrough]];
        default:
            os << "(" << op_name(nd.op);
            for (auto& k : nd.kids) os << " ", print(k, os);
            os << ")";
    }
}

// ---- parser ----

struct Tok {
    enum Kind { LP, RP, COMMA, ATOM, END } kind;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) {}
    Tok next() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ >= s_.size()) return {Tok::END, ""};
        char ch = s_[pos_];
        if (ch == '(') return ++pos_, Tok{Tok::LP, "("};
        if (ch == ')') return ++pos_, Tok{Tok::RP, ")"};
        if (ch == ',') return ++pos_, Tok{Tok::COMMA, ","};
        std::size_t b = pos_;
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ',') break;
            ++pos_;
        }
        return {Tok::ATOM, s_.substr(b, pos_ - b)};
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
};

bool looks_numeric(const std::string& t) {
    if (t.empty()) return false;
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    return i < t.size() && (std::isdigit(static_cast<unsigned char>(t[i])) || t[i] == '.');
}

class Parser {
public:
    Parser(const std::string& s, const ParseEnv& env) : lex_(s), env_(env) { advance(); }

    Expr parse_all() {
        Expr e = parse();
        if (cur_.kind != Tok::END) throw ParseError("trailing input after expression: '" + cur_.text + "'");
        return e;
    }

private:
    void advance() { cur_ = lex_.next(); }

    Expr parse() {
        if (cur_.kind == Tok::LP) {
            advance();
            if (cur_.kind != Tok::ATOM) throw ParseError("expected operator name after '('");
            std::string name = cur_.text;
            advance();
            std::vector<Expr> args;
            std::vector<std::string> raw;
            while (cur_.kind != Tok::RP) {
                if (cur_.kind == Tok::END) throw ParseError("unbalanced parentheses");
                raw.push_back(cur_.kind == Tok::ATOM ? cur_.text : "");
                args.push_back(parse());
            }
            advance();
            return call(name, args, raw);
        }
        if (cur_.kind != Tok::ATOM) throw ParseError("unexpected token '" + cur_.text + "'");
        std::string name = cur_.text;
        advance();
        if (cur_.kind == Tok::LP) {
            advance();
            std::vector<Expr> args;
            std::vector<std::string> raw;
            if (cur_.kind != Tok::RP) {
                for (;;) {
                    raw.push_back(cur_.kind == Tok::ATOM ? cur_.text : "");
                    args.push_back(parse());
                    if (cur_.kind == Tok::COMMA) { advance(); continue; }
                    if (cur_.kind == Tok::RP) break;
                    throw ParseError("expected ',' or ')' in argument list of " + name);
                }
            }
            advance();
            return call(name, args, raw);
        }
        return atom(name);
    }

    Expr atom(const std::string& t) {
        if (looks_numeric(t)) {
            try {
                return sym::cnst(cplx(parse_real(t)));
            } catch (const std::exception&) {
                throw ParseError("bad number '" + t + "'");
            }
        }
        if (t == "eps") return sym::eps();
        if (t == "rho") return sym::rho();
        if (t == "pi") return sym::cnst(cplx(kPi));
        if (t == "i") return sym::imag_unit();
        if (t.size() > 1 && t[0] == 'x' && std::all_of(t.begin() + 1, t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            return sym::var(std::stoi(t.substr(1)));
        if (auto it = env_.params.find(t); it != env_.params.end()) return sym::param(t, it->second);
        if (auto it = env_.functions.find(t); it != env_.functions.end()) return it->second({});
        throw ParseError("unknown symbol '" + t + "'");
    }

    static void want(const std::string& name, const std::vector<Expr>& a, std::size_t n) {
        if (a.size() != n)
            throw ParseError(name + " expects " + std::to_string(n) + " argument(s), got " + std::to_string(a.size()));
    }

    static real const_real(const std::string& name, const Expr& e) {
        if (!is_const(e) || e->value.im != 0) throw ParseError(name + " expects a real numeric constant");
        return e->value.re;
    }

    Expr call(const std::string& name, const std::vector<Expr>& a, const std::vector<std::string>& raw) {
        using namespace sym;
        if (auto it = env_.functions.find(name); it != env_.functions.end()) return it->second(a);
        if (name == "add" || name == "mul") {
            if (a.empty()) throw ParseError(name + " expects arguments");
            Expr r = a[0];
            for (std::size_t i = 1; i < a.size(); ++i) r = name == "add" ? add(r, a[i]) : mul(r, a[i]);
            return r;
        }
        if (name == "sub") { want(name, a, 2); return sub(a[0], a[1]); }
        if (name == "div") { want(name, a, 2); return div(a[0], a[1]); }
        if (name == "neg") { want(name, a, 1); return neg(a[0]); }
        if (name == "inv") { want(name, a, 1); return div(cnst(1.0), a[0]); }
        if (name == "pow") { want(name, a, 2); return pow(a[0], a[1]); }
        if (name == "pow-int") {
            want(name, a, 2);
            real n = const_real(name, a[1]);
            if (n != boost::multiprecision::floor(n)) throw ParseError("pow-int exponent must be an integer: " + raw[1]);
            return pow_int(a[0], static_cast<int>(n));
        }
        if (name == "complex") {
            want(name, a, 2);
            return cnst(cplx(const_real(name, a[0]), const_real(name, a[1])));
        }
        if (name == "sinc_smooth-d" || name == "flat-exp-d") {
            want(name, a, 2);
            int n = static_cast<int>(const_real(name, a[0]));
            return name == "flat-exp-d" ? flat_exp(a[1], n) : sinc(a[1], n);
        }
        if (name == "plateau") {
            want(name, a, 4);
            return plateau(a[0], const_real(name, a[1]), const_real(name, a[2]), const_real(name, a[3]));
        }
        static const std::map<std::string, Expr (*)(const Expr&)> unary = {
            {"exp", sym::exp},   {"log", sym::log},   {"sin", sym::sin},     {"cos", sym::cos},
            {"cosh", sym::cosh}, {"sinh", sym::sinh}, {"sqrt", sym::sqrt},   {"expi", sym::expi},
            {"conj", sym::conj}, {"abs", sym::abs},   {"step", sym::smooth_step},
        };
        if (auto it = unary.find(name); it != unary.end()) {
            want(name, a, 1);
            return it->second(a[0]);
        }
        if (name == "sinc_smooth" || name == "sinc") { want(name, a, 1); return sinc(a[0]); }
        if (name == "flat-exp") { want(name, a, 1); return flat_exp(a[0]); }
        throw ParseError("unknown function '" + name + "'");
    }

    Lexer lex_;
    const ParseEnv& env_;
    Tok cur_{Tok::END, ""};
};

void multi_indices(int n, int order, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == n) {
        out.push_back(cur);
        return;
    }
    int used = 0;
    for (int v : cur) used += v;
    for (int k = 0; k + used <= order; ++k) {
        cur.push_back(k);
        multi_indices(n, order, cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::string to_sexpr(const Expr& e) {
    std::ostringstream os;
    print(e, os);
    return os.str();
}

Expr parse_expr(const std::string& text, const ParseEnv& env) { return Parser(text, env).parse_all(); }

GenNumber parse_net(const std::string& text, const Grid& grid) {
    ParseEnv env;
    env.grid = grid;
    Expr e = parse_expr(text, env);
    if (arity_of(e) > 0) throw ParseError("net expression must not contain spatial variables");
    GenComplex v = eval_expr(e, {}, grid);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v.im()[i] != 0) throw ParseError("net expression is not real: " + text);
    return v.re();
}

GenBox GenBox::interval(const GenNumber& a, const GenNumber& b) { return GenBox{{a}, {b}}; }

GenBox GenBox::symmetric(const GenNumber& k, std::size_t n) {
    GenBox b;
    for (std::size_t i = 0; i < n; ++i) b.lo.push_back(-k), b.hi.push_back(k);
    return b;
}

bool GenBox::contains(const std::vector<GenNumber>& p) const {
    if (p.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i) {
        if (order_compare(lo[i], p[i]) != OrderRel::leq) return false;
        if (order_compare(p[i], hi[i]) != OrderRel::leq) return false;
    }
    return true;
}

bool constant_net(const GenNumber& x) {
    for (std::size_t i = 1; i < x.size(); ++i)
        if (x[i] != x[0]) return false;
    return true;
}

bool eps_invariant(const Expr& e) {
    const Node& nd = *e;
    switch (nd.op) {
        case Op::Eps:
        case Op::Rho: return false;
        case Op::Param: return constant_net(nd.param->re()) && constant_net(nd.param->im());
        case Op::Lazy: return nd.lazy->eps_invariant();
        default: break;
    }
    for (auto& k : nd.kids)
        if (!eps_invariant(k)) return false;
    return true;
}

GenComplex eval_expr(const Expr& e, const std::vector<GenNumber>& p, const Grid& grid) {
    std::vector<real> xs(p.size());
    bool same = std::all_of(p.begin(), p.end(), [](const GenNumber& x) { return constant_net(x); }) && eps_invariant(e);
    if (same && grid->size() > 0) {
        // evaluate once at the finest index (strictest quadrature tolerance) and replicate
        std::size_t last = grid->size() - 1;
        for (std::size_t j = 0; j < p.size(); ++j) xs[j] = p[j][last];
        EvalCtx c{last, grid.get(), xs.data(), xs.size()};
        cplx v = eval(e, c);
        if (!isfinite(v)) throw OverflowError("non-finite evaluation at eps index " + std::to_string(last), static_cast<int>(last));
        return GenComplex::from_fn(grid, [&](std::size_t) { return v; });
    }
    return GenComplex::from_fn(grid, [&](std::size_t i) {
        for (std::size_t j = 0; j < p.size(); ++j) xs[j] = p[j][i];
        EvalCtx c{i, grid.get(), xs.data(), xs.size()};
        cplx v = eval(e, c);
        if (!isfinite(v)) throw OverflowError("non-finite evaluation at eps index " + std::to_string(i), static_cast<int>(i));
        return v;
    });
}

GenComplex eval(const GSFunc& f, const std::vector<GenNumber>& p) {
    if (static_cast<int>(p.size()) != f.arity) throw DomainError("point dimension differs from function arity");
    if (f.domain.dim() && !f.domain.contains(p)) throw DomainError("evaluation point outside the declared domain");
    if (p.empty()) throw DomainError("evaluation needs at least one coordinate");
    return eval_expr(f.expr, p, p[0].grid());
}

GSFunc derivative(const GSFunc& f, const std::vector<int>& alpha) {
    return GSFunc(derivative(f.expr, alpha), f.arity, f.domain, f.complex_valued);
}

GSFunc compose(const GSFunc& f, const std::vector<GSFunc>& g) {
    if (static_cast<int>(g.size()) != f.arity) throw DomainError("compose: arity mismatch");
    std::vector<Expr> vars;
    bool cv = f.complex_valued;
    for (auto& gi : g) {
        if (gi.arity != g[0].arity) throw DomainError("compose: inner functions differ in arity");
        vars.push_back(gi.expr);
        cv = cv || gi.complex_valued;
    }
    return GSFunc(substitute(f.expr, vars), g[0].arity, g[0].domain, cv);
}

GSFunc combine(const GSFunc& f, const GSFunc& g, char op) {
    if (f.arity != g.arity) throw DomainError("combine: arity mismatch");
    Expr e;
    switch (op) {
        case '+': e = f.expr + g.expr; break;
        case '-': e = f.expr - g.expr; break;
        case '*': e = f.expr * g.expr; break;
        case '/': e = f.expr / g.expr; break;
        default: throw DomainError(std::string("combine: unknown operator ") + op);
    }
    return GSFunc(e, f.arity, f.domain, f.complex_valued || g.complex_valued);
}

ModerateReport moderate_check(const GSFunc& f, const std::vector<std::vector<GenNumber>>& probes, int max_order) {
    ModerateReport rep;
    std::vector<std::vector<int>> alphas;
    std::vector<int> cur;
    multi_indices(f.arity, max_order, cur, alphas);
    rep.worst_order = std::numeric_limits<double>::infinity();
    for (auto& alpha : alphas) {
        GSFunc d = derivative(f, alpha);
        for (std::size_t p = 0; p < probes.size(); ++p) {
            GenNumber v = abs(eval(d, probes[p]));
            const Classification& c = v.classify();
            rep.worst_order = std::min(rep.worst_order, c.sharp_order);
            if (!c.moderate) {
                rep.all_moderate = false;
                rep.issues.push_back({alpha, p, c.sharp_order});
            }
        }
    }
    return rep;
}

}  // namespace hft
