#include "hft/session.hpp"

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace hft {

namespace {

json finite_or_null(double d) { return std::isfinite(d) ? json(d) : json(nullptr); }

template <class T>
T get_or(const toml::table& t, const char* key, T dflt) {
    if (auto v = t[key].value<T>()) return *v;
    if (t.contains(key)) throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    return dflt;
}

// accept both numbers and net strings for b and k
std::string net_text(const toml::table& t, const char* key, const std::string& dflt) {
    if (auto s = t[key].value<std::string>()) return *s;
    if (auto d = t[key].value<double>()) {
        std::ostringstream os;
        os.precision(17);
        os << *d;
        return os.str();
    }
    if (t.contains(key)) throw ConfigError(std::string("config key '") + key + "' must be a net expression");
    return dflt;
}

}  // namespace

void SessionConfig::validate() const {
    if (grid_depth < 8) throw ConfigError("grid depth must be >= 8");
    if (!(grid_base > 0 && grid_base < 1)) throw ConfigError("grid base must lie in (0,1)");
    if (q_check < 1 || q_check > n_max) throw ConfigError("q_check must lie in [1, n_max]");
    quadrature.validate();
}

std::string SessionConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "session;depth=" << grid_depth << ";base=" << grid_base << ";gauge=" << gauge_name(gauge)
       << ";q=" << q_check << ";n=" << n_max << ";b=" << b << ";k=" << k
       << ";kind=" << (mollifier.kind == MollifierKind::hermite ? "hermite" : "table") << ";sigma=" << mollifier.sigma
       << ";order=" << mollifier.order << ";plateau=" << mollifier.beta_plateau
       << ";resolution=" << mollifier.table_resolution << ";halfwidth=" << mollifier.table_halfwidth << ";"
       << quadrature.canonical();
    return os.str();
}

SessionConfig parse_session_toml(const std::string& text, SessionConfig c) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        throw ConfigError(std::string("TOML: ") + std::string(e.description()));
    }
    c.k = net_text(root, "k", c.k);
    if (auto* g = root["grid"].as_table()) {
        c.grid_depth = static_cast<int>(get_or<int64_t>(*g, "depth", c.grid_depth));
        c.grid_base = get_or<double>(*g, "base", c.grid_base);
        c.gauge = parse_gauge(get_or<std::string>(*g, "gauge", gauge_name(c.gauge)));
        c.q_check = static_cast<int>(get_or<int64_t>(*g, "q_check", c.q_check));
        c.n_max = static_cast<int>(get_or<int64_t>(*g, "n_max", c.n_max));
    }
    if (auto* m = root["mollifier"].as_table()) {
        std::string kind = get_or<std::string>(*m, "kind", c.mollifier.kind == MollifierKind::hermite ? "hermite" : "table");
        if (kind == "hermite") c.mollifier.kind = MollifierKind::hermite;
        else if (kind == "table") c.mollifier.kind = MollifierKind::table;
        else throw ConfigError("mollifier kind must be hermite or table");
        c.mollifier.sigma = get_or<double>(*m, "sigma", c.mollifier.sigma);
        c.mollifier.order = static_cast<int>(get_or<int64_t>(*m, "order", c.mollifier.order));
        c.mollifier.beta_plateau = get_or<double>(*m, "plateau", c.mollifier.beta_plateau);
        c.mollifier.table_resolution = static_cast<int>(get_or<int64_t>(*m, "resolution", c.mollifier.table_resolution));
        c.mollifier.table_halfwidth = get_or<double>(*m, "halfwidth", c.mollifier.table_halfwidth);
        c.b = net_text(*m, "b", c.b);
    }
    if (auto* q = root["quadrature"].as_table()) {
        c.quadrature.base_panels = static_cast<int>(get_or<int64_t>(*q, "panels", c.quadrature.base_panels));
        c.quadrature.points_per_wavelength = get_or<double>(*q, "ppw", c.quadrature.points_per_wavelength);
        c.quadrature.max_panels = get_or<int64_t>(*q, "max_panels", c.quadrature.max_panels);
        c.quadrature.rel_tol = get_or<double>(*q, "rtol", c.quadrature.rel_tol);
    }
    if (auto* o = root["output"].as_table()) {
        c.out = get_or<std::string>(*o, "out", c.out);
        c.csv = get_or<std::string>(*o, "csv", c.csv);
    }
    c.validate();
    return c;
}

SessionConfig load_session_toml(const std::string& path, SessionConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_session_toml(ss.str(), std::move(base));
}

Session open_session(const SessionConfig& cfg) {
    cfg.validate();
    Session s;
    s.cfg = cfg;
    s.grid = make_grid(cfg.grid_depth, cfg.grid_base, cfg.gauge, cfg.q_check, cfg.n_max);
    s.b = parse_net(cfg.b, s.grid);
    s.k = parse_net(cfg.k, s.grid);
    MollifierSpec ms = cfg.mollifier;
    ms.b = s.b;
    s.moll = build_mollifier(ms);
    return s;
}

std::string Session::grid_hash() const { return sha256_hex(grid->canonical()); }
std::string Session::gauge_hash() const {
    std::string g = gauge_name(grid->gauge) + ":";
    for (const real& r : grid->rho) g += to_string(r) + ",";
    return sha256_hex(g);
}
std::string Session::mollifier_hash() const { return sha256_hex(moll.spec().canonical()); }
std::string Session::quadrature_hash() const { return sha256_hex(cfg.quadrature.canonical()); }
std::string Session::config_hash() const { return sha256_hex(cfg.canonical()); }

ParseEnv Session::parse_env() const {
    ParseEnv env;
    env.grid = grid;
    env.params["b"] = GenComplex(b);
    env.params["k"] = GenComplex(k);
    const Mollifier m = moll;
    auto order_of = [](const std::vector<Expr>& a, std::size_t i) {
        if (a.size() <= i) return 0;
        if (!is_const(a[i])) throw ParseError("derivative order must be a constant");
        cplx v = a[i]->value;
        int n = static_cast<int>(to_double(v.re));
        if (n < 0 || n > 64 || real(n) != v.re) throw ParseError("derivative order must be an integer in [0, 64]");
        return n;
    };
    env.functions["delta"] = [m, order_of](const std::vector<Expr>& a) {
        if (a.empty() || a.size() > 2) throw ParseError("delta takes (arg) or (arg, order)");
        return delta_expr(m, a[0], order_of(a, 1));
    };
    env.functions["heaviside"] = [m](const std::vector<Expr>& a) {
        if (a.size() != 1) throw ParseError("heaviside takes one argument");
        return heaviside_expr(m, a[0]);
    };
    return env;
}

json net_json(const GenNumber& x) {
    json j;
    json eps = json::array(), gauge = json::array(), s = json::array();
    const Grid& g = x.grid();
    for (std::size_t i = 0; i < x.size(); ++i) {
        eps.push_back(to_double(g->eps[i]));
        gauge.push_back(to_double(g->rho[i]));
        s.push_back(finite_or_null(to_double(x[i])));
    }
    j["grid"] = {{"eps", eps}, {"gauge", gauge}};
    j["samples"] = s;
    return j;
}

json net_json(const GenComplex& x) {
    json j = net_json(x.re());
    bool imag = false;
    for (std::size_t i = 0; i < x.size(); ++i) imag = imag || x.im()[i] != 0;
    if (imag) {
        json s = json::array();
        for (std::size_t i = 0; i < x.size(); ++i) s.push_back(finite_or_null(to_double(x.im()[i])));
        j["samples_im"] = s;
    }
    return j;
}

GenNumber net_from_json(const json& j, const Grid& g) {
    if (!j.contains("samples") || !j["samples"].is_array()) throw ParseError("net JSON needs a samples array");
    const json& s = j["samples"];
    if (s.size() != g->size()) throw ParseError("net JSON has " + std::to_string(s.size()) + " samples, grid has " +
                                                std::to_string(g->size()));
    std::vector<real> v;
    for (const auto& x : s) {
        if (!x.is_number()) throw ParseError("net samples must be numbers");
        v.push_back(real(x.get<double>()));
    }
    return GenNumber(g, v);
}

json class_json(const GenNumber& x) {
    const Classification& c = x.classify();
    MagnitudeClass m = magnitude(x);
    json j;
    j["moderate"] = c.moderate;
    j["negligible"] = c.negligible;
    j["sharp_order"] = finite_or_null(c.sharp_order);
    j["certified_order"] = finite_or_null(certified_order(x));
    j["magnitude"] = to_string(m.cls);
    if (m.cls == Magnitude::infinite) j["infinite_kind"] = to_string(m.sub);
    j["invertible"] = invertible(x);
    return j;
}

json report_header(const Session& s, const std::string& command) {
    json j;
    j["tool"] = "hft";
    j["command"] = command;
    j["hashes"] = {{"grid", s.grid_hash()},
                   {"gauge", s.gauge_hash()},
                   {"mollifier", s.mollifier_hash()},
                   {"quadrature", s.quadrature_hash()},
                   {"config", s.config_hash()}};
    j["config"] = {{"grid_depth", s.cfg.grid_depth}, {"grid_base", s.cfg.grid_base},
                   {"gauge", gauge_name(s.cfg.gauge)}, {"q_check", s.cfg.q_check},
                   {"n_max", s.cfg.n_max},           {"b", s.cfg.b},
                   {"k", s.cfg.k}};
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["timestamp"] = buf;
    return j;
}

void write_report(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

}  // namespace hft
