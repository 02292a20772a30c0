// hft: transform, solve and verify from the command line.
// Exit codes: 0 ok, 1 usage or input error, 2 verification failure.

#include "hft/commands.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace hft;

namespace {

struct Cli {
    SessionConfig cfg;
    std::string config_path;
    // flag overrides, applied over the TOML config
    std::optional<int> depth, qcheck, panels;
    std::optional<double> base, rtol, ppw;
    std::optional<long> max_panels;
    std::optional<std::string> gauge, b, k, out, csv;

    Session open() {
        SessionConfig c = cfg;
        if (!config_path.empty()) c = load_session_toml(config_path, c);
        if (depth) c.grid_depth = *depth;
        if (base) c.grid_base = *base;
        if (gauge) c.gauge = parse_gauge(*gauge);
        if (qcheck) c.q_check = *qcheck;
        if (b) c.b = *b;
        if (k) c.k = *k;
        if (panels) c.quadrature.base_panels = *panels;
        if (ppw) c.quadrature.points_per_wavelength = *ppw;
        if (max_panels) c.quadrature.max_panels = *max_panels;
        if (rtol) c.quadrature.rel_tol = *rtol;
        if (out) c.out = *out;
        if (csv) c.csv = *csv;
        return open_session(c);
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// write the report and plot data; exit 2 when a verification failed
int emit(const Session& s, const Report& r) {
    write_report(r.body, s.cfg.out);
    write_csv(r, s.grid, s.cfg.csv);
    return r.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperfinite Fourier transform over the Robinson-Colombeau ring"};
    app.require_subcommand(1);
    Cli cli;
    app.add_option("--config", cli.config_path, "TOML session config")->check(CLI::ExistingFile);
    app.add_option("--grid-depth", cli.depth, "number of eps samples");
    app.add_option("--grid-base", cli.base, "eps_i = base^(i+1)");
    app.add_option("--gauge", cli.gauge, "identity or log");
    app.add_option("--b", cli.b, "mollifier scale (net expression)");
    app.add_option("--k", cli.k, "transform window (net expression)");
    app.add_option("--qcheck", cli.qcheck, "negligibility order");
    app.add_option("--rtol", cli.rtol, "quadrature relative tolerance");
    app.add_option("--panels", cli.panels, "base panel count");
    app.add_option("--ppw", cli.ppw, "points per wavelength");
    app.add_option("--max-panels", cli.max_panels, "panel cap");
    app.add_option("--out", cli.out, "JSON report path (stdout if absent)");
    app.add_option("--csv", cli.csv, "CSV plot data path");

    std::function<int()> action;
    std::string f_text = "gaussian", g_text, omega = "0", xs = "0", hint = "40", spec, kind, net_text;

    auto* tr = app.add_subcommand("transform", "F_k f at the given frequencies");
    tr->add_option("--f", f_text, "gaussian, delta, one, heaviside or an expression in x0");
    tr->add_option("--omega", omega, "comma-separated net expressions");
    tr->callback([&] { action = [&] { Session s = cli.open(); return emit(s, transform_report(s, f_text, omega, false)); }; });

    auto* inv = app.add_subcommand("invert", "inverse transform at the given points");
    inv->add_option("--g", g_text, "function of the frequency x0")->required();
    inv->add_option("--x", xs, "comma-separated net expressions");
    inv->callback([&] { action = [&] { Session s = cli.open(); return emit(s, transform_report(s, g_text, xs, true)); }; });

    auto* cv = app.add_subcommand("convolve", "f * g at the given points");
    cv->add_option("--f", f_text, "left factor");
    cv->add_option("--g", g_text, "right factor")->required();
    cv->add_option("--hint", hint, "f is negligible outside [-hint, hint]");
    cv->add_option("--x", xs, "comma-separated net expressions");
    cv->callback([&] { action = [&] { Session s = cli.open(); return emit(s, convolve_report(s, f_text, g_text, hint, xs)); }; });

    auto* ode = app.add_subcommand("solve-ode", "constant-coefficient ODE through the transform");
    ode->add_option("--spec", spec, "problem TOML with an [ode] table")->required()->check(CLI::ExistingFile);
    ode->callback([&] { action = [&] { Session s = cli.open(); return emit(s, solve_ode_report(s, slurp(spec), spec)); }; });

    auto* pde = app.add_subcommand("solve-pde", "wave or heat equation");
    pde->add_option("--kind", kind, "wave or heat")->required()->check(CLI::IsMember({"wave", "heat"}));
    pde->add_option("--spec", spec, "problem TOML with a [wave] or [heat] table")->required()->check(CLI::ExistingFile);
    pde->callback([&] { action = [&] { Session s = cli.open(); return emit(s, solve_pde_report(s, kind, slurp(spec), spec)); }; });

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "run a verification suite; exit 2 when it fails");
    ver->add_option("--suite", va.suite)
        ->required()
        ->check(CLI::IsMember({"inversion", "plancherel", "riemann-lebesgue", "uncertainty", "identities", "preservation"}));
    ver->add_option("--f", va.f, "input function");
    ver->add_option("--h-list", va.h, "comma-separated h values (default k, k^2)");
    ver->add_option("--probes", va.probes, "probe points or frequencies");
    ver->add_option("--hint", va.hint, "support hint radius");
    ver->callback([&] { action = [&] { Session s = cli.open(); return emit(s, verify_report(s, va)); }; });

    auto* cl = app.add_subcommand("classify", "classify a net");
    cl->add_option("--net", net_text, "net expression in rho and eps")->required();
    cl->callback([&] { action = [&] { Session s = cli.open(); return emit(s, classify_report(s, net_text)); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    try {
        return action();
    } catch (const std::exception& e) {
        std::cerr << "hft: " << e.what() << "\n";
        return 1;
    }
}
