#pragma once

// JSON reports for each subcommand. Inputs are text: net expressions, function
// expressions in x0 (or gaussian, delta, one, heaviside) and TOML problem specs.

#include "hft/session.hpp"

namespace hft {

struct Report {
    json body;
    bool pass = true;     // false only when a verification suite fails
    std::string column;   // CSV abscissa name, empty when there is no plot data
    std::vector<GenNumber> at;
    std::vector<GenComplex> values;
};

struct VerifyArgs {
    std::string suite;  // inversion, plancherel, riemann-lebesgue, uncertainty, identities, preservation
    std::string f = "gaussian";
    std::string h;       // comma-separated h values, default k and k^2
    std::string probes;  // points or frequencies, suite default when empty
    std::string hint = "40";
};

Report transform_report(const Session& s, const std::string& f, const std::string& points, bool inverse);
Report convolve_report(const Session& s, const std::string& f, const std::string& g, const std::string& hint,
                       const std::string& points);
// text is the TOML spec, label names it in errors and in the report
Report solve_ode_report(const Session& s, const std::string& text, const std::string& label);
Report solve_pde_report(const Session& s, const std::string& kind, const std::string& text, const std::string& label);
Report verify_report(const Session& s, const VerifyArgs& a);
Report classify_report(const Session& s, const std::string& net);

// comma-separated constant expressions in rho, eps, b and k
std::vector<GenNumber> net_list(const Session& s, const std::string& text);
GSFunc named_function(const Session& s, const std::string& text);
// rows (column, eps_index, re, im); no-op for reports without plot data
void write_csv(const Report& r, const Grid& g, const std::string& path);

}  // namespace hft
