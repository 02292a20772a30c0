#pragma once

// Session configuration (TOML), report hashes and the JSON net format.

#include "hft/applications.hpp"

#include "json.hpp"

namespace hft {

using json = nlohmann::ordered_json;

struct SessionConfig {
    int grid_depth = 12;
    double grid_base = 0.5;
    GaugeKind gauge = GaugeKind::identity;
    int q_check = 6;
    int n_max = 64;
    std::string b = "inv(rho)";  // net expressions
    std::string k = "inv(rho)";
    MollifierSpec mollifier;  // b is filled from the expression when the session opens
    QuadratureConfig quadrature;
    std::string out;  // report path, empty for stdout
    std::string csv;  // plot data path, empty for none

    void validate() const;
    std::string canonical() const;
};

// Sections [grid], [mollifier], [quadrature], [output] and top-level k.
SessionConfig parse_session_toml(const std::string& text, SessionConfig base = {});
SessionConfig load_session_toml(const std::string& path, SessionConfig base = {});

struct Session {
    SessionConfig cfg;
    Grid grid;
    Mollifier moll;
    GenNumber b, k;

    // sha256 of the canonical forms
    std::string grid_hash() const;
    std::string gauge_hash() const;
    std::string mollifier_hash() const;
    std::string quadrature_hash() const;
    std::string config_hash() const;

    // names usable in expressions: b, k, rho, eps and the functions delta, delta1.., heaviside
    ParseEnv parse_env() const;
    GenNumber net(const std::string& text) const { return parse_net(text, grid); }
};

Session open_session(const SessionConfig& cfg);

// {"grid": {"eps": [...], "gauge": [...]}, "samples": [...]}
json net_json(const GenNumber& x);
// samples of the real part, plus "samples_im" when the imaginary part is not zero
json net_json(const GenComplex& x);
GenNumber net_from_json(const json& j, const Grid& g);
json class_json(const GenNumber& x);
// header with tool, command, hashes and a timestamp
json report_header(const Session& s, const std::string& command);
// dump with a trailing newline to path (stdout when empty)
void write_report(const json& j, const std::string& path);

}  // namespace hft
