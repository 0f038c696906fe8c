#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spdc/kerr.hpp"
#include "spdc/lindblad.hpp"

namespace spdc {

struct SweepSpec {
    std::string parameter;  // one of: pump, eta, kappa
    std::vector<double> grid;
};

struct KerrScanSpec {
    std::vector<double> delta31_grid;
    Delta42Rule delta42_rule;
    int nodes = 64;
};

// One experiment: either eta is given directly or an AtomicMedium is provided
// and eta comes from the Kerr calculator (never both).
struct ExperimentConfig {
    int schema_version = 1;

    // truncation
    int n_max_s = 6;
    int n_max_i = 6;

    // system (units of kappa_s; see README for the decay-rate convention)
    std::optional<double> eta;
    double delta = 0.0;
    double kappa_s = 0.5;
    double kappa_i = 0.5;
    double pump = 0.0;
    PulseSchedule schedule = PulseSchedule::fixed(M_PI / 40.0);
    bool keep_kerr_after_pulse = true;
    double kappa_in_s = 0.0;  // internal-loss part of kappa_s (trajectories)
    double kappa_in_i = 0.0;

    std::optional<AtomicMedium> medium;

    std::string solver = "me";  // me | qt | both
    int n_traj = 10000;
    std::uint64_t seed = 1;
    double rtol = 1e-8;

    std::optional<SweepSpec> sweep;
    std::optional<KerrScanSpec> kerr_scan;
};

struct ConfigIssue {
    enum class Severity { Warning, Error };
    Severity severity = Severity::Error;
    std::string message;
};

// Parse a JSON config file / string. Throws std::runtime_error with a
// readable message on malformed input.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

std::vector<ConfigIssue> validate_config(const ExperimentConfig& config);
bool has_errors(const std::vector<ConfigIssue>& issues);

// Resolved effective parameters for the dynamics solvers. When the config
// carries a medium instead of a direct eta, the Kerr calculator runs here.
SystemParams resolve_system_params(const ExperimentConfig& config);

}  // namespace spdc
