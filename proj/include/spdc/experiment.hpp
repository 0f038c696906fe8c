#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spdc/config.hpp"
#include "spdc/herald.hpp"
#include "spdc/trajectories.hpp"

namespace spdc {

struct SweepRow {
    std::vector<double> swept;
    double p11 = 0.0, p22 = 0.0, p33 = 0.0, p00 = 0.0;
    double g2 = 0.0, yield = 0.0, purity = 0.0, yp = 0.0, nonpair = 0.0;
    std::string solver;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
};

struct SweepResult {
    std::vector<std::string> swept_names;
    std::vector<SweepRow> rows;
};

SweepResult run_sweep(const ExperimentConfig& config, int threads = 0);
std::string sweep_csv(const SweepResult& result);

// One master-equation evaluation at explicit parameters; shared by the sweep
// driver, the figure reproductions and the acceptance suite.
struct MePointSpec {
    double eta = 0.0;
    double pump = 0.0;
    double kappa_s = 0.5;
    double kappa_i = 0.5;
    bool pi_area = false;
    double tau_p = M_PI / 40.0;
    int n_max_s = 6;
    int n_max_i = 6;
    double rtol = 1e-8;
    double delta = 0.0;
};

struct MePointResult {
    JointPhotonDistribution dist;  // at pulse switch-off
    HeraldedStatistics stats;
};

MePointResult solve_me_point(const MePointSpec& spec);

struct TargetCheck {
    std::string name;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool gated = true;  // informational entries don't fail the figure
    bool pass = false;
};

struct FigureResult {
    std::string figure;
    bool pass = true;
    std::vector<TargetCheck> checks;
    std::vector<std::string> files;
};

const std::vector<std::string>& reproduce_ids();

// Runs one figure reproduction, writes data.csv and manifest.json under
// out_dir/<figure>/, and evaluates the stored targets.
FigureResult reproduce(const std::string& figure_id, const std::string& out_dir,
                       std::optional<std::uint64_t> seed_override = std::nullopt,
                       int threads = 0);

// %.17g, enough digits to round-trip a double exactly.
std::string format_g17(double v);

}  // namespace spdc
