#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "spdc/fock.hpp"
#include "spdc/lindblad.hpp"

namespace spdc {

enum class JumpChannel { SignalExternal, SignalInternal, IdlerExternal, IdlerInternal };

const char* channel_name(JumpChannel ch);

// External/internal split of one mode's decay; ex + in must equal the mode's
// total kappa in SystemParams.
struct LossSplit {
    double kappa_ex = 0.0;
    double kappa_in = 0.0;
};

struct TrajectoryRecord {
    std::vector<std::pair<double, JumpChannel>> jumps;
    double final_state_norm = 0.0;
};

struct EnsembleStatistics {
    int n_traj = 0;
    std::uint64_t seed = 0;
    // distribution over (external signal jumps, external idler jumps),
    // clamped to the space truncation
    JointPhotonDistribution detected_joint;
    std::map<JumpChannel, double> channel_fractions;
    long total_jumps = 0;
    double clamped_fraction = 0.0;  // trajectories whose counts hit the clamp
};

struct McOptions {
    double rtol = 1e-6;
    double atol = 1e-12;
    int threads = 0;  // 0 = hardware concurrency
    bool keep_kerr_after_pulse = true;
    std::vector<TrajectoryRecord>* record_out = nullptr;  // indexed by trajectory
};

EnsembleStatistics mcsolve(const TwoModeSpace& space, const SystemParams& params,
                           const LossSplit& signal_loss, const LossSplit& idler_loss,
                           const QuantumState& psi0, int n_traj, std::uint64_t seed,
                           const McOptions& options = {});

struct MeanPoint {
    double time = 0.0;
    double n_signal = 0.0;
    double n_idler = 0.0;
};

std::vector<MeanPoint> trajectory_mean(const TwoModeSpace& space, const SystemParams& params,
                                       const LossSplit& signal_loss, const LossSplit& idler_loss,
                                       const QuantumState& psi0, int n_traj, std::uint64_t seed,
                                       const std::vector<double>& sample_times,
                                       const McOptions& options = {});

double escape_efficiency(double kappa_ex, double kappa_in);

}  // namespace spdc
