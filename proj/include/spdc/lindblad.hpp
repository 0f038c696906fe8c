#pragma once

#include <optional>
#include <vector>

#include "spdc/fock.hpp"

namespace spdc {

// Pump pulse: square envelope, amplitude params.pump for t in [0, tau), zero
// after. Pi-area mode fixes the area 2*pump*tau = pi.
struct PulseSchedule {
    enum class Mode { FixedDuration, PiArea };

    Mode mode = Mode::FixedDuration;
    double tau_p = 0.0;          // used in fixed-duration mode
    double total_window = 6.0;

    static PulseSchedule fixed(double tau, double window = 6.0);
    static PulseSchedule pi_area(double window = 6.0);

    double resolve_tau(double pump) const;
};

// Effective-model parameters, all rates in units of kappa_s.
struct SystemParams {
    double eta = 0.0;
    double delta = 0.0;  // residual detuning Delta - Delta_p; 0 when the pump is tuned
    double kappa_s = 1.0;
    double kappa_i = 1.0;
    double pump = 0.0;
    PulseSchedule schedule;
};

ComplexOperator build_effective_hamiltonian(const TwoModeSpace& space,
                                            const SystemParams& params, double pump_now);

std::vector<ComplexOperator> build_collapse_operators(const TwoModeSpace& space,
                                                      double kappa_s, double kappa_i);

// Structured application of the Lindblad generator; the solvers' inner loop.
// Terms act as index-shifted weighted row/column streams so one evaluation is
// O(dim^2) instead of the dense O(dim^3).
class Liouvillian {
public:
    Liouvillian(const TwoModeSpace& space, const SystemParams& params);

    void set_pump(double pump_now) { pump_ = pump_now; }
    double pump() const { return pump_; }

    // y = L(x); both dim*dim row-major
    void apply(const std::vector<cplx>& x, std::vector<cplx>& y) const;

    const TwoModeSpace& space() const { return space_; }

private:
    TwoModeSpace space_;
    double kappa_s_, kappa_i_;
    double pump_ = 0.0;
    std::vector<double> energy_;     // diagonal of H
    std::vector<double> damp_;       // kappa_s*n_s + kappa_i*n_i
    std::vector<double> pair_down_;  // sqrt(n_s n_i)
    std::vector<double> pair_up_;    // sqrt((n_s+1)(n_i+1)), masked at the edge
    std::vector<double> sig_up_;     // sqrt(n_s+1), masked
    std::vector<double> idl_up_;     // sqrt(n_i+1), masked
    std::vector<cplx> row_coeff_;    // -iE_r - damp_r
};

struct MesolveOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    bool keep_kerr_after_pulse = true;
    bool store_states = false;
    bool check_positivity = false;  // Jacobi eigenvalue check at every sample
};

struct EvolutionResult {
    std::vector<double> times;
    std::vector<JointPhotonDistribution> distributions;
    std::vector<double> trace_errors;       // |Tr rho - 1| per sample
    std::vector<double> hermiticity_defects;
    std::vector<double> min_eigenvalues;    // filled when check_positivity
    std::vector<QuantumState> states;       // filled when store_states
    JointPhotonDistribution distribution_at_switchoff;
    double tau_p = 0.0;
    double max_trace_error = 0.0;
    bool truncation_warning = false;  // top Fock level exceeded 1e-4 population
    long steps = 0;
    long rhs_evaluations = 0;
};

EvolutionResult mesolve(const TwoModeSpace& space, const SystemParams& params,
                        const QuantumState& rho0, const std::vector<double>& sample_times,
                        const MesolveOptions& options = {});

}  // namespace spdc
