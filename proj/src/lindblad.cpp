#include "spdc/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spdc/linalg.hpp"
#include "spdc/ode.hpp"
#include "spdc/simd.hpp"

namespace spdc {

PulseSchedule PulseSchedule::fixed(double tau, double window)
{
    if (tau < 0.0 || window < tau)
        throw std::invalid_argument("pulse schedule: need 0 <= tau_p <= total_window");
    PulseSchedule s;
    s.mode = Mode::FixedDuration;
    s.tau_p = tau;
    s.total_window = window;
    return s;
}

PulseSchedule PulseSchedule::pi_area(double window)
{
    PulseSchedule s;
    s.mode = Mode::PiArea;
    s.total_window = window;
    return s;
}

double PulseSchedule::resolve_tau(double pump) const
{
    if (mode == Mode::FixedDuration)
        return tau_p;
    if (pump <= 0.0)
        throw std::invalid_argument("pi-area pulse needs pump > 0");
    return M_PI / (2.0 * pump);
}

ComplexOperator build_effective_hamiltonian(const TwoModeSpace& space,
                                            const SystemParams& params, double pump_now)
{
    ComplexOperator h(space);
    for (int r = 0; r < space.dim; ++r) {
        auto [ns, ni] = space.levels(r);
        h.at(r, r) = (params.delta - params.eta) * ns + params.eta * double(ns) * ns;
        if (ns < space.n_max_s && ni < space.n_max_i) {
            int up = space.index(ns + 1, ni + 1);
            double amp = pump_now * std::sqrt(double(ns + 1) * (ni + 1));
            h.at(up, r) = amp;
            h.at(r, up) = amp;
        }
    }
    return h;
}

std::vector<ComplexOperator> build_collapse_operators(const TwoModeSpace& space,
                                                      double kappa_s, double kappa_i)
{
    if (kappa_s < 0.0 || kappa_i < 0.0)
        throw std::invalid_argument("collapse operators: decay rates must be nonnegative");
    ComplexOperator cs = annihilation(space, Mode::Signal);
    cs *= std::sqrt(2.0 * kappa_s);
    ComplexOperator ci = annihilation(space, Mode::Idler);
    ci *= std::sqrt(2.0 * kappa_i);
    return {cs, ci};
}

Liouvillian::Liouvillian(const TwoModeSpace& space, const SystemParams& params)
    : space_(space), kappa_s_(params.kappa_s), kappa_i_(params.kappa_i), pump_(params.pump)
{
    const int d = space.dim;
    energy_.resize(d);
    damp_.resize(d);
    pair_down_.resize(d);
    pair_up_.resize(d);
    sig_up_.resize(d);
    idl_up_.resize(d);
    row_coeff_.resize(d);
    for (int r = 0; r < d; ++r) {
        auto [ns, ni] = space.levels(r);
        energy_[r] = (params.delta - params.eta) * ns + params.eta * double(ns) * ns;
        damp_[r] = kappa_s_ * ns + kappa_i_ * ni;
        pair_down_[r] = std::sqrt(double(ns) * ni);
        pair_up_[r] = (ns < space.n_max_s && ni < space.n_max_i)
                          ? std::sqrt(double(ns + 1) * (ni + 1)) : 0.0;
        sig_up_[r] = ns < space.n_max_s ? std::sqrt(double(ns + 1)) : 0.0;
        idl_up_[r] = ni < space.n_max_i ? std::sqrt(double(ni + 1)) : 0.0;
        row_coeff_[r] = cplx(-damp_[r], -energy_[r]);
    }
}

void Liouvillian::apply(const std::vector<cplx>& x, std::vector<cplx>& y) const
{
    const int d = space_.dim;
    const int S = space_.stride;
    const int shift = S + 1;  // one quantum in each mode
    y.assign(std::size_t(d) * d, cplx(0.0));

    const auto& K = simd::active_kernels();
    const cplx i_unit(0.0, 1.0);
    const cplx mip(0.0, -pump_);  // -i * pump
    const cplx pip(0.0, pump_);   // +i * pump

    for (int r = 0; r < d; ++r) {
        const cplx* xrow = &x[std::size_t(r) * d];
        cplx* yrow = &y[std::size_t(r) * d];

        // (-iE_r - damp_r) x[r,c]  +i E_c x[r,c]  - (ks n_s(c)+ki n_i(c)) x[r,c]
        K.caxpy(row_coeff_[r], xrow, yrow, d);
        K.caxpy_w(i_unit, energy_.data(), xrow, yrow, d);
        K.caxpy_w(-1.0, damp_.data(), xrow, yrow, d);

        if (pump_ != 0.0) {
            // -i p (a_s^+ a_i^+ rho): feeds from the pair-lower row
            if (pair_down_[r] != 0.0)
                K.caxpy(mip * pair_down_[r], xrow - std::size_t(shift) * d, yrow, d);
            // -i p (a_s a_i rho): feeds from the pair-upper row
            if (pair_up_[r] != 0.0)
                K.caxpy(mip * pair_up_[r], xrow + std::size_t(shift) * d, yrow, d);
            // +i p (rho a_s^+ a_i^+): column-shifted reads
            K.caxpy_w(pip, pair_up_.data(), xrow + shift, yrow, d - shift);
            // +i p (rho a_s a_i)
            K.caxpy_w(pip, pair_down_.data() + shift, xrow, yrow + shift, d - shift);
        }

        // 2 ks (a_s rho a_s^+) and 2 ki (a_i rho a_i^+)
        if (sig_up_[r] != 0.0)
            K.caxpy_w(2.0 * kappa_s_ * sig_up_[r], sig_up_.data(),
                      xrow + std::size_t(S) * d + S, yrow, d - S);
        if (idl_up_[r] != 0.0)
            K.caxpy_w(2.0 * kappa_i_ * idl_up_[r], idl_up_.data(),
                      xrow + std::size_t(1) * d + 1, yrow, d - 1);
    }
}

namespace {

double top_level_population(const JointPhotonDistribution& dist)
{
    double acc = 0.0;
    for (int ni = 0; ni <= dist.n_max_i; ++ni)
        acc += dist.at(dist.n_max_s, ni);
    for (int ns = 0; ns < dist.n_max_s; ++ns)
        acc += dist.at(ns, dist.n_max_i);
    return acc;
}

}  // namespace

EvolutionResult mesolve(const TwoModeSpace& space, const SystemParams& params,
                        const QuantumState& rho0, const std::vector<double>& sample_times,
                        const MesolveOptions& options)
{
    if (!(rho0.space == space))
        throw std::invalid_argument("mesolve: initial state on a different space");
    for (double v : {params.eta, params.delta, params.kappa_s, params.kappa_i, params.pump})
        if (!std::isfinite(v))
            throw std::invalid_argument("mesolve: non-finite system parameter");
    const double tau_p = params.schedule.resolve_tau(params.pump);
    const double window = params.schedule.total_window;
    if (window < tau_p)
        throw std::invalid_argument("mesolve: total_window shorter than the pulse");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < 0.0 || sample_times[i] > window)
            throw std::invalid_argument("mesolve: sample time outside [0, total_window]");
        if (i > 0 && sample_times[i] < sample_times[i - 1])
            throw std::invalid_argument("mesolve: sample times must be sorted");
    }

    QuantumState rho = rho0.is_ket() ? rho0.to_density() : rho0;

    EvolutionResult out;
    out.tau_p = tau_p;

    Liouvillian lv(space, params);
    Dopri5 stepper(rho.data.size(),
                   [&lv](const Dopri5::State& x, Dopri5::State& y) { lv.apply(x, y); },
                   options.rtol, options.atol);

    auto record = [&](double t) {
        out.times.push_back(t);
        QuantumState st = QuantumState::density(space, rho.data);
        JointPhotonDistribution dist = joint_distribution(st);
        double terr = std::abs(st.trace() - cplx(1.0));
        out.max_trace_error = std::max(out.max_trace_error, terr);
        out.trace_errors.push_back(terr);
        out.hermiticity_defects.push_back(st.hermiticity_defect());
        if (options.check_positivity)
            out.min_eigenvalues.push_back(min_eigenvalue(st.data, space.dim));
        if (top_level_population(dist) > 1e-4)
            out.truncation_warning = true;
        out.distributions.push_back(std::move(dist));
        if (options.store_states)
            out.states.push_back(std::move(st));
    };

    // Integrate phase by phase, stopping exactly at samples, the pulse edge,
    // and the window end.
    std::vector<double> stops = sample_times;
    stops.push_back(tau_p);
    stops.push_back(window);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                stops.end());

    auto is_sample = [&](double t) {
        for (double s : sample_times)
            if (std::abs(s - t) < 1e-14)
                return true;
        return false;
    };

    double t = 0.0;
    bool pump_on = tau_p > 0.0;
    lv.set_pump(pump_on ? params.pump : 0.0);
    if (!pump_on)
        out.distribution_at_switchoff =
            joint_distribution(QuantumState::density(space, rho.data));
    if (is_sample(0.0))
        record(0.0);

    for (double stop : stops) {
        if (stop <= t + 1e-15)
            continue;
        stepper.integrate(rho.data, t, stop, [](double, const Dopri5::State&) { return true; });
        t = stop;
        if (pump_on && std::abs(t - tau_p) < 1e-14) {
            out.distribution_at_switchoff =
                joint_distribution(QuantumState::density(space, rho.data));
            lv.set_pump(0.0);
            if (!options.keep_kerr_after_pulse) {
                SystemParams off = params;
                off.eta = 0.0;
                off.pump = 0.0;
                lv = Liouvillian(space, off);
            }
            stepper.reset_fsal();  // generator changed discontinuously
            pump_on = false;
        }
        if (is_sample(t))
            record(t);
    }

    out.steps = stepper.steps();
    out.rhs_evaluations = stepper.rhs_evaluations();
    return out;
}

}  // namespace spdc
