#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spdc/trajectories.hpp"

using namespace spdc;

namespace {

QuantumState equal_superposition_signal(const TwoModeSpace& sp, int n_top)
{
    std::vector<cplx> amp(sp.dim, 0.0);
    for (int n = 0; n <= n_top; ++n)
        amp[sp.index(n, 0)] = 1.0 / std::sqrt(double(n_top + 1));
    return QuantumState::ket(sp, amp);
}

SystemParams decay_only(double ks, double ki, double window = 6.0)
{
    SystemParams p;
    p.eta = 0.0;
    p.kappa_s = ks;
    p.kappa_i = ki;
    p.pump = 0.0;
    p.schedule = PulseSchedule::fixed(0.0, window);
    return p;
}

}  // namespace

TEST_CASE("escape efficiency")
{
    CHECK(escape_efficiency(0.99, 0.01) == doctest::Approx(0.99));
    CHECK(escape_efficiency(2 * M_PI * 8.0, 2 * M_PI * 0.37) == doctest::Approx(0.956).epsilon(1e-3));
    CHECK(escape_efficiency(1.7, 0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(escape_efficiency(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("external channel fraction follows the loss split")
{
    TwoModeSpace sp = build_space(2, 1);
    SystemParams p = decay_only(1.0, 0.0);
    LossSplit sig{0.99, 0.01}, idl{0.0, 0.0};
    const int n_traj = 4000;
    EnsembleStatistics st = mcsolve(sp, p, sig, idl, fock_ket(sp, 2, 0), n_traj, 77);
    double frac = st.channel_fractions.at(JumpChannel::SignalExternal);
    double sigma = std::sqrt(0.99 * 0.01 / (2.0 * n_traj));
    CHECK(std::abs(frac - 0.99) <= 3.0 * sigma);
    // nearly every photon is emitted inside the window
    CHECK(st.total_jumps > long(2 * n_traj * 0.999));
}

TEST_CASE("detected distribution reproduces the prepared superposition")
{
    TwoModeSpace sp = build_space(2, 1);
    SystemParams p = decay_only(1.0, 0.0);
    LossSplit sig{1.0, 0.0}, idl{0.0, 0.0};
    const int n_traj = 6000;
    EnsembleStatistics st =
        mcsolve(sp, p, sig, idl, equal_superposition_signal(sp, 2), n_traj, 1234);
    for (int n = 0; n <= 2; ++n)
        CHECK(std::abs(st.detected_joint.at(n, 0) - 1.0 / 3) < 0.02);
}

TEST_CASE("paired detection from a dual-mode superposition")
{
    TwoModeSpace sp = build_space(2, 2);
    SystemParams p = decay_only(1.0, 1.0);
    std::vector<cplx> amp(sp.dim, 0.0);
    for (int n = 0; n <= 2; ++n)
        amp[sp.index(n, n)] = 1.0 / std::sqrt(3.0);
    QuantumState psi0 = QuantumState::ket(sp, amp);
    LossSplit sig{1.0, 0.0}, idl{1.0, 0.0};
    EnsembleStatistics st = mcsolve(sp, p, sig, idl, psi0, 6000, 99);
    for (int n = 0; n <= 2; ++n)
        CHECK(std::abs(st.detected_joint.at(n, n) - 1.0 / 3) < 0.02);
    // photons come in pairs: hardly any weight off the diagonal
    double off = 0.0;
    for (int ns = 0; ns <= 2; ++ns)
        for (int ni = 0; ni <= 2; ++ni)
            if (ns != ni)
                off += st.detected_joint.at(ns, ni);
    CHECK(off < 0.01);
}

TEST_CASE("bitwise determinism across runs and thread counts")
{
    TwoModeSpace sp = build_space(6, 6);
    SystemParams p;
    p.eta = 80.0;
    p.kappa_s = 0.5;
    p.kappa_i = 0.5;
    p.pump = 18.0;
    p.schedule = PulseSchedule::fixed(M_PI / 40.0, 6.0);
    LossSplit sig{0.5, 0.0}, idl{0.5, 0.0};

    McOptions one, two;
    one.threads = 1;
    two.threads = 2;
    EnsembleStatistics a = mcsolve(sp, p, sig, idl, vacuum_ket(sp), 400, 2024, one);
    EnsembleStatistics b = mcsolve(sp, p, sig, idl, vacuum_ket(sp), 400, 2024, two);
    EnsembleStatistics c = mcsolve(sp, p, sig, idl, vacuum_ket(sp), 400, 2024, two);
    REQUIRE(a.detected_joint.p.size() == b.detected_joint.p.size());
    for (std::size_t i = 0; i < a.detected_joint.p.size(); ++i) {
        CHECK(a.detected_joint.p[i] == b.detected_joint.p[i]);
        CHECK(b.detected_joint.p[i] == c.detected_joint.p[i]);
    }
    CHECK(a.total_jumps == b.total_jumps);

    // different seed gives a different ensemble
    EnsembleStatistics d = mcsolve(sp, p, sig, idl, vacuum_ket(sp), 400, 2025, one);
    bool any_diff = d.total_jumps != a.total_jumps;
    for (std::size_t i = 0; i < a.detected_joint.p.size() && !any_diff; ++i)
        any_diff = d.detected_joint.p[i] != a.detected_joint.p[i];
    CHECK(any_diff);
}

TEST_CASE("ensemble mean follows the decay law")
{
    TwoModeSpace sp = build_space(2, 1);
    SystemParams p = decay_only(1.0, 0.0, 3.0);
    LossSplit sig{1.0, 0.0}, idl{0.0, 0.0};
    std::vector<double> times = {0.0, 0.25, 0.5, 1.0, 2.0};
    auto mean = trajectory_mean(sp, p, sig, idl, fock_ket(sp, 2, 0), 4000, 31, times);
    REQUIRE(mean.size() == times.size());
    for (const auto& pt : mean)
        CHECK(std::abs(pt.n_signal - 2.0 * std::exp(-2.0 * pt.time)) < 0.05);
    CHECK(mean[0].n_signal == doctest::Approx(2.0));
}

TEST_CASE("vacuum with no pump never jumps")
{
    TwoModeSpace sp = build_space(2, 2);
    SystemParams p = decay_only(1.0, 1.0, 2.0);
    LossSplit sig{1.0, 0.0}, idl{1.0, 0.0};
    std::vector<TrajectoryRecord> records;
    McOptions opt;
    opt.record_out = &records;
    EnsembleStatistics st = mcsolve(sp, p, sig, idl, vacuum_ket(sp), 100, 5, opt);
    CHECK(st.total_jumps == 0);
    CHECK(st.detected_joint.at(0, 0) == doctest::Approx(1.0));
    for (const auto& r : records) {
        CHECK(r.jumps.empty());
        CHECK(r.final_state_norm == doctest::Approx(1.0));
    }
}

TEST_CASE("jump records are ordered and inside the window")
{
    TwoModeSpace sp = build_space(6, 6);
    SystemParams p;
    p.eta = 80.0;
    p.kappa_s = 0.5;
    p.kappa_i = 0.5;
    p.pump = 18.0;
    p.schedule = PulseSchedule::fixed(M_PI / 40.0, 6.0);
    LossSplit sig{0.5, 0.0}, idl{0.5, 0.0};
    std::vector<TrajectoryRecord> records;
    McOptions opt;
    opt.record_out = &records;
    mcsolve(sp, p, sig, idl, vacuum_ket(sp), 200, 11, opt);
    for (const auto& rec : records) {
        double prev = 0.0;
        for (const auto& [t, ch] : rec.jumps) {
            CHECK(t >= prev);
            CHECK(t <= 6.0);
            prev = t;
        }
    }
}

TEST_CASE("numeric pump path agrees with the diagonal fast path")
{
    // pump = 0 takes the exact diagonal route; a vanishing pump through the
    // integrator must give the same ensemble. Both runs share the pulse
    // schedule so the detection window matches.
    TwoModeSpace sp = build_space(2, 2);
    SystemParams exact = decay_only(1.0, 1.0, 4.0);
    exact.schedule = PulseSchedule::fixed(0.5, 4.0);
    SystemParams numeric = exact;
    numeric.pump = 1e-13;
    std::vector<cplx> amp(sp.dim, 0.0);
    amp[sp.index(1, 1)] = 1.0;
    QuantumState psi0 = QuantumState::ket(sp, amp);
    LossSplit sig{1.0, 0.0}, idl{1.0, 0.0};
    EnsembleStatistics a = mcsolve(sp, exact, sig, idl, psi0, 500, 321);
    EnsembleStatistics b = mcsolve(sp, numeric, sig, idl, psi0, 500, 321);
    for (std::size_t i = 0; i < a.detected_joint.p.size(); ++i)
        CHECK(std::abs(a.detected_joint.p[i] - b.detected_joint.p[i]) <= 2.0 / 500);
    CHECK(a.total_jumps > 0);
}

TEST_CASE("loss split validation")
{
    TwoModeSpace sp = build_space(2, 2);
    SystemParams p = decay_only(1.0, 1.0);
    LossSplit bad{0.5, 0.2}, good{1.0, 0.0};
    CHECK_THROWS_AS(mcsolve(sp, p, bad, good, vacuum_ket(sp), 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(mcsolve(sp, p, good, good, vacuum_ket(sp).to_density(), 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(mcsolve(sp, p, good, good, vacuum_ket(sp), 0, 1), std::invalid_argument);
}
