#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "spdc/lindblad.hpp"
#include "spdc/linalg.hpp"

using namespace spdc;

namespace {

QuantumState random_density(const TwoModeSpace& sp, std::mt19937_64& eng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<cplx> rho(std::size_t(sp.dim) * sp.dim, 0.0);
    for (int k = 0; k < 3; ++k) {
        std::vector<cplx> psi(sp.dim);
        double nrm = 0.0;
        for (auto& v : psi) {
            v = {u(eng), u(eng)};
            nrm += std::norm(v);
        }
        for (int r = 0; r < sp.dim; ++r)
            for (int c = 0; c < sp.dim; ++c)
                rho[std::size_t(r) * sp.dim + c] += psi[r] * std::conj(psi[c]) / (3.0 * nrm);
    }
    return QuantumState::density(sp, rho);
}

// Dense reference Lindblad generator built from operator algebra; the
// independent route for checking the structured kernel path.
std::vector<cplx> dense_rhs(const TwoModeSpace& sp, const SystemParams& p, double pump_now,
                            const std::vector<cplx>& x)
{
    ComplexOperator H = build_effective_hamiltonian(sp, p, pump_now);
    auto cops = build_collapse_operators(sp, p.kappa_s, p.kappa_i);
    ComplexOperator rho(sp);
    rho.m = x;
    ComplexOperator out = cplx(0, -1) * (H * rho - rho * H);
    for (const auto& c : cops) {
        ComplexOperator cdag = c.adjoint();
        ComplexOperator cc = cdag * c;
        out += c * rho * cdag;
        out += cplx(-0.5) * (cc * rho + rho * cc);
    }
    return out.m;
}

}  // namespace

TEST_CASE("pulse schedule")
{
    PulseSchedule fixed = PulseSchedule::fixed(0.1, 6.0);
    CHECK(fixed.resolve_tau(5.0) == doctest::Approx(0.1));
    PulseSchedule pi = PulseSchedule::pi_area(6.0);
    double tau = pi.resolve_tau(10.0);
    CHECK(2.0 * 10.0 * tau == doctest::Approx(M_PI));
    CHECK_THROWS_AS(pi.resolve_tau(0.0), std::invalid_argument);
    CHECK_THROWS_AS(PulseSchedule::fixed(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("effective hamiltonian structure")
{
    TwoModeSpace sp = build_space(4, 4);
    SystemParams p;
    p.eta = 0.0;
    p.delta = 0.0;
    ComplexOperator h = build_effective_hamiltonian(sp, p, 3.0);
    CHECK(h.is_hermitian(1e-12));
    CHECK(h.at(sp.index(1, 1), sp.index(0, 0)).real() == doctest::Approx(3.0));

    p.eta = 80.0;
    ComplexOperator h2 = build_effective_hamiltonian(sp, p, 0.0);
    CHECK(h2.at(sp.index(2, 0), sp.index(2, 0)).real() == doctest::Approx(160.0));
    CHECK(h2.at(sp.index(1, 3), sp.index(1, 3)).real() == doctest::Approx(0.0));
    // pump off: diagonal
    for (int r = 0; r < sp.dim; ++r)
        for (int c = 0; c < sp.dim; ++c)
            if (r != c)
                CHECK(std::abs(h2.at(r, c)) == 0.0);
}

TEST_CASE("collapse operators reproduce the decay convention")
{
    TwoModeSpace sp = build_space(3, 3);
    auto cops = build_collapse_operators(sp, 1.0, 0.25);
    REQUIRE(cops.size() == 2);
    // C^+C = 2 kappa n
    ComplexOperator n_s = cops[0].adjoint() * cops[0];
    CHECK(n_s.at(sp.index(2, 0), sp.index(2, 0)).real() == doctest::Approx(4.0));
    ComplexOperator n_i = cops[1].adjoint() * cops[1];
    CHECK(n_i.at(sp.index(0, 2), sp.index(0, 2)).real() == doctest::Approx(1.0));
}

TEST_CASE("structured generator matches the dense operator route")
{
    std::mt19937_64 eng(5);
    for (auto [ns, ni] : {std::pair{3, 3}, std::pair{4, 2}}) {
        TwoModeSpace sp = build_space(ns, ni);
        SystemParams p;
        p.eta = 37.0;
        p.delta = 1.3;
        p.kappa_s = 0.8;
        p.kappa_i = 0.4;
        p.pump = 7.7;
        QuantumState rho = random_density(sp, eng);

        Liouvillian lv(sp, p);
        lv.set_pump(p.pump);
        std::vector<cplx> y;
        lv.apply(rho.data, y);
        std::vector<cplx> ref = dense_rhs(sp, p, p.pump, rho.data);

        double scale = 0.0, err = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            scale = std::max(scale, std::abs(ref[i]));
            err = std::max(err, std::abs(ref[i] - y[i]));
        }
        CHECK(err <= 1e-12 * std::max(1.0, scale));
    }
}

TEST_CASE("free decay of a single excitation")
{
    TwoModeSpace sp = build_space(2, 2);
    SystemParams p;
    p.kappa_s = 1.0;
    p.kappa_i = 1.0;
    p.pump = 0.0;
    p.schedule = PulseSchedule::fixed(0.0, 1.0);
    QuantumState rho0 = fock_ket(sp, 1, 0).to_density();
    EvolutionResult evo = mesolve(sp, p, rho0, {0.3, 0.7, 1.0});
    for (std::size_t k = 0; k < evo.times.size(); ++k) {
        double t = evo.times[k];
        double n_mean = 0.0;
        for (int r = 0; r < sp.dim; ++r)
            n_mean += evo.distributions[k].p[r] * sp.ns_of(r);
        CHECK(n_mean == doctest::Approx(std::exp(-2.0 * t)).epsilon(1e-6));
    }
}

TEST_CASE("idler populations conserved when kappa_i = 0")
{
    TwoModeSpace sp = build_space(2, 2);
    SystemParams p;
    p.kappa_s = 1.0;
    p.kappa_i = 0.0;
    p.pump = 0.0;
    p.schedule = PulseSchedule::fixed(0.0, 2.0);
    EvolutionResult evo = mesolve(sp, p, fock_ket(sp, 1, 2).to_density(), {1.0, 2.0});
    for (const auto& d : evo.distributions) {
        double pni2 = 0.0;
        for (int ns = 0; ns <= 2; ++ns)
            pni2 += d.at(ns, 2);
        CHECK(pni2 == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("vacuum is stationary")
{
    TwoModeSpace sp = build_space(2, 2);
    SystemParams p;
    p.pump = 0.0;
    p.schedule = PulseSchedule::fixed(0.0, 3.0);
    EvolutionResult evo = mesolve(sp, p, vacuum_ket(sp).to_density(), {3.0});
    CHECK(evo.distributions[0].at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pure-decay cascade matches the binomial closed form")
{
    // diagonal rho0 with independent two-mode decay: occupation of |m> from
    // an initial |n> is C(n,m) e^{-2 kappa m t} (1 - e^{-2 kappa t})^(n-m)
    TwoModeSpace sp = build_space(2, 2);
    SystemParams p;
    p.kappa_s = 1.0;
    p.kappa_i = 0.7;
    p.pump = 0.0;
    p.schedule = PulseSchedule::fixed(0.0, 0.9);

    std::vector<cplx> rho(std::size_t(sp.dim) * sp.dim, 0.0);
    auto setw = [&](int ns, int ni, double w) {
        rho[std::size_t(sp.index(ns, ni)) * sp.dim + sp.index(ns, ni)] = w;
    };
    setw(2, 1, 0.5);
    setw(1, 0, 0.3);
    setw(0, 0, 0.2);
    EvolutionResult evo = mesolve(sp, p, QuantumState::density(sp, rho), {0.9});

    auto binom = [](int n, int m) { return n == 2 && m == 1 ? 2.0 : 1.0; };
    auto cascade = [&](int n0, double kappa, double t, int m) {
        double q = std::exp(-2.0 * kappa * t);
        if (m > n0)
            return 0.0;
        return binom(n0, m) * std::pow(q, m) * std::pow(1.0 - q, n0 - m);
    };
    double t = 0.9;
    const auto& d = evo.distributions[0];
    for (int ms = 0; ms <= 2; ++ms)
        for (int mi = 0; mi <= 2; ++mi) {
            double expect = 0.5 * cascade(2, 1.0, t, ms) * cascade(1, 0.7, t, mi)
                          + 0.3 * cascade(1, 1.0, t, ms) * cascade(0, 0.7, t, mi)
                          + 0.2 * cascade(0, 1.0, t, ms) * cascade(0, 0.7, t, mi);
            CHECK(d.at(ms, mi) == doctest::Approx(expect).epsilon(1e-7));
        }
}

TEST_CASE("non-blockade pulse against frozen oracles")
{
    // Lossless run reproduces the two-mode squeezing closed form.
    TwoModeSpace sp = build_space(12, 12);
    SystemParams p;
    p.eta = 0.0;
    p.kappa_s = 0.0;
    p.kappa_i = 0.0;
    p.pump = 6.0;
    p.schedule = PulseSchedule::fixed(M_PI / 40.0, M_PI / 40.0);
    EvolutionResult evo = mesolve(sp, p, vacuum_ket(sp).to_density(), {});
    double x = 6.0 * M_PI / 40.0;
    double T = std::tanh(x) * std::tanh(x);
    double C = std::cosh(x) * std::cosh(x);
    CHECK(evo.distribution_at_switchoff.at(1, 1) == doctest::Approx(T / C).epsilon(1e-6));
    CHECK(evo.distribution_at_switchoff.at(0, 0) == doctest::Approx(1.0 / C).epsilon(1e-6));

    // With decay on, the same point was frozen from an independent
    // scipy DOP853 run of the identical model (P11 = 0.13640).
    SystemParams pd = p;
    pd.kappa_s = 1.0;
    pd.kappa_i = 1.0;
    EvolutionResult evod = mesolve(sp, pd, vacuum_ket(sp).to_density(), {});
    CHECK(evod.distribution_at_switchoff.at(1, 1) == doctest::Approx(0.13640).epsilon(3e-3));
}

TEST_CASE("blockade operating points against frozen oracles")
{
    // scipy DOP853 anchors for the effective dissipator parameter 0.5
    // (paper's energy decay rate of 1; see README on the convention).
    TwoModeSpace sp = build_space(6, 6);
    SystemParams p;
    p.eta = 80.0;
    p.kappa_s = 0.5;
    p.kappa_i = 0.5;
    p.pump = 19.0;
    p.schedule = PulseSchedule::fixed(M_PI / 40.0, M_PI / 40.0);
    EvolutionResult evo = mesolve(sp, p, vacuum_ket(sp).to_density(), {});
    CHECK(evo.distribution_at_switchoff.at(1, 1) == doctest::Approx(0.8195).epsilon(4e-3));
    CHECK(evo.max_trace_error < 1e-6);

    p.eta = 200.0;
    p.pump = 20.0;
    EvolutionResult evo2 = mesolve(sp, p, vacuum_ket(sp).to_density(), {});
    CHECK(evo2.distribution_at_switchoff.at(1, 1) == doctest::Approx(0.9069).epsilon(4e-3));
}

TEST_CASE("density-matrix invariants along a blockade run")
{
    TwoModeSpace sp = build_space(6, 6);
    SystemParams p;
    p.eta = 80.0;
    p.kappa_s = 0.5;
    p.kappa_i = 0.5;
    p.pump = 18.0;
    p.schedule = PulseSchedule::fixed(M_PI / 40.0, 2.0);
    MesolveOptions opt;
    opt.check_positivity = true;
    std::vector<double> samples;
    for (int i = 1; i <= 10; ++i)
        samples.push_back(0.2 * i);
    EvolutionResult evo = mesolve(sp, p, vacuum_ket(sp).to_density(), samples, opt);
    CHECK(evo.max_trace_error < 1e-6);
    for (double h : evo.hermiticity_defects)
        CHECK(h < 1e-9);
    for (double e : evo.min_eigenvalues)
        CHECK(e >= -1e-6);
}

TEST_CASE("tolerance halving stability")
{
    TwoModeSpace sp = build_space(6, 6);
    SystemParams p;
    p.eta = 80.0;
    p.kappa_s = 0.5;
    p.kappa_i = 0.5;
    p.pump = 19.0;
    p.schedule = PulseSchedule::fixed(M_PI / 40.0, M_PI / 40.0);
    MesolveOptions o1, o2;
    o1.rtol = 1e-8;
    o2.rtol = 5e-9;
    double a = mesolve(sp, p, vacuum_ket(sp).to_density(), {}, o1)
                   .distribution_at_switchoff.at(1, 1);
    double b = mesolve(sp, p, vacuum_ket(sp).to_density(), {}, o2)
                   .distribution_at_switchoff.at(1, 1);
    CHECK(std::abs(a - b) < 1e-5);
}

TEST_CASE("retaining or dropping the Kerr term after switch-off")
{
    TwoModeSpace sp = build_space(4, 4);
    SystemParams p;
    p.eta = 80.0;
    p.kappa_s = 0.5;
    p.kappa_i = 0.5;
    p.pump = 10.0;
    p.schedule = PulseSchedule::fixed(M_PI / 40.0, 1.0);
    MesolveOptions keep, drop;
    drop.keep_kerr_after_pulse = false;
    EvolutionResult a = mesolve(sp, p, vacuum_ket(sp).to_density(), {1.0}, keep);
    EvolutionResult b = mesolve(sp, p, vacuum_ket(sp).to_density(), {1.0}, drop);
    // photon-number statistics are unaffected by the diagonal term
    for (int r = 0; r < sp.dim; ++r)
        CHECK(a.distributions[0].p[r] == doctest::Approx(b.distributions[0].p[r]).epsilon(1e-6));
}

TEST_CASE("truncation warning fires when the top level fills")
{
    TwoModeSpace sp = build_space(3, 3);
    SystemParams p;
    p.eta = 0.0;
    p.kappa_s = 0.5;
    p.kappa_i = 0.5;
    p.pump = 40.0;
    p.schedule = PulseSchedule::fixed(M_PI / 40.0, M_PI / 40.0);
    EvolutionResult evo = mesolve(sp, p, vacuum_ket(sp).to_density(), {M_PI / 40.0});
    CHECK(evo.truncation_warning);
}

TEST_CASE("input validation")
{
    TwoModeSpace sp = build_space(2, 2);
    SystemParams p;
    p.schedule = PulseSchedule::fixed(0.1, 6.0);
    QuantumState rho = vacuum_ket(sp).to_density();
    CHECK_THROWS_AS(mesolve(sp, p, rho, {7.0}), std::invalid_argument);
    CHECK_THROWS_AS(mesolve(sp, p, rho, {1.0, 0.5}), std::invalid_argument);
    TwoModeSpace other = build_space(3, 3);
    CHECK_THROWS_AS(mesolve(other, p, rho, {}), std::invalid_argument);
}

TEST_CASE("pair dominance under blockade defaults")
{
    TwoModeSpace sp = build_space(6, 6);
    SystemParams p;
    p.eta = 80.0;
    p.kappa_s = 0.5;
    p.kappa_i = 0.5;
    p.schedule = PulseSchedule::fixed(M_PI / 40.0, M_PI / 40.0);
    for (double pump : {10.0, 15.0, 20.0}) {
        p.pump = pump;
        EvolutionResult evo = mesolve(sp, p, vacuum_ket(sp).to_density(), {});
        double nonpair = 0.0;
        const auto& d = evo.distribution_at_switchoff;
        for (int ns = 0; ns <= 6; ++ns)
            for (int ni = 0; ni <= 6; ++ni)
                if (ns != ni)
                    nonpair += d.at(ns, ni);
        CHECK(nonpair < 0.10);
    }
}
