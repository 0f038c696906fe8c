#pragma once

#include <string>
#include <vector>

namespace spdc {

enum class NConfig { TypeI, TypeII };

// Microscopic atomic parameters feeding the photon-photon interaction
// calculator. All rates and detunings in units of kappa_s.
struct AtomicMedium {
    NConfig config = NConfig::TypeI;
    double g4N = 0.0;            // N_a * (g/kappa_s)^4
    double coupling_ratio = 0.0; // g/Omega_c, needed to recover N_a g^2 for the linear shift
    double gamma0 = 0.5;         // gamma_31 = gamma_32 = gamma_42
    double gamma21 = 0.01;
    double gamma41 = 0.0;
    double gamma43 = 0.0;
    double omega_c = 15.0;
    double omega_d = 0.0;        // type-II switching field
    double delta31 = 0.0;
    double delta42 = 0.0;
    double delta_c = 0.0;
    double ku = 0.0;             // Doppler width k*u
};

struct KerrResult {
    double eta = 0.0;
    double delta = 0.0;        // NaN when coupling_ratio is not provided
    int quadrature_nodes = 0;  // integrand evaluations of the final pass
    bool converged = false;
    double eta_imag_residual = 0.0;  // |Im eta| / max(1, |Re eta|)
};

// Validity warnings (perturbative regime, dephasing hierarchy).
std::vector<std::string> medium_warnings(const AtomicMedium& medium);

KerrResult kerr_type_i(const AtomicMedium& medium, int nodes = 64);
KerrResult kerr_type_ii(const AtomicMedium& medium, int nodes = 64);

// Large-Omega_c closed forms (stationary atoms).
double kerr_type_i_approx(const AtomicMedium& medium);
double kerr_type_ii_approx(const AtomicMedium& medium);

struct DetuningScanPoint {
    double delta31 = 0.0;
    double eta = 0.0;
    double delta = 0.0;
    bool converged = false;
};

struct Delta42Rule {
    enum class Kind { Fixed, Proportional } kind = Kind::Proportional;
    double value = 8.5;  // fixed value of delta42, or the proportionality factor
};

std::vector<DetuningScanPoint> scan_detuning(const AtomicMedium& medium,
                                             const std::vector<double>& delta31_grid,
                                             const Delta42Rule& rule,
                                             int nodes = 64);

// Indices of local maxima of |eta| in a scan ("optimal points").
std::vector<std::size_t> scan_extrema(const std::vector<DetuningScanPoint>& scan);

}  // namespace spdc
