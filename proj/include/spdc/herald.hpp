#pragma once

#include <vector>

#include "spdc/fock.hpp"

namespace spdc {

// Thrown when no idler photon is ever present, so conditioning is impossible.
struct NoHeraldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Signal-photon distribution conditioned on detecting at least one idler
// photon: alpha_n = sum_{n_i>0} P(n, n_i) / sum_{n_s', n_i'>0} P.
std::vector<double> heralded_distribution(const JointPhotonDistribution& P);

// Heralded equal-time second-order autocorrelation
//   g2 = sum n(n-1) alpha_n / (sum n alpha_n)^2.
// Throws NoHeraldError / std::domain_error on the degenerate cases.
double g2_heralded(const JointPhotonDistribution& P);

double yield_p11(const JointPhotonDistribution& P);
double purity_conditional(const JointPhotonDistribution& P);  // distribution-based definition
double nonpair_weight(const JointPhotonDistribution& P);

struct HeraldedStatistics {
    std::vector<double> alpha;
    bool g2_defined = false;
    double g2 = 0.0;          // NaN when !g2_defined
    double yield = 0.0;       // P_{1,1}
    double purity = 0.0;      // conditional single-photon fraction
    double purity_from_g2 = 0.0;  // max(0, 1 - g2); 0 when g2 undefined
    double yp_product = 0.0;  // yield * purity_from_g2
    double nonpair = 0.0;     // sum_{n_s != n_i} P
};

// Bundled statistics; degenerate conditional quantities are flagged rather
// than thrown.
HeraldedStatistics heralded_statistics(const JointPhotonDistribution& P);

// Lossless two-mode squeezing at pulse area x = pump * t: pair populations
// tanh^{2n}(x)/cosh^2(x), the matching yield, the closed-form g2 = 2 tanh^2,
// and the clamped purity-yield product.
struct NonBlockadeAnalytic {
    std::vector<double> p_nn;
    double yield = 0.0;
    double g2_asymptotic = 0.0;
    double yp = 0.0;
};

NonBlockadeAnalytic analytic_nonblockade(double x, int n_max);

}  // namespace spdc
