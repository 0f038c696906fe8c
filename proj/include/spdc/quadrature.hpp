#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace spdc {

// Nodes/weights for int f(x) e^{-x^2} dx (physicists' convention).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussHermiteRule gauss_hermite(int n);

// Average of f over the Maxwell-Boltzmann velocity profile,
//   int f(kv) e^{-(kv/ku)^2} d(kv) / (ku sqrt(pi)),
// by Gauss-Hermite quadrature; ku = 0 returns f(0) exactly.
// Throws if the integrand is non-finite at any node.
std::complex<double> doppler_average(const std::function<std::complex<double>(double)>& f,
                                     double ku, int nodes);

// Adaptive Gauss-Kronrod (G7/K15) on [a, b] with optional split hints; used
// where the integrand has structure far narrower than the Gaussian weight.
struct AdaptiveResult {
    std::complex<double> value;
    double error_estimate = 0.0;
    int evaluations = 0;
    bool converged = false;
};

AdaptiveResult integrate_adaptive(const std::function<std::complex<double>(double)>& f,
                                  double a, double b,
                                  const std::vector<double>& split_hints,
                                  double rel_tol, double abs_tol,
                                  int max_intervals = 4000);

}  // namespace spdc
