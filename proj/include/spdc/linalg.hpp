#pragma once

#include <complex>
#include <vector>

namespace spdc {

// Eigenvalues of a Hermitian matrix (row-major, n x n), ascending.
// Cyclic complex Jacobi; fine for the dimensions this project uses (<~200).
std::vector<double> hermitian_eigenvalues(const std::vector<std::complex<double>>& a, int n);

double min_eigenvalue(const std::vector<std::complex<double>>& a, int n);

}  // namespace spdc
