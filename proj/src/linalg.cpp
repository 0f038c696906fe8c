#include "spdc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spdc {

namespace {
using cplx = std::complex<double>;
}

// Two-sided Jacobi with complex rotations. Each sweep annihilates every
// off-diagonal pair (p,q); converges quadratically once nearly diagonal.
std::vector<double> hermitian_eigenvalues(const std::vector<cplx>& a_in, int n)
{
    if (int(a_in.size()) != n * n)
        throw std::invalid_argument("hermitian_eigenvalues: bad matrix size");
    std::vector<cplx> a = a_in;
    auto at = [&](int r, int c) -> cplx& { return a[std::size_t(r) * n + c]; };

    double scale = 0.0;
    for (const cplx& v : a)
        scale = std::max(scale, std::abs(v));
    if (scale == 0.0)
        return std::vector<double>(n, 0.0);
    const double tol = 1e-14 * scale;

    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
                off = std::max(off, std::abs(at(p, q)));
        if (off <= tol)
            break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                cplx apq = at(p, q);
                double aqp_abs = std::abs(apq);
                if (aqp_abs <= tol)
                    continue;
                double app = at(p, p).real();
                double aqq = at(q, q).real();
                // Unitary 2x2: diag phase to make a_pq real, then Givens.
                cplx phase = apq / aqp_abs;  // e^{i arg(apq)}
                double theta = 0.5 * std::atan2(2.0 * aqp_abs, app - aqq);
                double c = std::cos(theta);
                cplx s = std::sin(theta) * phase;

                // A <- M^dagger A M with M = [[c, -s], [conj(s), c]] in the (p,q) plane;
                // this choice of arg(s) makes the transformed pivot real and zero.
                for (int k = 0; k < n; ++k) {
                    cplx akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp + std::conj(s) * akq;
                    at(k, q) = -s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    cplx apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk + s * aqk;
                    at(q, k) = -std::conj(s) * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> ev(n);
    for (int r = 0; r < n; ++r)
        ev[r] = at(r, r).real();
    std::sort(ev.begin(), ev.end());
    return ev;
}

double min_eigenvalue(const std::vector<cplx>& a, int n)
{
    return hermitian_eigenvalues(a, n).front();
}

}  // namespace spdc
