#include "spdc/simd.hpp"

namespace spdc::simd {

namespace {

void caxpy_scalar(cplx a, const cplx* x, cplx* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

void caxpy_w_scalar(cplx a, const double* w, const cplx* x, cplx* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * (w[i] * x[i]);
}

void cscale_scalar(cplx a, cplx* x, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        x[i] *= a;
}

double norm2_scalar(const cplx* x, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

double wnorm2_scalar(const double* w, const cplx* x, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += w[i] * (x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
    return s;
}

cplx cdot_scalar(const cplx* x, const cplx* y, std::size_t n)
{
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

}  // namespace

const Kernels& scalar_kernels()
{
    static const Kernels k = {
        "scalar",
        caxpy_scalar, caxpy_w_scalar, cscale_scalar,
        norm2_scalar, wnorm2_scalar, cdot_scalar,
    };
    return k;
}

}  // namespace spdc::simd
