#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace spdc::simd {

using cplx = std::complex<double>;

// Table of the arithmetic kernels the solvers run their inner loops on.
// Each instruction set provides one table; the active one is picked once at
// startup from CPUID (override with SPDC_SIMD=scalar|avx2).
struct Kernels {
    const char* name;
    // y[i] += a*x[i]
    void (*caxpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
    // y[i] += a*w[i]*x[i], real per-element weights
    void (*caxpy_w)(cplx a, const double* w, const cplx* x, cplx* y, std::size_t n);
    // x[i] *= a
    void (*cscale)(cplx a, cplx* x, std::size_t n);
    // sum_i |x[i]|^2
    double (*norm2)(const cplx* x, std::size_t n);
    // sum_i w[i]*|x[i]|^2
    double (*wnorm2)(const double* w, const cplx* x, std::size_t n);
    // sum_i conj(x[i])*y[i]
    cplx (*cdot)(const cplx* x, const cplx* y, std::size_t n);
};

const Kernels& scalar_kernels();

#if defined(__x86_64__) || defined(_M_X64)
bool cpu_has_avx2_fma();
const Kernels& avx2_kernels();  // valid to call only when cpu_has_avx2_fma()
#endif

const Kernels& active_kernels();
std::string_view active_kernel_name();

}  // namespace spdc::simd
