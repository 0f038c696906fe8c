// AVX2+FMA variants of the kernel table. Compiled with -mavx2 -mfma; only
// reached through the runtime dispatch in simd_dispatch.cpp.

#include "spdc/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace spdc::simd {

namespace {

// One __m256d holds two complex doubles as [re0, im0, re1, im1].

inline __m256d cmul_const(__m256d v, __m256d ar, __m256d ai)
{
    // (ar + i*ai) * v, per complex lane
    __m256d vs = _mm256_permute_pd(v, 0x5);  // [im0, re0, im1, re1]
    return _mm256_fmaddsub_pd(v, ar, _mm256_mul_pd(vs, ai));
}

void caxpy_avx2(cplx a, const cplx* x, cplx* y, std::size_t n)
{
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    const double* xs = reinterpret_cast<const double*>(x);
    double* ys = reinterpret_cast<double*>(y);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = _mm256_loadu_pd(xs + 2 * i);
        __m256d out = _mm256_add_pd(_mm256_loadu_pd(ys + 2 * i), cmul_const(v, ar, ai));
        _mm256_storeu_pd(ys + 2 * i, out);
    }
    for (; i < n; ++i)
        y[i] += a * x[i];
}

void caxpy_w_avx2(cplx a, const double* w, const cplx* x, cplx* y, std::size_t n)
{
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    const double* xs = reinterpret_cast<const double*>(x);
    double* ys = reinterpret_cast<double*>(y);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m128d w2 = _mm_loadu_pd(w + i);
        __m256d wd = _mm256_permute4x64_pd(_mm256_castpd128_pd256(w2), 0x50);  // [w0,w0,w1,w1]
        __m256d v = _mm256_mul_pd(_mm256_loadu_pd(xs + 2 * i), wd);
        __m256d out = _mm256_add_pd(_mm256_loadu_pd(ys + 2 * i), cmul_const(v, ar, ai));
        _mm256_storeu_pd(ys + 2 * i, out);
    }
    for (; i < n; ++i)
        y[i] += a * (w[i] * x[i]);
}

void cscale_avx2(cplx a, cplx* x, std::size_t n)
{
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    double* xs = reinterpret_cast<double*>(x);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = _mm256_loadu_pd(xs + 2 * i);
        _mm256_storeu_pd(xs + 2 * i, cmul_const(v, ar, ai));
    }
    for (; i < n; ++i)
        x[i] *= a;
}

inline double hsum(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double norm2_avx2(const cplx* x, std::size_t n)
{
    const double* xs = reinterpret_cast<const double*>(x);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = _mm256_loadu_pd(xs + 2 * i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i)
        s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

double wnorm2_avx2(const double* w, const cplx* x, std::size_t n)
{
    const double* xs = reinterpret_cast<const double*>(x);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m128d w2 = _mm_loadu_pd(w + i);
        __m256d wd = _mm256_permute4x64_pd(_mm256_castpd128_pd256(w2), 0x50);
        __m256d v = _mm256_loadu_pd(xs + 2 * i);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(v, v), wd, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i)
        s += w[i] * (x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
    return s;
}

cplx cdot_avx2(const cplx* x, const cplx* y, std::size_t n)
{
    const double* xs = reinterpret_cast<const double*>(x);
    const double* ys = reinterpret_cast<const double*>(y);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d xv = _mm256_loadu_pd(xs + 2 * i);
        __m256d yv = _mm256_loadu_pd(ys + 2 * i);
        __m256d xr = _mm256_movedup_pd(xv);          // [xr0, xr0, xr1, xr1]
        __m256d xi = _mm256_permute_pd(xv, 0xF);     // [xi0, xi0, xi1, xi1]
        __m256d yswap = _mm256_permute_pd(yv, 0x5);  // [yi0, yr0, yi1, yr1]
        // even: xr*yr + xi*yi (re), odd: xr*yi - xi*yr (im)
        acc = _mm256_add_pd(acc, _mm256_fmsubadd_pd(xr, yv, _mm256_mul_pd(xi, yswap)));
    }
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    lo = _mm_add_pd(lo, hi);
    double re = _mm_cvtsd_f64(lo);
    double im = _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
    for (; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

}  // namespace

const Kernels& avx2_kernels()
{
    static const Kernels k = {
        "avx2",
        caxpy_avx2, caxpy_w_avx2, cscale_avx2,
        norm2_avx2, wnorm2_avx2, cdot_avx2,
    };
    return k;
}

}  // namespace spdc::simd

#endif  // x86_64
