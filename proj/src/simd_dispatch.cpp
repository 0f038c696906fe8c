#include "spdc/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace spdc::simd {

#if defined(__x86_64__) || defined(_M_X64)
bool cpu_has_avx2_fma()
{
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

namespace {

const Kernels& pick()
{
    const char* env = std::getenv("SPDC_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0)
            return scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2_fma())
            return avx2_kernels();
#endif
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2_fma())
        return avx2_kernels();
#endif
    return scalar_kernels();
}

}  // namespace

const Kernels& active_kernels()
{
    static const Kernels& k = pick();
    return k;
}

std::string_view active_kernel_name()
{
    return active_kernels().name;
}

}  // namespace spdc::simd
