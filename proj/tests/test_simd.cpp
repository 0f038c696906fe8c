#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "spdc/simd.hpp"

using namespace spdc::simd;
using cd = std::complex<double>;

namespace {

std::vector<cd> random_cvec(std::mt19937_64& eng, std::size_t n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cd> v(n);
    for (auto& x : v)
        x = {u(eng), u(eng)};
    return v;
}

std::vector<double> random_rvec(std::mt19937_64& eng, std::size_t n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(eng);
    return v;
}

void check_close(const std::vector<cd>& a, const std::vector<cd>& b, double tol)
{
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a[i] - b[i]) <= tol * (1.0 + std::abs(a[i])));
}

}  // namespace

TEST_CASE("scalar kernels match straightforward math")
{
    const auto& K = scalar_kernels();
    std::vector<cd> x = {{1, 1}, {2, -1}, {0, 3}};
    std::vector<cd> y = {{0, 0}, {1, 0}, {0, -1}};
    cd a{2.0, -1.0};
    K.caxpy(a, x.data(), y.data(), 3);
    CHECK(y[0] == a * cd{1, 1});
    CHECK(y[1] == cd{1, 0} + a * cd{2, -1});

    CHECK(K.norm2(x.data(), 3) == doctest::Approx(2.0 + 5.0 + 9.0));

    double w[3] = {1.0, 0.5, 2.0};
    CHECK(K.wnorm2(w, x.data(), 3) == doctest::Approx(2.0 + 2.5 + 18.0));

    cd d = K.cdot(x.data(), x.data(), 3);
    CHECK(d.real() == doctest::Approx(16.0));
    CHECK(d.imag() == doctest::Approx(0.0));
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernels agree with scalar on random data")
{
    if (!cpu_has_avx2_fma()) {
        MESSAGE("AVX2 not available; skipping");
        return;
    }
    const auto& S = scalar_kernels();
    const auto& V = avx2_kernels();
    std::mt19937_64 eng(42);

    for (std::size_t n : {1u, 2u, 3u, 7u, 48u, 49u, 1000u}) {
        auto x = random_cvec(eng, n);
        auto w = random_rvec(eng, n);
        cd a{0.7, -1.3};

        auto y1 = random_cvec(eng, n);
        auto y2 = y1;
        S.caxpy(a, x.data(), y1.data(), n);
        V.caxpy(a, x.data(), y2.data(), n);
        check_close(y1, y2, 1e-14);

        y2 = y1;
        S.caxpy_w(a, w.data(), x.data(), y1.data(), n);
        V.caxpy_w(a, w.data(), x.data(), y2.data(), n);
        check_close(y1, y2, 1e-14);

        auto z1 = x, z2 = x;
        S.cscale(a, z1.data(), n);
        V.cscale(a, z2.data(), n);
        check_close(z1, z2, 1e-14);

        CHECK(S.norm2(x.data(), n) == doctest::Approx(V.norm2(x.data(), n)).epsilon(1e-12));
        CHECK(S.wnorm2(w.data(), x.data(), n)
              == doctest::Approx(V.wnorm2(w.data(), x.data(), n)).epsilon(1e-12));

        cd d1 = S.cdot(x.data(), y1.data(), n);
        cd d2 = V.cdot(x.data(), y1.data(), n);
        CHECK(std::abs(d1 - d2) <= 1e-12 * (1.0 + std::abs(d1)));
    }
}
#endif

TEST_CASE("active kernel dispatch is consistent")
{
    const auto& K = active_kernels();
    CHECK((active_kernel_name() == "scalar" || active_kernel_name() == "avx2"));
    std::vector<cd> x = {{1, 0}, {0, 1}};
    CHECK(K.norm2(x.data(), 2) == doctest::Approx(2.0));
}
