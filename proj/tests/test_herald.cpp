#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "spdc/herald.hpp"

using namespace spdc;

namespace {

JointPhotonDistribution make_dist(int n_max, std::initializer_list<std::tuple<int, int, double>> cells)
{
    JointPhotonDistribution P;
    P.n_max_s = n_max;
    P.n_max_i = n_max;
    P.p.assign(std::size_t(n_max + 1) * (n_max + 1), 0.0);
    for (auto [ns, ni, v] : cells)
        P.at(ns, ni) = v;
    return P;
}

JointPhotonDistribution squeezing_dist(double x, int n_max)
{
    NonBlockadeAnalytic an = analytic_nonblockade(x, n_max);
    JointPhotonDistribution P;
    P.n_max_s = P.n_max_i = n_max;
    P.p.assign(std::size_t(n_max + 1) * (n_max + 1), 0.0);
    for (int n = 0; n <= n_max; ++n)
        P.at(n, n) = an.p_nn[n];
    return P;
}

}  // namespace

TEST_CASE("heralded distribution")
{
    auto P = make_dist(3, {{1, 1, 1.0}});
    auto alpha = heralded_distribution(P);
    CHECK(alpha[0] == doctest::Approx(0.0));
    CHECK(alpha[1] == doctest::Approx(1.0));

    P = make_dist(3, {{0, 0, 0.5}, {1, 1, 0.5}});
    alpha = heralded_distribution(P);
    CHECK(alpha[1] == doctest::Approx(1.0));  // heralding removes the vacuum

    P = make_dist(3, {{1, 1, 0.6}, {2, 2, 0.3}, {0, 1, 0.1}});
    alpha = heralded_distribution(P);
    CHECK(alpha[0] == doctest::Approx(0.1));
    CHECK(alpha[1] == doctest::Approx(0.6));
    CHECK(alpha[2] == doctest::Approx(0.3));

    // alpha sums to one whenever a herald exists
    double s = 0.0;
    for (double a : alpha)
        s += a;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));

    CHECK_THROWS_AS(heralded_distribution(make_dist(3, {{1, 0, 1.0}})), NoHeraldError);
}

TEST_CASE("rescaling invariance of the conditional distribution")
{
    std::mt19937_64 eng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    JointPhotonDistribution P;
    P.n_max_s = P.n_max_i = 4;
    P.p.resize(25);
    for (auto& v : P.p)
        v = u(eng);
    auto a1 = heralded_distribution(P);
    for (auto& v : P.p)
        v *= 37.5;
    auto a2 = heralded_distribution(P);
    for (std::size_t i = 0; i < a1.size(); ++i)
        CHECK(a1[i] == doctest::Approx(a2[i]).epsilon(1e-13));
}

TEST_CASE("heralded g2")
{
    CHECK(g2_heralded(make_dist(3, {{1, 1, 1.0}})) == doctest::Approx(0.0));
    // alpha_1 = alpha_2 = 1/2
    auto P = make_dist(3, {{1, 1, 0.5}, {2, 2, 0.5}});
    CHECK(g2_heralded(P) == doctest::Approx(1.0 / 2.25));

    // pair superposition at x = 0.5 approaches 2 tanh^2
    CHECK(g2_heralded(squeezing_dist(0.5, 40))
          == doctest::Approx(2.0 * std::pow(std::tanh(0.5), 2)).epsilon(1e-3));

    // zero mean photon number after heralding
    CHECK_THROWS_AS(g2_heralded(make_dist(3, {{0, 1, 1.0}})), std::domain_error);
    // distributions without two-photon weight give exactly zero
    std::mt19937_64 eng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        auto Q = make_dist(4, {});
        for (int ni = 0; ni <= 4; ++ni) {
            Q.at(0, ni) = u(eng);
            Q.at(1, ni) = u(eng);
        }
        CHECK(g2_heralded(Q) == doctest::Approx(0.0));
    }
}

TEST_CASE("asymptotic g2 over the squeezing family")
{
    for (double x : {0.1, 0.3, 0.6, 0.9, 1.2})
        CHECK(g2_heralded(squeezing_dist(x, 40))
              == doctest::Approx(2.0 * std::pow(std::tanh(x), 2)).epsilon(1e-3));
}

TEST_CASE("truncation only lowers g2")
{
    double prev = 0.0;
    for (int n_max : {2, 4, 8, 16, 32}) {
        double g2 = g2_heralded(squeezing_dist(1.0, n_max));
        CHECK(g2 >= prev - 1e-14);
        prev = g2;
    }
}

TEST_CASE("yield, purity, product, nonpair")
{
    auto P = make_dist(3, {{1, 1, 1.0}});
    HeraldedStatistics st = heralded_statistics(P);
    CHECK(st.yield == doctest::Approx(1.0));
    CHECK(st.purity == doctest::Approx(1.0));
    CHECK(st.yp_product == doctest::Approx(1.0));
    CHECK(st.nonpair == doctest::Approx(0.0));

    double x = 0.5;
    auto S = squeezing_dist(x, 40);
    double t2 = std::pow(std::tanh(x), 2), c2 = std::pow(std::cosh(x), 2);
    CHECK(yield_p11(S) == doctest::Approx(t2 / c2).epsilon(1e-12));
    CHECK(yield_p11(S) == doctest::Approx(0.1679).epsilon(1e-3));

    // near-single-photon distribution: 1 - g2 approaches the conditional purity
    auto N = make_dist(3, {{0, 0, 0.095}, {1, 1, 0.9}, {2, 2, 0.005}});
    HeraldedStatistics stn = heralded_statistics(N);
    CHECK(std::abs((1.0 - stn.g2) - stn.purity) < 0.01);
}

TEST_CASE("degenerate conditional statistics are flagged")
{
    auto P = make_dist(3, {{0, 1, 1.0}});
    HeraldedStatistics st = heralded_statistics(P);
    CHECK(!st.g2_defined);
    CHECK(std::isnan(st.g2));
    CHECK(st.purity_from_g2 == 0.0);
    CHECK(st.yp_product == 0.0);
}

TEST_CASE("analytic non-blockade family")
{
    NonBlockadeAnalytic at0 = analytic_nonblockade(0.0, 10);
    CHECK(at0.p_nn[0] == doctest::Approx(1.0));
    CHECK(at0.yield == doctest::Approx(0.0));
    CHECK(at0.g2_asymptotic == doctest::Approx(0.0));
    CHECK(at0.yp == doctest::Approx(0.0));

    // purity-yield product peaks near pulse area 0.497 at about 0.0962 and is
    // bounded by 1/(6 sqrt(3)) over the whole family
    const double bound = 1.0 / (6.0 * std::sqrt(3.0));
    double best = 0.0, best_x = 0.0, best_y = 0.0, best_yx = 0.0;
    for (double x = 0.0; x <= 3.0; x += 0.001) {
        NonBlockadeAnalytic an = analytic_nonblockade(x, 10);
        CHECK(an.yp <= bound + 1e-12);
        if (an.yp > best) {
            best = an.yp;
            best_x = x;
        }
        if (an.yield > best_y) {
            best_y = an.yield;
            best_yx = x;
        }
    }
    CHECK(best == doctest::Approx(bound).epsilon(1e-4));
    CHECK(best_x == doctest::Approx(0.4973).epsilon(5e-3));
    // maximum yield of the family is 1/4
    CHECK(best_y == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(best_yx == doctest::Approx(0.8814).epsilon(5e-3));

    // yp measured through the distribution path stays under the same bound
    for (double x = 0.05; x <= 1.2; x += 0.05) {
        HeraldedStatistics st = heralded_statistics(squeezing_dist(x, 40));
        CHECK(st.yp_product <= bound + 1e-4);
    }
}
