#include "spdc/herald.hpp"

#include <cmath>
#include <limits>

namespace spdc {

namespace {

double heralding_weight(const JointPhotonDistribution& P)
{
    double acc = 0.0;
    for (int ns = 0; ns <= P.n_max_s; ++ns)
        for (int ni = 1; ni <= P.n_max_i; ++ni)
            acc += P.at(ns, ni);
    return acc;
}

}  // namespace

std::vector<double> heralded_distribution(const JointPhotonDistribution& P)
{
    double denom = heralding_weight(P);
    if (denom <= 0.0)
        throw NoHeraldError("heralded_distribution: no idler photon is ever present");
    std::vector<double> alpha(P.n_max_s + 1, 0.0);
    for (int ns = 0; ns <= P.n_max_s; ++ns) {
        double acc = 0.0;
        for (int ni = 1; ni <= P.n_max_i; ++ni)
            acc += P.at(ns, ni);
        alpha[ns] = acc / denom;
    }
    return alpha;
}

double g2_heralded(const JointPhotonDistribution& P)
{
    std::vector<double> alpha = heralded_distribution(P);
    double num = 0.0, mean = 0.0;
    for (std::size_t n = 0; n < alpha.size(); ++n) {
        num += double(n) * (double(n) - 1.0) * alpha[n];
        mean += double(n) * alpha[n];
    }
    if (mean <= 0.0)
        throw std::domain_error("g2_heralded: zero mean photon number after heralding");
    return num / (mean * mean);
}

double yield_p11(const JointPhotonDistribution& P)
{
    return (P.n_max_s >= 1 && P.n_max_i >= 1) ? P.at(1, 1) : 0.0;
}

double purity_conditional(const JointPhotonDistribution& P)
{
    double denom = 0.0;
    for (int ns = 1; ns <= P.n_max_s; ++ns)
        for (int ni = 1; ni <= P.n_max_i; ++ni)
            denom += P.at(ns, ni);
    if (denom <= 0.0)
        throw NoHeraldError("purity: no coincident photons present");
    double num = 0.0;
    for (int ni = 1; ni <= P.n_max_i; ++ni)
        num += P.at(1, ni);
    return num / denom;
}

double nonpair_weight(const JointPhotonDistribution& P)
{
    double acc = 0.0;
    for (int ns = 0; ns <= P.n_max_s; ++ns)
        for (int ni = 0; ni <= P.n_max_i; ++ni)
            if (ns != ni)
                acc += P.at(ns, ni);
    return acc;
}

HeraldedStatistics heralded_statistics(const JointPhotonDistribution& P)
{
    HeraldedStatistics st;
    st.yield = yield_p11(P);
    st.nonpair = nonpair_weight(P);
    try {
        st.alpha = heralded_distribution(P);
        st.g2 = g2_heralded(P);
        st.g2_defined = true;
    } catch (const std::exception&) {
        st.g2 = std::numeric_limits<double>::quiet_NaN();
        st.g2_defined = false;
    }
    try {
        st.purity = purity_conditional(P);
    } catch (const NoHeraldError&) {
        st.purity = 0.0;
    }
    st.purity_from_g2 = st.g2_defined ? std::max(0.0, 1.0 - st.g2) : 0.0;
    st.yp_product = st.yield * st.purity_from_g2;
    return st;
}

NonBlockadeAnalytic analytic_nonblockade(double x, int n_max)
{
    if (x < 0.0)
        throw std::invalid_argument("analytic_nonblockade: pulse area must be nonnegative");
    if (n_max < 1)
        throw std::invalid_argument("analytic_nonblockade: n_max must be >= 1");
    NonBlockadeAnalytic out;
    const double t2 = std::tanh(x) * std::tanh(x);
    const double c2 = std::cosh(x) * std::cosh(x);
    out.p_nn.resize(n_max + 1);
    for (int n = 0; n <= n_max; ++n)
        out.p_nn[n] = std::pow(t2, n) / c2;
    out.yield = out.p_nn[1];
    out.g2_asymptotic = 2.0 * t2;
    out.yp = out.g2_asymptotic <= 1.0 ? out.yield * (1.0 - out.g2_asymptotic) : 0.0;
    return out;
}

}  // namespace spdc
