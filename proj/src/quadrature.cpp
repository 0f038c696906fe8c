#include "spdc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace spdc {

namespace {
using cplx = std::complex<double>;
}

namespace {

// Orthonormal-Hermite values (p_n, p_{n-1}) at z, rescaled on the fly; the
// raw values overflow around n ~ 250 at the outer nodes. log_pp receives
// log |p_n'(z)| = log |sqrt(2n) p_{n-1}(z)|.
void hermite_pair(int n, double z, double& ratio, double& log_pp)
{
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    double p1 = pim4, p2 = 0.0, logscale = 0.0;
    for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(double(j) / (j + 1)) * p3;
        double a = std::abs(p1);
        if (a > 1e120) {
            p1 /= a;
            p2 /= a;
            logscale += std::log(a);
        }
    }
    double pp_scaled = std::sqrt(2.0 * n) * p2;
    ratio = p1 / pp_scaled;  // Newton correction, scale-free
    log_pp = std::log(std::abs(pp_scaled)) + logscale;
}

// Number of eigenvalues of the Hermite Jacobi matrix below x (Sturm count);
// its eigenvalues are exactly the quadrature nodes.
int sturm_count(int n, double x)
{
    int count = 0;
    double d = -x;
    if (d < 0.0)
        ++count;
    for (int j = 1; j < n; ++j) {
        double b2 = 0.5 * j;  // off-diagonal^2 of the Jacobi matrix
        if (d == 0.0)
            d = -1e-300;
        d = -x - b2 / d;
        if (d < 0.0)
            ++count;
    }
    return count;
}

}  // namespace

// Nodes via Sturm bisection on the Jacobi matrix (robust for any n), then a
// Newton polish on the orthonormal recurrence; weights w = 2/(p_n'(x))^2.
GaussHermiteRule gauss_hermite(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_hermite: n must be positive");
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const double bound = std::sqrt(2.0 * n) + 2.0;
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // k-th smallest eigenvalue with k = n - 1 - i (descending from the top)
        int k = n - 1 - i;
        double lo = 0.0, hi = bound;
        while (hi - lo > 1e-13 * std::max(1.0, hi)) {
            double mid = 0.5 * (lo + hi);
            if (sturm_count(n, mid) > k)
                hi = mid;
            else
                lo = mid;
        }
        double z = 0.5 * (lo + hi);
        double ratio = 0.0, log_pp = 0.0;
        for (int iter = 0; iter < 8; ++iter) {
            hermite_pair(n, z, ratio, log_pp);
            z -= ratio;
            if (std::abs(ratio) <= 1e-15 * std::max(1.0, std::abs(z)))
                break;
        }
        if (n % 2 == 1 && i == m - 1)
            z = 0.0;
        hermite_pair(n, z, ratio, log_pp);
        rule.nodes[n - 1 - i] = z;
        rule.nodes[i] = -z;
        // in logs so far-out nodes underflow to zero instead of corrupting
        // the rule
        double lw = std::log(2.0) - 2.0 * log_pp;
        double w = lw < -700.0 ? 0.0 : std::exp(lw);
        rule.weights[n - 1 - i] = w;
        rule.weights[i] = w;
    }
    return rule;
}

cplx doppler_average(const std::function<cplx(double)>& f, double ku, int nodes)
{
    if (nodes < 8)
        throw std::invalid_argument("doppler_average: need at least 8 nodes");
    if (ku < 0.0)
        throw std::invalid_argument("doppler_average: ku must be nonnegative");
    if (ku == 0.0) {
        cplx v = f(0.0);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::runtime_error("doppler_average: integrand not finite at v=0");
        return v;
    }
    const GaussHermiteRule rule = gauss_hermite(nodes);
    cplx acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
        cplx v = f(ku * rule.nodes[i]);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::runtime_error("doppler_average: integrand not finite at a node");
        acc += rule.weights[i] * v;
    }
    return acc / std::sqrt(M_PI);
}

namespace {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
    double a, b;
    cplx value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment qk15(const std::function<cplx(double)>& f, double a, double b, int& evals)
{
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    cplx fc = f(c);
    evals += 15;
    cplx resg = kWg[3] * fc;
    cplx resk = kWgk[7] * fc;
    for (int j = 0; j < 7; ++j) {
        double dx = h * kXgk[j];
        cplx f1 = f(c - dx);
        cplx f2 = f(c + dx);
        resk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1)
            resg += kWg[j / 2] * (f1 + f2);
    }
    Segment s;
    s.a = a;
    s.b = b;
    s.value = resk * h;
    s.error = std::abs(resk - resg) * std::abs(h);
    return s;
}

}  // namespace

AdaptiveResult integrate_adaptive(const std::function<cplx(double)>& f,
                                  double a, double b,
                                  const std::vector<double>& split_hints,
                                  double rel_tol, double abs_tol,
                                  int max_intervals)
{
    std::vector<double> edges = {a, b};
    for (double h : split_hints)
        if (h > a && h < b)
            edges.push_back(h);
    std::sort(edges.begin(), edges.end());

    AdaptiveResult res;
    std::priority_queue<Segment> heap;
    cplx total = 0.0;
    double toterr = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Segment s = qk15(f, edges[i], edges[i + 1], res.evaluations);
        total += s.value;
        toterr += s.error;
        heap.push(s);
    }

    int n_seg = int(edges.size()) - 1;
    while (n_seg < max_intervals) {
        double goal = std::max(abs_tol, rel_tol * std::abs(total));
        if (toterr <= goal)
            break;
        Segment worst = heap.top();
        heap.pop();
        total -= worst.value;
        toterr -= worst.error;
        double mid = 0.5 * (worst.a + worst.b);
        Segment s1 = qk15(f, worst.a, mid, res.evaluations);
        Segment s2 = qk15(f, mid, worst.b, res.evaluations);
        total += s1.value + s2.value;
        toterr += s1.error + s2.error;
        heap.push(s1);
        heap.push(s2);
        ++n_seg;
    }

    res.value = total;
    res.error_estimate = toterr;
    res.converged = toterr <= std::max(abs_tol, rel_tol * std::abs(total));
    return res;
}

}  // namespace spdc
