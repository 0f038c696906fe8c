#include "spdc/fock.hpp"

#include <algorithm>
#include <cmath>

#include "spdc/simd.hpp"

namespace spdc {

TwoModeSpace build_space(int n_max_s, int n_max_i)
{
    if (n_max_s < 1 || n_max_i < 1)
        throw std::invalid_argument("build_space: truncation must be >= 1 per mode");
    TwoModeSpace sp;
    sp.n_max_s = n_max_s;
    sp.n_max_i = n_max_i;
    sp.stride = n_max_i + 1;
    sp.dim = (n_max_s + 1) * (n_max_i + 1);
    return sp;
}

ComplexOperator ComplexOperator::adjoint() const
{
    ComplexOperator out(space);
    for (int r = 0; r < space.dim; ++r)
        for (int c = 0; c < space.dim; ++c)
            out.at(c, r) = std::conj(at(r, c));
    return out;
}

double ComplexOperator::max_abs() const
{
    double mx = 0.0;
    for (const cplx& v : m)
        mx = std::max(mx, std::abs(v));
    return mx;
}

double ComplexOperator::hermiticity_defect() const
{
    double mx = 0.0;
    for (int r = 0; r < space.dim; ++r)
        for (int c = r; c < space.dim; ++c)
            mx = std::max(mx, std::abs(at(r, c) - std::conj(at(c, r))));
    return mx;
}

bool ComplexOperator::is_hermitian(double tol) const
{
    double scale = std::max(1.0, max_abs());
    return hermiticity_defect() <= tol * scale;
}

cplx ComplexOperator::trace() const
{
    cplx t = 0.0;
    for (int r = 0; r < space.dim; ++r)
        t += at(r, r);
    return t;
}

ComplexOperator& ComplexOperator::operator+=(const ComplexOperator& o)
{
    if (!(space == o.space))
        throw std::invalid_argument("operator space mismatch");
    simd::active_kernels().caxpy(1.0, o.m.data(), m.data(), m.size());
    return *this;
}

ComplexOperator& ComplexOperator::operator-=(const ComplexOperator& o)
{
    if (!(space == o.space))
        throw std::invalid_argument("operator space mismatch");
    simd::active_kernels().caxpy(-1.0, o.m.data(), m.data(), m.size());
    return *this;
}

ComplexOperator& ComplexOperator::operator*=(cplx a)
{
    simd::active_kernels().cscale(a, m.data(), m.size());
    return *this;
}

ComplexOperator operator*(const ComplexOperator& a, const ComplexOperator& b)
{
    if (!(a.space == b.space))
        throw std::invalid_argument("operator space mismatch");
    const int d = a.space.dim;
    ComplexOperator out(a.space);
    // (row of out) += a(r,k) * (row k of b)
    const auto& K = simd::active_kernels();
    for (int r = 0; r < d; ++r) {
        cplx* orow = &out.m[std::size_t(r) * d];
        for (int k = 0; k < d; ++k) {
            cplx ark = a.at(r, k);
            if (ark == cplx(0.0))
                continue;
            K.caxpy(ark, &b.m[std::size_t(k) * d], orow, std::size_t(d));
        }
    }
    return out;
}

ComplexOperator identity_op(const TwoModeSpace& space)
{
    ComplexOperator op(space);
    for (int r = 0; r < space.dim; ++r)
        op.at(r, r) = 1.0;
    return op;
}

ComplexOperator annihilation(const TwoModeSpace& space, Mode mode)
{
    ComplexOperator op(space);
    for (int r = 0; r < space.dim; ++r) {
        auto [ns, ni] = space.levels(r);
        if (mode == Mode::Signal && ns < space.n_max_s)
            op.at(r, space.index(ns + 1, ni)) = std::sqrt(double(ns + 1));
        if (mode == Mode::Idler && ni < space.n_max_i)
            op.at(r, space.index(ns, ni + 1)) = std::sqrt(double(ni + 1));
    }
    return op;
}

ComplexOperator creation(const TwoModeSpace& space, Mode mode)
{
    return annihilation(space, mode).adjoint();
}

ComplexOperator number_op(const TwoModeSpace& space, Mode mode)
{
    ComplexOperator op(space);
    for (int r = 0; r < space.dim; ++r)
        op.at(r, r) = double(mode == Mode::Signal ? space.ns_of(r) : space.ni_of(r));
    return op;
}

QuantumState QuantumState::ket(const TwoModeSpace& space, std::vector<cplx> amplitudes)
{
    if (int(amplitudes.size()) != space.dim)
        throw std::invalid_argument("ket size does not match space dimension");
    QuantumState st;
    st.kind = Kind::Ket;
    st.space = space;
    st.data = std::move(amplitudes);
    return st;
}

QuantumState QuantumState::density(const TwoModeSpace& space, std::vector<cplx> matrix)
{
    if (matrix.size() != std::size_t(space.dim) * space.dim)
        throw std::invalid_argument("density matrix size does not match space dimension");
    QuantumState st;
    st.kind = Kind::DensityMatrix;
    st.space = space;
    st.data = std::move(matrix);
    return st;
}

double QuantumState::norm() const
{
    if (!is_ket())
        throw std::logic_error("norm() is for kets");
    return std::sqrt(simd::active_kernels().norm2(data.data(), data.size()));
}

cplx QuantumState::trace() const
{
    if (is_ket())
        throw std::logic_error("trace() is for density matrices");
    cplx t = 0.0;
    for (int r = 0; r < space.dim; ++r)
        t += rho(r, r);
    return t;
}

double QuantumState::hermiticity_defect() const
{
    if (is_ket())
        return 0.0;
    double mx = 0.0;
    for (int r = 0; r < space.dim; ++r)
        for (int c = r; c < space.dim; ++c)
            mx = std::max(mx, std::abs(rho(r, c) - std::conj(rho(c, r))));
    return mx;
}

QuantumState QuantumState::to_density() const
{
    if (!is_ket())
        return *this;
    const int d = space.dim;
    std::vector<cplx> rho(std::size_t(d) * d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            rho[std::size_t(r) * d + c] = data[r] * std::conj(data[c]);
    return density(space, std::move(rho));
}

QuantumState fock_ket(const TwoModeSpace& space, int ns, int ni)
{
    if (ns < 0 || ns > space.n_max_s || ni < 0 || ni > space.n_max_i)
        throw std::invalid_argument("fock_ket: level outside the space");
    std::vector<cplx> amp(space.dim);
    amp[space.index(ns, ni)] = 1.0;
    return QuantumState::ket(space, std::move(amp));
}

QuantumState vacuum_ket(const TwoModeSpace& space)
{
    return fock_ket(space, 0, 0);
}

cplx expectation(const ComplexOperator& op, const QuantumState& state)
{
    if (!(op.space == state.space))
        throw std::invalid_argument("expectation: operator and state on different spaces");
    const int d = op.space.dim;
    if (state.is_ket()) {
        // <psi|O|psi>
        cplx acc = 0.0;
        for (int r = 0; r < d; ++r) {
            cplx row = 0.0;
            for (int c = 0; c < d; ++c)
                row += op.at(r, c) * state.data[c];
            acc += std::conj(state.data[r]) * row;
        }
        return acc;
    }
    // Tr(rho O) = sum_{r,c} rho(r,c) O(c,r)
    cplx acc = 0.0;
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            acc += state.rho(r, c) * op.at(c, r);
    return acc;
}

double JointPhotonDistribution::sum() const
{
    double s = 0.0;
    for (double v : p)
        s += v;
    return s;
}

double JointPhotonDistribution::min() const
{
    double mn = p.empty() ? 0.0 : p[0];
    for (double v : p)
        mn = std::min(mn, v);
    return mn;
}

JointPhotonDistribution joint_distribution(const QuantumState& state)
{
    JointPhotonDistribution dist;
    dist.n_max_s = state.space.n_max_s;
    dist.n_max_i = state.space.n_max_i;
    dist.p.resize(state.space.dim);
    if (state.is_ket()) {
        for (int r = 0; r < state.space.dim; ++r)
            dist.p[r] = std::norm(state.data[r]);
    } else {
        for (int r = 0; r < state.space.dim; ++r)
            dist.p[r] = state.rho(r, r).real();
    }
    return dist;
}

}  // namespace spdc
