#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace spdc {

using cplx = std::complex<double>;

enum class Mode { Signal, Idler };

// Truncated two-mode Fock basis |n_s, n_i>, n_s <= n_max_s, n_i <= n_max_i,
// ordered lexicographically by (n_s, n_i) so index = n_s*(n_max_i+1) + n_i.
struct TwoModeSpace {
    int n_max_s = 0;
    int n_max_i = 0;
    int dim = 0;
    int stride = 0;  // n_max_i + 1

    int index(int ns, int ni) const { return ns * stride + ni; }
    int ns_of(int idx) const { return idx / stride; }
    int ni_of(int idx) const { return idx % stride; }
    std::pair<int, int> levels(int idx) const { return {idx / stride, idx % stride}; }

    bool operator==(const TwoModeSpace& o) const
    {
        return n_max_s == o.n_max_s && n_max_i == o.n_max_i;
    }
};

TwoModeSpace build_space(int n_max_s, int n_max_i);

// Dense complex matrix on a TwoModeSpace, row-major.
struct ComplexOperator {
    TwoModeSpace space;
    std::vector<cplx> m;  // dim*dim

    ComplexOperator() = default;
    explicit ComplexOperator(const TwoModeSpace& sp) : space(sp), m(std::size_t(sp.dim) * sp.dim) {}

    cplx& at(int r, int c) { return m[std::size_t(r) * space.dim + c]; }
    const cplx& at(int r, int c) const { return m[std::size_t(r) * space.dim + c]; }

    ComplexOperator adjoint() const;
    double max_abs() const;
    double hermiticity_defect() const;  // max |m - m^dagger|
    bool is_hermitian(double tol = 1e-12) const;
    cplx trace() const;

    ComplexOperator& operator+=(const ComplexOperator& o);
    ComplexOperator& operator-=(const ComplexOperator& o);
    ComplexOperator& operator*=(cplx a);

    friend ComplexOperator operator+(ComplexOperator a, const ComplexOperator& b) { return a += b; }
    friend ComplexOperator operator-(ComplexOperator a, const ComplexOperator& b) { return a -= b; }
    friend ComplexOperator operator*(cplx a, ComplexOperator o) { return o *= a; }
    friend ComplexOperator operator*(const ComplexOperator& a, const ComplexOperator& b);
};

ComplexOperator identity_op(const TwoModeSpace& space);
ComplexOperator annihilation(const TwoModeSpace& space, Mode mode);
ComplexOperator creation(const TwoModeSpace& space, Mode mode);
ComplexOperator number_op(const TwoModeSpace& space, Mode mode);

// Either a normalized ket or a density matrix on a TwoModeSpace.
struct QuantumState {
    enum class Kind { Ket, DensityMatrix };

    Kind kind = Kind::Ket;
    TwoModeSpace space;
    std::vector<cplx> data;  // dim (ket) or dim*dim (density matrix)

    static QuantumState ket(const TwoModeSpace& space, std::vector<cplx> amplitudes);
    static QuantumState density(const TwoModeSpace& space, std::vector<cplx> matrix);

    bool is_ket() const { return kind == Kind::Ket; }
    double norm() const;                 // ket norm
    cplx trace() const;                  // density-matrix trace
    double hermiticity_defect() const;   // density matrices
    QuantumState to_density() const;

    cplx& rho(int r, int c) { return data[std::size_t(r) * space.dim + c]; }
    const cplx& rho(int r, int c) const { return data[std::size_t(r) * space.dim + c]; }
};

QuantumState fock_ket(const TwoModeSpace& space, int ns, int ni);
QuantumState vacuum_ket(const TwoModeSpace& space);

cplx expectation(const ComplexOperator& op, const QuantumState& state);

// P_{n_s, n_i}, same memory layout as the basis index.
struct JointPhotonDistribution {
    int n_max_s = 0;
    int n_max_i = 0;
    std::vector<double> p;  // (n_max_s+1)*(n_max_i+1), row-major in n_s

    double& at(int ns, int ni) { return p[std::size_t(ns) * (n_max_i + 1) + ni]; }
    double at(int ns, int ni) const { return p[std::size_t(ns) * (n_max_i + 1) + ni]; }
    double sum() const;
    double min() const;
};

JointPhotonDistribution joint_distribution(const QuantumState& state);

}  // namespace spdc
