#pragma once

// Generic n-level Lindblad engine.
//
// Frequencies and rates enter in MHz (ordinary frequency); the assembled
// generator is in rad/us so that evolve() takes times in microseconds.
// Density matrices are vectorized by column stacking, which is Eigen's
// native column-major layout:  vec(A X B) = (B^T kron A) vec(X).

#include "ionmirror/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ionmirror
{

template <typename Real>
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

// Collapse channel: rate (MHz) times the dissipator D[op].
template <typename Real>
struct JumpOperator
{
    Real rate_mhz = 0;
    ComplexMatrix<Real> op;
};

template <typename Real>
struct Liouvillian
{
    // n^2 x n^2 generator acting on column-stacked rho, rad/us.
    ComplexMatrix<Real> matrix;

    Eigen::Index levels() const
    {
        return static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(matrix.rows()))));
    }
};

enum class DegeneratePolicy
{
    Error,      // raise SingularSystem
    MinimumNorm // return the trace-normalized minimal-norm stationary state
};

template <typename Real>
struct SteadyStateOptions
{
    DegeneratePolicy policy = DegeneratePolicy::Error;
    Real residual_tol = Real(1e-9);
    Real positivity_floor = Real(-1e-9);
    // Reciprocal condition estimate below which the constrained system
    // counts as rank deficient.
    Real rcond_floor = Real(1e-13);
};

template <typename Real>
struct EvolveOptions
{
    Real rtol = Real(1e-9);
    Real atol = Real(1e-12);
    long max_steps = 20'000'000;
};

template <typename Real>
struct DensityCheck
{
    Real hermiticity_error = 0;
    Real trace_error = 0;
    Real min_eigenvalue = 0;

    bool ok(Real tol = Real(1e-10), Real floor = Real(-1e-9)) const
    {
        return hermiticity_error <= tol && trace_error <= tol && min_eigenvalue >= floor;
    }
};

template <typename Real>
ComplexVector<Real> vectorize(const ComplexMatrix<Real>& rho)
{
    return rho.reshaped();
}

template <typename Real>
ComplexMatrix<Real> unvectorize(const ComplexVector<Real>& v)
{
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (n * n != v.size())
        throw InvalidArgument("unvectorize: length is not a perfect square");
    return v.reshaped(n, n);
}

// L = 2pi [ -i (I kron H - H^T kron I)
//           + sum_k rate_k (conj(A_k) kron A_k - 1/2 I kron A_k^+A_k - 1/2 (A_k^+A_k)^T kron I) ]
//   = 2pi [ I kron K + conj(K) kron I + sum_k rate_k conj(A_k) kron A_k ],
// with K = -i H - 1/2 sum_k rate_k A_k^+ A_k. Row/column index of rho_ij is i + n j.
template <typename Real>
Liouvillian<Real> build_liouvillian(const ComplexMatrix<Real>& hamiltonian_mhz,
                                    std::span<const JumpOperator<Real>> jumps)
{
    using C = std::complex<Real>;
    const Eigen::Index n = hamiltonian_mhz.rows();
    if (hamiltonian_mhz.cols() != n)
        throw InvalidArgument("build_liouvillian: Hamiltonian must be square");

    ComplexMatrix<Real> k = C(0, -1) * hamiltonian_mhz;
    for (const auto& jump : jumps)
    {
        if (jump.op.rows() != n || jump.op.cols() != n)
            throw InvalidArgument("build_liouvillian: jump operator dimension mismatch");
        if (!(jump.rate_mhz >= 0))
            throw InvalidArgument("build_liouvillian: negative jump rate");
        k -= (Real(0.5) * jump.rate_mhz) * (jump.op.adjoint() * jump.op);
    }

    ComplexMatrix<Real> l = ComplexMatrix<Real>::Zero(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index kk = 0; kk < n; ++kk)
            for (Eigen::Index i = 0; i < n; ++i)
            {
                l(i + n * j, kk + n * j) += k(i, kk);
                l(j + n * i, j + n * kk) += std::conj(k(i, kk));
            }

    struct Entry
    {
        Eigen::Index row;
        Eigen::Index col;
        C value;
    };
    std::vector<Entry> nonzero;
    for (const auto& jump : jumps)
    {
        nonzero.clear();
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index r = 0; r < n; ++r)
                if (jump.op(r, c) != C(0))
                    nonzero.push_back({r, c, jump.op(r, c)});
        for (const auto& a : nonzero)     // A(i, kk)
            for (const auto& b : nonzero) // conj(A(j, ll))
                l(a.row + n * b.row, a.col + n * b.col) += jump.rate_mhz * std::conj(b.value) * a.value;
    }
    l *= Real(2) * Real(3.141592653589793238462643383279L);
    return {std::move(l)};
}

// Largest |tr(L X)| over basis matrices X; zero for a trace-preserving generator.
template <typename Real>
Real trace_costate_error(const Liouvillian<Real>& liouvillian)
{
    const Eigen::Index n = liouvillian.levels();
    Real worst = 0;
    for (Eigen::Index col = 0; col < liouvillian.matrix.cols(); ++col)
    {
        std::complex<Real> s = 0;
        for (Eigen::Index k = 0; k < n; ++k)
            s += liouvillian.matrix(k * (n + 1), col);
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

template <typename Real>
DensityCheck<Real> check_density_matrix(const ComplexMatrix<Real>& rho)
{
    DensityCheck<Real> check;
    check.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    check.trace_error = std::abs(rho.trace() - std::complex<Real>(1, 0));
    const ComplexMatrix<Real> herm = Real(0.5) * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> solver(herm, Eigen::EigenvaluesOnly);
    check.min_eigenvalue = solver.eigenvalues().minCoeff();
    return check;
}

template <typename Real>
Real max_residual(const Liouvillian<Real>& liouvillian, const ComplexMatrix<Real>& rho)
{
    return (liouvillian.matrix * vectorize<Real>(rho)).cwiseAbs().maxCoeff();
}

namespace detail
{

template <typename Real>
ComplexMatrix<Real> finish_state(const Liouvillian<Real>& liouvillian, const ComplexVector<Real>& x,
                                 const SteadyStateOptions<Real>& options)
{
    ComplexMatrix<Real> rho = unvectorize<Real>(x);
    rho = Real(0.5) * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();

    const Real residual = max_residual(liouvillian, rho);
    if (!(residual <= options.residual_tol))
        throw SingularSystem("steady_state: residual " + std::to_string(static_cast<double>(residual)) +
                             " exceeds tolerance");
    const auto check = check_density_matrix(rho);
    if (!(check.min_eigenvalue >= options.positivity_floor))
        throw NonPhysical("steady_state: eigenvalue " +
                          std::to_string(static_cast<double>(check.min_eigenvalue)) +
                          " below positivity floor");
    return rho;
}

} // namespace detail

// Stationary state of L. The equation for rho_00 is replaced by the trace
// condition and the resulting square system is solved by LU.
template <typename Real>
ComplexMatrix<Real> steady_state(const Liouvillian<Real>& liouvillian,
                                 const SteadyStateOptions<Real>& options = {})
{
    using C = std::complex<Real>;
    const Eigen::Index n = liouvillian.levels();
    const Eigen::Index n2 = n * n;
    if (liouvillian.matrix.rows() != n2 || liouvillian.matrix.cols() != n2)
        throw InvalidArgument("steady_state: malformed Liouvillian");

    // Trace row scaled to the generator's magnitude keeps the LU balanced.
    Real scale = liouvillian.matrix.cwiseAbs().maxCoeff();
    if (!(scale > 0))
        scale = 1;

    ComplexMatrix<Real> system = liouvillian.matrix;
    system.row(0).setZero();
    for (Eigen::Index k = 0; k < n; ++k)
        system(0, k * (n + 1)) = C(scale, 0);
    ComplexVector<Real> rhs = ComplexVector<Real>::Zero(n2);
    rhs(0) = C(scale, 0);

    Eigen::PartialPivLU<ComplexMatrix<Real>> lu(system);
    // The rcond estimate is unreliable for exactly zero pivots, so the pivot
    // ratio is checked as well.
    const Real rcond = lu.rcond();
    const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
    const bool regular = pivots.minCoeff() > options.rcond_floor * pivots.maxCoeff() &&
                         rcond >= options.rcond_floor && std::isfinite(static_cast<double>(rcond));
    if (regular)
        return detail::finish_state(liouvillian, ComplexVector<Real>(lu.solve(rhs)), options);

    if (options.policy == DegeneratePolicy::Error)
        throw SingularSystem("steady_state: stationary manifold is degenerate (rcond " +
                             std::to_string(static_cast<double>(rcond)) + ")");

    // Minimal-norm solution of [L; tr] x = [0; 1].
    ComplexMatrix<Real> stacked(n2 + 1, n2);
    stacked.topRows(n2) = liouvillian.matrix;
    stacked.row(n2).setZero();
    for (Eigen::Index k = 0; k < n; ++k)
        stacked(n2, k * (n + 1)) = C(scale, 0);
    ComplexVector<Real> b = ComplexVector<Real>::Zero(n2 + 1);
    b(n2) = C(scale, 0);
    Eigen::CompleteOrthogonalDecomposition<ComplexMatrix<Real>> cod(stacked);
    cod.setThreshold(Real(1e-10));
    return detail::finish_state(liouvillian, ComplexVector<Real>(cod.solve(b)), options);
}

// Integrates d rho/dt = L rho over t_us microseconds with an adaptive
// Dormand-Prince 5(4) pair.
template <typename Real>
ComplexMatrix<Real> evolve(const Liouvillian<Real>& liouvillian, const ComplexMatrix<Real>& rho0, Real t_us,
                           const EvolveOptions<Real>& options = {})
{
    if (!(t_us >= 0))
        throw InvalidArgument("evolve: time must be >= 0");
    if (rho0.rows() * rho0.cols() != liouvillian.matrix.cols())
        throw InvalidArgument("evolve: state dimension does not match Liouvillian");
    if (t_us == 0)
        return rho0;

    // clang-format off
    constexpr Real a21 = Real(1) / 5;
    constexpr Real a31 = Real(3) / 40, a32 = Real(9) / 40;
    constexpr Real a41 = Real(44) / 45, a42 = Real(-56) / 15, a43 = Real(32) / 9;
    constexpr Real a51 = Real(19372) / 6561, a52 = Real(-25360) / 2187, a53 = Real(64448) / 6561, a54 = Real(-212) / 729;
    constexpr Real a61 = Real(9017) / 3168, a62 = Real(-355) / 33, a63 = Real(46732) / 5247, a64 = Real(49) / 176, a65 = Real(-5103) / 18656;
    constexpr Real b1 = Real(35) / 384, b3 = Real(500) / 1113, b4 = Real(125) / 192, b5 = Real(-2187) / 6784, b6 = Real(11) / 84;
    constexpr Real e1 = Real(71) / 57600, e3 = Real(-71) / 16695, e4 = Real(71) / 1920, e5 = Real(-17253) / 339200, e6 = Real(22) / 525, e7 = Real(-1) / 40;
    // clang-format on

    const auto& l = liouvillian.matrix;
    ComplexVector<Real> y = vectorize<Real>(rho0);
    ComplexVector<Real> k1 = l * y;

    const Real norm_l = l.cwiseAbs().rowwise().sum().maxCoeff();
    if (!(norm_l > 0))
        return rho0;

    Real t = 0;
    Real h = std::min(t_us, Real(0.1) / norm_l);
    long steps = 0;
    ComplexVector<Real> k2, k3, k4, k5, k6, k7, y_new, err;
    while (t < t_us)
    {
        if (++steps > options.max_steps)
            throw StepFailure("evolve: step budget exhausted");
        const bool last = t + h >= t_us;
        if (last)
            h = t_us - t;

        k2 = l * (y + h * (a21 * k1));
        k3 = l * (y + h * (a31 * k1 + a32 * k2));
        k4 = l * (y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        k5 = l * (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        k6 = l * (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = l * y_new;
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        Real err_norm = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i)
        {
            const Real sc = options.atol + options.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
            err_norm = std::max(err_norm, std::abs(err(i)) / sc);
        }

        if (err_norm <= 1)
        {
            t = last ? t_us : t + h;
            y.swap(y_new);
            k1.swap(k7);
        }
        const Real factor = err_norm > 0 ? Real(0.9) * std::pow(err_norm, Real(-0.2)) : Real(5);
        h *= std::clamp(factor, Real(0.2), Real(5));
        if (!(h > std::numeric_limits<Real>::epsilon() * 16 * std::max(t, Real(1e-300))) || !std::isfinite(static_cast<double>(h)))
            throw StepFailure("evolve: step size underflow");
    }
    return unvectorize<Real>(y);
}

} // namespace ionmirror
