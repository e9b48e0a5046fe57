#ifndef DQD_LINALG_HPP
#define DQD_LINALG_HPP

// Dense complex linear algebra for the small (N <= 64) non-Hermitian matrices
// of the double-dot problem. All routines are templated on the real scalar so
// that branch-point residuals can be evaluated in extended precision.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <vector>

#include "dqd/errors.hpp"

namespace dqd::linalg {

template <std::floating_point T>
using Complex = std::complex<T>;

template <std::floating_point T>
using CMatrix = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;

template <std::floating_point T>
using CVector = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, 1>;

template <std::floating_point T>
using RMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <std::floating_point T>
using RVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Transpose (non-conjugating) inner product sum_j a_j b_j.
template <class A, class B>
auto bilinear_dot(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    return (a.array() * b.array()).sum();
}

template <std::floating_point T>
struct Schur {
    CMatrix<T> upper;    // upper triangular factor
    CMatrix<T> unitary;  // A = unitary * upper * unitary^H
};

namespace detail {

template <std::floating_point T>
struct Givens {
    T c{1};
    Complex<T> s{0};
};

// Rotation G = [c s; -conj(s) c] with G * (a, b)^T = (r, 0)^T.
template <std::floating_point T>
Givens<T> make_givens(Complex<T> a, Complex<T> b) {
    const T abs_b = std::abs(b);
    if (abs_b == T(0)) return {T(1), Complex<T>(0)};
    const T abs_a = std::abs(a);
    if (abs_a == T(0)) return {T(0), std::conj(b) / abs_b};
    const T nrm = std::hypot(abs_a, abs_b);
    return {abs_a / nrm, (a / abs_a) * std::conj(b) / nrm};
}

template <std::floating_point T>
Complex<T> wilkinson_shift(Complex<T> a, Complex<T> b, Complex<T> c, Complex<T> d) {
    const Complex<T> half_diff = (a - d) / T(2);
    const Complex<T> disc = std::sqrt(half_diff * half_diff + b * c);
    const Complex<T> mean = (a + d) / T(2);
    const Complex<T> mu1 = mean + disc;
    const Complex<T> mu2 = mean - disc;
    return std::abs(mu1 - d) < std::abs(mu2 - d) ? mu1 : mu2;
}

}  // namespace detail

/// Householder reduction to upper Hessenberg form, H = Q^H A Q.
template <std::floating_point T>
void reduce_to_hessenberg(CMatrix<T>& h, CMatrix<T>& q) {
    const Eigen::Index n = h.rows();
    q = CMatrix<T>::Identity(n, n);
    for (Eigen::Index j = 0; j + 2 < n; ++j) {
        const Eigen::Index len = n - j - 1;
        CVector<T> x = h.block(j + 1, j, len, 1);
        const T tail = x.tail(len - 1).norm();
        if (tail == T(0)) continue;
        const T xnorm = x.norm();
        const Complex<T> phase = std::abs(x(0)) == T(0) ? Complex<T>(1) : x(0) / std::abs(x(0));
        CVector<T> v = x;
        v(0) += phase * xnorm;
        v /= v.norm();

        // H <- P H P with P = I - 2 v v^H acting on rows/cols j+1..n-1
        auto rows = h.block(j + 1, 0, len, n);
        const Eigen::Matrix<Complex<T>, 1, Eigen::Dynamic> vr = v.adjoint() * rows;
        rows -= T(2) * v * vr;
        auto cols = h.block(0, j + 1, n, len);
        const CVector<T> cv = cols * v;
        cols -= T(2) * cv * v.adjoint();
        auto qcols = q.block(0, j + 1, n, len);
        const CVector<T> qv = qcols * v;
        qcols -= T(2) * qv * v.adjoint();
        for (Eigen::Index i = j + 2; i < n; ++i) h(i, j) = Complex<T>(0);
    }
}

/// Complex Schur decomposition by single-shift QR iteration on the Hessenberg form.
template <std::floating_point T>
Schur<T> complex_schur(const CMatrix<T>& a) {
    const Eigen::Index n = a.rows();
    Schur<T> out{a, CMatrix<T>()};
    CMatrix<T>& h = out.upper;
    CMatrix<T>& q = out.unitary;
    reduce_to_hessenberg(h, q);
    if (n < 2) return out;

    const T eps = std::numeric_limits<T>::epsilon();
    const T scale = std::max(h.cwiseAbs().maxCoeff(), std::numeric_limits<T>::min());
    const int max_total = 60 * static_cast<int>(n);

    Eigen::Index hi = n - 1;
    int iter = 0;
    int total = 0;
    while (hi > 0) {
        Eigen::Index lo = hi;
        while (lo > 0) {
            T s = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
            if (s == T(0)) s = scale;
            if (std::abs(h(lo, lo - 1)) <= eps * s) {
                h(lo, lo - 1) = Complex<T>(0);
                break;
            }
            --lo;
        }
        if (lo == hi) {
            --hi;
            iter = 0;
            continue;
        }
        ++iter;
        if (++total > max_total) {
            throw Error(ErrorCode::NumericalFailure, "QR iteration did not converge");
        }

        Complex<T> shift;
        if (iter % 10 == 0) {
            // exceptional shift to break cycles
            shift = h(hi, hi) + Complex<T>(std::abs(h(hi, hi - 1).real()) + std::abs(h(hi - 1, std::max<Eigen::Index>(hi - 2, 0)).real()));
        } else {
            shift = detail::wilkinson_shift(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
        }

        for (Eigen::Index j = lo; j <= hi; ++j) h(j, j) -= shift;
        std::vector<detail::Givens<T>> rot(static_cast<std::size_t>(hi - lo));
        for (Eigen::Index j = lo; j < hi; ++j) {
            auto g = detail::make_givens(h(j, j), h(j + 1, j));
            rot[static_cast<std::size_t>(j - lo)] = g;
            for (Eigen::Index col = j; col < n; ++col) {
                const Complex<T> x = h(j, col);
                const Complex<T> y = h(j + 1, col);
                h(j, col) = g.c * x + g.s * y;
                h(j + 1, col) = -std::conj(g.s) * x + g.c * y;
            }
            h(j + 1, j) = Complex<T>(0);
        }
        for (Eigen::Index j = lo; j < hi; ++j) {
            const auto& g = rot[static_cast<std::size_t>(j - lo)];
            const Eigen::Index last = std::min(j + 1, hi);
            for (Eigen::Index row = 0; row <= last; ++row) {
                const Complex<T> x = h(row, j);
                const Complex<T> y = h(row, j + 1);
                h(row, j) = x * g.c + y * std::conj(g.s);
                h(row, j + 1) = -x * g.s + y * g.c;
            }
            for (Eigen::Index row = 0; row < n; ++row) {
                const Complex<T> x = q(row, j);
                const Complex<T> y = q(row, j + 1);
                q(row, j) = x * g.c + y * std::conj(g.s);
                q(row, j + 1) = -x * g.s + y * g.c;
            }
        }
        for (Eigen::Index j = lo; j <= hi; ++j) h(j, j) += shift;
    }
    // clear rounding residue below the diagonal
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) h(i, j) = Complex<T>(0);
    return out;
}

template <std::floating_point T>
struct EigenPairs {
    CVector<T> values;
    CMatrix<T> vectors;  // unit Euclidean norm columns
};

/// Full eigensystem of a general complex matrix. Eigenvectors are obtained by
/// back substitution on the Schur factor; near-coalescing eigenvalues give
/// nearly parallel vectors rather than a failure.
template <std::floating_point T>
EigenPairs<T> eigen_pairs(const CMatrix<T>& a) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw Error(ErrorCode::NumericalFailure, "matrix is not square");
    const Schur<T> schur = complex_schur(a);
    const CMatrix<T>& t = schur.upper;

    const T eps = std::numeric_limits<T>::epsilon();
    const T smin = std::max(eps * t.cwiseAbs().maxCoeff(), std::numeric_limits<T>::min());

    EigenPairs<T> out{t.diagonal(), CMatrix<T>(n, n)};
    CVector<T> y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        y.setZero();
        y(k) = Complex<T>(1);
        const Complex<T> lambda = t(k, k);
        for (Eigen::Index i = k - 1; i >= 0; --i) {
            Complex<T> s(0);
            for (Eigen::Index j = i + 1; j <= k; ++j) s += t(i, j) * y(j);
            Complex<T> denom = t(i, i) - lambda;
            if (std::abs(denom) < smin) denom = Complex<T>(smin);
            y(i) = -s / denom;
        }
        CVector<T> v = schur.unitary * y;
        out.vectors.col(k) = v / v.norm();
    }
    return out;
}

}  // namespace dqd::linalg

#endif
