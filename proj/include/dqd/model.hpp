#ifndef DQD_MODEL_HPP
#define DQD_MODEL_HPP

// Closed double-dot Hamiltonian, single-channel tight-binding leads and the
// energy-dependent effective Hamiltonian of the open system.
//
// Site ordering: left-dot levels, wire mode, right-dot levels.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dqd/errors.hpp"
#include "dqd/linalg.hpp"

namespace dqd {

using linalg::CMatrix;
using linalg::CVector;
using linalg::RMatrix;
using linalg::RVector;

/// Energy of the wire mode as an affine function of the wire length.
template <std::floating_point T>
struct BasicWireDispersion {
    T offset{};
    T slope{};

    T operator()(T length) const { return offset + slope * length; }
    bool operator==(const BasicWireDispersion&) const = default;
};

template <std::floating_point T>
struct BasicDoubleDotSpec {
    std::vector<T> left_levels;
    std::vector<T> right_levels;
    BasicWireDispersion<T> wire;
    T length{};
    T u{};  // dot-wire hopping
    T v{};  // left lead coupling
    T w{};  // right lead coupling

    std::size_t dimension() const { return left_levels.size() + 1 + right_levels.size(); }
    std::size_t wire_index() const { return left_levels.size(); }
    T wire_energy() const { return wire(length); }

    bool symmetric_mode() const { return v == w && left_levels == right_levels; }

    /// One level per dot, identical levels, equal lead couplings.
    bool is_symmetric_three_state() const { return dimension() == 3 && symmetric_mode(); }

    void validate() const {
        if (left_levels.empty() || right_levels.empty())
            throw Error(ErrorCode::InvalidSpec, "each dot needs at least one level");
        auto finite = [](T x) { return std::isfinite(x); };
        for (T e : left_levels)
            if (!finite(e)) throw Error(ErrorCode::InvalidSpec, "non-finite left level");
        for (T e : right_levels)
            if (!finite(e)) throw Error(ErrorCode::InvalidSpec, "non-finite right level");
        if (!finite(wire.offset) || !finite(wire.slope) || !finite(length))
            throw Error(ErrorCode::InvalidSpec, "non-finite wire parameters");
        if (length < T(0)) throw Error(ErrorCode::InvalidSpec, "wire length must be non-negative");
        for (T c : {u, v, w}) {
            if (!finite(c) || c < T(0))
                throw Error(ErrorCode::InvalidSpec, "couplings u, v, w must be finite and non-negative");
        }
    }

    template <std::floating_point U>
    BasicDoubleDotSpec<U> cast() const {
        BasicDoubleDotSpec<U> out;
        out.left_levels.assign(left_levels.begin(), left_levels.end());
        out.right_levels.assign(right_levels.begin(), right_levels.end());
        out.wire = {static_cast<U>(wire.offset), static_cast<U>(wire.slope)};
        out.length = static_cast<U>(length);
        out.u = static_cast<U>(u);
        out.v = static_cast<U>(v);
        out.w = static_cast<U>(w);
        return out;
    }

    bool operator==(const BasicDoubleDotSpec&) const = default;
};

using WireDispersion = BasicWireDispersion<double>;
using DoubleDotSpec = BasicDoubleDotSpec<double>;

/// FNV-1a over the bit patterns of every parameter (as doubles).
template <std::floating_point T>
std::uint64_t spec_hash(const BasicDoubleDotSpec<T>& spec) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](double x) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &x, sizeof x);
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    auto mix_vec = [&](const std::vector<T>& xs) {
        mix(static_cast<double>(xs.size()));
        for (T x : xs) mix(static_cast<double>(x));
    };
    mix_vec(spec.left_levels);
    mix_vec(spec.right_levels);
    for (T x : {spec.wire.offset, spec.wire.slope, spec.length, spec.u, spec.v, spec.w}) mix(static_cast<double>(x));
    return h;
}

/// Propagating lead mode at energy E = -2 cos k, k in (0, pi).
template <std::floating_point T = double>
struct Channel {
    T energy{};
    T wavevector{};
    std::complex<T> phase{};  // e^{ik}, Im > 0

    T sin_k() const { return phase.imag(); }
};

template <std::floating_point T = double>
Channel<T> channel_from_energy(T energy) {
    if (!(std::abs(energy) < T(2)))
        throw Error(ErrorCode::EnergyOutOfBand, "energy " + std::to_string(static_cast<double>(energy)) +
                                                    " outside the open band (-2, 2)");
    const T k = std::acos(-energy / T(2));
    // cos k is exact by construction; sin k from the band relation avoids acos round-off near the edges
    const T sin_k = std::sqrt((T(1) - energy / T(2)) * (T(1) + energy / T(2)));
    return {energy, k, std::complex<T>(-energy / T(2), sin_k)};
}

template <std::floating_point T>
RMatrix<T> build_closed_hamiltonian(const BasicDoubleDotSpec<T>& spec) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(spec.dimension());
    const auto m = static_cast<Eigen::Index>(spec.wire_index());
    RMatrix<T> h = RMatrix<T>::Zero(n, n);
    const T u = spec.u;
    for (Eigen::Index i = 0; i < m; ++i) {
        h(i, i) = spec.left_levels[static_cast<std::size_t>(i)];
        h(i, m) = h(m, i) = u;
    }
    h(m, m) = spec.wire_energy();
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(spec.right_levels.size()); ++j) {
        const Eigen::Index s = m + 1 + j;
        h(s, s) = spec.right_levels[static_cast<std::size_t>(j)];
        h(s, m) = h(m, s) = u;
    }
    return h;
}

/// Site-basis contact vectors: 1 on every level of the adjacent dot.
template <std::floating_point T>
std::pair<RVector<T>, RVector<T>> contact_sites(const BasicDoubleDotSpec<T>& spec) {
    const auto n = static_cast<Eigen::Index>(spec.dimension());
    const auto m = static_cast<Eigen::Index>(spec.wire_index());
    RVector<T> left = RVector<T>::Zero(n);
    RVector<T> right = RVector<T>::Zero(n);
    left.head(m).setOnes();
    right.tail(static_cast<Eigen::Index>(spec.right_levels.size())).setOnes();
    return {left, right};
}

/// Closed forms available for one level per dot with identical levels.
template <std::floating_point T = double>
struct ThreeStateAux {
    T eta{};
    T delta_eps{};  // (eps_1 - eps(L)) / 2
};

template <std::floating_point T = double>
struct ClosedSpectrum {
    RVector<T> eigenvalues;   // ascending
    RMatrix<T> eigenvectors;  // columns psi_m(j)
    RVector<T> left_contact;  // sum of psi_m over left-dot sites
    RVector<T> right_contact;
    std::optional<ThreeStateAux<T>> aux_3state;
};

namespace detail {

// Wire component positive; if it vanishes, the first significant component positive.
template <std::floating_point T>
void fix_real_sign(RMatrix<T>& vecs, Eigen::Index wire) {
    for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
        const T tol = T(1e-10) * vecs.col(c).cwiseAbs().maxCoeff();
        Eigen::Index pivot = wire;
        if (std::abs(vecs(wire, c)) <= tol) {
            pivot = 0;
            while (pivot < vecs.rows() && std::abs(vecs(pivot, c)) <= tol) ++pivot;
        }
        if (pivot < vecs.rows() && vecs(pivot, c) < T(0)) vecs.col(c) *= T(-1);
    }
}

}  // namespace detail

template <std::floating_point T>
ClosedSpectrum<T> closed_spectrum(const BasicDoubleDotSpec<T>& spec) {
    const RMatrix<T> h = build_closed_hamiltonian(spec);
    Eigen::SelfAdjointEigenSolver<RMatrix<T>> solver(h);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "closed-system eigensolve failed");

    ClosedSpectrum<T> out;
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
    detail::fix_real_sign(out.eigenvectors, static_cast<Eigen::Index>(spec.wire_index()));

    const auto [cl, cr] = contact_sites(spec);
    out.left_contact = out.eigenvectors.transpose() * cl;
    out.right_contact = out.eigenvectors.transpose() * cr;

    if (spec.dimension() == 3 && spec.left_levels == spec.right_levels) {
        const T delta = (spec.left_levels[0] - spec.wire_energy()) / T(2);
        const T u = spec.u;
        out.aux_3state = ThreeStateAux<T>{std::sqrt(delta * delta + T(2) * u * u), delta};
    }
    return out;
}

/// Lead coupling matrix elements V_m(E, L) and V_m(E, R) in the closed eigenbasis.
template <std::floating_point T = double>
struct CouplingVectors {
    RVector<T> left;
    RVector<T> right;
};

template <std::floating_point T = double>
T lead_amplitude(const Channel<T>& ch) {
    return std::sqrt(ch.sin_k() / (T(2) * std::numbers::pi_v<T>));
}

template <std::floating_point T = double>
CouplingVectors<T> coupling_vectors(const BasicDoubleDotSpec<T>& spec, const ClosedSpectrum<T>& closed, const Channel<T>& ch) {
    const T amp = lead_amplitude(ch);
    return {spec.v * amp * closed.left_contact, spec.w * amp * closed.right_contact};
}

template <std::floating_point T = double>
CouplingVectors<T> coupling_vectors(const BasicDoubleDotSpec<T>& spec, const Channel<T>& ch) {
    return coupling_vectors(spec, closed_spectrum(spec), ch);
}

template <std::floating_point T = double>
struct EffectiveHamiltonian {
    CMatrix<T> matrix;  // complex symmetric, closed eigenbasis
    Channel<T> channel;
    std::uint64_t spec_hash = 0;
};

/// H_eff(E)_{mn} = E_m delta_mn - (v^2 a_m a_n + w^2 b_m b_n) e^{ik}, with a, b the
/// left/right contact amplitudes of the closed eigenstates.
template <std::floating_point T = double>
EffectiveHamiltonian<T> build_effective_hamiltonian(const BasicDoubleDotSpec<T>& spec, const ClosedSpectrum<T>& closed,
                                                    const Channel<T>& ch) {
    const T v2 = spec.v * spec.v;
    const T w2 = spec.w * spec.w;
    const RMatrix<T> coupling =
        v2 * closed.left_contact * closed.left_contact.transpose() + w2 * closed.right_contact * closed.right_contact.transpose();
    CMatrix<T> m = -ch.phase * coupling.template cast<std::complex<T>>();
    m.diagonal() += closed.eigenvalues.template cast<std::complex<T>>();
    // enforce exact symmetry against rounding in the outer products
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) m(j, i) = m(i, j);
    return {std::move(m), ch, spec_hash(spec)};
}

template <std::floating_point T = double>
EffectiveHamiltonian<T> build_effective_hamiltonian(const BasicDoubleDotSpec<T>& spec, const Channel<T>& ch) {
    return build_effective_hamiltonian(spec, closed_spectrum(spec), ch);
}

/// The same operator in the site basis: H_B plus the lead self-energy on the contact sites.
template <std::floating_point T = double>
CMatrix<T> effective_hamiltonian_site_basis(const BasicDoubleDotSpec<T>& spec, const Channel<T>& ch) {
    const auto [cl, cr] = contact_sites(spec);
    const T v2 = spec.v * spec.v;
    const T w2 = spec.w * spec.w;
    const RMatrix<T> coupling = v2 * cl * cl.transpose() + w2 * cr * cr.transpose();
    CMatrix<T> m = build_closed_hamiltonian(spec).template cast<std::complex<T>>();
    m -= ch.phase * coupling.template cast<std::complex<T>>();
    return m;
}

}  // namespace dqd

#endif
