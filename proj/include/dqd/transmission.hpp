#ifndef DQD_TRANSMISSION_HPP
#define DQD_TRANSMISSION_HPP

// Single-channel transmission through the double dot, evaluated by the
// biorthogonal pole expansion and, independently, by a direct resolvent solve.
//
// With lead amplitudes V = v sqrt(sin k / 2 pi) psi(contact) and self-energy
// -v^2 e^{ik}, the decay matrix is Gamma = 4 pi V V^T. The unitary S matrix is
// therefore S = 1 - 4 pi i W^T (E - H_eff)^{-1} W with W = [V_L, V_R].

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "dqd/errors.hpp"
#include "dqd/model.hpp"
#include "dqd/spectral.hpp"

namespace dqd {

enum class TransmissionMethod { Spectral, Resolvent };

struct TransmissionPoint {
    double energy = 0.0;
    std::complex<double> amplitude;
    double probability = 0.0;
    TransmissionMethod method = TransmissionMethod::Resolvent;
    double residual = 0.0;  // relative residual of the linear solve (resolvent method)
};

struct ScatteringMatrix {
    // [[r, t'], [t, r']]
    Eigen::Matrix2cd entries;
    double energy = 0.0;

    std::complex<double> r() const { return entries(0, 0); }
    std::complex<double> t_prime() const { return entries(0, 1); }
    std::complex<double> t() const { return entries(1, 0); }
    std::complex<double> r_prime() const { return entries(1, 1); }

    double unitarity_defect() const {
        return (entries * entries.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
    }
};

inline constexpr double kScatteringPrefactor = 4.0 * std::numbers::pi;

/// Everything needed to evaluate transport at one energy.
struct OpenSystem {
    Channel<double> channel;
    ClosedSpectrum<double> closed;
    CouplingVectors<double> coupling;
    EffectiveHamiltonian<double> heff;

    OpenSystem(const DoubleDotSpec& spec, double energy)
        : channel(channel_from_energy(energy)),
          closed(closed_spectrum<double>(spec)),
          coupling(coupling_vectors(spec, closed, channel)),
          heff(build_effective_hamiltonian(spec, closed, channel)) {}
};

inline TransmissionPoint transmission_spectral(const OpenSystem& sys, const EigenSet<double>& eig) {
    if (eig.any_defective())
        throw Error(ErrorCode::DefectiveDecomposition, "coalesced eigenvectors; use the resolvent method");
    const CVector<double> vl = sys.coupling.left.cast<std::complex<double>>();
    const CVector<double> vr = sys.coupling.right.cast<std::complex<double>>();
    const double e = sys.channel.energy;
    std::complex<double> sum(0.0);
    for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
        const auto vec = eig.right_vectors.col(k);
        const std::complex<double> left = linalg::bilinear_dot(vl, vec);
        const std::complex<double> right = linalg::bilinear_dot(vec, vr);
        sum += left * right / (e - eig.eigenvalues(k));
    }
    const std::complex<double> t = -std::complex<double>(0.0, kScatteringPrefactor) * sum;
    return {e, t, std::norm(t), TransmissionMethod::Spectral, 0.0};
}

inline TransmissionPoint transmission_spectral(const DoubleDotSpec& spec, double energy) {
    const OpenSystem sys(spec, energy);
    return transmission_spectral(sys, eigendecompose(sys.heff));
}

namespace detail {

/// Solves (E - H_eff) X = B by partial-pivot LU and checks the residual.
inline CMatrix<double> resolvent_solve(const OpenSystem& sys, const CMatrix<double>& rhs, double* residual) {
    const Eigen::Index n = sys.heff.matrix.rows();
    const CMatrix<double> a = sys.channel.energy * CMatrix<double>::Identity(n, n) - sys.heff.matrix;
    const Eigen::PartialPivLU<CMatrix<double>> lu(a);
    const CMatrix<double> x = lu.solve(rhs);
    const double scale = rhs.norm();
    const double res = scale > 0.0 ? (a * x - rhs).norm() / scale : 0.0;
    if (!x.allFinite() || !(res < 1e-8))
        throw Error(ErrorCode::SingularResolvent, "E - H_eff is numerically singular");
    if (residual) *residual = res;
    return x;
}

}  // namespace detail

inline TransmissionPoint transmission_resolvent(const OpenSystem& sys) {
    const CVector<double> vl = sys.coupling.left.cast<std::complex<double>>();
    const CVector<double> vr = sys.coupling.right.cast<std::complex<double>>();
    TransmissionPoint out;
    out.energy = sys.channel.energy;
    out.method = TransmissionMethod::Resolvent;
    if (vl.squaredNorm() == 0.0 || vr.squaredNorm() == 0.0) return out;
    const CVector<double> x = detail::resolvent_solve(sys, vr, &out.residual);
    out.amplitude = -std::complex<double>(0.0, kScatteringPrefactor) * linalg::bilinear_dot(vl, x);
    out.probability = std::norm(out.amplitude);
    return out;
}

inline TransmissionPoint transmission_resolvent(const DoubleDotSpec& spec, double energy) {
    return transmission_resolvent(OpenSystem(spec, energy));
}

/// Relative distance to the nearest pole below which the pole expansion loses digits.
inline constexpr double kPoleProximity = 1e-2;

/// Uses the pole expansion away from coalescences and narrow poles, the resolvent otherwise.
inline TransmissionPoint transmission(const DoubleDotSpec& spec, double energy) {
    const OpenSystem sys(spec, energy);
    const auto eig = eigendecompose(sys.heff);
    if (eig.any_defective() || eig.min_rigidity() < kRigidityTrust) return transmission_resolvent(sys);
    double scale = 1.0, closest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
        scale = std::max(scale, std::abs(eig.eigenvalues(k)));
        closest = std::min(closest, std::abs(energy - eig.eigenvalues(k)));
    }
    if (closest < kPoleProximity * scale) return transmission_resolvent(sys);
    return transmission_spectral(sys, eig);
}

inline ScatteringMatrix scattering_matrix(const DoubleDotSpec& spec, double energy) {
    const OpenSystem sys(spec, energy);
    const Eigen::Index n = sys.heff.matrix.rows();
    CMatrix<double> w(n, 2);
    w.col(0) = sys.coupling.left.cast<std::complex<double>>();
    w.col(1) = sys.coupling.right.cast<std::complex<double>>();
    ScatteringMatrix out;
    out.energy = energy;
    out.entries = Eigen::Matrix2cd::Identity();
    if (w.squaredNorm() == 0.0) return out;
    const CMatrix<double> g_w = detail::resolvent_solve(sys, w, nullptr);
    out.entries -= std::complex<double>(0.0, kScatteringPrefactor) * (w.transpose() * g_w);
    return out;
}

struct TransmissionZeros {
    std::vector<double> energies;
    std::vector<int> multiplicities;
};

namespace detail {

/// Roots of sum_i 1/(E - eps_i) = 0, i.e. of sum_i prod_{j != i} (E - eps_j).
/// A level of multiplicity m is itself a root of multiplicity m - 1; between
/// consecutive distinct levels the pole sum falls from +inf to -inf exactly once.
inline void pole_sum_roots(std::vector<double> levels, std::vector<double>& roots, std::vector<int>& mult) {
    std::sort(levels.begin(), levels.end());
    std::vector<double> distinct;
    std::vector<int> count;
    for (double e : levels) {
        if (!distinct.empty() && e == distinct.back())
            ++count.back();
        else {
            distinct.push_back(e);
            count.push_back(1);
        }
    }
    auto pole_sum = [&](double e) {
        double s = 0.0;
        for (std::size_t i = 0; i < distinct.size(); ++i) s += count[i] / (e - distinct[i]);
        return s;
    };
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        if (count[i] > 1) {
            roots.push_back(distinct[i]);
            mult.push_back(count[i] - 1);
        }
        if (i + 1 == distinct.size()) break;
        double a = distinct[i], b = distinct[i + 1];
        for (int it = 0; it < 2000; ++it) {
            const double m = 0.5 * (a + b);
            if (m <= a || m >= b) break;
            if (pole_sum(m) > 0.0)
                a = m;
            else
                b = m;
        }
        roots.push_back(0.5 * (a + b));
        mult.push_back(1);
    }
}

}  // namespace detail

/// Energies where the transmission vanishes for every lead coupling: the roots
/// of the pole sum of each dot's level spectrum.
inline TransmissionZeros predict_transmission_zeros(const DoubleDotSpec& spec) {
    spec.validate();
    if (spec.left_levels.size() < 2 && spec.right_levels.size() < 2)
        throw Error(ErrorCode::NoZeros, "single-level dots have no transmission zeros");
    std::vector<double> roots;
    std::vector<int> mult;
    detail::pole_sum_roots(spec.left_levels, roots, mult);
    if (spec.right_levels != spec.left_levels) detail::pole_sum_roots(spec.right_levels, roots, mult);

    std::vector<std::size_t> order(roots.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return roots[a] < roots[b]; });
    TransmissionZeros out;
    for (std::size_t i : order) {
        if (!out.energies.empty() && out.energies.back() == roots[i]) {
            out.multiplicities.back() += mult[i];
            continue;
        }
        out.energies.push_back(roots[i]);
        out.multiplicities.push_back(mult[i]);
    }
    return out;
}

}  // namespace dqd

#endif
