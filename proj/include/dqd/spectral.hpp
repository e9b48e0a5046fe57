#ifndef DQD_SPECTRAL_HPP
#define DQD_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "dqd/errors.hpp"
#include "dqd/linalg.hpp"
#include "dqd/model.hpp"

namespace dqd {

/// A pair whose biorthogonal self-overlap |sum v^2| falls below this fraction of
/// sum |v|^2 is treated as coalesced and left unnormalized.
inline constexpr double kDefectiveThreshold = 1e-10;

/// Overlap below which a trajectory step is reported as ambiguous.
inline constexpr double kAmbiguousOverlap = 0.5;

/// Phase rigidity below which eigenvector overlaps are not trusted for labelling.
inline constexpr double kRigidityTrust = 0.1;

inline constexpr std::size_t kMaxDenseDimension = 64;

enum class LabelOrder { AscendingReal, Continuation };

template <std::floating_point T = double>
struct EigenSet {
    CVector<T> eigenvalues;
    CMatrix<T> right_vectors;   // biorthonormal unless flagged defective
    CVector<T> norms;           // (k|k) of the unit-norm vector, before normalization
    std::vector<T> phase_rigidities;
    std::vector<bool> defective_flags;
    LabelOrder label_order = LabelOrder::AscendingReal;

    std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }

    bool any_defective() const { return std::find(defective_flags.begin(), defective_flags.end(), true) != defective_flags.end(); }

    T min_rigidity() const {
        return phase_rigidities.empty() ? T(1) : *std::min_element(phase_rigidities.begin(), phase_rigidities.end());
    }

    /// Reorders so that new position k holds old position order[k].
    EigenSet permuted(const std::vector<std::size_t>& order, LabelOrder tag) const {
        EigenSet out;
        const auto n = static_cast<Eigen::Index>(order.size());
        out.eigenvalues.resize(n);
        out.right_vectors.resize(right_vectors.rows(), n);
        out.norms.resize(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto src = static_cast<Eigen::Index>(order[static_cast<std::size_t>(k)]);
            out.eigenvalues(k) = eigenvalues(src);
            out.right_vectors.col(k) = right_vectors.col(src);
            out.norms(k) = norms(src);
            out.phase_rigidities.push_back(phase_rigidities[static_cast<std::size_t>(src)]);
            out.defective_flags.push_back(defective_flags[static_cast<std::size_t>(src)]);
        }
        out.label_order = tag;
        return out;
    }
};

/// r = |sum v_j^2| / sum |v_j|^2; 1 for real vectors, 0 at a coalescence.
template <class Derived>
auto phase_rigidity(const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    using Real = typename Eigen::NumTraits<Scalar>::Real;
    const Real denom = v.squaredNorm();
    if (denom == Real(0)) throw Error(ErrorCode::ZeroVector, "phase rigidity of a zero vector");
    return std::abs(linalg::bilinear_dot(v, v)) / denom;
}

template <std::floating_point T = double>
EigenSet<T> eigendecompose(const CMatrix<T>& h) {
    if (static_cast<std::size_t>(h.rows()) > kMaxDenseDimension)
        throw Error(ErrorCode::NotApplicable, "dense eigensolver limited to N <= 64");
    const auto pairs = linalg::eigen_pairs(h);
    const Eigen::Index n = h.rows();

    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto za = pairs.values(static_cast<Eigen::Index>(a));
        const auto zb = pairs.values(static_cast<Eigen::Index>(b));
        if (za.real() != zb.real()) return za.real() < zb.real();
        return za.imag() < zb.imag();
    });

    EigenSet<T> out;
    out.eigenvalues.resize(n);
    out.right_vectors.resize(n, n);
    out.norms.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto src = static_cast<Eigen::Index>(order[static_cast<std::size_t>(k)]);
        out.eigenvalues(k) = pairs.values(src);
        CVector<T> vec = pairs.vectors.col(src);
        const std::complex<T> self = linalg::bilinear_dot(vec, vec);
        const T rigidity = std::abs(self) / vec.squaredNorm();
        const bool defective = rigidity < T(kDefectiveThreshold);
        if (!defective) vec /= std::sqrt(self);

        Eigen::Index big = 0;
        vec.cwiseAbs().maxCoeff(&big);
        if (vec(big).real() < T(0)) vec = -vec;

        out.right_vectors.col(k) = vec;
        out.norms(k) = self;
        out.phase_rigidities.push_back(rigidity);
        out.defective_flags.push_back(defective);
    }
    return out;
}

template <std::floating_point T = double>
EigenSet<T> eigendecompose(const EffectiveHamiltonian<T>& h) {
    return eigendecompose<T>(h.matrix);
}

/// Closed-form eigensystem of the symmetric one-level-per-dot model, in the
/// closed eigenbasis: |1) = (a, 0, b), |2) = (0, 1, 0), |3) = (b, 0, -a).
template <std::floating_point T = double>
struct AnalyticThreeState {
    std::complex<T> z1, z2, z3;
    std::complex<T> a, b, f, omega, xi;
    T eta{};
    T delta_eps{};
};

/// Squared contact amplitudes of closed states 1 and 3 in terms of eta and the
/// level offset; these stay finite in the decoupled-wire limit u -> 0.
template <std::floating_point T>
std::pair<T, T> three_state_contact_weights(T eta, T delta_eps) {
    return {(eta - delta_eps) / (T(4) * eta), (eta + delta_eps) / (T(4) * eta)};
}

template <std::floating_point T = double>
AnalyticThreeState<T> analytic_three_state(const BasicDoubleDotSpec<T>& spec, const Channel<T>& ch) {
    spec.validate();
    if (!spec.is_symmetric_three_state())
        throw Error(ErrorCode::NotApplicable, "closed forms need one identical level per dot and v == w");
    const T eps1 = spec.left_levels[0];
    const T eps_wire = spec.wire_energy();
    const T u = spec.u;
    const T v = spec.v;
    const T delta = (eps1 - eps_wire) / T(2);
    const T eta = std::sqrt(delta * delta + T(2) * u * u);
    if (eta == T(0)) throw Error(ErrorCode::NotApplicable, "fully degenerate closed spectrum (u = 0, eps(L) = eps_1)");

    const std::complex<T> g = v * v * ch.phase;  // v^2 e^{ik}
    const T e1b = (eps1 + eps_wire) / T(2) - eta;
    const T e3b = (eps1 + eps_wire) / T(2) + eta;
    const auto [w1, w3] = three_state_contact_weights(eta, delta);
    const std::complex<T> h11 = e1b - T(2) * w1 * g;
    const std::complex<T> h33 = e3b - T(2) * w3 * g;

    AnalyticThreeState<T> out;
    out.eta = eta;
    out.delta_eps = delta;
    out.f = g * u / (std::sqrt(T(2)) * eta);
    out.omega = -eta + delta * g / (T(2) * eta);
    out.xi = std::sqrt(out.omega * out.omega + out.f * out.f);
    const std::complex<T> mean = (eps1 + eps_wire) / T(2) - g / T(2);
    out.z1 = mean - out.xi;
    out.z3 = mean + out.xi;
    out.z2 = eps1 - g;

    if (out.f == std::complex<T>(0)) {
        // decoupled wire: axis-aligned vectors
        const bool first = std::abs(h11 - out.z1) <= std::abs(h33 - out.z1);
        out.a = first ? T(1) : T(0);
        out.b = first ? T(0) : T(1);
    } else {
        out.b = std::sqrt((out.xi + out.omega) / (T(2) * out.xi));
        out.a = -out.f / std::sqrt(T(2) * out.xi * (out.xi + out.omega));
    }
    return out;
}

/// Eigenvalues labelled continuously along an ordered sweep of eigensystems.
template <std::floating_point T = double>
struct Trajectories {
    // indexed [label][step]
    std::vector<std::vector<std::complex<T>>> values;
    std::vector<std::vector<T>> rigidity;
    std::vector<std::vector<bool>> ambiguous;
    std::vector<std::vector<std::size_t>> source_index;

    std::size_t labels() const { return values.size(); }
    std::size_t steps() const { return values.empty() ? 0 : values.front().size(); }

    bool any_ambiguous() const {
        for (const auto& row : ambiguous)
            if (std::find(row.begin(), row.end(), true) != row.end()) return true;
        return false;
    }
};

namespace detail {

template <std::floating_point T>
T normalized_overlap(const EigenSet<T>& a, std::size_t i, const EigenSet<T>& b, std::size_t j) {
    const auto va = a.right_vectors.col(static_cast<Eigen::Index>(i));
    const auto vb = b.right_vectors.col(static_cast<Eigen::Index>(j));
    const T num = std::abs(linalg::bilinear_dot(va, vb));
    const T den = std::sqrt(std::abs(linalg::bilinear_dot(va, va)) * std::abs(linalg::bilinear_dot(vb, vb)));
    return den > T(0) ? num / den : T(0);
}

}  // namespace detail

/// Label step i+1 by the step-i state with the largest biorthogonal overlap.
/// Near-coalescing states (low rigidity or weak best overlap) fall back to the
/// eigenvalue nearest the linear extrapolation and are flagged ambiguous.
template <std::floating_point T = double>
Trajectories<T> track_trajectories(std::span<const EigenSet<T>> sweep) {
    Trajectories<T> out;
    if (sweep.empty()) return out;
    const std::size_t n = sweep.front().size();
    out.values.assign(n, {});
    out.rigidity.assign(n, {});
    out.ambiguous.assign(n, {});
    out.source_index.assign(n, {});

    std::vector<std::size_t> current(n);
    std::iota(current.begin(), current.end(), std::size_t{0});
    auto record = [&](const EigenSet<T>& set, const std::vector<std::size_t>& idx, const std::vector<bool>& flags) {
        for (std::size_t l = 0; l < n; ++l) {
            out.values[l].push_back(set.eigenvalues(static_cast<Eigen::Index>(idx[l])));
            out.rigidity[l].push_back(set.phase_rigidities[idx[l]]);
            out.ambiguous[l].push_back(flags[l]);
            out.source_index[l].push_back(idx[l]);
        }
    };
    record(sweep.front(), current, std::vector<bool>(n, false));

    for (std::size_t step = 1; step < sweep.size(); ++step) {
        const EigenSet<T>& prev = sweep[step - 1];
        const EigenSet<T>& next = sweep[step];
        if (next.size() != n) throw Error(ErrorCode::NumericalFailure, "sweep changes dimension");

        std::vector<std::complex<T>> predicted(n);
        for (std::size_t l = 0; l < n; ++l) {
            const auto& vals = out.values[l];
            predicted[l] = vals.size() >= 2 ? T(2) * vals.back() - vals[vals.size() - 2] : vals.back();
        }
        auto trusted = [&](const EigenSet<T>& s, std::size_t i) {
            return !s.defective_flags[i] && s.phase_rigidities[i] >= T(kRigidityTrust);
        };

        struct Candidate {
            std::size_t label, target;
            T score, distance;
        };
        std::vector<Candidate> cands;
        for (std::size_t l = 0; l < n; ++l) {
            if (!trusted(prev, current[l])) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (!trusted(next, j)) continue;
                cands.push_back({l, j, detail::normalized_overlap(prev, current[l], next, j),
                                 std::abs(next.eigenvalues(static_cast<Eigen::Index>(j)) - predicted[l])});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
            if (x.score != y.score) return x.score > y.score;
            return x.distance < y.distance;
        });

        std::vector<std::size_t> assigned(n, n);
        std::vector<bool> taken(n, false);
        std::vector<bool> flags(n, false);
        for (const auto& c : cands) {
            if (c.score < T(kAmbiguousOverlap)) break;
            if (assigned[c.label] != n || taken[c.target]) continue;
            assigned[c.label] = c.target;
            taken[c.target] = true;
        }

        std::vector<Candidate> rest;
        for (std::size_t l = 0; l < n; ++l) {
            if (assigned[l] != n) continue;
            flags[l] = true;
            for (std::size_t j = 0; j < n; ++j)
                if (!taken[j])
                    rest.push_back({l, j, T(0), std::abs(next.eigenvalues(static_cast<Eigen::Index>(j)) - predicted[l])});
        }
        std::sort(rest.begin(), rest.end(), [](const Candidate& x, const Candidate& y) { return x.distance < y.distance; });
        for (const auto& c : rest) {
            if (assigned[c.label] != n || taken[c.target]) continue;
            assigned[c.label] = c.target;
            taken[c.target] = true;
        }
        current = assigned;
        record(next, current, flags);
    }
    return out;
}

/// Result of labelling an eigensystem by continuation from the closed system.
template <std::floating_point T = double>
struct LabelledEigenSet {
    EigenSet<T> set;        // position k holds state k
    bool ambiguous = false;
};

/// Labels the eigenvalues of H_eff(E) by switching the lead couplings on
/// gradually, (v, w) -> s (v, w) for s in [0, 1]; label k is the k-th closed level.
template <std::floating_point T = double>
LabelledEigenSet<T> labelled_eigenset(const BasicDoubleDotSpec<T>& spec, const Channel<T>& ch, std::size_t steps = 64) {
    const ClosedSpectrum<T> closed = closed_spectrum(spec);
    std::vector<EigenSet<T>> path;
    path.reserve(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        const T s = static_cast<T>(i) / static_cast<T>(steps);
        BasicDoubleDotSpec<T> scaled = spec;
        scaled.v = spec.v * s;
        scaled.w = spec.w * s;
        path.push_back(eigendecompose<T>(build_effective_hamiltonian(scaled, closed, ch)));
    }
    const auto tr = track_trajectories<T>(path);
    const std::size_t n = tr.labels();
    std::vector<std::size_t> order(n);
    bool ambiguous = false;
    for (std::size_t l = 0; l < n; ++l) {
        order[l] = tr.source_index[l].back();
        for (bool f : tr.ambiguous[l]) ambiguous = ambiguous || f;
    }
    return {path.back().permuted(order, LabelOrder::Continuation), ambiguous};
}

/// Resonance position and width from the fixed-point conditions
/// E_k = Re z_k(E_k), Gamma_k = 2 Im z_k(E_k).
struct ResonanceState {
    std::size_t index = 0;
    double position = 0.0;
    double width_signed = 0.0;  // 2 Im z_k, non-positive
    double width_decay = 0.0;  // -2 Im z_k
    double residual = 0.0;     // |E_k - Re z_k(E_k)|
    bool at_branch_point = false;  // root where state k coalesces with a partner
};

inline constexpr std::size_t kFixedPointGrid = 400;
inline constexpr double kBandMargin = 1e-6;

namespace detail {

struct LabelSample {
    double energy;
    std::complex<double> z;
    std::complex<double> partner;  // nearest other eigenvalue
};

inline std::vector<LabelSample> trace_label_over_band(const DoubleDotSpec& spec, std::size_t label, std::size_t points) {
    const ClosedSpectrum<double> closed = closed_spectrum<double>(spec);
    std::vector<EigenSet<double>> sets;
    std::vector<double> energies;
    sets.reserve(points);
    const double lo = -2.0 + kBandMargin;
    const double hi = 2.0 - kBandMargin;
    for (std::size_t i = 0; i < points; ++i) {
        const double e = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        const auto ch = channel_from_energy(e);
        energies.push_back(e);
        if (i == 0)
            sets.push_back(labelled_eigenset(spec, ch).set);
        else
            sets.push_back(eigendecompose(build_effective_hamiltonian(spec, closed, ch)));
    }
    const auto tr = track_trajectories<double>(sets);
    std::vector<LabelSample> out;
    for (std::size_t i = 0; i < points; ++i) {
        const auto z = tr.values[label][i];
        std::complex<double> partner = z;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < tr.labels(); ++l) {
            if (l == label) continue;
            const double d = std::abs(tr.values[l][i] - z);
            if (d < best) {
                best = d;
                partner = tr.values[l][i];
            }
        }
        out.push_back({energies[i], z, partner});
    }
    return out;
}

inline CVector<double> eigenvalues_at(const DoubleDotSpec& spec, const ClosedSpectrum<double>& closed, double e) {
    return eigendecompose(build_effective_hamiltonian(spec, closed, channel_from_energy(e))).eigenvalues;
}

inline std::complex<double> nearest(const CVector<double>& zs, std::complex<double> target, Eigen::Index skip = -1) {
    Eigen::Index best = -1;
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < zs.size(); ++i) {
        if (i == skip) continue;
        const double di = std::abs(zs(i) - target);
        if (di < d) {
            d = di;
            best = i;
        }
    }
    return zs(best);
}

}  // namespace detail

/// All fixed points of state `label` inside the band. Regular roots come from
/// sign changes of g(E) = E - Re z(E) refined by bisection. A root where the
/// state touches g = 0 while coalescing with a partner is refined on the pair
/// mean instead, which stays smooth through the branch point. An empty result
/// means no root in the band.
inline std::vector<ResonanceState> solve_fixed_points(const DoubleDotSpec& spec, std::size_t label,
                                                      std::size_t grid_points = kFixedPointGrid) {
    spec.validate();
    if (label >= spec.dimension()) throw Error(ErrorCode::NotApplicable, "state label out of range");
    const auto samples = detail::trace_label_over_band(spec, label, grid_points);
    const ClosedSpectrum<double> closed = closed_spectrum<double>(spec);

    std::vector<double> g(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) g[i] = samples[i].energy - samples[i].z.real();

    std::vector<ResonanceState> roots;
    auto push = [&](double e, std::complex<double> z, double residual, bool branch) {
        roots.push_back({label, e, 2.0 * z.imag(), -2.0 * z.imag(), residual, branch});
    };

    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        if (g[i] == 0.0) {
            push(samples[i].energy, samples[i].z, 0.0, false);
            continue;
        }
        if (g[i] * g[i + 1] >= 0.0) continue;
        double a = samples[i].energy, b = samples[i + 1].energy;
        std::complex<double> za = samples[i].z, zb = samples[i + 1].z;
        double ga = g[i];
        for (int it = 0; it < 200 && b - a > 4e-16 * (1.0 + std::abs(a)); ++it) {
            const double m = 0.5 * (a + b);
            const auto zm = detail::nearest(detail::eigenvalues_at(spec, closed, m), 0.5 * (za + zb));
            const double gm = m - zm.real();
            if (gm == 0.0) {
                a = b = m;
                za = zb = zm;
                break;
            }
            if ((gm < 0.0) == (ga < 0.0)) {
                a = m;
                za = zm;
                ga = gm;
            } else {
                b = m;
                zb = zm;
            }
        }
        const double e = std::abs(a - za.real()) <= std::abs(b - zb.real()) ? a : b;
        const auto z = std::abs(a - za.real()) <= std::abs(b - zb.real()) ? za : zb;
        push(e, z, std::abs(e - z.real()), false);
    }

    // tangential roots at a coalescence
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        const double gi = std::abs(g[i]);
        if (gi > std::abs(g[i - 1]) || gi > std::abs(g[i + 1])) continue;
        if (g[i - 1] * g[i] < 0.0 || g[i] * g[i + 1] < 0.0 || g[i] == 0.0) continue;
        auto mean_at = [&](double e, std::complex<double> z_hint) {
            const auto zs = detail::eigenvalues_at(spec, closed, e);
            Eigen::Index k = 0;
            (zs.array() - z_hint).abs().minCoeff(&k);
            const auto zk = zs(k);
            const auto zl = detail::nearest(zs, zk, k);
            return std::pair{0.5 * (zk + zl), std::abs(zk - zl)};
        };
        double a = samples[i - 1].energy, b = samples[i + 1].energy;
        auto [ma, gap_a] = mean_at(a, samples[i - 1].z);
        auto [mb, gap_b] = mean_at(b, samples[i + 1].z);
        double ha = a - ma.real();
        const double hb = b - mb.real();
        if (ha * hb > 0.0) continue;
        std::complex<double> hint = 0.5 * (samples[i - 1].z + samples[i + 1].z);
        std::complex<double> mean = ma;
        double gap = gap_a;
        for (int it = 0; it < 200 && b - a > 4e-16 * (1.0 + std::abs(a)); ++it) {
            const double m = 0.5 * (a + b);
            std::tie(mean, gap) = mean_at(m, hint);
            hint = mean;
            const double hm = m - mean.real();
            if (hm == 0.0) {
                a = b = m;
                break;
            }
            if ((hm < 0.0) == (ha < 0.0)) {
                a = m;
                ha = hm;
            } else {
                b = m;
            }
        }
        const double e = 0.5 * (a + b);
        std::tie(mean, gap) = mean_at(e, hint);
        const double own = std::abs(e - mean.real()) + 0.5 * gap;
        if (gap < 1e-4 && own < 1e-6) push(e, mean, std::abs(e - mean.real()), true);
    }

    std::sort(roots.begin(), roots.end(), [](const auto& x, const auto& y) { return x.position < y.position; });
    return roots;
}

}  // namespace dqd

#endif
