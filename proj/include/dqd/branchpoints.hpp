#ifndef DQD_BRANCHPOINTS_HPP
#define DQD_BRANCHPOINTS_HPP

// Branch points (exceptional points) of H_eff: closed-form conditions for the
// symmetric one-level-per-dot model and a two-parameter Newton search for
// general double dots.
//
// Residuals are evaluated in long double. Near a coalescence the computed
// eigenvalue gap carries an error of order sqrt(machine epsilon), which in
// double precision alone is comparable to the 1e-8 acceptance level.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dqd/errors.hpp"
#include "dqd/linalg.hpp"
#include "dqd/model.hpp"
#include "dqd/spectral.hpp"

namespace dqd {

enum class Regime { LevelRepulsion, WidthBifurcation, Coalescence, Complex };

constexpr std::string_view to_string(Regime r) noexcept {
    switch (r) {
        case Regime::LevelRepulsion: return "level_repulsion";
        case Regime::WidthBifurcation: return "width_bifurcation";
        case Regime::Coalescence: return "coalescence";
        case Regime::Complex: return "complex";
    }
    return "unknown";
}

/// F = ((eps(L) - eps_1 + v^2 e^{ik}) / 2)^2 + 2 u^2, so that z_{1,3} = mean -/+ sqrt(F).
template <std::floating_point T = double>
struct DiscriminantF {
    std::complex<T> value;
    T energy{};
    Regime regime = Regime::Complex;
    BasicDoubleDotSpec<T> spec;
};

namespace detail {

template <std::floating_point T>
std::complex<T> discriminant_value(T eps1, T eps_wire, T u, T v, std::complex<T> phase) {
    const std::complex<T> half = (eps_wire - eps1 + v * v * phase) / T(2);
    return half * half + T(2) * u * u;
}

template <std::floating_point T>
void require_three_state(const BasicDoubleDotSpec<T>& spec) {
    spec.validate();
    if (spec.dimension() != 3) throw Error(ErrorCode::NotApplicable, "closed-form branch points need one level per dot");
    if (!spec.is_symmetric_three_state())
        throw Error(ErrorCode::NotApplicable, "closed-form branch points need identical dots and v == w");
}

}  // namespace detail

template <std::floating_point T>
DiscriminantF<T> discriminant(const BasicDoubleDotSpec<T>& spec, T energy) {
    detail::require_three_state(spec);
    const Channel<T> ch = channel_from_energy(energy);
    DiscriminantF<T> out;
    out.value = detail::discriminant_value(spec.left_levels[0], spec.wire_energy(), spec.u, spec.v, ch.phase);
    out.energy = energy;
    out.spec = spec;
    const T mag = std::abs(out.value);
    if (mag < T(1e-9))
        out.regime = Regime::Coalescence;
    else if (std::abs(out.value.imag()) <= T(1e-12) * std::max(T(1), mag))
        out.regime = out.value.real() > T(0) ? Regime::LevelRepulsion : Regime::WidthBifurcation;
    else
        out.regime = Regime::Complex;
    return out;
}

inline DiscriminantF<double> discriminant(const DoubleDotSpec& spec, double energy) {
    return discriminant<double>(spec, energy);
}

enum class BranchKind { Analytic, Numeric };

constexpr std::string_view to_string(BranchKind k) noexcept { return k == BranchKind::Analytic ? "analytic" : "numeric"; }

enum class SearchStatus { Converged, NoConvergence };

struct BranchPoint {
    BranchKind kind = BranchKind::Analytic;
    std::map<std::string, double> critical_params;  // e.g. {"v": v_c}
    double energy = 0.0;                            // E_c
    std::pair<std::size_t, std::size_t> coalesced_pair{0, 0};
    double residual = 0.0;  // |z_k - z_l| at the reported point
    bool fixed_point_coincides = false;
    double pair_rigidity = 0.0;
    SearchStatus status = SearchStatus::Converged;
    int iterations = 0;

    double param(const std::string& name) const {
        const auto it = critical_params.find(name);
        if (it == critical_params.end()) throw Error(ErrorCode::NotApplicable, "no critical parameter '" + name + "'");
        return it->second;
    }
};

namespace detail {

struct PairEvaluation {
    std::complex<long double> zk, zl;
    std::complex<long double> gap;   // z_k - z_l
    std::complex<long double> mean;  // (z_k + z_l) / 2
    std::size_t first = 0, second = 0;
    long double rigidity = 1.0L;  // smaller phase rigidity of the two
};

/// The two eigenvalues of H_eff that best match the reference pair (ref_k, ref_l).
inline PairEvaluation closest_pair(const BasicDoubleDotSpec<long double>& spec, long double energy,
                                   std::complex<long double> ref_k, std::complex<long double> ref_l, bool with_rigidity) {
    const auto ch = channel_from_energy(energy);
    const auto heff = build_effective_hamiltonian(spec, ch);
    PairEvaluation out;
    EigenSet<long double> set;
    CVector<long double> values;
    if (with_rigidity) {
        set = eigendecompose(heff);
        values = set.eigenvalues;
    } else {
        values = linalg::eigen_pairs(heff.matrix).values;
    }
    const Eigen::Index n = values.size();
    long double best = std::numeric_limits<long double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const long double cost = std::abs(values(i) - ref_k) + std::abs(values(j) - ref_l);
            if (cost < best) {
                best = cost;
                out.first = static_cast<std::size_t>(i);
                out.second = static_cast<std::size_t>(j);
            }
        }
    out.zk = values(static_cast<Eigen::Index>(out.first));
    out.zl = values(static_cast<Eigen::Index>(out.second));
    out.gap = out.zk - out.zl;
    out.mean = (out.zk + out.zl) / 2.0L;
    if (with_rigidity) out.rigidity = std::min(set.phase_rigidities[out.first], set.phase_rigidities[out.second]);
    if (out.first > out.second) std::swap(out.first, out.second);
    return out;
}

/// Analytic point of the symmetric model: gap, rigidity and the fixed-point test at (spec, E_c).
inline BranchPoint finish_analytic(const BasicDoubleDotSpec<long double>& spec, long double e_c) {
    BranchPoint bp;
    bp.kind = BranchKind::Analytic;
    bp.energy = static_cast<double>(e_c);
    bp.coalesced_pair = {0, 2};
    const long double eps1 = spec.left_levels[0];
    const long double eps_wire = spec.wire_energy();
    if (std::abs(e_c) < 2.0L) {
        const auto ch = channel_from_energy(e_c);
        const std::complex<long double> mean = (eps1 + eps_wire) / 2.0L - spec.v * spec.v * ch.phase / 2.0L;
        const PairEvaluation pe = closest_pair(spec, e_c, mean, mean, true);
        bp.residual = static_cast<double>(std::abs(pe.gap));
        bp.pair_rigidity = static_cast<double>(pe.rigidity);
        bp.fixed_point_coincides = std::abs(mean.real() - e_c) < 1e-9L;
    } else {
        // band edge: e^{ik} = -1 or +1, gap from the closed form
        const std::complex<long double> phase(e_c > 0 ? -1.0L : 1.0L, 0.0L);
        const auto f = discriminant_value(eps1, eps_wire, spec.u, spec.v, phase);
        bp.residual = static_cast<double>(2.0L * std::sqrt(std::abs(f)));
        const long double mean = (eps1 + eps_wire) / 2.0L - spec.v * spec.v * phase.real() / 2.0L;
        bp.fixed_point_coincides = std::abs(mean - e_c) < 1e-9L;
    }
    return bp;
}

}  // namespace detail

/// v_c^4 = (eps(L) - eps_1)^2 + 8 u^2, E_c = 2 (eps(L) - eps_1) / v_c^2.
inline BranchPoint critical_coupling(const DoubleDotSpec& spec) {
    detail::require_three_state(spec);
    auto s = spec.cast<long double>();
    const long double delta = s.wire_energy() - s.left_levels[0];
    const long double v2 = std::sqrt(delta * delta + 8.0L * s.u * s.u);
    const long double e_c = v2 == 0.0L ? 0.0L : 2.0L * delta / v2;
    if (!(std::abs(e_c) < 2.0L))
        throw Error(ErrorCode::OutOfBand, "coalescence energy " + std::to_string(static_cast<double>(e_c)) + " outside the band");
    s.v = s.w = std::sqrt(v2);
    BranchPoint bp = detail::finish_analytic(s, e_c);
    bp.critical_params = {{"v", static_cast<double>(s.v)}};
    return bp;
}

/// The u_c for which the branch point lies on the fixed-point solution, E_c = E_k = E_l = eps(L).
inline BranchPoint critical_u_double_coincidence(const DoubleDotSpec& spec) {
    detail::require_three_state(spec);
    auto s = spec.cast<long double>();
    // eps(L) as the model evaluates it, so that an exact zero stays zero
    const long double eps_wire = spec.wire_energy();
    const long double delta = eps_wire - s.left_levels[0];
    if (eps_wire == 0.0L) throw Error(ErrorCode::NoSolution, "eps(L) = 0 admits no double coincidence");
    if (!(std::abs(eps_wire) < 2.0L)) throw Error(ErrorCode::NoSolution, "eps(L) outside the band");
    if (delta == 0.0L) throw Error(ErrorCode::NoSolution, "eps(L) = eps_1 gives only the trivial point u = v = 0");
    if ((delta > 0.0L) != (eps_wire > 0.0L))
        throw Error(ErrorCode::NoSolution, "E_c = 2 (eps(L) - eps_1) / v_c^2 has the opposite sign of eps(L)");
    const long double radicand = (delta * delta / 8.0L) * (4.0L / (eps_wire * eps_wire) - 1.0L);
    if (radicand < 0.0L) throw Error(ErrorCode::NoSolution, "negative radicand for u_c^2");
    s.u = std::sqrt(radicand);
    const long double v2 = std::sqrt(delta * delta + 8.0L * radicand);
    s.v = s.w = std::sqrt(v2);
    const long double e_c = 2.0L * delta / v2;
    BranchPoint bp = detail::finish_analytic(s, e_c);
    bp.critical_params = {{"u", static_cast<double>(s.u)}, {"v", static_cast<double>(s.v)}};
    bp.fixed_point_coincides = true;
    return bp;
}

/// eps(L_c) = eps_1 +/- sqrt(v^4 - 8 u^2), E_c = +/- (2 / v^2) sqrt(v^4 - 8 u^2), mapped to L_c
/// through the wire dispersion. Roots at negative length or outside the band are dropped.
inline std::vector<BranchPoint> critical_lengths(const DoubleDotSpec& spec) {
    detail::require_three_state(spec);
    if (spec.wire.slope == 0.0) throw Error(ErrorCode::NotApplicable, "wire energy does not depend on L");
    const auto base = spec.cast<long double>();
    const long double v2 = base.v * base.v;
    long double radicand = v2 * v2 - 8.0L * base.u * base.u;
    if (radicand < 0.0L && -radicand <= 1e-14L * (v2 * v2 + 8.0L * base.u * base.u)) radicand = 0.0L;
    if (radicand < 0.0L) throw Error(ErrorCode::NoSolution, "v^4 < 8 u^2: no critical length");
    const long double r = std::sqrt(radicand);
    std::vector<BranchPoint> out;
    const std::vector<long double> signs = r == 0.0L ? std::vector<long double>{1.0L} : std::vector<long double>{1.0L, -1.0L};
    for (long double sgn : signs) {
        const long double eps_c = base.left_levels[0] + sgn * r;
        const long double e_c = v2 == 0.0L ? 0.0L : sgn * 2.0L * r / v2;
        const long double length = (eps_c - base.wire.offset) / base.wire.slope;
        if (length < 0.0L || !(std::abs(e_c) < 2.0L)) continue;
        auto s = base;
        s.length = length;
        BranchPoint bp = detail::finish_analytic(s, e_c);
        bp.critical_params = {{"L", static_cast<double>(length)}};
        out.push_back(bp);
    }
    if (out.empty()) throw Error(ErrorCode::NoSolution, "no critical length at L >= 0 inside the band");
    std::sort(out.begin(), out.end(), [](const BranchPoint& a, const BranchPoint& b) { return a.param("L") < b.param("L"); });
    return out;
}

struct ParamRange {
    std::string name;  // one of v, w, u, L, E
    double lo = 0.0;
    double hi = 0.0;
};

struct EpSearchOptions {
    std::array<ParamRange, 2> params;
    double energy = 0.0;  // used unless E is a search parameter
    std::optional<std::array<double, 2>> seed;
    std::optional<std::pair<std::size_t, std::size_t>> pair_hint;  // continuation labels at the seed
    std::size_t grid = 21;
    int max_iterations = 100;
    std::size_t newton_starts = 4;
};

namespace detail {

inline bool is_search_param(const std::string& name) {
    return name == "v" || name == "w" || name == "u" || name == "L" || name == "E";
}

/// Applies a parameter value. "v" drags w along when the base couplings are equal and w is not searched.
template <std::floating_point T>
void assign_param(BasicDoubleDotSpec<T>& spec, T& energy, const std::string& name, T value, bool tie_w) {
    if (name == "v") {
        spec.v = value;
        if (tie_w) spec.w = value;
    } else if (name == "w") {
        spec.w = value;
    } else if (name == "u") {
        spec.u = value;
    } else if (name == "L") {
        spec.length = value;
    } else if (name == "E") {
        energy = value;
    } else {
        throw Error(ErrorCode::ConfigError, "unknown parameter '" + name + "'");
    }
}

class EpProblem {
public:
    EpProblem(const DoubleDotSpec& spec, const EpSearchOptions& opt) : base_(spec.cast<long double>()), opt_(opt) {
        tie_w_ = spec.v == spec.w && opt.params[0].name != "w" && opt.params[1].name != "w";
    }

    std::pair<BasicDoubleDotSpec<long double>, long double> at(const std::array<long double, 2>& x) const {
        auto s = base_;
        long double e = opt_.energy;
        for (std::size_t i = 0; i < 2; ++i) assign_param(s, e, opt_.params[i].name, x[i], tie_w_);
        return {s, e};
    }

    bool admissible(const std::array<long double, 2>& x) const {
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& p = opt_.params[i];
            if (!(x[i] >= p.lo && x[i] <= p.hi)) return false;
            if (p.name == "E" && !(std::abs(x[i]) < 2.0L)) return false;
            if (p.name != "E" && x[i] < 0.0L) return false;
        }
        return true;
    }

    /// The pair continuing `ref`; D = (z_k - z_l)^2 is smooth across the coalescence.
    PairEvaluation evaluate(const std::array<long double, 2>& x, const PairEvaluation& ref,
                            bool with_rigidity = false) const {
        const auto [s, e] = at(x);
        return closest_pair(s, e, ref.zk, ref.zl, with_rigidity);
    }

private:
    BasicDoubleDotSpec<long double> base_;
    EpSearchOptions opt_;
    bool tie_w_ = false;
};

struct NewtonResult {
    std::array<long double, 2> x{};
    PairEvaluation eval;
    bool converged = false;
    int iterations = 0;
};

inline NewtonResult newton_on_squared_gap(const EpProblem& prob, std::array<long double, 2> x,
                                          const PairEvaluation& start, int max_iter) {
    NewtonResult res;
    PairEvaluation cur = prob.evaluate(x, start);
    auto sq = [](const PairEvaluation& p) { return p.gap * p.gap; };
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it;
        const long double gap = std::abs(cur.gap);
        if (gap < 1e-10L) {
            res.converged = true;
            break;
        }
        const std::complex<long double> d0 = sq(cur);
        Eigen::Matrix<long double, 2, 2> jac;
        bool ok = true;
        for (int j = 0; j < 2; ++j) {
            const long double h = 1e-6L * std::max(std::abs(x[static_cast<std::size_t>(j)]), 1e-3L);
            auto xp = x, xm = x;
            xp[static_cast<std::size_t>(j)] += h;
            xm[static_cast<std::size_t>(j)] -= h;
            try {
                const auto dp = sq(prob.evaluate(xp, cur));
                const auto dm = sq(prob.evaluate(xm, cur));
                const auto col = (dp - dm) / (2.0L * h);
                jac(0, j) = col.real();
                jac(1, j) = col.imag();
            } catch (const Error&) {
                ok = false;
            }
        }
        if (!ok) break;
        const long double det = jac.determinant();
        if (!(std::abs(det) > 0.0L) || !std::isfinite(det)) break;
        const Eigen::Matrix<long double, 2, 1> rhs(-d0.real(), -d0.imag());
        const Eigen::Matrix<long double, 2, 1> step = jac.inverse() * rhs;

        // backtrack until |D| decreases and the point stays admissible
        long double lambda = 1.0L;
        bool accepted = false;
        for (int bt = 0; bt < 30; ++bt, lambda /= 2.0L) {
            std::array<long double, 2> trial{x[0] + lambda * step(0), x[1] + lambda * step(1)};
            if (!prob.admissible(trial)) continue;
            try {
                const PairEvaluation next = prob.evaluate(trial, cur);
                if (std::abs(sq(next)) < std::abs(d0)) {
                    x = trial;
                    cur = next;
                    accepted = true;
                    break;
                }
            } catch (const Error&) {
            }
        }
        const long double rel_step = lambda * std::max(std::abs(step(0)) / std::max(std::abs(x[0]), 1e-3L),
                                                       std::abs(step(1)) / std::max(std::abs(x[1]), 1e-3L));
        if (!accepted || rel_step < 1e-13L) {
            // rounding floor of the eigenvalue gap near the coalescence
            res.converged = std::abs(cur.gap) < 1e-8L;
            break;
        }
        res.iterations = it + 1;
    }
    if (std::abs(cur.gap) < 1e-10L) res.converged = true;
    res.x = x;
    res.eval = cur;
    return res;
}

}  // namespace detail

/// Two-parameter search for a coalescence z_k = z_l of H_eff. Newton on (z_k - z_l)^2
/// with a central-difference Jacobian; seeds come from `opt.seed` or from the
/// smallest gaps on a coarse grid. Returns the best candidate with
/// status NoConvergence when no start converges.
inline BranchPoint find_ep_numeric(const DoubleDotSpec& spec, const EpSearchOptions& opt) {
    spec.validate();
    for (const auto& p : opt.params) {
        if (!detail::is_search_param(p.name)) throw Error(ErrorCode::ConfigError, "unknown search parameter '" + p.name + "'");
        if (!(p.lo <= p.hi)) throw Error(ErrorCode::ConfigError, "empty range for parameter '" + p.name + "'");
    }
    if (opt.params[0].name == opt.params[1].name) throw Error(ErrorCode::ConfigError, "search parameters must differ");
    const bool energy_searched = opt.params[0].name == "E" || opt.params[1].name == "E";
    if (!energy_searched && !(std::abs(opt.energy) < 2.0)) throw Error(ErrorCode::EnergyOutOfBand, "search energy outside the band");

    const detail::EpProblem prob(spec, opt);

    // reference eigenvalues of the pair at a point, from the hint or the smallest gap
    std::optional<std::pair<std::size_t, std::size_t>> labels = opt.pair_hint;
    auto pair_reference = [&](const std::array<long double, 2>& x) -> std::optional<detail::PairEvaluation> {
        const auto [s, e] = prob.at(x);
        const auto sd = s.cast<double>();
        const auto ch = channel_from_energy(static_cast<double>(e));
        detail::PairEvaluation ref;
        if (opt.pair_hint) {
            const auto lab = labelled_eigenset(sd, ch);
            if (lab.ambiguous) return std::nullopt;
            const auto [k, l] = *opt.pair_hint;
            if (std::max(k, l) >= lab.set.size() || k == l)
                throw Error(ErrorCode::AmbiguousPair, "pair hint outside the spectrum");
            ref.zk = lab.set.eigenvalues(static_cast<Eigen::Index>(k));
            ref.zl = lab.set.eigenvalues(static_cast<Eigen::Index>(l));
        } else {
            const auto vals = eigendecompose(build_effective_hamiltonian(sd, ch)).eigenvalues;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < vals.size(); ++i)
                for (Eigen::Index j = i + 1; j < vals.size(); ++j)
                    if (std::abs(vals(i) - vals(j)) < best) {
                        best = std::abs(vals(i) - vals(j));
                        ref.zk = vals(i);
                        ref.zl = vals(j);
                    }
        }
        return prob.evaluate(x, ref);
    };

    struct Start {
        std::array<long double, 2> x;
        detail::PairEvaluation ref;
    };
    std::vector<Start> starts;
    auto add_start = [&](const std::array<long double, 2>& x) {
        if (!prob.admissible(x)) return;
        try {
            if (const auto ref = pair_reference(x)) starts.push_back({x, *ref});
        } catch (const Error& e) {
            if (e.code() == ErrorCode::AmbiguousPair) throw;
        }
    };

    if (opt.seed) {
        add_start({(*opt.seed)[0], (*opt.seed)[1]});
        if (starts.empty())
            throw Error(opt.pair_hint ? ErrorCode::AmbiguousPair : ErrorCode::NumericalFailure,
                        "labels cannot be tracked to the seed");
    } else {
        const std::size_t g = std::max<std::size_t>(opt.grid, 2);
        auto coord = [&](std::size_t i, std::size_t idx) {
            const auto& p = opt.params[i];
            long double lo = p.lo, hi = p.hi;
            if (p.name == "E") {
                lo = std::max<long double>(lo, -2.0L + 1e-6L);
                hi = std::min<long double>(hi, 2.0L - 1e-6L);
            }
            return lo + (hi - lo) * static_cast<long double>(idx) / static_cast<long double>(g - 1);
        };
        for (std::size_t i = 0; i < g; ++i)
            for (std::size_t j = 0; j < g; ++j) add_start({coord(0, i), coord(1, j)});
        if (starts.empty())
            throw Error(opt.pair_hint ? ErrorCode::AmbiguousPair : ErrorCode::NumericalFailure, "no usable grid seed");
        std::stable_sort(starts.begin(), starts.end(),
                         [](const Start& a, const Start& b) { return std::abs(a.ref.gap) < std::abs(b.ref.gap); });
        if (starts.size() > opt.newton_starts) starts.resize(opt.newton_starts);
    }

    std::optional<detail::NewtonResult> best;
    for (const Start& st : starts) {
        if (st.ref.gap == 0.0L) {
            detail::NewtonResult r;
            r.x = st.x;
            r.eval = st.ref;
            r.converged = true;
            best = r;
            break;
        }
        auto r = detail::newton_on_squared_gap(prob, st.x, st.ref, opt.max_iterations);
        const bool better = !best || (r.converged && !best->converged) ||
                            (r.converged == best->converged && std::abs(r.eval.gap) < std::abs(best->eval.gap));
        if (better) best = r;
        if (best->converged) break;
    }

    const auto [s, e] = prob.at(best->x);
    const auto final_eval = detail::closest_pair(s, e, best->eval.zk, best->eval.zl, true);
    BranchPoint bp;
    bp.kind = BranchKind::Numeric;
    for (std::size_t i = 0; i < 2; ++i) bp.critical_params[opt.params[i].name] = static_cast<double>(best->x[i]);
    bp.energy = static_cast<double>(e);
    bp.coalesced_pair = labels ? *labels : std::make_pair(final_eval.first, final_eval.second);
    bp.residual = static_cast<double>(std::abs(final_eval.gap));
    bp.pair_rigidity = static_cast<double>(final_eval.rigidity);
    bp.fixed_point_coincides = std::abs(final_eval.mean.real() - e) < 1e-8L;
    bp.status = best->converged ? SearchStatus::Converged : SearchStatus::NoConvergence;
    bp.iterations = best->iterations;
    return bp;
}

}  // namespace dqd

#endif
