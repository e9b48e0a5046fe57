#ifndef DQD_SWEEP_HPP
#define DQD_SWEEP_HPP

// Grid evaluation of observables over one or two parameters. Cells run on a
// pool of worker threads; each cell owns its output slot, so the result does
// not depend on the schedule.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dqd/branchpoints.hpp"
#include "dqd/errors.hpp"
#include "dqd/model.hpp"
#include "dqd/presets.hpp"
#include "dqd/spectral.hpp"
#include "dqd/transmission.hpp"

namespace dqd {

struct CellError {
    std::size_t i = 0;  // axis1 index
    std::size_t j = 0;  // axis2 index
    std::string observable;
    ErrorCode code = ErrorCode::NumericalFailure;
    std::string message;
};

struct FixedPointRecord {
    std::size_t i = 0, j = 0;
    ResonanceState state;
};

struct SweepResult {
    SweepConfig config;
    std::vector<double> axis1_values;
    std::vector<double> axis2_values;  // a single dummy entry for 1-D sweeps

    // cell (i, j) at i * n2 + j
    std::vector<double> transmission;
    std::vector<std::complex<double>> amplitude;
    std::vector<std::optional<EigenSet<double>>> eigensets;

    // one tracked set per axis2 index, along axis1; steps refer to axis1 indices in `steps`
    struct Track {
        std::vector<std::size_t> steps;
        Trajectories<double> trajectories;
    };
    std::vector<Track> tracks;

    std::vector<FixedPointRecord> fixed_points;
    std::vector<BranchPoint> branch_points;
    std::vector<CellError> errors;
    std::size_t failed_cells = 0;  // grid cells with at least one error

    std::size_t n1() const { return axis1_values.size(); }
    std::size_t n2() const { return axis2_values.size(); }
    std::size_t cell(std::size_t i, std::size_t j) const { return i * n2() + j; }
    std::size_t failure_count() const { return errors.size(); }
};

namespace detail {

inline bool known_param(const std::string& p) { return p == "v" || p == "w" || p == "u" || p == "L" || p == "E"; }

inline void validate_axis(const Axis& a, const char* which) {
    const std::string w = which;
    if (!known_param(a.param)) throw Error(ErrorCode::ConfigError, w + ": unknown parameter '" + a.param + "'");
    if (a.points == 0) throw Error(ErrorCode::ConfigError, w + ": points must be positive");
    if (!std::isfinite(a.min) || !std::isfinite(a.max)) throw Error(ErrorCode::ConfigError, w + ": non-finite range");
    if (a.points >= 2 && !(a.min < a.max)) throw Error(ErrorCode::ConfigError, w + ": min must be below max");
    if (a.param != "E" && a.min < 0.0) throw Error(ErrorCode::ConfigError, w + ": " + a.param + " must be non-negative");
}

inline std::vector<double> axis_values(const Axis& a) {
    double lo = a.min, hi = a.max;
    if (a.param == "E") {
        lo = std::clamp(lo, -kEnergyClip, kEnergyClip);
        hi = std::clamp(hi, -kEnergyClip, kEnergyClip);
    }
    std::vector<double> out(a.points);
    if (a.points == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < a.points; ++i)
        out[i] = i + 1 == a.points ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(a.points - 1);
    return out;
}

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
    unsigned n = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) body(k);
    };
    if (n <= 1) {
        worker();
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
}

}  // namespace detail

inline void validate(const SweepConfig& c) {
    c.spec.validate();
    detail::validate_axis(c.axis1, "axis1");
    if (c.axis2) {
        detail::validate_axis(*c.axis2, "axis2");
        if (c.axis2->param == c.axis1.param) throw Error(ErrorCode::ConfigError, "axes must sweep different parameters");
    }
    if (!std::isfinite(c.energy)) throw Error(ErrorCode::ConfigError, "non-finite energy");
}

/// Spec and energy of cell (x1, x2). "v" also sets w when the base couplings are equal and w is not swept.
inline std::pair<DoubleDotSpec, double> cell_parameters(const SweepConfig& c, double x1, std::optional<double> x2) {
    DoubleDotSpec s = c.spec;
    double e = c.energy;
    const bool w_swept = c.axis1.param == "w" || (c.axis2 && c.axis2->param == "w");
    const bool tie = c.spec.v == c.spec.w && !w_swept;
    detail::assign_param(s, e, c.axis1.param, x1, tie);
    if (c.axis2 && x2) detail::assign_param(s, e, c.axis2->param, *x2, tie);
    return {s, e};
}

inline SweepResult run_sweep(const SweepConfig& config) {
    validate(config);
    SweepResult r;
    r.config = config;
    r.axis1_values = detail::axis_values(config.axis1);
    r.axis2_values = config.axis2 ? detail::axis_values(*config.axis2) : std::vector<double>{0.0};
    const std::size_t n1 = r.n1(), n2 = r.n2(), cells = n1 * n2;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    const bool want_t = config.wants(Observable::Transmission);
    const bool want_eig = config.wants(Observable::Eigenvalues) || config.wants(Observable::Rigidity);
    const bool want_fp = config.wants(Observable::FixedPoints);
    if (want_t) {
        r.transmission.assign(cells, nan);
        r.amplitude.assign(cells, std::complex<double>(nan, nan));
    }
    if (want_eig) r.eigensets.assign(cells, std::nullopt);

    std::vector<std::vector<CellError>> cell_errors(cells);
    std::vector<std::vector<ResonanceState>> cell_fp(want_fp ? cells : 0);

    detail::parallel_for(cells, config.threads, [&](std::size_t k) {
        const std::size_t i = k / n2, j = k % n2;
        auto note = [&](const char* what, const Error& e) { cell_errors[k].push_back({i, j, what, e.code(), e.what()}); };
        std::optional<double> x2;
        if (config.axis2) x2 = r.axis2_values[j];
        const auto [spec, energy] = cell_parameters(config, r.axis1_values[i], x2);
        if (want_t) {
            try {
                const auto tp = transmission(spec, energy);
                r.transmission[k] = tp.probability;
                r.amplitude[k] = tp.amplitude;
            } catch (const Error& e) {
                note("transmission", e);
            }
        }
        if (want_eig) {
            try {
                r.eigensets[k] = eigendecompose(build_effective_hamiltonian(spec, channel_from_energy(energy)));
            } catch (const Error& e) {
                note("eigenvalues", e);
            }
        }
        if (want_fp) {
            try {
                for (std::size_t label = 0; label < spec.dimension(); ++label) {
                    auto roots = solve_fixed_points(spec, label);
                    cell_fp[k].insert(cell_fp[k].end(), roots.begin(), roots.end());
                }
            } catch (const Error& e) {
                note("fixed_points", e);
            }
        }
    });

    for (std::size_t k = 0; k < cells; ++k) {
        if (!cell_errors[k].empty()) ++r.failed_cells;
        r.errors.insert(r.errors.end(), cell_errors[k].begin(), cell_errors[k].end());
        if (want_fp)
            for (const auto& st : cell_fp[k]) r.fixed_points.push_back({k / n2, k % n2, st});
    }

    if (want_eig) {
        for (std::size_t j = 0; j < n2; ++j) {
            SweepResult::Track track;
            std::vector<EigenSet<double>> row;
            for (std::size_t i = 0; i < n1; ++i) {
                const auto& es = r.eigensets[r.cell(i, j)];
                if (!es) continue;
                track.steps.push_back(i);
                row.push_back(*es);
            }
            track.trajectories = track_trajectories<double>(row);
            r.tracks.push_back(std::move(track));
        }
    }

    if (config.wants(Observable::BranchPoints)) {
        auto note = [&](const char* what, const Error& e) { r.errors.push_back({0, 0, what, e.code(), e.what()}); };
        if (config.spec.is_symmetric_three_state()) {
            try {
                r.branch_points.push_back(critical_coupling(config.spec));
            } catch (const Error& e) {
                note("critical_coupling", e);
            }
            try {
                r.branch_points.push_back(critical_u_double_coincidence(config.spec));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoSolution) note("critical_u_double_coincidence", e);
            }
            try {
                for (auto& bp : critical_lengths(config.spec)) r.branch_points.push_back(bp);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoSolution && e.code() != ErrorCode::NotApplicable) note("critical_lengths", e);
            }
        } else if (config.axis2) {
            EpSearchOptions opt;
            opt.params = {ParamRange{config.axis1.param, r.axis1_values.front(), r.axis1_values.back()},
                          ParamRange{config.axis2->param, r.axis2_values.front(), r.axis2_values.back()}};
            opt.energy = config.energy;
            try {
                r.branch_points.push_back(find_ep_numeric(config.spec, opt));
            } catch (const Error& e) {
                note("find_ep_numeric", e);
            }
        }
    }
    return r;
}

}  // namespace dqd

#endif
