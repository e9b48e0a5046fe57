#ifndef DQD_PRESETS_HPP
#define DQD_PRESETS_HPP

// Parameter sets and sweep layouts that regenerate the data behind figures
// fig1 ... fig14.

#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dqd/errors.hpp"
#include "dqd/model.hpp"

namespace dqd {

enum class Observable { Transmission, Eigenvalues, Rigidity, FixedPoints, BranchPoints };

inline constexpr std::size_t kDefaultPoints1D = 200;
inline constexpr std::size_t kDefaultPoints2D = 150;
inline constexpr double kEnergyClip = 2.0 - 1e-6;

struct Axis {
    std::string param;  // v, w, u, L or E
    double min = 0.0;
    double max = 0.0;
    std::size_t points = kDefaultPoints1D;
};

struct SweepConfig {
    std::string name = "sweep";
    DoubleDotSpec spec;
    double energy = 0.0;  // used when E is not an axis
    Axis axis1;
    std::optional<Axis> axis2;
    std::vector<Observable> observables;
    std::string output_dir = ".";
    bool write_csv = true;
    bool write_json = true;
    bool write_amplitudes = false;
    unsigned threads = 0;  // 0: hardware concurrency

    bool wants(Observable o) const {
        for (Observable x : observables)
            if (x == o) return true;
        return false;
    }
};

struct FigurePreset {
    std::string id;
    std::string caption;
    std::vector<SweepConfig> panels;
};

namespace detail {

inline DoubleDotSpec make_spec(std::vector<double> levels, double wire_a, double wire_b, double length, double u, double v) {
    DoubleDotSpec s;
    s.left_levels = levels;
    s.right_levels = std::move(levels);
    s.wire = {wire_a, wire_b};
    s.length = length;
    s.u = u;
    s.v = v;
    s.w = v;
    return s;
}

inline SweepConfig line(std::string name, DoubleDotSpec spec, double energy, Axis axis, std::vector<Observable> obs) {
    SweepConfig c;
    c.name = std::move(name);
    c.spec = std::move(spec);
    c.energy = energy;
    c.axis1 = std::move(axis);
    c.observables = std::move(obs);
    return c;
}

inline SweepConfig map2d(std::string name, DoubleDotSpec spec, double energy, Axis a1, Axis a2) {
    SweepConfig c = line(std::move(name), std::move(spec), energy, std::move(a1), {Observable::Transmission});
    c.axis2 = std::move(a2);
    return c;
}

inline Axis ax(const std::string& p, double lo, double hi, std::size_t n) { return {p, lo, hi, n}; }

}  // namespace detail

inline const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids = {"fig1", "fig2",  "fig3",  "fig4",  "fig5",  "fig6",  "fig7",
                                                 "fig8", "fig9", "fig10", "fig11", "fig12", "fig13", "fig14"};
    return ids;
}

/// Sweep panels for a figure id. Panel names are <id><suffix>.
inline FigurePreset figure_preset(const std::string& id) {
    using detail::ax;
    using detail::line;
    using detail::make_spec;
    using detail::map2d;
    const auto eig = std::vector<Observable>{Observable::Eigenvalues, Observable::Rigidity};
    const auto tr = std::vector<Observable>{Observable::Transmission};
    const std::size_t n1 = kDefaultPoints1D;
    const std::size_t n2 = kDefaultPoints2D;
    const double e_lo = -kEnergyClip, e_hi = kEnergyClip;
    const double sqrt2 = std::sqrt(2.0);

    // one level per dot, eps(L) = 2 - L/5, u = 1/4
    const DoubleDotSpec one = make_spec({1.0}, 2.0, -0.2, 3.0, 0.25, 0.9013);
    // two levels per dot
    const std::vector<double> two = {0.5, 1.0};
    const std::vector<double> five = {0.25, 1.0 / 3.0, 0.5, 0.75, 1.0};

    FigurePreset f;
    f.id = id;
    if (id == "fig1") {
        f.caption = "Re z_k and Im z_k versus v at E = E_c = 0.9847; eps_1 = 1, eps(L) = 2 - L/5, u = 1/4, L = 3; "
                    "z_1 and z_3 coalesce at v = v_c = 0.9013.";
        f.panels.push_back(line("fig1", one, 0.9847, ax("v", 0.0, 1.4, n1), eig));
    } else if (id == "fig2") {
        f.caption = "T versus v and E; eps_1 = 1, eps(L) = 2 - L/5, L = 3. (a) u = 1/4, branch point v_c = 0.9013, "
                    "E_c = 0.9847. (b) u = u_c = 0.1443, E_k = E_l = E_c = 7/5.";
        DoubleDotSpec a = one;
        DoubleDotSpec b = one;
        b.u = 0.1443;
        f.panels.push_back(map2d("fig2a", a, 0.0, ax("v", 0.0, 1.4, n2), ax("E", e_lo, e_hi, n2)));
        f.panels.push_back(map2d("fig2b", b, 0.0, ax("v", 0.0, 1.4, n2), ax("E", e_lo, e_hi, n2)));
    } else if (id == "fig3") {
        f.caption = "Re z_k and Im z_k versus v at E = E_c = 0; u = 1/4, L = 10, eps_1 = 0, eps(L) = 2 - L/5; "
                    "v_c = 8^{1/4} u^{1/2} = 0.8409.";
        f.panels.push_back(line("fig3", make_spec({0.0}, 2.0, -0.2, 10.0, 0.25, 0.8409), 0.0, ax("v", 0.0, 1.4, n1), eig));
    } else if (id == "fig4") {
        f.caption = "(a) T versus v and E for the system of fig3. (b) T versus E at v = 0.2, 0.53 and 0.83; "
                    "at v = 0.53 the double dot is a perfect filter.";
        const DoubleDotSpec s = make_spec({0.0}, 2.0, -0.2, 10.0, 0.25, 0.53);
        f.panels.push_back(map2d("fig4a", s, 0.0, ax("v", 0.0, 1.4, n2), ax("E", e_lo, e_hi, n2)));
        for (const auto& [suffix, v] : std::vector<std::pair<std::string, double>>{{"b_v0.2", 0.2}, {"b_v0.53", 0.53}, {"b_v0.83", 0.83}}) {
            DoubleDotSpec sv = s;
            sv.v = sv.w = v;
            f.panels.push_back(line("fig4" + suffix, sv, 0.0, ax("E", e_lo, e_hi, n1), tr));
        }
    } else if (id == "fig5") {
        f.caption = "Re z_k and Im z_k versus L for the system of fig1 with v = 1; E_c = +/- sqrt(2), "
                    "L_1c = 1.4645, L_2c = 8.5355. E = -sqrt(2) - 0.1, -sqrt(2), -sqrt(2) + 0.1, sqrt(2).";
        DoubleDotSpec s = one;
        s.v = s.w = 1.0;
        const std::vector<std::pair<std::string, double>> energies = {
            {"ab", -sqrt2 - 0.1}, {"cd", -sqrt2}, {"ef", -sqrt2 + 0.1}, {"gh", sqrt2}};
        for (const auto& [suffix, e] : energies) f.panels.push_back(line("fig5" + suffix, s, e, ax("L", 0.0, 10.0, n1), eig));
    } else if (id == "fig6") {
        f.caption = "(a) T versus E and v for L_c = 8.5355. (b) T versus E at v = 0.85: one narrow peak on the "
                    "background of two broad resonances. eps_1 = 1, eps(L) = 2 - L/5, u = 1/4.";
        DoubleDotSpec s = one;
        s.length = 8.5355;
        f.panels.push_back(map2d("fig6a", s, 0.0, ax("v", 0.0, 1.4, n2), ax("E", e_lo, e_hi, n2)));
        s.v = s.w = 0.85;
        f.panels.push_back(line("fig6b", s, 0.0, ax("E", e_lo, e_hi, n1), tr));
    } else if (id == "fig7") {
        f.caption = "Re z_k and Im z_k versus E for the system of fig1 with v = 1; E_c = sqrt(2), L_c = 1.4645. "
                    "L = L_c - 0.1, L_c, L_c + 0.1.";
        DoubleDotSpec s = one;
        s.v = s.w = 1.0;
        const double lc = 1.4645;
        const std::vector<std::pair<std::string, double>> lengths = {{"ab", lc - 0.1}, {"cd", lc}, {"ef", lc + 0.1}};
        for (const auto& [suffix, l] : lengths) {
            DoubleDotSpec sl = s;
            sl.length = l;
            f.panels.push_back(line("fig7" + suffix, sl, 0.0, ax("E", e_lo, e_hi, n1), eig));
        }
    } else if (id == "fig8") {
        f.caption = "Left: eigenvalues versus w for v = 0.1, E = 1.0 (a); v = 0.06, E = 0.92 (c); v = 0.1, E = 1.26 (e). "
                    "Right: T versus v and w at the same energies. L = 4, u = 0.15, eps_1 = 1, eps(L) = 2 - L/5.";
        DoubleDotSpec base = make_spec({1.0}, 2.0, -0.2, 4.0, 0.15, 0.1);
        const std::vector<std::tuple<std::string, double, double>> cases = {{"a", 0.1, 1.0}, {"c", 0.06, 0.92}, {"e", 0.1, 1.26}};
        for (const auto& [suffix, v, e] : cases) {
            DoubleDotSpec s = base;
            s.v = v;
            s.w = v;
            f.panels.push_back(line("fig8" + suffix, s, e, ax("w", 0.0, 1.4, n1), eig));
        }
        const std::vector<std::pair<std::string, double>> maps = {{"b", 1.0}, {"d", 0.92}, {"f", 1.26}};
        for (const auto& [suffix, e] : maps) f.panels.push_back(map2d("fig8" + suffix, base, e, ax("v", 0.0, 1.4, n2), ax("w", 0.0, 1.4, n2)));
    } else if (id == "fig9") {
        f.caption = "T versus E and L for v = 0.25 (a), 0.5 (b), 0.75 (c), 1.0 (d). Wire eps = 3/2 - L/7; "
                    "eps_1 = 1/2, eps_2 = 1, u = 0.25. Transmission zero at E_0 = 3/4 independent of L and v.";
        const std::vector<std::pair<std::string, double>> vs = {{"a", 0.25}, {"b", 0.5}, {"c", 0.75}, {"d", 1.0}};
        for (const auto& [suffix, v] : vs)
            f.panels.push_back(map2d("fig9" + suffix, make_spec(two, 1.5, -1.0 / 7.0, 2.0, 0.25, v), 0.0,
                                     ax("L", 0.0, 10.0, n2), ax("E", e_lo, e_hi, n2)));
    } else if (id == "fig10") {
        f.caption = "Re z_k and Im z_k of the five eigenvalues versus L; v = 0.35 (a, b), 0.8 (c, d), 1.1 (e, f). "
                    "u = 0.25, E = 0.25, eps = 3/2 - L/7, eps_1 = 1/2, eps_2 = 1.";
        const std::vector<std::pair<std::string, double>> vs = {{"ab", 0.35}, {"cd", 0.8}, {"ef", 1.1}};
        for (const auto& [suffix, v] : vs)
            f.panels.push_back(line("fig10" + suffix, make_spec(two, 1.5, -1.0 / 7.0, 2.0, 0.25, v), 0.25, ax("L", 0.0, 10.0, n1), eig));
    } else if (id == "fig11") {
        f.caption = "T versus v and E at L = 2 (a) and 5 (b); u = 0.25, eps(L) = 2 - L/4, eps_1 = 1/2, eps_2 = 1. "
                    "Transmission zero at E_0 = 3/4 independent of v and L.";
        for (const auto& [suffix, l] : std::vector<std::pair<std::string, double>>{{"a", 2.0}, {"b", 5.0}})
            f.panels.push_back(map2d("fig11" + suffix, make_spec(two, 2.0, -0.25, l, 0.25, 0.5), 0.0, ax("v", 0.0, 1.4, n2),
                                     ax("E", e_lo, e_hi, n2)));
    } else if (id == "fig12") {
        f.caption = "Re z_k and Im z_k of the five eigenvalues versus v; L = 0.7 (a, b), 2 (c, d), 3.03 (e, f). "
                    "u = 0.25, E = 0.75, eps(L) = 2 - L/4, eps_1 = 1/2, eps_2 = 1.";
        const std::vector<std::pair<std::string, double>> ls = {{"ab", 0.7}, {"cd", 2.0}, {"ef", 3.03}};
        for (const auto& [suffix, l] : ls)
            f.panels.push_back(line("fig12" + suffix, make_spec(two, 2.0, -0.25, l, 0.25, 0.5), 0.75, ax("v", 0.0, 1.4, n1), eig));
    } else if (id == "fig13") {
        f.caption = "T versus v and E; L = 1.5, u = 0.2, five levels per dot at 1/4, 1/3, 1/2, 3/4, 1, wire eps = 1 - L/8. "
                    "The four transmission zeros are independent of v and L.";
        f.panels.push_back(map2d("fig13", make_spec(five, 1.0, -0.125, 1.5, 0.2, 0.5), 0.0, ax("v", 0.0, 1.4, n2),
                                 ax("E", e_lo, e_hi, n2)));
    } else if (id == "fig14") {
        f.caption = "The 11 eigenvalues z_k versus v at E = 0; L = 1.5, u = 0.2, five levels per dot at "
                    "1/4, 1/3, 1/2, 3/4, 1, wire eps = 1 - L/8.";
        f.panels.push_back(line("fig14", make_spec(five, 1.0, -0.125, 1.5, 0.2, 0.5), 0.0, ax("v", 0.0, 1.4, n1), eig));
    } else {
        throw Error(ErrorCode::UnknownFigure, "unknown figure id '" + id + "'");
    }
    return f;
}

/// Base system of a figure: the first panel's spec.
inline DoubleDotSpec preset_spec(const std::string& id) { return figure_preset(id).panels.front().spec; }

}  // namespace dqd

#endif
