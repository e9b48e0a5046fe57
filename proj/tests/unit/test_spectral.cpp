#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "dqd/spectral.hpp"
#include "oracles.hpp"

using Catch::Approx;
using cd = std::complex<double>;

namespace {

Eigen::MatrixXcd random_complex_symmetric(std::mt19937& rng, int n) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = m(j, i) = cd(g(rng), g(rng));
    return m;
}

}  // namespace

TEST_CASE("eigendecompose: residual and biorthonormality", "[spectral]") {
    std::mt19937 rng(11);
    for (int n : {1, 2, 3, 5, 11, 24}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto h = random_complex_symmetric(rng, n);
            const auto es = dqd::eigendecompose<double>(h);
            REQUIRE(es.size() == static_cast<std::size_t>(n));
            CHECK_FALSE(es.any_defective());
            const double scale = h.cwiseAbs().maxCoeff();
            for (int k = 0; k < n; ++k) {
                const auto v = es.right_vectors.col(k);
                CHECK((h * v - es.eigenvalues(k) * v).norm() < 1e-11 * scale * v.norm());
                if (k > 0) CHECK(es.eigenvalues(k).real() >= es.eigenvalues(k - 1).real());
            }
            const Eigen::MatrixXcd gram = es.right_vectors.transpose() * es.right_vectors;
            CHECK((gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("eigendecompose agrees with a general-purpose solver", "[spectral]") {
    std::mt19937 rng(3);
    const auto h = random_complex_symmetric(rng, 9);
    const auto es = dqd::eigendecompose<double>(h);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ref(h);
    for (int k = 0; k < 9; ++k) {
        double best = 1e300;
        for (int j = 0; j < 9; ++j) best = std::min(best, std::abs(ref.eigenvalues()(j) - es.eigenvalues(k)));
        CHECK(best < 1e-12);
    }
}

TEST_CASE("eigendecompose in extended precision", "[spectral]") {
    const auto s = oracle::fig13(0.6).cast<long double>();
    const auto es = dqd::eigendecompose(dqd::build_effective_hamiltonian(s, dqd::channel_from_energy(0.2L)));
    const auto ed = dqd::eigendecompose(dqd::build_effective_hamiltonian(oracle::fig13(0.6), dqd::channel_from_energy(0.2)));
    for (Eigen::Index k = 0; k < 11; ++k) CHECK(std::abs(cd(es.eigenvalues(k)) - ed.eigenvalues(k)) < 1e-12);
}

TEST_CASE("Jordan block has vanishing rigidity", "[spectral]") {
    // complex symmetric 2x2 with a double eigenvalue and one eigenvector: [[1, i], [i, -1]]
    Eigen::MatrixXcd h(2, 2);
    h << cd(1, 0), cd(0, 1), cd(0, 1), cd(-1, 0);
    const auto es = dqd::eigendecompose<double>(h);
    CHECK(std::abs(es.eigenvalues(0)) < 1e-7);
    CHECK(es.min_rigidity() < 1e-6);
}

TEST_CASE("phase rigidity", "[spectral]") {
    Eigen::VectorXcd real(3);
    real << 1.0, -2.0, 0.5;
    CHECK(dqd::phase_rigidity(real) == Approx(1.0));
    Eigen::VectorXcd null(2);
    null << cd(1, 0), cd(0, 1);
    CHECK(dqd::phase_rigidity(null) == Approx(0.0).margin(1e-15));
    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(3);
    try {
        (void)dqd::phase_rigidity(zero);
        FAIL("expected ZeroVector");
    } catch (const dqd::Error& e) {
        CHECK(e.code() == dqd::ErrorCode::ZeroVector);
    }
}

TEST_CASE("analytic three-state eigenvalues match the numeric solver", "[spectral]") {
    for (double e = -1.9; e < 1.95; e += 0.1) {
        for (double v = 0.05; v < 1.5; v += 0.1) {
            const auto s = oracle::fig1(v);
            const auto ch = dqd::channel_from_energy(e);
            const auto an = dqd::analytic_three_state(s, ch);
            const auto es = dqd::eigendecompose(dqd::build_effective_hamiltonian(s, ch));
            for (cd z : {an.z1, an.z2, an.z3}) {
                double best = 1e300;
                for (Eigen::Index k = 0; k < 3; ++k) best = std::min(best, std::abs(es.eigenvalues(k) - z));
                CHECK(best < 1e-10);
            }
            CHECK(std::abs(an.z2 - (1.0 - v * v * ch.phase)) < 1e-15);
        }
    }
}

TEST_CASE("analytic eigenvectors are biorthonormal eigenvectors", "[spectral]") {
    const auto s = oracle::fig1(0.7);
    const auto ch = dqd::channel_from_energy(0.6);
    const auto an = dqd::analytic_three_state(s, ch);
    const auto h = dqd::build_effective_hamiltonian(s, ch).matrix;
    Eigen::VectorXcd v1(3), v3(3);
    v1 << an.a, 0.0, an.b;
    v3 << an.b, 0.0, -an.a;
    CHECK((h * v1 - an.z1 * v1).norm() < 1e-13);
    CHECK((h * v3 - an.z3 * v3).norm() < 1e-13);
    CHECK(std::abs(an.a * an.a + an.b * an.b - 1.0) < 1e-13);
    CHECK(std::abs(an.xi * an.xi - (an.omega * an.omega + an.f * an.f)) < 1e-14);
    const auto [w1, w3] = dqd::three_state_contact_weights(an.eta, an.delta_eps);
    CHECK(w1 + w3 == Approx(0.5));
}

TEST_CASE("analytic forms need the symmetric one-level model", "[spectral]") {
    auto s = oracle::fig9();
    CHECK_THROWS_AS(dqd::analytic_three_state(s, dqd::channel_from_energy(0.1)), dqd::Error);
    auto t = oracle::fig1();
    t.w = 0.1;
    try {
        (void)dqd::analytic_three_state(t, dqd::channel_from_energy(0.1));
        FAIL("expected NotApplicable");
    } catch (const dqd::Error& e) {
        CHECK(e.code() == dqd::ErrorCode::NotApplicable);
    }
}

TEST_CASE("trajectories: decoupled state keeps its label through the coalescence", "[spectral]") {
    const auto ch = dqd::channel_from_energy(0.9847);
    std::vector<dqd::EigenSet<double>> sweep;
    std::vector<double> vs;
    for (int i = 0; i < 200; ++i) {
        const double v = 1.4 * i / 199.0;
        vs.push_back(v);
        sweep.push_back(dqd::eigendecompose(dqd::build_effective_hamiltonian(oracle::fig1(v), ch)));
    }
    const auto tr = dqd::track_trajectories<double>(sweep);
    REQUIRE(tr.labels() == 3);
    REQUIRE(tr.steps() == 200);
    for (std::size_t i = 0; i < 200; ++i) {
        CHECK(std::abs(tr.values[1][i] - (1.0 - vs[i] * vs[i] * ch.phase)) < 1e-13);
        // labels 0 and 2 are z_1 and z_3 of the closed forms
        const auto an = dqd::analytic_three_state(oracle::fig1(vs[i]), ch);
        const auto pair_a = std::abs(tr.values[0][i] - an.z1) + std::abs(tr.values[2][i] - an.z3);
        const auto pair_b = std::abs(tr.values[0][i] - an.z3) + std::abs(tr.values[2][i] - an.z1);
        CHECK(std::min(pair_a, pair_b) < 1e-10);
    }
    // the outer states start at the closed levels
    CHECK(tr.values[0][0].real() == Approx(1.2 - 0.406201920231798));
    CHECK(tr.values[2][0].real() == Approx(1.2 + 0.406201920231798));
}

TEST_CASE("trajectories: continuity away from coalescences", "[spectral]") {
    const auto ch = dqd::channel_from_energy(0.25);
    std::vector<dqd::EigenSet<double>> sweep;
    for (int i = 0; i <= 300; ++i) {
        const double l = 10.0 * i / 300.0;
        sweep.push_back(dqd::eigendecompose(dqd::build_effective_hamiltonian(oracle::fig9(0.35, l), ch)));
    }
    const auto tr = dqd::track_trajectories<double>(sweep);
    for (std::size_t l = 0; l < tr.labels(); ++l)
        for (std::size_t i = 1; i < tr.steps(); ++i) CHECK(std::abs(tr.values[l][i] - tr.values[l][i - 1]) < 0.05);
}

TEST_CASE("labelled eigenset follows the closed levels", "[spectral]") {
    const auto s = oracle::fig13(0.05);
    const auto ch = dqd::channel_from_energy(0.4);
    const auto lab = dqd::labelled_eigenset(s, ch);
    CHECK_FALSE(lab.ambiguous);
    CHECK(lab.set.label_order == dqd::LabelOrder::Continuation);
    const auto cs = dqd::closed_spectrum(s);
    for (Eigen::Index k = 0; k < 11; ++k) CHECK(std::abs(lab.set.eigenvalues(k).real() - cs.eigenvalues(k)) < 5e-3);
}

TEST_CASE("fixed points: decoupled state", "[spectral]") {
    // E = Re(eps_1 - v^2 e^{ik}) = 1 + v^2 E / 2
    const double v = 0.90135;
    const auto roots = dqd::solve_fixed_points(oracle::fig1(v), 1);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0].position == Approx(1.0 / (1.0 - v * v / 2.0)).epsilon(1e-12));
    CHECK(roots[0].residual < 1e-12);
    const auto ch = dqd::channel_from_energy(roots[0].position);
    CHECK(roots[0].width_signed == Approx(-2.0 * v * v * ch.sin_k()).epsilon(1e-10));
    CHECK(roots[0].width_decay == Approx(2.0 * v * v * ch.sin_k()).epsilon(1e-10));
    CHECK_FALSE(roots[0].at_branch_point);
}

TEST_CASE("fixed points: closed system returns the closed levels", "[spectral]") {
    const auto s = oracle::fig9(0.0, 3.0);
    const auto cs = dqd::closed_spectrum(s);
    for (std::size_t label = 0; label < 5; ++label) {
        const auto roots = dqd::solve_fixed_points(s, label);
        REQUIRE(roots.size() == 1);
        CHECK(roots[0].position == Approx(cs.eigenvalues(static_cast<Eigen::Index>(label))).margin(1e-10));
        CHECK(roots[0].width_signed == 0.0);
    }
}

TEST_CASE("fixed points: no root inside the band gives an empty list", "[spectral]") {
    auto s = oracle::fig1(0.0);
    s.left_levels = s.right_levels = {3.0};
    CHECK(dqd::solve_fixed_points(s, 2).empty());
}

TEST_CASE("fixed points: state label out of range", "[spectral]") {
    CHECK_THROWS_AS(dqd::solve_fixed_points(oracle::fig1(), 3), dqd::Error);
}
