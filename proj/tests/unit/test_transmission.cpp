#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dqd/transmission.hpp"
#include "oracles.hpp"

using Catch::Approx;

TEST_CASE("spectral and resolvent amplitudes agree away from coalescences", "[transmission]") {
    for (const auto& s : {oracle::fig1(0.4), oracle::fig9(0.6, 4.0), oracle::fig13(0.3)}) {
        for (double e = -1.95; e < 1.96; e += 0.05) {
            const auto res = dqd::transmission_resolvent(s, e);
            const auto spec = dqd::transmission_spectral(s, e);
            CHECK(spec.method == dqd::TransmissionMethod::Spectral);
            CHECK(res.method == dqd::TransmissionMethod::Resolvent);
            CHECK(std::abs(res.amplitude - spec.amplitude) < 1e-10);
            CHECK(res.residual < 1e-12);
        }
    }
}

TEST_CASE("transmission matches plane-wave matching on the full chain", "[transmission]") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> e_dist(-1.9, 1.9), v_dist(0.05, 1.3), l_dist(0.0, 10.0);
    for (int i = 0; i < 40; ++i) {
        const double e = e_dist(rng);
        for (auto s : {oracle::fig1(v_dist(rng)), oracle::fig9(v_dist(rng), l_dist(rng)), oracle::fig13(v_dist(rng))}) {
            s.w = v_dist(rng);
            const auto got = dqd::transmission(s, e);
            const auto ref = oracle::wave_matching(s, e);
            CHECK(got.probability == Approx(std::norm(ref.t)).margin(1e-10));
            const auto sm = dqd::scattering_matrix(s, e);
            CHECK(std::abs(sm.r()) == Approx(std::abs(ref.r)).margin(1e-10));
        }
    }
}

TEST_CASE("scattering matrix is unitary and symmetric", "[transmission]") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> e_dist(-1.99, 1.99), c_dist(0.0, 2.0), lvl(-1.5, 1.5), l_dist(0.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        dqd::DoubleDotSpec s;
        const int nl = 1 + i % 3, nr = 1 + (i / 3) % 3;
        for (int k = 0; k < nl; ++k) s.left_levels.push_back(lvl(rng));
        for (int k = 0; k < nr; ++k) s.right_levels.push_back(lvl(rng));
        s.wire = {lvl(rng), -0.2};
        s.length = l_dist(rng);
        s.u = c_dist(rng) / 2;
        s.v = c_dist(rng);
        s.w = c_dist(rng);
        const double e = e_dist(rng);
        const auto sm = dqd::scattering_matrix(s, e);
        CHECK(sm.unitarity_defect() < 1e-10);
        CHECK(std::abs(sm.t() - sm.t_prime()) < 1e-10);
        const auto tp = dqd::transmission(s, e);
        CHECK(tp.probability <= 1.0 + 1e-10);
        CHECK(std::abs(tp.amplitude - sm.t()) < 1e-10);
    }
}

TEST_CASE("transmission is symmetric under v <-> w", "[transmission]") {
    for (double v = 0.1; v < 1.5; v += 0.2)
        for (double w = 0.1; w < 1.5; w += 0.3) {
            auto a = oracle::fig1(v);
            a.w = w;
            auto b = oracle::fig1(w);
            b.w = v;
            for (double e : {-0.5, 0.3, 0.9847, 1.7})
                CHECK(std::abs(dqd::transmission(a, e).probability - dqd::transmission(b, e).probability) < 1e-12);
        }
}

TEST_CASE("uncoupled leads give full reflection", "[transmission]") {
    const auto s = oracle::fig1(0.0);
    CHECK(dqd::transmission(s, 0.5).probability == 0.0);
    const auto sm = dqd::scattering_matrix(s, 0.5);
    CHECK(sm.r() == std::complex<double>(1.0, 0.0));
}

TEST_CASE("resolvent path near the coalescence", "[transmission]") {
    const double v = 0.901351638;
    const double e = 0.984731;
    const auto s = oracle::fig1(v);
    const auto tp = dqd::transmission(s, e);
    CHECK(tp.method == dqd::TransmissionMethod::Resolvent);
    CHECK(tp.probability == Approx(oracle::transmission(s, e)).margin(1e-10));
}

TEST_CASE("transmission outside the band", "[transmission]") {
    try {
        (void)dqd::transmission(oracle::fig1(), 2.0);
        FAIL("expected EnergyOutOfBand");
    } catch (const dqd::Error& e) {
        CHECK(e.code() == dqd::ErrorCode::EnergyOutOfBand);
    }
}

TEST_CASE("two-level dots: zero at the mean level", "[transmission]") {
    const auto z = dqd::predict_transmission_zeros(oracle::fig9());
    REQUIRE(z.energies.size() == 1);
    CHECK(z.energies[0] == Approx(0.75));
    CHECK(z.multiplicities[0] == 1);
    for (double v : {0.25, 0.5, 0.75, 1.0})
        for (double l : {2.0, 5.0}) {
            CHECK(dqd::transmission(oracle::fig9(v, l), 0.75).probability < 1e-8);
            CHECK(dqd::transmission(oracle::fig11(v, l), 0.75).probability < 1e-8);
        }
}

TEST_CASE("five-level dots: four zeros", "[transmission]") {
    const auto z = dqd::predict_transmission_zeros(oracle::fig13());
    const std::vector<double> expected{0.28475041617682506, 0.4204947527538167, 0.6468066892295833, 0.914614808506442};
    REQUIRE(z.energies.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(z.energies[i] == Approx(expected[i]).epsilon(1e-13));
        for (double v : {0.3, 0.8}) CHECK(dqd::transmission(oracle::fig13(v), z.energies[i]).probability < 1e-8);
    }
}

TEST_CASE("degenerate levels are zeros of lower multiplicity", "[transmission]") {
    auto s = oracle::fig9();
    s.left_levels = s.right_levels = {0.2, 0.2, 0.8};
    const auto z = dqd::predict_transmission_zeros(s);
    REQUIRE(z.energies.size() == 2);
    CHECK(z.energies[0] == Approx(0.2));
    CHECK(z.multiplicities[0] == 1);
    CHECK(z.energies[1] == Approx(0.6));
    CHECK(dqd::transmission(s, z.energies[1]).probability < 1e-8);
}

TEST_CASE("unequal dots collect the zeros of each dot", "[transmission]") {
    auto s = oracle::fig9();
    s.right_levels = {0.0, 1.0};
    const auto z = dqd::predict_transmission_zeros(s);
    REQUIRE(z.energies.size() == 2);
    CHECK(z.energies[0] == Approx(0.5));
    CHECK(z.energies[1] == Approx(0.75));
    for (double e : z.energies) CHECK(dqd::transmission(s, e).probability < 1e-8);
}

TEST_CASE("single-level dots have no predicted zeros", "[transmission]") {
    try {
        (void)dqd::predict_transmission_zeros(oracle::fig1());
        FAIL("expected NoZeros");
    } catch (const dqd::Error& e) {
        CHECK(e.code() == dqd::ErrorCode::NoZeros);
    }
}
