#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wiredelay/sde.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "wiredelay/noise.hpp"
#include "wiredelay/stats.hpp"

using namespace wiredelay;

namespace {

ModelParams unit_xi(int n, int beta) { return ModelParams(n, SymmetryClass(beta), 1.0, 8.0); }

SdeConfig quiet() {
    SdeConfig cfg;
    cfg.noise_scale = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("argument validation: lengths, strides, schemes") {
    const ModelParams p = unit_xi(2, 2);
    SdeConfig cfg;
    CHECK_THROWS_AS((void)integrate_lambda(p, 0.00025, cfg, RngStream(1, 0)),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)integrate_lambda(p, -1.0, cfg, RngStream(1, 0)), std::invalid_argument);
    CHECK_THROWS_AS((void)integrate_lambda(p, 0.1, cfg, RngStream(1, 0), 7), std::invalid_argument);
    CHECK_THROWS_AS((void)integrate_lambda(p, 0.1, cfg, RngStream(1, 0), -1),
                    std::invalid_argument);
    SdeConfig ito = cfg;
    ito.scheme = SdeScheme::ItoEuler;
    CHECK_THROWS_AS((void)integrate_stilde(p, 0.1, ito, RngStream(1, 0)), std::invalid_argument);
    CHECK_THROWS_AS((void)integrate_coupled(p, 0.1, ito, RngStream(1, 0)), std::invalid_argument);
    CHECK_THROWS_AS((void)integrate_rider_valko(0.0, 2, SymmetryClass(1), 0.1, cfg, RngStream(1, 0)),
                    std::invalid_argument);

    const Trajectory empty = integrate_lambda(p, 0.0, cfg, RngStream(1, 0));
    REQUIRE(empty.states.size() == 1);
    CHECK((empty.states[0] - Mat::Identity(2, 2)).norm() == 0.0);
    CHECK(exp_functional_raw(p, 0.0, cfg, RngStream(1, 0)).norm() == 0.0);
}

TEST_CASE("trajectory recording grid and stream provenance") {
    const ModelParams p = unit_xi(2, 1);
    SdeConfig cfg;
    const Trajectory t = integrate_lambda(p, 0.1, cfg, RngStream(99, 3), 25);
    REQUIRE(t.grid.size() == 5);  // x = 0, .025, .05, .075, .1
    CHECK(t.grid[1] == doctest::Approx(0.025));
    CHECK(t.grid.back() == doctest::Approx(0.1));
    CHECK(t.states.size() == 5);
    CHECK(t.master_seed == 99);
    CHECK(t.stream_id == 3);

    const Trajectory ends = integrate_lambda(p, 0.1, cfg, RngStream(99, 3));
    REQUIRE(ends.states.size() == 2);
    // endpoint state must match the strided run, which consumed identical noise
    CHECK((ends.states.back() - t.states.back()).norm() == 0.0);
}

TEST_CASE("deterministic limits: all flows with the noise turned off") {
    const ModelParams p = unit_xi(2, 1);  // mu = 3/2
    const double mu = p.mu();
    const SdeConfig cfg = quiet();
    const double x = 1.0;

    const Trajectory t = integrate_lambda(p, x, cfg, RngStream(1, 1));
    CHECK((t.states.back() - std::exp(-mu * x) * Mat::Identity(2, 2)).norm() < 1e-5);

    SdeConfig ito = cfg;
    ito.scheme = SdeScheme::ItoEuler;
    const Trajectory ti = integrate_lambda(p, x, ito, RngStream(1, 1));
    CHECK((ti.states.back() - std::exp(-mu * x) * Mat::Identity(2, 2)).norm() < 1e-2);

    const Mat q = integrate_qtilde_raw(p, x, cfg, RngStream(1, 2));
    const double q_exact = (1.0 - std::exp(-2.0 * mu * x)) / (2.0 * mu);
    CHECK((q - q_exact * Mat::Identity(2, 2)).norm() < 1e-5);

    const Mat f = exp_functional_raw(p, x, cfg, RngStream(1, 3));
    CHECK((f - q_exact * Mat::Identity(2, 2)).norm() < 1e-5);

    // the scattering factor stays at its closed-channel value and the delay
    // matrix grows exactly ballistically
    const StildeResult s = integrate_stilde(p, x, cfg, RngStream(1, 4));
    CHECK((s.s.mat() + Mat::Identity(2, 2)).norm() < 1e-12);
    CHECK(s.unitarity_warnings == 0);

    const CoupledResult c = integrate_coupled(p, x, cfg, RngStream(1, 5));
    CHECK((c.u_left.mat() - Complex(0, 1) * Mat::Identity(2, 2)).norm() < 1e-12);
    CHECK((c.qtilde.mat() - (x / p.k) * Mat::Identity(2, 2)).norm() < 1e-10);

    const GinibreFlowResult g = integrate_rider_valko(mu, 2, p.beta, x, cfg, RngStream(1, 6));
    CHECK((g.path.states.back() - std::exp(-mu * x) * Mat::Identity(2, 2)).norm() < 1e-5);
    CHECK((g.integral - q_exact * Mat::Identity(2, 2)).norm() < 1e-5);
}

TEST_CASE("deterministic part converges at second order in the step size") {
    const ModelParams p = unit_xi(2, 2);  // mu = 2
    SdeConfig coarse = quiet();
    SdeConfig fine = quiet();
    fine.dx = 5e-4;
    const double x = 1.0;
    const double exact = std::exp(-p.mu() * x);
    const double e_coarse =
        std::abs(integrate_lambda(p, x, coarse, RngStream(5, 0)).states.back()(0, 0).real() - exact);
    const double e_fine =
        std::abs(integrate_lambda(p, x, fine, RngStream(5, 0)).states.back()(0, 0).real() - exact);
    CHECK(e_coarse / e_fine == doctest::Approx(4.0).epsilon(0.15));

    const double qe = (1.0 - std::exp(-2.0 * p.mu() * x)) / (2.0 * p.mu());
    const double qc = std::abs(integrate_qtilde_raw(p, x, coarse, RngStream(5, 1))(0, 0).real() - qe);
    const double qf = std::abs(integrate_qtilde_raw(p, x, fine, RngStream(5, 1))(0, 0).real() - qe);
    CHECK(qc / qf == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("single-channel law: second moment of the decaying flow is stationary at mu = 1") {
    // At N = 1 the drift exactly balances the noise growth: E[|M|^2] = 1 for all x.
    const double x = 0.5;
    SdeConfig cfg;
    for (int beta : {1, 2}) {
        const ModelParams p = unit_xi(1, beta);
        ScalarAccumulator second;
        for (int t = 0; t < 4000; ++t) {
            const Mat m = integrate_lambda(p, x, cfg, RngStream(20260825, t)).states.back();
            second.add(std::norm(m(0, 0)));
        }
        CHECK(std::abs(second.mean() - 1.0) < 5.0 * second.std_error());

        ScalarAccumulator ginibre_second;
        for (int t = 0; t < 4000; ++t) {
            const Mat m =
                integrate_rider_valko(1.0, 1, p.beta, x, cfg, RngStream(20260826, t)).path.states.back();
            ginibre_second.add(std::norm(m(0, 0)));
        }
        CHECK(std::abs(ginibre_second.mean() - 1.0) < 5.0 * ginibre_second.std_error());
    }
}

TEST_CASE("Ito and Stratonovich schemes agree in law for the delay-matrix flow") {
    const ModelParams p = unit_xi(2, 1);
    const double x = 0.5;
    SdeConfig strat;
    SdeConfig ito;
    ito.scheme = SdeScheme::ItoEuler;
    ScalarAccumulator a, b;
    for (int t = 0; t < 3000; ++t) {
        a.add(integrate_qtilde_raw(p, x, strat, RngStream(31, t)).trace().real());
        b.add(integrate_qtilde_raw(p, x, ito, RngStream(77, t)).trace().real());
    }
    const double exact = 2.0 * x;  // E[tr q] = N x in dimensionless units
    CHECK(std::abs(a.mean() - exact) < 4.0 * a.std_error());
    CHECK(std::abs(b.mean() - exact) < 4.0 * b.std_error());
    const double combined = std::sqrt(a.std_error() * a.std_error() + b.std_error() * b.std_error());
    CHECK(std::abs(a.mean() - b.mean()) < 4.0 * combined);
}

TEST_CASE("delay-matrix flow stays Hermitian positive semidefinite") {
    const ModelParams p = unit_xi(2, 2);
    SdeConfig cfg;
    for (int t = 0; t < 20; ++t) {
        const HermitianMatrix q = integrate_qtilde(p, 1.0, cfg, RngStream(404, t));
        const auto ev = eigvals_hermitian(q);
        CHECK(ev.front() >= -1e-9 * q.trace_real());
    }
}

TEST_CASE("scattering-factor flow returns a unitary matrix, symmetric in the real class") {
    SdeConfig cfg;
    const StildeResult s2 = integrate_stilde(unit_xi(2, 2), 1.0, cfg, RngStream(8, 0));
    CHECK(s2.s.unitarity_residual() < 1e-12);

    const StildeResult s1 = integrate_stilde(unit_xi(2, 1), 1.0, cfg, RngStream(8, 1));
    CHECK(s1.s.unitarity_residual() < 1e-12);
    CHECK((s1.s.mat() - s1.s.mat().transpose()).norm() < 1e-12);
}

TEST_CASE("coupled factorization: product is unitary and transposition-locked in the real class") {
    SdeConfig cfg;
    const CoupledResult c1 = integrate_coupled(unit_xi(2, 1), 0.5, cfg, RngStream(9, 0));
    CHECK((c1.u_right.mat() - c1.u_left.mat().transpose()).norm() < 1e-8);
    const Mat prod = c1.u_left.mat() * c1.u_right.mat();
    CHECK((prod.adjoint() * prod - Mat::Identity(2, 2)).norm() < 1e-10);

    const CoupledResult c2 = integrate_coupled(unit_xi(2, 2), 0.5, cfg, RngStream(9, 1));
    CHECK(c2.u_left.unitarity_residual() < 1e-12);
    CHECK(c2.u_right.unitarity_residual() < 1e-12);
    const auto ev = eigvals_hermitian(c2.qtilde);
    CHECK(ev.front() >= -1e-9 * c2.qtilde.trace_real());
}

TEST_CASE("coupled factorization rejects inadmissible initial splittings") {
    const ModelParams p = unit_xi(2, 2);
    SdeConfig cfg;
    const Mat id = Mat::Identity(2, 2);
    CHECK_THROWS_AS(
        (void)integrate_coupled_from(p, 0.1, cfg, RngStream(1, 0), 2.0 * id, -0.5 * id),
        std::invalid_argument);
    CHECK_THROWS_AS((void)integrate_coupled_from(p, 0.1, cfg, RngStream(1, 0), id, id),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)integrate_coupled_from(p, 0.1, cfg, RngStream(1, 0), id, Mat::Identity(3, 3)),
                    std::invalid_argument);
}

TEST_CASE("delay-matrix law does not depend on the initial unitary splitting") {
    const ModelParams p = unit_xi(2, 2);
    const double L = 1.0;
    SdeConfig cfg;
    // build a random unitary U and split the closed-channel value as U, -U†
    RngStream seeder(515, 0);
    Mat g;
    fill_ginibre_increment(NoiseSpec(2, SymmetryClass(2), 1.0), seeder, g);
    const Mat u = unitarize(g).mat();
    const Mat u_left0 = u;
    const Mat u_right0 = -u.adjoint();

    ScalarAccumulator def, alt;
    for (int t = 0; t < 1200; ++t) {
        def.add(integrate_coupled(p, L, cfg, RngStream(616, t)).qtilde.trace_real());
        alt.add(integrate_coupled_from(p, L, cfg, RngStream(717, t), u_left0, u_right0)
                    .qtilde.trace_real());
    }
    const double combined =
        std::sqrt(def.std_error() * def.std_error() + alt.std_error() * alt.std_error());
    CHECK(std::abs(def.mean() - alt.mean()) < 4.0 * combined);
    const double ballistic = p.n_channels * L / p.k;
    CHECK(std::abs(def.mean() - ballistic) < 4.0 * def.std_error());
}

TEST_CASE("Lyapunov spectrum: deterministic, noise-only, and full-flow rates") {
    SdeConfig cfg;
    CHECK_THROWS_AS((void)lyapunov_spectrum(unit_xi(2, 2), 10.0, cfg, RngStream(1, 0)),
                    std::invalid_argument);

    // drift-only: every direction contracts at exactly mu
    const ModelParams p21 = unit_xi(2, 1);
    const auto det = lyapunov_spectrum(p21, 50.0, quiet(), RngStream(2, 0));
    REQUIRE(det.size() == 2);
    CHECK(det[0].value == doctest::Approx(-p21.mu()).epsilon(1e-6));
    CHECK(det[1].value == doctest::Approx(-p21.mu()).epsilon(1e-6));
    CHECK(det[0].std_error < 1e-9);

    // noise-only flow: rates (beta/2)(N - 2n + 1), here +1 and -1
    const ModelParams p22 = unit_xi(2, 2);
    const auto pure = lyapunov_spectrum(p22, 400.0, cfg, RngStream(3, 0), true);
    REQUIRE(pure.size() == 2);
    CHECK(pure[0].value > pure[1].value);
    CHECK(std::abs(pure[0].value - 1.0) < 5.0 * pure[0].std_error);
    CHECK(std::abs(pure[1].value + 1.0) < 5.0 * pure[1].std_error);

    // full flow: -mu + (beta/2)(N - 2n + 1) = -1, -2 for N = 2, beta = 1
    const auto full = lyapunov_spectrum(p21, 400.0, cfg, RngStream(4, 0));
    CHECK(std::abs(full[0].value + 1.0) < 5.0 * full[0].std_error);
    CHECK(std::abs(full[1].value + 2.0) < 5.0 * full[1].std_error);
}

TEST_CASE("identical streams give bitwise identical paths; distinct streams differ") {
    const ModelParams p = unit_xi(2, 2);
    SdeConfig cfg;
    const Mat a = integrate_lambda(p, 0.2, cfg, RngStream(1234, 5)).states.back();
    const Mat b = integrate_lambda(p, 0.2, cfg, RngStream(1234, 5)).states.back();
    CHECK((a - b).norm() == 0.0);
    const Mat c = integrate_lambda(p, 0.2, cfg, RngStream(1234, 6)).states.back();
    CHECK((a - c).norm() > 0.0);
}
