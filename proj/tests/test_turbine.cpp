#include <doctest.h>

#include <random>

#include "tsmrc/turbine.hpp"

using namespace tsmrc;

namespace {
const TurbineParams& params() {
    static TurbineParams p;
    return p;
}
const CoefficientSurface& surface() {
    static CoefficientSurface s = calibrate_surface(params()).surface;
    return s;
}
}  // namespace

TEST_CASE("parameter invariants") {
    CHECK_NOTHROW(params().validate());
    TurbineParams bad = params();
    bad.inertia_rotor = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = params();
    bad.v_rated = 30.0;   // above cut-out
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    // Rated torque x rated speed matches rated mechanical power within 0.5 %.
    const double p = params().rated_generator_torque * params().rated_generator_speed;
    CHECK(std::abs(p / params().rated_mechanical_power - 1.0) < 0.005);
}

TEST_CASE("surface calibration hits the published peak") {
    const CalibrationResult cal = calibrate_surface(params());
    CHECK(cal.surface.cp(7.55, 0.0) == doctest::Approx(0.482).epsilon(1e-3 / 0.482));
    CHECK(cal.residual_value < 1e-3);

    // argmax over lambda lies at lambda_opt within 0.1
    double best_l = 0.0, best = -1.0;
    for (int k = 0; k <= 10000; ++k) {
        const double l = 2.0 + 10.0 * k / 10000.0;
        const double v = cal.surface.cp(l, 0.0);
        if (v > best) {
            best = v;
            best_l = l;
        }
    }
    CHECK(best_l == doctest::Approx(7.55).epsilon(0.1 / 7.55));
}

TEST_CASE("surface bounds on the operating grid") {
    for (int i = 0; i <= 200; ++i) {
        for (int j = 0; j <= 120; ++j) {
            const double lam = 2.0 + 10.0 * i / 200.0;
            const double beta = (30.0 * j / 120.0) * M_PI / 180.0;
            const double v = surface().cp(lam, beta);
            CHECK(v >= 0.0);
            CHECK(v <= 0.593);
        }
    }
}

TEST_CASE("stalled rotor limit and deep feathering") {
    CHECK(surface().cp(1e-6, 0.0) < 1e-4);
    CHECK(surface().cp(1e-6, 0.3) < 1e-4);
    CHECK(surface().cp(7.55, 25.0 * M_PI / 180.0) < 0.10);
}

TEST_CASE("rotor torque anchors") {
    CHECK(rotor_torque(0.0, params().rated_rotor_speed, 0.0, surface(), params()) == 0.0);

    // Oracle: rated mechanical power over rated rotor speed (= n_G T_g,rated).
    const double oracle = params().rated_mechanical_power / params().rated_rotor_speed;
    const double tr = rotor_torque(11.4, params().rated_rotor_speed, 0.0, surface(), params());
    CHECK(tr == doctest::Approx(oracle).epsilon(0.02));

    // Strictly increasing between rated wind and 12 m/s at fixed speed/pitch.
    const double t2 = rotor_torque(12.0, params().rated_rotor_speed, 0.0, surface(), params());
    CHECK(t2 > tr);
}

TEST_CASE("power consistency identity") {
    // T_r omega_r == (rho/2) pi R^2 v^3 c_P, exact through c_Q = c_P/lambda.
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uv(6.0, 24.0), uw(0.7, 1.3), ub(0.0, 0.4);
    for (int k = 0; k < 200; ++k) {
        const double v = uv(rng);
        const double w = uw(rng) * params().rated_rotor_speed;
        const double beta = ub(rng);
        const double lam = w * params().rotor_radius / v;
        if (lam < surface().lambda_min || lam > surface().lambda_max) continue;
        const double lhs = rotor_torque(v, w, beta, surface(), params()) * w;
        const double rhs = 0.5 * params().air_density * M_PI * params().rotor_radius *
                           params().rotor_radius * v * v * v * surface().cp(lam, beta) * lam /
                           (w * params().rotor_radius / v);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("one-mass model") {
    const double tg = params().rated_generator_torque;
    SUBCASE("equilibrium gives zero derivative") {
        const double tr = rotor_torque(15.0, params().rated_rotor_speed, 0.1, surface(), params());
        const double d = derivs_1dof({params().rated_rotor_speed}, {0.1, tr / params().gear_ratio},
                                     15.0, surface(), params());
        CHECK(std::abs(d) < 1e-12);
    }
    SUBCASE("rated operating point is near-steady") {
        const double b0 = steady_state_pitch(11.4, params(), surface());
        const double d = derivs_1dof({params().rated_rotor_speed}, {b0, tg}, 11.4, surface(), params());
        CHECK(std::abs(d) < 1e-3);
    }
    SUBCASE("free acceleration at rated wind") {
        const double tr = rotor_torque(11.4, params().rated_rotor_speed, 0.0, surface(), params());
        const double d = derivs_1dof({params().rated_rotor_speed}, {0.0, 0.0}, 11.4, surface(), params());
        CHECK(d == doctest::Approx(tr / params().lumped_inertia()));
    }
}

TEST_CASE("two-mass model") {
    const double ng = params().gear_ratio;
    const double tg = params().rated_generator_torque;
    SUBCASE("torsional equilibrium") {
        const double b0 = steady_state_pitch(16.0, params(), surface());
        const double dth = tg * ng / (params().shaft_stiffness * ng * ng);
        const PlantState3 x{params().rated_rotor_speed, ng * params().rated_rotor_speed, dth};
        const Eigen::Vector3d d = derivs_3dof(x, {b0, tg}, 16.0, surface(), params());
        CHECK(std::abs(d(2)) < 1e-12);
        CHECK(std::abs(d(1)) < 1e-9 * params().rated_generator_speed);
    }
    SUBCASE("zero state, zero input, no wind") {
        const Eigen::Vector3d d = derivs_3dof({0.0, 0.0, 0.0}, {0.0, 0.0}, 0.0, surface(), params());
        CHECK(d.norm() == 0.0);
    }
    SUBCASE("torsion perturbation signs") {
        const double b0 = steady_state_pitch(16.0, params(), surface());
        const double dth = tg / (params().shaft_stiffness * ng);
        const PlantState3 x0{params().rated_rotor_speed, ng * params().rated_rotor_speed, dth};
        const PlantState3 xp{x0.omega_r, x0.omega_g, x0.delta_theta + 0.01};
        const Eigen::Vector3d d0 = derivs_3dof(x0, {b0, tg}, 16.0, surface(), params());
        const Eigen::Vector3d dp = derivs_3dof(xp, {b0, tg}, 16.0, surface(), params());
        CHECK(dp(0) < d0(0));   // rotor decelerates
        CHECK(dp(1) > d0(1));   // generator accelerates
    }
    SUBCASE("reduces to the one-mass model under the rigid constraint") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> uw(0.8, 1.2), ub(0.0, 0.3), uv(12.0, 24.0);
        for (int k = 0; k < 50; ++k) {
            const double wr = uw(rng) * params().rated_rotor_speed;
            const PlantState3 x{wr, ng * wr, 1e-3 * uw(rng)};
            const ControlInput u{ub(rng), tg * uw(rng)};
            const double v = uv(rng);
            const Eigen::Vector3d d3 = derivs_3dof(x, u, v, surface(), params());
            const double lumped =
                params().inertia_rotor * d3(0) + ng * params().inertia_generator * d3(1);
            const double d1 = derivs_1dof({wr}, u, v, surface(), params());
            CHECK(lumped == doctest::Approx(params().lumped_inertia() * d1).epsilon(1e-6));
        }
    }
    SUBCASE("energy bookkeeping at equilibrium") {
        const double b0 = steady_state_pitch(18.0, params(), surface());
        const double wr = params().rated_rotor_speed;
        const double tr = rotor_torque(18.0, wr, b0, surface(), params());
        CHECK(tr * wr == doctest::Approx(tg * (ng * wr)).epsilon(1e-6));
    }
}

TEST_CASE("four-state model") {
    const double tg = params().rated_generator_torque;
    SUBCASE("actuator at its demand is stationary") {
        const Eigen::Vector4d d = derivs_4state({0, 0, 0, tg}, {0.0, tg}, 0.0, 0.3, surface(), params());
        CHECK(d(3) == 0.0);
    }
    SUBCASE("actuator slew toward demand") {
        const Eigen::Vector4d d =
            derivs_4state({0, 0, 0, 0.0}, {0.0, tg}, 0.0, 0.3, surface(), params());
        CHECK(d(3) == doctest::Approx(tg / 0.3));
    }
    SUBCASE("full equilibrium") {
        const double b0 = steady_state_pitch(16.0, params(), surface());
        const PlantState4 x{params().rated_rotor_speed, params().rated_generator_speed,
                            params().rated_torsion(), tg};
        const Eigen::Vector4d d = derivs_4state(x, {b0, tg}, 16.0, 0.3, surface(), params());
        CHECK(std::abs(d(0) / params().rated_rotor_speed) < 1e-6);
        CHECK(std::abs(d(1) / params().rated_generator_speed) < 1e-6);
        CHECK(std::abs(d(2)) < 1e-9);
        CHECK(d(3) == 0.0);
    }
    SUBCASE("nonpositive actuator constant is rejected") {
        CHECK_THROWS_AS(derivs_4state({0, 0, 0, 0}, {0, 0}, 0.0, 0.0, surface(), params()),
                        std::invalid_argument);
    }
}

TEST_CASE("steady-state pitch schedule") {
    const double b_rated = steady_state_pitch(11.4, params(), surface());
    CHECK(b_rated >= 0.0);
    CHECK(b_rated < 1.0 * M_PI / 180.0);   // ~0 deg at rated wind

    CHECK(steady_state_pitch(25.0, params(), surface()) >
          steady_state_pitch(16.0, params(), surface()));

    double prev = 0.0;
    for (int v = 12; v <= 24; ++v) {
        const double b = steady_state_pitch(static_cast<double>(v), params(), surface());
        CHECK(b >= prev);
        prev = b;
    }
    // The root always lies on the feathering branch.
    for (int v = 12; v <= 24; v += 4) {
        const double b = steady_state_pitch(static_cast<double>(v), params(), surface());
        const double lam = params().rated_rotor_speed * params().rotor_radius / v;
        CHECK(surface().dcp_dbeta(lam, b) < 0.0);
    }
}

TEST_CASE("closed-form surface derivatives match finite differences") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> uv(12.0, 24.0), up(0.85, 1.15);
    int checked = 0;
    for (int k = 0; k < 400 && checked < 100; ++k) {
        const double v = uv(rng);
        const double lam = params().rated_rotor_speed * params().rotor_radius / v * up(rng);
        const double beta = steady_state_pitch(v, params(), surface()) * up(rng);
        const double h = 1e-6;
        const double fd_l = (surface().cp(lam + h, beta) - surface().cp(lam - h, beta)) / (2.0 * h);
        const double fd_b = (surface().cp(lam, beta + h) - surface().cp(lam, beta - h)) / (2.0 * h);
        const double cl = surface().dcp_dlambda(lam, beta);
        const double cb = surface().dcp_dbeta(lam, beta);
        if (std::abs(cl) < 1e-8 || std::abs(cb) < 1e-8) continue;
        CHECK(std::abs(fd_l - cl) / std::abs(cl) < 1e-5);
        CHECK(std::abs(fd_b - cb) / std::abs(cb) < 1e-5);
        ++checked;
    }
    CHECK(checked >= 100);
}
