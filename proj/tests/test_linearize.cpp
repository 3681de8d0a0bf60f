#include <doctest.h>

#include <random>

#include "tsmrc/linearize.hpp"

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
const std::vector<OperatingPoint>& grid13() {
    static auto g = build_grid(params(), surface(), 12.0, 24.0, 13, PlantModel::FourState);
    return g;
}
MembershipGrid mgrid13() {
    MembershipGrid g;
    for (const auto& pt : grid13()) g.nodes.push_back(pt.v0);
    return g;
}
}  // namespace

TEST_CASE("jacobian is exact on linear and quadratic maps") {
    Eigen::MatrixXd M(2, 2);
    M << 1.0, 2.0, -3.0, 0.5;
    const Eigen::VectorXd x0 = Eigen::Vector2d(0.3, -1.2);
    const Eigen::MatrixXd J =
        jacobian([&M](const Eigen::VectorXd& x) { return Eigen::VectorXd(M * x); }, x0);
    CHECK((J - M).cwiseAbs().maxCoeff() < 1e-9);

    const Eigen::VectorXd x1 = Eigen::VectorXd::Constant(1, 2.0);
    const Eigen::MatrixXd Jq = jacobian(
        [](const Eigen::VectorXd& x) {
            return Eigen::VectorXd(Eigen::VectorXd::Constant(1, x(0) * x(0)));
        },
        x1);
    CHECK(Jq(0, 0) == doctest::Approx(4.0).epsilon(1e-8));

    CHECK_THROWS_AS(jacobian(
                        [](const Eigen::VectorXd& x) {
                            return Eigen::VectorXd(
                                Eigen::VectorXd::Constant(1, std::sqrt(x(0))));
                        },
                        Eigen::VectorXd::Zero(1)),
                    std::runtime_error);
}

TEST_CASE("aerodynamic speed slope is negative in the full-load region") {
    const auto subs = build_submodels(PlantModel::OneDof, {grid13()[4]}, params(), surface());
    CHECK(subs[0].A(0, 0) < 0.0);
}

TEST_CASE("operating grid") {
    SUBCASE("two-point grid hits the endpoints") {
        const auto g = build_grid(params(), surface(), 12.0, 24.0, 2, PlantModel::FourState);
        CHECK(g[0].v0 == doctest::Approx(12.0));
        CHECK(g[1].v0 == doctest::Approx(24.0));
    }
    SUBCASE("default 13-node grid is an equilibrium family") {
        const UnitBases b = UnitBases::from(params(), PlantModel::FourState);
        CHECK(grid13().size() == 13);
        for (const auto& pt : grid13()) {
            const Eigen::Vector4d f = derivs_4state(
                {pt.x0(0), pt.x0(1), pt.x0(2), pt.x0(3)}, {pt.u0(0), pt.u0(1)}, pt.v0, 0.30,
                surface(), params());
            CHECK((f.cwiseQuotient(b.x_base)).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    SUBCASE("range checks") {
        CHECK_THROWS_AS(build_grid(params(), surface(), 5.0, 24.0, 5, PlantModel::FourState),
                        std::invalid_argument);
    }
}

TEST_CASE("submodel matrices carry the analytic drive-train entries") {
    const auto s3 = build_submodels(PlantModel::ThreeDof, {grid13()[4]}, params(), surface());
    const Eigen::MatrixXd& A3 = s3[0].A;
    CHECK(A3(2, 0) == 1.0);
    CHECK(A3(2, 1) == doctest::Approx(-1.0 / params().gear_ratio));
    CHECK(A3(2, 2) == 0.0);
    CHECK(A3(0, 1) == doctest::Approx(params().shaft_damping * params().gear_ratio /
                                      params().inertia_rotor));
    CHECK(A3(1, 1) == doctest::Approx(-params().shaft_damping / params().inertia_generator));
    CHECK(s3[0].B(1, 1) == doctest::Approx(-1.0 / params().inertia_generator));

    const auto s4 = build_submodels(PlantModel::FourState, {grid13()[4]}, params(), surface(), 0.30);
    const Eigen::MatrixXd& A4 = s4[0].A;
    CHECK(A4(3, 0) == 0.0);
    CHECK(A4(3, 1) == 0.0);
    CHECK(A4(3, 2) == 0.0);
    CHECK(A4(3, 3) == doctest::Approx(-1.0 / 0.30));
    CHECK(s4[0].B(3, 1) == doctest::Approx(1.0 / 0.30));
    CHECK(s4[0].B(1, 1) == 0.0);
    CHECK(s4[0].C.row(0) == Eigen::RowVector4d(1, 0, 0, 0));
    CHECK(s4[0].C.row(1) == Eigen::RowVector4d(0, 0, 0, 1));
}

TEST_CASE("membership functions") {
    const MembershipGrid g = mgrid13();
    SUBCASE("node weight is one") {
        const Eigen::VectorXd h = g.weights(14.0);
        CHECK(h(2) == doctest::Approx(1.0));
        CHECK(h.sum() == doctest::Approx(1.0));
    }
    SUBCASE("midpoint splits evenly") {
        const Eigen::VectorXd h = g.weights(14.5);
        CHECK(h(2) == doctest::Approx(0.5));
        CHECK(h(3) == doctest::Approx(0.5));
    }
    SUBCASE("clamping beyond the grid") {
        const Eigen::VectorXd h = g.weights(30.0);
        CHECK(h(12) == doctest::Approx(1.0));
        const Eigen::VectorXd h2 = g.weights(5.0);
        CHECK(h2(0) == doctest::Approx(1.0));
    }
    SUBCASE("partition of unity and support width on random samples") {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> uz(10.0, 26.0);
        for (int k = 0; k < 10000; ++k) {
            const Eigen::VectorXd h = g.weights(uz(rng));
            CHECK(h.sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(h.minCoeff() >= 0.0);
            CHECK((h.array() > 0.0).count() <= 2);
        }
    }
}

TEST_CASE("active pairs") {
    const MembershipGrid g = mgrid13();
    const auto pairs = active_pairs(g);
    CHECK(pairs.size() == 37);   // 13 diagonal + 24 adjacent
    for (const auto& [i, j] : pairs) CHECK(std::abs(i - j) <= 1);
    bool has13 = false;
    for (const auto& [i, j] : pairs) has13 |= (i == 0 && j == 2);
    CHECK_FALSE(has13);

    MembershipGrid single;
    single.nodes = {16.0};
    CHECK(active_pairs(single).size() == 1);
}

TEST_CASE("TS reconstruction at and near the operating points") {
    const auto subs = build_submodels(PlantModel::FourState, grid13(), params(), surface(), 0.30);
    const MembershipGrid g = mgrid13();
    for (const auto& s : subs) {
        // Exact at the node (equilibrium, so both sides are ~0).
        const Eigen::VectorXd fh = s.A * s.point.x0 + s.B * s.point.u0 +
                                   s.Bd.col(0) * s.point.v0 + s.a;
        const Eigen::Vector4d f = derivs_4state(
            {s.point.x0(0), s.point.x0(1), s.point.x0(2), s.point.x0(3)},
            {s.point.u0(0), s.point.u0(1)}, s.point.v0, 0.30, surface(), params());
        CHECK((fh - f).cwiseAbs().maxCoeff() < 1e-9);

        // First-order accuracy nearby.
        Eigen::VectorXd dx(4);
        dx << 1e-3 * params().rated_rotor_speed, 1e-3 * params().rated_generator_speed,
            1e-3 * params().rated_torsion(), 1e-3 * params().rated_generator_torque;
        const Eigen::VectorXd xp = s.point.x0 + dx;
        const Eigen::VectorXd fl = s.A * xp + s.B * s.point.u0 + s.Bd.col(0) * s.point.v0 + s.a;
        const Eigen::Vector4d fn = derivs_4state({xp(0), xp(1), xp(2), xp(3)},
                                                 {s.point.u0(0), s.point.u0(1)}, s.point.v0, 0.30,
                                                 surface(), params());
        const UnitBases b = UnitBases::from(params(), PlantModel::FourState);
        CHECK(((fl - fn).cwiseQuotient(b.x_base)).cwiseAbs().maxCoeff() < 1e-4);
    }
}

TEST_CASE("affine terms vanish for an origin operating point") {
    TsSubmodel s;
    s.A = Eigen::MatrixXd::Random(3, 3);
    s.B = Eigen::MatrixXd::Random(3, 2);
    s.Bd = Eigen::MatrixXd::Random(3, 1);
    s.point.x0 = Eigen::VectorXd::Zero(3);
    s.point.u0 = Eigen::VectorXd::Zero(2);
    s.point.v0 = 0.0;
    const Eigen::VectorXd a = -s.A * s.point.x0 - s.B * s.point.u0 - s.Bd.col(0) * s.point.v0;
    CHECK(a.norm() == 0.0);
}
