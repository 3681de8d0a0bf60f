#include <doctest.h>

#include <random>
#include <sstream>

#include "tsmrc/sdp.hpp"

using namespace tsmrc;

TEST_CASE("eig_margin basics") {
    CHECK(eig_margin(Eigen::MatrixXd::Identity(3, 3)) == std::pair<double, double>{1.0, 1.0});
    Eigen::MatrixXd d = Eigen::Vector2d(-1.0, -2.0).asDiagonal();
    const auto [lo, hi] = eig_margin(d);
    CHECK(lo == doctest::Approx(-2.0));
    CHECK(hi == doctest::Approx(-1.0));

    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(eig_margin(bad), std::invalid_argument);
}

TEST_CASE("eigensolver agrees with characteristic-polynomial roots on 8x8") {
    // Oracle: companion-matrix roots of det(A - s I) built from the
    // characteristic polynomial obtained by Leverrier's method.
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd A(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) A(i, j) = gauss(rng);
    A = 0.5 * (A + A.transpose()).eval();

    // Leverrier-Faddeev coefficients of det(sI - A).
    const int n = 8;
    Eigen::VectorXd c(n + 1);
    c(0) = 1.0;
    Eigen::MatrixXd Mk = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        Mk = (A * Mk + c(k - 1) * Eigen::MatrixXd::Identity(n, n)).eval();
        c(k) = -(A * Mk).trace() / k;
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    companion.block(1, 0, n - 1, n - 1).setIdentity();
    for (int k = 0; k < n; ++k) companion(0, k) = -c(k + 1);
    Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(companion).eigenvalues();
    std::vector<double> r(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) r[static_cast<std::size_t>(k)] = roots(k).real();
    std::sort(r.begin(), r.end());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    for (int k = 0; k < n; ++k)
        CHECK(es.eigenvalues()(k) == doctest::Approx(r[static_cast<std::size_t>(k)]).epsilon(1e-8));
}

namespace {

SdpProblem scalar_min_problem() {
    // minimize x subject to x I2 > 0 and x >= 1.
    SdpProblem p;
    const int xv = p.add_variable("x", 1, 1, false);
    SdpProblem* pp = nullptr;   // blocks capture p by address after construction
    (void)pp;
    LmiBlock b1;
    b1.name = "xI";
    b1.dim = 2;
    b1.sense = BlockSense::PositiveDefinite;
    b1.eval = [xv](const Eigen::VectorXd& y) {
        return Eigen::MatrixXd(y(0) * Eigen::MatrixXd::Identity(2, 2));
    };
    p.blocks.push_back(b1);
    LmiBlock b2;
    b2.name = "x>=1";
    b2.dim = 1;
    b2.sense = BlockSense::PositiveDefinite;
    b2.eval = [xv](const Eigen::VectorXd& y) {
        return Eigen::MatrixXd::Constant(1, 1, y(0) - 1.0);
    };
    p.blocks.push_back(b2);
    p.objective = Eigen::VectorXd::Ones(1);
    return p;
}

}  // namespace

TEST_CASE("scalar minimization") {
    SdpProblem p = scalar_min_problem();
    const SdpSolution sol = solve(p);
    REQUIRE(sol.status == SdpStatus::Optimal);
    CHECK(sol.y(0) == doctest::Approx(1.0).epsilon(1e-5));
    for (double m : sol.block_margins) CHECK(m > -1e-9);
}

TEST_CASE("infeasible pair is certified infeasible") {
    SdpProblem p;
    p.add_variable("X", 2, 2, true);
    LmiBlock pos;
    pos.name = "X>0";
    pos.dim = 2;
    pos.sense = BlockSense::PositiveDefinite;
    pos.shift = 1e-6;
    pos.eval = [&p](const Eigen::VectorXd& y) { return p.value_of(0, y); };
    p.blocks.push_back(pos);
    LmiBlock neg;
    neg.name = "X<0";
    neg.dim = 2;
    neg.sense = BlockSense::NegativeDefinite;
    neg.shift = 1e-6;
    neg.eval = [&p](const Eigen::VectorXd& y) { return p.value_of(0, y); };
    p.blocks.push_back(neg);
    const SdpSolution sol = solve(p);
    CHECK(sol.status == SdpStatus::Infeasible);
}

TEST_CASE("Lyapunov feasibility for a stable matrix") {
    // A stable 2x2 companion matrix; find X > 0 with A X + X A' < 0.
    Eigen::MatrixXd A(2, 2);
    A << 0.0, 1.0, -2.0, -3.0;
    SdpProblem p;
    const int xv = p.add_variable("X", 2, 2, true);
    SdpProblem* pp = &p;
    LmiBlock pos;
    pos.name = "X>0";
    pos.dim = 2;
    pos.sense = BlockSense::PositiveDefinite;
    pos.shift = 1e-6;
    pos.eval = [pp, xv](const Eigen::VectorXd& y) { return pp->value_of(xv, y); };
    p.blocks.push_back(pos);
    LmiBlock lyap;
    lyap.name = "AX+XA'<0";
    lyap.dim = 2;
    lyap.sense = BlockSense::NegativeDefinite;
    lyap.shift = 1e-6;
    lyap.eval = [pp, xv, A](const Eigen::VectorXd& y) {
        const Eigen::MatrixXd X = pp->value_of(xv, y);
        return Eigen::MatrixXd(A * X + X * A.transpose());
    };
    p.blocks.push_back(lyap);
    // Normalization so the cone does not run off to infinity.
    LmiBlock cap;
    cap.name = "trace";
    cap.dim = 1;
    cap.sense = BlockSense::PositiveDefinite;
    cap.eval = [pp, xv](const Eigen::VectorXd& y) {
        return Eigen::MatrixXd::Constant(1, 1, 10.0 - pp->value_of(xv, y).trace());
    };
    p.blocks.push_back(cap);

    const SdpSolution sol = solve(p);
    REQUIRE(sol.status == SdpStatus::Feasible);
    // Independent eigencheck of the returned X.
    const Eigen::MatrixXd X = p.value_of(xv, sol.y);
    CHECK(eig_margin(X).first > 0.0);
    CHECK(eig_margin(A * X + X * A.transpose()).second < 0.0);
    const auto margins = verify_blocks(p, sol.y);
    for (double m : margins) CHECK(m > 0.0);
}

TEST_CASE("feasibility status is invariant to scaling one block") {
    Eigen::MatrixXd A(2, 2);
    A << 0.0, 1.0, -2.0, -3.0;
    for (double scale : {1.0, 100.0, 1e-3}) {
        SdpProblem p;
        const int xv = p.add_variable("X", 2, 2, true);
        SdpProblem* pp = &p;
        LmiBlock pos;
        pos.name = "X>0";
        pos.dim = 2;
        pos.sense = BlockSense::PositiveDefinite;
        pos.shift = 1e-8;
        pos.eval = [pp, xv](const Eigen::VectorXd& y) { return pp->value_of(xv, y); };
        p.blocks.push_back(pos);
        LmiBlock lyap;
        lyap.name = "scaled";
        lyap.dim = 2;
        lyap.sense = BlockSense::NegativeDefinite;
        lyap.shift = 1e-8;
        lyap.eval = [pp, xv, A, scale](const Eigen::VectorXd& y) {
            const Eigen::MatrixXd X = pp->value_of(xv, y);
            return Eigen::MatrixXd(scale * (A * X + X * A.transpose()));
        };
        p.blocks.push_back(lyap);
        LmiBlock cap;
        cap.name = "trace";
        cap.dim = 1;
        cap.sense = BlockSense::PositiveDefinite;
        cap.eval = [pp, xv](const Eigen::VectorXd& y) {
            return Eigen::MatrixXd::Constant(1, 1, 10.0 - pp->value_of(xv, y).trace());
        };
        p.blocks.push_back(cap);
        CHECK(solve(p).status == SdpStatus::Feasible);
    }
}

TEST_CASE("problem dump/load round trip preserves solutions") {
    SdpProblem p = scalar_min_problem();
    std::stringstream ss;
    dump_problem(p, ss);
    SdpProblem q = load_problem(ss);
    REQUIRE(q.blocks.size() == p.blocks.size());
    const SdpSolution sol = solve(q);
    REQUIRE(sol.status == SdpStatus::Optimal);
    CHECK(sol.y(0) == doctest::Approx(1.0).epsilon(1e-5));
}
