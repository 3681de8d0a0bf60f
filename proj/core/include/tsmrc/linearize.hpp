#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "tsmrc/turbine.hpp"

namespace tsmrc {

enum class PlantModel { OneDof, ThreeDof, FourState };

inline int state_dim(PlantModel m) {
    switch (m) {
        case PlantModel::OneDof: return 1;
        case PlantModel::ThreeDof: return 3;
        case PlantModel::FourState: return 4;
    }
    return 0;
}

// One linearization point c0 = {x0, u0, v0}; x0 is an equilibrium.
struct OperatingPoint {
    Eigen::VectorXd x0;
    Eigen::VectorXd u0;    // [beta0, Tg0]
    double v0 = 0.0;
    int index = 0;
};

// Affine TS submodel about an operating point (physical units).
struct TsSubmodel {
    Eigen::MatrixXd A, B, Bd, C, E, F;
    Eigen::VectorXd a;     // affine term, a = −A x0 − B u0 − Bd v0
    Eigen::VectorXd c;     // output affine term
    OperatingPoint point;
};

// Sorted premise nodes with triangular hat memberships; z clamps to the ends.
struct MembershipGrid {
    std::vector<double> nodes;

    Eigen::VectorXd weights(double z) const;
    std::size_t size() const { return nodes.size(); }
};

// Central finite-difference Jacobian of f at x, step h_k = max(1e-6, 1e-6 |x_k|).
// Throws std::runtime_error naming the coordinate if f evaluates non-finite.
Eigen::MatrixXd jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x);

// Equally spaced operating-point grid over [v_lo, v_hi]; states at rated,
// torsion and pitch from steady-state equilibrium. Postcondition: equilibrium
// residual below 1e-6 in per-unit for every point.
std::vector<OperatingPoint> build_grid(const TurbineParams& params,
                                       const CoefficientSurface& surface,
                                       double v_lo, double v_hi, int n_points,
                                       PlantModel model = PlantModel::FourState);

// Submodels with analytic drive-train entries; only the aerodynamic-torque
// partials come from finite differences.
std::vector<TsSubmodel> build_submodels(PlantModel model,
                                        const std::vector<OperatingPoint>& grid,
                                        const TurbineParams& params,
                                        const CoefficientSurface& surface,
                                        double tau_act = 0.30);

// Ordered active pairs (i, j) with overlapping membership supports; for
// triangular consecutive supports this is {(i,i)} ∪ {(i,i±1)}.
std::vector<std::pair<int, int>> active_pairs(const MembershipGrid& grid);

// Per-unit scaling bases shared by synthesis and simulation.
struct UnitBases {
    Eigen::VectorXd x_base;   // per plant state
    Eigen::VectorXd u_base;   // [beta (rad, unscaled), T_g]
    Eigen::Vector2d y_base;   // [omega_r, T_g] outputs

    static UnitBases from(const TurbineParams& p, PlantModel model);
};

}  // namespace tsmrc
