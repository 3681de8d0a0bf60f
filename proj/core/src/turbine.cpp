#include "tsmrc/turbine.hpp"

#include <cmath>
#include <sstream>

namespace tsmrc {

void TurbineParams::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("TurbineParams: " + msg); };
    if (inertia_rotor <= 0 || inertia_generator <= 0) fail("inertias must be positive");
    if (shaft_stiffness <= 0 || shaft_damping <= 0) fail("shaft stiffness/damping must be positive");
    if (rotor_radius <= 0 || gear_ratio <= 0) fail("radius and gear ratio must be positive");
    if (air_density <= 0) fail("air density must be positive");
    if (!(v_cut_in < v_rated && v_rated < v_cut_out)) fail("wind speed ordering v_cut_in < v_rated < v_cut_out violated");
    const double p = rated_generator_torque * rated_generator_speed;
    if (std::abs(p - rated_mechanical_power) > 0.005 * rated_mechanical_power)
        fail("rated torque x rated speed inconsistent with rated mechanical power");
}

namespace {

// Smooth floor s(g) = (g + sqrt(g² + κ²))/2 and its derivative.
inline double smooth_floor(double g, double kappa) {
    return 0.5 * (g + std::sqrt(g * g + kappa * kappa));
}
inline double smooth_floor_d(double g, double kappa) {
    return 0.5 * (1.0 + g / std::sqrt(g * g + kappa * kappa));
}

struct RawEval {
    double value;     // family value before the floor
    double dlam;      // ∂/∂λ
    double dbeta;     // ∂/∂β (per radian)
};

RawEval raw_family(const CoefficientSurface& s, double lambda, double beta_rad) {
    const double rad2deg = 180.0 / M_PI;
    const double b = beta_rad * rad2deg;
    const double lam_t = std::clamp(lambda, s.lambda_min, s.lambda_max);
    const double lam_l = std::min(lambda, s.lambda_max);
    const bool t_clamped = (lambda < s.lambda_min) || (lambda > s.lambda_max);
    const bool l_clamped = (lambda > s.lambda_max);

    const double den = lam_t + 0.08 * b;
    const double t = 1.0 / den - 0.035 / (1.0 + b * b * b);
    const double e = std::exp(-s.c[4] * t);
    const double bracket = s.c[1] * t - s.c[2] * b - s.c[3];
    const double value = s.c[0] * bracket * e + s.c[5] * lam_l;

    // dt/dλ and dt/dβ(deg)
    const double dt_dlam = t_clamped ? 0.0 : -1.0 / (den * den);
    const double dt_db = -0.08 / (den * den) + 0.105 * b * b / ((1.0 + b * b * b) * (1.0 + b * b * b));

    const double core = s.c[0] * e * (s.c[1] - s.c[4] * bracket);
    const double dlam = core * dt_dlam + (l_clamped ? 0.0 : s.c[5]);
    const double dbeta_deg = core * dt_db - s.c[0] * s.c[2] * e;
    return {value, dlam, dbeta_deg * rad2deg};
}

}  // namespace

double CoefficientSurface::cp(double lambda, double beta_rad) const {
    return smooth_floor(raw_family(*this, lambda, beta_rad).value, kappa);
}

double CoefficientSurface::cq(double lambda, double beta_rad) const {
    return cp(lambda, beta_rad) / std::clamp(lambda, lambda_min, lambda_max);
}

double CoefficientSurface::dcp_dlambda(double lambda, double beta_rad) const {
    const RawEval r = raw_family(*this, lambda, beta_rad);
    return smooth_floor_d(r.value, kappa) * r.dlam;
}

double CoefficientSurface::dcp_dbeta(double lambda, double beta_rad) const {
    const RawEval r = raw_family(*this, lambda, beta_rad);
    return smooth_floor_d(r.value, kappa) * r.dbeta;
}

CalibrationResult calibrate_surface(const TurbineParams& params) {
    params.validate();
    CoefficientSurface s;
    s.c = {0.5176, 75.0, 1.3, 3.9, 21.0, 0.017};   // c1, c5 are the Newton unknowns

    const double lam = params.lambda_opt;
    auto residual = [&](double c1, double c5) -> Eigen::Vector2d {
        CoefficientSurface t = s;
        t.c[0] = c1;
        t.c[4] = c5;
        return {t.cp(lam, 0.0) - params.cp_opt, t.dcp_dlambda(lam, 0.0)};
    };

    double c1 = s.c[0], c5 = s.c[4];
    int it = 0;
    for (; it < 100; ++it) {
        const Eigen::Vector2d f = residual(c1, c5);
        if (f.cwiseAbs().maxCoeff() < 1e-13) break;
        Eigen::Matrix2d J;
        const double h1 = 1e-7 * std::max(1.0, std::abs(c1));
        const double h5 = 1e-7 * std::max(1.0, std::abs(c5));
        J.col(0) = (residual(c1 + h1, c5) - f) / h1;
        J.col(1) = (residual(c1, c5 + h5) - f) / h5;
        const Eigen::Vector2d d = J.partialPivLu().solve(-f);
        c1 += std::clamp(d(0), -1.0, 1.0);
        c5 += std::clamp(d(1), -5.0, 5.0);
    }
    s.c[0] = c1;
    s.c[4] = c5;
    const Eigen::Vector2d f = residual(c1, c5);
    if (std::abs(f(0)) > 1e-3) {
        std::ostringstream os;
        os << "surface calibration failed: peak residual " << f(0)
           << " exceeds 1e-3 after " << it << " iterations";
        throw std::runtime_error(os.str());
    }
    return {s, std::abs(f(0)), std::abs(f(1)), it};
}

double rotor_torque(double v, double omega_r, double beta,
                    const CoefficientSurface& surface, const TurbineParams& params) {
    if (v <= 0.0) return 0.0;
    const double R = params.rotor_radius;
    const double lambda = omega_r * R / v;
    const double k = 0.5 * params.air_density * M_PI * R * R * R;
    return k * v * v * surface.cq(lambda, beta);
}

double derivs_1dof(const PlantState1& x, const ControlInput& u, double v,
                   const CoefficientSurface& surface, const TurbineParams& params) {
    const double Tr = rotor_torque(v, x.omega_r, u.beta, surface, params);
    return (Tr - u.T_g * params.gear_ratio) / params.lumped_inertia();
}

Eigen::Vector3d derivs_3dof(const PlantState3& x, const ControlInput& u, double v,
                            const CoefficientSurface& surface, const TurbineParams& params) {
    const double ng = params.gear_ratio;
    const double kS = params.shaft_stiffness;
    const double dS = params.shaft_damping;
    const double Tr = rotor_torque(v, x.omega_r, u.beta, surface, params);
    Eigen::Vector3d dx;
    dx(0) = (Tr - dS * ng * ng * x.omega_r + dS * ng * x.omega_g - kS * ng * ng * x.delta_theta) / params.inertia_rotor;
    dx(1) = (dS * ng * x.omega_r - dS * x.omega_g + kS * ng * x.delta_theta - u.T_g) / params.inertia_generator;
    dx(2) = x.omega_r - x.omega_g / ng;
    return dx;
}

Eigen::Vector4d derivs_4state(const PlantState4& x, const ControlInput& u, double v,
                              double tau_act,
                              const CoefficientSurface& surface, const TurbineParams& params) {
    if (tau_act <= 0.0) throw std::invalid_argument("derivs_4state: tau_act must be positive");
    const PlantState3 x3{x.omega_r, x.omega_g, x.delta_theta};
    const ControlInput u3{u.beta, x.T_g};   // actual torque comes from the state
    const Eigen::Vector3d d3 = derivs_3dof(x3, u3, v, surface, params);
    Eigen::Vector4d dx;
    dx.head<3>() = d3;
    dx(3) = (u.T_g - x.T_g) / tau_act;      // u.T_g is the demand T_g,d
    return dx;
}

double steady_state_pitch(double v, const TurbineParams& params,
                          const CoefficientSurface& surface) {
    const double target = params.gear_ratio * params.rated_generator_torque;
    auto f = [&](double beta) {
        return rotor_torque(v, params.rated_rotor_speed, beta, surface, params) - target;
    };
    // Scan down from high pitch; take the first (feathering-branch) crossing.
    const double beta_hi = 60.0 * M_PI / 180.0;
    const int n = 2400;
    double prev = f(beta_hi);
    for (int k = 1; k <= n; ++k) {
        const double beta = beta_hi * (1.0 - double(k) / n);
        const double cur = f(beta);
        if (prev <= 0.0 && cur >= 0.0) {
            double lo = beta, hi = beta + beta_hi / n;   // f(lo) >= 0, f(hi) <= 0
            for (int b = 0; b < 200; ++b) {
                const double mid = 0.5 * (lo + hi);
                if (f(mid) >= 0.0) lo = mid; else hi = mid;
            }
            const double root = 0.5 * (lo + hi);
            if (root > 45.0 * M_PI / 180.0) break;
            return root;
        }
        prev = cur;
    }
    std::ostringstream os;
    os << "steady_state_pitch: no feathering root in [0, 45] deg at v = " << v << " m/s";
    throw std::runtime_error(os.str());
}

}  // namespace tsmrc
