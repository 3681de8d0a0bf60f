#pragma once

#include <array>
#include <stdexcept>

#include <Eigen/Dense>

namespace tsmrc {

// NREL 5 MW turbine constants. Defaults are the published specification
// values; anything can be overridden from a parameter file (see io.hpp).
struct TurbineParams {
    double rated_electrical_power = 5.0e6;        // W
    double generator_efficiency = 0.944;          // -
    double rated_generator_torque = 43093.55;     // N·m
    double rated_generator_speed = 1173.7 * M_PI / 30.0;  // rad/s
    double rated_mechanical_power = 5.297e6;      // W
    double v_cut_in = 3.0;                        // m/s
    double v_rated = 11.4;                        // m/s
    double v_cut_out = 25.0;                      // m/s
    double rated_rotor_speed = 12.1 * M_PI / 30.0;  // rad/s
    double gear_ratio = 97.0;                     // n_G
    double rotor_radius = 63.0;                   // m
    double inertia_rotor = 38759227.0;            // kg·m²
    double inertia_generator = 534.1;             // kg·m²
    double shaft_stiffness = 92214.0;             // N·m/rad (HSS side)
    double shaft_damping = 660.54;                // N·m·s/rad (HSS side)
    double max_generator_torque = 47402.91;       // N·m
    double max_torque_rate = 15000.0;             // N·m/s
    double max_pitch_rate = 8.0 * M_PI / 180.0;   // rad/s
    double cp_opt = 0.482;                        // -
    double lambda_opt = 7.55;                     // -
    double air_density = 1.225;                   // kg/m³

    double lumped_inertia() const {               // J_1DOF = J_r + n_G² J_g
        return inertia_rotor + gear_ratio * gear_ratio * inertia_generator;
    }
    // Rated drive-train torsion: k_S n_G Δθ = T_g at equilibrium.
    double rated_torsion() const {
        return rated_generator_torque / (shaft_stiffness * gear_ratio);
    }
    void validate() const;   // throws std::invalid_argument on bad values
};

// Analytic power-coefficient surface
//   c_P(λ,β) = c1 (c2/λ_i − c3 β − c4) e^{−c5/λ_i} + c6 λ,
//   1/λ_i = 1/(λ + 0.08 β) − 0.035/(1 + β³),   β in degrees internally,
// passed through a smooth max(0,·) floor so 0 ≤ c_P ≤ Betz holds on the
// operating grid. c1 and c5 are calibrated so the peak is cp_opt at
// lambda_opt; the remaining coefficients are fixed design values chosen so
// pitch authority varies smoothly across the full-load schedule.
struct CoefficientSurface {
    std::array<double, 6> c{};    // c1..c6
    double kappa = 1e-6;          // smooth-floor width
    double lambda_min = 0.1;      // clamp for the 1/λ_i singularity
    double lambda_max = 40.0;

    double cp(double lambda, double beta_rad) const;
    double cq(double lambda, double beta_rad) const;   // c_P/λ (λ clamped)
    // Closed-form partial derivatives of cp (chain rule through the floor).
    double dcp_dlambda(double lambda, double beta_rad) const;
    double dcp_dbeta(double lambda, double beta_rad) const;
};

struct CalibrationResult {
    CoefficientSurface surface;
    double residual_value;   // |c_P(λ_opt,0) − cp_opt| at the solution
    double residual_slope;   // |∂c_P/∂λ(λ_opt,0)|
    int iterations;
};

// Fit (c1, c5) by Newton iteration so that c_P(lambda_opt, 0) = cp_opt and
// the λ-derivative vanishes there. Throws std::runtime_error with the
// achieved residual if the 1e-3 peak tolerance cannot be met.
CalibrationResult calibrate_surface(const TurbineParams& params);

// Aerodynamic rotor torque, Eq.-style T_r = (ρ/2) π R³ v² c_Q(λ, β).
// v = 0 returns exactly 0; ω_r → 0 falls back to the clamped-λ limit.
double rotor_torque(double v, double omega_r, double beta,
                    const CoefficientSurface& surface, const TurbineParams& params);

// Plant state vectors.
struct PlantState1 { double omega_r; };
struct PlantState3 { double omega_r, omega_g, delta_theta; };
struct PlantState4 { double omega_r, omega_g, delta_theta, T_g; };

struct ControlInput { double beta; double T_g; };   // T_g is the demand for the 4-state model

// One-mass model: dω_r/dt = (T_r − n_G T_g) / J_1DOF.
double derivs_1dof(const PlantState1& x, const ControlInput& u, double v,
                   const CoefficientSurface& surface, const TurbineParams& params);

// Two-mass model with HSS-side stiffness/damping constants.
Eigen::Vector3d derivs_3dof(const PlantState3& x, const ControlInput& u, double v,
                            const CoefficientSurface& surface, const TurbineParams& params);

// Two-mass model plus first-order generator-torque actuator; u.T_g is the
// demanded torque T_g,d. tau_act must be positive.
Eigen::Vector4d derivs_4state(const PlantState4& x, const ControlInput& u, double v,
                              double tau_act,
                              const CoefficientSurface& surface, const TurbineParams& params);

// Full-load steady-state pitch: the feathering-branch root of
// T_r(v, ω_rated, β) = n_G T_g,rated, searched in [0°, 60°].
// Throws std::runtime_error naming v when no root exists.
double steady_state_pitch(double v, const TurbineParams& params,
                          const CoefficientSurface& surface);

}  // namespace tsmrc
