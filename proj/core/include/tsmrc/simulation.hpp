#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsmrc/synthesis.hpp"

namespace tsmrc {

enum class WindKind { Constant, Turbulent, Gust, Series };

struct WindSpec {
    WindKind kind = WindKind::Constant;
    double v_mean = 16.0;           // constant value / turbulence average / gust base
    double intensity = 0.10;        // turbulence intensity
    std::uint64_t seed = 1;
    double corner_hz = 0.1;         // turbulence low-pass corner
    double gust_start = 10.0;       // s
    // IEC 61400-1 extreme-operating-gust parameters (class IA defaults)
    double gust_duration = 10.5;    // s
    double v_ref = 50.0;            // m/s
    double i_ref = 0.16;
    double rotor_diameter = 126.0;  // m
    double turbulence_scale = 42.0; // m
    std::vector<double> series;     // WindKind::Series samples at dt spacing
};

// Seeded turbulent series: unit Gaussian noise (fixed Box-Muller over
// mt19937_64) shaped by a first-order low-pass, then normalized to the exact
// requested mean and standard deviation. v >= 0 always.
std::vector<double> wind_turbulent(double v_avg, double intensity, std::uint64_t seed,
                                   double duration, double dt, double corner_hz = 0.1);

// EOG magnitude and profile value at time t (v0 outside the gust window).
double eog_magnitude(double v0, const WindSpec& spec);
double wind_gust(double v0, double t, double t_start, const WindSpec& spec);

enum class Scenario { Constant, Turbulent, Gust, Frt, Simultaneous };

struct ActuatorLimits {
    bool pitch_rate = true;
    bool torque_rate = true;
    bool torque_magnitude = true;
    double pitch_min = 0.0;          // rad
    double pitch_max = M_PI / 2;     // rad
};

struct SimConfig {
    Scenario scenario = Scenario::Constant;
    WindSpec wind;
    double dt = 1e-3;               // s
    double duration = 60.0;         // s
    double tau_z = 2.0;             // premise filter time constant
    double tau_act = 0.30;          // generator torque actuator
    double tau_ref_speed = 10.0;    // runtime reference model time constants
    double tau_ref_torque = 0.30;
    double tau_ref_torque_frt = 0.025;
    double fault_start = 5.0;       // s (FRT)
    double fault_duration = 0.150;  // s
    double step_time = 10.0;        // s (reference steps / gust start)
    ActuatorLimits limits;
    double anti_windup_tau = 0.5;   // s; back-calculation constant
    std::string label;

    void validate(const TurbineParams& params) const;
};

struct SimTrace {
    std::vector<double> t, v, z, omega_r, omega_g, dtheta, T_g, beta, T_g_d;
    std::vector<double> omega_r_ref, T_g_ref, eps_omega, eps_T, P_g;
    std::string meta;   // "# scenario=...,seed=...,dt=...,limits=..."

    std::size_t size() const { return t.size(); }
};

// Membership-blended PDC control in per-unit deviation coordinates; returns
// absolute actuator commands {beta (rad), T_g demand (N.m)}.
struct PdcState {
    Eigen::Vector2d x_ref{1.0, 1.0};   // p.u.
    Eigen::Vector2d x_int{0.0, 0.0};
};

Eigen::Vector2d pdc_control(const Eigen::VectorXd& x_phys, const PdcState& ctrl, double z,
                            const GainSchedule& gains, const std::vector<double>& beta0_nodes,
                            const TurbineParams& params);

// Exact one-step discretization of the premise filter.
double premise_filter(double v, double z_prev, double dt, double tau_z = 2.0);

// One RK4 step of the closed-loop dynamics (plant + reference + integrators)
// with commands held over the step.
struct ClosedLoopState {
    Eigen::Vector4d x;      // physical plant state
    PdcState ctrl;
    double z = 0.0;
    double beta_applied = 0.0;
    double tgd_applied = 0.0;   // N.m
};

void step(ClosedLoopState& s, const Eigen::Vector2d& w_ref_pu, double v, const SimConfig& cfg,
          const GainSchedule& gains, const std::vector<double>& beta0_nodes,
          const CoefficientSurface& surface, const TurbineParams& params, bool first_step);

// Full scenario run; beta0_nodes are the steady-state pitch values at the
// schedule's grid nodes (stored in the gains file).
SimTrace run_scenario(const SimConfig& cfg, const GainSchedule& gains,
                      const std::vector<double>& beta0_nodes,
                      const CoefficientSurface& surface, const TurbineParams& params);

}  // namespace tsmrc
