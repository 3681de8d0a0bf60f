#include "tsmrc/simulation.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace tsmrc {

void SimConfig::validate(const TurbineParams& params) const {
    (void)params;
    if (dt <= 0.0) throw std::invalid_argument("SimConfig: dt must be positive");
    if (dt > tau_act / 10.0)
        throw std::invalid_argument("SimConfig: dt must resolve the torque actuator (dt <= tau_act/10)");
    if (duration <= 0.0) throw std::invalid_argument("SimConfig: duration must be positive");
    if (tau_z <= 0.0) throw std::invalid_argument("SimConfig: premise filter constant must be positive");
}

std::vector<double> wind_turbulent(double v_avg, double intensity, std::uint64_t seed,
                                   double duration, double dt, double corner_hz) {
    if (v_avg <= 0.0) throw std::invalid_argument("wind_turbulent: v_avg must be positive");
    const std::size_t n = static_cast<std::size_t>(std::ceil(duration / dt)) + 1;
    std::vector<double> v(n, v_avg);
    if (intensity <= 0.0) return v;

    // Fixed Box-Muller over mt19937_64 keeps the series identical across
    // platforms for a given seed.
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() {
        return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    };
    bool have_spare = false;
    double spare = 0.0;
    auto gauss = [&]() {
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare = r * std::sin(a);
        have_spare = true;
        return r * std::cos(a);
    };

    const double alpha = std::exp(-2.0 * M_PI * corner_hz * dt);
    std::vector<double> y(n);
    double state = gauss();
    for (std::size_t k = 0; k < n; ++k) {
        state = alpha * state + (1.0 - alpha) * gauss();
        y[k] = state;
    }
    double mean = 0.0;
    for (double s : y) mean += s;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double s : y) var += (s - mean) * (s - mean);
    var /= static_cast<double>(n);
    const double scale = intensity * v_avg / std::sqrt(std::max(var, 1e-300));
    for (std::size_t k = 0; k < n; ++k)
        v[k] = std::max(0.0, v_avg + scale * (y[k] - mean));
    return v;
}

double eog_magnitude(double v0, const WindSpec& spec) {
    const double ve1 = 0.8 * 1.4 * spec.v_ref;
    const double sigma1 = spec.i_ref * (0.75 * v0 + 5.6);
    return std::min(1.35 * (ve1 - v0),
                    3.3 * sigma1 / (1.0 + 0.1 * spec.rotor_diameter / spec.turbulence_scale));
}

double wind_gust(double v0, double t, double t_start, const WindSpec& spec) {
    const double T = spec.gust_duration;
    if (t < t_start || t > t_start + T) return v0;
    const double tau = t - t_start;
    const double vg = eog_magnitude(v0, spec);
    return v0 - 0.37 * vg * std::sin(3.0 * M_PI * tau / T) * (1.0 - std::cos(2.0 * M_PI * tau / T));
}

double premise_filter(double v, double z_prev, double dt, double tau_z) {
    if (tau_z <= 0.0) throw std::invalid_argument("premise_filter: tau_z must be positive");
    return z_prev + (1.0 - std::exp(-dt / tau_z)) * (v - z_prev);
}

namespace {

double blend_beta0(const std::vector<double>& beta0, const MembershipGrid& grid, double z) {
    const Eigen::VectorXd h = grid.weights(z);
    double b = 0.0;
    for (Eigen::Index j = 0; j < h.size(); ++j)
        if (h(j) != 0.0) b += h(j) * beta0[static_cast<std::size_t>(j)];
    return b;
}

}  // namespace

Eigen::Vector2d pdc_control(const Eigen::VectorXd& x_phys, const PdcState& ctrl, double z,
                            const GainSchedule& gains, const std::vector<double>& beta0_nodes,
                            const TurbineParams& params) {
    const UnitBases bases = UnitBases::from(params, gains.model);
    const Eigen::MatrixXd K = gains.blend(z);
    const int n = static_cast<int>(bases.x_base.size());
    const int l = gains.ref.order();
    Eigen::VectorXd xbar(n + 2 * l);
    xbar.head(n) = x_phys.cwiseQuotient(bases.x_base) - Eigen::VectorXd::Ones(n);
    xbar.segment(n, l) = ctrl.x_ref.head(l) - Eigen::VectorXd::Ones(l);
    xbar.tail(l) = ctrl.x_int.head(l);

    Eigen::VectorXd u0 = Eigen::VectorXd::Ones(K.rows());
    u0(0) = blend_beta0(beta0_nodes, gains.grid, z);
    const Eigen::VectorXd u_pu = u0 - K * xbar;
    Eigen::Vector2d u;
    u(0) = u_pu(0);                                          // beta, rad
    u(1) = u_pu(1) * params.rated_generator_torque;          // demanded torque, N.m
    return u;
}

void step(ClosedLoopState& s, const Eigen::Vector2d& w_ref_pu, double v, const SimConfig& cfg,
          const GainSchedule& gains, const std::vector<double>& beta0_nodes,
          const CoefficientSurface& surface, const TurbineParams& params, bool first_step) {
    const double dt = cfg.dt;
    const double tg_rate = params.max_torque_rate;
    const double pitch_rate = params.max_pitch_rate;

    Eigen::VectorXd xp(4);
    xp << s.x(0), s.x(1), s.x(2), s.x(3);
    const Eigen::Vector2d raw = pdc_control(xp, s.ctrl, s.z, gains, beta0_nodes, params);

    double beta_c = raw(0);
    double tgd_c = raw(1);
    if (!first_step) {
        if (cfg.limits.pitch_rate)
            beta_c = std::clamp(beta_c, s.beta_applied - pitch_rate * dt,
                                s.beta_applied + pitch_rate * dt);
        if (cfg.limits.torque_rate)
            tgd_c = std::clamp(tgd_c, s.tgd_applied - tg_rate * dt, s.tgd_applied + tg_rate * dt);
    }
    if (cfg.limits.torque_magnitude)
        tgd_c = std::clamp(tgd_c, -params.max_generator_torque, params.max_generator_torque);
    beta_c = std::clamp(beta_c, cfg.limits.pitch_min, cfg.limits.pitch_max);
    s.beta_applied = beta_c;
    s.tgd_applied = tgd_c;

    // Back-calculation anti-windup: feed the command deficit into the error
    // integrators so they track what the saturated actuators can deliver.
    const Eigen::MatrixXd K = gains.blend(s.z);
    Eigen::Vector2d aw = Eigen::Vector2d::Zero();
    const double d_beta = beta_c - raw(0);
    const double d_tg = (tgd_c - raw(1)) / params.rated_generator_torque;
    if (d_beta != 0.0 && std::abs(K(0, 6)) > 1e-9) aw(0) = d_beta / (-K(0, 6)) / cfg.anti_windup_tau;
    if (d_tg != 0.0 && std::abs(K(1, 7)) > 1e-9) aw(1) = d_tg / (-K(1, 7)) / cfg.anti_windup_tau;

    const double tau_ref_tg =
        (cfg.scenario == Scenario::Frt) ? cfg.tau_ref_torque_frt : cfg.tau_ref_torque;
    Eigen::Matrix2d Ar = Eigen::Matrix2d::Zero(), Er = Eigen::Matrix2d::Zero();
    Ar(0, 0) = -1.0 / cfg.tau_ref_speed;
    Ar(1, 1) = -1.0 / tau_ref_tg;
    Er(0, 0) = 1.0 / cfg.tau_ref_speed;
    Er(1, 1) = 1.0 / tau_ref_tg;

    struct Deriv {
        Eigen::Vector4d dx;
        Eigen::Vector2d dxr, dxi;
    };
    auto f = [&](const Eigen::Vector4d& x, const Eigen::Vector2d& xr,
                 const Eigen::Vector2d& xi) -> Deriv {
        (void)xi;
        Deriv d;
        d.dx = derivs_4state({x(0), x(1), x(2), x(3)}, {beta_c, tgd_c}, v, cfg.tau_act, surface,
                             params);
        d.dxr = Ar * xr + Er * w_ref_pu;
        Eigen::Vector2d y_pu(x(0) / params.rated_rotor_speed,
                             x(3) / params.rated_generator_torque);
        d.dxi = (xr - y_pu) + aw;
        return d;
    };

    const Eigen::Vector4d x0 = s.x;
    const Eigen::Vector2d r0 = s.ctrl.x_ref, i0 = s.ctrl.x_int;
    const Deriv k1 = f(x0, r0, i0);
    const Deriv k2 = f(x0 + 0.5 * dt * k1.dx, r0 + 0.5 * dt * k1.dxr, i0 + 0.5 * dt * k1.dxi);
    const Deriv k3 = f(x0 + 0.5 * dt * k2.dx, r0 + 0.5 * dt * k2.dxr, i0 + 0.5 * dt * k2.dxi);
    const Deriv k4 = f(x0 + dt * k3.dx, r0 + dt * k3.dxr, i0 + dt * k3.dxi);
    s.x = x0 + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    s.ctrl.x_ref = r0 + dt / 6.0 * (k1.dxr + 2.0 * k2.dxr + 2.0 * k3.dxr + k4.dxr);
    s.ctrl.x_int = i0 + dt / 6.0 * (k1.dxi + 2.0 * k2.dxi + 2.0 * k3.dxi + k4.dxi);
    if (!s.x.allFinite())
        throw std::runtime_error("step: non-finite state, aborting at last good sample");
    s.z = premise_filter(v, s.z, dt, cfg.tau_z);
}

SimTrace run_scenario(const SimConfig& cfg, const GainSchedule& gains,
                      const std::vector<double>& beta0_nodes,
                      const CoefficientSurface& surface, const TurbineParams& params) {
    cfg.validate(params);
    if (beta0_nodes.size() != gains.grid.size())
        throw std::invalid_argument("run_scenario: beta0 schedule does not match the gain grid");

    const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));

    // Wind series.
    std::vector<double> vs;
    switch (cfg.wind.kind) {
        case WindKind::Constant:
            vs.assign(steps + 1, cfg.wind.v_mean);
            break;
        case WindKind::Turbulent:
            vs = wind_turbulent(cfg.wind.v_mean, cfg.wind.intensity, cfg.wind.seed, cfg.duration,
                                cfg.dt, cfg.wind.corner_hz);
            break;
        case WindKind::Gust: {
            vs.resize(steps + 1);
            for (std::size_t k = 0; k <= steps; ++k)
                vs[k] = wind_gust(cfg.wind.v_mean, static_cast<double>(k) * cfg.dt, cfg.step_time,
                                  cfg.wind);
            break;
        }
        case WindKind::Series:
            vs = cfg.wind.series;
            if (vs.size() < steps + 1)
                throw std::invalid_argument("run_scenario: wind series shorter than the run");
            break;
    }

    // Reference program in p.u.
    auto refs_at = [&](double t) -> Eigen::Vector2d {
        switch (cfg.scenario) {
            case Scenario::Constant:
            case Scenario::Gust:
                return {1.0, 1.0};
            case Scenario::Turbulent: {
                double tg = 1.0;
                if (t >= cfg.step_time && t < cfg.step_time + 50.0) {
                    const int seg = static_cast<int>((t - cfg.step_time) / 10.0);
                    const double base = 0.5;
                    tg = (seg == 0) ? base : base + ((seg % 2 == 1) ? 0.1 : -0.1);
                }
                return {1.0, tg};
            }
            case Scenario::Frt: {
                const bool fault = (t >= cfg.fault_start) && (t < cfg.fault_start + cfg.fault_duration);
                return {1.0, fault ? 0.0 : 1.0};
            }
            case Scenario::Simultaneous: {
                const bool low = (t >= cfg.step_time) && (t < cfg.step_time + 40.0);
                return low ? Eigen::Vector2d{0.9, 0.9} : Eigen::Vector2d{1.0, 1.0};
            }
        }
        return {1.0, 1.0};
    };

    ClosedLoopState s;
    s.x << params.rated_rotor_speed, params.rated_generator_speed, params.rated_torsion(),
        params.rated_generator_torque;
    s.z = vs.front();
    s.beta_applied = blend_beta0(beta0_nodes, gains.grid, s.z);
    s.tgd_applied = params.rated_generator_torque;

    SimTrace tr;
    const std::size_t n_out = steps + 1;
    for (auto* col : {&tr.t, &tr.v, &tr.z, &tr.omega_r, &tr.omega_g, &tr.dtheta, &tr.T_g,
                      &tr.beta, &tr.T_g_d, &tr.omega_r_ref, &tr.T_g_ref, &tr.eps_omega, &tr.eps_T,
                      &tr.P_g})
        col->reserve(n_out);

    auto record = [&](double t, double v) {
        tr.t.push_back(t);
        tr.v.push_back(v);
        tr.z.push_back(s.z);
        tr.omega_r.push_back(s.x(0));
        tr.omega_g.push_back(s.x(1));
        tr.dtheta.push_back(s.x(2));
        tr.T_g.push_back(s.x(3));
        tr.beta.push_back(s.beta_applied);
        tr.T_g_d.push_back(s.tgd_applied);
        tr.omega_r_ref.push_back(s.ctrl.x_ref(0) * params.rated_rotor_speed);
        tr.T_g_ref.push_back(s.ctrl.x_ref(1) * params.rated_generator_torque);
        tr.eps_omega.push_back(s.ctrl.x_ref(0) - s.x(0) / params.rated_rotor_speed);
        tr.eps_T.push_back(s.ctrl.x_ref(1) - s.x(3) / params.rated_generator_torque);
        tr.P_g.push_back(params.generator_efficiency * s.x(3) * s.x(1));
    };

    record(0.0, vs.front());
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        step(s, refs_at(t), vs[k], cfg, gains, beta0_nodes, surface, params, k == 0);
        record(static_cast<double>(k + 1) * cfg.dt, vs[k + 1]);
    }

    std::ostringstream meta;
    const char* names[] = {"constant", "turbulent", "gust", "frt", "simultaneous"};
    meta << "# scenario=" << names[static_cast<int>(cfg.scenario)];
    if (!cfg.label.empty()) meta << ":" << cfg.label;
    meta << ",seed=" << cfg.wind.seed << ",dt=" << cfg.dt << ",limits=pitch_rate:"
         << (cfg.limits.pitch_rate ? 1 : 0) << ",torque_rate:" << (cfg.limits.torque_rate ? 1 : 0)
         << ",torque_mag:" << (cfg.limits.torque_magnitude ? 1 : 0);
    tr.meta = meta.str();
    return tr;
}

}  // namespace tsmrc
