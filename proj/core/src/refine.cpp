#include "tsmrc/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsmrc {

namespace {

// RK4 on dx = A x + E w with constant w.
Eigen::VectorXd integrate_linear(const Eigen::MatrixXd& A, const Eigen::MatrixXd& E,
                                 const Eigen::VectorXd& w, double t_end, double dt) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(A.rows());
    const Eigen::VectorXd ew = E * w;
    const int steps = static_cast<int>(std::round(t_end / dt));
    for (int k = 0; k < steps; ++k) {
        const Eigen::VectorXd k1 = A * x + ew;
        const Eigen::VectorXd k2 = A * (x + 0.5 * dt * k1) + ew;
        const Eigen::VectorXd k3 = A * (x + 0.5 * dt * k2) + ew;
        const Eigen::VectorXd k4 = A * (x + dt * k3) + ew;
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

struct NodeContext {
    // torque-design augmented model (own reference) and the combined-loop
    // variants (runtime reference; FRT reference) for submodels j-1, j, j+1.
    std::vector<const AugmentedModel*> own;        // design-reference models
    std::vector<const AugmentedModel*> runtime;    // combined runtime reference
    const AugmentedModel* frt = nullptr;           // node j, FRT reference
    std::vector<Eigen::MatrixXd> speed_rows;       // speed-schedule gains at the same indices
    int j = 0;
};

Eigen::MatrixXd combine_one(const Eigen::MatrixXd& Ks, const Eigen::MatrixXd& Kt) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2, 8);
    K(0, 0) = Ks(0, 0);
    K(0, 4) = Ks(0, 1);
    K(0, 6) = Ks(0, 2);
    K.block(1, 0, 1, 4) = Kt.block(1, 0, 1, 4);
    K(1, 5) = Kt(1, 5);
    K(1, 7) = Kt(1, 7);
    return K;
}

class RefineObjective {
  public:
    RefineObjective(const RefineOptions& opts, const SynthesisSpec& speed_spec,
                    const SynthesisSpec& torque_spec, double rate_pu)
        : o_(opts), tan_cone_(std::tan(torque_spec.theta)), rate_pu_(rate_pu) {
        amin_own_ = torque_spec.alpha_min;
        amax_own_ = torque_spec.alpha_max;
        amin_env_ = std::min(speed_spec.alpha_min, torque_spec.alpha_min);
        amax_env_ = std::max(speed_spec.alpha_max, torque_spec.alpha_max);
        refp_own_ = {-1.0 / torque_spec.tau(0), -1.0 / torque_spec.tau(1)};
        refp_run_ = {-1.0 / speed_spec.tau(0), -1.0 / torque_spec.tau(1)};
        gamma_ = torque_spec.gamma;
    }

    double step_error(const AugmentedModel& a, const Eigen::MatrixXd& K) const {
        const Eigen::MatrixXd Acl = a.Abar - a.Bbar * K;
        Eigen::VectorXd w(2);
        w << 0.0, -0.5;
        double worst = 0.0;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(Acl.rows());
        const Eigen::VectorXd ew = a.Ebar * w;
        const double dt = 2e-3;
        const int total = 450;
        for (int k = 1; k <= total; ++k) {
            const Eigen::VectorXd k1 = Acl * x + ew;
            const Eigen::VectorXd k2 = Acl * (x + 0.5 * dt * k1) + ew;
            const Eigen::VectorXd k3 = Acl * (x + 0.5 * dt * k2) + ew;
            const Eigen::VectorXd k4 = Acl * (x + dt * k3) + ew;
            x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (k == 150 || k == 300 || k == 450) {
                const double t = dt * k;
                const double oracle = -0.5 * (1.0 - std::exp(-t / 0.3));
                worst = std::max(worst, std::abs(x(3) - oracle) / 0.5);
            }
        }
        return worst;
    }

    double frt_torque(const AugmentedModel& a, const Eigen::MatrixXd& Kmt) const {
        Eigen::VectorXd w(2);
        w << 0.0, -1.0;
        const Eigen::MatrixXd Acl = a.Abar - a.Bbar * Kmt;
        const Eigen::VectorXd x = integrate_linear(Acl, a.Ebar, w, 0.15, 5e-4);
        return std::abs(1.0 + x(3));
    }

    // Rate-limited small-step settling on the combined loop.
    struct SatMetrics {
        double final_err, ripple, growth;
    };
    SatMetrics saturated_step(const AugmentedModel& a, const Eigen::MatrixXd& Kmt) const {
        const double dt = 0.01, t_end = 10.0;
        const int steps = static_cast<int>(t_end / dt);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(8);
        Eigen::VectorXd w(2);
        w << 0.0, -0.1;
        const Eigen::VectorXd ew = a.Ebar * w;
        double tgd_prev = 0.0;
        std::vector<double> tg(static_cast<std::size_t>(steps));
        for (int k = 0; k < steps; ++k) {
            double tgd = (-Kmt * x)(1);
            tgd = std::clamp(tgd, tgd_prev - rate_pu_ * dt, tgd_prev + rate_pu_ * dt);
            tgd_prev = tgd;
            auto deriv = [&](const Eigen::VectorXd& xx) -> Eigen::VectorXd {
                Eigen::VectorXd u = -Kmt * xx;
                u(1) = tgd;   // torque demand held at the limited value
                return a.Abar * xx + a.Bbar * u + ew;
            };
            const Eigen::VectorXd k1 = deriv(x);
            const Eigen::VectorXd k2 = deriv(x + 0.5 * dt * k1);
            const Eigen::VectorXd k3 = deriv(x + 0.5 * dt * k2);
            const Eigen::VectorXd k4 = deriv(x + dt * k3);
            x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            tg[static_cast<std::size_t>(k)] = x(3);
        }
        const int n3 = static_cast<int>(2.5 / dt);
        auto span = [&](int lo, int hi) {
            double mn = tg[static_cast<std::size_t>(lo)], mx = mn;
            for (int k = lo; k < hi; ++k) {
                mn = std::min(mn, tg[static_cast<std::size_t>(k)]);
                mx = std::max(mx, tg[static_cast<std::size_t>(k)]);
            }
            return mx - mn;
        };
        SatMetrics m;
        m.final_err = std::abs(tg.back() + 0.1) / 0.1;
        const double pp_late = span(steps - n3, steps);
        const double pp_mid = span(n3, 2 * n3);
        m.ripple = pp_late / 0.1;
        m.growth = pp_late / std::max(pp_mid, 1e-6);
        return m;
    }

    double hinf_coarse(const AugmentedModel& a, const Eigen::MatrixXd& K) const {
        const Eigen::MatrixXd Acl = a.Abar - a.Bbar * K;
        const int N = static_cast<int>(Acl.rows());
        const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(N, N);
        const Eigen::MatrixXcd E = a.Ebar.cast<std::complex<double>>();
        double best = 0.0;
        for (int k = 0; k < 40; ++k) {
            const double wfreq = std::pow(10.0, -2.0 + 4.5 * k / 39.0);
            const Eigen::MatrixXcd G =
                a.Cbar * (std::complex<double>(0.0, wfreq) * I - Acl).partialPivLu().solve(E);
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
            best = std::max(best, svd.singularValues()(0));
        }
        return best;
    }

    double region_penalty(const Eigen::MatrixXd& Acl, const std::vector<double>& refp,
                          double amin, double amax) const {
        Eigen::EigenSolver<Eigen::MatrixXd> es(Acl);
        double p = 0.0;
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            const std::complex<double> lam = es.eigenvalues()(k);
            bool isref = false;
            for (double r : refp)
                if (std::abs(lam - std::complex<double>(r, 0.0)) < 1e-6) isref = true;
            if (isref) continue;
            const double re = lam.real();
            const double im = std::abs(lam.imag());
            if (re > -(amin + 0.005)) p += std::pow(re + amin + 0.005, 2);
            if (re < -(amax - 0.05)) p += std::pow(-(amax - 0.05) - re, 2);
            const double lim = tan_cone_ * std::abs(re) * 0.92;
            if (im > lim) p += std::pow((im - lim) / 10.0, 2);
        }
        return p;
    }

    double operator()(const NodeContext& ctx, const Eigen::MatrixXd& K) const {
        const std::size_t self = ctx.j == 0 ? 0 : 1;   // position of node j in ctx.own
        const double e = step_error(*ctx.own[self], K);
        const Eigen::MatrixXd Kmt_self = combine_one(ctx.speed_rows[self], K);
        const double f = frt_torque(*ctx.frt, Kmt_self);
        const double h = hinf_coarse(*ctx.own[self], K);
        const SatMetrics sm = saturated_step(*ctx.runtime[self], Kmt_self);
        double p = 0.0;
        for (std::size_t s = 0; s < ctx.own.size(); ++s) {
            p += region_penalty(ctx.own[s]->Abar - ctx.own[s]->Bbar * K, refp_own_, amin_own_,
                                amax_own_);
            const Eigen::MatrixXd Kmt = combine_one(ctx.speed_rows[s], K);
            p += region_penalty(ctx.runtime[s]->Abar - ctx.runtime[s]->Bbar * Kmt, refp_run_,
                                amin_env_, amax_env_);
        }
        double J = o_.step_weight * e;
        J += o_.frt_weight * std::max(0.0, f - o_.frt_allow);
        J += o_.region_weight * p;
        J += o_.hinf_weight * std::pow(std::max(0.0, h - o_.hinf_cap), 2);
        J += 0.2 * std::max(0.0, h - o_.hinf_cap);
        J += o_.sat_final_weight * std::max(0.0, sm.final_err - o_.sat_final_allow);
        J += o_.sat_ripple_weight * std::max(0.0, sm.ripple - o_.sat_ripple_allow);
        J += o_.sat_growth_weight * std::max(0.0, sm.growth - o_.sat_growth_allow);
        return J;
    }

  private:
    RefineOptions o_;
    double tan_cone_, rate_pu_;
    double amin_own_, amax_own_, amin_env_, amax_env_;
    std::vector<double> refp_own_, refp_run_;
    double gamma_;
};

// Deterministic Nelder-Mead with scipy-style initial simplex.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, int max_iter, double* fbest_out) {
    const int n = static_cast<int>(x0.size());
    std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(n + 1), x0);
    std::vector<double> fs(static_cast<std::size_t>(n + 1));
    for (int k = 0; k < n; ++k) {
        if (x0(k) != 0.0)
            xs[static_cast<std::size_t>(k + 1)](k) *= 1.05;
        else
            xs[static_cast<std::size_t>(k + 1)](k) = 2.5e-4;
    }
    for (int k = 0; k <= n; ++k) fs[static_cast<std::size_t>(k)] = f(xs[static_cast<std::size_t>(k)]);

    std::vector<int> order(static_cast<std::size_t>(n + 1));
    for (int it = 0; it < max_iter; ++it) {
        for (int k = 0; k <= n; ++k) order[static_cast<std::size_t>(k)] = k;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return fs[static_cast<std::size_t>(a)] < fs[static_cast<std::size_t>(b)];
        });
        const int ibest = order.front(), iworst = order.back(), i2nd = order[static_cast<std::size_t>(n - 1)];
        if (std::abs(fs[static_cast<std::size_t>(iworst)] - fs[static_cast<std::size_t>(ibest)]) <=
            1e-9 * (1.0 + std::abs(fs[static_cast<std::size_t>(ibest)])))
            break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int k = 0; k <= n; ++k)
            if (k != iworst) centroid += xs[static_cast<std::size_t>(k)];
        centroid /= n;

        const Eigen::VectorXd xr = centroid + (centroid - xs[static_cast<std::size_t>(iworst)]);
        const double fr = f(xr);
        if (fr < fs[static_cast<std::size_t>(ibest)]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[static_cast<std::size_t>(iworst)]);
            const double fe = f(xe);
            if (fe < fr) {
                xs[static_cast<std::size_t>(iworst)] = xe;
                fs[static_cast<std::size_t>(iworst)] = fe;
            } else {
                xs[static_cast<std::size_t>(iworst)] = xr;
                fs[static_cast<std::size_t>(iworst)] = fr;
            }
        } else if (fr < fs[static_cast<std::size_t>(i2nd)]) {
            xs[static_cast<std::size_t>(iworst)] = xr;
            fs[static_cast<std::size_t>(iworst)] = fr;
        } else {
            const bool outside = fr < fs[static_cast<std::size_t>(iworst)];
            const Eigen::VectorXd xc =
                outside ? centroid + 0.5 * (xr - centroid)
                        : centroid + 0.5 * (xs[static_cast<std::size_t>(iworst)] - centroid);
            const double fc = f(xc);
            if (fc < (outside ? fr : fs[static_cast<std::size_t>(iworst)])) {
                xs[static_cast<std::size_t>(iworst)] = xc;
                fs[static_cast<std::size_t>(iworst)] = fc;
            } else {
                for (int k = 0; k <= n; ++k) {
                    if (k == ibest) continue;
                    xs[static_cast<std::size_t>(k)] =
                        xs[static_cast<std::size_t>(ibest)] +
                        0.5 * (xs[static_cast<std::size_t>(k)] - xs[static_cast<std::size_t>(ibest)]);
                    fs[static_cast<std::size_t>(k)] = f(xs[static_cast<std::size_t>(k)]);
                }
            }
        }
    }
    int ibest = 0;
    for (int k = 1; k <= n; ++k)
        if (fs[static_cast<std::size_t>(k)] < fs[static_cast<std::size_t>(ibest)]) ibest = k;
    if (fbest_out) *fbest_out = fs[static_cast<std::size_t>(ibest)];
    return xs[static_cast<std::size_t>(ibest)];
}

// Structure found by the original single-vertex search; used as the anchor
// start for the middle node.
Eigen::MatrixXd canonical_seed() {
    Eigen::MatrixXd K(2, 8);
    K << -4.2, -3.3, -2.5, -0.8, 0.57, -0.32, -5.5, 21.6,
        -1.5, -2.6, -4.2, 0.29, 4.9, 0.018, 6.1, -9.5;
    return K;
}

}  // namespace

RefineResult refine_torque_schedule(const std::vector<TsSubmodel>& torque_submodels_physical,
                                    const GainSchedule& torque_certified,
                                    const GainSchedule& speed_schedule,
                                    const SynthesisSpec& speed_spec,
                                    const SynthesisSpec& torque_spec,
                                    const TurbineParams& params, const RefineOptions& opts) {
    const int Nr = static_cast<int>(torque_certified.K.size());
    if (static_cast<int>(torque_submodels_physical.size()) != Nr ||
        static_cast<int>(speed_schedule.K.size()) != Nr)
        throw std::invalid_argument("refine_torque_schedule: schedule/submodel size mismatch");

    const UnitBases bases = UnitBases::from(params, PlantModel::FourState);
    std::vector<TsSubmodel> subs_pu;
    for (const auto& s : torque_submodels_physical) subs_pu.push_back(to_per_unit(s, bases));

    const ReferenceModel ref_own = torque_certified.ref;
    const ReferenceModel ref_run = combined_reference(speed_spec, torque_spec);
    Eigen::VectorXd tau_frt(2);
    tau_frt << speed_spec.tau(0), opts.tau_torque_ref_frt;
    const ReferenceModel ref_frt = build_reference_model(ReferenceKind::SpeedAndTorque, tau_frt);

    const std::vector<AugmentedModel> aug_own = augment(subs_pu, ref_own);
    const std::vector<AugmentedModel> aug_run = augment(subs_pu, ref_run);
    const std::vector<AugmentedModel> aug_frt = augment(subs_pu, ref_frt);

    const double rate_pu =
        (opts.torque_rate_pu > 0.0) ? opts.torque_rate_pu
                                    : params.max_torque_rate / params.rated_generator_torque;
    const RefineObjective metric(opts, speed_spec, torque_spec, rate_pu);

    auto make_ctx = [&](int j) {
        NodeContext ctx;
        ctx.j = j;
        for (int i = std::max(0, j - 1); i <= std::min(Nr - 1, j + 1); ++i) {
            ctx.own.push_back(&aug_own[static_cast<std::size_t>(i)]);
            ctx.runtime.push_back(&aug_run[static_cast<std::size_t>(i)]);
            ctx.speed_rows.push_back(speed_schedule.K[static_cast<std::size_t>(i)]);
        }
        ctx.frt = &aug_frt[static_cast<std::size_t>(j)];
        return ctx;
    };

    auto optimize_node = [&](int j, const std::vector<Eigen::MatrixXd>& starts, double* fout) {
        const NodeContext ctx = make_ctx(j);
        auto f = [&](const Eigen::VectorXd& v) {
            const Eigen::Map<const Eigen::Matrix<double, 2, 8, Eigen::RowMajor>> K(v.data());
            return metric(ctx, K);
        };
        Eigen::MatrixXd best;
        double fbest = std::numeric_limits<double>::max();
        for (const auto& K0 : starts) {
            Eigen::VectorXd v0(16);
            Eigen::Map<Eigen::Matrix<double, 2, 8, Eigen::RowMajor>>(v0.data()) = K0;
            double fv = 0.0;
            const Eigen::VectorXd v = nelder_mead(f, v0, opts.nm_max_iter, &fv);
            if (fv < fbest) {
                fbest = fv;
                best = Eigen::Map<const Eigen::Matrix<double, 2, 8, Eigen::RowMajor>>(v.data());
            }
        }
        if (fout) *fout = fbest;
        return best;
    };

    RefineResult res;
    res.schedule = torque_certified;
    res.node_objectives.assign(static_cast<std::size_t>(Nr), 0.0);
    auto& K = res.schedule.K;

    const int mid = Nr / 2;
    K[static_cast<std::size_t>(mid)] = optimize_node(
        mid, {canonical_seed(), torque_certified.K[static_cast<std::size_t>(mid)]},
        &res.node_objectives[static_cast<std::size_t>(mid)]);
    for (int j = mid + 1; j < Nr; ++j)
        K[static_cast<std::size_t>(j)] =
            optimize_node(j, {K[static_cast<std::size_t>(j - 1)]},
                          &res.node_objectives[static_cast<std::size_t>(j)]);
    for (int j = mid - 1; j >= 0; --j)
        K[static_cast<std::size_t>(j)] =
            optimize_node(j, {K[static_cast<std::size_t>(j + 1)], canonical_seed()},
                          &res.node_objectives[static_cast<std::size_t>(j)]);
    // Second pass for nodes the chain left behind.
    for (int j = 0; j < Nr; ++j) {
        if (res.node_objectives[static_cast<std::size_t>(j)] < opts.accept_threshold) continue;
        std::vector<Eigen::MatrixXd> starts{K[static_cast<std::size_t>(j)]};
        if (j > 0) starts.push_back(K[static_cast<std::size_t>(j - 1)]);
        if (j < Nr - 1) starts.push_back(K[static_cast<std::size_t>(j + 1)]);
        K[static_cast<std::size_t>(j)] =
            optimize_node(j, starts, &res.node_objectives[static_cast<std::size_t>(j)]);
    }

    for (int j = 0; j < Nr; ++j) {
        res.worst_step_error = std::max(
            res.worst_step_error,
            metric.step_error(aug_own[static_cast<std::size_t>(j)], K[static_cast<std::size_t>(j)]));
        const Eigen::MatrixXd Kmt =
            combine_one(speed_schedule.K[static_cast<std::size_t>(j)], K[static_cast<std::size_t>(j)]);
        res.worst_frt = std::max(
            res.worst_frt, metric.frt_torque(aug_frt[static_cast<std::size_t>(j)], Kmt));
    }
    return res;
}

}  // namespace tsmrc
