#include "tsmrc/linearize.hpp"

#include <cmath>
#include <sstream>

namespace tsmrc {

Eigen::VectorXd MembershipGrid::weights(double z) const {
    const std::size_t n = nodes.size();
    Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    if (n == 1) {
        h(0) = 1.0;
        return h;
    }
    const double zc = std::clamp(z, nodes.front(), nodes.back());
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (zc <= nodes[k + 1]) {
            const double span = nodes[k + 1] - nodes[k];
            const double t = (zc - nodes[k]) / span;
            h(static_cast<Eigen::Index>(k)) = 1.0 - t;
            h(static_cast<Eigen::Index>(k + 1)) = t;
            return h;
        }
    }
    h(static_cast<Eigen::Index>(n - 1)) = 1.0;
    return h;
}

Eigen::MatrixXd jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x) {
    const Eigen::VectorXd f0 = f(x);
    Eigen::MatrixXd J(f0.size(), x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double h = std::max(1e-6, 1e-6 * std::abs(x(k)));
        Eigen::VectorXd xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        const Eigen::VectorXd fp = f(xp), fm = f(xm);
        if (!fp.allFinite() || !fm.allFinite()) {
            std::ostringstream os;
            os << "jacobian: non-finite evaluation while perturbing coordinate " << k;
            throw std::runtime_error(os.str());
        }
        J.col(k) = (fp - fm) / (2.0 * h);
    }
    return J;
}

UnitBases UnitBases::from(const TurbineParams& p, PlantModel model) {
    UnitBases b;
    switch (model) {
        case PlantModel::OneDof:
            b.x_base = Eigen::VectorXd::Constant(1, p.rated_rotor_speed);
            break;
        case PlantModel::ThreeDof:
            b.x_base.resize(3);
            b.x_base << p.rated_rotor_speed, p.rated_generator_speed, p.rated_torsion();
            break;
        case PlantModel::FourState:
            b.x_base.resize(4);
            b.x_base << p.rated_rotor_speed, p.rated_generator_speed, p.rated_torsion(),
                p.rated_generator_torque;
            break;
    }
    b.u_base.resize(2);
    b.u_base << 1.0, p.rated_generator_torque;
    b.y_base << p.rated_rotor_speed, p.rated_generator_torque;
    return b;
}

namespace {

Eigen::VectorXd equilibrium_state(PlantModel model, const TurbineParams& p) {
    switch (model) {
        case PlantModel::OneDof: {
            Eigen::VectorXd x(1);
            x << p.rated_rotor_speed;
            return x;
        }
        case PlantModel::ThreeDof: {
            Eigen::VectorXd x(3);
            x << p.rated_rotor_speed, p.rated_generator_speed, p.rated_torsion();
            return x;
        }
        case PlantModel::FourState: {
            Eigen::VectorXd x(4);
            x << p.rated_rotor_speed, p.rated_generator_speed, p.rated_torsion(),
                p.rated_generator_torque;
            return x;
        }
    }
    return {};
}

Eigen::VectorXd eval_derivs(PlantModel model, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u, double v, double tau_act,
                            const CoefficientSurface& s, const TurbineParams& p) {
    switch (model) {
        case PlantModel::OneDof: {
            Eigen::VectorXd d(1);
            d << derivs_1dof({x(0)}, {u(0), u(1)}, v, s, p);
            return d;
        }
        case PlantModel::ThreeDof:
            return derivs_3dof({x(0), x(1), x(2)}, {u(0), u(1)}, v, s, p);
        case PlantModel::FourState:
            return derivs_4state({x(0), x(1), x(2), x(3)}, {u(0), u(1)}, v, tau_act, s, p);
    }
    return {};
}

}  // namespace

std::vector<OperatingPoint> build_grid(const TurbineParams& params,
                                       const CoefficientSurface& surface,
                                       double v_lo, double v_hi, int n_points,
                                       PlantModel model) {
    if (n_points < 1) throw std::invalid_argument("build_grid: need at least one point");
    if (v_lo < params.v_rated || v_hi > params.v_cut_out || v_lo >= v_hi + 1e-12)
        throw std::invalid_argument("build_grid: wind range must lie within [v_rated, v_cut_out]");

    const UnitBases bases = UnitBases::from(params, model);
    std::vector<OperatingPoint> grid;
    grid.reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        OperatingPoint pt;
        pt.index = i;
        pt.v0 = (n_points == 1) ? v_lo : v_lo + (v_hi - v_lo) * double(i) / (n_points - 1);
        pt.x0 = equilibrium_state(model, params);
        pt.u0.resize(2);
        pt.u0 << steady_state_pitch(pt.v0, params, surface), params.rated_generator_torque;

        const Eigen::VectorXd f = eval_derivs(model, pt.x0, pt.u0, pt.v0, 0.30, surface, params);
        const double res = (f.cwiseQuotient(bases.x_base)).cwiseAbs().maxCoeff();
        if (res > 1e-6) {
            std::ostringstream os;
            os << "build_grid: equilibrium residual " << res << " p.u. at v = " << pt.v0;
            throw std::runtime_error(os.str());
        }
        grid.push_back(std::move(pt));
    }
    return grid;
}

std::vector<TsSubmodel> build_submodels(PlantModel model,
                                        const std::vector<OperatingPoint>& grid,
                                        const TurbineParams& params,
                                        const CoefficientSurface& surface,
                                        double tau_act) {
    const double ng = params.gear_ratio;
    const double kS = params.shaft_stiffness;
    const double dS = params.shaft_damping;
    const double Jr = params.inertia_rotor;
    const double Jg = params.inertia_generator;

    std::vector<TsSubmodel> out;
    out.reserve(grid.size());
    for (const auto& pt : grid) {
        // Aerodynamic partials via central differences on T_r(ω_r, β, v).
        Eigen::VectorXd q(3);
        q << pt.x0(0), pt.u0(0), pt.v0;
        const Eigen::MatrixXd Jaero = jacobian(
            [&](const Eigen::VectorXd& w) {
                Eigen::VectorXd r(1);
                r << rotor_torque(w(2), w(0), w(1), surface, params);
                return r;
            },
            q);
        const double dT_dw = Jaero(0, 0);
        const double dT_db = Jaero(0, 1);
        const double dT_dv = Jaero(0, 2);

        TsSubmodel m;
        m.point = pt;
        switch (model) {
            case PlantModel::OneDof: {
                const double J1 = params.lumped_inertia();
                m.A = Eigen::MatrixXd::Constant(1, 1, dT_dw / J1);
                m.B.resize(1, 2);
                m.B << dT_db / J1, -ng / J1;
                m.Bd = Eigen::MatrixXd::Constant(1, 1, dT_dv / J1);
                m.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
                break;
            }
            case PlantModel::ThreeDof: {
                m.A.resize(3, 3);
                m.A << (dT_dw - dS * ng * ng) / Jr, dS * ng / Jr, -kS * ng * ng / Jr,
                    dS * ng / Jg, -dS / Jg, kS * ng / Jg,
                    1.0, -1.0 / ng, 0.0;
                m.B.resize(3, 2);
                m.B << dT_db / Jr, 0.0, 0.0, -1.0 / Jg, 0.0, 0.0;
                m.Bd = Eigen::MatrixXd::Zero(3, 1);
                m.Bd(0, 0) = dT_dv / Jr;
                m.C.resize(2, 3);
                m.C << 1, 0, 0, 0, 0, 0;
                break;
            }
            case PlantModel::FourState: {
                if (tau_act <= 0.0) throw std::invalid_argument("build_submodels: tau_act must be positive");
                m.A.resize(4, 4);
                m.A << (dT_dw - dS * ng * ng) / Jr, dS * ng / Jr, -kS * ng * ng / Jr, 0.0,
                    dS * ng / Jg, -dS / Jg, kS * ng / Jg, -1.0 / Jg,
                    1.0, -1.0 / ng, 0.0, 0.0,
                    0.0, 0.0, 0.0, -1.0 / tau_act;
                m.B.resize(4, 2);
                m.B << dT_db / Jr, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0 / tau_act;
                m.Bd = Eigen::MatrixXd::Zero(4, 1);
                m.Bd(0, 0) = dT_dv / Jr;
                m.C.resize(2, 4);
                m.C << 1, 0, 0, 0, 0, 0, 0, 1;
                break;
            }
        }
        const int q_dim = static_cast<int>(m.C.rows());
        m.E = Eigen::MatrixXd::Zero(m.A.rows(), q_dim);
        m.F = Eigen::MatrixXd::Zero(q_dim, q_dim);
        m.a = -m.A * pt.x0 - m.B * pt.u0 - m.Bd.col(0) * pt.v0;
        m.c = -m.C * pt.x0;

        // Controllability of (A, B): rank of [B AB A²B ...].
        const Eigen::Index n = m.A.rows();
        Eigen::MatrixXd ctrb(n, n * m.B.cols());
        Eigen::MatrixXd Ak = Eigen::MatrixXd::Identity(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            ctrb.middleCols(k * m.B.cols(), m.B.cols()) = Ak * m.B;
            Ak = m.A * Ak;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ctrb);
        qr.setThreshold(1e-12);
        if (qr.rank() < n) {
            std::ostringstream os;
            os << "build_submodels: submodel " << pt.index << " (v0 = " << pt.v0
               << ") is not controllable";
            throw std::runtime_error(os.str());
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<std::pair<int, int>> active_pairs(const MembershipGrid& grid) {
    const int n = static_cast<int>(grid.size());
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(i - j) <= 1) pairs.emplace_back(i, j);
    return pairs;
}

}  // namespace tsmrc
