#include "tsmrc/synthesis.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tsmrc {

std::vector<double> ReferenceModel::poles() const {
    std::vector<double> p;
    for (Eigen::Index k = 0; k < tau.size(); ++k) p.push_back(-1.0 / tau(k));
    return p;
}

ReferenceModel build_reference_model(ReferenceKind kind, const Eigen::VectorXd& tau) {
    if ((tau.array() <= 0.0).any())
        throw std::invalid_argument("build_reference_model: time constants must be positive");
    ReferenceModel r;
    r.tau = tau;
    const int l = (kind == ReferenceKind::SpeedOnly) ? 1 : 2;
    if (tau.size() != l)
        throw std::invalid_argument("build_reference_model: tau size does not match kind");
    r.Ar = Eigen::MatrixXd::Zero(l, l);
    r.Er = Eigen::MatrixXd::Zero(l, l);
    for (int k = 0; k < l; ++k) {
        r.Ar(k, k) = -1.0 / tau(k);
        r.Er(k, k) = 1.0 / tau(k);
    }
    r.Cr = Eigen::MatrixXd::Identity(l, l);
    r.Fr = Eigen::MatrixXd::Zero(l, l);
    return r;
}

TsSubmodel to_per_unit(const TsSubmodel& m, const UnitBases& bases) {
    const Eigen::VectorXd& dx = bases.x_base;
    TsSubmodel s = m;
    const auto Dxi = dx.cwiseInverse().asDiagonal();
    s.A = Dxi * m.A * dx.asDiagonal();
    // Input scaling: 1-DOF speed design keeps only the pitch column upstream;
    // generally B maps [beta, T_g(,d)] with u_base = [1, T_g,rated].
    Eigen::VectorXd ub = bases.u_base.head(m.B.cols());
    s.B = Dxi * m.B * ub.asDiagonal();
    s.Bd = Dxi * m.Bd;
    Eigen::VectorXd yb = bases.y_base.head(m.C.rows());
    s.C = yb.cwiseInverse().asDiagonal() * m.C * dx.asDiagonal();
    s.E = Eigen::MatrixXd::Zero(s.A.rows(), m.E.cols());
    s.F = Eigen::MatrixXd::Zero(s.C.rows(), m.F.cols());
    s.a = Dxi * m.a;
    s.c = yb.cwiseInverse().asDiagonal() * m.c;
    s.point.x0 = m.point.x0.cwiseQuotient(dx);
    s.point.u0 = m.point.u0.head(ub.size()).cwiseQuotient(ub);
    return s;
}

AugmentedModel augment(const TsSubmodel& sub, const ReferenceModel& ref) {
    AugmentedModel a;
    a.n = static_cast<int>(sub.A.rows());
    a.l = ref.order();
    a.q = static_cast<int>(sub.C.rows());
    a.m = static_cast<int>(sub.B.cols());
    if (a.q != static_cast<int>(ref.Cr.rows()))
        throw std::invalid_argument("augment: output dimension does not match reference model");
    const int N = a.dim();
    a.Abar = Eigen::MatrixXd::Zero(N, N);
    a.Abar.topLeftCorner(a.n, a.n) = sub.A;
    a.Abar.block(a.n, a.n, a.l, a.l) = ref.Ar;
    a.Abar.block(a.n + a.l, 0, a.q, a.n) = -sub.C;
    a.Abar.block(a.n + a.l, a.n, a.q, a.l) = ref.Cr;
    a.Bbar = Eigen::MatrixXd::Zero(N, a.m);
    a.Bbar.topRows(a.n) = sub.B;
    a.Ebar = Eigen::MatrixXd::Zero(N, a.l);
    a.Ebar.block(a.n, 0, a.l, a.l) = ref.Er;
    a.Cbar = Eigen::MatrixXd::Zero(a.q, N);
    a.Cbar.leftCols(a.n) = -sub.C;
    a.Cbar.middleCols(a.n, a.l) = ref.Cr;
    a.Fbar = Eigen::MatrixXd::Zero(a.q, a.l);
    return a;
}

std::vector<AugmentedModel> augment(const std::vector<TsSubmodel>& subs,
                                    const ReferenceModel& ref) {
    std::vector<AugmentedModel> out;
    out.reserve(subs.size());
    for (const auto& s : subs) out.push_back(augment(s, ref));
    return out;
}

void SynthesisSpec::validate() const {
    if (!(0.0 < alpha_min && alpha_min < alpha_max))
        throw std::invalid_argument("SynthesisSpec: need 0 < alpha_min < alpha_max");
    if (!(0.0 < theta && theta < M_PI / 2))
        throw std::invalid_argument("SynthesisSpec: theta must lie in (0, pi/2)");
    if (gamma <= 0.0) throw std::invalid_argument("SynthesisSpec: gamma must be positive");
    if ((tau.array() <= 0.0).any())
        throw std::invalid_argument("SynthesisSpec: reference time constants must be positive");
}

Eigen::MatrixXd GainSchedule::blend(double z) const {
    const Eigen::VectorXd h = grid.weights(z);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K.front().rows(), K.front().cols());
    for (Eigen::Index j = 0; j < h.size(); ++j)
        if (h(j) != 0.0) out += h(j) * K[static_cast<std::size_t>(j)];
    return out;
}

namespace {

// Reference-exempt variant for the decay/cone families: the decoupled
// reference block is replaced by a dummy pole at the band centre.
Eigen::MatrixXd dummy_ref(const AugmentedModel& a, const SynthesisSpec& spec) {
    Eigen::MatrixXd Ad = a.Abar;
    Ad.block(a.n, a.n, a.l, a.l) =
        -0.5 * (spec.alpha_min + spec.alpha_max) * Eigen::MatrixXd::Identity(a.l, a.l);
    return Ad;
}

struct AssemblyContext {
    const std::vector<AugmentedModel>* aug;
    SynthesisSpec spec;
    int N, l, q, m_in;
};

}  // namespace

AssembledLmis assemble_lmis(const std::vector<AugmentedModel>& aug,
                            const std::vector<std::pair<int, int>>& pairs,
                            const SynthesisSpec& spec) {
    spec.validate();
    if (pairs.empty()) throw std::invalid_argument("assemble_lmis: empty active-pair set");
    if (aug.empty()) throw std::invalid_argument("assemble_lmis: no augmented models");

    AssembledLmis out;
    const AugmentedModel& a0 = aug.front();
    out.n = a0.n;
    out.l = a0.l;
    out.q = a0.q;
    out.m_in = a0.m;
    const int N = a0.dim();
    const int Nr = static_cast<int>(aug.size());

    SdpProblem& p = out.problem;
    out.x_var = p.add_variable("X", N, N, true);
    for (int j = 0; j < Nr; ++j)
        out.m_vars.push_back(p.add_variable("M" + std::to_string(j), a0.m, N, false));
    if (!spec.fixed_gamma) out.gamma_sq_var = p.add_variable("gamma_sq", 1, 1, false);

    // Evaluators capture variable descriptors by value; the problem object
    // itself may be moved after assembly.
    const MatrixVariable xd = p.variables[static_cast<std::size_t>(out.x_var)];
    std::vector<MatrixVariable> md;
    for (int mv : out.m_vars) md.push_back(p.variables[static_cast<std::size_t>(mv)]);
    const bool has_g2 = out.gamma_sq_var >= 0;
    const MatrixVariable gd =
        has_g2 ? p.variables[static_cast<std::size_t>(out.gamma_sq_var)] : MatrixVariable{};
    const double sin_t = std::sin(spec.theta);
    const double cos_t = std::cos(spec.theta);

    auto push_block = [&](const std::string& name, int dim, BlockSense sense,
                          std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> f) {
        LmiBlock b;
        b.name = name;
        b.dim = dim;
        b.sense = sense;
        b.eval = std::move(f);
        // Strictness shift relative to the block's own scale.
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.scalar_count());
        b.shift = 1e-7 * std::max(1.0, b.eval(zero).norm());
        p.blocks.push_back(std::move(b));
    };

    push_block("Xpos", N, BlockSense::PositiveDefinite,
               [xd](const Eigen::VectorXd& y) { return xd.slice(y); });

    const double gamma_sq_fixed = spec.gamma * spec.gamma;
    for (const auto& [i, j] : pairs) {
        if (i < 0 || i >= Nr || j < 0 || j >= Nr)
            throw std::invalid_argument("assemble_lmis: pair index out of range");
        const AugmentedModel& a = aug[static_cast<std::size_t>(i)];
        const Eigen::MatrixXd Ad = dummy_ref(a, spec);
        const Eigen::MatrixXd Ab = a.Abar;
        const Eigen::MatrixXd Bb = a.Bbar;
        const Eigen::MatrixXd Eb = a.Ebar;
        const Eigen::MatrixXd Cb = a.Cbar;
        const MatrixVariable mv = md[static_cast<std::size_t>(j)];
        const std::string tag = " " + std::to_string(i) + "," + std::to_string(j);

        push_block("decay-min" + tag, N, BlockSense::NegativeDefinite,
                   [xd, mv, Ad, Bb, amin = spec.alpha_min](const Eigen::VectorXd& y) {
                       const Eigen::MatrixXd X = xd.slice(y);
                       const Eigen::MatrixXd H = Ad * X - Bb * mv.slice(y);
                       return Eigen::MatrixXd(H + H.transpose() + 2.0 * amin * X);
                   });
        push_block("decay-max" + tag, N, BlockSense::PositiveDefinite,
                   [xd, mv, Ad, Bb, amax = spec.alpha_max](const Eigen::VectorXd& y) {
                       const Eigen::MatrixXd X = xd.slice(y);
                       const Eigen::MatrixXd H = Ad * X - Bb * mv.slice(y);
                       return Eigen::MatrixXd(H + H.transpose() + 2.0 * amax * X);
                   });
        push_block("cone" + tag, 2 * N, BlockSense::NegativeDefinite,
                   [xd, mv, Ad, Bb, sin_t, cos_t, N](const Eigen::VectorXd& y) {
                       const Eigen::MatrixXd X = xd.slice(y);
                       const Eigen::MatrixXd H = Ad * X - Bb * mv.slice(y);
                       const Eigen::MatrixXd S = H + H.transpose();
                       const Eigen::MatrixXd D = H - H.transpose();
                       Eigen::MatrixXd blockm(2 * N, 2 * N);
                       blockm.topLeftCorner(N, N) = sin_t * S;
                       blockm.topRightCorner(N, N) = cos_t * D;
                       blockm.bottomLeftCorner(N, N) = -cos_t * D;
                       blockm.bottomRightCorner(N, N) = sin_t * S;
                       return blockm;
                   });
        const int l = a.l, q = a.q;
        push_block("brl" + tag, N + l + q, BlockSense::NegativeDefinite,
                   [xd, mv, gd, has_g2, Ab, Bb, Eb, Cb, gamma_sq_fixed, N, l,
                    q](const Eigen::VectorXd& y) {
                       const Eigen::MatrixXd X = xd.slice(y);
                       const Eigen::MatrixXd H = Ab * X - Bb * mv.slice(y);
                       Eigen::MatrixXd blockm = Eigen::MatrixXd::Zero(N + l + q, N + l + q);
                       blockm.topLeftCorner(N, N) = H + H.transpose();
                       blockm.block(0, N, N, l) = Eb;
                       blockm.block(N, 0, l, N) = Eb.transpose();
                       const double g2 = has_g2 ? gd.slice(y)(0, 0) : gamma_sq_fixed;
                       blockm.block(N, N, l, l) = -g2 * Eigen::MatrixXd::Identity(l, l);
                       blockm.block(0, N + l, N, q) = X * Cb.transpose();
                       blockm.block(N + l, 0, q, N) = Cb * X;
                       blockm.bottomRightCorner(q, q) = -Eigen::MatrixXd::Identity(q, q);
                       return blockm;
                   });
    }
    if (!spec.fixed_gamma) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(p.scalar_count());
        g(gd.offset) = 1.0;
        p.objective = g;
        // gamma stays capped at the spec value.
        push_block("gamma-cap", 1, BlockSense::PositiveDefinite,
                   [gd, gamma_sq_fixed](const Eigen::VectorXd& y) {
                       return Eigen::MatrixXd::Constant(1, 1, gamma_sq_fixed - gd.slice(y)(0, 0));
                   });
        push_block("gamma-pos", 1, BlockSense::PositiveDefinite,
                   [gd](const Eigen::VectorXd& y) { return gd.slice(y); });
    }
    return out;
}

namespace {

// Internal solve problem: Eq.-28 blocks plus trace normalization and an
// optional centering slack variable on selected families.
struct CenteredProblem {
    SdpProblem problem;
    int x_var, t_var = -1, gamma_sq_var = -1;
    std::vector<int> m_vars;
};

CenteredProblem build_centered(const std::vector<AugmentedModel>& aug,
                               const std::vector<std::pair<int, int>>& pairs,
                               const SynthesisSpec& spec, SynthesisObjective objective) {
    AssembledLmis base = assemble_lmis(aug, pairs, spec);
    CenteredProblem cp;
    cp.problem = std::move(base.problem);
    cp.x_var = base.x_var;
    cp.m_vars = base.m_vars;
    cp.gamma_sq_var = base.gamma_sq_var;
    SdpProblem& p = cp.problem;
    const int N = aug.front().dim();

    if (objective != SynthesisObjective::MinGamma) {
        cp.t_var = p.add_variable("t_margin", 1, 1, false);
        const MatrixVariable td = p.variables[static_cast<std::size_t>(cp.t_var)];
        // Shift selected strict blocks by t: F + tI < 0 (or > 0), then maximize t.
        for (auto& b : p.blocks) {
            const bool is_min = b.name.rfind("decay-min", 0) == 0;
            const bool is_cone = b.name.rfind("cone", 0) == 0;
            const bool is_brl = b.name.rfind("brl", 0) == 0;
            const bool apply = (objective == SynthesisObjective::MaxAlphaMinMargin)
                                   ? is_min
                                   : (is_min || is_cone || is_brl);
            if (!apply) continue;
            auto inner = b.eval;
            const double sgn = (b.sense == BlockSense::NegativeDefinite) ? 1.0 : -1.0;
            const int dim = b.dim;
            b.eval = [inner, td, sgn, dim](const Eigen::VectorXd& y) {
                return Eigen::MatrixXd(inner(y) + sgn * td.slice(y)(0, 0) *
                                                      Eigen::MatrixXd::Identity(dim, dim));
            };
        }
        Eigen::VectorXd g = Eigen::VectorXd::Zero(p.scalar_count());
        g(td.offset) = -1.0;  // maximize t
        p.objective = g;
    }

    // Trace normalization pins the solution scale (the BRL's constant blocks
    // break homogeneity, but the margin variable needs both bounds).
    const MatrixVariable xd = p.variables[static_cast<std::size_t>(cp.x_var)];
    LmiBlock hi;
    hi.name = "trace-cap";
    hi.dim = 1;
    hi.sense = BlockSense::PositiveDefinite;
    hi.shift = 0.0;
    hi.eval = [xd, N](const Eigen::VectorXd& y) {
        return Eigen::MatrixXd::Constant(1, 1, 10.0 * N - xd.slice(y).trace());
    };
    p.blocks.push_back(hi);
    LmiBlock lo;
    lo.name = "trace-floor";
    lo.dim = 1;
    lo.sense = BlockSense::PositiveDefinite;
    lo.shift = 0.0;
    lo.eval = [xd, N](const Eigen::VectorXd& y) {
        return Eigen::MatrixXd::Constant(1, 1, xd.slice(y).trace() - 0.5 * N);
    };
    p.blocks.push_back(lo);
    return cp;
}

}  // namespace

SynthesisResult synthesize(const std::vector<TsSubmodel>& submodels_physical,
                           const MembershipGrid& grid, const SynthesisSpec& spec,
                           const TurbineParams& params, PlantModel model,
                           SynthesisObjective objective) {
    spec.validate();
    if (submodels_physical.size() != grid.size())
        throw std::invalid_argument("synthesize: grid/submodel count mismatch");

    const UnitBases bases = UnitBases::from(params, model);
    std::vector<TsSubmodel> subs_pu;
    subs_pu.reserve(submodels_physical.size());
    for (const auto& s : submodels_physical) {
        TsSubmodel pu = to_per_unit(s, bases);
        if (model == PlantModel::OneDof) {
            // Speed design actuates the collective pitch only.
            pu.B = pu.B.leftCols(1).eval();
        }
        subs_pu.push_back(std::move(pu));
    }

    const ReferenceKind kind =
        (model == PlantModel::OneDof) ? ReferenceKind::SpeedOnly : ReferenceKind::SpeedAndTorque;
    const ReferenceModel ref = build_reference_model(kind, spec.tau);
    const std::vector<AugmentedModel> aug = augment(subs_pu, ref);
    const auto pairs = active_pairs(grid);

    CenteredProblem cp = build_centered(aug, pairs, spec, objective);
    SdpOptions opts;
    opts.tol = 1e-8;
    opts.max_iter = 300;
    SdpSolution sol = solve(cp.problem, opts);
    if (sol.status != SdpStatus::Optimal && sol.status != SdpStatus::Feasible) {
        // Identify the first violated family for the diagnostic.
        std::string family = "unknown";
        if (!sol.block_margins.empty()) {
            for (std::size_t b = 0; b < cp.problem.blocks.size(); ++b)
                if (sol.block_margins[b] <= 0) {
                    family = cp.problem.blocks[b].name;
                    break;
                }
        }
        std::ostringstream os;
        os << "synthesize: LMI problem "
           << (sol.status == SdpStatus::Infeasible ? "infeasible" : "failed numerically")
           << " (alpha=[" << spec.alpha_min << "," << spec.alpha_max << "], gamma=" << spec.gamma
           << ", first violated family: " << family << ")";
        throw SynthesisError(os.str(), sol.status);
    }

    SynthesisResult res;
    res.solution = sol;
    res.X = cp.problem.value_of(cp.x_var, sol.y);
    Eigen::LLT<Eigen::MatrixXd> xllt(res.X);
    if (xllt.info() != Eigen::Success)
        throw SynthesisError("synthesize: returned X is not positive definite",
                             SdpStatus::NumericalFailure);

    res.schedule.grid = grid;
    res.schedule.ref = ref;
    res.schedule.model = model;
    for (int mv : cp.m_vars) {
        const Eigen::MatrixXd M = cp.problem.value_of(mv, sol.y);
        res.schedule.K.push_back(xllt.solve(M.transpose()).transpose());
    }
    res.gamma_achieved =
        (cp.gamma_sq_var >= 0) ? std::sqrt(cp.problem.value_of(cp.gamma_sq_var, sol.y)(0, 0))
                               : spec.gamma;

    // Independent re-verification of the Eq.-28 blocks at the solution.
    AssembledLmis audit = assemble_lmis(aug, pairs, spec);
    Eigen::VectorXd ya = Eigen::VectorXd::Zero(audit.problem.scalar_count());
    audit.problem.set_value(audit.x_var, res.X, ya);
    for (std::size_t j = 0; j < audit.m_vars.size(); ++j)
        audit.problem.set_value(audit.m_vars[static_cast<std::size_t>(j)],
                                res.schedule.K[j] * res.X, ya);
    if (audit.gamma_sq_var >= 0)
        audit.problem.set_value(audit.gamma_sq_var,
                                Eigen::MatrixXd::Constant(1, 1, res.gamma_achieved * res.gamma_achieved), ya);
    res.verified_margins = verify_blocks(audit.problem, ya);
    for (std::size_t b = 0; b < res.verified_margins.size(); ++b) {
        if (res.verified_margins[b] <= 0.0) {
            std::ostringstream os;
            os << "synthesize: block '" << audit.problem.blocks[b].name
               << "' fails re-verification (margin " << res.verified_margins[b] << ")";
            throw SynthesisError(os.str(), SdpStatus::NumericalFailure);
        }
    }
    return res;
}

GainSchedule combine_gains(const GainSchedule& speed, const GainSchedule& torque) {
    if (speed.grid.nodes != torque.grid.nodes)
        throw std::invalid_argument("combine_gains: gain schedules use different grids");
    if (speed.K.empty() || speed.K.front().rows() != 1 || speed.K.front().cols() != 3)
        throw std::invalid_argument("combine_gains: speed schedule must be 1x3 per node");
    if (torque.K.empty() || torque.K.front().rows() != 2 || torque.K.front().cols() != 8)
        throw std::invalid_argument("combine_gains: torque schedule must be 2x8 per node");

    GainSchedule mt;
    mt.grid = torque.grid;
    mt.model = torque.model;
    mt.combined = true;
    mt.ref = torque.ref;  // caller swaps in the runtime reference (combined_reference)
    for (std::size_t j = 0; j < torque.K.size(); ++j) {
        const Eigen::MatrixXd& Ks = speed.K[j];
        const Eigen::MatrixXd& Kt = torque.K[j];
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2, 8);
        K(0, 0) = Ks(0, 0);   // k_x,omega
        K(0, 4) = Ks(0, 1);   // k_xr,omega
        K(0, 6) = Ks(0, 2);   // k_I,omega
        K.block(1, 0, 1, 4) = Kt.block(1, 0, 1, 4);
        K(1, 5) = Kt(1, 5);
        K(1, 7) = Kt(1, 7);
        mt.K.push_back(std::move(K));
    }
    return mt;
}

ReferenceModel combined_reference(const SynthesisSpec& speed_spec,
                                  const SynthesisSpec& torque_spec) {
    Eigen::VectorXd tau(2);
    tau << speed_spec.tau(0), torque_spec.tau(1);
    return build_reference_model(ReferenceKind::SpeedAndTorque, tau);
}

EigenReport verify_dregion(const std::vector<AugmentedModel>& aug, const GainSchedule& gains,
                           double alpha_min, double alpha_max, double theta,
                           const std::vector<std::pair<int, int>>& pairs) {
    EigenReport report;
    const std::vector<double> refp = gains.ref.poles();
    const double tan_t = std::tan(theta);
    for (const auto& [i, j] : pairs) {
        const AugmentedModel& a = aug[static_cast<std::size_t>(i)];
        const Eigen::MatrixXd Acl = a.Abar - a.Bbar * gains.K[static_cast<std::size_t>(j)];
        Eigen::EigenSolver<Eigen::MatrixXd> es(Acl);
        std::vector<bool> ref_found(refp.size(), false);
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            EigenReport::Entry e;
            e.i = i;
            e.j = j;
            e.lambda = es.eigenvalues()(k);
            for (std::size_t r = 0; r < refp.size(); ++r) {
                if (std::abs(e.lambda - std::complex<double>(refp[r], 0.0)) < 1e-9) {
                    e.is_reference = true;
                    ref_found[r] = true;
                    break;
                }
            }
            if (!e.is_reference) {
                const double re = e.lambda.real();
                const double im = std::abs(e.lambda.imag());
                e.band_ok = (re >= -alpha_max - 1e-6) && (re <= -alpha_min + 1e-6);
                e.cone_ok = im <= tan_t * std::abs(re) + 1e-9;
                if (!e.band_ok || !e.cone_ok) ++report.violations;
            }
            report.entries.push_back(e);
        }
        for (bool f : ref_found)
            if (!f) report.reference_poles_complete = false;
    }
    return report;
}

HinfResult vertex_hinf(const AugmentedModel& aug, const Eigen::MatrixXd& gain) {
    HinfResult r;
    const Eigen::MatrixXd Acl = aug.Abar - aug.Bbar * gain;
    Eigen::EigenSolver<Eigen::MatrixXd> es(Acl);
    if (es.eigenvalues().real().maxCoeff() >= 0.0) {
        r.stable = false;
        r.peak = std::numeric_limits<double>::infinity();
        return r;
    }
    const int N = aug.dim();
    Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(N, N);
    auto gain_at = [&](double w) {
        const Eigen::MatrixXcd G =
            aug.Cbar * (std::complex<double>(0.0, w) * I - Acl).partialPivLu().solve(
                           Eigen::MatrixXcd(aug.Ebar.cast<std::complex<double>>()));
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
        return svd.singularValues()(0);
    };
    const int n_sweep = 1000;
    double best_w = 1e-3;
    for (int k = 0; k < n_sweep; ++k) {
        const double w = std::pow(10.0, -3.0 + 6.0 * k / (n_sweep - 1));
        const double s = gain_at(w);
        if (s > r.peak) {
            r.peak = s;
            best_w = w;
        }
    }
    // Golden-section refinement around the sweep peak (log frequency).
    double lo = std::log10(best_w) - 6.0 / (n_sweep - 1);
    double hi = std::log10(best_w) + 6.0 / (n_sweep - 1);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = gain_at(std::pow(10.0, x1)), f2 = gain_at(std::pow(10.0, x2));
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = gain_at(std::pow(10.0, x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = gain_at(std::pow(10.0, x1));
        }
    }
    const double wf = std::pow(10.0, 0.5 * (lo + hi));
    const double sf = gain_at(wf);
    if (sf > r.peak) {
        r.peak = sf;
        best_w = wf;
    }
    r.peak_frequency = best_w;
    return r;
}

}  // namespace tsmrc
