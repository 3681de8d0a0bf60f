#include "tsmrc/sdp.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

namespace tsmrc {

int SdpProblem::add_variable(const std::string& id, int rows, int cols, bool symmetric) {
    if (symmetric && rows != cols)
        throw std::invalid_argument("add_variable: symmetric variable must be square: " + id);
    for (const auto& v : variables)
        if (v.id == id) throw std::invalid_argument("add_variable: duplicate id: " + id);
    MatrixVariable v;
    v.id = id;
    v.rows = rows;
    v.cols = cols;
    v.symmetric = symmetric;
    v.offset = scalar_count();
    variables.push_back(v);
    return static_cast<int>(variables.size()) - 1;
}

int SdpProblem::scalar_count() const {
    int n = 0;
    for (const auto& v : variables) n += v.entry_count();
    return n;
}

Eigen::MatrixXd MatrixVariable::slice(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd M(rows, cols);
    if (symmetric) {
        int k = offset;
        for (int j = 0; j < cols; ++j)
            for (int i = 0; i <= j; ++i) {
                M(i, j) = y(k);
                M(j, i) = y(k);
                ++k;
            }
    } else {
        int k = offset;
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) M(i, j) = y(k++);
    }
    return M;
}

Eigen::MatrixXd SdpProblem::value_of(int var, const Eigen::VectorXd& y) const {
    return variables.at(static_cast<std::size_t>(var)).slice(y);
}

void SdpProblem::set_value(int var, const Eigen::MatrixXd& value, Eigen::VectorXd& y) const {
    const MatrixVariable& v = variables.at(static_cast<std::size_t>(var));
    if (value.rows() != v.rows || value.cols() != v.cols)
        throw std::invalid_argument("set_value: shape mismatch for " + v.id);
    if (v.symmetric) {
        int k = v.offset;
        for (int j = 0; j < v.cols; ++j)
            for (int i = 0; i <= j; ++i) y(k++) = 0.5 * (value(i, j) + value(j, i));
    } else {
        int k = v.offset;
        for (int i = 0; i < v.rows; ++i)
            for (int j = 0; j < v.cols; ++j) y(k++) = value(i, j);
    }
}

std::pair<double, double> eig_margin(const Eigen::MatrixXd& block) {
    if (!block.allFinite()) throw std::invalid_argument("eig_margin: non-finite entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (block + block.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

std::vector<double> verify_blocks(const SdpProblem& problem, const Eigen::VectorXd& y) {
    std::vector<double> margins;
    margins.reserve(problem.blocks.size());
    for (const auto& b : problem.blocks) {
        const Eigen::MatrixXd F = b.eval(y);
        const auto [lo, hi] = eig_margin(F);
        margins.push_back(b.sense == BlockSense::NegativeDefinite ? -hi - b.shift
                                                                  : lo - b.shift);
    }
    return margins;
}

namespace {

struct BlockData {
    int dim;
    Eigen::MatrixXd G0;                    // canonical: G(y) = G0 + sum y_i Gi >= 0
    std::vector<int> vars;                 // scalar indices with nonzero coefficient
    std::vector<Eigen::MatrixXd> G;        // coefficient per entry of vars
    double scale = 1.0;
};

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& F, const std::string& name) {
    const double asym = (F - F.transpose()).norm();
    if (asym > 1e-9 * (1.0 + F.norm()))
        throw std::invalid_argument("LMI block '" + name + "' is not symmetric");
    return 0.5 * (F + F.transpose());
}

// Largest alpha in (0, 1] with X + alpha*dX staying positive definite.
double max_step(const Eigen::MatrixXd& X, const Eigen::MatrixXd& dX, double frac) {
    Eigen::LLT<Eigen::MatrixXd> llt(X);
    if (llt.info() != Eigen::Success) return 0.0;
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd H = L.triangularView<Eigen::Lower>().solve(dX);
    H = L.triangularView<Eigen::Lower>().solve(H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin >= 0.0) return 1.0;
    return std::min(1.0, -frac / lmin);
}

// W^{-1} for the NT scaling point (W Z W = S). Eigenvalues are floored
// relative to the largest one to keep the scaling bounded near the boundary.
Eigen::MatrixXd nt_winv(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Z) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const double s_floor = std::max(es.eigenvalues().maxCoeff(), 1e-300) * 1e-14;
    const Eigen::VectorXd d = es.eigenvalues().cwiseMax(s_floor);
    const Eigen::MatrixXd Sh = es.eigenvectors() * d.cwiseSqrt().asDiagonal() *
                               es.eigenvectors().transpose();
    const Eigen::MatrixXd Shi = es.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal() *
                                es.eigenvectors().transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(Sh * Z * Sh);
    const double m_floor = std::max(es2.eigenvalues().maxCoeff(), 1e-300) * 1e-14;
    const Eigen::VectorXd d2 = es2.eigenvalues().cwiseMax(m_floor);
    const Eigen::MatrixXd Mh = es2.eigenvectors() * d2.cwiseSqrt().asDiagonal() *
                               es2.eigenvectors().transpose();
    Eigen::MatrixXd Winv = Shi * Mh * Shi;
    return 0.5 * (Winv + Winv.transpose());
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpOptions& opts) {
    const int m = problem.scalar_count();
    const int nb = static_cast<int>(problem.blocks.size());
    if (nb == 0) throw std::invalid_argument("solve: problem has no blocks");

    // ---- extract affine data into canonical G(y) >= 0 form ----
    std::vector<BlockData> blocks(static_cast<std::size_t>(nb));
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd probe = Eigen::VectorXd::Zero(m);
    for (int b = 0; b < nb; ++b) {
        const LmiBlock& blk = problem.blocks[static_cast<std::size_t>(b)];
        const double sgn = (blk.sense == BlockSense::NegativeDefinite) ? -1.0 : 1.0;
        Eigen::MatrixXd F0 = symmetrized(blk.eval(zero), blk.name);
        if (F0.rows() != blk.dim || F0.cols() != blk.dim)
            throw std::invalid_argument("LMI block '" + blk.name + "' has wrong dimension");
        BlockData& bd = blocks[static_cast<std::size_t>(b)];
        bd.dim = blk.dim;
        bd.G0 = sgn * F0 - blk.shift * Eigen::MatrixXd::Identity(blk.dim, blk.dim);
        for (int i = 0; i < m; ++i) {
            probe(i) = 1.0;
            Eigen::MatrixXd Fi = symmetrized(blk.eval(probe), blk.name) - F0;
            probe(i) = 0.0;
            if (Fi.cwiseAbs().maxCoeff() > 0.0) {
                bd.vars.push_back(i);
                bd.G.push_back(sgn * Fi);
            }
        }
        bd.scale = std::max(1.0, bd.G0.norm());
        bd.G0 /= bd.scale;
        for (auto& Gi : bd.G) Gi /= bd.scale;
    }

    // Column scaling over the canonical data.
    Eigen::VectorXd colscale = Eigen::VectorXd::Ones(m);
    for (const auto& bd : blocks)
        for (std::size_t k = 0; k < bd.vars.size(); ++k)
            colscale(bd.vars[k]) = std::max(colscale(bd.vars[k]), bd.G[k].norm());
    for (auto& bd : blocks)
        for (std::size_t k = 0; k < bd.vars.size(); ++k) bd.G[k] /= colscale(bd.vars[k]);

    Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
    const bool has_objective = problem.objective.size() > 0;
    if (has_objective) {
        if (problem.objective.size() != m)
            throw std::invalid_argument("solve: objective size mismatch");
        g = problem.objective.cwiseQuotient(colscale);
        const double gn = g.norm();
        if (gn > 0) g /= gn;
    }

    // ---- interior-point iteration ----
    double init_scale = 1.0;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    std::vector<Eigen::MatrixXd> S(static_cast<std::size_t>(nb)), Z(static_cast<std::size_t>(nb));
    double nu = 0.0;
    auto initialize = [&]() {
        y.setZero();
        nu = 0.0;
        for (int b = 0; b < nb; ++b) {
            const auto& bd = blocks[static_cast<std::size_t>(b)];
            const double eta = init_scale * (1.0 + bd.G0.norm());
            S[static_cast<std::size_t>(b)] = eta * Eigen::MatrixXd::Identity(bd.dim, bd.dim);
            Z[static_cast<std::size_t>(b)] = eta * Eigen::MatrixXd::Identity(bd.dim, bd.dim);
            nu += bd.dim;
        }
    };
    initialize();

    SdpSolution sol;
    sol.y = Eigen::VectorXd::Zero(m);

    auto geval = [&](int b, const Eigen::VectorXd& yy) {
        const auto& bd = blocks[static_cast<std::size_t>(b)];
        Eigen::MatrixXd G = bd.G0;
        for (std::size_t k = 0; k < bd.vars.size(); ++k) G += yy(bd.vars[k]) * bd.G[k];
        return G;
    };

    auto finish = [&](SdpStatus st, int iter, double mu, double pres, double dres) {
        sol.status = st;
        sol.iterations = iter;
        sol.duality_gap = mu;
        sol.primal_residual = pres;
        sol.dual_residual = dres;
        sol.y = y.cwiseQuotient(colscale);
        sol.objective_value = has_objective ? problem.objective.dot(sol.y) : 0.0;
        if (st == SdpStatus::Optimal || st == SdpStatus::Feasible)
            sol.block_margins = verify_blocks(problem, sol.y);
        return sol;
    };

    std::vector<Eigen::MatrixXd> Winv(static_cast<std::size_t>(nb));
    std::vector<std::vector<Eigen::MatrixXd>> WGW(static_cast<std::size_t>(nb));
    Eigen::MatrixXd M(m, m);
    Eigen::VectorXd rhs(m), rd(m), dy(m);
    std::vector<Eigen::MatrixXd> Rp(static_cast<std::size_t>(nb)),
        dS(static_cast<std::size_t>(nb)), dZ(static_cast<std::size_t>(nb)),
        T(static_cast<std::size_t>(nb));
    double stall_mu = std::numeric_limits<double>::max();
    int stall_count = 0;
    double mu0 = 0.0;
    int restarts = 0;

    auto merit = [&](const Eigen::VectorXd& yy, const std::vector<Eigen::MatrixXd>& Ss,
                     const std::vector<Eigen::MatrixXd>& Zs) {
        double pres = 0.0, gap = 0.0, dresn = 0.0;
        Eigen::VectorXd r = g;
        for (int b = 0; b < nb; ++b) {
            const auto& bd = blocks[static_cast<std::size_t>(b)];
            Eigen::MatrixXd Gy = bd.G0;
            for (std::size_t k = 0; k < bd.vars.size(); ++k) Gy += yy(bd.vars[k]) * bd.G[k];
            pres = std::max(pres, (Gy - Ss[static_cast<std::size_t>(b)]).norm() / (1.0 + bd.G0.norm()));
            gap += Ss[static_cast<std::size_t>(b)].cwiseProduct(Zs[static_cast<std::size_t>(b)]).sum();
            for (std::size_t k = 0; k < bd.vars.size(); ++k)
                r(bd.vars[k]) -= bd.G[k].cwiseProduct(Zs[static_cast<std::size_t>(b)]).sum();
        }
        dresn = r.lpNorm<Eigen::Infinity>() / (1.0 + g.lpNorm<Eigen::Infinity>());
        return std::max({pres, dresn, gap / nu});
    };

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        double pres = 0.0, gap = 0.0;
        for (int b = 0; b < nb; ++b) {
            const auto& bd = blocks[static_cast<std::size_t>(b)];
            Rp[b] = geval(b, y) - S[b];
            pres = std::max(pres, Rp[b].norm() / (1.0 + bd.G0.norm()));
            gap += S[b].cwiseProduct(Z[b]).sum();
        }
        const double mu = gap / nu;
        if (iter == 0) mu0 = mu;
        // Divergence guard: restart once from a larger interior point, then fail.
        if (mu > 1e8 * std::max(mu0, 1.0) || !std::isfinite(mu)) {
            if (restarts < 2) {
                ++restarts;
                init_scale *= 100.0;
                initialize();
                stall_mu = std::numeric_limits<double>::max();
                stall_count = 0;
                continue;
            }
            return finish(SdpStatus::NumericalFailure, iter, mu, pres, 0.0);
        }
        rd = g;
        for (int b = 0; b < nb; ++b) {
            const auto& bd = blocks[static_cast<std::size_t>(b)];
            for (std::size_t k = 0; k < bd.vars.size(); ++k)
                rd(bd.vars[k]) -= bd.G[k].cwiseProduct(Z[b]).sum();
        }
        const double dres = rd.lpNorm<Eigen::Infinity>() / (1.0 + g.lpNorm<Eigen::Infinity>());
        if (opts.verbose)
            std::cerr << "iter " << iter << " mu=" << mu << " pres=" << pres
                      << " dres=" << dres << std::endl;
        if (pres < opts.tol && dres < opts.tol && mu < opts.tol)
            return finish(has_objective ? SdpStatus::Optimal : SdpStatus::Feasible, iter, mu,
                          pres, dres);

        // Farkas-style infeasibility certificate from the (normalized) dual
        // iterate: Z >= 0 with A*(Z) ~ 0 and <G0, Z> < 0 proves infeasibility.
        auto farkas_certified = [&]() {
            double tz = 0.0, pobj = 0.0;
            for (int b = 0; b < nb; ++b) tz += Z[b].trace();
            if (!(tz > 0.0)) return false;
            Eigen::VectorXd atz = Eigen::VectorXd::Zero(m);
            for (int b = 0; b < nb; ++b) {
                const auto& bd = blocks[static_cast<std::size_t>(b)];
                pobj += bd.G0.cwiseProduct(Z[b]).sum() / tz;
                for (std::size_t k = 0; k < bd.vars.size(); ++k)
                    atz(bd.vars[k]) += bd.G[k].cwiseProduct(Z[b]).sum() / tz;
            }
            return atz.lpNorm<Eigen::Infinity>() < 1e-7 && pobj < -1e-9;
        };
        if (iter >= 3 && farkas_certified())
            return finish(SdpStatus::Infeasible, iter, mu, pres, dres);
        if (mu > 0.9 * stall_mu && pres > opts.tol) {
            if (++stall_count > 25) return finish(SdpStatus::NumericalFailure, iter, mu, pres, dres);
        } else {
            stall_count = 0;
        }
        stall_mu = std::min(stall_mu, mu);

        // NT scaling and Schur complement.
        for (int b = 0; b < nb; ++b) {
            const auto& bd = blocks[static_cast<std::size_t>(b)];
            Winv[b] = nt_winv(S[b], Z[b]);
            WGW[b].resize(bd.vars.size());
            for (std::size_t k = 0; k < bd.vars.size(); ++k)
                WGW[b][k] = Winv[b] * bd.G[k] * Winv[b];
        }
        M.setZero();
        for (int b = 0; b < nb; ++b) {
            const auto& bd = blocks[static_cast<std::size_t>(b)];
            for (std::size_t k = 0; k < bd.vars.size(); ++k)
                for (std::size_t l = k; l < bd.vars.size(); ++l) {
                    const double v = bd.G[k].cwiseProduct(WGW[b][l]).sum();
                    M(bd.vars[k], bd.vars[l]) += v;
                    if (l != k) M(bd.vars[l], bd.vars[k]) += v;
                }
        }

        Eigen::LLT<Eigen::MatrixXd> llt;
        double ridge = 0.0;
        for (int attempt = 0; attempt < 6; ++attempt) {
            Eigen::MatrixXd Mr = M;
            if (ridge > 0) Mr.diagonal().array() += ridge;
            llt.compute(Mr);
            if (llt.info() == Eigen::Success) break;
            ridge = (ridge == 0.0) ? 1e-12 * M.diagonal().maxCoeff() : ridge * 100.0;
        }
        if (llt.info() != Eigen::Success)
            return finish(SdpStatus::NumericalFailure, iter, mu, pres, dres);

        // U = sigma mu S^{-1} - Z is the complementarity target; the Schur rhs
        // additionally carries the scaled primal residual, but dZ must use the
        // plain target (dS already contains Rp).
        std::vector<Eigen::MatrixXd> U(static_cast<std::size_t>(nb));
        auto direction = [&](double sigma) {
            for (int b = 0; b < nb; ++b) {
                Eigen::LLT<Eigen::MatrixXd> sll(S[b]);
                Eigen::MatrixXd Sinv =
                    sll.solve(Eigen::MatrixXd::Identity(blocks[static_cast<std::size_t>(b)].dim,
                                                        blocks[static_cast<std::size_t>(b)].dim));
                U[static_cast<std::size_t>(b)] = sigma * mu * Sinv - Z[b];
                T[b] = U[static_cast<std::size_t>(b)] - Winv[b] * Rp[b] * Winv[b];
            }
            rhs = -rd;
            for (int b = 0; b < nb; ++b) {
                const auto& bd = blocks[static_cast<std::size_t>(b)];
                for (std::size_t k = 0; k < bd.vars.size(); ++k)
                    rhs(bd.vars[k]) += bd.G[k].cwiseProduct(T[b]).sum();
            }
            dy = llt.solve(rhs);
            for (int b = 0; b < nb; ++b) {
                const auto& bd = blocks[static_cast<std::size_t>(b)];
                dS[b] = Rp[b];
                for (std::size_t k = 0; k < bd.vars.size(); ++k)
                    dS[b] += dy(bd.vars[k]) * bd.G[k];
                dZ[b] = U[static_cast<std::size_t>(b)] - Winv[b] * dS[b] * Winv[b];
                dZ[b] = 0.5 * (dZ[b] + dZ[b].transpose());
                dS[b] = 0.5 * (dS[b] + dS[b].transpose());
            }
        };

        // Predictor for the Mehrotra centering parameter.
        direction(0.0);
        double ap = 1.0, ad = 1.0;
        for (int b = 0; b < nb; ++b) {
            ap = std::min(ap, max_step(S[b], dS[b], opts.step_fraction));
            ad = std::min(ad, max_step(Z[b], dZ[b], opts.step_fraction));
        }
        double gap_aff = 0.0;
        for (int b = 0; b < nb; ++b)
            gap_aff += (S[b] + ap * dS[b]).cwiseProduct(Z[b] + ad * dZ[b]).sum();
        const double mu_aff = std::max(gap_aff / nu, 0.0);
        double sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3.0);
        sigma = std::clamp(sigma, 1e-4, 0.9);

        direction(sigma);
        ap = ad = 1.0;
        for (int b = 0; b < nb; ++b) {
            ap = std::min(ap, max_step(S[b], dS[b], opts.step_fraction));
            ad = std::min(ad, max_step(Z[b], dZ[b], opts.step_fraction));
        }
        if (ap < 1e-12 && ad < 1e-12)
            return finish(farkas_certified() ? SdpStatus::Infeasible : SdpStatus::NumericalFailure,
                          iter, mu, pres, dres);

        // Merit backtracking: reject steps that sharply worsen the iterate.
        const double merit_now = std::max({pres, dres, mu});
        Eigen::VectorXd y_try;
        std::vector<Eigen::MatrixXd> S_try(static_cast<std::size_t>(nb)),
            Z_try(static_cast<std::size_t>(nb));
        bool accepted = false;
        for (int bt = 0; bt < 6; ++bt) {
            y_try = y + ap * dy;
            for (int b = 0; b < nb; ++b) {
                S_try[static_cast<std::size_t>(b)] = S[b] + ap * dS[b];
                Z_try[static_cast<std::size_t>(b)] = Z[b] + ad * dZ[b];
            }
            if (merit(y_try, S_try, Z_try) < 50.0 * std::max(merit_now, 1e-12)) {
                accepted = true;
                break;
            }
            ap *= 0.5;
            ad *= 0.5;
        }
        if (!accepted)
            return finish(farkas_certified() ? SdpStatus::Infeasible : SdpStatus::NumericalFailure,
                          iter, mu, pres, dres);
        if (opts.verbose) std::cerr << "   ap=" << ap << " ad=" << ad << std::endl;
        y.swap(y_try);
        for (int b = 0; b < nb; ++b) {
            S[b].swap(S_try[static_cast<std::size_t>(b)]);
            Z[b].swap(Z_try[static_cast<std::size_t>(b)]);
        }
    }
    return finish(SdpStatus::NumericalFailure, opts.max_iter, 0.0, 0.0, 0.0);
}

// ---------------- text dump / load ----------------

void dump_problem(const SdpProblem& problem, std::ostream& os) {
    const int m = problem.scalar_count();
    os.precision(17);
    os << "tsmrc-sdp 1\n";
    os << "variables " << problem.variables.size() << "\n";
    for (const auto& v : problem.variables)
        os << v.id << " " << v.rows << " " << v.cols << " " << (v.symmetric ? 1 : 0) << "\n";
    os << "objective " << problem.objective.size();
    for (Eigen::Index i = 0; i < problem.objective.size(); ++i) os << " " << problem.objective(i);
    os << "\n";
    os << "blocks " << problem.blocks.size() << "\n";
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd probe = Eigen::VectorXd::Zero(m);
    for (const auto& b : problem.blocks) {
        os << "block " << b.name.size() << " " << b.name << " " << b.dim << " "
           << (b.sense == BlockSense::NegativeDefinite ? "N" : "P") << " " << b.shift << "\n";
        const Eigen::MatrixXd F0 = b.eval(zero);
        os << "const";
        for (int i = 0; i < b.dim; ++i)
            for (int j = 0; j < b.dim; ++j) os << " " << F0(i, j);
        os << "\n";
        std::ostringstream terms;
        int nterms = 0;
        for (int v = 0; v < m; ++v) {
            probe(v) = 1.0;
            const Eigen::MatrixXd Fv = b.eval(probe) - F0;
            probe(v) = 0.0;
            for (int i = 0; i < b.dim; ++i)
                for (int j = 0; j < b.dim; ++j)
                    if (Fv(i, j) != 0.0) {
                        terms << v << " " << i << " " << j << " " << Fv(i, j) << "\n";
                        ++nterms;
                    }
        }
        os << "terms " << nterms << "\n" << terms.str();
    }
}

SdpProblem load_problem(std::istream& is) {
    auto expect = [&](const std::string& tag) {
        std::string s;
        is >> s;
        if (s != tag) throw std::runtime_error("load_problem: expected '" + tag + "', got '" + s + "'");
    };
    SdpProblem p;
    expect("tsmrc-sdp");
    int version;
    is >> version;
    expect("variables");
    std::size_t nv;
    is >> nv;
    for (std::size_t k = 0; k < nv; ++k) {
        std::string id;
        int r, c, sym;
        is >> id >> r >> c >> sym;
        p.add_variable(id, r, c, sym != 0);
    }
    expect("objective");
    int osz;
    is >> osz;
    p.objective.resize(osz);
    for (int i = 0; i < osz; ++i) is >> p.objective(i);
    expect("blocks");
    std::size_t nblk;
    is >> nblk;
    for (std::size_t k = 0; k < nblk; ++k) {
        expect("block");
        std::size_t name_len;
        is >> name_len;
        is.get();
        std::string name(name_len, '\0');
        is.read(name.data(), static_cast<std::streamsize>(name_len));
        int dim;
        std::string sense;
        double shift;
        is >> dim >> sense >> shift;
        expect("const");
        auto C = std::make_shared<Eigen::MatrixXd>(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) is >> (*C)(i, j);
        expect("terms");
        int nterms;
        is >> nterms;
        auto triplets = std::make_shared<std::vector<std::tuple<int, int, int, double>>>();
        triplets->reserve(static_cast<std::size_t>(nterms));
        for (int t = 0; t < nterms; ++t) {
            int v, i, j;
            double val;
            is >> v >> i >> j >> val;
            triplets->emplace_back(v, i, j, val);
        }
        LmiBlock blk;
        blk.name = name;
        blk.dim = dim;
        blk.sense = (sense == "N") ? BlockSense::NegativeDefinite : BlockSense::PositiveDefinite;
        blk.shift = shift;
        blk.eval = [C, triplets, dim](const Eigen::VectorXd& y) {
            Eigen::MatrixXd F = *C;
            for (const auto& [v, i, j, val] : *triplets) F(i, j) += y(v) * val;
            return F;
        };
        p.blocks.push_back(std::move(blk));
    }
    return p;
}

}  // namespace tsmrc
