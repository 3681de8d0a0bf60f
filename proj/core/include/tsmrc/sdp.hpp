#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tsmrc {

// Scalar-entry layout: symmetric variables store the upper triangle
// column-major (i <= j); rectangular variables are row-major.
struct MatrixVariable {
    std::string id;
    int rows = 0;
    int cols = 0;
    bool symmetric = false;
    int offset = 0;   // first scalar index, filled by SdpProblem::add_variable

    int entry_count() const { return symmetric ? rows * (rows + 1) / 2 : rows * cols; }

    // Matrix value from the stacked scalar vector. Safe to capture by value
    // in block evaluators (problems may be moved after assembly).
    Eigen::MatrixXd slice(const Eigen::VectorXd& y) const;
};

enum class BlockSense { NegativeDefinite, PositiveDefinite };

// Affine map from the stacked scalar variables to a symmetric block, plus the
// required sign and a strictness shift: NegativeDefinite means
// F(y) + shift·I ≺ 0 is enforced (mirror for PositiveDefinite).
struct LmiBlock {
    std::string name;
    int dim = 0;
    BlockSense sense = BlockSense::NegativeDefinite;
    double shift = 0.0;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> eval;
};

struct SdpProblem {
    std::vector<MatrixVariable> variables;
    std::vector<LmiBlock> blocks;
    Eigen::VectorXd objective;   // minimize objective·y; size 0 => feasibility

    int add_variable(const std::string& id, int rows, int cols, bool symmetric);
    int scalar_count() const;

    // Matrix value of variable v under assignment y.
    Eigen::MatrixXd value_of(int var, const Eigen::VectorXd& y) const;
    // Scatter a matrix value into the scalar vector (symmetrizes if needed).
    void set_value(int var, const Eigen::MatrixXd& value, Eigen::VectorXd& y) const;
};

enum class SdpStatus { Optimal, Feasible, Infeasible, NumericalFailure };

struct SdpSolution {
    SdpStatus status = SdpStatus::NumericalFailure;
    Eigen::VectorXd y;
    std::vector<double> block_margins;   // post-shift margin per block, >0 means satisfied strictly
    int iterations = 0;
    double duality_gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double objective_value = 0.0;
};

struct SdpOptions {
    double tol = 1e-8;
    int max_iter = 200;
    double step_fraction = 0.98;
    bool verbose = false;
};

// Primal-dual interior-point solve (Nesterov-Todd scaling). Dimension
// mismatches and non-symmetric block evaluations throw std::invalid_argument.
SdpSolution solve(const SdpProblem& problem, const SdpOptions& opts = {});

// Extreme eigenvalues of a symmetric matrix; throws on non-finite entries.
std::pair<double, double> eig_margin(const Eigen::MatrixXd& symmetric_block);

// Re-verify a solution against the problem's own evaluators (does not trust
// solver internals). Returns per-block post-shift margins; all must be > 0.
std::vector<double> verify_blocks(const SdpProblem& problem, const Eigen::VectorXd& y);

// Self-describing text dump of the extracted affine problem data, and its
// inverse. Loaded problems carry data-backed evaluators.
void dump_problem(const SdpProblem& problem, std::ostream& os);
SdpProblem load_problem(std::istream& is);

}  // namespace tsmrc
