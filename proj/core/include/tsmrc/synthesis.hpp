#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "tsmrc/linearize.hpp"
#include "tsmrc/sdp.hpp"

namespace tsmrc {

enum class ReferenceKind { SpeedOnly, SpeedAndTorque };

// First-order (diagonal) reference model; poles are exactly {-1/tau_k}.
struct ReferenceModel {
    Eigen::MatrixXd Ar, Er, Cr, Fr;
    Eigen::VectorXd tau;

    int order() const { return static_cast<int>(Ar.rows()); }
    std::vector<double> poles() const;
};

ReferenceModel build_reference_model(ReferenceKind kind, const Eigen::VectorXd& tau);

// Augmented open-loop MRC model, state ordering xbar = [x; xr; xI].
struct AugmentedModel {
    Eigen::MatrixXd Abar, Bbar, Ebar, Cbar, Fbar;
    int n = 0, l = 0, q = 0, m = 0;

    int dim() const { return n + l + q; }
};

// Exact block layout; E_i = F_i = F^r = 0 here so Ebar only carries E^r rows.
AugmentedModel augment(const TsSubmodel& submodel_pu, const ReferenceModel& ref);
std::vector<AugmentedModel> augment(const std::vector<TsSubmodel>& submodels_pu,
                                    const ReferenceModel& ref);

// Similarity-scale a physical submodel into per-unit coordinates.
TsSubmodel to_per_unit(const TsSubmodel& m, const UnitBases& bases);

struct SynthesisSpec {
    double alpha_min = 0.0;   // 1/s
    double alpha_max = 0.0;   // 1/s
    double theta = 1.51;      // rad, damping cone half-angle from the negative real axis
    double gamma = 1.0;
    bool fixed_gamma = true;
    Eigen::VectorXd tau;      // reference time constants

    void validate() const;
};

// Gain schedule K_j in per-unit coordinates, one m x (n+l+q) matrix per node.
struct GainSchedule {
    std::vector<Eigen::MatrixXd> K;
    MembershipGrid grid;
    ReferenceModel ref;
    PlantModel model = PlantModel::FourState;
    bool combined = false;

    Eigen::MatrixXd blend(double z) const;   // membership-weighted gain
};

// Variable indices of an assembled Eq.-28 problem.
struct AssembledLmis {
    SdpProblem problem;
    int x_var = -1;
    std::vector<int> m_vars;
    int gamma_sq_var = -1;    // only in minimization mode
    int n = 0, l = 0, q = 0, m_in = 0;
};

// The constraint families (a)-(e): X > 0 plus, per active pair, the two decay
// bounds, the damping cone and the bounded-real block (149 blocks for the
// default 13-node grid). The decay/cone family is built with the uncontrollable
// reference block replaced by an in-band dummy so the reference poles are
// exempt, matching the verification convention.
AssembledLmis assemble_lmis(const std::vector<AugmentedModel>& aug,
                            const std::vector<std::pair<int, int>>& pairs,
                            const SynthesisSpec& spec);

enum class SynthesisObjective {
    MaxMargin,        // maximize a common slack on decay/cone/BRL families
    MaxAlphaMinMargin,  // maximize slack on the alpha_min family only
    MinGamma,         // minimize gamma^2 under the spec gamma as a cap
};

struct SynthesisResult {
    GainSchedule schedule;
    Eigen::MatrixXd X;
    SdpSolution solution;
    std::vector<double> verified_margins;   // post-shift margins of the Eq.-28 blocks
    double gamma_achieved = 0.0;
};

// Solve one design: scale submodels to per-unit, assemble, solve, extract
// K_j = M_j X^{-1} and re-verify every block. Throws SynthesisError on
// infeasibility, carrying the first violated family name.
struct SynthesisError : std::runtime_error {
    SdpStatus status;
    SynthesisError(const std::string& msg, SdpStatus st)
        : std::runtime_error(msg), status(st) {}
};

SynthesisResult synthesize(const std::vector<TsSubmodel>& submodels_physical,
                           const MembershipGrid& grid, const SynthesisSpec& spec,
                           const TurbineParams& params, PlantModel model,
                           SynthesisObjective objective = SynthesisObjective::MaxMargin);

// Eq.-34 combination: row 1 from the speed design, row 2 from the torque
// design with the speed reference/integrator channels zeroed.
GainSchedule combine_gains(const GainSchedule& speed, const GainSchedule& torque);

// Runtime reference model of the combined controller: the omega_r channel
// keeps the speed design's time constant, the torque channel the actuator one.
ReferenceModel combined_reference(const SynthesisSpec& speed_spec,
                                  const SynthesisSpec& torque_spec);

struct EigenReport {
    struct Entry {
        int i = 0, j = 0;
        std::complex<double> lambda;
        bool is_reference = false;
        bool band_ok = true;
        bool cone_ok = true;
    };
    std::vector<Entry> entries;
    int violations = 0;          // non-reference entries failing band or cone
    bool reference_poles_complete = true;  // every pair's spectrum contains all reference poles
};

// Closed-loop eigenvalues of (Abar_i - Bbar_i K_j) for all active pairs,
// classified against the reference poles (matched within 1e-9, exempt) and the
// D-region band [-alpha_max - 1e-6, -alpha_min + 1e-6] with the theta cone.
EigenReport verify_dregion(const std::vector<AugmentedModel>& aug,
                           const GainSchedule& gains,
                           double alpha_min, double alpha_max, double theta,
                           const std::vector<std::pair<int, int>>& pairs);

struct HinfResult {
    double peak = 0.0;
    double peak_frequency = 0.0;
    bool stable = true;
};

// Peak singular value of the w -> eps transfer of one closed-loop vertex by a
// 1000-point log sweep over [1e-3, 1e3] rad/s with local refinement.
HinfResult vertex_hinf(const AugmentedModel& aug, const Eigen::MatrixXd& gain);

// -------- deterministic time-domain gain refinement (torque schedule) --------

struct RefineOptions {
    double tau_torque_ref_frt = 0.025;   // s, FRT reference time constant
    double torque_rate_pu = 0.0;         // p.u./s demand rate limit in the saturated metric; 0 = derive from params
    int nm_max_iter = 4000;
    double step_weight = 1.0;
    double frt_weight = 10.0, frt_allow = 0.02;
    double region_weight = 1e4;
    double hinf_weight = 2.0, hinf_cap = 1.30;
    double sat_final_weight = 4.0, sat_final_allow = 0.04;
    double sat_ripple_weight = 2.0, sat_ripple_allow = 0.10;
    double sat_growth_weight = 2.0, sat_growth_allow = 0.75;
    double accept_threshold = 0.06;      // second-pass trigger on the node objective
};

struct RefineResult {
    GainSchedule schedule;
    std::vector<double> node_objectives;
    double worst_step_error = 0.0;  // fraction of step amplitude
    double worst_frt = 0.0;         // |T_g| p.u. at fault + 150 ms
};

// Middle-out Nelder-Mead search per node on time-domain tracking metrics
// (reference-step fidelity, FRT collapse, rate-limited settling, coarse Hinf)
// under hard D-region margins for both the torque design and the combined
// schedule. Deterministic: fixed starts, no RNG.
RefineResult refine_torque_schedule(const std::vector<TsSubmodel>& torque_submodels_physical,
                                    const GainSchedule& torque_certified,
                                    const GainSchedule& speed_schedule,
                                    const SynthesisSpec& speed_spec,
                                    const SynthesisSpec& torque_spec,
                                    const TurbineParams& params,
                                    const RefineOptions& opts = {});

}  // namespace tsmrc
