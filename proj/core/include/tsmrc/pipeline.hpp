#pragma once

#include "tsmrc/io.hpp"

namespace tsmrc {

// Outputs of the full two-design synthesis pipeline.
struct PipelineResult {
    CalibrationResult calibration;
    MembershipGrid grid;
    std::vector<OperatingPoint> operating_points;
    std::vector<TsSubmodel> submodels_1dof;     // physical units
    std::vector<TsSubmodel> submodels_4state;   // physical units
    std::vector<double> beta0;

    SynthesisResult speed;
    SynthesisResult torque_certified;
    GainSchedule torque;            // refined when enabled and verified, else certified
    bool refinement_used = false;
    std::vector<double> refine_objectives;

    GainSchedule combined;          // runtime reference model attached
    EigenReport combined_report;    // envelope D-region check
    EigenReport speed_report;
    EigenReport torque_report;
    double worst_vertex_hinf = 0.0; // torque-design vertices, frequency sweep

    std::vector<AugmentedModel> aug_speed_pu;
    std::vector<AugmentedModel> aug_torque_pu;    // torque-design reference
    std::vector<AugmentedModel> aug_combined_pu;  // runtime reference

    GainsFile gains_file() const;
};

// Calibrate, linearize, run both Table-I designs (speed: alpha_min-centered;
// torque: max-margin certificate, then the time-domain refinement), combine
// per Eq. 34 and verify. Refined gains are only adopted when the full
// eigenvalue-region and vertex-Hinf verification passes; otherwise the
// certified schedule is kept.
PipelineResult run_synthesis_pipeline(const RunConfig& cfg);

}  // namespace tsmrc
