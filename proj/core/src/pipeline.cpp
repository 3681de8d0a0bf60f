#include "tsmrc/pipeline.hpp"

namespace tsmrc {

GainsFile PipelineResult::gains_file() const {
    GainsFile g;
    g.schedule = combined;
    g.beta0 = beta0;
    g.tau_ref_speed = combined.ref.tau(0);
    g.tau_ref_torque = combined.ref.tau(1);
    return g;
}

PipelineResult run_synthesis_pipeline(const RunConfig& cfg) {
    PipelineResult out;
    cfg.params.validate();
    out.calibration = calibrate_surface(cfg.params);
    const CoefficientSurface& surface = out.calibration.surface;

    out.operating_points =
        build_grid(cfg.params, surface, cfg.grid_lo, cfg.grid_hi, cfg.grid_n, PlantModel::FourState);
    out.grid.nodes.clear();
    for (const auto& pt : out.operating_points) {
        out.grid.nodes.push_back(pt.v0);
        out.beta0.push_back(pt.u0(0));
    }
    out.submodels_1dof = build_submodels(PlantModel::OneDof, out.operating_points, cfg.params, surface);
    out.submodels_4state = build_submodels(PlantModel::FourState, out.operating_points, cfg.params,
                                           surface, cfg.torque_spec.tau(1));

    out.speed = synthesize(out.submodels_1dof, out.grid, cfg.speed_spec, cfg.params,
                           PlantModel::OneDof, SynthesisObjective::MaxAlphaMinMargin);
    out.torque_certified =
        synthesize(out.submodels_4state, out.grid, cfg.torque_spec, cfg.params,
                   PlantModel::FourState,
                   cfg.torque_spec.fixed_gamma ? SynthesisObjective::MaxMargin
                                               : SynthesisObjective::MinGamma);
    out.torque = out.torque_certified.schedule;

    // Per-unit augmented models for verification (and refinement metrics).
    const UnitBases b1 = UnitBases::from(cfg.params, PlantModel::OneDof);
    const UnitBases b4 = UnitBases::from(cfg.params, PlantModel::FourState);
    std::vector<TsSubmodel> pu1, pu4;
    for (const auto& s : out.submodels_1dof) {
        TsSubmodel p = to_per_unit(s, b1);
        p.B = p.B.leftCols(1).eval();
        pu1.push_back(std::move(p));
    }
    for (const auto& s : out.submodels_4state) pu4.push_back(to_per_unit(s, b4));
    out.aug_speed_pu = augment(pu1, out.speed.schedule.ref);
    out.aug_torque_pu = augment(pu4, out.torque.ref);
    const ReferenceModel runtime_ref = combined_reference(cfg.speed_spec, cfg.torque_spec);
    out.aug_combined_pu = augment(pu4, runtime_ref);

    const auto pairs = active_pairs(out.grid);
    const double env_amin = std::min(cfg.speed_spec.alpha_min, cfg.torque_spec.alpha_min);
    const double env_amax = std::max(cfg.speed_spec.alpha_max, cfg.torque_spec.alpha_max);

    auto verify_all = [&](const GainSchedule& torque_sched, EigenReport& torque_rep,
                          EigenReport& combined_rep, GainSchedule& combined_out,
                          double& worst_hinf) {
        torque_rep = verify_dregion(out.aug_torque_pu, torque_sched, cfg.torque_spec.alpha_min,
                                    cfg.torque_spec.alpha_max, cfg.torque_spec.theta, pairs);
        combined_out = combine_gains(out.speed.schedule, torque_sched);
        combined_out.ref = runtime_ref;
        combined_rep = verify_dregion(out.aug_combined_pu, combined_out, env_amin, env_amax,
                                      cfg.torque_spec.theta, pairs);
        worst_hinf = 0.0;
        for (std::size_t i = 0; i < out.aug_torque_pu.size(); ++i) {
            const HinfResult h = vertex_hinf(out.aug_torque_pu[i], torque_sched.K[i]);
            worst_hinf = std::max(worst_hinf, h.stable ? h.peak
                                                       : std::numeric_limits<double>::infinity());
        }
        return torque_rep.violations == 0 && combined_rep.violations == 0 &&
               torque_rep.reference_poles_complete && combined_rep.reference_poles_complete &&
               worst_hinf <= cfg.torque_spec.gamma * (1.0 + 1e-3);
    };

    if (cfg.refine) {
        RefineResult rr = refine_torque_schedule(out.submodels_4state, out.torque_certified.schedule,
                                                 out.speed.schedule, cfg.speed_spec, cfg.torque_spec,
                                                 cfg.params);
        out.refine_objectives = rr.node_objectives;
        EigenReport trep, crep;
        GainSchedule comb;
        double hinf = 0.0;
        if (verify_all(rr.schedule, trep, crep, comb, hinf)) {
            out.torque = rr.schedule;
            out.torque_report = trep;
            out.combined_report = crep;
            out.combined = comb;
            out.worst_vertex_hinf = hinf;
            out.refinement_used = true;
        }
    }
    if (!out.refinement_used) {
        verify_all(out.torque, out.torque_report, out.combined_report, out.combined,
                   out.worst_vertex_hinf);
    }
    out.speed_report = verify_dregion(out.aug_speed_pu, out.speed.schedule, cfg.speed_spec.alpha_min,
                                      cfg.speed_spec.alpha_max, cfg.speed_spec.theta, pairs);
    return out;
}

}  // namespace tsmrc
