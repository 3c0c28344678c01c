#pragma once

#include "lfd/config.hpp"
#include "lfd/io.hpp"

namespace lfd {

/// Everything learned about one motion primitive.
struct LearnedPrimitive {
  PrimitiveModel model;
  ReferenceTrajectory reference;  // GMR mean + std at the base timestamps
  VarianceEnvelope env;
  SpeedPlan raw_plan;   // straight classifier output
  SpeedPlan plan;       // after majority smoothing
  ReferenceTrajectory retimed;  // reference with the plan applied
};

struct PipelineResult {
  std::vector<LearnedPrimitive> primitives;
};

/// align -> segment -> fit (CV-selected M) -> regress -> envelope ->
/// classify -> retime, for every primitive present in the demos. All demos
/// must share the primitive progression of the first one.
PipelineResult run_pipeline(const std::vector<Demonstration>& demos,
                            const ExperimentConfig& cfg);

/// Builds the five-phase bimanual scenario from a pipeline result; tool rest
/// poses come from the first demonstration's opening sample.
Scenario build_stitch_scenario(const PipelineResult& result,
                               const Demonstration& first_demo,
                               const ExperimentConfig& cfg);

/// One trajectory-reproduction trial result.
struct TrialMetrics {
  int trial = 0;
  EvalMetrics metrics;
};

/// Runs `cfg.trials` seeded reproduction runs in the given mode and returns
/// the per-trial metrics (traces optionally captured for the caller).
std::vector<TrialMetrics> run_reproduction_trials(
    const ExperimentConfig& cfg, ServoMode mode,
    std::vector<TraceRecord>* traces = nullptr, int downsample_factor = 1,
    double bias_mm_override = -1.0);

struct SweepPoint {
  int factor = 1;
  double mean_translation_mm = 0.0;
  double mean_rotation_deg = 0.0;
  double mean_duration_s = 0.0;
};

/// Speed/accuracy sweep over reference down-sampling factors (visual
/// servoing mode), averaged over cfg.trials seeds per factor; results come
/// back sorted by factor.
std::vector<SweepPoint> run_speed_sweep(const ExperimentConfig& cfg);

struct BiasSweepPoint {
  double bias_mm = 0.0;
  double open_loop_translation_mm = 0.0;
  double servo_translation_mm = 0.0;
};

/// Registration-error sweep: mean translation error of both modes per
/// injected hand-eye bias magnitude, sorted by magnitude. Open-loop error
/// follows the bias; servoing should stay flat.
std::vector<BiasSweepPoint> run_bias_sweep(const ExperimentConfig& cfg);

struct LatencySweepPoint {
  double latency_s = 0.0;
  double compensated_translation_mm = 0.0;
  double uncompensated_translation_mm = 0.0;
};

/// Camera-latency sweep in visual-servoing mode, with and without the
/// filter's latency compensation, sorted by latency.
std::vector<LatencySweepPoint> run_latency_sweep(const ExperimentConfig& cfg);

}  // namespace lfd
