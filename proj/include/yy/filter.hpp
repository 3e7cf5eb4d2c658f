#pragma once

#include "yy/kernel.hpp"
#include "yy/models.hpp"
#include "yy/qmc.hpp"

#include <memory>
#include <optional>

namespace yy {

enum class RestartWeightInit { Gaussian, Uniform };

struct FilterConfig {
    int n = 200;                     // sample count
    double R = 1.0;                  // local half-width
    std::optional<double> R_global;  // used instead of R when restarts are disabled
    int restart_interval = 1;        // iota; 1 = restart never invoked
    KernelSpec kernel = KernelSpec::make(1, 0.01);
    SequenceKind sequence = SequenceKind::Halton;
    bool sequence_auto = true;               // pick Halton (r<10) / Sobol (r>=10)
    std::optional<std::uint64_t> skip;       // sequence skip; default 0 Halton, 1 Sobol
    double dt = 0.01;
    double init_std = 1.0;
    std::uint64_t seed = 0;
    ObsEval obs_eval = ObsEval::Post;
    RestartWeightInit restart_weight_init = RestartWeightInit::Gaussian;
    double boundary_tol = 1e-12;
    std::optional<Vec> x0_guess;  // default: the true x0 (experiment parity)
    std::string op_cache_dir;     // when set, initial assemblies are cached on disk

    void validate(int r) const;
    SequenceKind effective_sequence(int r) const;
    std::uint64_t effective_skip(SequenceKind kind) const;
    double effective_half_width() const {
        return (restart_interval <= 1 && R_global) ? *R_global : R;
    }
};

struct FilterDiagnostics {
    std::int64_t clamped_negative = 0;  // signed-kernel entries projected to zero
    int restarts = 0;
    int degenerate_events = 0;
};

struct FilterState {
    std::shared_ptr<const PointSet> reference_unit;  // fixed unit-cube points
    PointSet points;                                 // current, possibly translated
    TransitionOperator op;
    Vec logw;       // log unnormalized weights
    SignVec signs;  // -1/0/+1 per weight
    Vec estimate;
    int step = 0;
    FilterDiagnostics diagnostics;
};

struct RunResult {
    std::string method;
    Mat estimates;  // K x r
    double rmse = 0.0;
    double me = 0.0;
    double time_offline_s = 0.0;
    double time_online_s = 0.0;
    double time_total_s = 0.0;
    FilterDiagnostics diagnostics;
    bool diverged = false;
};

struct FilterCollapseError : std::runtime_error {
    explicit FilterCollapseError(int at_step)
        : std::runtime_error("filter collapse: all weights vanished at step " +
                             std::to_string(at_step)),
          step(at_step) {}
    int step;
};

FilterState init_filter(const DynamicsModel& model, const FilterConfig& cfg,
                        const Vec& x0_center);

// One observation step: prediction through the operator, multiplicative
// log-domain correction h^T b^+ dy - dt/2 h^T b^+ h, clamping of
// negative-sign entries, normalization, and the weighted-mean estimate.
void filter_step(FilterState& state, const DynamicsModel& model, const FilterConfig& cfg,
                 const Vec& dy);

// Local resampling-restart: translate the reference points to a cube
// centred on the current estimate, reassemble the operator there, and
// reinitialize the weights.
void filter_restart(FilterState& state, const DynamicsModel& model, const FilterConfig& cfg);

RunResult run_filter(const DynamicsModel& model, const ObservationPath& obs,
                     const Trajectory& truth, const FilterConfig& cfg);

// Normalized weights (probability vector) of the current state.
Vec normalized_weights(const FilterState& state);

}  // namespace yy
