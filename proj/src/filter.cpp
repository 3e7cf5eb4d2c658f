#include "yy/filter.hpp"

#include "yy/bench.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace yy {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Observation-noise weighting beta = b^{-1} (or pseudoinverse), b = V V^T.
struct ObsWeighting {
    bool identity = true;
    bool constant = true;
    Mat beta;  // valid when !identity && constant

    static ObsWeighting from(const DynamicsModel& model) {
        ObsWeighting w;
        if (model.obs_noise.is_identity()) return w;
        w.identity = false;
        w.constant = model.obs_noise.is_constant();
        if (w.constant) {
            const Mat v = *model.obs_noise.constant;
            w.beta = pseudoinverse_spd(v * v.transpose()).pinv;
        }
        return w;
    }

    Mat eval(const DynamicsModel& model, const Vec& x) const {
        if (constant) return beta;
        const Mat v = model.obs_noise.eval(x, model.m);
        return pseudoinverse_spd(v * v.transpose()).pinv;
    }
};

void normalize_in_place(FilterState& state) {
    double m = kNegInf;
    for (int i = 0; i < state.logw.size(); ++i)
        if (state.signs[i] > 0 && state.logw[i] > m) m = state.logw[i];
    if (m == kNegInf) throw FilterCollapseError(state.step);
    double s = 0.0;
    for (int i = 0; i < state.logw.size(); ++i)
        if (state.signs[i] > 0) s += std::exp(state.logw[i] - m);
    const double shift = m + std::log(s);
    for (int i = 0; i < state.logw.size(); ++i)
        if (state.signs[i] != 0) state.logw[i] -= shift;
}

void update_estimate(FilterState& state) {
    const int n = state.points.n();
    Vec est = Vec::Zero(state.points.r());
    for (int i = 0; i < n; ++i)
        if (state.signs[i] > 0)
            est += std::exp(state.logw[i]) * state.points.points.row(i).transpose();
    state.estimate = est;
}

Vec gaussian_log_weights(const PointSet& ps, const Vec& center, double std_dev) {
    return -(ps.points.rowwise() - center.transpose()).rowwise().squaredNorm() /
           (2.0 * std_dev * std_dev);
}

}  // namespace

void FilterConfig::validate(int r) const {
    if (n < 2) throw std::invalid_argument("FilterConfig: n >= 2 required");
    if (!(dt > 0.0)) throw std::invalid_argument("FilterConfig: dt > 0 required");
    if (!(R > 0.0)) throw std::invalid_argument("FilterConfig: R > 0 required");
    if (restart_interval < 1)
        throw std::invalid_argument("FilterConfig: restart_interval >= 1 required");
    if (!(init_std > 0.0)) throw std::invalid_argument("FilterConfig: init_std > 0 required");
    if (x0_guess && x0_guess->size() != r)
        throw std::invalid_argument("FilterConfig: x0_guess dimension mismatch");
}

SequenceKind FilterConfig::effective_sequence(int r) const {
    return sequence_auto ? default_sequence(r) : sequence;
}

std::uint64_t FilterConfig::effective_skip(SequenceKind kind) const {
    if (skip) return *skip;
    return kind == SequenceKind::Sobol ? 1 : 0;
}

FilterState init_filter(const DynamicsModel& model, const FilterConfig& cfg,
                        const Vec& x0_center) {
    cfg.validate(model.r);
    if (x0_center.size() != model.r)
        throw std::invalid_argument("init_filter: x0_center dimension mismatch");

    FilterState state;
    const SequenceKind kind = cfg.effective_sequence(model.r);
    const std::uint64_t skip_or_seed =
        (kind == SequenceKind::LHS || kind == SequenceKind::PseudoRandom)
            ? cfg.seed
            : cfg.effective_skip(kind);
    state.reference_unit = std::make_shared<const PointSet>(
        generate_unit(kind, cfg.n, model.r, skip_or_seed));

    KernelSpec spec = cfg.kernel;
    spec.dt = cfg.dt;
    const Domain domain(x0_center, cfg.effective_half_width());
    state.points = scale_to_domain(*state.reference_unit, domain);

    bool assembled = false;
    std::string cache_path;
    if (!cfg.op_cache_dir.empty()) {
        char name[64];
        std::snprintf(name, sizeof(name), "/op_%016llx.bin",
                      static_cast<unsigned long long>(point_set_hash(state.points)));
        cache_path = cfg.op_cache_dir + name;
        TransitionOperator cached;
        if (load_operator(cache_path, cached) && cached.n == state.points.n() &&
            cached.r == model.r && cached.dt == spec.dt && cached.order == spec.order &&
            cached.point_set_hash == point_set_hash(state.points)) {
            state.op = std::move(cached);
            assembled = true;
        }
    }
    if (!assembled) {
        state.op = assemble_operator(model, state.points, spec, cfg.boundary_tol);
        if (!cache_path.empty()) save_operator(state.op, cache_path);
    }

    bool any_interior = false;
    for (int i = 0; i < cfg.n; ++i) any_interior |= !state.op.boundary_mask[i];
    if (!any_interior)
        throw std::runtime_error("init_filter: every sample sits on the domain boundary");

    state.logw = gaussian_log_weights(state.points, x0_center, cfg.init_std);
    state.signs = SignVec::Constant(cfg.n, 1);
    state.step = 0;
    normalize_in_place(state);
    update_estimate(state);
    return state;
}

void filter_step(FilterState& state, const DynamicsModel& model, const FilterConfig& cfg,
                 const Vec& dy) {
    if (!dy.allFinite()) throw std::invalid_argument("filter_step: non-finite observation");
    const int n = state.points.n();

    // (a) prediction
    LogWeights w{state.logw, state.signs};
    LogWeights pred = apply_operator(state.op, w);
    state.logw = std::move(pred.logw);
    state.signs = std::move(pred.signs);

    // (b) multiplicative correction  h^T beta dy - dt/2 h^T beta h
    const ObsWeighting beta = ObsWeighting::from(model);
    for (int i = 0; i < n; ++i) {
        if (state.signs[i] == 0) continue;
        const Vec x = state.points.points.row(i).transpose();
        const Vec hx = model.obs(x);
        double lin, quad;
        if (beta.identity) {
            lin = hx.dot(dy);
            quad = hx.squaredNorm();
        } else {
            const Mat b = beta.constant ? beta.beta : beta.eval(model, x);
            const Vec bh = b * hx;
            lin = bh.dot(dy);
            quad = hx.dot(bh);
        }
        state.logw[i] += lin - 0.5 * cfg.dt * quad;
    }

    // (c) the true density is nonnegative: project signed-kernel negatives out
    for (int i = 0; i < n; ++i) {
        if (state.signs[i] < 0) {
            state.signs[i] = 0;
            state.logw[i] = kNegInf;
            ++state.diagnostics.clamped_negative;
        }
    }

    ++state.step;
    // (d) normalize, (e) estimate
    normalize_in_place(state);
    update_estimate(state);
}

void filter_restart(FilterState& state, const DynamicsModel& model, const FilterConfig& cfg) {
    if (!state.estimate.allFinite())
        throw std::runtime_error("filter_restart: aborted, estimate not finite at step " +
                                 std::to_string(state.step));
    KernelSpec spec = cfg.kernel;
    spec.dt = cfg.dt;
    const Domain domain(state.estimate, cfg.R);
    state.points = scale_to_domain(*state.reference_unit, domain);
    state.op = assemble_operator(model, state.points, spec, cfg.boundary_tol);
    if (cfg.restart_weight_init == RestartWeightInit::Gaussian)
        state.logw = gaussian_log_weights(state.points, state.estimate, cfg.R / 3.0);
    else
        state.logw = Vec::Zero(state.points.n());
    state.signs = SignVec::Constant(state.points.n(), 1);
    ++state.diagnostics.restarts;
    normalize_in_place(state);
    // the estimate is the restart center; it only moves on observation steps
}

RunResult run_filter(const DynamicsModel& model, const ObservationPath& obs,
                     const Trajectory& truth, const FilterConfig& cfg) {
    const int K = obs.steps();
    if (truth.steps() != K)
        throw std::invalid_argument("run_filter: truth and observations disagree on K");
    if (obs.m() != model.m || truth.r() != model.r)
        throw std::invalid_argument("run_filter: dimension mismatch");

    RunResult result;
    result.method = "yauyau";
    result.estimates.resize(K, model.r);

    const auto t_total = Clock::now();
    const Vec x0 = cfg.x0_guess ? *cfg.x0_guess : Vec(truth.states.row(0).transpose());

    auto t0 = Clock::now();
    FilterState state = init_filter(model, cfg, x0);
    result.time_offline_s += seconds_since(t0);

    const int iota = cfg.restart_interval;
    for (int k = 1; k <= K; ++k) {
        t0 = Clock::now();
        filter_step(state, model, cfg, obs.increments.row(k - 1).transpose());
        result.time_online_s += seconds_since(t0);
        result.estimates.row(k - 1) = state.estimate.transpose();

        if (iota > 1 && k % iota == 0 && k < K) {
            t0 = Clock::now();
            filter_restart(state, model, cfg);
            result.time_offline_s += seconds_since(t0);
        }
    }

    result.diagnostics = state.diagnostics;
    result.rmse = rmse(result.estimates, truth.states.bottomRows(K));
    result.me = mean_error(result.estimates, truth.states.bottomRows(K));
    result.time_total_s = seconds_since(t_total);
    return result;
}

Vec normalized_weights(const FilterState& state) {
    Vec w = Vec::Zero(state.logw.size());
    for (int i = 0; i < state.logw.size(); ++i)
        if (state.signs[i] > 0) w[i] = std::exp(state.logw[i]);
    return w;
}

}  // namespace yy
