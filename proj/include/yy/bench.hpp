#pragma once

#include "yy/baselines.hpp"
#include "yy/filter.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace yy {

// RMSE = sqrt( sum_k |e_k|^2 / (K r) );  ME = (1/K) sum_k sqrt(|e_k|^2 / r).
// Dividing by r makes both metrics per-component, so they are comparable
// across state dimensions; Cauchy-Schwarz gives RMSE >= ME.
double rmse(const Mat& estimates, const Mat& truth);
double mean_error(const Mat& estimates, const Mat& truth);

enum class ExperimentKind { LargeScale, SmallCubic, DoubleWell, Linear, Custom };

ExperimentKind experiment_from_string(const std::string& name);
std::string to_string(ExperimentKind kind);

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Custom;
    int r = 1;
    double T = 10.0;
    int K = 1000;
    bool x0_standard_normal = false;
    Vec x0_value;  // used when !x0_standard_normal

    FilterConfig filter;
    bool run_yauyau = true;
    bool run_ekf = false;
    bool run_ukf = false;
    bool run_pf = false;
    bool run_kalman_bucy = false;
    int pf_particles = 200;

    int trials = 20;
    std::uint64_t seed = 1;
    std::string out_dir;
    // One shared simulation for every trial (the double-well protocol, where
    // only the stochastic filters vary between runs) versus an independent
    // simulation per trial.
    bool shared_path = false;
    bool trials_parallel = true;
    bool write_estimates = false;
};

// Fully parameterized presets of the benchmark experiments.
ExperimentConfig preset_config(ExperimentKind kind);
DynamicsModel make_experiment_model(const ExperimentConfig& cfg);

struct MetricRow {
    int trial = 0;
    std::string method;
    double rmse = 0.0;
    double me = 0.0;
    double time_offline_s = 0.0;
    double time_online_s = 0.0;
    double time_total_s = 0.0;
    int restarts = 0;
    bool diverged = false;
};

struct MethodSummary {
    std::string method;
    double rmse_mean = 0, rmse_std = 0;
    double me_mean = 0, me_std = 0;
    double time_mean = 0, time_std = 0;
    int trials = 0;
    int diverged = 0;
};

struct ExperimentResult {
    std::vector<MetricRow> rows;
    std::vector<MethodSummary> summary;
};

// Runs every enabled method against per-trial (or shared) simulations.
// Within a trial all methods consume the same observation path. When
// out_dir is set, writes results.csv and summary.csv there.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::vector<MethodSummary> summarize(const std::vector<MetricRow>& rows);

struct SweepRow {
    int r = 0;
    int n = 0;
    double time_mean = 0;
    double rmse_mean = 0;
    double me_mean = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool has_slope = false;
    double time_log_slope = 0.0;  // fitted d log(time) / d log(r)
};

// Large-scale preset per (dims[i], samples[i]) pair; fits the log-log
// time-versus-dimension slope when more than one dimension is given.
SweepResult sweep_dimension(const ExperimentConfig& base, const std::vector<int>& dims,
                            const std::vector<int>& samples);

// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---- serialization ----

// Shortest round-trip decimal representation.
std::string format_double(double v);

void write_results_csv(const std::string& path, const std::vector<MetricRow>& rows);
void write_summary_csv(const std::string& path, const std::vector<MethodSummary>& summary);
void write_sweep_csv(const std::string& path, const SweepResult& sweep);
void print_summary(std::ostream& os, const std::vector<MethodSummary>& summary);

// t, x_0..x_{r-1} rows (truth / estimates) and t, dy_0..dy_{m-1} rows (obs)
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_observations_csv(const std::string& path, const ObservationPath& obs, double dt);
void write_estimates_csv(const std::string& path, const Mat& estimates, double dt);
void write_points_csv(std::ostream& os, const PointSet& ps);
Trajectory read_trajectory_csv(const std::string& path);
ObservationPath read_observations_csv(const std::string& path);

// Flat `key = value` config file with one [section] per method; unknown
// keys or sections are hard errors.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_text(ExperimentConfig& cfg, std::istream& in, const std::string& origin);

}  // namespace yy
