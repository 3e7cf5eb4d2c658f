// Benchmark CLI for the improved Yau-Yau nonlinear filter.
//
// Subcommands: sample, simulate, filter, compare, sweep-dim, discrepancy.
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include "yy/bench.hpp"
#include "yy/parallel.hpp"
#include "yy/qmc.hpp"
#include "yy/rng.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;

yy::SequenceKind sequence_from(const std::string& name) {
    if (name == "halton") return yy::SequenceKind::Halton;
    if (name == "sobol") return yy::SequenceKind::Sobol;
    if (name == "faure") return yy::SequenceKind::Faure;
    if (name == "lhs") return yy::SequenceKind::LHS;
    if (name == "random") return yy::SequenceKind::PseudoRandom;
    throw CLI::ValidationError("unknown sequence: " + name);
}

yy::ExperimentConfig load_experiment(const std::string& config_path,
                                     const std::string& experiment, std::uint64_t seed,
                                     int trials, const std::string& out_dir) {
    yy::ExperimentConfig cfg;
    if (!config_path.empty())
        cfg = yy::parse_config_file(config_path);
    else if (!experiment.empty())
        cfg = yy::preset_config(yy::experiment_from_string(experiment));
    else
        throw CLI::ValidationError("need --experiment or --config");
    if (!experiment.empty() && !config_path.empty() &&
        cfg.experiment != yy::experiment_from_string(experiment))
        throw CLI::ValidationError("--experiment disagrees with config file");
    if (seed != 0) cfg.seed = seed;
    if (trials > 0) cfg.trials = trials;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    return cfg;
}

int cmd_sample(const std::string& kind, int n, int r, std::uint64_t skip_or_seed,
               const std::string& out) {
    yy::PointSet ps = yy::generate_unit(sequence_from(kind), n, r, skip_or_seed);
    if (out.empty()) {
        yy::write_points_csv(std::cout, ps);
    } else {
        std::ofstream f(out, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + out);
        yy::write_points_csv(f, ps);
    }
    return 0;
}

int cmd_simulate(const yy::ExperimentConfig& cfg, const std::string& out_dir) {
    const yy::DynamicsModel model = yy::make_experiment_model(cfg);
    yy::Rng x0_rng(cfg.seed, 0, 0);
    yy::Vec x0;
    if (cfg.x0_standard_normal) {
        x0.resize(cfg.r);
        for (int i = 0; i < cfg.r; ++i) x0[i] = x0_rng.next_normal();
    } else {
        x0 = cfg.x0_value;
    }
    const auto [truth, obs] = yy::simulate(model, x0, cfg.T, cfg.K, cfg.seed,
                                           cfg.filter.obs_eval);
    std::filesystem::create_directories(out_dir);
    yy::write_trajectory_csv(out_dir + "/truth.csv", truth);
    yy::write_observations_csv(out_dir + "/obs.csv", obs, truth.dt);
    std::cout << "wrote " << out_dir << "/truth.csv and " << out_dir << "/obs.csv\n";
    return 0;
}

int cmd_filter(const yy::ExperimentConfig& cfg, const std::string& truth_path,
               const std::string& obs_path, const std::string& out_dir,
               const std::string& op_cache) {
    const yy::DynamicsModel model = yy::make_experiment_model(cfg);
    const yy::Trajectory truth = yy::read_trajectory_csv(truth_path);
    const yy::ObservationPath obs = yy::read_observations_csv(obs_path);

    yy::FilterConfig fcfg = cfg.filter;
    fcfg.dt = truth.dt;
    fcfg.kernel.dt = truth.dt;
    if (!op_cache.empty()) {
        std::filesystem::create_directories(op_cache);
        fcfg.op_cache_dir = op_cache;
    }

    const yy::RunResult res = yy::run_filter(model, obs, truth, fcfg);

    std::filesystem::create_directories(out_dir);
    yy::write_estimates_csv(out_dir + "/estimates.csv", res.estimates, fcfg.dt);
    json summary = {{"method", res.method},
                    {"rmse", res.rmse},
                    {"me", res.me},
                    {"time_offline_s", res.time_offline_s},
                    {"time_online_s", res.time_online_s},
                    {"time_total_s", res.time_total_s},
                    {"restarts", res.diagnostics.restarts},
                    {"clamped_count", res.diagnostics.clamped_negative}};
    std::ofstream f(out_dir + "/result.json", std::ios::trunc);
    f << summary.dump(2) << '\n';
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_compare(const yy::ExperimentConfig& cfg) {
    const yy::ExperimentResult res = yy::run_experiment(cfg);
    yy::print_summary(std::cout, res.summary);
    if (!cfg.out_dir.empty())
        std::cout << "rows written to " << cfg.out_dir << "/results.csv\n";
    return 0;
}

int cmd_sweep(const yy::ExperimentConfig& base, std::vector<int> dims, std::vector<int> samples,
              bool long_mode, const std::string& out_dir) {
    if (dims.empty()) {
        dims = {10, 50, 100};
        samples = {100, 300, 500};
        if (long_mode) {
            dims.insert(dims.end(), {300, 600, 1000});
            samples.insert(samples.end(), {800, 1000, 2000});
        }
    }
    yy::ExperimentConfig cfg = base;
    const yy::SweepResult sweep = yy::sweep_dimension(cfg, dims, samples);
    for (const auto& row : sweep.rows)
        std::cout << "r=" << row.r << " n=" << row.n << " time=" << row.time_mean
                  << "s rmse=" << row.rmse_mean << " me=" << row.me_mean << '\n';
    if (sweep.has_slope)
        std::cout << "log-log time-vs-r slope: " << sweep.time_log_slope << '\n';
    else
        std::cout << "log-log time-vs-r slope: undefined (single dimension)\n";
    if (!out_dir.empty()) yy::write_sweep_csv(out_dir + "/sweep.csv", sweep);
    return 0;
}

int cmd_discrepancy(int n, int seeds) {
    const double d_sobol = yy::star_discrepancy_exact_2d(yy::sobol_unit(n, 2));
    const double d_halton = yy::star_discrepancy_exact_2d(yy::halton_unit(n, 2));
    int sobol_wins = 0, halton_wins = 0;
    double rand_sum = 0;
    for (int s = 0; s < seeds; ++s) {
        const double d_rand = yy::star_discrepancy_exact_2d(yy::random_unit(n, 2, 1000 + s));
        rand_sum += d_rand;
        if (d_sobol < d_rand) ++sobol_wins;
        if (d_halton < d_rand) ++halton_wins;
    }
    std::cout << "exact star discrepancy, r=2, n=" << n << "\n"
              << "  sobol:  " << d_sobol << "\n"
              << "  halton: " << d_halton << "\n"
              << "  random: " << rand_sum / seeds << " (mean over " << seeds << " seeds)\n"
              << "  sobol beats random in " << sobol_wins << "/" << seeds << " seeds\n"
              << "  halton beats random in " << halton_wins << "/" << seeds << " seeds\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"improved Yau-Yau nonlinear filter benchmark"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    // sample
    auto* sample = app.add_subcommand("sample", "emit low-discrepancy points as CSV");
    std::string s_kind = "halton", s_out;
    int s_n = 100, s_r = 2;
    std::uint64_t s_skip = 0;
    bool s_skip_set = false;
    sample->add_option("--kind", s_kind, "halton|sobol|faure|lhs|random");
    sample->add_option("--n", s_n, "point count")->required();
    sample->add_option("--r", s_r, "dimension")->required();
    sample->add_option("--skip", s_skip, "sequence skip (or seed for lhs/random)")
        ->each([&](const std::string&) { s_skip_set = true; });
    sample->add_option("--out", s_out, "output file (default stdout)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate truth.csv and obs.csv");
    std::string m_config, m_experiment = "small_cubic", m_out = ".";
    std::uint64_t m_seed = 0;
    simulate->add_option("--config", m_config, "config file");
    simulate->add_option("--experiment", m_experiment,
                         "large_scale|small_cubic|double_well|linear|custom");
    simulate->add_option("--seed", m_seed, "simulation seed");
    simulate->add_option("--out", m_out, "output directory");

    // filter
    auto* filter = app.add_subcommand("filter", "run the Yau-Yau filter on recorded data");
    std::string f_config, f_experiment, f_truth, f_obs, f_out = ".", f_cache;
    std::uint64_t f_seed = 0;
    filter->add_option("--config", f_config, "config file");
    filter->add_option("--experiment", f_experiment, "experiment preset");
    filter->add_option("--truth", f_truth, "truth csv")->required();
    filter->add_option("--obs", f_obs, "observation csv")->required();
    filter->add_option("--out", f_out, "output directory");
    filter->add_option("--seed", f_seed, "seed override");
    filter->add_option("--op-cache", f_cache, "operator cache directory");

    // compare
    auto* compare = app.add_subcommand("compare", "run one experiment preset");
    std::string c_config, c_experiment, c_out;
    std::uint64_t c_seed = 0;
    int c_trials = 0;
    bool c_long = false;
    compare->add_option("--config", c_config, "config file");
    compare->add_option("--experiment", c_experiment, "experiment preset");
    compare->add_option("--seed", c_seed, "seed override");
    compare->add_option("--trials", c_trials, "trial count override");
    compare->add_option("--out", c_out, "output directory");
    compare->add_flag("--long", c_long, "allow long-running settings");

    // sweep-dim
    auto* sweep = app.add_subcommand("sweep-dim", "dimension scaling sweep");
    std::string w_config, w_out;
    std::uint64_t w_seed = 0;
    int w_trials = 5;
    bool w_long = false;
    std::vector<int> w_dims, w_samples;
    sweep->add_option("--config", w_config, "config file");
    sweep->add_option("--dims", w_dims, "dimensions")->delimiter(',');
    sweep->add_option("--samples", w_samples, "sample counts")->delimiter(',');
    sweep->add_option("--seed", w_seed, "seed override");
    sweep->add_option("--trials", w_trials, "trials per point");
    sweep->add_option("--out", w_out, "output directory");
    sweep->add_flag("--long", w_long, "include r in {300, 600, 1000}");

    // discrepancy
    auto* disc = app.add_subcommand("discrepancy", "r=2 exact star-discrepancy comparison");
    int d_n = 64, d_seeds = 20;
    disc->add_option("--n", d_n, "points per set");
    disc->add_option("--seeds", d_seeds, "random seeds to compare against");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    yy::set_thread_count(threads);

    try {
        if (*sample) {
            std::uint64_t skip_or_seed = s_skip;
            if (!s_skip_set)
                skip_or_seed = s_kind == "sobol" ? 1 : 0;
            return cmd_sample(s_kind, s_n, s_r, skip_or_seed, s_out);
        }
        if (*simulate)
            return cmd_simulate(load_experiment(m_config, m_experiment, m_seed, 0, ""), m_out);
        if (*filter)
            return cmd_filter(load_experiment(f_config, f_experiment, f_seed, 0, ""), f_truth,
                              f_obs, f_out, f_cache);
        if (*compare) {
            yy::ExperimentConfig cfg =
                load_experiment(c_config, c_experiment, c_seed, c_trials, c_out);
            if (!c_long && cfg.r > 100)
                throw CLI::ValidationError("r > 100 requires --long");
            return cmd_compare(cfg);
        }
        if (*sweep) {
            yy::ExperimentConfig cfg = w_config.empty()
                                           ? yy::preset_config(yy::ExperimentKind::LargeScale)
                                           : yy::parse_config_file(w_config);
            if (w_seed != 0) cfg.seed = w_seed;
            cfg.trials = w_trials;
            if (!w_long)
                for (int d : w_dims)
                    if (d > 100) throw CLI::ValidationError("dims > 100 require --long");
            return cmd_sweep(cfg, w_dims, w_samples, w_long, w_out);
        }
        if (*disc) return cmd_discrepancy(d_n, d_seeds);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
