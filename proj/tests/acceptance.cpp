// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion also enforces its wall-clock budget.

#include "yy/baselines.hpp"
#include "yy/bench.hpp"
#include "yy/filter.hpp"
#include "yy/kernel.hpp"
#include "yy/models.hpp"
#include "yy/parallel.hpp"
#include "yy/qmc.hpp"
#include "yy/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

struct Criterion {
    std::string name;
    double budget_s;
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

void run_criterion(const std::string& name, double budget_s,
                   const std::function<void(Criterion&)>& body) {
    Criterion c{name, budget_s};
    const auto t0 = Clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.note(std::string("exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    if (elapsed >= budget_s) {
        c.ok = false;
        c.note("runtime " + std::to_string(elapsed) + "s exceeds budget " +
               std::to_string(budget_s) + "s");
    }
    std::printf("[%s] %s (%.3fs)%s%s\n", c.ok ? "PASS" : "FAIL", c.name.c_str(), elapsed,
                c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
    if (!c.ok) ++g_failures;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Trapezoid quadrature of exp(log K(x, .)) u(.) over [lo, hi].
double quad_kernel(const yy::DynamicsModel& model, double x, double dt,
                   const std::function<double(double)>& u, double lo, double hi, int n) {
    const yy::Vec xv = yy::Vec::Constant(1, x);
    const double div = model.analytic_div(xv);
    const double h = (hi - lo) / (n - 1);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = lo + h * i;
        const double val =
            std::exp(yy::base_kernel_log(model, xv, yy::Vec::Constant(1, y), dt, div)) * u(y);
        acc += (i == 0 || i == n - 1) ? 0.5 * val : val;
    }
    return acc * h;
}

void c1_coefficients(Criterion& c) {
    const yy::KernelSpec spec = yy::KernelSpec::make(2, 0.01);
    yy::Vec coeffs;
    const auto t0 = Clock::now();
    coeffs = yy::highorder_coeffs(spec);
    const double solve_s = std::chrono::duration<double>(Clock::now() - t0).count();
    const double s2 = std::sqrt(2.0);
    c.require(std::abs(coeffs[0] - (-s2 - 1.0)) <= 1e-12, "c1 off");
    c.require(std::abs(coeffs[1] - (4.0 + 2.0 * s2)) <= 1e-12, "c2 off");
    c.require(std::abs(coeffs[2] - (-2.0 - s2)) <= 1e-12, "c3 off");
    c.require(solve_s < 1e-3, "solve took " + fmt(solve_s) + "s");
    c.note("c = (" + fmt(coeffs[0]) + ", " + fmt(coeffs[1]) + ", " + fmt(coeffs[2]) + ")");
}

void c2_consistency_orders(Criterion& c) {
    const yy::DynamicsModel lin = yy::make_linear(1);
    auto u = [](double y) { return std::exp(-0.5 * y * y) / std::sqrt(2.0 * M_PI); };
    auto lstar_u = [&](double x) {
        const double ux = u(x);
        return 0.5 * (x * x - 1.0) * ux + 0.5 * ux - 0.5 * x * x * ux;
    };
    const std::vector<double> dts = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
    const yy::Vec c2v = yy::highorder_coeffs(yy::KernelSpec::make(2, 0.01));
    std::vector<double> err1, err2;
    for (double dt : dts) {
        double w1 = 0.0, w2 = 0.0;
        for (double x = -2.0; x <= 2.0 + 1e-9; x += 0.25) {
            const double l_full = quad_kernel(lin, x, dt, u, -6.0, 6.0, 24001);
            const double l_half = quad_kernel(lin, x, dt / 2, u, -6.0, 6.0, 24001);
            w1 = std::max(w1, std::abs((l_full - u(x)) / dt - lstar_u(x)));
            const double l2 = c2v[0] * l_full + c2v[1] * l_half + c2v[2] * u(x);
            w2 = std::max(w2, std::abs((l2 - u(x)) / dt - lstar_u(x)));
        }
        err1.push_back(w1);
        err2.push_back(w2);
    }
    const double slope1 = yy::fit_loglog_slope(dts, err1);
    const double slope2 = yy::fit_loglog_slope(dts, err2);
    c.require(slope1 >= 0.35 && slope1 <= 0.65,
              "N=1 slope " + fmt(slope1) + " outside [0.35, 0.65]");
    c.require(slope2 >= 0.8 && slope2 <= 1.2, "N=2 slope " + fmt(slope2) + " outside [0.8, 1.2]");
    c.note("slopes N=1: " + fmt(slope1) + ", N=2: " + fmt(slope2));
}

void c3_kernel_normalization(Criterion& c) {
    const yy::DynamicsModel lin = yy::make_linear(1);
    const double dt = 0.01;
    yy::Rng rng(2024);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const double x = 6.0 * rng.next_double() - 3.0;
        const double mass =
            quad_kernel(lin, x, dt, [](double) { return 1.0; }, x - 2.0, x + 2.0, 8001);
        worst = std::max(worst, std::abs(mass - 1.0));
        c.require(std::abs(mass - 1.0) <= 1e-3,
                  "mass " + fmt(mass) + " at x=" + fmt(x) + " misses 1 +- 1e-3");
        if (!c.ok) break;
    }
    c.note("max |mass - 1| = " + fmt(worst) +
           " (exact mass is exp(-dt div f) = " + fmt(std::exp(0.5 * dt)) + ")");
}

void c4_ito_correction(Criterion& c) {
    const yy::Vec h = (yy::Vec(3) << 1.0, 2.0, 3.0).finished();
    const double dt = 0.01;
    const int n = 1'000'000;
    yy::Rng rng(777);
    double sum = 0.0, sumsq = 0.0;
    const double comp = 0.5 * dt * h.squaredNorm();
    for (int i = 0; i < n; ++i) {
        double z = 0.0;
        for (int d = 0; d < 3; ++d) z += h[d] * std::sqrt(dt) * rng.next_normal();
        const double v = std::exp(z - comp);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    const double se = std::sqrt(var / n);
    c.require(std::abs(mean - 1.0) <= 3.0 * se,
              "mean " + fmt(mean) + " deviates more than 3 SE (" + fmt(3.0 * se) + ")");
    c.note("mean = " + fmt(mean) + ", 3 SE = " + fmt(3.0 * se));
}

void c5_complex_step(Criterion& c) {
    const yy::DynamicsModel model = yy::make_cubic_sensor(10);
    yy::Rng rng(55);
    double worst_cs = 0.0, worst_cd = 0.0;
    for (int t = 0; t < 100; ++t) {
        yy::Vec x(10);
        for (int i = 0; i < 10; ++i) x[i] = 4.0 * rng.next_double() - 2.0;
        const double truth = model.analytic_div(x);
        worst_cs = std::max(worst_cs,
                            std::abs(yy::divergence_complex_step(model, x).value - truth));
        worst_cd = std::max(worst_cd,
                            std::abs(yy::divergence_central_diff(model, x, 1e-6) - truth));
    }
    c.require(worst_cs <= 1e-12, "complex step max error " + fmt(worst_cs) + " > 1e-12");
    c.require(worst_cd <= 1e-5, "central diff max error " + fmt(worst_cd) + " > 1e-5");
    c.require(worst_cd > 1e-10,
              "central diff max error " + fmt(worst_cd) + " unexpectedly below 1e-10");
    c.note("complex-step max " + fmt(worst_cs) + ", central-diff max " + fmt(worst_cd));
}

void c6_small_cubic(Criterion& c) {
    yy::ExperimentConfig cfg = yy::preset_config(yy::ExperimentKind::SmallCubic);
    cfg.trials = 20;
    cfg.seed = 1;
    const yy::ExperimentResult res = yy::run_experiment(cfg);
    std::vector<double> yy_r, ekf_r, ukf_r;
    for (const auto& row : res.rows) {
        const double v = std::isfinite(row.rmse) ? row.rmse : 1e300;
        if (row.method == "yauyau") yy_r.push_back(v);
        if (row.method == "ekf") ekf_r.push_back(v);
        if (row.method == "ukf") ukf_r.push_back(v);
    }
    const double myy = median(yy_r), mekf = median(ekf_r), mukf = median(ukf_r);
    c.require(myy <= 0.15, "median Yau-Yau RMSE " + fmt(myy) + " > 0.15");
    c.require(myy < mekf, "median Yau-Yau not below EKF");
    c.require(myy < mukf, "median Yau-Yau not below UKF");
    c.note("medians: yy " + fmt(myy) + ", ekf " + fmt(mekf) + ", ukf " + fmt(mukf));
}

void c7_double_well(Criterion& c) {
    yy::ExperimentConfig cfg = yy::preset_config(yy::ExperimentKind::DoubleWell);
    cfg.trials = 20;
    const yy::ExperimentResult res = yy::run_experiment(cfg);
    std::vector<double> yy_r, pf_r, ekf_r, ukf_r;
    for (const auto& row : res.rows) {
        const double v = std::isfinite(row.rmse) ? row.rmse : 1e300;
        if (row.method == "yauyau") yy_r.push_back(v);
        if (row.method == "pf") pf_r.push_back(v);
        if (row.method == "ekf") ekf_r.push_back(v);
        if (row.method == "ukf") ukf_r.push_back(v);
    }
    double yy_mean = 0, yy_sq = 0;
    for (double v : yy_r) yy_mean += v;
    yy_mean /= yy_r.size();
    for (double v : yy_r) yy_sq += (v - yy_mean) * (v - yy_mean);
    const double yy_std = std::sqrt(yy_sq / std::max<std::size_t>(yy_r.size() - 1, 1));
    double ekf_mean = 0, ukf_mean = 0;
    for (double v : ekf_r) ekf_mean += v;
    ekf_mean /= ekf_r.size();
    for (double v : ukf_r) ukf_mean += v;
    ukf_mean /= ukf_r.size();
    int wins = 0;
    for (std::size_t t = 0; t < yy_r.size() && t < pf_r.size(); ++t)
        if (yy_r[t] < pf_r[t]) ++wins;
    c.require(yy_mean <= 0.5, "Yau-Yau mean RMSE " + fmt(yy_mean) + " > 0.5");
    c.require(ekf_mean >= 0.7 && ekf_mean <= 1.1, "EKF mean " + fmt(ekf_mean) + " outside");
    c.require(ukf_mean >= 0.7 && ukf_mean <= 1.1, "UKF mean " + fmt(ukf_mean) + " outside");
    c.require(wins >= 15, "Yau-Yau beats PF only " + std::to_string(wins) + "/20");
    c.require(yy_std <= 0.1, "Yau-Yau trial std " + fmt(yy_std) + " > 0.1");
    c.note("yy " + fmt(yy_mean) + " +- " + fmt(yy_std) + ", ekf/ukf " + fmt(ekf_mean) +
           ", beats pf " + std::to_string(wins) + "/20");
}

void c8_linear(Criterion& c) {
    yy::ExperimentConfig cfg = yy::preset_config(yy::ExperimentKind::Linear);
    cfg.trials = 20;
    cfg.seed = 1;
    const yy::ExperimentResult res = yy::run_experiment(cfg);
    double yy_mean = 0, kb_mean = 0;
    int yy_n = 0, kb_n = 0;
    for (const auto& row : res.rows) {
        if (row.method == "yauyau") { yy_mean += row.rmse; ++yy_n; }
        if (row.method == "kalman_bucy") { kb_mean += row.rmse; ++kb_n; }
    }
    yy_mean /= yy_n;
    kb_mean /= kb_n;
    c.require(std::abs(yy_mean - kb_mean) <= 0.1,
              "|yy - kb| = " + fmt(std::abs(yy_mean - kb_mean)) + " > 0.1");
    c.require(yy_mean >= 0.3 && yy_mean <= 0.8, "yy mean " + fmt(yy_mean) + " outside [0.3,0.8]");
    c.require(kb_mean >= 0.3 && kb_mean <= 0.8, "kb mean " + fmt(kb_mean) + " outside [0.3,0.8]");
    c.note("yy " + fmt(yy_mean) + ", kb " + fmt(kb_mean));
}

void c9_scaling(Criterion& c) {
    yy::ExperimentConfig base = yy::preset_config(yy::ExperimentKind::LargeScale);
    base.trials = 5;
    base.seed = 1;
    const yy::SweepResult sweep = yy::sweep_dimension(base, {10, 50, 100}, {100, 300, 500});
    c.require(sweep.rows.size() == 3 && sweep.has_slope, "sweep incomplete");
    if (!sweep.has_slope) return;
    const double rmse10 = sweep.rows[0].rmse_mean;
    const double rmse100 = sweep.rows[2].rmse_mean;
    c.require(sweep.time_log_slope <= 1.8,
              "time exponent " + fmt(sweep.time_log_slope) + " > 1.8");
    c.require(rmse10 <= 0.35, "rmse(r=10) " + fmt(rmse10) + " > 0.35");
    c.require(rmse100 / rmse10 < 6.0,
              "rmse growth ratio " + fmt(rmse100 / rmse10) + " >= 6");
    c.note("exponent " + fmt(sweep.time_log_slope) + ", rmse10 " + fmt(rmse10) + ", rmse100 " +
           fmt(rmse100) + " (ratio " + fmt(rmse100 / rmse10) + ")");
}

void c10_discrepancy(Criterion& c) {
    const int n = 64;
    const double d_sobol = yy::star_discrepancy_exact_2d(yy::sobol_unit(n, 2));
    const double d_halton = yy::star_discrepancy_exact_2d(yy::halton_unit(n, 2, 0));
    int sobol_wins = 0, halton_wins = 0;
    for (int s = 0; s < 20; ++s) {
        const double d_rand = yy::star_discrepancy_exact_2d(yy::random_unit(n, 2, 500 + s));
        if (d_sobol < d_rand) ++sobol_wins;
        if (d_halton < d_rand) ++halton_wins;
    }
    c.require(sobol_wins >= 18, "sobol wins " + std::to_string(sobol_wins) + "/20 < 18");
    c.require(halton_wins >= 18, "halton wins " + std::to_string(halton_wins) + "/20 < 18");
    c.note("D* sobol " + fmt(d_sobol) + ", halton " + fmt(d_halton) + "; wins " +
           std::to_string(sobol_wins) + "/" + std::to_string(halton_wins) + " of 20");
}

void c11_invariants(Criterion& c) {
    int cases = 0;

    // normalization + convex-hull containment along real runs
    const yy::DynamicsModel model = yy::make_scaled_cubic_1d();
    for (int run = 0; run < 10 && c.ok; ++run) {
        yy::FilterConfig cfg;
        yy::Rng rng(9000 + run);
        cfg.n = 50 + static_cast<int>(rng.next_u64() % 100);
        cfg.R = 3.0 + 2.0 * rng.next_double();
        cfg.dt = 0.01;
        cfg.kernel = yy::KernelSpec::make(1, cfg.dt);
        cfg.restart_interval = 1 + static_cast<int>(rng.next_u64() % 20);
        const auto [truth, obs] =
            yy::simulate(model, yy::Vec::Constant(1, 0.5), 0.5, 50, 9100 + run);
        yy::FilterState st = yy::init_filter(model, cfg, yy::Vec::Constant(1, 0.5));
        for (int k = 1; k <= 50; ++k) {
            yy::filter_step(st, model, cfg, obs.increments.row(k - 1).transpose());
            const yy::Vec w = yy::normalized_weights(st);
            c.require(std::abs(w.sum() - 1.0) <= 1e-12, "weight sum off at step");
            const double lo = st.points.points.col(0).minCoeff();
            const double hi = st.points.points.col(0).maxCoeff();
            c.require(st.estimate[0] >= lo - 1e-12 && st.estimate[0] <= hi + 1e-12,
                      "estimate outside hull");
            ++cases;
            if (cfg.restart_interval > 1 && k % cfg.restart_interval == 0 && k < 50)
                yy::filter_restart(st, model, cfg);
        }
    }

    // rmse >= me on random data
    yy::Rng rng(4321);
    for (int t = 0; t < 450 && c.ok; ++t) {
        const int K = 2 + static_cast<int>(rng.next_u64() % 30);
        const int r = 1 + static_cast<int>(rng.next_u64() % 5);
        yy::Mat a(K, r), b(K, r);
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < r; ++j) {
                a(i, j) = rng.next_normal();
                b(i, j) = rng.next_normal();
            }
        c.require(yy::rmse(a, b) >= yy::mean_error(a, b) - 1e-14, "rmse < me");
        ++cases;
    }

    // bitwise determinism across thread counts
    const yy::DynamicsModel dw = yy::make_double_well();
    for (int t = 0; t < 50 && c.ok; ++t) {
        yy::FilterConfig cfg;
        cfg.n = 40 + t;
        cfg.R = 6.0;
        cfg.dt = 0.01;
        cfg.kernel = yy::KernelSpec::make(t % 2 ? 2 : 1, cfg.dt);
        cfg.restart_interval = t % 2 ? 4 : 1;
        const auto [truth, obs] = yy::simulate(dw, yy::Vec::Zero(1), 0.2, 20, 7000 + t);
        yy::set_thread_count(1);
        const yy::RunResult a = yy::run_filter(dw, obs, truth, cfg);
        yy::set_thread_count(8);
        const yy::RunResult b = yy::run_filter(dw, obs, truth, cfg);
        yy::set_thread_count(0);
        c.require((a.estimates - b.estimates).cwiseAbs().maxCoeff() == 0.0,
                  "thread count changed the estimates");
        c.require(a.rmse == b.rmse, "thread count changed the rmse");
        ++cases;
    }

    c.note(std::to_string(cases) + " randomized cases");
    c.require(cases >= 1000, "fewer than 1000 cases");
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    run_criterion("C1 coefficient-system", 5.0, c1_coefficients);
    run_criterion("C2 consistency-orders", 10.0, c2_consistency_orders);
    run_criterion("C3 kernel-normalization", 1.0, c3_kernel_normalization);
    run_criterion("C4 ito-correction", 2.0, c4_ito_correction);
    run_criterion("C5 complex-step-divergence", 1.0, c5_complex_step);
    run_criterion("C6 small-cubic-sensor", 60.0, c6_small_cubic);
    run_criterion("C7 double-well", 60.0, c7_double_well);
    run_criterion("C8 linear-benchmark", 30.0, c8_linear);
    run_criterion("C9 dimension-scaling", 600.0, c9_scaling);
    run_criterion("C10 discrepancy-ordering", 5.0, c10_discrepancy);
    run_criterion("C11 invariant-suites", 60.0, c11_invariants);
    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
