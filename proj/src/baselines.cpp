#include "yy/baselines.hpp"

#include "yy/bench.hpp"
#include "yy/rng.hpp"

#include <chrono>
#include <cmath>

namespace yy {

namespace {

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Mat noise_cov(const NoiseCoefficient& coeff, const Vec& x, int dim) {
    if (coeff.is_identity()) return Mat::Identity(dim, dim);
    const Mat c = coeff.eval(x, dim);
    return c * c.transpose();
}

Mat inv_or_pinv(const Mat& a) { return pseudoinverse_spd(a).pinv; }

struct RunAccumulator {
    RunResult result;
    Clock::time_point t_start = Clock::now();

    explicit RunAccumulator(const std::string& method, int K, int r) {
        result.method = method;
        result.estimates.resize(K, r);
    }

    RunResult finish(const Trajectory& truth) {
        const int K = static_cast<int>(result.estimates.rows());
        result.time_online_s = seconds_since(t_start);
        result.time_total_s = result.time_online_s;
        result.rmse = rmse(result.estimates, truth.states.bottomRows(K));
        result.me = mean_error(result.estimates, truth.states.bottomRows(K));
        return result;
    }
};

}  // namespace

Mat drift_jacobian(const DynamicsModel& model, const Vec& x, double h_step) {
    const int r = model.r;
    Mat J(r, r);
    if (model.drift_complex) {
        CVec xc = x.cast<std::complex<double>>();
        for (int k = 0; k < r; ++k) {
            xc[k] = std::complex<double>(x[k], h_step);
            J.col(k) = model.drift_complex(xc).imag() / h_step;
            xc[k] = std::complex<double>(x[k], 0.0);
        }
        return J;
    }
    const double h = 1e-6;
    Vec xp = x, xm = x;
    for (int k = 0; k < r; ++k) {
        xp[k] = x[k] + h;
        xm[k] = x[k] - h;
        J.col(k) = (model.drift(xp) - model.drift(xm)) / (2.0 * h);
        xp[k] = x[k];
        xm[k] = x[k];
    }
    return J;
}

Mat obs_jacobian(const DynamicsModel& model, const Vec& x, double h_step) {
    const int r = model.r, m = model.m;
    Mat J(m, r);
    if (model.obs_complex) {
        CVec xc = x.cast<std::complex<double>>();
        for (int k = 0; k < r; ++k) {
            xc[k] = std::complex<double>(x[k], h_step);
            J.col(k) = model.obs_complex(xc).imag() / h_step;
            xc[k] = std::complex<double>(x[k], 0.0);
        }
        return J;
    }
    const double h = 1e-6;
    Vec xp = x, xm = x;
    for (int k = 0; k < r; ++k) {
        xp[k] = x[k] + h;
        xm[k] = x[k] - h;
        J.col(k) = (model.obs(xp) - model.obs(xm)) / (2.0 * h);
        xp[k] = x[k];
        xm[k] = x[k];
    }
    return J;
}

RunResult ekf_run(const DynamicsModel& model, const ObservationPath& obs,
                  const Trajectory& truth, const FilterConfig& cfg) {
    const int K = obs.steps();
    const int r = model.r;
    const double dt = cfg.dt;
    RunAccumulator acc("ekf", K, r);

    Vec x = cfg.x0_guess ? *cfg.x0_guess : Vec(truth.states.row(0).transpose());
    Mat P = cfg.init_std * cfg.init_std * Mat::Identity(r, r);

    for (int k = 0; k < K; ++k) {
        if (!acc.result.diverged) {
            const Vec dy = obs.increments.row(k).transpose();
            const Mat F = drift_jacobian(model, x);
            const Mat H = obs_jacobian(model, x);
            const Mat Q = noise_cov(model.state_noise, x, r);
            const Mat Binv = inv_or_pinv(noise_cov(model.obs_noise, x, model.m));
            const Mat gain = P * H.transpose() * Binv;
            const Vec x_new = x + model.drift(x) * dt + gain * (dy - model.obs(x) * dt);
            const Mat P_new =
                P + (F * P + P * F.transpose() + Q - gain * H * P) * dt;
            if (!x_new.allFinite() || !P_new.allFinite()) {
                acc.result.diverged = true;
            } else {
                x = x_new;
                P = 0.5 * (P_new + P_new.transpose());
            }
        }
        acc.result.estimates.row(k) = x.transpose();
    }
    return acc.finish(truth);
}

RunResult ukf_run(const DynamicsModel& model, const ObservationPath& obs,
                  const Trajectory& truth, const FilterConfig& cfg) {
    const int K = obs.steps();
    const int r = model.r;
    const int m = model.m;
    const double dt = cfg.dt;
    RunAccumulator acc("ukf", K, r);

    // scaled unscented transform
    const double alpha = 1e-3, beta_u = 2.0, kappa = 0.0;
    const double lambda = alpha * alpha * (r + kappa) - r;
    const int n_sigma = 2 * r + 1;
    Vec wm = Vec::Constant(n_sigma, 1.0 / (2.0 * (r + lambda)));
    Vec wc = wm;
    wm[0] = lambda / (r + lambda);
    wc[0] = wm[0] + 1.0 - alpha * alpha + beta_u;

    Vec x = cfg.x0_guess ? *cfg.x0_guess : Vec(truth.states.row(0).transpose());
    Mat P = cfg.init_std * cfg.init_std * Mat::Identity(r, r);

    Mat chi(r, n_sigma), f_chi(r, n_sigma), h_chi(m, n_sigma);
    for (int k = 0; k < K; ++k) {
        if (!acc.result.diverged) {
            const Vec dy = obs.increments.row(k).transpose();
            Eigen::LLT<Mat> llt((r + lambda) * P);
            if (llt.info() != Eigen::Success) {
                llt.compute((r + lambda) * (P + 1e-9 * Mat::Identity(r, r)));
                if (llt.info() != Eigen::Success) {
                    acc.result.diverged = true;
                    acc.result.estimates.row(k) = x.transpose();
                    continue;
                }
            }
            const Mat S = llt.matrixL();
            chi.col(0) = x;
            for (int j = 0; j < r; ++j) {
                chi.col(1 + j) = x + S.col(j);
                chi.col(1 + r + j) = x - S.col(j);
            }
            for (int j = 0; j < n_sigma; ++j) {
                f_chi.col(j) = model.drift(chi.col(j));
                h_chi.col(j) = model.obs(chi.col(j));
            }
            const Vec f_bar = f_chi * wm;
            const Vec h_bar = h_chi * wm;
            Mat P_xf = Mat::Zero(r, r), P_xh = Mat::Zero(r, m);
            for (int j = 0; j < n_sigma; ++j) {
                const Vec dx = chi.col(j) - x;
                P_xf += wc[j] * dx * (f_chi.col(j) - f_bar).transpose();
                P_xh += wc[j] * dx * (h_chi.col(j) - h_bar).transpose();
            }
            const Mat Q = noise_cov(model.state_noise, x, r);
            const Mat Binv = inv_or_pinv(noise_cov(model.obs_noise, x, m));
            const Mat gain = P_xh * Binv;
            const Vec x_new = x + f_bar * dt + gain * (dy - h_bar * dt);
            const Mat P_new =
                P + (P_xf + P_xf.transpose() + Q - gain * P_xh.transpose()) * dt;
            if (!x_new.allFinite() || !P_new.allFinite()) {
                acc.result.diverged = true;
            } else {
                x = x_new;
                P = 0.5 * (P_new + P_new.transpose());
            }
        }
        acc.result.estimates.row(k) = x.transpose();
    }
    return acc.finish(truth);
}

RunResult pf_run(const DynamicsModel& model, const ObservationPath& obs,
                 const Trajectory& truth, const FilterConfig& cfg, int n_particles) {
    if (n_particles < 2) throw std::invalid_argument("pf_run: n_particles >= 2 required");
    const int K = obs.steps();
    const int r = model.r;
    const int m = model.m;
    const double dt = cfg.dt;
    const double sqrt_dt = std::sqrt(dt);
    RunAccumulator acc("pf", K, r);
    acc.result.diagnostics.degenerate_events = 0;

    Rng rng(cfg.seed, 0, 3);
    const Vec x0 = cfg.x0_guess ? *cfg.x0_guess : Vec(truth.states.row(0).transpose());

    ParticleEnsemble ens;
    ens.particles.resize(n_particles, r);
    for (int i = 0; i < n_particles; ++i)
        for (int d = 0; d < r; ++d)
            ens.particles(i, d) = x0[d] + cfg.init_std * rng.next_normal();
    ens.logw = Vec::Constant(n_particles, -std::log(static_cast<double>(n_particles)));

    const bool unit_u = model.state_noise.is_identity();
    const bool unit_v = model.obs_noise.is_identity();
    Mat u_const, binv_const;
    if (model.state_noise.is_constant()) u_const = *model.state_noise.constant;
    if (!unit_v && model.obs_noise.is_constant())
        binv_const = inv_or_pinv(noise_cov(model.obs_noise, x0, m));

    Vec xi(r);
    Mat resampled(n_particles, r);
    for (int k = 0; k < K; ++k) {
        const Vec dy = obs.increments.row(k).transpose();
        for (int i = 0; i < n_particles; ++i) {
            Vec p = ens.particles.row(i).transpose();
            for (int d = 0; d < r; ++d) xi[d] = rng.next_normal();
            Vec p_new = p + model.drift(p) * dt;
            if (unit_u)
                p_new += sqrt_dt * xi;
            else if (model.state_noise.is_constant())
                p_new += sqrt_dt * (u_const * xi);
            else
                p_new += sqrt_dt * (model.state_noise.state_dependent(p) * xi);
            ens.particles.row(i) = p_new.transpose();

            const Vec hx = model.obs(p_new);
            double lin, quad;
            if (unit_v) {
                lin = hx.dot(dy);
                quad = hx.squaredNorm();
            } else {
                const Mat binv = model.obs_noise.is_constant()
                                     ? binv_const
                                     : inv_or_pinv(noise_cov(model.obs_noise, p_new, m));
                const Vec bh = binv * hx;
                lin = bh.dot(dy);
                quad = hx.dot(bh);
            }
            ens.logw[i] += lin - 0.5 * dt * quad;
        }

        const double norm = log_sum_exp(ens.logw);
        if (!std::isfinite(norm)) {
            ens.logw.setConstant(-std::log(static_cast<double>(n_particles)));
            ++acc.result.diagnostics.degenerate_events;
        } else {
            ens.logw.array() -= norm;
        }

        const Vec w = ens.logw.array().exp();
        acc.result.estimates.row(k) = (w.transpose() * ens.particles);

        const double ess = 1.0 / w.squaredNorm();
        if (ess < 0.5 * n_particles) {
            // systematic resampling
            const double u0 = rng.next_double() / n_particles;
            double cum = w[0];
            int j = 0;
            for (int i = 0; i < n_particles; ++i) {
                const double target = u0 + static_cast<double>(i) / n_particles;
                while (cum < target && j + 1 < n_particles) cum += w[++j];
                resampled.row(i) = ens.particles.row(j);
            }
            ens.particles = resampled;
            ens.logw.setConstant(-std::log(static_cast<double>(n_particles)));
        }
    }
    return acc.finish(truth);
}

RunResult kalman_bucy_run(const DynamicsModel& model, const ObservationPath& obs,
                          const Trajectory& truth, const FilterConfig& cfg) {
    if (!model.drift_matrix || !model.obs_matrix)
        throw std::invalid_argument("kalman_bucy_run: model is not linear (f = Ax, h = Hx)");
    const int K = obs.steps();
    const int r = model.r;
    const double dt = cfg.dt;
    RunAccumulator acc("kalman_bucy", K, r);

    const Mat& A = *model.drift_matrix;
    const Mat& H = *model.obs_matrix;
    const Mat Q = noise_cov(model.state_noise, Vec::Zero(r), r);
    const Mat Rinv = inv_or_pinv(noise_cov(model.obs_noise, Vec::Zero(r), model.m));

    Vec x = cfg.x0_guess ? *cfg.x0_guess : Vec(truth.states.row(0).transpose());
    Mat P = cfg.init_std * cfg.init_std * Mat::Identity(r, r);

    for (int k = 0; k < K; ++k) {
        const Vec dy = obs.increments.row(k).transpose();
        const Mat gain = P * H.transpose() * Rinv;
        const Vec x_new = x + A * x * dt + gain * (dy - H * x * dt);
        const Mat P_new = P + (A * P + P * A.transpose() + Q - gain * H * P) * dt;
        x = x_new;
        P = 0.5 * (P_new + P_new.transpose());
        acc.result.estimates.row(k) = x.transpose();
    }
    return acc.finish(truth);
}

}  // namespace yy
