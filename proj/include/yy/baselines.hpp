#pragma once

#include "yy/filter.hpp"
#include "yy/models.hpp"

namespace yy {

// Reference filters driven by the same observation increments as the
// Yau-Yau run. All three Gaussian filters share one Euler-discretized
// continuous-time recursion (gain P H^T b^{-1}), so on a linear model the
// EKF, UKF, and Kalman-Bucy estimate sequences coincide to round-off.

struct GaussianBelief {
    Vec mean;
    Mat covariance;
};

struct ParticleEnsemble {
    Mat particles;  // n_p x r
    Vec logw;
};

RunResult ekf_run(const DynamicsModel& model, const ObservationPath& obs,
                  const Trajectory& truth, const FilterConfig& cfg);

// Scaled unscented transform, alpha = 1e-3, beta = 2, kappa = 0. A Cholesky
// failure gets one jittered retry (1e-9 I) before the run is flagged
// diverged.
RunResult ukf_run(const DynamicsModel& model, const ObservationPath& obs,
                  const Trajectory& truth, const FilterConfig& cfg);

// Bootstrap particle filter: Euler-Maruyama propagation, the same
// increment likelihood as the Yau-Yau update, systematic resampling when
// ESS < n_p / 2.
RunResult pf_run(const DynamicsModel& model, const ObservationPath& obs,
                 const Trajectory& truth, const FilterConfig& cfg, int n_particles);

// Euler-discretized Kalman-Bucy; requires the model's linear structure
// (drift_matrix, obs_matrix) and throws invalid_argument otherwise.
RunResult kalman_bucy_run(const DynamicsModel& model, const ObservationPath& obs,
                          const Trajectory& truth, const FilterConfig& cfg);

// Drift/observation Jacobians by the complex-step rule (central difference
// when no complex path exists); used by the EKF and exposed for tests.
Mat drift_jacobian(const DynamicsModel& model, const Vec& x, double h_step = 1e-20);
Mat obs_jacobian(const DynamicsModel& model, const Vec& x, double h_step = 1e-20);

}  // namespace yy
