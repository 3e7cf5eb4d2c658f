#pragma once

#include "yy/types.hpp"

#include <complex>
#include <functional>
#include <optional>

namespace yy {

// State- or constant-coefficient noise matrix; both fields empty = identity.
struct NoiseCoefficient {
    std::optional<Mat> constant;
    std::function<Mat(const Vec&)> state_dependent;

    bool is_identity() const { return !constant.has_value() && !state_dependent; }
    bool is_constant() const { return constant.has_value(); }
    Mat eval(const Vec& x, int dim) const {
        if (constant) return *constant;
        if (state_dependent) return state_dependent(x);
        return Mat::Identity(dim, dim);
    }
};

// Continuous-time filtering model
//   dX = f(X) dt + U(X) dV,   dY = h(X) dt + V(X) dW.
// The drift (and observation) carry a complex-evaluable twin so that
// derivatives can be taken by the complex-step rule without subtractive
// cancellation; factories populate both from one templated definition.
struct DynamicsModel {
    int r = 0;
    int m = 0;
    std::function<Vec(const Vec&)> drift;
    std::function<CVec(const CVec&)> drift_complex;
    std::function<Vec(const Vec&)> obs;
    std::function<CVec(const CVec&)> obs_complex;
    std::function<double(const Vec&)> analytic_div;
    NoiseCoefficient state_noise;  // U(x), r x r
    NoiseCoefficient obs_noise;    // V(x), m x m

    // Set when the model is exactly linear (f = Ax, h = Hx); consumed by the
    // Kalman-Bucy baseline.
    std::optional<Mat> drift_matrix;
    std::optional<Mat> obs_matrix;
};

struct Trajectory {
    Mat states;  // (K+1) x r, row 0 = x0
    double dt = 0.0;
    double t0 = 0.0;

    int steps() const { return static_cast<int>(states.rows()) - 1; }
    int r() const { return static_cast<int>(states.cols()); }
};

struct ObservationPath {
    Mat increments;  // K x m
    Mat cumulative;  // (K+1) x m, row 0 = 0

    int steps() const { return static_cast<int>(increments.rows()); }
    int m() const { return static_cast<int>(increments.cols()); }
};

// Where h is evaluated when synthesizing an observation increment for the
// step [tau_k, tau_{k+1}]: at the new state (Post, default) or the old (Pre).
enum class ObsEval { Pre, Post };

// Upper-bidiagonal matrix with constant diagonal/superdiagonal, the building
// block of the benchmark systems.
Mat bidiagonal_matrix(int r, double diag, double super);

// f(x) = sin(x) .* (Ax) + sin(2x) .* (A1 x),  h(x) = (x - 100)^3 elementwise,
// A = bidiag(-0.5, 0.1), A1 = bidiag(-0.3, 0.3), m = r, unit noises.
DynamicsModel make_cubic_sensor(int r);

// r = m = 1, f(x) = -x, h(x) = 1000 x^3, unit noises.
DynamicsModel make_scaled_cubic_1d();

// r = m = 1, f(x) = -4x(x^2 - 1), h(x) = x^2, U = 0.5, V = 0.2.
DynamicsModel make_double_well();

// f(x) = Ax with A = bidiag(-0.5, 0.1), h(x) = 5x, m = r, unit noises.
DynamicsModel make_linear(int r);

// Euler-Maruyama simulation of state and observation increments.
// Deterministic given the seed; state and observation noises draw from
// disjoint substreams of the counter-based generator.
std::pair<Trajectory, ObservationPath> simulate(const DynamicsModel& model, const Vec& x0,
                                                double T, int K, std::uint64_t rng_seed,
                                                ObsEval obs_eval = ObsEval::Post);

struct DivergenceEstimate {
    double value = 0.0;
    // true when the drift had no complex path and a central difference was
    // used instead
    bool central_diff_fallback = false;
};

// div f(x) = sum_k Im[f_k(x + i h e_k)] / h; r drift evaluations, O(h^2)
// accurate with no subtractive cancellation, so h may be taken near 1e-20.
DivergenceEstimate divergence_complex_step(const DynamicsModel& model, const Vec& x,
                                           double h_step = 1e-20);

// Central-difference divergence; 2r drift evaluations. Serves as the oracle
// and as the fallback when the drift is not complex-evaluable.
double divergence_central_diff(const DynamicsModel& model, const Vec& x, double h_step = 1e-6);

}  // namespace yy
