#include "yy/models.hpp"

#include "yy/rng.hpp"

#include <cmath>

namespace yy {

namespace {

template <typename Scalar>
using VecT = Eigen::Vector<Scalar, Eigen::Dynamic>;

// sin(x) .* (bidiag(d,s) x) + sin(2x) .* (bidiag(d1,s1) x)
template <typename Scalar>
VecT<Scalar> cubic_sensor_drift(const VecT<Scalar>& x) {
    const auto r = x.size();
    VecT<Scalar> ax = -0.5 * x;
    VecT<Scalar> a1x = -0.3 * x;
    if (r > 1) {
        ax.head(r - 1) += 0.1 * x.tail(r - 1);
        a1x.head(r - 1) += 0.3 * x.tail(r - 1);
    }
    VecT<Scalar> out(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        using std::sin;
        out[i] = sin(x[i]) * ax[i] + sin(Scalar(2) * x[i]) * a1x[i];
    }
    return out;
}

template <typename Scalar>
VecT<Scalar> cubic_sensor_obs(const VecT<Scalar>& x) {
    VecT<Scalar> out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const Scalar d = x[i] - Scalar(100);
        out[i] = d * d * d;
    }
    return out;
}

}  // namespace

Mat bidiagonal_matrix(int r, double diag, double super) {
    Mat a = Mat::Zero(r, r);
    a.diagonal().setConstant(diag);
    if (r > 1) a.diagonal(1).setConstant(super);
    return a;
}

DynamicsModel make_cubic_sensor(int r) {
    if (r < 1) throw std::invalid_argument("make_cubic_sensor: r >= 1 required");
    DynamicsModel model;
    model.r = r;
    model.m = r;
    model.drift = [](const Vec& x) { return cubic_sensor_drift<double>(x); };
    model.drift_complex = [](const CVec& x) {
        return cubic_sensor_drift<std::complex<double>>(x);
    };
    model.obs = [](const Vec& x) { return cubic_sensor_obs<double>(x); };
    model.obs_complex = [](const CVec& x) { return cubic_sensor_obs<std::complex<double>>(x); };
    model.analytic_div = [r](const Vec& x) {
        // d/dx_i [sin(x_i)(Ax)_i + sin(2x_i)(A1 x)_i]
        //   = cos(x_i)(Ax)_i + sin(x_i)A_ii + 2cos(2x_i)(A1 x)_i + sin(2x_i)A1_ii
        Vec ax = -0.5 * x;
        Vec a1x = -0.3 * x;
        if (r > 1) {
            ax.head(r - 1) += 0.1 * x.tail(r - 1);
            a1x.head(r - 1) += 0.3 * x.tail(r - 1);
        }
        double div = 0.0;
        for (int i = 0; i < r; ++i)
            div += std::cos(x[i]) * ax[i] + std::sin(x[i]) * (-0.5) +
                   2.0 * std::cos(2.0 * x[i]) * a1x[i] + std::sin(2.0 * x[i]) * (-0.3);
        return div;
    };
    return model;
}

DynamicsModel make_scaled_cubic_1d() {
    DynamicsModel model;
    model.r = 1;
    model.m = 1;
    model.drift = [](const Vec& x) { return Vec(-x); };
    model.drift_complex = [](const CVec& x) { return CVec(-x); };
    model.obs = [](const Vec& x) { return Vec(1000.0 * x.array().cube()); };
    model.obs_complex = [](const CVec& x) {
        CVec out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = 1000.0 * x[i] * x[i] * x[i];
        return out;
    };
    model.analytic_div = [](const Vec&) { return -1.0; };
    return model;
}

DynamicsModel make_double_well() {
    DynamicsModel model;
    model.r = 1;
    model.m = 1;
    model.drift = [](const Vec& x) { return Vec(-4.0 * x.array() * (x.array().square() - 1.0)); };
    model.drift_complex = [](const CVec& x) {
        CVec out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = -4.0 * x[i] * (x[i] * x[i] - 1.0);
        return out;
    };
    model.obs = [](const Vec& x) { return Vec(x.array().square()); };
    model.obs_complex = [](const CVec& x) {
        CVec out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = x[i] * x[i];
        return out;
    };
    model.analytic_div = [](const Vec& x) { return -12.0 * x[0] * x[0] + 4.0; };
    model.state_noise.constant = Mat::Constant(1, 1, 0.5);
    model.obs_noise.constant = Mat::Constant(1, 1, 0.2);
    return model;
}

DynamicsModel make_linear(int r) {
    if (r < 1) throw std::invalid_argument("make_linear: r >= 1 required");
    DynamicsModel model;
    model.r = r;
    model.m = r;
    const Mat a = bidiagonal_matrix(r, -0.5, 0.1);
    model.drift = [r](const Vec& x) {
        Vec out = -0.5 * x;
        if (r > 1) out.head(r - 1) += 0.1 * x.tail(r - 1);
        return out;
    };
    model.drift_complex = [r](const CVec& x) {
        CVec out = -0.5 * x;
        if (r > 1) out.head(r - 1) += 0.1 * x.tail(r - 1);
        return out;
    };
    model.obs = [](const Vec& x) { return Vec(5.0 * x); };
    model.obs_complex = [](const CVec& x) { return CVec(5.0 * x); };
    model.analytic_div = [r](const Vec&) { return -0.5 * r; };
    model.drift_matrix = a;
    model.obs_matrix = Mat(5.0 * Mat::Identity(r, r));
    return model;
}

std::pair<Trajectory, ObservationPath> simulate(const DynamicsModel& model, const Vec& x0,
                                                double T, int K, std::uint64_t rng_seed,
                                                ObsEval obs_eval) {
    if (K < 1) throw std::invalid_argument("simulate: K >= 1 required");
    if (!(T > 0.0)) throw std::invalid_argument("simulate: T > 0 required");
    if (x0.size() != model.r) throw std::invalid_argument("simulate: x0 dimension mismatch");
    const double dt = T / K;
    const double sqrt_dt = std::sqrt(dt);
    const int r = model.r;
    const int m = model.m;

    Trajectory traj;
    traj.states.resize(K + 1, r);
    traj.states.row(0) = x0.transpose();
    traj.dt = dt;
    ObservationPath path;
    path.increments.resize(K, m);
    path.cumulative = Mat::Zero(K + 1, m);

    Rng state_rng(rng_seed, 0, 1);
    Rng obs_rng(rng_seed, 0, 2);
    const bool unit_u = model.state_noise.is_identity();
    const bool unit_v = model.obs_noise.is_identity();
    Mat u_const, v_const;
    if (model.state_noise.is_constant()) u_const = *model.state_noise.constant;
    if (model.obs_noise.is_constant()) v_const = *model.obs_noise.constant;

    Vec x = x0, xi(r), eta(m);
    for (int k = 0; k < K; ++k) {
        const Vec fx = model.drift(x);
        if (!fx.allFinite())
            throw std::runtime_error("simulate: drift diverged at step " + std::to_string(k));
        for (int i = 0; i < r; ++i) xi[i] = state_rng.next_normal();
        Vec x_next = x + fx * dt;
        if (unit_u)
            x_next += sqrt_dt * xi;
        else if (model.state_noise.is_constant())
            x_next += sqrt_dt * (u_const * xi);
        else
            x_next += sqrt_dt * (model.state_noise.state_dependent(x) * xi);

        const Vec& x_eval = obs_eval == ObsEval::Post ? x_next : x;
        const Vec hx = model.obs(x_eval);
        if (!x_next.allFinite() || !hx.allFinite())
            throw std::runtime_error("simulate: observation diverged at step " +
                                     std::to_string(k));
        for (int i = 0; i < m; ++i) eta[i] = obs_rng.next_normal();
        Vec dy = hx * dt;
        if (unit_v)
            dy += sqrt_dt * eta;
        else if (model.obs_noise.is_constant())
            dy += sqrt_dt * (v_const * eta);
        else
            dy += sqrt_dt * (model.obs_noise.state_dependent(x_eval) * eta);

        traj.states.row(k + 1) = x_next.transpose();
        path.increments.row(k) = dy.transpose();
        path.cumulative.row(k + 1) = path.cumulative.row(k) + dy.transpose();
        x = x_next;
    }
    return {std::move(traj), std::move(path)};
}

DivergenceEstimate divergence_complex_step(const DynamicsModel& model, const Vec& x,
                                           double h_step) {
    if (!(h_step > 0.0))
        throw std::invalid_argument("divergence_complex_step: h_step must be positive");
    if (!model.drift_complex)
        return {divergence_central_diff(model, x), true};
    const int r = model.r;
    CVec xc = x.cast<std::complex<double>>();
    double div = 0.0;
    for (int k = 0; k < r; ++k) {
        xc[k] = std::complex<double>(x[k], h_step);
        const CVec fx = model.drift_complex(xc);
        div += fx[k].imag() / h_step;
        xc[k] = std::complex<double>(x[k], 0.0);
    }
    return {div, false};
}

double divergence_central_diff(const DynamicsModel& model, const Vec& x, double h_step) {
    if (!(h_step > 0.0))
        throw std::invalid_argument("divergence_central_diff: h_step must be positive");
    Vec xp = x, xm = x;
    double div = 0.0;
    for (int k = 0; k < model.r; ++k) {
        xp[k] = x[k] + h_step;
        xm[k] = x[k] - h_step;
        div += (model.drift(xp)[k] - model.drift(xm)[k]) / (2.0 * h_step);
        xp[k] = x[k];
        xm[k] = x[k];
    }
    return div;
}

}  // namespace yy
