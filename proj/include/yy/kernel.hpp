#pragma once

#include "yy/models.hpp"
#include "yy/types.hpp"

#include <string>
#include <vector>

namespace yy {

using SignVec = Eigen::Matrix<signed char, Eigen::Dynamic, 1>;
// Row-major so that the per-output-row scans in apply_operator are contiguous.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SignMat = Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Multi-time-scale kernel specification. The order-N operator combines base
// kernels at time steps dt/s_1..dt/s_N with an identity term, the N+1
// coefficients solving a generalized Vandermonde system that matches the
// constant and dt terms and cancels the N-1 leading fractional error orders.
struct KernelSpec {
    int order = 1;
    std::vector<double> scales;     // s_1..s_N, distinct positive; default 1, 2, 4, ...
    std::vector<double> exponents;  // mu_1..mu_{N-1}, increasing, > 1; default 3/2, 2, 5/2, ...
    double dt = 0.01;

    static KernelSpec make(int order, double dt);
    void validate() const;
};

// Solves V c = d for the N+1 combination coefficients:
//   sum_{j<=N+1} c_j = 1,  sum_{j<=N} c_j / s_j = 1,
//   sum_{j<=N} c_j s_j^{-mu_k} = 0  (k = 1..N-1).
// A dense partial-pivoting solve; the system is nonsingular for distinct
// scales, and the residual is asserted by tests rather than trusted.
Vec highorder_coeffs(const KernelSpec& spec);

// log K_dt(x, y) for one evaluation point x and sample point y. div_fx is
// the drift divergence at x, supplied by the caller. The identity-noise path
// is
//   log c_dt - |x-y|^2/(2 dt) - (y-x).f(x) - dt (div f(x) + |f(x)|^2 / 2),
//   c_dt = (2 pi dt)^{-r/2};
// with a state-noise coefficient a(x) = U U^T the norms and the linear term
// pick up a^{-1} (or the pseudoinverse on singular a) and c_dt gains
// 1/sqrt(det+ a).
double base_kernel_log(const DynamicsModel& model, const Vec& x, const Vec& y, double dt,
                       double div_fx);

struct SpdPseudoInverse {
    Mat pinv;
    double det_plus = 1.0;  // product of retained (positive) eigenvalues
    int rank = 0;
};

// Symmetric eigendecomposition with eigenvalues <= tol treated as zero.
// tol < 0 selects the default 1e-12 * max eigenvalue.
SpdPseudoInverse pseudoinverse_spd(const Mat& a, double tol = -1.0);

enum class DivergenceSource { Analytic, ComplexStep, CentralDiff };

// Discrete solution-mapping operator on a point set. Entries are held in the
// log domain (log magnitude + sign) because the magnitudes overflow doubles
// in high dimension; value() reconstitutes an entry for small-scale checks.
// Rows flagged by boundary_mask are identically zero (Dirichlet condition).
struct TransitionOperator {
    RowMat log_abs;  // n x n; entry (i,j) pairs evaluation point x_i with sample x_j
    SignMat signs;   // empty when all entries are nonnegative (plain order-1 kernel)
    double identity_coeff = 0.0;   // c_{N+1}, applied as identity * u, not a matrix bump
    double log_quad_weight = 0.0;  // log(vol(domain)/n)
    std::vector<bool> boundary_mask;
    int order = 1;
    int n = 0;
    int r = 0;
    double dt = 0.0;
    std::uint64_t point_set_hash = 0;
    DivergenceSource divergence_source = DivergenceSource::Analytic;

    double quad_weight() const { return std::exp(log_quad_weight); }
    double value(int i, int j) const {
        const double v = std::exp(log_abs(i, j));
        return signs.size() ? static_cast<double>(signs(i, j)) * v : v;
    }
};

// Assembles sum_a c_a K_{dt/s_a}(x_i, x_j) row-parallel; the divergence is
// evaluated once per row (analytic if available, else complex step, else
// central difference). Samples within boundary_tol of the domain boundary
// (sup norm) get their row zeroed and the mask set.
TransitionOperator assemble_operator(const DynamicsModel& model, const PointSet& ps,
                                     const KernelSpec& spec, double boundary_tol = 1e-12);

struct LogWeights {
    Vec logw;       // log |w|; -inf encodes an exact zero
    SignVec signs;  // -1 / 0 / +1

    static LogWeights positive(Vec lw) {
        LogWeights w;
        w.signs = SignVec::Constant(lw.size(), 1);
        w.logw = std::move(lw);
        return w;
    }
};

// One prediction step: out = log| w_quad * M v + c_{N+1} v | with signs,
// where v = sign .* exp(logw). Each output entry is a max-shifted
// sum over its row plus the identity term, reduced sequentially so the
// result is independent of the thread count. Boundary rows yield -inf.
// Throws on all-(-inf) input.
LogWeights apply_operator(const TransitionOperator& op, const LogWeights& w);

// max_j a_j + log sum_j exp(a_j - max); -inf on an empty or all--inf input.
double log_sum_exp(const Vec& a);

// Binary operator cache (header + row-major little-endian payload).
std::uint64_t point_set_hash(const PointSet& ps);
void save_operator(const TransitionOperator& op, const std::string& path);
bool load_operator(const std::string& path, TransitionOperator& op);

}  // namespace yy
