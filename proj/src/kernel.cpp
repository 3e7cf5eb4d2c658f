#include "yy/kernel.hpp"

#include "yy/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace yy {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

KernelSpec KernelSpec::make(int order, double dt) {
    KernelSpec spec;
    spec.order = order;
    spec.dt = dt;
    spec.scales.resize(order);
    for (int j = 0; j < order; ++j) spec.scales[j] = std::pow(2.0, j);
    for (int k = 0; k + 1 < order; ++k) spec.exponents.push_back(1.5 + 0.5 * k);
    spec.validate();
    return spec;
}

void KernelSpec::validate() const {
    if (order < 1) throw std::invalid_argument("KernelSpec: order >= 1 required");
    if (static_cast<int>(scales.size()) != order)
        throw std::invalid_argument("KernelSpec: need exactly N scales");
    if (static_cast<int>(exponents.size()) != order - 1)
        throw std::invalid_argument("KernelSpec: need exactly N-1 exponents");
    if (!(dt > 0.0)) throw std::invalid_argument("KernelSpec: dt > 0 required");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0)) throw std::invalid_argument("KernelSpec: scales must be positive");
        for (std::size_t j = i + 1; j < scales.size(); ++j)
            if (scales[i] == scales[j])
                throw std::invalid_argument("KernelSpec: scales must be distinct");
    }
    for (std::size_t k = 0; k < exponents.size(); ++k) {
        if (!(exponents[k] > 1.0))
            throw std::invalid_argument("KernelSpec: exponents must exceed 1");
        if (k > 0 && !(exponents[k] > exponents[k - 1]))
            throw std::invalid_argument("KernelSpec: exponents must be strictly increasing");
    }
}

Vec highorder_coeffs(const KernelSpec& spec) {
    spec.validate();
    const int N = spec.order;
    if (N == 1) {
        // c1/s1 = 1 and c1 + c2 = 1, solved exactly
        Vec c(2);
        c[0] = spec.scales[0];
        c[1] = 1.0 - spec.scales[0];
        return c;
    }
    Mat V = Mat::Zero(N + 1, N + 1);
    Vec d = Vec::Zero(N + 1);
    V.row(0).setOnes();
    d[0] = 1.0;
    for (int j = 0; j < N; ++j) V(1, j) = 1.0 / spec.scales[j];
    d[1] = 1.0;
    for (int k = 0; k < N - 1; ++k)
        for (int j = 0; j < N; ++j) V(k + 2, j) = std::pow(spec.scales[j], -spec.exponents[k]);

    Eigen::PartialPivLU<Mat> lu(V);
    const Vec c = lu.solve(d);
    if (!c.allFinite() || (V * c - d).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("highorder_coeffs: singular coefficient system");
    return c;
}

namespace {

// Per-evaluation-point ingredients of the kernel exponent.
struct KernelPointData {
    Vec f;             // drift (identity noise) or a^{-1} f
    Vec f_raw;         // drift itself
    double div_f = 0;  // divergence of the drift
    double f_quad = 0; // |f|^2 in the a-weighted norm
    double log_det = 0;
    Mat a_inv;         // empty for identity noise
};

KernelPointData kernel_point_data(const DynamicsModel& model, const Vec& x, double div_fx) {
    KernelPointData d;
    d.f_raw = model.drift(x);
    if (!d.f_raw.allFinite())
        throw std::runtime_error("kernel: drift not finite at evaluation point");
    d.div_f = div_fx;
    if (model.state_noise.is_identity()) {
        d.f = d.f_raw;
        d.f_quad = d.f_raw.squaredNorm();
    } else {
        const Mat u = model.state_noise.eval(x, model.r);
        const Mat a = u * u.transpose();
        const SpdPseudoInverse pi = pseudoinverse_spd(a);
        d.a_inv = pi.pinv;
        d.f = pi.pinv * d.f_raw;
        d.f_quad = d.f_raw.dot(d.f);
        d.log_det = std::log(pi.det_plus);
    }
    return d;
}

double kernel_log_from_data(const KernelPointData& d, const Vec& x, const Vec& y, double dt,
                            int r) {
    const Vec diff = y - x;
    const double sq = d.a_inv.size() ? diff.dot(d.a_inv * diff) : diff.squaredNorm();
    const double log_c = -0.5 * r * std::log(2.0 * M_PI * dt) - 0.5 * d.log_det;
    return log_c - sq / (2.0 * dt) - diff.dot(d.f) - dt * (d.div_f + 0.5 * d.f_quad);
}

}  // namespace

double base_kernel_log(const DynamicsModel& model, const Vec& x, const Vec& y, double dt,
                       double div_fx) {
    if (!(dt > 0.0)) throw std::invalid_argument("base_kernel_log: dt > 0 required");
    const KernelPointData d = kernel_point_data(model, x, div_fx);
    return kernel_log_from_data(d, x, y, dt, model.r);
}

SpdPseudoInverse pseudoinverse_spd(const Mat& a, double tol) {
    if (a.rows() != a.cols()) throw std::invalid_argument("pseudoinverse_spd: square input required");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("pseudoinverse_spd: input not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> eig(a);
    const Vec& lam = eig.eigenvalues();
    const double cutoff = tol >= 0.0 ? tol : 1e-12 * std::max(lam.cwiseAbs().maxCoeff(), 0.0);
    SpdPseudoInverse out;
    Vec inv_lam = Vec::Zero(lam.size());
    out.det_plus = 1.0;
    for (int i = 0; i < lam.size(); ++i) {
        if (lam[i] > cutoff) {
            inv_lam[i] = 1.0 / lam[i];
            out.det_plus *= lam[i];
            ++out.rank;
        }
    }
    out.pinv = eig.eigenvectors() * inv_lam.asDiagonal() * eig.eigenvectors().transpose();
    return out;
}

namespace {

DivergenceSource pick_divergence_source(const DynamicsModel& model) {
    if (model.analytic_div) return DivergenceSource::Analytic;
    if (model.drift_complex) return DivergenceSource::ComplexStep;
    return DivergenceSource::CentralDiff;
}

double eval_divergence(const DynamicsModel& model, const Vec& x, DivergenceSource src) {
    switch (src) {
        case DivergenceSource::Analytic: return model.analytic_div(x);
        case DivergenceSource::ComplexStep: return divergence_complex_step(model, x).value;
        case DivergenceSource::CentralDiff: return divergence_central_diff(model, x);
    }
    return 0.0;
}

}  // namespace

TransitionOperator assemble_operator(const DynamicsModel& model, const PointSet& ps,
                                     const KernelSpec& spec, double boundary_tol) {
    spec.validate();
    if (ps.r() != model.r) throw std::invalid_argument("assemble_operator: dimension mismatch");
    if (boundary_tol < 0.0) throw std::invalid_argument("assemble_operator: boundary_tol >= 0");
    const int n = ps.n();
    const int r = ps.r();
    const int N = spec.order;
    const Vec c = highorder_coeffs(spec);

    TransitionOperator op;
    op.order = N;
    op.n = n;
    op.r = r;
    op.dt = spec.dt;
    op.identity_coeff = c[N];
    op.log_quad_weight = ps.domain.log_volume() - std::log(static_cast<double>(n));
    op.point_set_hash = point_set_hash(ps);
    op.boundary_mask.assign(n, false);
    op.divergence_source = pick_divergence_source(model);
    op.log_abs.resize(n, n);
    const bool needs_signs = N >= 2 || c[N] != 0.0 || c[0] < 0.0;
    if (needs_signs) op.signs.resize(n, n);

    const Mat& P = ps.points;
    for (int i = 0; i < n; ++i) {
        const double edge =
            (P.row(i).transpose() - ps.domain.center).cwiseAbs().maxCoeff();
        if (edge >= ps.domain.half_width - boundary_tol) op.boundary_mask[i] = true;
    }

    const bool identity_noise = model.state_noise.is_identity();

    // Pairwise pieces shared by every scale. With identity noise both the
    // squared distance and the drift cross term reduce to one GEMM each.
    Mat sq;      // (x_i - x_j)^T a_i^+ (x_i - x_j)
    Mat cross;   // (x_j - x_i) . a_i^+ f(x_i)
    Vec div(n), f_quad(n), log_det = Vec::Zero(n);

    std::vector<KernelPointData> rows;
    Mat F(n, r);  // a^{-1} f rows (or plain drift rows)
    rows.resize(identity_noise ? 0 : n);
    parallel_for(0, n, [&](std::int64_t i) {
        const Vec x = P.row(i).transpose();
        const double dv = eval_divergence(model, x, op.divergence_source);
        KernelPointData d = kernel_point_data(model, x, dv);
        F.row(i) = d.f.transpose();
        div[i] = d.div_f;
        f_quad[i] = d.f_quad;
        log_det[i] = d.log_det;
        if (!identity_noise) rows[i] = std::move(d);
    });

    if (identity_noise) {
        const Vec sq_norm = P.rowwise().squaredNorm();
        sq = (-2.0 * P * P.transpose());
        sq.colwise() += sq_norm;
        sq.rowwise() += sq_norm.transpose();
        sq = sq.cwiseMax(0.0);
    } else {
        sq.resize(n, n);
        parallel_for(0, n, [&](std::int64_t i) {
            const Mat diff = P.rowwise() - P.row(i);  // x_j - x_i rows
            sq.row(i) = ((diff * rows[i].a_inv).array() * diff.array()).rowwise().sum();
        });
    }
    cross = F * P.transpose();
    cross.colwise() -= (F.array() * P.array()).rowwise().sum().matrix();

    // log K_{dt/s}(x_i, x_j) = logc_i(s) - s * sq(i,j)/(2 dt) - cross(i,j)
    //                          - (dt/s)(div_i + f_quad_i / 2)
    const auto scale_log_kernel = [&](double s, RowMat& out) {
        const double dts = spec.dt / s;
        parallel_for(0, n, [&](std::int64_t i) {
            if (op.boundary_mask[i]) {
                out.row(i).setConstant(kNegInf);
                return;
            }
            const double row_const = -0.5 * r * std::log(2.0 * M_PI * dts) - 0.5 * log_det[i] -
                                     dts * (div[i] + 0.5 * f_quad[i]);
            out.row(i) = (sq.row(i) * (-1.0 / (2.0 * dts)) - cross.row(i)).array() + row_const;
        });
    };

    if (N == 1) {
        scale_log_kernel(spec.scales[0], op.log_abs);
        if (c[0] != 1.0) {
            const double lc = std::log(std::abs(c[0]));
            parallel_for(0, n, [&](std::int64_t i) {
                if (!op.boundary_mask[i]) op.log_abs.row(i).array() += lc;
            });
        }
        if (needs_signs) {
            const signed char s = c[0] >= 0.0 ? 1 : -1;
            for (int i = 0; i < n; ++i)
                op.signs.row(i).setConstant(op.boundary_mask[i] ? 0 : s);
        }
        return op;
    }

    // Signed combination sum_a c_a exp(L_a), evaluated entrywise with a
    // max shift so large-r magnitudes never leave the log domain.
    std::vector<RowMat> layers(N, RowMat(n, n));
    for (int a = 0; a < N; ++a) scale_log_kernel(spec.scales[a], layers[a]);
    parallel_for(0, n, [&](std::int64_t i) {
        if (op.boundary_mask[i]) {
            op.log_abs.row(i).setConstant(kNegInf);
            op.signs.row(i).setZero();
            return;
        }
        for (int j = 0; j < n; ++j) {
            double m = kNegInf;
            for (int a = 0; a < N; ++a) m = std::max(m, layers[a](i, j));
            if (m == kNegInf) {
                op.log_abs(i, j) = kNegInf;
                op.signs(i, j) = 0;
                continue;
            }
            double acc = 0.0;
            for (int a = 0; a < N; ++a) acc += c[a] * std::exp(layers[a](i, j) - m);
            if (acc == 0.0) {
                op.log_abs(i, j) = kNegInf;
                op.signs(i, j) = 0;
            } else {
                op.log_abs(i, j) = m + std::log(std::abs(acc));
                op.signs(i, j) = acc > 0.0 ? 1 : -1;
            }
        }
    });
    return op;
}

double log_sum_exp(const Vec& a) {
    if (a.size() == 0) return kNegInf;
    const double m = a.maxCoeff();
    if (!std::isfinite(m)) return m > 0 ? m : kNegInf;
    return m + std::log((a.array() - m).exp().sum());
}

LogWeights apply_operator(const TransitionOperator& op, const LogWeights& w) {
    const int n = op.n;
    if (w.logw.size() != n || w.signs.size() != n)
        throw std::invalid_argument("apply_operator: weight length mismatch");
    bool any_active = false;
    for (int j = 0; j < n; ++j)
        if (w.signs[j] != 0 && std::isfinite(w.logw[j])) { any_active = true; break; }
    if (!any_active) throw std::runtime_error("apply_operator: degenerate all-zero weights");

    LogWeights out;
    out.logw.resize(n);
    out.signs.resize(n);
    const double lw_quad = op.log_quad_weight;
    const bool signed_path = op.signs.size() != 0;
    const double id_coeff = op.identity_coeff;
    const double log_id = id_coeff != 0.0 ? std::log(std::abs(id_coeff)) : kNegInf;
    const int id_sign = id_coeff > 0.0 ? 1 : (id_coeff < 0.0 ? -1 : 0);

    Vec lw_masked = w.logw;
    for (int j = 0; j < n; ++j)
        if (w.signs[j] == 0) lw_masked[j] = kNegInf;
    const auto lw = lw_masked.array().transpose();

    parallel_for(0, n, [&](std::int64_t i) {
        if (op.boundary_mask[i]) {
            out.logw[i] = kNegInf;
            out.signs[i] = 0;
            return;
        }
        const auto row = op.log_abs.row(i).array();
        if (!signed_path) {
            // all-positive fast path: plain log-sum-exp over the row
            const double m = (row + lw).maxCoeff();
            if (m == kNegInf) {
                out.logw[i] = kNegInf;
                out.signs[i] = 0;
                return;
            }
            const double s = (row + lw - m).exp().sum();
            out.logw[i] = lw_quad + m + std::log(s);
            out.signs[i] = 1;
            return;
        }
        // signed path: matrix candidates carry the quadrature weight, the
        // identity candidate is c_{N+1} * v_i
        double m = (row + lw).maxCoeff() + lw_quad;
        const double id_cand = id_sign != 0 ? log_id + lw_masked[i] : kNegInf;
        m = std::max(m, id_cand);
        if (m == kNegInf) {
            out.logw[i] = kNegInf;
            out.signs[i] = 0;
            return;
        }
        const auto row_signs = op.signs.row(i).array().cast<double>();
        const auto w_signs = w.signs.array().cast<double>().transpose();
        double acc = (row_signs * w_signs * (row + lw + (lw_quad - m)).exp()).sum();
        if (id_sign != 0 && w.signs[i] != 0)
            acc += static_cast<double>(id_sign * w.signs[i]) * std::exp(id_cand - m);
        if (acc == 0.0) {
            out.logw[i] = kNegInf;
            out.signs[i] = 0;
        } else {
            out.logw[i] = m + std::log(std::abs(acc));
            out.signs[i] = acc > 0.0 ? 1 : -1;
        }
    });
    return out;
}

std::uint64_t point_set_hash(const PointSet& ps) {
    // FNV-1a over the raw point bytes plus the domain
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_bytes = [&h](const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::int64_t dims[2] = {ps.points.rows(), ps.points.cols()};
    mix_bytes(dims, sizeof(dims));
    mix_bytes(ps.points.data(), sizeof(double) * ps.points.size());
    mix_bytes(ps.domain.center.data(), sizeof(double) * ps.domain.center.size());
    mix_bytes(&ps.domain.half_width, sizeof(double));
    return h;
}

namespace {
constexpr char kCacheMagic[8] = {'Y', 'Y', 'O', 'P', 'C', 'A', 'H', '1'};
constexpr std::uint32_t kCacheVersion = 1;
}  // namespace

void save_operator(const TransitionOperator& op, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_operator: cannot open " + path);
    f.write(kCacheMagic, sizeof(kCacheMagic));
    auto put = [&f](const auto& v) { f.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
    put(kCacheVersion);
    const std::uint64_t n = op.n, r = op.r;
    const std::uint32_t order = op.order;
    put(n);
    put(r);
    put(order);
    put(op.dt);
    put(op.point_set_hash);
    put(op.identity_coeff);
    put(op.log_quad_weight);
    const std::uint32_t div_src = static_cast<std::uint32_t>(op.divergence_source);
    put(div_src);
    f.write(reinterpret_cast<const char*>(op.log_abs.data()),
            static_cast<std::streamsize>(sizeof(double)) * op.log_abs.size());
    std::vector<unsigned char> mask(op.boundary_mask.begin(), op.boundary_mask.end());
    f.write(reinterpret_cast<const char*>(mask.data()), static_cast<std::streamsize>(mask.size()));
    if (op.order >= 2)
        f.write(reinterpret_cast<const char*>(op.signs.data()),
                static_cast<std::streamsize>(op.signs.size()));
    if (!f) throw std::runtime_error("save_operator: write failed for " + path);
}

bool load_operator(const std::string& path, TransitionOperator& op) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return false;
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) return false;
    auto get = [&f](auto& v) { f.read(reinterpret_cast<char*>(&v), sizeof(v)); };
    std::uint32_t version = 0;
    get(version);
    if (version != kCacheVersion) return false;
    std::uint64_t n = 0, r = 0;
    std::uint32_t order = 0;
    get(n);
    get(r);
    get(order);
    get(op.dt);
    get(op.point_set_hash);
    get(op.identity_coeff);
    get(op.log_quad_weight);
    std::uint32_t div_src = 0;
    get(div_src);
    if (!f || n == 0 || n > (1u << 20)) return false;
    op.n = static_cast<int>(n);
    op.r = static_cast<int>(r);
    op.order = static_cast<int>(order);
    op.divergence_source = static_cast<DivergenceSource>(div_src);
    op.log_abs.resize(op.n, op.n);
    f.read(reinterpret_cast<char*>(op.log_abs.data()),
           static_cast<std::streamsize>(sizeof(double)) * op.log_abs.size());
    std::vector<unsigned char> mask(n);
    f.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(mask.size()));
    op.boundary_mask.assign(mask.begin(), mask.end());
    if (op.order >= 2) {
        op.signs.resize(op.n, op.n);
        f.read(reinterpret_cast<char*>(op.signs.data()),
               static_cast<std::streamsize>(op.signs.size()));
    } else {
        op.signs.resize(0, 0);
    }
    return static_cast<bool>(f);
}

}  // namespace yy
