#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace yy {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

// Axis-aligned hypercube: prod_i [center_i - R, center_i + R].
struct Domain {
    Vec center;
    double half_width = 0.0;

    Domain() = default;
    Domain(Vec c, double R) : center(std::move(c)), half_width(R) {
        if (!(half_width > 0.0))
            throw std::invalid_argument("Domain: half_width must be positive");
    }

    int dim() const { return static_cast<int>(center.size()); }
    double log_volume() const { return dim() * std::log(2.0 * half_width); }

    static Domain unit_cube(int r) {
        return Domain(Vec::Constant(r, 0.5), 0.5);
    }

    bool contains(const Vec& x, double tol = 0.0) const {
        return ((x - center).cwiseAbs().array() <= half_width + tol).all();
    }
};

enum class SequenceKind { Halton, Sobol, Faure, LHS, PseudoRandom };

std::string to_string(SequenceKind kind);

// n sample points (rows) in an axis-aligned hypercube.
struct PointSet {
    Mat points;  // n x r
    SequenceKind kind = SequenceKind::Halton;
    Domain domain;

    int n() const { return static_cast<int>(points.rows()); }
    int r() const { return static_cast<int>(points.cols()); }
};

}  // namespace yy
