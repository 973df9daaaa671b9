#pragma once

#include <Eigen/Dense>

#include <vector>

namespace msid {

struct GaussPoint1d {
    double x = 0.0; // abscissa on [-1, 1]
    double w = 0.0;
};

struct QuadraturePoint2d {
    Eigen::Vector2d p{0.0, 0.0};
    double w = 0.0;
};

// Gauss-Legendre rule on [-1, 1], computed by Newton iteration on the
// Legendre recurrence. Exact for polynomials of degree <= 2n-1.
std::vector<GaussPoint1d> gauss_legendre(int n);

// Conical-product rule on the triangle (a, b, c), built from two 1D Gauss
// rules through the Duffy map. Exact for total degree <= 2n-2 with n
// points per direction (n^2 points total).
std::vector<QuadraturePoint2d> triangle_rule(const Eigen::Vector2d& a,
                                             const Eigen::Vector2d& b,
                                             const Eigen::Vector2d& c,
                                             int n_per_direction);

// Smallest conical-product rule exact for the requested total degree.
std::vector<QuadraturePoint2d> triangle_rule_for_degree(
    const Eigen::Vector2d& a, const Eigen::Vector2d& b,
    const Eigen::Vector2d& c, int degree);

} // namespace msid
