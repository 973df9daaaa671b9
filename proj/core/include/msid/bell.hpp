#pragma once

#include <Eigen/Dense>

#include <array>

namespace msid {

// Reduced-quintic C1 triangle (Bell element) for one scalar field.
//
// Six degrees of freedom per vertex, in global axes:
//   value, d/dx, d/dy, d2/dx2, d2/dxdy, d2/dy2
// giving 18 basis functions. The full 21-term quintic is constrained so
// the normal derivative along each edge varies cubically, which removes
// the three mid-edge normal-derivative functionals of the Argyris element
// and makes the interpolation C1 across edges shared by two such elements.
//
// Basis coefficients are obtained by inverting the 21x21 system of the 18
// nodal functionals plus the 3 edge constraints, in centroid-local scaled
// coordinates. Construction is deterministic and depends only on vertex
// offsets, so congruent triangles share identical bases.
class BellBasis {
public:
    static constexpr int kFunctions = 18;
    static constexpr int kMonomials = 21;

    BellBasis(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
              const Eigen::Vector2d& p2);

    struct Eval {
        Eigen::Matrix<double, kFunctions, 1> value;
        Eigen::Matrix<double, kFunctions, 2> grad; // d/dx, d/dy
        Eigen::Matrix<double, kFunctions, 3> hess; // d2/dx2, d2/dxdy, d2/dy2
    };

    Eval evaluate(const Eigen::Vector2d& p) const;

    double area() const { return area_; }
    const std::array<Eigen::Vector2d, 3>& vertices() const { return verts_; }

private:
    std::array<Eigen::Vector2d, 3> verts_;
    Eigen::Vector2d centroid_;
    double scale_ = 1.0;
    double area_ = 0.0;
    Eigen::Matrix<double, kMonomials, kFunctions> coeff_;
};

} // namespace msid
