#pragma once

#include <Eigen/Dense>

#include <array>

namespace msid {

// Plane-strain Voigt conventions used throughout:
//   strain        e = [e11, e22, 2*e12]
//   stress        s = [s11, s22, s12]
//   strain grad   h = [h111, h122, 2*h112, h211, h222, 2*h212]
//   moment stress t = [t111, t122, t112, t211, t222, t212]
// Engineering factors sit on the strain side only, so energy densities are
// plain dot products: s.e = sigma:eps and t.h = tau_kij eta_kij.
// Units: GPa, mm, kN (1 GPa * mm^2 = 1 kN).

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// 3x3 classical tangent acting on e, producing s.
using CMatrix = Eigen::Matrix3d;
// 6x6 higher-order tangent acting on h, producing t. Blocks are ordered by
// gradient direction: k=1 rows/cols 0-2, k=2 rows/cols 3-5.
using DMatrix = Matrix6d;

// Third-order field with symmetry in the last two indices, stored as one
// symmetric 2x2 matrix per gradient direction k.
using GradTensor = std::array<Eigen::Matrix2d, 2>;

struct IsotropicModuli {
    double lambda = 0.0; // GPa
    double mu = 0.0;     // GPa

    // mu > 0 and lambda > -(2/3) mu (positive-definite classical energy)
    bool valid() const { return mu > 0.0 && lambda > -(2.0 / 3.0) * mu; }
    void validate() const;
};

struct GradientModuli {
    double lambda = 0.0; // GPa
    double mu = 0.0;     // GPa
    double l = 0.0;      // mm

    bool valid() const
    {
        return IsotropicModuli{lambda, mu}.valid() && l >= 0.0;
    }
    void validate() const;
    IsotropicModuli classical() const { return {lambda, mu}; }
};

// lambda = E nu / ((1+nu)(1-2nu)), mu = E / (2(1+nu)).
// Requires E > 0 and -1 < nu < 0.5.
IsotropicModuli lame_from_engineering(double youngs_gpa, double poisson);

// C = [[l+2m, l, 0], [l, l+2m, 0], [0, 0, m]]
CMatrix isotropic_c(const IsotropicModuli& m);

// D = l^2 * blockdiag(C, C) with C = isotropic_c({lambda, mu}).
DMatrix gradient_d(const GradientModuli& m);

// Pack/unpack between tensor and Voigt forms. Round trips are exact.
Eigen::Vector3d voigt_strain(const Eigen::Matrix2d& eps);
Eigen::Matrix2d strain_from_voigt(const Eigen::Vector3d& e);
Eigen::Vector3d voigt_stress(const Eigen::Matrix2d& sig);
Eigen::Matrix2d stress_from_voigt(const Eigen::Vector3d& s);
Vector6d voigt_strain_gradient(const GradTensor& eta);
GradTensor strain_gradient_from_voigt(const Vector6d& h);
Vector6d voigt_moment_stress(const GradTensor& tau);
GradTensor moment_stress_from_voigt(const Vector6d& t);

} // namespace msid
