#include "msid/voigt.hpp"

#include "msid/errors.hpp"

#include <sstream>

namespace msid {

void IsotropicModuli::validate() const
{
    if (!valid()) {
        std::ostringstream os;
        os << "invalid isotropic moduli: lambda=" << lambda << " mu=" << mu
           << " (need mu > 0 and lambda > -2/3 mu)";
        throw ParameterError(os.str());
    }
}

void GradientModuli::validate() const
{
    classical().validate();
    if (l < 0.0) {
        throw ParameterError("invalid gradient moduli: l must be >= 0");
    }
}

IsotropicModuli lame_from_engineering(double youngs_gpa, double poisson)
{
    if (!(youngs_gpa > 0.0)) {
        throw ParameterError("Young's modulus must be positive");
    }
    if (!(poisson > -1.0 && poisson < 0.5)) {
        throw ParameterError("Poisson ratio must lie in (-1, 0.5)");
    }
    const double lambda =
        youngs_gpa * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    const double mu = youngs_gpa / (2.0 * (1.0 + poisson));
    return {lambda, mu};
}

CMatrix isotropic_c(const IsotropicModuli& m)
{
    CMatrix c = CMatrix::Zero();
    c(0, 0) = m.lambda + 2.0 * m.mu;
    c(1, 1) = m.lambda + 2.0 * m.mu;
    c(0, 1) = m.lambda;
    c(1, 0) = m.lambda;
    c(2, 2) = m.mu;
    return c;
}

DMatrix gradient_d(const GradientModuli& m)
{
    const CMatrix c = isotropic_c(m.classical());
    DMatrix d = DMatrix::Zero();
    const double l2 = m.l * m.l;
    d.block<3, 3>(0, 0) = l2 * c;
    d.block<3, 3>(3, 3) = l2 * c;
    return d;
}

Eigen::Vector3d voigt_strain(const Eigen::Matrix2d& eps)
{
    return {eps(0, 0), eps(1, 1), eps(0, 1) + eps(1, 0)};
}

Eigen::Matrix2d strain_from_voigt(const Eigen::Vector3d& e)
{
    Eigen::Matrix2d eps;
    eps << e(0), 0.5 * e(2), 0.5 * e(2), e(1);
    return eps;
}

Eigen::Vector3d voigt_stress(const Eigen::Matrix2d& sig)
{
    return {sig(0, 0), sig(1, 1), 0.5 * (sig(0, 1) + sig(1, 0))};
}

Eigen::Matrix2d stress_from_voigt(const Eigen::Vector3d& s)
{
    Eigen::Matrix2d sig;
    sig << s(0), s(2), s(2), s(1);
    return sig;
}

Vector6d voigt_strain_gradient(const GradTensor& eta)
{
    Vector6d h;
    for (int k = 0; k < 2; ++k) {
        const Eigen::Matrix2d& m = eta[static_cast<std::size_t>(k)];
        h(3 * k + 0) = m(0, 0);
        h(3 * k + 1) = m(1, 1);
        h(3 * k + 2) = m(0, 1) + m(1, 0);
    }
    return h;
}

GradTensor strain_gradient_from_voigt(const Vector6d& h)
{
    GradTensor eta;
    for (int k = 0; k < 2; ++k) {
        Eigen::Matrix2d& m = eta[static_cast<std::size_t>(k)];
        m(0, 0) = h(3 * k + 0);
        m(1, 1) = h(3 * k + 1);
        m(0, 1) = 0.5 * h(3 * k + 2);
        m(1, 0) = 0.5 * h(3 * k + 2);
    }
    return eta;
}

Vector6d voigt_moment_stress(const GradTensor& tau)
{
    Vector6d t;
    for (int k = 0; k < 2; ++k) {
        const Eigen::Matrix2d& m = tau[static_cast<std::size_t>(k)];
        t(3 * k + 0) = m(0, 0);
        t(3 * k + 1) = m(1, 1);
        t(3 * k + 2) = 0.5 * (m(0, 1) + m(1, 0));
    }
    return t;
}

GradTensor moment_stress_from_voigt(const Vector6d& t)
{
    GradTensor tau;
    for (int k = 0; k < 2; ++k) {
        Eigen::Matrix2d& m = tau[static_cast<std::size_t>(k)];
        m(0, 0) = t(3 * k + 0);
        m(1, 1) = t(3 * k + 1);
        m(0, 1) = t(3 * k + 2);
        m(1, 0) = t(3 * k + 2);
    }
    return tau;
}

} // namespace msid
