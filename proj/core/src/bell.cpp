#include "msid/bell.hpp"

#include "msid/errors.hpp"

#include <cmath>

namespace msid {

namespace {

// Exponents (p, q) of the 21 quintic monomials x^p y^q, degree-major.
constexpr int kExp[BellBasis::kMonomials][2] = {
    {0, 0},
    {1, 0}, {0, 1},
    {2, 0}, {1, 1}, {0, 2},
    {3, 0}, {2, 1}, {1, 2}, {0, 3},
    {4, 0}, {3, 1}, {2, 2}, {1, 3}, {0, 4},
    {5, 0}, {4, 1}, {3, 2}, {2, 3}, {1, 4}, {0, 5},
};

double ipow(double x, int n)
{
    double r = 1.0;
    for (int k = 0; k < n; ++k) {
        r *= x;
    }
    return r;
}

// Falling factorial n (n-1) ... (n-r+1); zero when r > n.
double falling(int n, int r)
{
    if (r > n) {
        return 0.0;
    }
    double f = 1.0;
    for (int k = 0; k < r; ++k) {
        f *= n - k;
    }
    return f;
}

// Fourth t-derivative at t=0 of t -> (ax + t dx)^p (ay + t dy)^q.
// Exact; nonzero only when p + q >= 4, and constant in t when p + q <= 5.
double quartic_derivative(int p, int q, double ax, double ay, double dx,
                          double dy)
{
    constexpr double binom4[5] = {1.0, 4.0, 6.0, 4.0, 1.0};
    double sum = 0.0;
    for (int k = 0; k <= 4; ++k) {
        const double fp = falling(p, k);
        const double fq = falling(q, 4 - k);
        if (fp == 0.0 || fq == 0.0) {
            continue;
        }
        sum += binom4[k] * fp * fq * ipow(dx, k) * ipow(ax, p - k) *
               ipow(dy, 4 - k) * ipow(ay, q - (4 - k));
    }
    return sum;
}

} // namespace

BellBasis::BellBasis(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                     const Eigen::Vector2d& p2)
    : verts_{p0, p1, p2}
{
    const double jac = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                       (p2.x() - p0.x()) * (p1.y() - p0.y());
    area_ = 0.5 * jac;
    const double edge_scale =
        std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
    if (!(area_ > 1e-12 * edge_scale * edge_scale)) {
        throw GeometryError("BellBasis: degenerate or inverted triangle");
    }

    centroid_ = (p0 + p1 + p2) / 3.0;
    scale_ = std::sqrt(2.0 * area_);
    const double inv_h = 1.0 / scale_;

    std::array<Eigen::Vector2d, 3> local;
    for (int v = 0; v < 3; ++v) {
        local[static_cast<std::size_t>(v)] =
            (verts_[static_cast<std::size_t>(v)] - centroid_) * inv_h;
    }

    Eigen::Matrix<double, kMonomials, kMonomials> a;
    a.setZero();

    // Rows 0..17: the six nodal functionals at each vertex, with chain-rule
    // factors so derivative DOFs are taken in global coordinates.
    for (int v = 0; v < 3; ++v) {
        const double x = local[static_cast<std::size_t>(v)].x();
        const double y = local[static_cast<std::size_t>(v)].y();
        for (int m = 0; m < kMonomials; ++m) {
            const int p = kExp[m][0];
            const int q = kExp[m][1];
            const double xp = ipow(x, p);
            const double yq = ipow(y, q);
            a(6 * v + 0, m) = xp * yq;
            a(6 * v + 1, m) = p > 0 ? inv_h * p * ipow(x, p - 1) * yq : 0.0;
            a(6 * v + 2, m) = q > 0 ? inv_h * q * xp * ipow(y, q - 1) : 0.0;
            a(6 * v + 3, m) =
                p > 1 ? inv_h * inv_h * p * (p - 1) * ipow(x, p - 2) * yq : 0.0;
            a(6 * v + 4, m) = (p > 0 && q > 0)
                                  ? inv_h * inv_h * p * q * ipow(x, p - 1) *
                                        ipow(y, q - 1)
                                  : 0.0;
            a(6 * v + 5, m) =
                q > 1 ? inv_h * inv_h * q * (q - 1) * xp * ipow(y, q - 2) : 0.0;
        }
    }

    // Rows 18..20: kill the quartic term of the edge normal derivative.
    // n . grad(m) restricted to the edge is a quartic in the edge parameter;
    // its fourth t-derivative is the functional below (nonzero only for the
    // quintic monomials).
    constexpr int kEdges[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    for (int e = 0; e < 3; ++e) {
        const Eigen::Vector2d& pa = local[static_cast<std::size_t>(kEdges[e][0])];
        const Eigen::Vector2d& pb = local[static_cast<std::size_t>(kEdges[e][1])];
        const Eigen::Vector2d d = pb - pa;
        const Eigen::Vector2d n = Eigen::Vector2d(-d.y(), d.x()).normalized();
        for (int m = 0; m < kMonomials; ++m) {
            const int p = kExp[m][0];
            const int q = kExp[m][1];
            double f = 0.0;
            if (p > 0) {
                f += n.x() * p *
                     quartic_derivative(p - 1, q, pa.x(), pa.y(), d.x(), d.y());
            }
            if (q > 0) {
                f += n.y() * q *
                     quartic_derivative(p, q - 1, pa.x(), pa.y(), d.x(), d.y());
            }
            a(18 + e, m) = f;
        }
    }

    Eigen::Matrix<double, kMonomials, kFunctions> rhs;
    rhs.setZero();
    rhs.topLeftCorner<kFunctions, kFunctions>().setIdentity();

    Eigen::FullPivLU<Eigen::Matrix<double, kMonomials, kMonomials>> lu(a);
    if (!lu.isInvertible()) {
        throw GeometryError("BellBasis: singular DOF system");
    }
    coeff_ = lu.solve(rhs);
}

BellBasis::Eval BellBasis::evaluate(const Eigen::Vector2d& p) const
{
    const double inv_h = 1.0 / scale_;
    const double x = (p.x() - centroid_.x()) * inv_h;
    const double y = (p.y() - centroid_.y()) * inv_h;

    Eigen::Matrix<double, kMonomials, 1> val;
    Eigen::Matrix<double, kMonomials, 2> grad;
    Eigen::Matrix<double, kMonomials, 3> hess;
    for (int m = 0; m < kMonomials; ++m) {
        const int pe = kExp[m][0];
        const int qe = kExp[m][1];
        const double xp = ipow(x, pe);
        const double yq = ipow(y, qe);
        val(m) = xp * yq;
        grad(m, 0) = pe > 0 ? inv_h * pe * ipow(x, pe - 1) * yq : 0.0;
        grad(m, 1) = qe > 0 ? inv_h * qe * xp * ipow(y, qe - 1) : 0.0;
        hess(m, 0) = pe > 1
                         ? inv_h * inv_h * pe * (pe - 1) * ipow(x, pe - 2) * yq
                         : 0.0;
        hess(m, 1) = (pe > 0 && qe > 0) ? inv_h * inv_h * pe * qe *
                                              ipow(x, pe - 1) * ipow(y, qe - 1)
                                        : 0.0;
        hess(m, 2) = qe > 1
                         ? inv_h * inv_h * qe * (qe - 1) * xp * ipow(y, qe - 2)
                         : 0.0;
    }

    Eval out;
    out.value = coeff_.transpose() * val;
    out.grad = coeff_.transpose() * grad;
    out.hess = coeff_.transpose() * hess;
    return out;
}

} // namespace msid
