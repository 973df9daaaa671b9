#include "msid/quadrature.hpp"

#include "msid/errors.hpp"

#include <cmath>

namespace msid {

std::vector<GaussPoint1d> gauss_legendre(int n)
{
    if (n < 1) {
        throw ParameterError("gauss_legendre: n must be >= 1");
    }
    std::vector<GaussPoint1d> rule(static_cast<std::size_t>(n));
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev initial guess, then Newton on P_n(x) = 0.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[static_cast<std::size_t>(i)] = {-x, w};
        rule[static_cast<std::size_t>(n - 1 - i)] = {x, w};
    }
    return rule;
}

std::vector<QuadraturePoint2d> triangle_rule(const Eigen::Vector2d& a,
                                             const Eigen::Vector2d& b,
                                             const Eigen::Vector2d& c,
                                             int n_per_direction)
{
    const std::vector<GaussPoint1d> gl = gauss_legendre(n_per_direction);
    const double jac =
        (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    const double area2 = jac; // twice the signed area

    std::vector<QuadraturePoint2d> rule;
    rule.reserve(gl.size() * gl.size());
    for (const GaussPoint1d& gu : gl) {
        const double u = 0.5 * (gu.x + 1.0);
        const double wu = 0.5 * gu.w;
        for (const GaussPoint1d& gv : gl) {
            const double v = 0.5 * (gv.x + 1.0) * (1.0 - u);
            const double wv = 0.5 * gv.w * (1.0 - u);
            QuadraturePoint2d q;
            q.p = a + u * (b - a) + v * (c - a);
            q.w = wu * wv * area2;
            rule.push_back(q);
        }
    }
    return rule;
}

std::vector<QuadraturePoint2d> triangle_rule_for_degree(
    const Eigen::Vector2d& a, const Eigen::Vector2d& b,
    const Eigen::Vector2d& c, int degree)
{
    // Duffy folding raises the u-degree by one, so n points integrate total
    // degree 2n-2 exactly.
    const int n = (degree + 2 + 1) / 2;
    return triangle_rule(a, b, c, n);
}

} // namespace msid
