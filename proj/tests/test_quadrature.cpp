#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msid/quadrature.hpp"

#include <cmath>

using namespace msid;

TEST_CASE("gauss_legendre integrates polynomials up to degree 2n-1")
{
    for (int n = 1; n <= 10; ++n) {
        const auto rule = gauss_legendre(n);
        double wsum = 0.0;
        for (const auto& g : rule) {
            wsum += g.w;
        }
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double val = 0.0;
            for (const auto& g : rule) {
                val += g.w * std::pow(g.x, d);
            }
            const double exact = (d % 2 == 0) ? 2.0 / (d + 1) : 0.0;
            CHECK(val == doctest::Approx(exact).epsilon(1e-12));
        }
    }
}

TEST_CASE("triangle rule integrates monomials exactly on a reference triangle")
{
    // On the unit triangle, int x^p y^q = p! q! / (p+q+2)!.
    const Eigen::Vector2d a(0.0, 0.0);
    const Eigen::Vector2d b(1.0, 0.0);
    const Eigen::Vector2d c(0.0, 1.0);
    const auto rule = triangle_rule_for_degree(a, b, c, 10);
    auto factorial = [](int n) {
        double f = 1.0;
        for (int k = 2; k <= n; ++k) {
            f *= k;
        }
        return f;
    };
    for (int p = 0; p + 0 <= 10; ++p) {
        for (int q = 0; p + q <= 10; ++q) {
            double val = 0.0;
            for (const auto& pt : rule) {
                val += pt.w * std::pow(pt.p.x(), p) * std::pow(pt.p.y(), q);
            }
            const double exact =
                factorial(p) * factorial(q) / factorial(p + q + 2);
            CHECK(val == doctest::Approx(exact).epsilon(1e-12));
        }
    }
}

TEST_CASE("triangle rule respects affine maps")
{
    const Eigen::Vector2d a(1.0, 2.0);
    const Eigen::Vector2d b(4.0, 2.5);
    const Eigen::Vector2d c(2.0, 5.0);
    const auto rule = triangle_rule_for_degree(a, b, c, 6);
    double area = 0.0;
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& pt : rule) {
        area += pt.w;
        centroid += pt.w * pt.p;
    }
    const double exact_area =
        0.5 * std::abs((b - a).x() * (c - a).y() - (c - a).x() * (b - a).y());
    CHECK(area == doctest::Approx(exact_area).epsilon(1e-14));
    centroid /= area;
    CHECK(centroid.x() == doctest::Approx(((a + b + c) / 3.0).x()).epsilon(1e-13));
    CHECK(centroid.y() == doctest::Approx(((a + b + c) / 3.0).y()).epsilon(1e-13));
}
