#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msid/errors.hpp"
#include "msid/macro_solver.hpp"
#include "msid/rng.hpp"
#include "msid/voigt.hpp"
#include "support/classical_fem.hpp"

#include <random>

using namespace msid;

namespace {

const IsotropicModuli kAluminum{40.38, 26.92};

} // namespace

TEST_CASE("build_cantilever counts and area")
{
    const MacroMesh mesh = build_cantilever(30.0, 10.0, 75, 25);
    CHECK(mesh.node_count() == 1976);
    CHECK(mesh.triangles.size() == 3750);

    double area = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const double a = mesh.triangle_area(static_cast<int>(t));
        CHECK(a > 0.0);
        area += a;
    }
    CHECK(area == doctest::Approx(300.0).epsilon(1e-10));

    const MacroMesh tiny = build_cantilever(1.0, 1.0, 1, 1);
    CHECK(tiny.node_count() == 4);
    CHECK(tiny.triangles.size() == 2);

    CHECK_THROWS_AS(build_cantilever(-1.0, 1.0, 1, 1), ParameterError);
    CHECK_THROWS_AS(build_cantilever(1.0, 1.0, 0, 1), ParameterError);
}

TEST_CASE("top surface sampling: count, order, clamped end")
{
    const MacroMesh mesh = build_cantilever(30.0, 10.0, 75, 25);
    MacroField field;
    field.mesh = std::make_shared<const MacroMesh>(mesh);
    field.dofs = Eigen::VectorXd::Zero(mesh.node_count() * kDofsPerNode);

    SUBCASE("rigid vertical translation gives identical samples")
    {
        for (int n = 0; n < mesh.node_count(); ++n) {
            field.dofs(dof_index(n, 1, 0)) = 0.7;
        }
        const MeasurementSet set = sample_top_surface(field);
        CHECK(set.size() == 76);
        for (std::size_t i = 0; i < set.size(); ++i) {
            CHECK(set.value[i] == 0.7);
            CHECK(set.y[i] == doctest::Approx(10.0));
            if (i > 0) {
                CHECK(set.x[i] > set.x[i - 1]);
            }
        }
    }

    SUBCASE("solved field is zero at the clamped corner")
    {
        const MacroMesh small = build_cantilever(30.0, 10.0, 15, 5);
        MacroSystem system(small, clamped_edge_constraints(small));
        const CMatrix c = isotropic_c(kAluminum);
        const auto sol = system.solve(c, DMatrix::Zero(),
                                      {{small.tip_mid_depth_node(), 1, -1.0}});
        const MeasurementSet set = sample_top_surface(sol.field);
        CHECK(set.size() == 16);
        CHECK(set.value.front() == 0.0);
        CHECK(std::abs(set.value.back()) > 1e-3);
    }
}

TEST_CASE("zero load gives the zero field")
{
    const MacroMesh mesh = build_cantilever(30.0, 10.0, 10, 4);
    MacroSystem system(mesh, clamped_edge_constraints(mesh));
    const auto sol = system.solve(isotropic_c(kAluminum),
                                  gradient_d({40.38, 26.92, 0.5}), {});
    CHECK(sol.field.dofs.norm() == 0.0);
}

TEST_CASE("classical limit matches the independent T6 oracle within 1%")
{
    // Smaller grid here; the acceptance suite runs the full 75x25 case.
    const MacroMesh mesh = build_cantilever(30.0, 10.0, 30, 10);
    MacroSystem system(mesh, clamped_edge_constraints(mesh));
    const CMatrix c = isotropic_c(kAluminum);
    const int tip = mesh.tip_mid_depth_node();
    const auto sol = system.solve(c, DMatrix::Zero(), {{tip, 1, -1.0}});
    const double bell_tip = sol.field.dof(tip, 1, 0);
    const double oracle_tip =
        msid_test::classical_tip_deflection(mesh, c, tip, 1.0);
    CHECK(bell_tip == doctest::Approx(oracle_tip).epsilon(0.01));
    // Euler-Bernoulli sanity scale for the full-size beam.
    CHECK(std::abs(bell_tip) > 1.0);
    CHECK(std::abs(bell_tip) < 2.5);
}

TEST_CASE("tip deflection strictly decreases as l grows")
{
    const MacroMesh mesh = build_cantilever(30.0, 10.0, 30, 10);
    MacroSystem system(mesh, clamped_edge_constraints(mesh));
    const int tip = mesh.tip_mid_depth_node();
    const CMatrix c = isotropic_c(kAluminum);
    double previous = 1e30;
    for (double l : {0.1, 0.5, 1.0, 2.0}) {
        const DMatrix d = gradient_d({kAluminum.lambda, kAluminum.mu, l});
        const auto sol = system.solve(c, d, {{tip, 1, -1.0}});
        const double deflection = std::abs(sol.field.dof(tip, 1, 0));
        CHECK(deflection < previous);
        previous = deflection;
    }
}

TEST_CASE("patch test: boundary-prescribed linear field fills the interior")
{
    const MacroMesh mesh = build_cantilever(3.0, 1.0, 6, 3);

    std::mt19937_64 gen(31);
    Eigen::Matrix2d grad;
    grad << uniform_symmetric(gen), uniform_symmetric(gen),
        uniform_symmetric(gen), uniform_symmetric(gen);
    const Eigen::Vector2d offset(uniform_symmetric(gen), uniform_symmetric(gen));

    // Prescribe all 12 DOFs of every boundary node.
    std::vector<PrescribedDof> essential;
    for (int j = 0; j <= mesh.ny; ++j) {
        for (int i = 0; i <= mesh.nx; ++i) {
            if (i != 0 && i != mesh.nx && j != 0 && j != mesh.ny) {
                continue;
            }
            const int n = mesh.node_id(i, j);
            const Eigen::Vector2d& p = mesh.nodes[static_cast<std::size_t>(n)];
            for (int comp = 0; comp < 2; ++comp) {
                essential.push_back({dof_index(n, comp, 0),
                                     offset(comp) + grad.row(comp).dot(p)});
                essential.push_back({dof_index(n, comp, 1), grad(comp, 0)});
                essential.push_back({dof_index(n, comp, 2), grad(comp, 1)});
                essential.push_back({dof_index(n, comp, 3), 0.0});
                essential.push_back({dof_index(n, comp, 4), 0.0});
                essential.push_back({dof_index(n, comp, 5), 0.0});
            }
        }
    }

    MacroSystem system(mesh, essential);
    std::vector<double> values;
    values.reserve(essential.size());
    for (const PrescribedDof& pd : essential) {
        values.push_back(pd.value);
    }
    const CMatrix c = isotropic_c(kAluminum);
    const DMatrix d = gradient_d({kAluminum.lambda, kAluminum.mu, 0.7});
    const auto sol = system.solve(c, d, {}, values);

    for (int j = 1; j < mesh.ny; ++j) {
        for (int i = 1; i < mesh.nx; ++i) {
            const int n = mesh.node_id(i, j);
            const Eigen::Vector2d& p = mesh.nodes[static_cast<std::size_t>(n)];
            for (int comp = 0; comp < 2; ++comp) {
                const double expect = offset(comp) + grad.row(comp).dot(p);
                const double scale = std::max(std::abs(expect), 1.0);
                CHECK(sol.field.dof(n, comp, 0) ==
                      doctest::Approx(expect).epsilon(1e-8).scale(scale));
                CHECK(sol.field.dof(n, comp, 1) ==
                      doctest::Approx(grad(comp, 0)).epsilon(1e-8).scale(1.0));
                CHECK(sol.field.dof(n, comp, 2) ==
                      doctest::Approx(grad(comp, 1)).epsilon(1e-8).scale(1.0));
            }
        }
    }
}

TEST_CASE("energy identity at the solution")
{
    const MacroMesh mesh = build_cantilever(30.0, 10.0, 20, 8);
    MacroSystem system(mesh, clamped_edge_constraints(mesh));
    const auto sol = system.solve(isotropic_c(kAluminum),
                                  gradient_d({40.38, 26.92, 0.93}),
                                  {{mesh.tip_mid_depth_node(), 1, -1.0}});
    CHECK(sol.energy ==
          doctest::Approx(sol.load_work).epsilon(1e-9));
    CHECK(sol.residual <= 1e-9);
}

TEST_CASE("field evaluation is consistent with nodal DOFs")
{
    const MacroMesh mesh = build_cantilever(30.0, 10.0, 10, 4);
    MacroSystem system(mesh, clamped_edge_constraints(mesh));
    const int tip = mesh.tip_mid_depth_node();
    const auto sol = system.solve(isotropic_c(kAluminum),
                                  gradient_d({40.38, 26.92, 0.5}),
                                  {{tip, 1, -1.0}});

    // Evaluate at a triangle vertex: must match the nodal DOFs.
    const int t = 17;
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector2d p = mesh.nodes[static_cast<std::size_t>(tri[1])];
    const MacroField::PointState st = sol.field.evaluate(t, p);
    CHECK(st.u(0) == doctest::Approx(sol.field.dof(tri[1], 0, 0)).epsilon(1e-9));
    CHECK(st.u(1) == doctest::Approx(sol.field.dof(tri[1], 1, 0)).epsilon(1e-9));
    CHECK(st.grad(0, 0) ==
          doctest::Approx(sol.field.dof(tri[1], 0, 1)).epsilon(1e-7).scale(1.0));
    CHECK(st.hess(1, 0) ==
          doctest::Approx(sol.field.dof(tri[1], 1, 3)).epsilon(1e-6).scale(1.0));

    CHECK_THROWS_AS(sol.field.evaluate(t, Eigen::Vector2d(-5.0, -5.0)),
                    GeometryError);
}

TEST_CASE("duplicate or out-of-range constraints are rejected")
{
    const MacroMesh mesh = build_cantilever(1.0, 1.0, 2, 2);
    std::vector<PrescribedDof> bad = {{0, 0.0}, {0, 0.0}};
    CHECK_THROWS_AS(MacroSystem(mesh, bad), ParameterError);
    std::vector<PrescribedDof> oob = {{mesh.node_count() * kDofsPerNode, 0.0}};
    CHECK_THROWS_AS(MacroSystem(mesh, oob), ParameterError);
}
