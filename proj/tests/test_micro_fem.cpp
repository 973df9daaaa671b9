#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msid/errors.hpp"
#include "msid/micro_fem.hpp"
#include "msid/rve.hpp"
#include "msid/voigt.hpp"
#include "support/micro_oracle.hpp"

using namespace msid;

namespace {

const IsotropicModuli kAluminum{40.38, 26.92};
const IsotropicModuli kSoftPore{40.38e-6, 26.92e-6};

MaterialGrid homogeneous_grid(int n, double edge)
{
    MaterialGrid grid;
    grid.n = n;
    grid.edge_length = edge;
    grid.pore.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
                     0);
    return grid;
}

MaterialGrid porous_grid(int raster_n, std::uint64_t seed = 42)
{
    RveSpec spec;
    spec.phi = 0.3;
    spec.vf = 0.15;
    spec.seed = seed;
    const CircleSet circles = rsa_pack(spec);
    return rasterize(circles, raster_n, spec.edge_length());
}

MacroStrainState eps_state(const Eigen::Vector3d& e)
{
    MacroStrainState state;
    state.eps = strain_from_voigt(e);
    return state;
}

MacroStrainState eta_state(int mode)
{
    MacroStrainState state;
    Vector6d h = Vector6d::Zero();
    h(mode) = 1.0;
    state.eta = strain_gradient_from_voigt(h);
    return state;
}

} // namespace

TEST_CASE("build_micro_mesh bookkeeping")
{
    const MaterialGrid grid = porous_grid(60);
    const MicroMesh mesh = build_micro_mesh(grid, kAluminum, kSoftPore);
    CHECK(mesh.n() == 60);
    CHECK(mesh.edge_length() == doctest::Approx(3.0));
    CHECK(mesh.grid.pore_fraction() ==
          doctest::Approx(grid.pore_fraction()));

    const MaterialGrid homo = homogeneous_grid(16, 3.0);
    const MicroMesh hmesh = build_micro_mesh(homo, kAluminum, kAluminum);
    CHECK(hmesh.grid.pore_fraction() == 0.0);
}

TEST_CASE("homogeneous RVE under pure macro strain is exactly linear")
{
    const MaterialGrid grid = homogeneous_grid(16, 3.0);
    const MicroMesh mesh = build_micro_mesh(grid, kAluminum, kAluminum);
    const MicroSolver solver(mesh);

    MacroStrainState state;
    state.eps << 0.3, 0.1, 0.1, -0.2;
    const RveSolution sol = solver.solve(state, 3.0);

    const int nn = 17;
    for (int j = 0; j < nn; ++j) {
        for (int i = 0; i < nn; ++i) {
            const Eigen::Vector2d x =
                3.0 * Eigen::Vector2d(static_cast<double>(i) / 16 - 0.5,
                                      static_cast<double>(j) / 16 - 0.5);
            const Eigen::Vector2d expect = state.eps * x;
            CHECK(sol.u(2 * (j * nn + i)) ==
                  doctest::Approx(expect(0)).epsilon(1e-9).scale(1.0));
            CHECK(sol.u(2 * (j * nn + i) + 1) ==
                  doctest::Approx(expect(1)).epsilon(1e-9).scale(1.0));
        }
    }
}

TEST_CASE("zero state gives the zero field")
{
    const MicroMesh mesh =
        build_micro_mesh(homogeneous_grid(12, 1.0), kAluminum, kAluminum);
    const MicroSolver solver(mesh);
    const RveSolution sol = solver.solve(MacroStrainState{}, 1.0);
    CHECK(sol.u.norm() == 0.0);
    CHECK(solver.average_stress(sol).norm() == 0.0);
    CHECK(solver.average_moment_stress(sol).norm() == 0.0);
}

TEST_CASE("homogeneous eta probe has zero mean strain")
{
    const MicroMesh mesh =
        build_micro_mesh(homogeneous_grid(20, 3.0), kAluminum, kAluminum);
    const MicroSolver solver(mesh);
    for (int mode = 0; mode < 6; ++mode) {
        const RveSolution sol = solver.solve(eta_state(mode), 3.0);
        // sigma_bar = C eps_bar for the homogeneous medium, so a vanishing
        // average stress certifies a vanishing average strain.
        const Eigen::Vector3d sigma = solver.average_stress(sol);
        CHECK(sigma.norm() <= 1e-8 * isotropic_c(kAluminum).norm());
    }
}

TEST_CASE("average stress: homogeneous unit modes reproduce C columns")
{
    const MicroMesh mesh =
        build_micro_mesh(homogeneous_grid(16, 3.0), kAluminum, kAluminum);
    const MicroSolver solver(mesh);
    const CMatrix c = isotropic_c(kAluminum);
    for (int m = 0; m < 3; ++m) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(m) = 1.0;
        const RveSolution sol = solver.solve(eps_state(e), 3.0);
        const Eigen::Vector3d sigma = solver.average_stress(sol);
        CHECK((sigma - c.col(m)).norm() <= 1e-9 * c.col(m).norm());
    }
}

TEST_CASE("homogeneous moment stress vanishes for pure strain probes")
{
    const double edge = 3.0;
    const MicroMesh mesh =
        build_micro_mesh(homogeneous_grid(16, edge), kAluminum, kAluminum);
    const MicroSolver solver(mesh);
    const RveSolution sol =
        solver.solve(eps_state(Eigen::Vector3d(1.0, 0.0, 0.0)), edge);
    const Eigen::Vector3d sigma = solver.average_stress(sol);
    const Vector6d tau = solver.average_moment_stress(sol);
    CHECK(tau.norm() <= 1e-9 * sigma.norm() * edge);
}

TEST_CASE("implementation matches the dense isoparametric oracle")
{
    // Porous grid, coarse enough for a dense solve; exercises the solve,
    // the stress average and the moment average in physical units.
    const MaterialGrid grid = porous_grid(20);
    const MicroMesh mesh = build_micro_mesh(grid, kAluminum, kSoftPore);
    const MicroSolver solver(mesh);

    MacroStrainState state;
    state.eps << 1.0, 0.2, 0.2, -0.4;
    Vector6d h;
    h << 0.3, -0.1, 0.5, 0.2, 0.7, -0.6;
    state.eta = strain_gradient_from_voigt(h);

    const RveSolution sol = solver.solve(state, grid.edge_length);
    const Eigen::Vector3d sigma = solver.average_stress(sol);
    const Vector6d tau = solver.average_moment_stress(sol);

    const msid_test::OracleResult oracle =
        msid_test::dense_kubc_oracle(grid, kAluminum, kSoftPore, state);
    CHECK((sigma - oracle.sigma_bar).norm() <= 1e-8 * oracle.sigma_bar.norm());
    CHECK((tau - oracle.tau_bar).norm() <=
          1e-8 * std::max(oracle.tau_bar.norm(), 1e-12));
}

TEST_CASE("porous RVE is softer than the homogeneous one")
{
    const MaterialGrid grid = porous_grid(50);
    const MicroSolver porous(build_micro_mesh(grid, kAluminum, kSoftPore));
    const RveSolution sol =
        porous.solve(eps_state(Eigen::Vector3d(1.0, 0.0, 0.0)), 3.0);
    const double s11 = porous.average_stress(sol)(0);
    const double homogeneous_s11 = isotropic_c(kAluminum)(0, 0);
    CHECK(s11 > 0.0);
    CHECK(s11 < homogeneous_s11);
}

TEST_CASE("one factorization serves all probe solves")
{
    const MicroMesh mesh =
        build_micro_mesh(porous_grid(30), kAluminum, kSoftPore);
    const MicroSolver solver(mesh);
    CHECK(solver.factorization_count() == 1);
    const std::uint64_t fp = solver.stiffness_fingerprint();
    for (int m = 0; m < 3; ++m) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(m) = 1.0;
        (void)solver.solve(eps_state(e), 3.0);
    }
    for (int m = 0; m < 6; ++m) {
        (void)solver.solve(eta_state(m), 3.0);
    }
    CHECK(solver.solve_count() == 9);
    CHECK(solver.factorization_count() == 1);
    CHECK(solver.stiffness_fingerprint() == fp);
}

TEST_CASE("reciprocity of the probed C block")
{
    const MicroMesh mesh =
        build_micro_mesh(porous_grid(40), kAluminum, kSoftPore);
    const MicroSolver solver(mesh);
    CMatrix c;
    for (int m = 0; m < 3; ++m) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(m) = 1.0;
        const RveSolution sol = solver.solve(eps_state(e), 3.0);
        c.col(m) = solver.average_stress(sol);
    }
    CHECK((c - c.transpose()).norm() <= 1e-8 * c.norm());
}

TEST_CASE("void-limit stability of the pore contrast")
{
    const MaterialGrid grid = porous_grid(50);
    const IsotropicModuli pore6 = lame_from_engineering(70.0 * 1e-6, 0.3);
    const IsotropicModuli pore8 = lame_from_engineering(70.0 * 1e-8, 0.3);
    const MicroSolver a(build_micro_mesh(grid, kAluminum, pore6));
    const MicroSolver b(build_micro_mesh(grid, kAluminum, pore8));
    const MacroStrainState state = eps_state(Eigen::Vector3d(1.0, 0.0, 0.0));
    const Eigen::Vector3d sa = a.average_stress(a.solve(state, 3.0));
    const Eigen::Vector3d sb = b.average_stress(b.solve(state, 3.0));
    CHECK((sa - sb).norm() <= 1e-3 * sa.norm());
}

TEST_CASE("solver input validation")
{
    const MicroMesh mesh =
        build_micro_mesh(homogeneous_grid(12, 1.0), kAluminum, kAluminum);
    const MicroSolver solver(mesh);
    CHECK_THROWS_AS(solver.solve(MacroStrainState{}, -1.0), ParameterError);
    CHECK_THROWS_AS(
        build_micro_mesh(homogeneous_grid(12, 1.0), IsotropicModuli{1.0, -1.0},
                         kAluminum),
        ParameterError);
}
