#pragma once

#include "msid/rve.hpp"
#include "msid/voigt.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <memory>

namespace msid {

// Strain state handed down from a macroscopic material point.
struct MacroStrainState {
    Eigen::Matrix2d eps = Eigen::Matrix2d::Zero();          // dimensionless
    GradTensor eta = {Eigen::Matrix2d::Zero(),
                      Eigen::Matrix2d::Zero()};             // 1/mm
};

// Structured bilinear-quad mesh over the material grid. One element per
// raster cell; pores are soft inclusions, not holes.
struct MicroMesh {
    MaterialGrid grid;
    IsotropicModuli matrix_moduli;
    IsotropicModuli pore_moduli;

    int n() const { return grid.n; }
    double edge_length() const { return grid.edge_length; }
};

MicroMesh build_micro_mesh(const MaterialGrid& grid,
                           const IsotropicModuli& matrix,
                           const IsotropicModuli& pore);

struct RveSolution {
    Eigen::VectorXd u;         // 2 DOFs per node, physical (mm)
    double edge_length = 0.0;  // mm
};

// Classical plane-strain FEM on the raster mesh with fully prescribed
// second-order boundary displacements u_i = eps_ij x_j + 1/2 eta_kij x_k x_j
// (coordinates relative to the RVE centroid).
//
// The stiffness is assembled in normalized coordinates: plane stiffness
// matrices are scale invariant, so the factorization depends on the grid
// and moduli only, never on the physical edge length. The edge length
// enters through the boundary values and the averaging formulas.
class MicroSolver {
public:
    explicit MicroSolver(const MicroMesh& mesh);

    RveSolution solve(const MacroStrainState& state, double edge_length) const;

    // sigma_bar = (1/V) int sigma dV, Voigt [s11, s22, s12] (GPa).
    Eigen::Vector3d average_stress(const RveSolution& sol) const;
    // Work conjugate of the macro strain gradient under the prescribed
    // quadratic boundary displacements: component a is
    //   (1/V) q_a . R(sol),
    // where R is the boundary reaction vector and q_a carries the boundary
    // values of the unit-mode quadratic 1/2 eta^a_kij x_k x_j. Equals the
    // first moment of stress continuously, symmetrized over the moment and
    // stress indices; the plain (1/V) int sigma_ij x_k is not conjugate to
    // eta and probes a far-from-symmetric D. Voigt per the DMatrix
    // convention (GPa mm).
    Vector6d average_moment_stress(const RveSolution& sol) const;

    // FNV-1a over the reduced stiffness values; constant across solves.
    std::uint64_t stiffness_fingerprint() const;
    int factorization_count() const { return 1; } // factorized at construction
    int solve_count() const { return solve_count_; }
    int free_dof_count() const { return n_free_; }

private:
    int n_ = 0;
    std::vector<std::uint8_t> elem_pore_;
    Eigen::Matrix3d c_matrixphase_;
    Eigen::Matrix3d c_porephase_;

    std::vector<int> free_index_; // node dof -> free index, -1 boundary
    std::vector<int> bnd_index_;  // node dof -> boundary index, -1 interior
    int n_free_ = 0;
    int n_bnd_ = 0;

    Eigen::SparseMatrix<double> kff_;
    Eigen::SparseMatrix<double> kfb_;
    Eigen::SparseMatrix<double> kbf_;
    Eigen::SparseMatrix<double> kbb_;
    Eigen::VectorXd equilibration_; // 1/sqrt(diag)
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    std::uint64_t fingerprint_ = 0;
    mutable int solve_count_ = 0;

    Eigen::Vector2d node_coord(int i, int j) const
    {
        return {static_cast<double>(i) / n_ - 0.5,
                static_cast<double>(j) / n_ - 0.5};
    }
};

} // namespace msid
