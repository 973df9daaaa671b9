#pragma once

#include "msid/bell.hpp"
#include "msid/macro_mesh.hpp"
#include "msid/measurement.hpp"
#include "msid/voigt.hpp"

#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace msid {

// Twelve DOFs per node: for each displacement component (u then v) the
// value, two first derivatives and three second derivatives, all in
// global axes.
inline constexpr int kDofsPerNode = 12;
inline constexpr int kDofsPerComponent = 6; // value, dx, dy, dxx, dxy, dyy
inline constexpr int kElementDofs = 36;

inline int dof_index(int node, int component, int derivative)
{
    return node * kDofsPerNode + component * kDofsPerComponent + derivative;
}

struct PointLoad {
    int node = -1;
    int component = 1;       // 0 = u, 1 = v
    double magnitude_kn = 0.0; // per unit thickness
};

struct PrescribedDof {
    int dof = -1;
    double value = 0.0;
};

enum class LoadLocation { MidDepth, TopCorner, BottomCorner };

struct MacroProblem {
    MacroMesh mesh;
    CMatrix c = CMatrix::Zero();
    DMatrix d = DMatrix::Zero();
    std::vector<PrescribedDof> essential;
    std::vector<PointLoad> loads;
};

// Clamp the x=0 edge: per component fix value, d/dx, d/dy and d2/dxdy,
// d2/dy2 to zero; d2/dx2 stays free (it is not determined by u = 0 and
// n.grad u = 0 along a vertical edge).
std::vector<PrescribedDof> clamped_edge_constraints(const MacroMesh& mesh);

MacroProblem make_cantilever_problem(const MacroMesh& mesh, const CMatrix& c,
                                     const DMatrix& d, double load_kn,
                                     LoadLocation where = LoadLocation::MidDepth);

struct MacroField {
    std::shared_ptr<const MacroMesh> mesh;
    Eigen::VectorXd dofs; // 12 per node

    double dof(int node, int component, int derivative) const
    {
        return dofs(dof_index(node, component, derivative));
    }
    Eigen::Vector2d displacement(int node) const
    {
        return {dof(node, 0, 0), dof(node, 1, 0)};
    }

    struct PointState {
        Eigen::Vector2d u;
        Eigen::Matrix2d grad;                 // grad(i, j) = d u_i / d x_j
        Eigen::Matrix<double, 2, 3> hess;     // per component: xx, xy, yy
    };
    // Evaluate inside a given triangle through the element basis.
    PointState evaluate(int triangle, const Eigen::Vector2d& p) const;
};

using ElementMatrix = Eigen::Matrix<double, kElementDofs, kElementDofs>;
using BepsMatrix = Eigen::Matrix<double, 3, kElementDofs>;
using BetaMatrix = Eigen::Matrix<double, 6, kElementDofs>;

// Strain and strain-gradient operators of the Bell displacement element at
// one evaluation point. Element DOF order: node-major, u block then v block.
void fill_b_matrices(const BellBasis::Eval& ev, BepsMatrix& beps,
                     BetaMatrix& beta);

ElementMatrix element_stiffness(const BellBasis& basis, const CMatrix& c,
                                const DMatrix& d);
ElementMatrix element_stiffness(const Eigen::Vector2d& p0,
                                const Eigen::Vector2d& p1,
                                const Eigen::Vector2d& p2, const CMatrix& c,
                                const DMatrix& d);

// Assembled cantilever system with a fixed constraint set. Construction
// precomputes the canonical element shapes, quadrature operators and the
// sparse scatter maps; solve() can then be called repeatedly (and
// concurrently) with different tangents.
class MacroSystem {
public:
    MacroSystem(MacroMesh mesh, std::vector<PrescribedDof> essential);

    struct Solution {
        MacroField field;
        double residual = 0.0;  // ||K u - rhs|| / ||rhs|| on the reduced system
        double energy = 0.0;    // 0.5 u_f . K_ff u_f
        double load_work = 0.0; // 0.5 F_f . u_f
        int refinement_steps = 0;
    };

    Solution solve(const CMatrix& c, const DMatrix& d,
                   const std::vector<PointLoad>& loads) const;
    // Same constraint set, different prescribed values (ordered like the
    // essential list handed to the constructor).
    Solution solve(const CMatrix& c, const DMatrix& d,
                   const std::vector<PointLoad>& loads,
                   const std::vector<double>& essential_values) const;

    const MacroMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const MacroMesh> mesh_ptr() const { return mesh_; }
    int free_dof_count() const { return n_free_; }
    const std::vector<PrescribedDof>& essential() const { return essential_; }

private:
    std::shared_ptr<const MacroMesh> mesh_;
    std::vector<PrescribedDof> essential_;
    std::vector<int> free_index_; // dof -> index into free system, -1 if fixed
    std::vector<int> cons_index_; // dof -> index into essential list, -1 if free
    int n_free_ = 0;

    struct ShapeOperators {
        std::vector<BepsMatrix> beps;
        std::vector<BetaMatrix> beta;
        std::vector<double> w;
    };
    std::array<ShapeOperators, 2> shapes_; // lower / upper cell triangle
    std::vector<std::array<int, kElementDofs>> elem_dofs_;

    Eigen::SparseMatrix<double> kff_pattern_;
    Eigen::SparseMatrix<double> kfc_pattern_;
    std::vector<std::int32_t> slot_ff_; // element-entry -> nnz slot, -1 none
    std::vector<std::int32_t> slot_fc_;

    ElementMatrix shape_stiffness(int shape, const CMatrix& c,
                                  const DMatrix& d) const;
};

// One-shot convenience wrapper around MacroSystem.
MacroField assemble_and_solve(const MacroProblem& problem);

// Vertical displacement at all top-edge nodes, ordered by increasing x.
MeasurementSet sample_top_surface(const MacroField& field);

} // namespace msid
