#include "msid/macro_solver.hpp"

#include "msid/errors.hpp"
#include "msid/quadrature.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msid {

std::vector<PrescribedDof> clamped_edge_constraints(const MacroMesh& mesh)
{
    // Fixed derivatives per component: value, dx, dy, dxy, dyy (indices
    // 0, 1, 2, 4, 5). dxx (index 3) stays free.
    constexpr int kFixed[5] = {0, 1, 2, 4, 5};
    std::vector<PrescribedDof> out;
    for (int node : mesh.left_edge_nodes()) {
        for (int comp = 0; comp < 2; ++comp) {
            for (int d : kFixed) {
                out.push_back({dof_index(node, comp, d), 0.0});
            }
        }
    }
    return out;
}

MacroProblem make_cantilever_problem(const MacroMesh& mesh, const CMatrix& c,
                                     const DMatrix& d, double load_kn,
                                     LoadLocation where)
{
    MacroProblem problem;
    problem.mesh = mesh;
    problem.c = c;
    problem.d = d;
    problem.essential = clamped_edge_constraints(mesh);
    int node = mesh.tip_mid_depth_node();
    if (where == LoadLocation::TopCorner) {
        node = mesh.tip_top_corner_node();
    } else if (where == LoadLocation::BottomCorner) {
        node = mesh.tip_bottom_corner_node();
    }
    // Downward tip force on the vertical displacement DOF.
    problem.loads.push_back({node, 1, -load_kn});
    return problem;
}

MacroField::PointState MacroField::evaluate(int triangle,
                                            const Eigen::Vector2d& p) const
{
    const auto& tri = mesh->triangles[static_cast<std::size_t>(triangle)];
    const Eigen::Vector2d& a = mesh->nodes[static_cast<std::size_t>(tri[0])];
    const Eigen::Vector2d& b = mesh->nodes[static_cast<std::size_t>(tri[1])];
    const Eigen::Vector2d& c = mesh->nodes[static_cast<std::size_t>(tri[2])];

    const double det = (b.x() - a.x()) * (c.y() - a.y()) -
                       (c.x() - a.x()) * (b.y() - a.y());
    const double l1 = ((b.x() - p.x()) * (c.y() - p.y()) -
                       (c.x() - p.x()) * (b.y() - p.y())) /
                      det;
    const double l2 = ((c.x() - p.x()) * (a.y() - p.y()) -
                       (a.x() - p.x()) * (c.y() - p.y())) /
                      det;
    const double l3 = 1.0 - l1 - l2;
    if (l1 < -1e-10 || l2 < -1e-10 || l3 < -1e-10) {
        throw GeometryError("MacroField::evaluate: point outside triangle");
    }

    const BellBasis basis(a, b, c);
    const BellBasis::Eval ev = basis.evaluate(p);

    PointState st;
    st.u.setZero();
    st.grad.setZero();
    st.hess.setZero();
    for (int v = 0; v < 3; ++v) {
        const int node = tri[static_cast<std::size_t>(v)];
        for (int comp = 0; comp < 2; ++comp) {
            for (int d = 0; d < kDofsPerComponent; ++d) {
                const int s = 6 * v + d;
                const double q = dof(node, comp, d);
                st.u(comp) += ev.value(s) * q;
                st.grad(comp, 0) += ev.grad(s, 0) * q;
                st.grad(comp, 1) += ev.grad(s, 1) * q;
                st.hess(comp, 0) += ev.hess(s, 0) * q;
                st.hess(comp, 1) += ev.hess(s, 1) * q;
                st.hess(comp, 2) += ev.hess(s, 2) * q;
            }
        }
    }
    return st;
}

void fill_b_matrices(const BellBasis::Eval& ev, BepsMatrix& beps,
                     BetaMatrix& beta)
{
    beps.setZero();
    beta.setZero();
    for (int v = 0; v < 3; ++v) {
        for (int d = 0; d < kDofsPerComponent; ++d) {
            const int s = 6 * v + d;
            const int cu = v * kDofsPerNode + d;                      // u DOF
            const int cv = v * kDofsPerNode + kDofsPerComponent + d;  // v DOF
            const double gx = ev.grad(s, 0);
            const double gy = ev.grad(s, 1);
            const double hxx = ev.hess(s, 0);
            const double hxy = ev.hess(s, 1);
            const double hyy = ev.hess(s, 2);

            // e = [u,x ; v,y ; u,y + v,x]
            beps(0, cu) = gx;
            beps(2, cu) = gy;
            beps(1, cv) = gy;
            beps(2, cv) = gx;

            // h = [u,xx ; v,xy ; u,xy + v,xx ; u,xy ; v,yy ; u,yy + v,xy]
            beta(0, cu) = hxx;
            beta(2, cu) = hxy;
            beta(3, cu) = hxy;
            beta(5, cu) = hyy;
            beta(1, cv) = hxy;
            beta(2, cv) = hxx;
            beta(4, cv) = hyy;
            beta(5, cv) = hxy;
        }
    }
}

ElementMatrix element_stiffness(const BellBasis& basis, const CMatrix& c,
                                const DMatrix& d)
{
    const auto& v = basis.vertices();
    const auto rule = triangle_rule_for_degree(v[0], v[1], v[2], 10);
    ElementMatrix k = ElementMatrix::Zero();
    BepsMatrix beps;
    BetaMatrix beta;
    for (const QuadraturePoint2d& q : rule) {
        const BellBasis::Eval ev = basis.evaluate(q.p);
        fill_b_matrices(ev, beps, beta);
        k.noalias() += q.w * (beps.transpose() * c * beps);
        k.noalias() += q.w * (beta.transpose() * d * beta);
    }
    return k;
}

ElementMatrix element_stiffness(const Eigen::Vector2d& p0,
                                const Eigen::Vector2d& p1,
                                const Eigen::Vector2d& p2, const CMatrix& c,
                                const DMatrix& d)
{
    return element_stiffness(BellBasis(p0, p1, p2), c, d);
}

namespace {

std::int32_t find_slot(const Eigen::SparseMatrix<double>& m, int row, int col)
{
    const int* outer = m.outerIndexPtr();
    const int* inner = m.innerIndexPtr();
    const int* lo = inner + outer[col];
    const int* hi = inner + outer[col + 1];
    const int* it = std::lower_bound(lo, hi, row);
    if (it == hi || *it != row) {
        return -1;
    }
    return static_cast<std::int32_t>(it - inner);
}

std::string describe_dof(int dof)
{
    const int node = dof / kDofsPerNode;
    const int rest = dof % kDofsPerNode;
    const int comp = rest / kDofsPerComponent;
    const int deriv = rest % kDofsPerComponent;
    static const char* kDerivNames[6] = {"value", "dx", "dy", "dxx", "dxy", "dyy"};
    std::ostringstream os;
    os << "node " << node << " " << (comp == 0 ? "u" : "v") << ":"
       << kDerivNames[deriv];
    return os.str();
}

} // namespace

MacroSystem::MacroSystem(MacroMesh mesh, std::vector<PrescribedDof> essential)
    : mesh_(std::make_shared<const MacroMesh>(std::move(mesh))),
      essential_(std::move(essential))
{
    const int n_dofs = mesh_->node_count() * kDofsPerNode;
    free_index_.assign(static_cast<std::size_t>(n_dofs), 0);
    cons_index_.assign(static_cast<std::size_t>(n_dofs), -1);
    for (std::size_t k = 0; k < essential_.size(); ++k) {
        const int dof = essential_[k].dof;
        if (dof < 0 || dof >= n_dofs) {
            throw ParameterError("MacroSystem: constraint dof out of range");
        }
        if (cons_index_[static_cast<std::size_t>(dof)] >= 0) {
            throw ParameterError("MacroSystem: duplicate constraint dof");
        }
        cons_index_[static_cast<std::size_t>(dof)] = static_cast<int>(k);
        free_index_[static_cast<std::size_t>(dof)] = -1;
    }
    n_free_ = 0;
    for (int dof = 0; dof < n_dofs; ++dof) {
        if (free_index_[static_cast<std::size_t>(dof)] == 0) {
            free_index_[static_cast<std::size_t>(dof)] = n_free_++;
        }
    }

    // Canonical cell triangles; all elements are translates of these two.
    const double dx = mesh_->dx();
    const double dy = mesh_->dy();
    const Eigen::Vector2d o(0.0, 0.0);
    const std::array<std::array<Eigen::Vector2d, 3>, 2> canon = {{
        {o, Eigen::Vector2d(dx, 0.0), Eigen::Vector2d(dx, dy)},
        {o, Eigen::Vector2d(dx, dy), Eigen::Vector2d(0.0, dy)},
    }};
    for (int s = 0; s < 2; ++s) {
        const auto& verts = canon[static_cast<std::size_t>(s)];
        const BellBasis basis(verts[0], verts[1], verts[2]);
        const auto rule = triangle_rule_for_degree(verts[0], verts[1], verts[2], 10);
        ShapeOperators& ops = shapes_[static_cast<std::size_t>(s)];
        ops.beps.resize(rule.size());
        ops.beta.resize(rule.size());
        ops.w.resize(rule.size());
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const BellBasis::Eval ev = basis.evaluate(rule[q].p);
            fill_b_matrices(ev, ops.beps[q], ops.beta[q]);
            ops.w[q] = rule[q].w;
        }
    }

    const std::size_t n_elem = mesh_->triangles.size();
    elem_dofs_.resize(n_elem);
    for (std::size_t e = 0; e < n_elem; ++e) {
        const auto& tri = mesh_->triangles[e];
        for (int v = 0; v < 3; ++v) {
            for (int cd = 0; cd < kDofsPerNode; ++cd) {
                elem_dofs_[e][static_cast<std::size_t>(v * kDofsPerNode + cd)] =
                    tri[static_cast<std::size_t>(v)] * kDofsPerNode + cd;
            }
        }
    }

    const int n_cons = static_cast<int>(essential_.size());
    std::vector<Eigen::Triplet<double>> tff;
    std::vector<Eigen::Triplet<double>> tfc;
    tff.reserve(n_elem * kElementDofs * kElementDofs);
    for (std::size_t e = 0; e < n_elem; ++e) {
        for (int a = 0; a < kElementDofs; ++a) {
            const int ra = free_index_[static_cast<std::size_t>(
                elem_dofs_[e][static_cast<std::size_t>(a)])];
            if (ra < 0) {
                continue;
            }
            for (int b = 0; b < kElementDofs; ++b) {
                const int gb = elem_dofs_[e][static_cast<std::size_t>(b)];
                const int cb = free_index_[static_cast<std::size_t>(gb)];
                if (cb >= 0) {
                    tff.emplace_back(ra, cb, 1.0);
                } else {
                    tfc.emplace_back(
                        ra, cons_index_[static_cast<std::size_t>(gb)], 1.0);
                }
            }
        }
    }
    kff_pattern_.resize(n_free_, n_free_);
    kff_pattern_.setFromTriplets(tff.begin(), tff.end());
    kff_pattern_.makeCompressed();
    kfc_pattern_.resize(n_free_, std::max(n_cons, 1));
    kfc_pattern_.setFromTriplets(tfc.begin(), tfc.end());
    kfc_pattern_.makeCompressed();

    slot_ff_.assign(n_elem * kElementDofs * kElementDofs, -1);
    slot_fc_.assign(n_elem * kElementDofs * kElementDofs, -1);
    for (std::size_t e = 0; e < n_elem; ++e) {
        const std::size_t base = e * kElementDofs * kElementDofs;
        for (int a = 0; a < kElementDofs; ++a) {
            const int ra = free_index_[static_cast<std::size_t>(
                elem_dofs_[e][static_cast<std::size_t>(a)])];
            if (ra < 0) {
                continue;
            }
            for (int b = 0; b < kElementDofs; ++b) {
                const int gb = elem_dofs_[e][static_cast<std::size_t>(b)];
                const int cb = free_index_[static_cast<std::size_t>(gb)];
                const std::size_t idx =
                    base + static_cast<std::size_t>(a * kElementDofs + b);
                if (cb >= 0) {
                    slot_ff_[idx] = find_slot(kff_pattern_, ra, cb);
                } else {
                    slot_fc_[idx] = find_slot(
                        kfc_pattern_, ra,
                        cons_index_[static_cast<std::size_t>(gb)]);
                }
            }
        }
    }
}

ElementMatrix MacroSystem::shape_stiffness(int shape, const CMatrix& c,
                                           const DMatrix& d) const
{
    const ShapeOperators& ops = shapes_[static_cast<std::size_t>(shape)];
    ElementMatrix k = ElementMatrix::Zero();
    for (std::size_t q = 0; q < ops.w.size(); ++q) {
        k.noalias() += ops.w[q] * (ops.beps[q].transpose() * c * ops.beps[q]);
        k.noalias() += ops.w[q] * (ops.beta[q].transpose() * d * ops.beta[q]);
    }
    return k;
}

MacroSystem::Solution MacroSystem::solve(
    const CMatrix& c, const DMatrix& d,
    const std::vector<PointLoad>& loads) const
{
    return solve(c, d, loads,
                 std::vector<double>(essential_.size(), 0.0));
}

MacroSystem::Solution MacroSystem::solve(
    const CMatrix& c, const DMatrix& d, const std::vector<PointLoad>& loads,
    const std::vector<double>& essential_values) const
{
    if (essential_values.size() != essential_.size()) {
        throw ParameterError("MacroSystem::solve: essential value count mismatch");
    }

    const std::array<ElementMatrix, 2> ke = {shape_stiffness(0, c, d),
                                             shape_stiffness(1, c, d)};

    Eigen::SparseMatrix<double> kff = kff_pattern_;
    Eigen::SparseMatrix<double> kfc = kfc_pattern_;
    std::fill(kff.valuePtr(), kff.valuePtr() + kff.nonZeros(), 0.0);
    std::fill(kfc.valuePtr(), kfc.valuePtr() + kfc.nonZeros(), 0.0);

    const std::size_t n_elem = mesh_->triangles.size();
    double* vff = kff.valuePtr();
    double* vfc = kfc.valuePtr();
    constexpr std::size_t kSq = kElementDofs * kElementDofs;
    for (std::size_t e = 0; e < n_elem; ++e) {
        const ElementMatrix& k = ke[e & 1];
        const std::int32_t* sff = slot_ff_.data() + e * kSq;
        const std::int32_t* sfc = slot_fc_.data() + e * kSq;
        const double* kd = k.data(); // column-major: kd[b*36 + a] = k(a, b)
        for (int a = 0; a < kElementDofs; ++a) {
            for (int b = 0; b < kElementDofs; ++b) {
                const std::size_t idx = static_cast<std::size_t>(a * kElementDofs + b);
                const double val = kd[static_cast<std::size_t>(b * kElementDofs + a)];
                const std::int32_t s0 = sff[idx];
                if (s0 >= 0) {
                    vff[s0] += val;
                } else {
                    const std::int32_t s1 = sfc[idx];
                    if (s1 >= 0) {
                        vfc[s1] += val;
                    }
                }
            }
        }
    }

    // Reduced right-hand side.
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free_);
    for (const PointLoad& load : loads) {
        const int dof = dof_index(load.node, load.component, 0);
        const int fi = free_index_[static_cast<std::size_t>(dof)];
        if (fi >= 0) {
            rhs(fi) += load.magnitude_kn;
        }
    }
    bool has_prescribed = false;
    for (double v : essential_values) {
        if (v != 0.0) {
            has_prescribed = true;
            break;
        }
    }
    if (has_prescribed) {
        const Eigen::Map<const Eigen::VectorXd> uc(essential_values.data(),
                                                   static_cast<Eigen::Index>(
                                                       essential_values.size()));
        rhs.noalias() -= kfc * uc;
    }

    // Symmetric Jacobi equilibration, then LDLT on the scaled system.
    Eigen::VectorXd diag = kff.diagonal();
    Eigen::VectorXd s(n_free_);
    for (int i = 0; i < n_free_; ++i) {
        s(i) = diag(i) > 0.0 ? 1.0 / std::sqrt(diag(i)) : 1.0;
    }
    for (int col = 0; col < kff.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(kff, col); it; ++it) {
            it.valueRef() *= s(it.row()) * s(col);
        }
    }

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(kff);
    if (ldlt.info() != Eigen::Success) {
        throw SolveError("macro solve: factorization failed (singular system)");
    }
    {
        const Eigen::VectorXd& dvec = ldlt.vectorD();
        int bad = -1;
        for (int i = 0; i < dvec.size(); ++i) {
            if (!(dvec(i) > 0.0)) {
                bad = i;
                break;
            }
        }
        if (bad >= 0) {
            // Map the offending pivot back to a mesh DOF.
            const int perm = ldlt.permutationPinv().indices()(bad);
            int offending = -1;
            for (std::size_t dof = 0; dof < free_index_.size(); ++dof) {
                if (free_index_[dof] == perm) {
                    offending = static_cast<int>(dof);
                    break;
                }
            }
            throw SolveError("macro solve: nonpositive pivot at " +
                             (offending >= 0 ? describe_dof(offending)
                                             : std::string("unknown dof")));
        }
    }

    Eigen::VectorXd rhs_s = s.asDiagonal() * rhs;
    Eigen::VectorXd y = ldlt.solve(rhs_s);
    const double rhs_s_norm = rhs_s.norm();
    int refinements = 0;
    for (int it = 0; it < 3; ++it) {
        Eigen::VectorXd r = rhs_s - kff * y;
        if (r.norm() <= 1e-13 * std::max(rhs_s_norm, 1e-300)) {
            break;
        }
        y += ldlt.solve(r);
        ++refinements;
    }

    Solution sol;
    sol.refinement_steps = refinements;
    Eigen::VectorXd uf = s.asDiagonal() * y;
    Eigen::VectorXd ku = (kff * y).cwiseQuotient(s); // = K_ff u_f, physical
    const double rhs_norm = rhs.norm();
    sol.residual = rhs_norm > 0.0 ? (rhs - ku).norm() / rhs_norm : ku.norm();
    if (sol.residual > 1e-9) {
        std::ostringstream os;
        os << "macro solve: relative residual " << sol.residual
           << " exceeds 1e-9";
        throw SolveError(os.str());
    }
    sol.energy = 0.5 * uf.dot(ku);
    sol.load_work = 0.5 * rhs.dot(uf);

    MacroField field;
    field.mesh = mesh_;
    field.dofs.resize(mesh_->node_count() * kDofsPerNode);
    for (std::size_t dof = 0; dof < free_index_.size(); ++dof) {
        const int fi = free_index_[dof];
        if (fi >= 0) {
            field.dofs(static_cast<Eigen::Index>(dof)) = uf(fi);
        } else {
            field.dofs(static_cast<Eigen::Index>(dof)) =
                essential_values[static_cast<std::size_t>(
                    cons_index_[dof])];
        }
    }
    if (!field.dofs.allFinite()) {
        throw SolveError("macro solve: non-finite values in solution field");
    }
    sol.field = std::move(field);
    return sol;
}

MacroField assemble_and_solve(const MacroProblem& problem)
{
    MacroSystem system(problem.mesh, problem.essential);
    return system.solve(problem.c, problem.d, problem.loads).field;
}

MeasurementSet sample_top_surface(const MacroField& field)
{
    MeasurementSet set;
    for (int node : field.mesh->top_edge_nodes()) {
        const Eigen::Vector2d& p =
            field.mesh->nodes[static_cast<std::size_t>(node)];
        set.x.push_back(p.x());
        set.y.push_back(p.y());
        set.value.push_back(field.dof(node, 1, 0));
    }
    return set;
}

} // namespace msid
