#include "msid/micro_fem.hpp"

#include "msid/errors.hpp"
#include "msid/hash.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace msid {

namespace {

using Matrix8d = Eigen::Matrix<double, 8, 8>;
using BMatrix = Eigen::Matrix<double, 3, 8>;

// Bilinear quad on the unit square, nodes (0,0), (1,0), (1,1), (0,1),
// DOFs interleaved [u1, v1, ..., u4, v4].
BMatrix b_matrix_unit(double x, double y)
{
    const double dndx[4] = {-(1.0 - y), (1.0 - y), y, -y};
    const double dndy[4] = {-(1.0 - x), -x, x, (1.0 - x)};
    BMatrix b = BMatrix::Zero();
    for (int a = 0; a < 4; ++a) {
        b(0, 2 * a) = dndx[a];
        b(2, 2 * a) = dndy[a];
        b(1, 2 * a + 1) = dndy[a];
        b(2, 2 * a + 1) = dndx[a];
    }
    return b;
}

struct UnitQuadrature {
    std::array<Eigen::Vector2d, 4> g; // points in the unit square
    std::array<BMatrix, 4> b;
    BMatrix b_sum;                    // sum_q B_q

    UnitQuadrature()
    {
        const double lo = 0.5 - 0.5 / std::sqrt(3.0);
        const double hi = 0.5 + 0.5 / std::sqrt(3.0);
        g = {Eigen::Vector2d(lo, lo), Eigen::Vector2d(hi, lo),
             Eigen::Vector2d(hi, hi), Eigen::Vector2d(lo, hi)};
        b_sum.setZero();
        for (int q = 0; q < 4; ++q) {
            b[static_cast<std::size_t>(q)] =
                b_matrix_unit(g[static_cast<std::size_t>(q)].x(),
                              g[static_cast<std::size_t>(q)].y());
            b_sum += b[static_cast<std::size_t>(q)];
        }
    }
};

const UnitQuadrature& unit_quadrature()
{
    static const UnitQuadrature instance;
    return instance;
}

// Pixel stiffness for the given tangent; identical for every square pixel
// regardless of size (2D stiffness matrices are scale invariant).
Matrix8d pixel_stiffness(const Eigen::Matrix3d& c)
{
    const UnitQuadrature& uq = unit_quadrature();
    Matrix8d k = Matrix8d::Zero();
    for (int q = 0; q < 4; ++q) {
        const BMatrix& b = uq.b[static_cast<std::size_t>(q)];
        k.noalias() += 0.25 * (b.transpose() * c * b);
    }
    return k;
}

} // namespace

MicroMesh build_micro_mesh(const MaterialGrid& grid,
                           const IsotropicModuli& matrix,
                           const IsotropicModuli& pore)
{
    matrix.validate();
    pore.validate();
    if (grid.n < 1) {
        throw ParameterError("build_micro_mesh: empty grid");
    }
    return MicroMesh{grid, matrix, pore};
}

MicroSolver::MicroSolver(const MicroMesh& mesh)
{
    n_ = mesh.n();
    c_matrixphase_ = isotropic_c(mesh.matrix_moduli);
    c_porephase_ = isotropic_c(mesh.pore_moduli);

    const int nn = n_ + 1;
    const int n_nodes = nn * nn;
    const int n_dofs = 2 * n_nodes;
    auto node_of = [nn](int i, int j) { return j * nn + i; };

    free_index_.assign(static_cast<std::size_t>(n_dofs), -1);
    bnd_index_.assign(static_cast<std::size_t>(n_dofs), -1);
    n_free_ = 0;
    n_bnd_ = 0;
    for (int j = 0; j < nn; ++j) {
        for (int i = 0; i < nn; ++i) {
            const bool boundary = i == 0 || i == n_ || j == 0 || j == n_;
            for (int comp = 0; comp < 2; ++comp) {
                const int dof = 2 * node_of(i, j) + comp;
                if (boundary) {
                    bnd_index_[static_cast<std::size_t>(dof)] = n_bnd_++;
                } else {
                    free_index_[static_cast<std::size_t>(dof)] = n_free_++;
                }
            }
        }
    }

    const Matrix8d k_matrix = pixel_stiffness(c_matrixphase_);
    const Matrix8d k_pore = pixel_stiffness(c_porephase_);

    elem_pore_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0);
    std::vector<Eigen::Triplet<double>> tff;
    std::vector<Eigen::Triplet<double>> tfb;
    std::vector<Eigen::Triplet<double>> tbf;
    std::vector<Eigen::Triplet<double>> tbb;
    tff.reserve(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) * 64);
    for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
            const bool pore = mesh.grid.is_pore(i, j);
            elem_pore_[static_cast<std::size_t>(j) * static_cast<std::size_t>(n_) +
                       static_cast<std::size_t>(i)] = pore ? 1 : 0;
            const Matrix8d& ke = pore ? k_pore : k_matrix;
            const int nodes[4] = {node_of(i, j), node_of(i + 1, j),
                                  node_of(i + 1, j + 1), node_of(i, j + 1)};
            int dofs[8];
            for (int a = 0; a < 4; ++a) {
                dofs[2 * a] = 2 * nodes[a];
                dofs[2 * a + 1] = 2 * nodes[a] + 1;
            }
            for (int a = 0; a < 8; ++a) {
                const int ra = free_index_[static_cast<std::size_t>(dofs[a])];
                const int ba = bnd_index_[static_cast<std::size_t>(dofs[a])];
                for (int b = 0; b < 8; ++b) {
                    const int gb = dofs[b];
                    const int cb = free_index_[static_cast<std::size_t>(gb)];
                    if (ra >= 0) {
                        if (cb >= 0) {
                            tff.emplace_back(ra, cb, ke(a, b));
                        } else {
                            tfb.emplace_back(
                                ra, bnd_index_[static_cast<std::size_t>(gb)],
                                ke(a, b));
                        }
                    } else {
                        if (cb >= 0) {
                            tbf.emplace_back(ba, cb, ke(a, b));
                        } else {
                            tbb.emplace_back(
                                ba, bnd_index_[static_cast<std::size_t>(gb)],
                                ke(a, b));
                        }
                    }
                }
            }
        }
    }

    kff_.resize(n_free_, n_free_);
    kff_.setFromTriplets(tff.begin(), tff.end());
    kff_.makeCompressed();
    kfb_.resize(n_free_, n_bnd_);
    kfb_.setFromTriplets(tfb.begin(), tfb.end());
    kfb_.makeCompressed();
    kbf_.resize(n_bnd_, n_free_);
    kbf_.setFromTriplets(tbf.begin(), tbf.end());
    kbf_.makeCompressed();
    kbb_.resize(n_bnd_, n_bnd_);
    kbb_.setFromTriplets(tbb.begin(), tbb.end());
    kbb_.makeCompressed();

    // Equilibrate, fingerprint, factorize once. All subsequent solves
    // reuse this factorization.
    Eigen::VectorXd diag = kff_.diagonal();
    equilibration_.resize(n_free_);
    for (int i = 0; i < n_free_; ++i) {
        equilibration_(i) = diag(i) > 0.0 ? 1.0 / std::sqrt(diag(i)) : 1.0;
    }
    for (int col = 0; col < kff_.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(kff_, col); it; ++it) {
            it.valueRef() *= equilibration_(it.row()) * equilibration_(col);
        }
    }
    fingerprint_ = fnv1a64(kff_.valuePtr(),
                           static_cast<std::size_t>(kff_.nonZeros()) * sizeof(double));
    ldlt_.compute(kff_);
    if (ldlt_.info() != Eigen::Success) {
        throw SolveError("micro solve: factorization failed (singular system; "
                         "pore contrast too extreme?)");
    }
    for (int i = 0; i < ldlt_.vectorD().size(); ++i) {
        if (!(ldlt_.vectorD()(i) > 0.0)) {
            throw SolveError("micro solve: nonpositive pivot in RVE stiffness");
        }
    }
}

std::uint64_t MicroSolver::stiffness_fingerprint() const
{
    return fnv1a64(kff_.valuePtr(),
                   static_cast<std::size_t>(kff_.nonZeros()) * sizeof(double));
}

RveSolution MicroSolver::solve(const MacroStrainState& state,
                               double edge_length) const
{
    if (!(edge_length > 0.0)) {
        throw ParameterError("MicroSolver::solve: edge_length must be positive");
    }
    const int nn = n_ + 1;

    // Prescribed boundary displacements at physical coordinates.
    Eigen::VectorXd ub(n_bnd_);
    for (int j = 0; j < nn; ++j) {
        for (int i = 0; i < nn; ++i) {
            const int dof_u = 2 * (j * nn + i);
            const int bi = bnd_index_[static_cast<std::size_t>(dof_u)];
            if (bi < 0) {
                continue;
            }
            const Eigen::Vector2d x = edge_length * node_coord(i, j);
            for (int comp = 0; comp < 2; ++comp) {
                double val = state.eps(comp, 0) * x(0) + state.eps(comp, 1) * x(1);
                for (int k = 0; k < 2; ++k) {
                    const Eigen::Matrix2d& ek =
                        state.eta[static_cast<std::size_t>(k)];
                    val += 0.5 * x(k) * (ek(comp, 0) * x(0) + ek(comp, 1) * x(1));
                }
                ub(bnd_index_[static_cast<std::size_t>(dof_u + comp)]) = val;
            }
        }
    }

    Eigen::VectorXd rhs = -(kfb_ * ub);
    Eigen::VectorXd rhs_s = equilibration_.asDiagonal() * rhs;
    Eigen::VectorXd y = ldlt_.solve(rhs_s);
    const double rhs_s_norm = rhs_s.norm();
    for (int it = 0; it < 3; ++it) {
        Eigen::VectorXd r = rhs_s - kff_ * y;
        if (r.norm() <= 1e-13 * std::max(rhs_s_norm, 1e-300)) {
            break;
        }
        y += ldlt_.solve(r);
    }
    const Eigen::VectorXd ku = (kff_ * y).cwiseQuotient(equilibration_);
    const double rhs_norm = rhs.norm();
    const double residual =
        rhs_norm > 0.0 ? (rhs - ku).norm() / rhs_norm : ku.norm();
    if (residual > 1e-9) {
        std::ostringstream os;
        os << "micro solve: relative residual " << residual << " exceeds 1e-9";
        throw SolveError(os.str());
    }

    RveSolution sol;
    sol.edge_length = edge_length;
    sol.u.resize(2 * nn * nn);
    const Eigen::VectorXd uf = equilibration_.asDiagonal() * y;
    for (std::size_t dof = 0; dof < free_index_.size(); ++dof) {
        const int fi = free_index_[dof];
        sol.u(static_cast<Eigen::Index>(dof)) =
            fi >= 0 ? uf(fi) : ub(bnd_index_[dof]);
    }
    ++solve_count_;
    return sol;
}

Eigen::Vector3d MicroSolver::average_stress(const RveSolution& sol) const
{
    const UnitQuadrature& uq = unit_quadrature();
    const int nn = n_ + 1;
    Eigen::Vector3d acc_matrix = Eigen::Vector3d::Zero();
    Eigen::Vector3d acc_pore = Eigen::Vector3d::Zero();
    Eigen::Matrix<double, 8, 1> ue;
    for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
            const int nodes[4] = {j * nn + i, j * nn + i + 1,
                                  (j + 1) * nn + i + 1, (j + 1) * nn + i};
            for (int a = 0; a < 4; ++a) {
                ue(2 * a) = sol.u(2 * nodes[a]);
                ue(2 * a + 1) = sol.u(2 * nodes[a] + 1);
            }
            const Eigen::Vector3d e = uq.b_sum * ue;
            if (elem_pore_[static_cast<std::size_t>(j) *
                               static_cast<std::size_t>(n_) +
                           static_cast<std::size_t>(i)]) {
                acc_pore += e;
            } else {
                acc_matrix += e;
            }
        }
    }
    const double scale = 1.0 / (4.0 * n_ * sol.edge_length);
    return scale * (c_matrixphase_ * acc_matrix + c_porephase_ * acc_pore);
}

Vector6d MicroSolver::average_moment_stress(const RveSolution& sol) const
{
    const int nn = n_ + 1;
    Eigen::VectorXd uf(n_free_);
    Eigen::VectorXd ub(n_bnd_);
    for (std::size_t dof = 0; dof < free_index_.size(); ++dof) {
        const int fi = free_index_[dof];
        if (fi >= 0) {
            uf(fi) = sol.u(static_cast<Eigen::Index>(dof));
        } else {
            ub(bnd_index_[dof]) = sol.u(static_cast<Eigen::Index>(dof));
        }
    }
    const Eigen::VectorXd reactions = kbf_ * uf + kbb_ * ub;

    // Pair the reactions with the boundary values of each unit-mode
    // quadratic; interior rows are equilibrated and contribute nothing.
    Vector6d t = Vector6d::Zero();
    const double volume = sol.edge_length * sol.edge_length;
    for (int j = 0; j < nn; ++j) {
        for (int i = 0; i < nn; ++i) {
            const int dof_u = 2 * (j * nn + i);
            const int bi = bnd_index_[static_cast<std::size_t>(dof_u)];
            if (bi < 0) {
                continue;
            }
            const Eigen::Vector2d x = sol.edge_length * node_coord(i, j);
            for (int m = 0; m < 6; ++m) {
                const int k = m / 3;
                const int row = m % 3;
                // q_i = 1/2 eta_kij x_k x_j for the unit Voigt mode m; the
                // shear rows carry eta_k12 = eta_k21 = 1/2.
                double qi[2] = {0.0, 0.0};
                if (row == 0) {
                    qi[0] = 0.5 * x(k) * x(0);
                } else if (row == 1) {
                    qi[1] = 0.5 * x(k) * x(1);
                } else {
                    qi[0] = 0.25 * x(k) * x(1);
                    qi[1] = 0.25 * x(k) * x(0);
                }
                t(m) += qi[0] * reactions(bi) + qi[1] * reactions(bi + 1);
            }
        }
    }
    return t / volume;
}

} // namespace msid
