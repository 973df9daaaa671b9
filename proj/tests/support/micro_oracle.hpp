#pragma once

// Independent RVE oracle: isoparametric Q4 elements in physical
// coordinates, dense LDLT, fully prescribed boundary displacements.
// Deliberately avoids the normalized-assembly path of the implementation.

#include "msid/micro_fem.hpp"
#include "msid/rve.hpp"
#include "msid/voigt.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace msid_test {

struct OracleResult {
    Eigen::Vector3d sigma_bar;
    msid::Vector6d tau_bar;
};

inline OracleResult dense_kubc_oracle(const msid::MaterialGrid& grid,
                                      const msid::IsotropicModuli& matrix,
                                      const msid::IsotropicModuli& pore,
                                      const msid::MacroStrainState& state)
{
    const int n = grid.n;
    const double edge = grid.edge_length;
    const double h = edge / n;
    const int nn = n + 1;
    const int n_dofs = 2 * nn * nn;

    auto coord = [&](int i, int j) {
        return Eigen::Vector2d((static_cast<double>(i) / n - 0.5) * edge,
                               (static_cast<double>(j) / n - 0.5) * edge);
    };
    auto prescribed = [&](const Eigen::Vector2d& x, int comp) {
        double val = state.eps(comp, 0) * x(0) + state.eps(comp, 1) * x(1);
        for (int k = 0; k < 2; ++k) {
            val += 0.5 * x(k) *
                   (state.eta[static_cast<std::size_t>(k)](comp, 0) * x(0) +
                    state.eta[static_cast<std::size_t>(k)](comp, 1) * x(1));
        }
        return val;
    };

    const msid::CMatrix c_mat = msid::isotropic_c(matrix);
    const msid::CMatrix c_por = msid::isotropic_c(pore);

    // Isoparametric Q4, 2x2 Gauss on [-1, 1]^2.
    const double g = 1.0 / std::sqrt(3.0);
    const double gauss[4][2] = {{-g, -g}, {g, -g}, {g, g}, {-g, g}};
    auto b_at = [&](double xi, double etaq) {
        // dN/dxi, dN/deta for nodes (-1,-1), (1,-1), (1,1), (-1,1)
        const double dxi[4] = {-(1 - etaq) / 4, (1 - etaq) / 4, (1 + etaq) / 4,
                               -(1 + etaq) / 4};
        const double deta[4] = {-(1 - xi) / 4, -(1 + xi) / 4, (1 + xi) / 4,
                                (1 - xi) / 4};
        // Square element: J = (h/2) I.
        Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
        for (int a = 0; a < 4; ++a) {
            const double dx = dxi[a] * 2.0 / h;
            const double dy = deta[a] * 2.0 / h;
            b(0, 2 * a) = dx;
            b(2, 2 * a) = dy;
            b(1, 2 * a + 1) = dy;
            b(2, 2 * a + 1) = dx;
        }
        return b;
    };

    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n_dofs, n_dofs);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const msid::CMatrix& c = grid.is_pore(i, j) ? c_por : c_mat;
            const int nodes[4] = {j * nn + i, j * nn + i + 1,
                                  (j + 1) * nn + i + 1, (j + 1) * nn + i};
            Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
            for (const auto& q : gauss) {
                const auto b = b_at(q[0], q[1]);
                ke.noalias() += (h * h / 4.0) * (b.transpose() * c * b);
            }
            for (int a = 0; a < 8; ++a) {
                for (int bb = 0; bb < 8; ++bb) {
                    k(2 * nodes[a / 2] + a % 2, 2 * nodes[bb / 2] + bb % 2) +=
                        ke(a, bb);
                }
            }
        }
    }

    std::vector<bool> is_bnd(static_cast<std::size_t>(nn * nn), false);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n_dofs);
    for (int j = 0; j < nn; ++j) {
        for (int i = 0; i < nn; ++i) {
            if (i == 0 || i == n || j == 0 || j == n) {
                is_bnd[static_cast<std::size_t>(j * nn + i)] = true;
                for (int comp = 0; comp < 2; ++comp) {
                    u(2 * (j * nn + i) + comp) = prescribed(coord(i, j), comp);
                }
            }
        }
    }

    std::vector<int> free_ids;
    for (int node = 0; node < nn * nn; ++node) {
        if (!is_bnd[static_cast<std::size_t>(node)]) {
            free_ids.push_back(2 * node);
            free_ids.push_back(2 * node + 1);
        }
    }
    const int nf = static_cast<int>(free_ids.size());
    Eigen::MatrixXd kff(nf, nf);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    for (int a = 0; a < nf; ++a) {
        double acc = 0.0;
        for (int dof = 0; dof < n_dofs; ++dof) {
            acc += k(free_ids[static_cast<std::size_t>(a)], dof) * u(dof);
        }
        rhs(a) = -acc;
        for (int b = 0; b < nf; ++b) {
            kff(a, b) = k(free_ids[static_cast<std::size_t>(a)],
                          free_ids[static_cast<std::size_t>(b)]);
        }
    }
    const Eigen::VectorXd uf = Eigen::LDLT<Eigen::MatrixXd>(kff).solve(rhs);
    for (int a = 0; a < nf; ++a) {
        u(free_ids[static_cast<std::size_t>(a)]) += uf(a);
    }

    OracleResult out;
    out.sigma_bar.setZero();
    out.tau_bar.setZero();
    const double volume = edge * edge;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const msid::CMatrix& c = grid.is_pore(i, j) ? c_por : c_mat;
            const int nodes[4] = {j * nn + i, j * nn + i + 1,
                                  (j + 1) * nn + i + 1, (j + 1) * nn + i};
            Eigen::Matrix<double, 8, 1> ue;
            for (int a = 0; a < 4; ++a) {
                ue(2 * a) = u(2 * nodes[a]);
                ue(2 * a + 1) = u(2 * nodes[a] + 1);
            }
            for (const auto& q : gauss) {
                const auto b = b_at(q[0], q[1]);
                const Eigen::Vector3d s = c * (b * ue);
                out.sigma_bar += (h * h / 4.0) * s;
            }
        }
    }
    out.sigma_bar /= volume;

    // Moment stress: pair the dense reactions with the unit-mode boundary
    // quadratics (the work-conjugate definition).
    const Eigen::VectorXd reactions = k * u;
    for (int m = 0; m < 6; ++m) {
        msid::Vector6d hm = msid::Vector6d::Zero();
        hm(m) = 1.0;
        const msid::GradTensor eta_m = msid::strain_gradient_from_voigt(hm);
        double acc = 0.0;
        for (int j = 0; j < nn; ++j) {
            for (int i = 0; i < nn; ++i) {
                if (!is_bnd[static_cast<std::size_t>(j * nn + i)]) {
                    continue;
                }
                const Eigen::Vector2d x = coord(i, j);
                for (int comp = 0; comp < 2; ++comp) {
                    double q = 0.0;
                    for (int kk = 0; kk < 2; ++kk) {
                        q += 0.5 * x(kk) *
                             (eta_m[static_cast<std::size_t>(kk)](comp, 0) * x(0) +
                              eta_m[static_cast<std::size_t>(kk)](comp, 1) * x(1));
                    }
                    acc += q * reactions(2 * (j * nn + i) + comp);
                }
            }
        }
        out.tau_bar(m) = acc / volume;
    }
    return out;
}

} // namespace msid_test
