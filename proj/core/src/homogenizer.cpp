#include "msid/homogenizer.hpp"

#include "msid/errors.hpp"
#include "msid/hash.hpp"

#include <cmath>

namespace msid {

namespace {

std::uint64_t mesh_key(const MicroMesh& mesh)
{
    std::uint64_t h = fnv1a64(mesh.grid.pore.data(), mesh.grid.pore.size());
    const double moduli[4] = {mesh.matrix_moduli.lambda, mesh.matrix_moduli.mu,
                              mesh.pore_moduli.lambda, mesh.pore_moduli.mu};
    h = fnv1a64(moduli, sizeof(moduli), h);
    const int n = mesh.n();
    return fnv1a64(&n, sizeof(n), h);
}

} // namespace

std::shared_ptr<const MicroSolver> HomogenizerCache::get_or_build(
    const MicroMesh& mesh)
{
    const std::uint64_t key = mesh_key(mesh);
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto it = lru_.begin(); it != lru_.end(); ++it) {
        if (it->first == key) {
            lru_.splice(lru_.begin(), lru_, it);
            ++hits_;
            return lru_.front().second;
        }
    }
    auto solver = std::make_shared<const MicroSolver>(mesh);
    ++builds_;
    lru_.emplace_front(key, solver);
    while (lru_.size() > capacity_) {
        lru_.pop_back();
    }
    return solver;
}

Tangents homogenize(const RveSpec& spec, const IsotropicModuli& matrix,
                    const IsotropicModuli& pore, HomogenizerCache* cache)
{
    spec.validate();
    const CircleSet circles = rsa_pack(spec);
    const MaterialGrid grid = rasterize(circles, spec.raster_n, spec.edge_length());
    const MicroMesh mesh = build_micro_mesh(grid, matrix, pore);

    std::shared_ptr<const MicroSolver> solver =
        cache ? cache->get_or_build(mesh)
              : std::make_shared<const MicroSolver>(mesh);

    const double edge = spec.edge_length();
    Tangents t;
    for (int m = 0; m < 3; ++m) {
        MacroStrainState state;
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(m) = 1.0;
        state.eps = strain_from_voigt(e);
        const RveSolution sol = solver->solve(state, edge);
        t.c.col(m) = solver->average_stress(sol);
    }
    for (int m = 0; m < 6; ++m) {
        MacroStrainState state;
        Vector6d h = Vector6d::Zero();
        h(m) = 1.0;
        state.eta = strain_gradient_from_voigt(h);
        const RveSolution sol = solver->solve(state, edge);
        t.d.col(m) = solver->average_moment_stress(sol);
        t.coupling.col(m) = solver->average_stress(sol);
    }
    return t;
}

LengthScaleFit extract_length_scale(const Tangents& t)
{
    DMatrix g = DMatrix::Zero();
    g.block<3, 3>(0, 0) = t.c;
    g.block<3, 3>(3, 3) = t.c;

    const double gg = g.squaredNorm();
    const double dnorm = t.d.norm();
    LengthScaleFit fit;
    if (gg <= 0.0) {
        fit.relative_residual = dnorm > 0.0 ? 1.0 : 0.0;
        return fit;
    }
    const double l2 = std::max(0.0, t.d.cwiseProduct(g).sum() / gg);
    fit.l = std::sqrt(l2);
    fit.relative_residual =
        dnorm > 0.0 ? (t.d - l2 * g).norm() / dnorm : 0.0;
    return fit;
}

} // namespace msid
