#include "msid/inverse.hpp"

#include "msid/errors.hpp"
#include "msid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>

namespace msid {

std::vector<double> corrupt(const std::vector<double>& u, double gamma,
                            std::uint64_t seed)
{
    if (gamma < 0.0) {
        throw ParameterError("corrupt: gamma must be >= 0");
    }
    std::mt19937_64 gen(seed);
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        out[i] = u[i] * (1.0 + gamma * uniform_symmetric(gen));
    }
    return out;
}

const char* to_string(Termination t)
{
    switch (t) {
    case Termination::ObjectiveTolerance:
        return "objective_tolerance";
    case Termination::GradientTolerance:
        return "gradient_tolerance";
    case Termination::MaxIterations:
        return "max_iterations";
    case Termination::LineSearchFailure:
        return "line_search_failure";
    }
    return "unknown";
}

Eigen::VectorXd fd_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& steps, double f_at_x,
                            int threads)
{
    const Eigen::Index n = x.size();
    if (steps.size() != n) {
        throw ParameterError("fd_gradient: step count mismatch");
    }
    Eigen::VectorXd g(n);
    auto eval_component = [&](Eigen::Index k) {
        Eigen::VectorXd xk = x;
        xk(k) += steps(k);
        return (f(xk) - f_at_x) / steps(k);
    };
    if (threads <= 1 || n <= 1) {
        for (Eigen::Index k = 0; k < n; ++k) {
            g(k) = eval_component(k);
        }
        return g;
    }
    std::vector<std::future<double>> futures;
    futures.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        futures.push_back(
            std::async(std::launch::async, eval_component, k));
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        g(k) = futures[static_cast<std::size_t>(k)].get();
    }
    return g;
}

namespace {

Eigen::VectorXd project_bounds(Eigen::VectorXd z, const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper)
{
    if (lower.size() == z.size()) {
        z = z.cwiseMax(lower);
    }
    if (upper.size() == z.size()) {
        z = z.cwiseMin(upper);
    }
    return z;
}

} // namespace

OptimResult minimize(const ObjectiveFn& f, const GradientFn& g,
                     const Eigen::VectorXd& x0, const MinimizeOptions& options)
{
    const Eigen::Index n = x0.size();

    // Normalize by the initial guess so step lengths and gradient norms are
    // comparable across parameters of different physical scale.
    Eigen::VectorXd scale(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        scale(k) = std::abs(x0(k)) > 0.0 ? std::abs(x0(k)) : 1.0;
    }
    Eigen::VectorXd lower_z;
    Eigen::VectorXd upper_z;
    if (options.lower.size() == n) {
        lower_z = options.lower.cwiseQuotient(scale);
    }
    if (options.upper.size() == n) {
        upper_z = options.upper.cwiseQuotient(scale);
    }

    auto to_x = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
        return z.cwiseProduct(scale);
    };

    Eigen::VectorXd z = project_bounds(x0.cwiseQuotient(scale), lower_z, upper_z);
    double fz = f(to_x(z));
    if (!std::isfinite(fz)) {
        throw ObjectiveError("minimize: objective not finite at x0");
    }

    OptimResult result;
    auto record = [&](int iter, double fval, double gnorm, double step) {
        OptimRecord rec;
        rec.iteration = iter;
        rec.x = to_x(z);
        rec.objective = fval;
        rec.gradient_norm = gnorm;
        rec.step_length = step;
        result.history.push_back(rec);
        if (options.observer) {
            options.observer(rec);
        }
    };

    auto finish = [&](Termination why, int iterations) {
        result.x = to_x(z);
        result.objective = fz;
        result.iterations = iterations;
        result.termination = why;
        return result;
    };

    if (fz < options.tol_f) {
        record(0, fz, 0.0, 0.0);
        return finish(Termination::ObjectiveTolerance, 0);
    }

    Eigen::VectorXd gz = g(to_x(z), fz).cwiseProduct(scale);
    const double g0norm = std::max(gz.lpNorm<Eigen::Infinity>(), 1e-300);
    record(0, fz, gz.lpNorm<Eigen::Infinity>(), 0.0);
    if (gz.lpNorm<Eigen::Infinity>() == 0.0) {
        return finish(Termination::GradientTolerance, 0);
    }

    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n); // inverse Hessian

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        Eigen::VectorXd dir = -(h * gz);
        if (dir.dot(gz) >= 0.0) {
            h.setIdentity();
            dir = -gz;
        }

        double t = 1.0;
        bool accepted = false;
        Eigen::VectorXd z_new;
        double f_new = 0.0;
        for (int bt = 0; bt <= options.max_backtracks; ++bt) {
            z_new = project_bounds(z + t * dir, lower_z, upper_z);
            const Eigen::VectorXd step = z_new - z;
            const double m = gz.dot(step);
            if (m < 0.0) {
                bool ok = true;
                double ftrial = 0.0;
                try {
                    ftrial = f(to_x(z_new));
                } catch (const ObjectiveError&) {
                    ok = false;
                }
                if (ok && std::isfinite(ftrial) &&
                    ftrial <= fz + options.armijo_c * m) {
                    accepted = true;
                    f_new = ftrial;
                    break;
                }
            }
            t *= options.backtrack_shrink;
        }
        if (!accepted) {
            return finish(Termination::LineSearchFailure, iter - 1);
        }

        const Eigen::VectorXd s = z_new - z;
        z = z_new;
        fz = f_new;

        if (fz < options.tol_f) {
            record(iter, fz, 0.0, t);
            return finish(Termination::ObjectiveTolerance, iter);
        }

        Eigen::VectorXd gz_new = g(to_x(z), fz).cwiseProduct(scale);
        const Eigen::VectorXd yv = gz_new - gz;
        gz = gz_new;
        const double gnorm = gz.lpNorm<Eigen::Infinity>();
        record(iter, fz, gnorm, t);

        if (gnorm / g0norm < options.tol_rel_grad) {
            return finish(Termination::GradientTolerance, iter);
        }

        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = h * yv;
            // BFGS inverse update.
            h -= rho * (s * hy.transpose() + hy * s.transpose());
            h += rho * rho * (yv.dot(hy)) * (s * s.transpose());
            h += rho * (s * s.transpose());
        }
    }
    return finish(Termination::MaxIterations, options.max_iterations);
}

Psi1Objective::Psi1Objective(std::shared_ptr<const MacroSystem> system,
                             std::vector<PointLoad> loads, MeasurementSet data)
    : system_(std::move(system)), loads_(std::move(loads))
{
    const std::vector<int> top = system_->mesh().top_edge_nodes();
    if (data.size() != top.size()) {
        std::ostringstream os;
        os << "Psi1Objective: " << data.size() << " measurements for "
           << top.size() << " top-surface nodes";
        throw ParameterError(os.str());
    }
    // Canonical order: increasing x. Measurement files may arrive shuffled.
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data.x[a] < data.x[b];
    });
    u_exp_.resize(data.size());
    const double tol = 1e-6 * std::max(system_->mesh().length, 1.0);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t src = order[k];
        const double node_x =
            system_->mesh().nodes[static_cast<std::size_t>(top[k])].x();
        if (std::abs(data.x[src] - node_x) > tol) {
            throw ParameterError(
                "Psi1Objective: measurement locations do not match the mesh "
                "top surface");
        }
        u_exp_[k] = data.value[src];
    }
    norm2_ = 0.0;
    for (double v : u_exp_) {
        norm2_ += v * v;
    }
    if (!(norm2_ > 0.0)) {
        throw ParameterError("Psi1Objective: measurement norm must be nonzero");
    }
}

double Psi1Objective::operator()(const Alpha& alpha) const
{
    if (!alpha.valid()) {
        throw ObjectiveError("psi1: invalid alpha");
    }
    const GradientModuli m = alpha.moduli();
    const CMatrix c = isotropic_c(m.classical());
    const DMatrix d = gradient_d(m);
    MeasurementSet sim;
    try {
        const MacroSystem::Solution sol = system_->solve(c, d, loads_);
        sim = sample_top_surface(sol.field);
    } catch (const SolveError& e) {
        throw ObjectiveError(std::string("psi1: ") + e.what());
    }
    double misfit2 = 0.0;
    for (std::size_t k = 0; k < u_exp_.size(); ++k) {
        const double r = sim.value[k] - u_exp_[k];
        misfit2 += r * r;
    }
    return 0.5 * misfit2 / norm2_;
}

Psi2Objective::Psi2Objective(CMatrix c_eff, DMatrix d_eff,
                             MicroIngredients ingredients,
                             std::shared_ptr<HomogenizerCache> cache)
    : c_eff_(std::move(c_eff)), d_eff_(std::move(d_eff)),
      ingredients_(std::move(ingredients)), cache_(std::move(cache))
{
    c_norm2_ = c_eff_.squaredNorm();
    d_norm2_ = d_eff_.squaredNorm();
    if (!(c_norm2_ > 0.0) || !(d_norm2_ > 0.0)) {
        throw ParameterError("Psi2Objective: target C and D must be nonzero");
    }
}

RveSpec Psi2Objective::spec_for(const Beta& beta) const
{
    RveSpec spec;
    spec.phi = beta.phi;
    spec.vf = beta.vf;
    spec.size_factor = ingredients_.size_factor;
    spec.raster_n = ingredients_.raster_n;
    spec.seed = ingredients_.seed;
    return spec;
}

double Psi2Objective::operator()(const Beta& beta) const
{
    if (!beta.valid()) {
        throw ObjectiveError("psi2: invalid beta");
    }
    Tangents t;
    try {
        t = homogenize(spec_for(beta), ingredients_.matrix, ingredients_.pore,
                       cache_.get());
    } catch (const PackingError& e) {
        throw ObjectiveError(std::string("psi2: ") + e.what());
    } catch (const SolveError& e) {
        throw ObjectiveError(std::string("psi2: ") + e.what());
    } catch (const ParameterError& e) {
        throw ObjectiveError(std::string("psi2: ") + e.what());
    }
    return 0.5 * (t.c - c_eff_).squaredNorm() / c_norm2_ +
           0.5 * (t.d - d_eff_).squaredNorm() / d_norm2_;
}

OptimResult identify_macro(const Psi1Objective& psi1, const Alpha& guess,
                           const Stage1Options& options)
{
    const ObjectiveFn f = [&psi1](const Eigen::VectorXd& x) {
        return psi1(x);
    };
    const int threads = options.threads;
    const double rel = options.fd_relative_step;
    const GradientFn grad = [&f, rel, threads](const Eigen::VectorXd& x,
                                               double f_at_x) {
        Eigen::VectorXd steps(x.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            steps(k) = rel * std::max(std::abs(x(k)), 1e-12);
        }
        return fd_gradient(f, x, steps, f_at_x, threads);
    };
    return minimize(f, grad, guess.vec(), options.minimize);
}

OptimResult identify_micro(const Alpha& alpha,
                           const MicroIngredients& ingredients,
                           const Beta& guess, const Stage2Options& options)
{
    if (!alpha.valid()) {
        throw ParameterError("identify_micro: invalid alpha");
    }
    const GradientModuli m = alpha.moduli();
    const CMatrix c_eff = isotropic_c(m.classical());
    const DMatrix d_eff = gradient_d(m);

    auto cache = std::make_shared<HomogenizerCache>(2);
    const Psi2Objective psi2(c_eff, d_eff, ingredients, cache);

    const ObjectiveFn f = [&psi2](const Eigen::VectorXd& x) {
        return psi2(x);
    };
    const int threads = options.threads;
    const double phi_rel = options.fd_phi_step_rel;
    const double vf_step = options.fd_vf_step;
    const GradientFn grad = [&f, phi_rel, vf_step, threads](
                                const Eigen::VectorXd& x, double f_at_x) {
        Eigen::VectorXd steps(2);
        steps(0) = phi_rel * x(0);
        steps(1) = vf_step;
        return fd_gradient(f, x, steps, f_at_x, threads);
    };

    MinimizeOptions mopts = options.minimize;
    std::vector<std::string> snapshots;
    if (options.record_snapshots) {
        auto inner = mopts.observer;
        mopts.observer = [&snapshots, &psi2, inner](const OptimRecord& rec) {
            const Beta beta = Beta::from_vec(rec.x);
            const RveSpec spec = psi2.spec_for(beta);
            const CircleSet circles = rsa_pack(spec);
            const MaterialGrid grid =
                rasterize(circles, spec.raster_n, spec.edge_length());
            snapshots.push_back(export_image(grid));
            if (inner) {
                inner(rec);
            }
        };
    }

    OptimResult result = minimize(f, grad, guess.vec(), mopts);
    result.rve_snapshots = std::move(snapshots);
    return result;
}

} // namespace msid
