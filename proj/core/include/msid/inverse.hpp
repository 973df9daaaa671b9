#pragma once

#include "msid/homogenizer.hpp"
#include "msid/macro_solver.hpp"
#include "msid/measurement.hpp"
#include "msid/voigt.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace msid {

// Stage-1 parameter vector: effective Lame constants and length scale.
struct Alpha {
    double lambda = 0.0; // GPa
    double mu = 0.0;     // GPa
    double l = 0.0;      // mm

    bool valid() const { return lambda > 0.0 && mu > 0.0 && l > 0.0; }
    GradientModuli moduli() const { return {lambda, mu, l}; }
    Eigen::Vector3d vec() const { return {lambda, mu, l}; }
    static Alpha from_vec(const Eigen::VectorXd& x)
    {
        return {x(0), x(1), x(2)};
    }
};

// Stage-2 parameter vector: pore diameter and volume fraction.
struct Beta {
    double phi = 0.0; // mm
    double vf = 0.0;

    bool valid() const { return phi > 0.0 && vf > 0.0 && vf < 0.5; }
    Eigen::Vector2d vec() const { return {phi, vf}; }
    static Beta from_vec(const Eigen::VectorXd& x) { return {x(0), x(1)}; }
};

// u_i (1 + gamma r_i) with r_i drawn uniformly from [-1, 1] in index
// order from a seeded generator. gamma = 0 reproduces the input bitwise.
std::vector<double> corrupt(const std::vector<double>& u, double gamma,
                            std::uint64_t seed);

enum class Termination {
    ObjectiveTolerance,
    GradientTolerance,
    MaxIterations,
    LineSearchFailure,
};
const char* to_string(Termination t);

struct OptimRecord {
    int iteration = 0;
    Eigen::VectorXd x; // physical units
    double objective = 0.0;
    double gradient_norm = 0.0; // inf-norm in normalized coordinates
    double step_length = 0.0;
};

struct OptimResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    std::vector<OptimRecord> history; // accepted iterates, starting at 0
    int iterations = 0;
    Termination termination = Termination::MaxIterations;
    std::vector<std::string> rve_snapshots; // PGM bytes (stage 2 only)
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
// Called at accepted iterates with the objective value already in hand.
using GradientFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double f_at_x)>;

struct MinimizeOptions {
    double tol_f = 1e-10;
    double tol_rel_grad = 1e-6; // vs the initial normalized gradient
    int max_iterations = 100;
    double armijo_c = 1e-4;
    double backtrack_shrink = 0.5;
    int max_backtracks = 25;
    Eigen::VectorXd lower; // empty = unbounded
    Eigen::VectorXd upper;
    std::function<void(const OptimRecord&)> observer;
};

// Forward differences (f(x + d_k e_k) - f(x)) / d_k. Evaluations for the
// k parameters are independent and run on up to `threads` workers; the
// result does not depend on the thread count.
Eigen::VectorXd fd_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& steps, double f_at_x,
                            int threads = 1);

// Quasi-Newton (BFGS) minimization with Armijo backtracking on parameters
// normalized by the initial guess, with bound projection. Trial points
// where the objective throws ObjectiveError are treated as rejected line
// search steps. The recorded objective history never increases.
OptimResult minimize(const ObjectiveFn& f, const GradientFn& g,
                     const Eigen::VectorXd& x0, const MinimizeOptions& options);

// Stage-1 objective: Psi1 = 1/2 ||sampled u(alpha) - u_exp||^2 / ||u_exp||^2.
// The measurement set is matched to the mesh top surface by x location, so
// sample ordering is immaterial.
class Psi1Objective {
public:
    Psi1Objective(std::shared_ptr<const MacroSystem> system,
                  std::vector<PointLoad> loads, MeasurementSet data);

    double operator()(const Alpha& alpha) const;
    double operator()(const Eigen::VectorXd& x) const
    {
        return (*this)(Alpha::from_vec(x));
    }

    const MacroSystem& system() const { return *system_; }
    const std::vector<PointLoad>& loads() const { return loads_; }

private:
    std::shared_ptr<const MacroSystem> system_;
    std::vector<PointLoad> loads_;
    std::vector<double> u_exp_; // ordered by increasing x
    double norm2_ = 0.0;
};

struct MicroIngredients {
    IsotropicModuli matrix;
    IsotropicModuli pore;
    double size_factor = 10.0;
    int raster_n = 200;
    std::uint64_t seed = 0; // one fixed RVE seed for the whole optimization
};

// Stage-2 objective:
// Psi2 = 1/2 ||C(b)-C_eff||_F^2 / ||C_eff||_F^2
//      + 1/2 ||D(b)-D_eff||_F^2 / ||D_eff||_F^2.
class Psi2Objective {
public:
    Psi2Objective(CMatrix c_eff, DMatrix d_eff, MicroIngredients ingredients,
                  std::shared_ptr<HomogenizerCache> cache = nullptr);

    double operator()(const Beta& beta) const;
    double operator()(const Eigen::VectorXd& x) const
    {
        return (*this)(Beta::from_vec(x));
    }

    RveSpec spec_for(const Beta& beta) const;
    const MicroIngredients& ingredients() const { return ingredients_; }

private:
    CMatrix c_eff_;
    DMatrix d_eff_;
    MicroIngredients ingredients_;
    std::shared_ptr<HomogenizerCache> cache_;
    double c_norm2_ = 0.0;
    double d_norm2_ = 0.0;
};

struct Stage1Options {
    MinimizeOptions minimize;
    double fd_relative_step = 1e-3;
    int threads = 1;

    Stage1Options()
    {
        minimize.max_iterations = 100;
        minimize.lower = Eigen::Vector3d(1e-3, 1e-3, 1e-4);
    }
};

OptimResult identify_macro(const Psi1Objective& psi1, const Alpha& guess,
                           const Stage1Options& options = {});

struct Stage2Options {
    MinimizeOptions minimize;
    double fd_phi_step_rel = 0.05;
    double fd_vf_step = 0.01;
    int threads = 1;
    bool record_snapshots = true;

    Stage2Options()
    {
        minimize.max_iterations = 50;
        minimize.lower = Eigen::Vector2d(0.01, 0.005);
        minimize.upper = Eigen::Vector2d(
            std::numeric_limits<double>::infinity(), 0.45);
    }
};

// Builds C_eff = isotropic_c(alpha), D_eff = gradient_d(alpha) and inverts
// the homogenizer for beta. Snapshots of the optimizer's RVE are recorded
// per accepted iterate.
OptimResult identify_micro(const Alpha& alpha,
                           const MicroIngredients& ingredients,
                           const Beta& guess,
                           const Stage2Options& options = {});

} // namespace msid
