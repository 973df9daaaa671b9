#pragma once

#include "msid/inverse.hpp"
#include "msid/macro_solver.hpp"
#include "msid/rve.hpp"
#include "msid/voigt.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace msid {

// All defaults reproduce the reference cantilever experiment: an aluminum
// beam with L/H = 3, H = 10 mm on a 75x25 grid under a 1 kN tip load, a
// porous microstructure with 0.3 mm pores at 15% volume fraction, and 5%
// measurement noise. An empty JSON config {} runs exactly that scenario.

struct BeamConfig {
    double length = 30.0; // mm
    double depth = 10.0;  // mm
    int nx = 75;
    int ny = 25;
    double load_kn = 1.0;
    std::string load_location = "mid-depth"; // mid-depth|top-corner|bottom-corner
};

struct MaterialConfig {
    double youngs_gpa = 70.0;
    double poisson = 0.3;
    double pore_contrast = 1e-6; // E_pore / E_matrix, same Poisson ratio
};

struct ReferenceMicroConfig {
    double phi = 0.3; // mm
    double vf = 0.15;
    double size_factor = 10.0;
    int raster_n = 200;
    std::uint64_t seed = 42;
};

struct NoiseConfig {
    double gamma = 0.05;
    std::uint64_t seed = 1337;
};

struct Stage1Config {
    Alpha guess{40.38, 26.92, 3.0};
    int max_iterations = 100;
    double tol_f = 1e-10;
    double tol_rel_grad = 1e-6;
    double fd_relative_step = 1e-3;
};

struct Stage2Config {
    Beta guess{0.1, 0.05};
    std::uint64_t seed = 7071; // optimizer RVE seed, distinct from reference
    int max_iterations = 50;
    double tol_f = 1e-10;
    double tol_rel_grad = 1e-6;
    double fd_phi_step_rel = 0.05;
    double fd_vf_step = 0.01;
};

struct ExperimentConfig {
    BeamConfig beam;
    MaterialConfig material;
    ReferenceMicroConfig reference_micro;
    NoiseConfig noise;
    Stage1Config stage1;
    Stage2Config stage2;
    std::string output_dir = "out";
    int threads = 1;
    bool debug_field_dump = false;

    void validate() const;

    LoadLocation load_location() const;
    IsotropicModuli matrix_moduli() const;
    IsotropicModuli pore_moduli() const;
    RveSpec reference_spec() const;
    MicroIngredients micro_ingredients() const;
    Stage1Options stage1_options() const;
    Stage2Options stage2_options() const;
};

// Strict JSON parsing: unknown keys are configuration errors.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

} // namespace msid
