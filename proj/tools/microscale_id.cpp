// microscale-id: two-stage inverse identification of a porous
// microstructure from noisy beam surface displacements.
//
// Stage 1 fits effective gradient-elastic moduli (lambda, mu, l) to the
// measured top-surface deflection of a cantilever; stage 2 inverts the
// second-order homogenization for the pore diameter and volume fraction.

#include "msid/config.hpp"
#include "msid/errors.hpp"
#include "msid/pipeline.hpp"
#include "msid/version.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int threads = 0;                       // 0 = use config value
    std::optional<std::uint64_t> seed_override;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true)
{
    auto* opt = cmd->add_option("--config", args.config_path,
                                "experiment config (JSON)");
    if (config_required) {
        opt->required();
    }
    cmd->add_option("--out", args.out_dir,
                    "output directory (default: config output_dir)");
    cmd->add_option("--threads", args.threads,
                    "worker cap for finite-difference evaluations");
    cmd->add_option("--seed-override", args.seed_override,
                    "override the noise seed (synthesize/pipeline) or the "
                    "stage-2 RVE seed (identify-micro)");
}

msid::ExperimentConfig load_experiment(const CommonArgs& args,
                                       bool override_stage2_seed = false)
{
    msid::ExperimentConfig config = args.config_path.empty()
                                        ? msid::ExperimentConfig{}
                                        : msid::load_config(args.config_path);
    if (args.threads > 0) {
        config.threads = args.threads;
    }
    if (args.seed_override) {
        if (override_stage2_seed) {
            config.stage2.seed = *args.seed_override;
        } else {
            config.noise.seed = *args.seed_override;
        }
    }
    config.validate();
    return config;
}

fs::path resolve_out(const CommonArgs& args, const msid::ExperimentConfig& c)
{
    return args.out_dir.empty() ? fs::path(c.output_dir) : fs::path(args.out_dir);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Inverse multiscale identification of porous microstructure "
                 "from macroscopic surface displacements"};
    app.set_version_flag("--version", std::string("microscale-id ") + msid::kVersion);
    app.require_subcommand(1);

    CommonArgs synth_args;
    CLI::App* synth = app.add_subcommand(
        "synthesize", "homogenize the reference RVE, solve the cantilever and "
                      "write noisy top-surface measurements");
    add_common(synth, synth_args);

    CommonArgs macro_args;
    std::string measurements_path;
    CLI::App* macro = app.add_subcommand(
        "identify-macro", "stage 1: fit (lambda, mu, l) to measurements");
    add_common(macro, macro_args);
    macro->add_option("--measurements", measurements_path,
                      "measurements.csv (default: <out>/measurements.csv)");

    CommonArgs micro_args;
    std::string alpha_path;
    CLI::App* micro = app.add_subcommand(
        "identify-micro", "stage 2: invert the homogenization for (phi, vf)");
    add_common(micro, micro_args);
    micro->add_option("--alpha", alpha_path,
                      "alpha.csv (default: <out>/alpha.csv)");

    CommonArgs pipe_args;
    CLI::App* pipe = app.add_subcommand(
        "pipeline", "synthesize, identify-macro and identify-micro in order");
    add_common(pipe, pipe_args);

    // Standalone microstructure tools take the RVE spec as flags.
    msid::RveSpec rve_spec;
    double homog_e = 70.0;
    double homog_nu = 0.3;
    double homog_contrast = 1e-6;
    std::string tool_out = "out";
    CLI::App* homog = app.add_subcommand(
        "homogenize", "second-order homogenization of one RVE -> tangents.csv");
    homog->add_option("--phi", rve_spec.phi, "pore diameter (mm)")->required();
    homog->add_option("--vf", rve_spec.vf, "pore volume fraction")->required();
    homog->add_option("--size-factor", rve_spec.size_factor,
                      "RVE edge / pore diameter");
    homog->add_option("--raster-n", rve_spec.raster_n, "pixels per edge");
    homog->add_option("--seed", rve_spec.seed, "packing seed");
    homog->add_option("--e", homog_e, "matrix Young's modulus (GPa)");
    homog->add_option("--nu", homog_nu, "matrix Poisson ratio");
    homog->add_option("--contrast", homog_contrast, "E_pore / E_matrix");
    homog->add_option("--out", tool_out, "output directory");

    CLI::App* rve = app.add_subcommand(
        "rve", "generate one RVE -> circles.csv + rve.pgm");
    rve->add_option("--phi", rve_spec.phi, "pore diameter (mm)")->required();
    rve->add_option("--vf", rve_spec.vf, "pore volume fraction")->required();
    rve->add_option("--size-factor", rve_spec.size_factor,
                    "RVE edge / pore diameter");
    rve->add_option("--raster-n", rve_spec.raster_n, "pixels per edge");
    rve->add_option("--seed", rve_spec.seed, "packing seed");
    rve->add_option("--out", tool_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help / --version
        }
        std::cerr << e.what() << "\n\n" << app.help() << std::endl;
        return 2;
    }

    try {
        if (synth->parsed()) {
            const msid::ExperimentConfig config = load_experiment(synth_args);
            const fs::path out = resolve_out(synth_args, config);
            std::vector<msid::StageRecord> stages;
            const msid::SynthesizeResult result =
                msid::run_synthesize(config, out, &stages);
            std::vector<fs::path> files = {result.measurements_path};
            if (config.debug_field_dump) {
                files.push_back(out / "field_debug.csv");
            }
            msid::write_manifest(out / "manifest.json", "synthesize", config,
                                 stages, files);
            std::cout << "wrote " << result.measurements_path.string() << " ("
                      << result.measurements.size() << " samples)\n";
        } else if (macro->parsed()) {
            const msid::ExperimentConfig config = load_experiment(macro_args);
            const fs::path out = resolve_out(macro_args, config);
            const fs::path meas = measurements_path.empty()
                                      ? out / "measurements.csv"
                                      : fs::path(measurements_path);
            std::vector<msid::StageRecord> stages;
            const msid::IdentifyMacroResult result =
                msid::run_identify_macro(config, meas, out, &stages);
            msid::write_manifest(out / "manifest.json", "identify-macro",
                                 config, stages,
                                 {result.alpha_path,
                                  out / "convergence_stage1.csv"});
            std::cout << "identified alpha: lambda=" << result.alpha.lambda
                      << " GPa, mu=" << result.alpha.mu
                      << " GPa, l=" << result.alpha.l << " mm ("
                      << msid::to_string(result.optim.termination) << ", "
                      << result.optim.iterations << " iterations)\n";
        } else if (micro->parsed()) {
            const msid::ExperimentConfig config =
                load_experiment(micro_args, /*override_stage2_seed=*/true);
            const fs::path out = resolve_out(micro_args, config);
            const fs::path alpha = alpha_path.empty() ? out / "alpha.csv"
                                                      : fs::path(alpha_path);
            std::vector<msid::StageRecord> stages;
            const msid::IdentifyMicroResult result =
                msid::run_identify_micro(config, alpha, out, &stages);
            std::vector<fs::path> files = {result.beta_path,
                                           out / "convergence_stage2.csv"};
            for (std::size_t k = 0; k < result.optim.rve_snapshots.size(); ++k) {
                files.push_back(out / ("iter_" +
                                       std::to_string(
                                           result.optim.history[k].iteration) +
                                       ".pgm"));
            }
            msid::write_manifest(out / "manifest.json", "identify-micro",
                                 config, stages, files);
            std::cout << "identified beta: phi=" << result.beta.phi
                      << " mm, vf=" << result.beta.vf << " ("
                      << msid::to_string(result.optim.termination) << ", "
                      << result.optim.iterations << " iterations)\n";
        } else if (pipe->parsed()) {
            const msid::ExperimentConfig config = load_experiment(pipe_args);
            const fs::path out = resolve_out(pipe_args, config);
            const msid::PipelineResult result = msid::run_pipeline(config, out);
            std::cout << "pipeline complete: alpha=(" << result.macro.alpha.lambda
                      << ", " << result.macro.alpha.mu << ", "
                      << result.macro.alpha.l << "), beta=("
                      << result.micro.beta.phi << ", " << result.micro.beta.vf
                      << "); manifest: " << (out / "manifest.json").string()
                      << "\n";
        } else if (homog->parsed()) {
            const msid::IsotropicModuli matrix =
                msid::lame_from_engineering(homog_e, homog_nu);
            const msid::IsotropicModuli pore = msid::lame_from_engineering(
                homog_e * homog_contrast, homog_nu);
            msid::run_homogenize_cmd(rve_spec, matrix, pore, tool_out);
            std::cout << "wrote " << (fs::path(tool_out) / "tangents.csv").string()
                      << "\n";
        } else if (rve->parsed()) {
            msid::run_rve_cmd(rve_spec, tool_out);
            std::cout << "wrote " << (fs::path(tool_out) / "circles.csv").string()
                      << " and " << (fs::path(tool_out) / "rve.pgm").string()
                      << "\n";
        }
    } catch (const msid::ParameterError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
