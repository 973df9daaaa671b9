#pragma once

#include "msid/config.hpp"
#include "msid/homogenizer.hpp"
#include "msid/inverse.hpp"
#include "msid/measurement.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace msid {

// CSV files carry a one-line '#' metadata header (tool version, units,
// seeds) followed by a column-name line; doubles are written with 17
// significant digits, so repeated runs are byte identical.

void write_measurements_csv(const std::filesystem::path& path,
                            const MeasurementSet& noisy,
                            const std::vector<double>& clean);
MeasurementSet read_measurements_csv(const std::filesystem::path& path);

void write_alpha_csv(const std::filesystem::path& path, const Alpha& alpha);
Alpha read_alpha_csv(const std::filesystem::path& path);

void write_beta_csv(const std::filesystem::path& path, const Beta& beta);
Beta read_beta_csv(const std::filesystem::path& path);

void write_convergence_csv(const std::filesystem::path& path,
                           const OptimResult& result,
                           const std::vector<std::string>& parameter_names);

void write_tangents_csv(const std::filesystem::path& path, const Tangents& t,
                        const RveSpec& spec);
void write_circles_csv(const std::filesystem::path& path,
                       const CircleSet& circles);
void write_field_csv(const std::filesystem::path& path,
                     const MacroField& field);

std::uint64_t file_checksum(const std::filesystem::path& path);

struct StageRecord {
    std::string name;
    double seconds = 0.0;
    std::string summary;
};

void write_manifest(const std::filesystem::path& path,
                    const std::string& command, const ExperimentConfig& config,
                    const std::vector<StageRecord>& stages,
                    const std::vector<std::filesystem::path>& files);
// Re-reads a manifest and checks that every listed file exists with a
// matching checksum.
bool verify_manifest(const std::filesystem::path& path);

struct SynthesizeResult {
    Tangents reference_tangents;
    MeasurementSet measurements; // noisy values
    std::vector<double> clean;
    std::filesystem::path measurements_path;
};

SynthesizeResult run_synthesize(const ExperimentConfig& config,
                                const std::filesystem::path& out_dir,
                                std::vector<StageRecord>* stages = nullptr);

struct IdentifyMacroResult {
    OptimResult optim;
    Alpha alpha;
    std::filesystem::path alpha_path;
};

IdentifyMacroResult run_identify_macro(
    const ExperimentConfig& config,
    const std::filesystem::path& measurements_path,
    const std::filesystem::path& out_dir,
    std::vector<StageRecord>* stages = nullptr);

struct IdentifyMicroResult {
    OptimResult optim;
    Beta beta;
    std::filesystem::path beta_path;
};

IdentifyMicroResult run_identify_micro(
    const ExperimentConfig& config, const std::filesystem::path& alpha_path,
    const std::filesystem::path& out_dir,
    std::vector<StageRecord>* stages = nullptr);

struct PipelineResult {
    SynthesizeResult synthesize;
    IdentifyMacroResult macro;
    IdentifyMicroResult micro;
};

PipelineResult run_pipeline(const ExperimentConfig& config,
                            const std::filesystem::path& out_dir);

// Standalone access to the microstructure machinery.
void run_homogenize_cmd(const RveSpec& spec, const IsotropicModuli& matrix,
                        const IsotropicModuli& pore,
                        const std::filesystem::path& out_dir);
void run_rve_cmd(const RveSpec& spec, const std::filesystem::path& out_dir);

} // namespace msid
