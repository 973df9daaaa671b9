#include "msid/pipeline.hpp"

#include "msid/errors.hpp"
#include "msid/hash.hpp"
#include "msid/version.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace msid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    return out;
}

std::ifstream open_in(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path.string());
    }
    return in;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const char* what)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw IoError(std::string("bad numeric field for ") + what + ": '" + s +
                      "'");
    }
}

// Extract "key=value" tokens from a '#' metadata line.
bool metadata_value(const std::string& line, const std::string& key,
                    std::string& out)
{
    const std::string needle = key + "=";
    const std::size_t at = line.find(needle);
    if (at == std::string::npos) {
        return false;
    }
    std::size_t end = at + needle.size();
    std::size_t stop = end;
    while (stop < line.size() && line[stop] != ' ' && line[stop] != '|') {
        ++stop;
    }
    out = line.substr(end, stop - end);
    return true;
}

class StageTimer {
public:
    StageTimer(std::vector<StageRecord>* stages, std::string name)
        : stages_(stages), name_(std::move(name)),
          start_(std::chrono::steady_clock::now())
    {
    }

    void done(std::string summary)
    {
        if (stages_ == nullptr) {
            return;
        }
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        StageRecord rec;
        rec.name = name_;
        rec.seconds =
            std::chrono::duration_cast<std::chrono::duration<double>>(elapsed)
                .count();
        rec.summary = std::move(summary);
        stages_->push_back(rec);
    }

private:
    std::vector<StageRecord>* stages_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

} // namespace

void write_measurements_csv(const fs::path& path, const MeasurementSet& noisy,
                            const std::vector<double>& clean)
{
    if (clean.size() != noisy.size()) {
        throw ParameterError("write_measurements_csv: size mismatch");
    }
    std::ofstream out = open_out(path);
    out << "# microscale-id " << kVersion << " | units mm | gamma="
        << fmt(noisy.noise_gamma) << " | noise_seed=" << noisy.noise_seed
        << "\n";
    out << "x,y,v,clean_v\n";
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        out << fmt(noisy.x[i]) << ',' << fmt(noisy.y[i]) << ','
            << fmt(noisy.value[i]) << ',' << fmt(clean[i]) << "\n";
    }
}

MeasurementSet read_measurements_csv(const fs::path& path)
{
    std::ifstream in = open_in(path);
    MeasurementSet set;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            std::string v;
            if (metadata_value(line, "gamma", v)) {
                set.noise_gamma = parse_double(v, "gamma");
            }
            if (metadata_value(line, "noise_seed", v)) {
                set.noise_seed = std::stoull(v);
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true; // column names
            continue;
        }
        const std::vector<std::string> f = split(line, ',');
        if (f.size() < 3) {
            throw IoError("measurements.csv: expected at least 3 columns");
        }
        set.x.push_back(parse_double(f[0], "x"));
        set.y.push_back(parse_double(f[1], "y"));
        set.value.push_back(parse_double(f[2], "v"));
    }
    if (set.value.empty()) {
        throw IoError("measurements.csv: no samples in " + path.string());
    }
    return set;
}

void write_alpha_csv(const fs::path& path, const Alpha& alpha)
{
    std::ofstream out = open_out(path);
    out << "# microscale-id " << kVersion << " | units GPa, mm\n";
    out << "lambda_gpa,mu_gpa,l_mm\n";
    out << fmt(alpha.lambda) << ',' << fmt(alpha.mu) << ',' << fmt(alpha.l)
        << "\n";
}

namespace {

std::vector<double> read_single_row_csv(const fs::path& path,
                                        std::size_t n_fields, const char* what)
{
    std::ifstream in = open_in(path);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != n_fields) {
            throw IoError(std::string(what) + ": wrong column count");
        }
        std::vector<double> out;
        out.reserve(n_fields);
        for (const std::string& s : f) {
            out.push_back(parse_double(s, what));
        }
        return out;
    }
    throw IoError(std::string(what) + ": no data row in " + path.string());
}

} // namespace

Alpha read_alpha_csv(const fs::path& path)
{
    const std::vector<double> v = read_single_row_csv(path, 3, "alpha.csv");
    return {v[0], v[1], v[2]};
}

void write_beta_csv(const fs::path& path, const Beta& beta)
{
    std::ofstream out = open_out(path);
    out << "# microscale-id " << kVersion << " | units mm, -\n";
    out << "phi_mm,vf\n";
    out << fmt(beta.phi) << ',' << fmt(beta.vf) << "\n";
}

Beta read_beta_csv(const fs::path& path)
{
    const std::vector<double> v = read_single_row_csv(path, 2, "beta.csv");
    return {v[0], v[1]};
}

void write_convergence_csv(const fs::path& path, const OptimResult& result,
                           const std::vector<std::string>& parameter_names)
{
    std::ofstream out = open_out(path);
    out << "# microscale-id " << kVersion << " | termination="
        << to_string(result.termination) << " | iterations="
        << result.iterations << "\n";
    out << "iteration";
    for (const std::string& name : parameter_names) {
        out << ',' << name;
    }
    out << ",objective,gradient_norm,step_length\n";
    for (const OptimRecord& rec : result.history) {
        out << rec.iteration;
        for (Eigen::Index k = 0; k < rec.x.size(); ++k) {
            out << ',' << fmt(rec.x(k));
        }
        out << ',' << fmt(rec.objective) << ',' << fmt(rec.gradient_norm)
            << ',' << fmt(rec.step_length) << "\n";
    }
}

void write_tangents_csv(const fs::path& path, const Tangents& t,
                        const RveSpec& spec)
{
    const LengthScaleFit fit = extract_length_scale(t);
    std::ofstream out = open_out(path);
    out << "# microscale-id " << kVersion << " | phi=" << fmt(spec.phi)
        << " vf=" << fmt(spec.vf) << " size_factor=" << fmt(spec.size_factor)
        << " raster_n=" << spec.raster_n << " seed=" << spec.seed
        << " | C GPa 3x3, D GPa.mm2 6x6, coupling GPa.mm 3x6, row-major"
        << " | fitted_l_mm=" << fmt(fit.l)
        << " fit_residual=" << fmt(fit.relative_residual) << "\n";
    out << "block,values\n";
    out << "C";
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            out << ',' << fmt(t.c(i, j));
        }
    }
    out << "\nD";
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            out << ',' << fmt(t.d(i, j));
        }
    }
    out << "\ncoupling";
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 6; ++j) {
            out << ',' << fmt(t.coupling(i, j));
        }
    }
    out << "\n";
}

void write_circles_csv(const fs::path& path, const CircleSet& circles)
{
    std::ofstream out = open_out(path);
    out << "# microscale-id " << kVersion
        << " | normalized unit-square coordinates, periodic="
        << (circles.periodic ? 1 : 0) << "\n";
    out << "cx,cy,r\n";
    for (const Eigen::Vector2d& c : circles.centers) {
        out << fmt(c.x()) << ',' << fmt(c.y()) << ',' << fmt(circles.radius)
            << "\n";
    }
}

void write_field_csv(const fs::path& path, const MacroField& field)
{
    std::ofstream out = open_out(path);
    out << "# microscale-id " << kVersion
        << " | units mm | 12 DOFs per node (u, v blocks)\n";
    out << "node,x,y,u,u_x,u_y,u_xx,u_xy,u_yy,v,v_x,v_y,v_xx,v_xy,v_yy\n";
    for (int n = 0; n < field.mesh->node_count(); ++n) {
        const Eigen::Vector2d& p = field.mesh->nodes[static_cast<std::size_t>(n)];
        out << n << ',' << fmt(p.x()) << ',' << fmt(p.y());
        for (int comp = 0; comp < 2; ++comp) {
            for (int d = 0; d < kDofsPerComponent; ++d) {
                out << ',' << fmt(field.dof(n, comp, d));
            }
        }
        out << "\n";
    }
}

std::uint64_t file_checksum(const fs::path& path)
{
    std::ifstream in = open_in(path);
    char buf[65536];
    std::uint64_t h = 14695981039346656037ull;
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        if (got > 0) {
            h = fnv1a64(buf, static_cast<std::size_t>(got), h);
        }
    }
    return h;
}

void write_manifest(const fs::path& path, const std::string& command,
                    const ExperimentConfig& config,
                    const std::vector<StageRecord>& stages,
                    const std::vector<fs::path>& files)
{
    json j;
    j["tool"] = "microscale-id";
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = json::parse(config_to_json(config));
    j["stages"] = json::array();
    for (const StageRecord& s : stages) {
        j["stages"].push_back({{"name", s.name},
                               {"seconds", s.seconds},
                               {"summary", s.summary}});
    }
    j["files"] = json::array();
    const fs::path dir = path.parent_path();
    for (const fs::path& f : files) {
        const fs::path rel = f.lexically_proximate(dir);
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(file_checksum(f)));
        j["files"].push_back(
            {{"path", rel.generic_string()},
             {"bytes", static_cast<std::uint64_t>(fs::file_size(f))},
             {"fnv1a64", std::string(hex)}});
    }
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

bool verify_manifest(const fs::path& path)
{
    std::ifstream in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception&) {
        return false;
    }
    const fs::path dir = path.parent_path();
    for (const auto& entry : j.at("files")) {
        const fs::path f = dir / fs::path(entry.at("path").get<std::string>());
        if (!fs::exists(f)) {
            return false;
        }
        if (fs::file_size(f) != entry.at("bytes").get<std::uint64_t>()) {
            return false;
        }
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(file_checksum(f)));
        if (entry.at("fnv1a64").get<std::string>() != hex) {
            return false;
        }
    }
    return true;
}

SynthesizeResult run_synthesize(const ExperimentConfig& config,
                                const fs::path& out_dir,
                                std::vector<StageRecord>* stages)
{
    config.validate();
    fs::create_directories(out_dir);

    StageTimer timer(stages, "synthesize");

    const Tangents ref = homogenize(config.reference_spec(),
                                    config.matrix_moduli(),
                                    config.pore_moduli());

    const MacroMesh mesh = build_cantilever(config.beam.length,
                                            config.beam.depth, config.beam.nx,
                                            config.beam.ny);
    const MacroProblem problem = make_cantilever_problem(
        mesh, ref.c, ref.d, config.beam.load_kn, config.load_location());
    const MacroField field = assemble_and_solve(problem);

    MeasurementSet clean_set = sample_top_surface(field);
    SynthesizeResult result;
    result.reference_tangents = ref;
    result.clean = clean_set.value;
    result.measurements = clean_set;
    result.measurements.value =
        corrupt(clean_set.value, config.noise.gamma, config.noise.seed);
    result.measurements.noise_gamma = config.noise.gamma;
    result.measurements.noise_seed = config.noise.seed;

    result.measurements_path = out_dir / "measurements.csv";
    write_measurements_csv(result.measurements_path, result.measurements,
                           result.clean);
    if (config.debug_field_dump) {
        write_field_csv(out_dir / "field_debug.csv", field);
    }

    std::ostringstream summary;
    summary << clean_set.size() << " samples, tip v="
            << fmt(field.dof(problem.loads.front().node, 1, 0)) << " mm";
    timer.done(summary.str());
    return result;
}

IdentifyMacroResult run_identify_macro(const ExperimentConfig& config,
                                       const fs::path& measurements_path,
                                       const fs::path& out_dir,
                                       std::vector<StageRecord>* stages)
{
    config.validate();
    fs::create_directories(out_dir);

    StageTimer timer(stages, "identify-macro");

    const MeasurementSet data = read_measurements_csv(measurements_path);
    const MacroMesh mesh = build_cantilever(config.beam.length,
                                            config.beam.depth, config.beam.nx,
                                            config.beam.ny);
    auto system = std::make_shared<const MacroSystem>(
        mesh, clamped_edge_constraints(mesh));
    const MacroProblem tmpl = make_cantilever_problem(
        mesh, CMatrix::Identity(), DMatrix::Zero(), config.beam.load_kn,
        config.load_location());
    const Psi1Objective psi1(system, tmpl.loads, data);

    IdentifyMacroResult result;
    result.optim = identify_macro(psi1, config.stage1.guess,
                                  config.stage1_options());
    result.alpha = Alpha::from_vec(result.optim.x);

    result.alpha_path = out_dir / "alpha.csv";
    write_alpha_csv(result.alpha_path, result.alpha);
    write_convergence_csv(out_dir / "convergence_stage1.csv", result.optim,
                          {"lambda_gpa", "mu_gpa", "l_mm"});

    std::ostringstream summary;
    summary << "alpha=(" << fmt(result.alpha.lambda) << ", "
            << fmt(result.alpha.mu) << ", " << fmt(result.alpha.l)
            << "), psi1=" << fmt(result.optim.objective) << ", "
            << to_string(result.optim.termination);
    timer.done(summary.str());
    return result;
}

IdentifyMicroResult run_identify_micro(const ExperimentConfig& config,
                                       const fs::path& alpha_path,
                                       const fs::path& out_dir,
                                       std::vector<StageRecord>* stages)
{
    config.validate();
    fs::create_directories(out_dir);

    StageTimer timer(stages, "identify-micro");

    const Alpha alpha = read_alpha_csv(alpha_path);
    IdentifyMicroResult result;
    result.optim = identify_micro(alpha, config.micro_ingredients(),
                                  config.stage2.guess,
                                  config.stage2_options());
    result.beta = Beta::from_vec(result.optim.x);

    result.beta_path = out_dir / "beta.csv";
    write_beta_csv(result.beta_path, result.beta);
    write_convergence_csv(out_dir / "convergence_stage2.csv", result.optim,
                          {"phi_mm", "vf"});
    for (std::size_t k = 0; k < result.optim.rve_snapshots.size(); ++k) {
        const int iter = result.optim.history[k].iteration;
        std::ostringstream name;
        name << "iter_" << iter << ".pgm";
        std::ofstream out = open_out(out_dir / name.str());
        out << result.optim.rve_snapshots[k];
    }

    std::ostringstream summary;
    summary << "beta=(" << fmt(result.beta.phi) << ", " << fmt(result.beta.vf)
            << "), psi2=" << fmt(result.optim.objective) << ", "
            << to_string(result.optim.termination);
    timer.done(summary.str());
    return result;
}

PipelineResult run_pipeline(const ExperimentConfig& config,
                            const fs::path& out_dir)
{
    std::vector<StageRecord> stages;
    PipelineResult result;
    result.synthesize = run_synthesize(config, out_dir, &stages);
    result.macro = run_identify_macro(
        config, result.synthesize.measurements_path, out_dir, &stages);
    result.micro = run_identify_micro(config, result.macro.alpha_path, out_dir,
                                      &stages);

    std::vector<fs::path> files = {
        out_dir / "measurements.csv",
        out_dir / "alpha.csv",
        out_dir / "convergence_stage1.csv",
        out_dir / "beta.csv",
        out_dir / "convergence_stage2.csv",
    };
    if (config.debug_field_dump) {
        files.push_back(out_dir / "field_debug.csv");
    }
    for (std::size_t k = 0; k < result.micro.optim.rve_snapshots.size(); ++k) {
        std::ostringstream name;
        name << "iter_" << result.micro.optim.history[k].iteration << ".pgm";
        files.push_back(out_dir / name.str());
    }
    write_manifest(out_dir / "manifest.json", "pipeline", config, stages,
                   files);
    return result;
}

void run_homogenize_cmd(const RveSpec& spec, const IsotropicModuli& matrix,
                        const IsotropicModuli& pore, const fs::path& out_dir)
{
    fs::create_directories(out_dir);
    const Tangents t = homogenize(spec, matrix, pore);
    write_tangents_csv(out_dir / "tangents.csv", t, spec);
}

void run_rve_cmd(const RveSpec& spec, const fs::path& out_dir)
{
    fs::create_directories(out_dir);
    const CircleSet circles = rsa_pack(spec);
    const MaterialGrid grid =
        rasterize(circles, spec.raster_n, spec.edge_length());
    write_circles_csv(out_dir / "circles.csv", circles);
    std::ofstream out = open_out(out_dir / "rve.pgm");
    out << export_image(grid);
}

} // namespace msid
