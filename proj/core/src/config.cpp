#include "msid/config.hpp"

#include "msid/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace msid {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what)
{
    throw ParameterError("config: " + what);
}

class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name))
    {
        if (!j_.is_object()) {
            fail(name_ + " must be an object");
        }
    }

    ~Section() = default;

    void finish() const
    {
        for (const auto& item : j_.items()) {
            if (seen_.find(item.key()) == seen_.end()) {
                fail("unknown key '" + item.key() + "' in " + name_);
            }
        }
    }

    template <typename T>
    void get(const char* key, T& out)
    {
        seen_.insert(key);
        if (!j_.contains(key)) {
            return;
        }
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            fail(std::string("bad value for ") + name_ + "." + key);
        }
    }

    bool has(const char* key)
    {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& raw(const char* key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

} // namespace

void ExperimentConfig::validate() const
{
    if (!(beam.length > 0.0) || !(beam.depth > 0.0)) {
        fail("beam dimensions must be positive");
    }
    if (beam.nx < 1 || beam.ny < 1) {
        fail("beam.nx and beam.ny must be >= 1");
    }
    if (!(beam.load_kn > 0.0)) {
        fail("beam.load_kn must be positive");
    }
    load_location(); // validates the policy string
    if (!(material.youngs_gpa > 0.0)) {
        fail("material.youngs_gpa must be positive");
    }
    if (!(material.poisson > -1.0 && material.poisson < 0.5)) {
        fail("material.poisson must lie in (-1, 0.5)");
    }
    if (!(material.pore_contrast > 0.0 && material.pore_contrast < 1.0)) {
        fail("material.pore_contrast must lie in (0, 1)");
    }
    reference_spec().validate();
    if (noise.gamma < 0.0) {
        fail("noise.gamma must be >= 0");
    }
    if (!stage1.guess.valid()) {
        fail("stage1.guess must have positive lambda, mu, l");
    }
    if (!stage2.guess.valid()) {
        fail("stage2.guess must have positive phi and vf in (0, 0.5)");
    }
    if (stage1.max_iterations < 0 || stage2.max_iterations < 0) {
        fail("max_iterations must be >= 0");
    }
    if (threads < 1) {
        fail("threads must be >= 1");
    }
}

LoadLocation ExperimentConfig::load_location() const
{
    if (beam.load_location == "mid-depth") {
        return LoadLocation::MidDepth;
    }
    if (beam.load_location == "top-corner") {
        return LoadLocation::TopCorner;
    }
    if (beam.load_location == "bottom-corner") {
        return LoadLocation::BottomCorner;
    }
    fail("beam.load_location must be one of mid-depth, top-corner, "
         "bottom-corner");
}

IsotropicModuli ExperimentConfig::matrix_moduli() const
{
    return lame_from_engineering(material.youngs_gpa, material.poisson);
}

IsotropicModuli ExperimentConfig::pore_moduli() const
{
    return lame_from_engineering(material.youngs_gpa * material.pore_contrast,
                                 material.poisson);
}

RveSpec ExperimentConfig::reference_spec() const
{
    RveSpec spec;
    spec.phi = reference_micro.phi;
    spec.vf = reference_micro.vf;
    spec.size_factor = reference_micro.size_factor;
    spec.raster_n = reference_micro.raster_n;
    spec.seed = reference_micro.seed;
    return spec;
}

MicroIngredients ExperimentConfig::micro_ingredients() const
{
    MicroIngredients ing;
    ing.matrix = matrix_moduli();
    ing.pore = pore_moduli();
    ing.size_factor = reference_micro.size_factor;
    ing.raster_n = reference_micro.raster_n;
    ing.seed = stage2.seed;
    return ing;
}

Stage1Options ExperimentConfig::stage1_options() const
{
    Stage1Options opts;
    opts.minimize.max_iterations = stage1.max_iterations;
    opts.minimize.tol_f = stage1.tol_f;
    opts.minimize.tol_rel_grad = stage1.tol_rel_grad;
    opts.fd_relative_step = stage1.fd_relative_step;
    opts.threads = threads;
    return opts;
}

Stage2Options ExperimentConfig::stage2_options() const
{
    Stage2Options opts;
    opts.minimize.max_iterations = stage2.max_iterations;
    opts.minimize.tol_f = stage2.tol_f;
    opts.minimize.tol_rel_grad = stage2.tol_rel_grad;
    opts.fd_phi_step_rel = stage2.fd_phi_step_rel;
    opts.fd_vf_step = stage2.fd_vf_step;
    opts.threads = threads;
    return opts;
}

ExperimentConfig config_from_json(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        fail(std::string("JSON parse error: ") + e.what());
    }

    ExperimentConfig config;
    Section top(root, "config");

    if (top.has("beam")) {
        Section s(top.raw("beam"), "beam");
        s.get("length", config.beam.length);
        s.get("depth", config.beam.depth);
        s.get("nx", config.beam.nx);
        s.get("ny", config.beam.ny);
        s.get("load_kn", config.beam.load_kn);
        s.get("load_location", config.beam.load_location);
        s.finish();
    }
    if (top.has("material")) {
        Section s(top.raw("material"), "material");
        s.get("youngs_gpa", config.material.youngs_gpa);
        s.get("poisson", config.material.poisson);
        s.get("pore_contrast", config.material.pore_contrast);
        s.finish();
    }
    if (top.has("reference_micro")) {
        Section s(top.raw("reference_micro"), "reference_micro");
        s.get("phi", config.reference_micro.phi);
        s.get("vf", config.reference_micro.vf);
        s.get("size_factor", config.reference_micro.size_factor);
        s.get("raster_n", config.reference_micro.raster_n);
        s.get("seed", config.reference_micro.seed);
        s.finish();
    }
    if (top.has("noise")) {
        Section s(top.raw("noise"), "noise");
        s.get("gamma", config.noise.gamma);
        s.get("seed", config.noise.seed);
        s.finish();
    }
    if (top.has("stage1")) {
        Section s(top.raw("stage1"), "stage1");
        if (s.has("guess")) {
            Section g(s.raw("guess"), "stage1.guess");
            g.get("lambda", config.stage1.guess.lambda);
            g.get("mu", config.stage1.guess.mu);
            g.get("l", config.stage1.guess.l);
            g.finish();
        }
        s.get("max_iterations", config.stage1.max_iterations);
        s.get("tol_f", config.stage1.tol_f);
        s.get("tol_rel_grad", config.stage1.tol_rel_grad);
        s.get("fd_relative_step", config.stage1.fd_relative_step);
        s.finish();
    }
    if (top.has("stage2")) {
        Section s(top.raw("stage2"), "stage2");
        if (s.has("guess")) {
            Section g(s.raw("guess"), "stage2.guess");
            g.get("phi", config.stage2.guess.phi);
            g.get("vf", config.stage2.guess.vf);
            g.finish();
        }
        s.get("seed", config.stage2.seed);
        s.get("max_iterations", config.stage2.max_iterations);
        s.get("tol_f", config.stage2.tol_f);
        s.get("tol_rel_grad", config.stage2.tol_rel_grad);
        s.get("fd_phi_step_rel", config.stage2.fd_phi_step_rel);
        s.get("fd_vf_step", config.stage2.fd_vf_step);
        s.finish();
    }
    top.get("output_dir", config.output_dir);
    top.get("threads", config.threads);
    top.get("debug_field_dump", config.debug_field_dump);
    top.finish();

    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParameterError("config: cannot open " + path.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    return config_from_json(os.str());
}

std::string config_to_json(const ExperimentConfig& config)
{
    json j;
    j["beam"] = {{"length", config.beam.length},
                 {"depth", config.beam.depth},
                 {"nx", config.beam.nx},
                 {"ny", config.beam.ny},
                 {"load_kn", config.beam.load_kn},
                 {"load_location", config.beam.load_location}};
    j["material"] = {{"youngs_gpa", config.material.youngs_gpa},
                     {"poisson", config.material.poisson},
                     {"pore_contrast", config.material.pore_contrast}};
    j["reference_micro"] = {{"phi", config.reference_micro.phi},
                            {"vf", config.reference_micro.vf},
                            {"size_factor", config.reference_micro.size_factor},
                            {"raster_n", config.reference_micro.raster_n},
                            {"seed", config.reference_micro.seed}};
    j["noise"] = {{"gamma", config.noise.gamma}, {"seed", config.noise.seed}};
    j["stage1"] = {{"guess",
                    {{"lambda", config.stage1.guess.lambda},
                     {"mu", config.stage1.guess.mu},
                     {"l", config.stage1.guess.l}}},
                   {"max_iterations", config.stage1.max_iterations},
                   {"tol_f", config.stage1.tol_f},
                   {"tol_rel_grad", config.stage1.tol_rel_grad},
                   {"fd_relative_step", config.stage1.fd_relative_step}};
    j["stage2"] = {{"guess",
                    {{"phi", config.stage2.guess.phi},
                     {"vf", config.stage2.guess.vf}}},
                   {"seed", config.stage2.seed},
                   {"max_iterations", config.stage2.max_iterations},
                   {"tol_f", config.stage2.tol_f},
                   {"tol_rel_grad", config.stage2.tol_rel_grad},
                   {"fd_phi_step_rel", config.stage2.fd_phi_step_rel},
                   {"fd_vf_step", config.stage2.fd_vf_step}};
    j["output_dir"] = config.output_dir;
    j["threads"] = config.threads;
    j["debug_field_dump"] = config.debug_field_dump;
    return j.dump(2);
}

} // namespace msid
