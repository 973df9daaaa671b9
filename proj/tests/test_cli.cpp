#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Integration tests driving the microscale-id binary.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = MSID_CLI_PATH;

int run(const std::string& args)
{
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path temp_dir(const std::string& tag)
{
    const fs::path dir = fs::temp_directory_path() / ("msid_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path write_small_config(const fs::path& dir, double gamma = 0.05)
{
    const fs::path path = dir / "config.json";
    std::ofstream out(path);
    out << "{\n"
        << "  \"beam\": {\"nx\": 15, \"ny\": 5},\n"
        << "  \"reference_micro\": {\"raster_n\": 50},\n"
        << "  \"noise\": {\"gamma\": " << gamma << "},\n"
        << "  \"stage1\": {\"max_iterations\": 30},\n"
        << "  \"stage2\": {\"max_iterations\": 5},\n"
        << "  \"threads\": 2\n"
        << "}\n";
    return path;
}

int count_data_rows(const fs::path& csv)
{
    std::ifstream in(csv);
    std::string line;
    int rows = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        ++rows;
    }
    return rows;
}

} // namespace

TEST_CASE("help, version and usage errors")
{
    CHECK(run("--help") == 0);
    CHECK(run("--version") == 0);
    CHECK(run("rve --help") == 0);

    // Missing required flags and unknown options are usage errors.
    CHECK(run("rve") == 2);
    CHECK(run("rve --phi 0.3") == 2);
    CHECK(run("homogenize --vf 0.15") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("") == 2);
    CHECK(run("identify-macro") == 2); // --config required
}

TEST_CASE("rve subcommand writes circles and image")
{
    const fs::path dir = temp_dir("rve");
    CHECK(run("rve --phi 0.3 --vf 0.15 --seed 42 --raster-n 50 --out " +
              dir.string()) == 0);
    CHECK(count_data_rows(dir / "circles.csv") == 19);
    CHECK(slurp(dir / "rve.pgm").substr(0, 9) == "P5\n50 50\n");
}

TEST_CASE("homogenize subcommand: near-zero vf recovers the matrix")
{
    const fs::path dir = temp_dir("homog");
    CHECK(run("homogenize --phi 0.3 --vf 0.0001 --raster-n 50 --out " +
              dir.string()) == 0);
    const std::string text = slurp(dir / "tangents.csv");
    // First C entry: lambda + 2 mu = 94.2307...
    const std::size_t at = text.find("\nC,");
    REQUIRE(at != std::string::npos);
    const double c11 = std::stod(text.substr(at + 3));
    CHECK(c11 == doctest::Approx(94.2307692).epsilon(1e-6));

    // vf out of range is a usage error.
    CHECK(run("homogenize --phi 0.3 --vf 0.7 --out " + dir.string()) == 2);
}

TEST_CASE("synthesize: row count, clean column, determinism, manifest")
{
    const fs::path dir = temp_dir("synth");
    const fs::path config = write_small_config(dir, 0.0);
    CHECK(run("synthesize --config " + config.string() + " --out " +
              (dir / "a").string()) == 0);
    CHECK(count_data_rows(dir / "a" / "measurements.csv") == 16);
    CHECK(fs::exists(dir / "a" / "manifest.json"));

    // gamma = 0: noisy column equals the clean column.
    std::ifstream in(dir / "a" / "measurements.csv");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'x') {
            continue;
        }
        std::stringstream ss(line);
        std::string x, y, v, clean;
        std::getline(ss, x, ',');
        std::getline(ss, y, ',');
        std::getline(ss, v, ',');
        std::getline(ss, clean, ',');
        CHECK(v == clean);
    }

    CHECK(run("synthesize --config " + config.string() + " --out " +
              (dir / "b").string()) == 0);
    CHECK(slurp(dir / "a" / "measurements.csv") ==
          slurp(dir / "b" / "measurements.csv"));

    // Different noise seed (via override) changes nothing when gamma = 0.
    CHECK(run("synthesize --config " + config.string() +
              " --seed-override 9 --out " + (dir / "c").string()) == 0);
    CHECK(slurp(dir / "a" / "measurements.csv") ==
          slurp(dir / "c" / "measurements.csv"));
}

TEST_CASE("config errors exit with code 2")
{
    const fs::path dir = temp_dir("badcfg");
    {
        std::ofstream out(dir / "bad.json");
        out << "{\"beam\": {\"nx\": -3}}";
    }
    CHECK(run("synthesize --config " + (dir / "bad.json").string()) == 2);
    {
        std::ofstream out(dir / "unknown.json");
        out << "{\"beem\": {}}";
    }
    CHECK(run("pipeline --config " + (dir / "unknown.json").string()) == 2);
    CHECK(run("pipeline --config " + (dir / "absent.json").string()) == 2);
}

TEST_CASE("stage commands chain through files")
{
    const fs::path dir = temp_dir("chain");
    const fs::path config = write_small_config(dir);
    const fs::path out = dir / "out";
    REQUIRE(run("synthesize --config " + config.string() + " --out " +
                out.string()) == 0);
    REQUIRE(run("identify-macro --config " + config.string() + " --out " +
                out.string()) == 0);
    CHECK(fs::exists(out / "alpha.csv"));
    CHECK(fs::exists(out / "convergence_stage1.csv"));
    REQUIRE(run("identify-micro --config " + config.string() + " --out " +
                out.string()) == 0);
    CHECK(fs::exists(out / "beta.csv"));
    CHECK(fs::exists(out / "convergence_stage2.csv"));
    CHECK(fs::exists(out / "iter_0.pgm"));

    // Missing inputs are stage failures, not usage errors.
    CHECK(run("identify-macro --config " + config.string() + " --out " +
              (dir / "empty").string()) == 1);
    CHECK(run("identify-micro --config " + config.string() + " --out " +
              (dir / "empty").string()) == 1);
}
