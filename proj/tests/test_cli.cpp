#include "ionmirror/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace ionmirror;
namespace fs = std::filesystem;

namespace
{

const fs::path kTmp = IONMIRROR_TEST_TMP;

struct RunResult
{
    int exit_code = -1;
    std::string err;
};

RunResult run(const std::string& args)
{
    fs::create_directories(kTmp);
    const fs::path err_file = kTmp / "stderr.txt";
    const std::string cmd = std::string(IONMIRROR_EXE) + " " + args + " > /dev/null 2> " + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.err = ss.str();
    return r;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string out_dir(const std::string& name)
{
    return (kTmp / name).string();
}

double circular_distance(double a, double b)
{
    return std::abs(std::remainder(a - b, kTwoPi));
}

} // namespace

TEST_CASE("steady output is byte-identical across runs")
{
    REQUIRE(run("--out " + out_dir("steady_a") + " --set epsilon=0 steady").exit_code == 0);
    REQUIRE(run("--out " + out_dir("steady_b") + " --set epsilon=0 steady").exit_code == 0);
    const auto a = slurp(kTmp / "steady_a" / "steady.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(kTmp / "steady_b" / "steady.csv"));
    const auto t = parse_csv(a);
    CHECK(t.header == std::vector<std::string>{"index", "level", "two_m", "population"});
    double total = 0.0;
    for (double x : t.numeric_column("population"))
        total += x;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("phase-scan without the shift is locked to 0 or pi")
{
    REQUIRE(run("--out " + out_dir("lock") + " --set shift_enabled=false --set detuning_r_points=50 phase-scan")
                .exit_code == 0);
    const auto t = read_csv(kTmp / "lock" / "phase_scan.csv");
    REQUIRE(t.rows.size() == 50);
    for (double phase : t.numeric_column("phase_rad"))
        CHECK(std::min(circular_distance(phase, 0.0), circular_distance(phase, kPi)) < 1e-6);
}

TEST_CASE("output files roundtrip exactly")
{
    REQUIRE(run("--out " + out_dir("fringe") + " fringe").exit_code == 0);
    for (const auto* name : {"fringe.csv", "fringe_fit.csv"})
    {
        const auto t = read_csv(kTmp / "fringe" / name);
        for (const auto& row : t.rows)
            for (const auto& cell : row)
            {
                if (cell == "red" || cell == "green")
                    continue;
                CHECK(format_double(std::stod(cell)) == cell);
            }
    }
}

TEST_CASE("synth then extract-phase recovers the model phase")
{
    REQUIRE(run("--out " + out_dir("synth") + " --seed 11 synth").exit_code == 0);
    const auto counts = kTmp / "synth" / "counts.csv";
    REQUIRE(run("--out " + out_dir("synth") + " --set input_csv=" + counts.string() + " extract-phase").exit_code ==
            0);
    const auto truth = read_csv(kTmp / "synth" / "synth_truth.csv");
    const auto est = read_csv(kTmp / "synth" / "extract_phase.csv");
    const double model = truth.numeric_column("model_phase_rad")[0];
    const double phase = est.numeric_column("phase_rad")[0];
    const double err = est.numeric_column("phase_error_rad")[0];
    CHECK(err > 0.0);
    CHECK(circular_distance(phase, model) <= 3.0 * err);
    CHECK(truth.rows[0][3] == "11");

    const auto record = count_record_from_table(read_csv(counts));
    CHECK(record.bins.size() == 80 * 32);
}

TEST_CASE("seed flag and config seed agree")
{
    REQUIRE(run("--out " + out_dir("seed_a") + " --seed 5 --set periods=2 synth").exit_code == 0);
    REQUIRE(run("--out " + out_dir("seed_b") + " --set seed=5 --set periods=2 synth").exit_code == 0);
    CHECK(slurp(kTmp / "seed_a" / "counts.csv") == slurp(kTmp / "seed_b" / "counts.csv"));
}

TEST_CASE("config file errors exit with code 1 and one parsable line")
{
    fs::create_directories(kTmp);
    const auto cfg = kTmp / "bad.cfg";
    {
        std::ofstream out(cfg);
        out << "# comment\nepsilon = 0.01\npsi_points = 2\n";
    }
    const auto r = run("--config " + cfg.string() + " --out " + out_dir("bad") + " steady");
    CHECK(r.exit_code == 1);
    CHECK(r.err.rfind("config_error source=" + cfg.string() + " line=3 key=psi_points message=", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

    CHECK(run("--out " + out_dir("bad") + " --set nonsense=1 steady").exit_code == 1);
    CHECK(run("--out " + out_dir("bad") + " fit-spectrum").exit_code == 1);
    CHECK(run("--out " + out_dir("bad") + " --set input_csv=/nonexistent.csv extract-phase").exit_code == 1);
    CHECK(run("--out " + out_dir("bad") + " no-such-command").exit_code == 1);
}

TEST_CASE("solver failures exit with code 2")
{
    const auto r = run("--out " + out_dir("singular") + " --set larmor_unit_mhz=0 steady");
    CHECK(r.exit_code == 2);
    CHECK(r.err.rfind("singular_system message=", 0) == 0);
    CHECK(run("--out " + out_dir("singular") + " --set larmor_unit_mhz=0 --set degenerate_policy=minimum_norm steady")
              .exit_code == 0);
}

TEST_CASE("fit subcommands")
{
    REQUIRE(run("--out " + out_dir("fits") +
                " --set detuning_r_min_mhz=-30 --set detuning_r_max_mhz=20 --set detuning_r_points=101 spectrum")
                .exit_code == 0);
    const auto spectrum = read_csv(kTmp / "fits" / "spectrum.csv");
    CsvTable obs{{"x", "y", "sigma"}, {}};
    const auto x = spectrum.numeric_column("detuning_r_mhz");
    const auto y = spectrum.numeric_column("p_population");
    for (std::size_t i = 0; i < x.size(); ++i)
        obs.rows.push_back({format_double(x[i]), format_double(y[i]), "1e-4"});
    write_csv(kTmp / "fits" / "obs.csv", obs);
    REQUIRE(run("--out " + out_dir("fits") + " --set input_csv=" + (kTmp / "fits" / "obs.csv").string() +
                " --set detuning_g_mhz=-9.5 --set fit_free=detuning_g_mhz fit-spectrum")
                .exit_code == 0);
    const auto fit = read_csv(kTmp / "fits" / "fit_spectrum.csv");
    CHECK(fit.rows[0][0] == "detuning_g_mhz");
    CHECK(std::abs(fit.numeric_column("value")[0] + 10.0) < 0.01);
    const auto summary = read_csv(kTmp / "fits" / "fit_spectrum_summary.csv");
    CHECK(summary.rows[0][2] == "converged");

    REQUIRE(run("--out " + out_dir("fits") +
                " --set epsilon=0.016 --set detuning_r_min_mhz=-50 --set detuning_r_max_mhz=50"
                " --set detuning_r_points=11 contrast-scan")
                .exit_code == 0);
    const auto contrast = read_csv(kTmp / "fits" / "contrast_scan.csv");
    CsvTable cobs{{"x", "y", "sigma"}, {}};
    const auto cx = contrast.numeric_column("detuning_r_mhz");
    const auto cy = contrast.numeric_column("red_contrast");
    for (std::size_t i = 0; i < cx.size(); ++i)
        cobs.rows.push_back({format_double(cx[i]), format_double(cy[i]), "1e-4"});
    write_csv(kTmp / "fits" / "contrast_obs.csv", cobs);
    REQUIRE(run("--out " + out_dir("fits") + " --set input_csv=" + (kTmp / "fits" / "contrast_obs.csv").string() +
                " --set epsilon=0.03 fit-epsilon")
                .exit_code == 0);
    const auto eps = read_csv(kTmp / "fits" / "fit_epsilon.csv");
    CHECK(std::abs(eps.numeric_column("value")[0] - 0.016) <= 0.001);
}

TEST_CASE("anomaly-search reports a grid and a summary")
{
    REQUIRE(run("--out " + out_dir("anomaly") +
                " --set detuning_r_points=25 --set anomaly_rabi_r_min_mhz=10 --set anomaly_rabi_r_max_mhz=30"
                " --set anomaly_rabi_r_points=3 anomaly-search")
                .exit_code == 0);
    const auto grid = read_csv(kTmp / "anomaly" / "anomaly_grid.csv");
    CHECK(grid.rows.size() == 75);
    const auto summary = read_csv(kTmp / "anomaly" / "anomaly_summary.csv");
    REQUIRE(summary.rows.size() == 3);
    CHECK(summary.header.back() == "returns_to_zero");
    // Weak red drive winds through a full turn; strong drive returns to zero.
    CHECK(summary.rows[0].back() == "0");
    CHECK(summary.rows[2].back() == "1");
}
