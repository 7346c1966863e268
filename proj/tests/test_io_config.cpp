#include "ionmirror/config.hpp"
#include "ionmirror/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace ionmirror;
namespace fs = std::filesystem;

namespace
{

fs::path scratch_dir()
{
    const fs::path dir = IONMIRROR_TEST_TMP;
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("doubles survive a text roundtrip")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 1000; ++i)
    {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("csv parse and write")
{
    const std::string text = "# comment\n\na,b\n1,2\n  3 , 4 \n";
    const auto t = parse_csv(text);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.numeric_column("b") == std::vector<double>{2.0, 4.0});
    CHECK(to_csv(t) == "a,b\n1,2\n3,4\n");
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_csv("# only\n"), InvalidArgument);
    CHECK_THROWS_AS(t.column_index("c"), InvalidArgument);
    CHECK_THROWS_AS(parse_csv("a\nx\n").numeric_column("a"), InvalidArgument);

    const auto path = scratch_dir() / "table.csv";
    write_csv(path, t);
    const auto back = read_csv(path);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
    CHECK_THROWS_AS(read_csv(scratch_dir() / "missing.csv"), InvalidArgument);
}

TEST_CASE("count records roundtrip bit-exactly")
{
    CountRecord r;
    r.bin_duration_s = 0.1;
    for (int k = 0; k < 50; ++k)
        r.bins.push_back({0.1 * k, wrap_phase(0.19634954084936207 * k), 1000 + 3 * k, 2500 - k});
    const auto path = scratch_dir() / "counts.csv";
    write_csv(path, count_record_table(r));
    const auto back = count_record_from_table(read_csv(path));
    REQUIRE(back.bins.size() == r.bins.size());
    for (std::size_t i = 0; i < r.bins.size(); ++i)
    {
        CHECK(back.bins[i].t_s == r.bins[i].t_s);
        CHECK(back.bins[i].psi_rad == r.bins[i].psi_rad);
        CHECK(back.bins[i].green_counts == r.bins[i].green_counts);
        CHECK(back.bins[i].red_counts == r.bins[i].red_counts);
    }
    CHECK_THROWS_AS(count_record_from_table(parse_csv("t_s,psi_rad,green_counts,red_counts\n0,0,1.5,2\n")),
                    InvalidArgument);
}

TEST_CASE("observations from the first three columns")
{
    const auto obs = observations_from_table(parse_csv("x,y,sigma\n-1,0.5,0.01\n2,0.25,0.02\n"));
    REQUIRE(obs.size() == 2);
    CHECK(obs[1].x == 2.0);
    CHECK(obs[1].sigma == 0.02);
    CHECK_THROWS_AS(observations_from_table(parse_csv("x,y\n1,2\n")), InvalidArgument);
}

TEST_CASE("config defaults and parsing")
{
    const auto d = parse_config("");
    CHECK(d.system.rates.gamma_g_mhz == 15.0);
    CHECK(d.detuning_grid().size() == 100);
    CHECK(d.observe.psi_points == 32);

    const auto c = parse_config("# working point\n"
                                "gamma_g_mhz = 14   # trailing comment\n"
                                "epsilon=0.016\n"
                                "shift_enabled = false\n"
                                "polarization_g = 0, 1, 0\n"
                                "polarization_r = 1,0, 0,0, 0,1\n"
                                "green_convention = suppressed_decay_maximum\n"
                                "degenerate_policy = minimum_norm\n"
                                "fit_free = detuning_g_mhz, larmor_unit_mhz\n"
                                "seed = 18446744073709551615\n"
                                "input_csv = data/in.csv\n");
    CHECK(c.system.rates.gamma_g_mhz == 14.0);
    CHECK(c.system.mirror.epsilon == 0.016);
    CHECK_FALSE(c.system.mirror.shift_enabled);
    CHECK(c.system.green.polarization.component(0) == std::complex<double>(1.0));
    CHECK(std::abs(c.system.red.polarization.component(1) - std::complex<double>(0.0, 1.0 / std::sqrt(2.0))) < 1e-15);
    CHECK(c.observe.green_convention == GreenConvention::SuppressedDecayMaximum);
    CHECK(c.observe.solver.policy == DegeneratePolicy::MinimumNorm);
    CHECK(c.fit_free == std::vector<std::string>{"detuning_g_mhz", "larmor_unit_mhz"});
    CHECK(c.seed == 18446744073709551615ULL);
    CHECK(c.input_csv == "data/in.csv");
}

TEST_CASE("every documented key is accepted")
{
    CHECK(config_keys().size() > 40);
    for (const auto& key : {"gamma_g_mhz", "larmor_unit_mhz", "psi_points", "epsilon", "detuning_r_points",
                            "bins_per_period", "red_detuning_drift_mhz_per_hour", "phase_min_significance"})
        CHECK(std::find(config_keys().begin(), config_keys().end(), key) != config_keys().end());
}

TEST_CASE("config errors name the line and key")
{
    auto expect = [](const std::string& text, int line, const std::string& key) {
        try
        {
            parse_config(text, "run.cfg");
            FAIL("no error for: " << text);
        }
        catch (const ConfigError& e)
        {
            CHECK(e.line() == line);
            CHECK(e.key() == key);
            CHECK(e.source() == "run.cfg");
            CHECK(std::string(e.what()).find('\n') == std::string::npos);
            CHECK(std::string(e.what()).rfind("config_error source=run.cfg line=", 0) == 0);
        }
    };
    expect("epsilon = 0.01\nbogus = 3\n", 2, "bogus");
    expect("\n\npsi_points = many\n", 3, "psi_points");
    expect("epsilon = 0.01\nepsilon = 0.02\n", 2, "epsilon");
    expect("gamma_g_mhz\n", 1, "gamma_g_mhz");
    expect("# c\nepsilon = 1.5\n", 2, "epsilon");
    expect("psi_points = 4\n", 1, "psi_points");
    expect("rabi_r_mhz = -1\n", 1, "rabi_r_mhz");
    expect("detuning_r_min_mhz = 10\ndetuning_r_max_mhz = 0\n", 2, "detuning_r_max_mhz");
    expect("polarization_g = 0, 0, 0\n", 1, "polarization_g");
    expect("polarization_g = 1, 0\n", 1, "polarization_g");
    expect("fit_free = rabi_g_mhz, nope\n", 1, "fit_free");
    expect("shift_enabled = maybe\n", 1, "shift_enabled");
    expect("epsilon = nan\n", 1, "epsilon");
    expect("seed = -3\n", 1, "seed");
    expect("epsilon = 0.01\n\nepsilon_upper = 0\n", 3, "epsilon_upper");
}

TEST_CASE("overrides apply after the file")
{
    const auto c = parse_config("epsilon = 0.01\n", "run.cfg", {"epsilon=0.03", " psi_points = 16 "});
    CHECK(c.system.mirror.epsilon == 0.03);
    CHECK(c.observe.psi_points == 16);
    CHECK_THROWS_AS(parse_config("", "run.cfg", {"epsilon"}), ConfigError);
    try
    {
        parse_config("", "run.cfg", {"epsilon=2"});
        FAIL("expected an error");
    }
    catch (const ConfigError& e)
    {
        CHECK(e.line() == 0);
        CHECK(e.key() == "epsilon");
    }
}

TEST_CASE("config files")
{
    const auto path = scratch_dir() / "run.cfg";
    {
        std::ofstream out(path);
        out << "larmor_unit_mhz = 0\ndegenerate_policy = minimum_norm\n";
    }
    const auto c = load_config(path);
    CHECK(c.system.scheme.larmor_unit_mhz == 0.0);
    CHECK_THROWS_AS(load_config(scratch_dir() / "absent.cfg"), ConfigError);
}
