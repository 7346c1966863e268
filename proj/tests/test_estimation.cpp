#include "ionmirror/estimation.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ionmirror;

namespace
{

FitProblem sinusoid_problem(double a, double b, double c)
{
    FitProblem problem;
    for (int k = 0; k < 24; ++k)
    {
        const double x = kTwoPi * k / 24;
        problem.observed.push_back({x, a + b * std::cos(x) + c * std::sin(x), 0.01});
    }
    problem.free_params = {{"a", -10, 10}, {"b", -10, 10}, {"c", -10, 10}};
    problem.model = [xs = problem.observed](std::span<const double> v) {
        std::vector<double> out;
        for (const auto& o : xs)
            out.push_back(v[0] + v[1] * std::cos(o.x) + v[2] * std::sin(o.x));
        return out;
    };
    return problem;
}

std::vector<Observation> noiseless_spectrum(const SystemParams& p, const std::vector<double>& grid, double scale = 1.0)
{
    std::vector<Observation> out;
    for (const auto& pt : excitation_spectrum(p, grid))
        out.push_back({pt.detuning_r_mhz, scale * pt.p_population, 1e-4 * scale});
    return out;
}

std::vector<Observation> contrast_data(const SystemParams& p, const std::vector<double>& grid, double scale = 1.0)
{
    std::vector<Observation> out;
    for (const auto& pt : contrast_vs_detuning(p, grid))
        out.push_back({pt.detuning_r_mhz, scale * pt.red_contrast, 1e-4});
    return out;
}

} // namespace

TEST_CASE("linear sinusoid recovery")
{
    const auto problem = sinusoid_problem(1.5, -0.4, 0.25);
    const std::vector<double> start{0.0, 0.0, 0.0};
    const auto r = nlls_fit(problem, start);
    CHECK(r.convergence == Convergence::Converged);
    CHECK(std::abs(r.values[0] - 1.5) < 1e-8);
    CHECK(std::abs(r.values[1] + 0.4) < 1e-8);
    CHECK(std::abs(r.values[2] - 0.25) < 1e-8);
    CHECK(r.chi2 < 1e-12);
    CHECK(r.value("b") == r.values[1]);
    CHECK(r.uncertainty("c") == doctest::Approx(0.01 * std::sqrt(2.0 / 24)).epsilon(1e-6));
}

TEST_CASE("chi2 history is non-increasing and fits are deterministic")
{
    const auto problem = sinusoid_problem(2.0, 1.0, -1.0);
    const std::vector<double> start{0.1, 0.1, 0.1};
    const auto a = nlls_fit(problem, start);
    const auto b = nlls_fit(problem, start);
    CHECK(a.values == b.values);
    CHECK(a.chi2 == b.chi2);
    for (std::size_t i = 1; i < a.chi2_history.size(); ++i)
        CHECK(a.chi2_history[i] <= a.chi2_history[i - 1]);
}

TEST_CASE("zero iterations returns the initial point")
{
    const auto problem = sinusoid_problem(2.0, 1.0, -1.0);
    const std::vector<double> start{0.5, 0.0, 0.0};
    FitConfig cfg;
    cfg.max_iter = 0;
    const auto r = nlls_fit(problem, start, cfg);
    CHECK(r.values == start);
    CHECK(r.chi2 == chi_square(problem, start));
    CHECK(r.iterations == 0);
}

TEST_CASE("fit problem validation")
{
    auto problem = sinusoid_problem(1.0, 0.0, 0.0);
    const std::vector<double> outside{20.0, 0.0, 0.0};
    CHECK_THROWS_AS(nlls_fit(problem, outside), InvalidArgument);
    problem.observed[0].sigma = 0.0;
    CHECK_THROWS_AS(problem.validate(), InvalidArgument);

    auto failing = sinusoid_problem(1.0, 0.0, 0.0);
    failing.model = [](std::span<const double>) -> std::vector<double> { throw SingularSystem("boom"); };
    const std::vector<double> start{0.0, 0.0, 0.0};
    CHECK_THROWS_AS(nlls_fit(failing, start), BadInitial);
    CHECK_THROWS_AS(default_bounds("nope"), InvalidArgument);
}

TEST_CASE("green detuning roundtrip on a noiseless spectrum")
{
    const auto truth = SystemParams::defaults();
    // The dark resonances are narrow, so the grid resolves them and the start
    // lies within the +-1 MHz a detuning is typically known to.
    const auto data = noiseless_spectrum(truth, linear_grid(-30.0, 20.0, 101));
    auto start = truth;
    start.green.detuning_mhz = -9.0;
    SpectrumFitOptions opts;
    opts.free = {"detuning_g_mhz"};
    const auto r = fit_spectrum(data, start, opts);
    CHECK(std::abs(r.value("detuning_g_mhz") + 10.0) < 0.01);
}

TEST_CASE("four-parameter spectrum roundtrip")
{
    const auto truth = SystemParams::defaults();
    const auto data = noiseless_spectrum(truth, linear_grid(-30.0, 20.0, 101));
    auto start = truth;
    start.green.rabi_mhz = 10.8;
    start.red.rabi_mhz = 9.4;
    start.green.detuning_mhz = -9.4;
    start.scheme.larmor_unit_mhz = 3.2;
    const auto r = fit_spectrum(data, start);
    CHECK(r.convergence == Convergence::Converged);
    for (const auto& name : r.names)
    {
        CAPTURE(name);
        CHECK(std::abs(r.value(name) / get_parameter(truth, name) - 1.0) < 0.01);
    }
}

TEST_CASE("a wrong model is never reported as a good fit")
{
    const auto truth = SystemParams::defaults();
    const auto data = noiseless_spectrum(truth, linear_grid(-40.0, 30.0, 36));
    auto start = truth;
    start.green.detuning_mhz = -25.0;
    start.red.rabi_mhz = 25.0;
    start.scheme.larmor_unit_mhz = 1.0;
    SpectrumFitOptions opts;
    opts.free = {"rabi_g_mhz"};
    const auto r = fit_spectrum(data, start, opts);
    const bool visible = r.convergence != Convergence::Converged || r.chi2 > 100.0 * data.size();
    CHECK(visible);
}

TEST_CASE("spectrum fit with Poisson noise is calibrated")
{
    // Red counts per 0.1 s bin at about 25e3 cps for the mean P population.
    const auto truth = SystemParams::defaults();
    const auto grid = linear_grid(-40.0, 30.0, 24);
    const auto clean = excitation_spectrum(truth, grid);
    double mean_p = 0.0;
    for (const auto& pt : clean)
        mean_p += pt.p_population / clean.size();
    const double scale = 2500.0 / mean_p;

    SpectrumFitOptions opts;
    opts.signal_scale = scale;
    opts.fit.max_iter = 30;
    std::mt19937_64 rng(2024);
    const int trials = 50;
    int covered = 0;
    for (int t = 0; t < trials; ++t)
    {
        std::vector<Observation> data;
        for (const auto& pt : clean)
        {
            std::poisson_distribution<long> draw(scale * pt.p_population);
            const double n = static_cast<double>(draw(rng));
            data.push_back({pt.detuning_r_mhz, n, std::sqrt(std::max(n, 1.0))});
        }
        const auto r = fit_spectrum(data, truth, opts);
        bool all = true;
        for (const auto& name : r.names)
            all = all && std::abs(r.value(name) - get_parameter(truth, name)) <= 3.0 * r.uncertainty(name);
        covered += all ? 1 : 0;
    }
    CHECK(covered >= 45);
}

TEST_CASE("epsilon roundtrips")
{
    const auto grid = linear_grid(-50.0, 50.0, 11);
    auto truth = SystemParams::defaults();
    truth.mirror.epsilon = 0.016;
    const auto data = contrast_data(truth, grid);

    auto start = truth;
    start.mirror.epsilon = 0.03;
    const auto r = fit_epsilon(data, start);
    CHECK(std::abs(r.value("epsilon") - 0.016) <= 0.001);

    const auto doubled = fit_epsilon(contrast_data(truth, grid, 2.0), start);
    CHECK(doubled.value("epsilon") / r.value("epsilon") == doctest::Approx(2.0).epsilon(0.05));

    std::vector<Observation> zero;
    for (double x : grid)
        zero.push_back({x, 0.0, 1e-4});
    CHECK(fit_epsilon(zero, start).value("epsilon") <= 0.001);
}
