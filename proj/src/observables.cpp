#include "ionmirror/observables.hpp"

#include "ionmirror/errors.hpp"
#include "ionmirror/parallel.hpp"

#include <cmath>
#include <sstream>

namespace ionmirror
{

namespace
{

// Rethrows the in-flight solver error with extra context, keeping its type.
[[noreturn]] void rethrow_with_context(const std::string& context)
{
    try
    {
        throw;
    }
    catch (const SingularSystem& e)
    {
        throw SingularSystem(context + ": " + e.what());
    }
    catch (const NonPhysical& e)
    {
        throw NonPhysical(context + ": " + e.what());
    }
    catch (const StepFailure& e)
    {
        throw StepFailure(context + ": " + e.what());
    }
}

std::string psi_context(double psi)
{
    std::ostringstream os;
    os.precision(17);
    os << "psi=" << psi;
    return os.str();
}

struct PointSignals
{
    double red = 0.0;
    double green = 0.0;
};

PointSignals signals_at(const SystemParams& params, double psi, const ObservableOptions& options)
{
    const SystemParams at = params.at_phase(psi);
    try
    {
        const double pop = p_population(solve_steady_state(at, options.solver));
        return {pop, green_signal_from_population(at, pop, options.detection_contrast, options.green_convention)};
    }
    catch (const Error&)
    {
        rethrow_with_context(psi_context(psi));
    }
}

FringeFit solve_fringe(std::span<const double> psi, std::span<const double> y, std::span<const double> weights)
{
    const auto n = static_cast<Eigen::Index>(psi.size());
    if (y.size() != psi.size() || (!weights.empty() && weights.size() != psi.size()))
        throw InvalidArgument("fit_fringe: length mismatch");
    if (n < 3)
        throw DegenerateGrid("fit_fringe: need at least 3 points");

    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const double w = weights.empty() ? 1.0 : std::sqrt(weights[i]);
        if (!(w > 0.0) || !std::isfinite(w))
            throw InvalidArgument("fit_fringe_weighted: weights must be positive and finite");
        design(i, 0) = w;
        design(i, 1) = w * std::cos(psi[i]);
        design(i, 2) = w * std::sin(psi[i]);
        rhs(i) = w * y[i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3)
        throw DegenerateGrid("fit_fringe: design matrix is rank deficient");
    const Eigen::Vector3d coef = qr.solve(rhs);
    const Eigen::VectorXd resid = rhs - design * coef;

    FringeFit fit;
    fit.mean = coef(0);
    fit.cos_amp = coef(1);
    fit.sin_amp = coef(2);
    const double amp = fit.amplitude();
    fit.phase_defined = amp > 0.0 && amp > 1e-12 * std::abs(fit.mean);
    fit.phase_rad = fit.phase_defined ? wrap_phase(std::atan2(fit.sin_amp, fit.cos_amp)) : 0.0;
    fit.contrast = amp == 0.0 ? 0.0 : amp / std::abs(fit.mean);
    fit.residual_norm = resid.norm();
    fit.max_residual = weights.empty() ? resid.cwiseAbs().maxCoeff() : 0.0;
    if (!weights.empty())
        for (Eigen::Index i = 0; i < n; ++i)
            fit.max_residual = std::max(fit.max_residual, std::abs(resid(i)) / std::sqrt(weights[i]));

    const Eigen::Matrix3d normal_inv = (design.transpose() * design).inverse();
    if (weights.empty())
        fit.covariance = n > 3 ? Eigen::Matrix3d((resid.squaredNorm() / double(n - 3)) * normal_inv)
                               : Eigen::Matrix3d::Zero().eval();
    else
        fit.covariance = normal_inv;
    return fit;
}

} // namespace

std::vector<double> uniform_phase_grid(int n)
{
    if (n < 1)
        throw InvalidArgument("uniform_phase_grid: need at least one point");
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k)
        out[k] = kTwoPi * k / n;
    return out;
}

std::vector<double> linear_grid(double lo, double hi, int n)
{
    if (n < 1)
        throw InvalidArgument("linear_grid: need at least one point");
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k)
        out[k] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
    return out;
}

double green_signal_from_population(const SystemParams& params, double p_population, double detection_contrast,
                                    GreenConvention convention)
{
    if (!(detection_contrast >= 0.0 && detection_contrast <= 1.0))
        throw InvalidArgument("detection contrast must lie in [0, 1]");
    const double sign = convention == GreenConvention::EnhancedDecayMaximum ? -1.0 : 1.0;
    return p_population * modified_gamma(params.rates, params.mirror) *
           (1.0 + sign * detection_contrast * std::cos(params.mirror.psi_rad));
}

double green_signal_model(const SystemParams& params, double detection_contrast, GreenConvention convention,
                          const SteadyStateOptions<double>& solver)
{
    const double pop = p_population(solve_steady_state(params, solver));
    return green_signal_from_population(params, pop, detection_contrast, convention);
}

double FringeFit::amplitude() const
{
    return std::hypot(cos_amp, sin_amp);
}

namespace detail
{

FringeScan fringe_scan_serial(const SystemParams& params, int n_points, const ObservableOptions& options)
{
    if (n_points < 8)
        throw InvalidArgument("fringe_scan: need at least 8 phase points");
    FringeScan scan;
    scan.psi_rad = uniform_phase_grid(n_points);
    scan.red_signal.resize(n_points);
    scan.green_signal.resize(n_points);
    for (int k = 0; k < n_points; ++k)
    {
        const auto s = signals_at(params, scan.psi_rad[k], options);
        scan.red_signal[k] = s.red;
        scan.green_signal[k] = s.green;
    }
    return scan;
}

} // namespace detail

FringeScan fringe_scan(const SystemParams& params, int n_points, const ObservableOptions& options)
{
    if (n_points < 8)
        throw InvalidArgument("fringe_scan: need at least 8 phase points");
    params.validate();
    FringeScan scan;
    scan.psi_rad = uniform_phase_grid(n_points);
    const auto signals = parallel_map<PointSignals>(
        n_points, [&](std::size_t k) { return signals_at(params, scan.psi_rad[k], options); });
    for (const auto& s : signals)
    {
        scan.red_signal.push_back(s.red);
        scan.green_signal.push_back(s.green);
    }
    return scan;
}

FringeFit fit_fringe(std::span<const double> psi, std::span<const double> y)
{
    return solve_fringe(psi, y, {});
}

FringeFit fit_fringe_weighted(std::span<const double> psi, std::span<const double> y,
                              std::span<const double> weights)
{
    if (weights.size() != psi.size())
        throw InvalidArgument("fit_fringe_weighted: length mismatch");
    return solve_fringe(psi, y, weights);
}

double correlation_phase(const FringeFit& green, const FringeFit& red, double contrast_floor)
{
    if (!green.phase_defined || !(green.contrast >= contrast_floor))
        throw UndefinedPhase("correlation_phase: green contrast below floor");
    if (!red.phase_defined || !(red.contrast >= contrast_floor))
        throw UndefinedPhase("correlation_phase: red contrast below floor");
    return wrap_phase(red.phase_rad - green.phase_rad);
}

ExpansionCoefficients expansion_coefficients(const SystemParams& params, const ObservableOptions& options)
{
    if (!(params.mirror.epsilon > 0.0))
        throw InvalidArgument("expansion_coefficients: epsilon must be > 0");
    const auto scan = fringe_scan(params, options.psi_points, options);
    const auto fit = fit_fringe(scan.psi_rad, scan.red_signal);
    const double eps = params.mirror.epsilon;
    return {fit.mean, fit.cos_amp / eps, fit.sin_amp / eps};
}

std::vector<PhasePoint> phase_vs_detuning(const SystemParams& params, std::span<const double> red_detuning_grid,
                                          const ObservableOptions& options)
{
    if (red_detuning_grid.empty())
        throw InvalidArgument("phase_vs_detuning: empty detuning grid");
    params.validate();
    return parallel_map<PhasePoint>(red_detuning_grid.size(), [&](std::size_t i) {
        PhasePoint point;
        point.detuning_r_mhz = red_detuning_grid[i];
        try
        {
            const auto scan =
                detail::fringe_scan_serial(params.with_red_detuning(point.detuning_r_mhz), options.psi_points, options);
            const auto red = fit_fringe(scan.psi_rad, scan.red_signal);
            const auto green = fit_fringe(scan.psi_rad, scan.green_signal);
            point.solver_ok = true;
            point.red_contrast = red.contrast;
            try
            {
                point.phase_rad = correlation_phase(green, red, options.contrast_floor);
                point.phase_defined = true;
            }
            catch (const UndefinedPhase& e)
            {
                point.note = e.what();
            }
        }
        catch (const Error& e)
        {
            point.note = e.what();
        }
        return point;
    });
}

std::vector<ContrastPoint> contrast_vs_detuning(const SystemParams& params, std::span<const double> red_detuning_grid,
                                                const ObservableOptions& options)
{
    if (red_detuning_grid.empty())
        throw InvalidArgument("contrast_vs_detuning: empty detuning grid");
    params.validate();
    return parallel_map<ContrastPoint>(red_detuning_grid.size(), [&](std::size_t i) {
        ContrastPoint point;
        point.detuning_r_mhz = red_detuning_grid[i];
        try
        {
            const auto scan =
                detail::fringe_scan_serial(params.with_red_detuning(point.detuning_r_mhz), options.psi_points, options);
            point.red_contrast = fit_fringe(scan.psi_rad, scan.red_signal).contrast;
            point.ok = true;
        }
        catch (const Error&)
        {
        }
        return point;
    });
}

std::vector<SpectrumPoint> excitation_spectrum(const SystemParams& params, std::span<const double> red_detuning_grid,
                                               const SteadyStateOptions<double>& solver)
{
    if (red_detuning_grid.empty())
        throw InvalidArgument("excitation_spectrum: empty detuning grid");
    params.validate();
    return parallel_map<SpectrumPoint>(red_detuning_grid.size(), [&](std::size_t i) {
        SpectrumPoint point;
        point.detuning_r_mhz = red_detuning_grid[i];
        try
        {
            point.p_population = p_population(solve_steady_state(params.with_red_detuning(point.detuning_r_mhz), solver));
            point.ok = true;
        }
        catch (const Error& e)
        {
            point.note = e.what();
        }
        return point;
    });
}

} // namespace ionmirror
