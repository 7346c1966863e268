#include "ionmirror/estimation.hpp"

#include "ionmirror/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ionmirror
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

// Weighted residuals (y - model) / sigma; throws on model failure.
Eigen::VectorXd residuals(const FitProblem& problem, std::span<const double> values)
{
    const auto predicted = problem.model(values);
    if (predicted.size() != problem.observed.size())
        throw InvalidArgument("fit model returned wrong number of predictions");
    Eigen::VectorXd r(static_cast<Eigen::Index>(predicted.size()));
    for (std::size_t i = 0; i < predicted.size(); ++i)
    {
        const auto& o = problem.observed[i];
        r(static_cast<Eigen::Index>(i)) = (o.y - predicted[i]) / o.sigma;
    }
    if (!r.allFinite())
        throw InvalidArgument("fit model produced non-finite values");
    return r;
}

// chi2 of a trial point; infinite when the model cannot be evaluated there.
double trial_chi2(const FitProblem& problem, std::span<const double> values)
{
    try
    {
        return residuals(problem, values).squaredNorm();
    }
    catch (const Error&)
    {
        return kInf;
    }
}

std::vector<double> clamp_to_bounds(const FitProblem& problem, const Eigen::VectorXd& x)
{
    std::vector<double> out(problem.free_params.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(x(static_cast<Eigen::Index>(i)), problem.free_params[i].lower, problem.free_params[i].upper);
    return out;
}

// Jacobian of the weighted model (m / sigma), central differences shifted
// inwards at the bounds.
Eigen::MatrixXd jacobian(const FitProblem& problem, const std::vector<double>& x, double relative_step)
{
    const auto m = static_cast<Eigen::Index>(problem.observed.size());
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd jac(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
    {
        const auto& fp = problem.free_params[static_cast<std::size_t>(j)];
        const double scale = std::max(std::abs(x[j]), 1e-3 * (fp.upper - fp.lower));
        const double h = relative_step * scale;
        double lo = x[j] - h;
        double hi = x[j] + h;
        if (lo < fp.lower)
        {
            lo = x[j];
            hi = x[j] + h;
        }
        else if (hi > fp.upper)
        {
            lo = x[j] - h;
            hi = x[j];
        }
        std::vector<double> xp = x;
        std::vector<double> xm = x;
        xp[j] = hi;
        xm[j] = lo;
        // residual = (y - m)/sigma, so d(m/sigma) = -d(residual)
        jac.col(j) = (residuals(problem, xm) - residuals(problem, xp)) / (hi - lo);
    }
    return jac;
}

Eigen::VectorXd to_vector(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

void FitProblem::validate() const
{
    if (free_params.empty())
        throw InvalidArgument("fit problem needs at least one free parameter");
    if (observed.empty())
        throw InvalidArgument("fit problem needs observations");
    for (const auto& o : observed)
        if (!(o.sigma > 0.0) || !std::isfinite(o.sigma) || !std::isfinite(o.x) || !std::isfinite(o.y))
            throw InvalidArgument("observations need finite values and sigma > 0");
    for (const auto& p : free_params)
        if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower < p.upper))
            throw InvalidArgument("bounds of '" + p.name + "' must be finite and ordered");
    if (!model)
        throw InvalidArgument("fit problem has no model");
}

std::string to_string(Convergence c)
{
    switch (c)
    {
    case Convergence::Converged: return "converged";
    case Convergence::MaxIter: return "max_iter";
    case Convergence::Stalled: return "stalled";
    }
    return "?";
}

double FitResult::value(std::string_view name) const
{
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name)
            return values[i];
    throw InvalidArgument("fit result has no parameter '" + std::string(name) + "'");
}

double FitResult::uncertainty(std::string_view name) const
{
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name)
            return uncertainties[i];
    throw InvalidArgument("fit result has no parameter '" + std::string(name) + "'");
}

double chi_square(const FitProblem& problem, std::span<const double> values)
{
    return residuals(problem, values).squaredNorm();
}

FitResult nlls_fit(const FitProblem& problem, std::span<const double> initial, const FitConfig& config)
{
    problem.validate();
    if (initial.size() != problem.free_params.size())
        throw InvalidArgument("nlls_fit: initial point has wrong dimension");
    for (std::size_t i = 0; i < initial.size(); ++i)
    {
        const auto& fp = problem.free_params[i];
        if (!(initial[i] >= fp.lower && initial[i] <= fp.upper))
            throw InvalidArgument("nlls_fit: initial value of '" + fp.name + "' outside its bounds");
    }

    FitResult result;
    for (const auto& fp : problem.free_params)
        result.names.push_back(fp.name);
    std::vector<double> x(initial.begin(), initial.end());

    Eigen::VectorXd r;
    try
    {
        r = residuals(problem, x);
    }
    catch (const Error& e)
    {
        throw BadInitial(std::string("nlls_fit: model fails at the initial point: ") + e.what());
    }
    double chi2 = r.squaredNorm();
    result.chi2_history.push_back(chi2);

    const auto n = static_cast<Eigen::Index>(x.size());
    double lambda = 1e-3;
    Eigen::MatrixXd jac;
    bool have_jacobian = false;
    result.convergence = Convergence::MaxIter;

    for (int it = 0; it < config.max_iter; ++it)
    {
        result.iterations = it + 1;
        if (chi2 == 0.0)
        {
            result.convergence = Convergence::Converged;
            break;
        }
        try
        {
            jac = jacobian(problem, x, config.relative_step);
        }
        catch (const Error&)
        {
            result.convergence = Convergence::Stalled;
            break;
        }
        have_jacobian = true;
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        const Eigen::VectorXd gradient = jac.transpose() * r;
        Eigen::VectorXd diag = normal.diagonal();
        for (Eigen::Index j = 0; j < n; ++j)
            if (!(diag(j) > 0.0))
                diag(j) = 1e-12;

        bool accepted = false;
        double chi2_new = kInf;
        std::vector<double> x_new;
        while (lambda <= 1e12)
        {
            Eigen::MatrixXd damped = normal;
            damped.diagonal() += lambda * diag;
            const Eigen::VectorXd step = damped.ldlt().solve(gradient);
            x_new = clamp_to_bounds(problem, to_vector(x) + step);
            chi2_new = trial_chi2(problem, x_new);
            if (chi2_new < chi2)
            {
                accepted = true;
                lambda = std::max(lambda / 10.0, 1e-12);
                break;
            }
            lambda *= 10.0;
        }

        if (!accepted)
        {
            // No downhill step: converged if Gauss-Newton predicts no useful decrease.
            const Eigen::VectorXd gn = normal.completeOrthogonalDecomposition().solve(gradient);
            const double predicted = gradient.dot(gn);
            result.convergence = predicted <= std::max(config.tol * chi2, 1e-24) ? Convergence::Converged
                                                                                   : Convergence::Stalled;
            break;
        }

        const double relative_change = (chi2 - chi2_new) / std::max(chi2, std::numeric_limits<double>::min());
        x = std::move(x_new);
        chi2 = chi2_new;
        r = residuals(problem, x);
        have_jacobian = false;
        result.chi2_history.push_back(chi2);
        if (relative_change < config.tol)
        {
            result.convergence = Convergence::Converged;
            break;
        }
    }

    result.values = x;
    result.chi2 = chi2;
    result.uncertainties.assign(x.size(), std::numeric_limits<double>::quiet_NaN());
    try
    {
        if (!have_jacobian)
            jac = jacobian(problem, x, config.relative_step);
        const Eigen::MatrixXd cov =
            (jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse();
        for (Eigen::Index j = 0; j < n; ++j)
            result.uncertainties[static_cast<std::size_t>(j)] = std::sqrt(std::max(cov(j, j), 0.0));
    }
    catch (const Error&)
    {
    }
    return result;
}

FreeParameter default_bounds(const std::string& name)
{
    if (name == "rabi_g_mhz" || name == "rabi_r_mhz")
        return {name, 0.01, 200.0};
    if (name == "detuning_g_mhz" || name == "detuning_r_mhz")
        return {name, -200.0, 200.0};
    if (name == "larmor_unit_mhz")
        return {name, 0.0, 50.0};
    if (name == "gamma_g_mhz" || name == "gamma_r_mhz")
        return {name, 0.1, 100.0};
    if (name == "epsilon")
        return {name, 0.0, 0.5};
    if (name == "psi_rad")
        return {name, 0.0, kTwoPi - 1e-12};
    throw InvalidArgument("unknown parameter '" + name + "'");
}

FitResult fit_spectrum(std::span<const Observation> data, const SystemParams& initial,
                       const SpectrumFitOptions& options)
{
    FitProblem problem;
    problem.observed.assign(data.begin(), data.end());
    std::vector<double> start;
    for (const auto& name : options.free)
    {
        problem.free_params.push_back(default_bounds(name));
        start.push_back(get_parameter(initial, name));
    }
    std::vector<double> grid;
    for (const auto& o : data)
        grid.push_back(o.x);

    problem.model = [&](std::span<const double> values) {
        SystemParams p = initial;
        for (std::size_t i = 0; i < values.size(); ++i)
            set_parameter(p, options.free[i], values[i]);
        const auto spectrum = excitation_spectrum(p, grid, options.solver);
        std::vector<double> out;
        out.reserve(spectrum.size());
        for (const auto& point : spectrum)
        {
            if (!point.ok)
                throw SingularSystem("fit_spectrum: " + point.note);
            out.push_back(options.signal_scale * point.p_population);
        }
        return out;
    };
    return nlls_fit(problem, start, options.fit);
}

FitResult fit_epsilon(std::span<const Observation> contrast_data, const SystemParams& initial,
                      const EpsilonFitOptions& options)
{
    FitProblem problem;
    problem.observed.assign(contrast_data.begin(), contrast_data.end());
    problem.free_params.push_back({"epsilon", 0.0, options.epsilon_upper});
    std::vector<double> grid;
    for (const auto& o : contrast_data)
        grid.push_back(o.x);

    problem.model = [&](std::span<const double> values) {
        SystemParams p = initial;
        p.mirror.epsilon = values[0];
        const auto curve = contrast_vs_detuning(p, grid, options.observe);
        std::vector<double> out;
        out.reserve(curve.size());
        for (const auto& point : curve)
        {
            if (!point.ok)
                throw SingularSystem("fit_epsilon: steady state failed");
            out.push_back(point.red_contrast);
        }
        return out;
    };
    const double start = std::clamp(initial.mirror.epsilon, 0.0, options.epsilon_upper);
    return nlls_fit(problem, std::span<const double>(&start, 1), options.fit);
}

} // namespace ionmirror
