#pragma once

// Bounded Levenberg-Marquardt fitting with central-difference Jacobians, and
// the two calibration fits built on it: excitation spectra and red fringe
// contrast curves.

#include "ionmirror/observables.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ionmirror
{

struct Observation
{
    double x = 0.0;
    double y = 0.0;
    double sigma = 1.0;
};

struct FreeParameter
{
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
};

// Maps free-parameter values (in FreeParameter order) to one prediction per
// observation. Fixed parameters live in the closure.
using ModelFunction = std::function<std::vector<double>(std::span<const double> values)>;

struct FitProblem
{
    std::vector<Observation> observed;
    std::vector<FreeParameter> free_params;
    ModelFunction model;

    void validate() const;
};

enum class Convergence
{
    Converged,
    MaxIter,
    Stalled
};

std::string to_string(Convergence c);

struct FitConfig
{
    int max_iter = 100;
    double tol = 1e-10;          // relative chi2 change that counts as converged
    double relative_step = 1e-5; // central-difference step per parameter
};

struct FitResult
{
    std::vector<std::string> names;
    std::vector<double> values;
    // From the local quadratic approximation (J^T J)^-1 at the optimum;
    // approximate by construction.
    std::vector<double> uncertainties;
    double chi2 = 0.0;
    Convergence convergence = Convergence::MaxIter;
    int iterations = 0;
    std::vector<double> chi2_history; // chi2 after each accepted step, starting at the initial point

    double value(std::string_view name) const;
    double uncertainty(std::string_view name) const;
};

double chi_square(const FitProblem& problem, std::span<const double> values);

FitResult nlls_fit(const FitProblem& problem, std::span<const double> initial, const FitConfig& config = {});

// Default search interval for a named system parameter.
FreeParameter default_bounds(const std::string& name);

struct SpectrumFitOptions
{
    std::vector<std::string> free = {"rabi_g_mhz", "rabi_r_mhz", "detuning_g_mhz", "larmor_unit_mhz"};
    // Observed y = signal_scale * P population.
    double signal_scale = 1.0;
    FitConfig fit;
    SteadyStateOptions<double> solver;
};

// Fits an excitation spectrum (x = red detuning in MHz). Start values for the
// free parameters are taken from `initial`.
FitResult fit_spectrum(std::span<const Observation> data, const SystemParams& initial,
                       const SpectrumFitOptions& options = {});

struct EpsilonFitOptions
{
    double epsilon_upper = 0.5;
    FitConfig fit;
    ObservableOptions observe;
};

// Fits epsilon to red fringe contrast vs. red detuning (x in MHz).
FitResult fit_epsilon(std::span<const Observation> contrast_data, const SystemParams& initial,
                      const EpsilonFitOptions& options = {});

} // namespace ionmirror
