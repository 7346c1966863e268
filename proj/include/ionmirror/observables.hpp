#pragma once

// Measurable quantities of the mirror experiment: fringe scans over the
// mirror phase, sinusoid fits, correlation phase, red fringe contrast,
// small-epsilon expansion coefficients and excitation spectra.

#include "ionmirror/ion_model.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace ionmirror
{

// Sign of the detection modulation of the green channel.
enum class GreenConvention
{
    EnhancedDecayMaximum,  // (1 - C cos psi): detected maximum at enhanced decay
    SuppressedDecayMaximum // (1 + C cos psi)
};

struct ObservableOptions
{
    double detection_contrast = 0.72;
    GreenConvention green_convention = GreenConvention::EnhancedDecayMaximum;
    double contrast_floor = 1e-6;
    int psi_points = 32;
    SteadyStateOptions<double> solver;
};

// Uniform grid of n phases 2 pi k / n, k = 0..n-1.
std::vector<double> uniform_phase_grid(int n);

// n evenly spaced values from lo to hi inclusive (a single point gives lo).
std::vector<double> linear_grid(double lo, double hi, int n);

// kappa * P_P * Gamma_g(psi) * (1 -+ C cos psi) with kappa = 1 / MHz.
double green_signal_from_population(const SystemParams& params, double p_population, double detection_contrast,
                                    GreenConvention convention = GreenConvention::EnhancedDecayMaximum);

double green_signal_model(const SystemParams& params, double detection_contrast,
                          GreenConvention convention = GreenConvention::EnhancedDecayMaximum,
                          const SteadyStateOptions<double>& solver = {});

struct FringeScan
{
    std::vector<double> psi_rad;
    std::vector<double> red_signal;   // P1/2 population
    std::vector<double> green_signal; // modeled green rate
};

// Steady state and both signals on uniform_phase_grid(n_points).
FringeScan fringe_scan(const SystemParams& params, int n_points, const ObservableOptions& options = {});

// Least-squares fit y = mean + cos_amp cos psi + sin_amp sin psi.
struct FringeFit
{
    double mean = 0.0;
    double cos_amp = 0.0;
    double sin_amp = 0.0;
    double phase_rad = 0.0; // atan2(sin_amp, cos_amp) in [0, 2pi)
    double contrast = 0.0;  // hypot(cos_amp, sin_amp) / mean
    bool phase_defined = false;
    double residual_norm = 0.0;
    double max_residual = 0.0;
    // Parameter covariance (mean, cos_amp, sin_amp). For the unweighted fit it
    // is scaled by the residual variance; for the weighted fit it is
    // (X^T W X)^-1 with W = 1/sigma^2.
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();

    double amplitude() const;
};

FringeFit fit_fringe(std::span<const double> psi, std::span<const double> y);
FringeFit fit_fringe_weighted(std::span<const double> psi, std::span<const double> y,
                              std::span<const double> weights);

// (red.phase - green.phase) mod 2pi; 0 = correlated, pi = anti-correlated.
double correlation_phase(const FringeFit& green, const FringeFit& red, double contrast_floor = 1e-6);

struct ExpansionCoefficients
{
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
};

// P_P ~ A1 + eps (A2 cos psi + A3 sin psi), from a fitted red fringe scan.
ExpansionCoefficients expansion_coefficients(const SystemParams& params, const ObservableOptions& options = {});

struct PhasePoint
{
    double detuning_r_mhz = 0.0;
    double phase_rad = 0.0;
    double red_contrast = 0.0;
    bool phase_defined = false;
    bool solver_ok = false;
    std::string note;
};

std::vector<PhasePoint> phase_vs_detuning(const SystemParams& params, std::span<const double> red_detuning_grid,
                                          const ObservableOptions& options = {});

struct ContrastPoint
{
    double detuning_r_mhz = 0.0;
    double red_contrast = 0.0;
    bool ok = false;
};

std::vector<ContrastPoint> contrast_vs_detuning(const SystemParams& params, std::span<const double> red_detuning_grid,
                                                const ObservableOptions& options = {});

struct SpectrumPoint
{
    double detuning_r_mhz = 0.0;
    double p_population = 0.0;
    bool ok = false;
    std::string note;
};

std::vector<SpectrumPoint> excitation_spectrum(const SystemParams& params, std::span<const double> red_detuning_grid,
                                               const SteadyStateOptions<double>& solver = {});

namespace detail
{
// Single-threaded fringe scan; used inside already parallel sweeps.
FringeScan fringe_scan_serial(const SystemParams& params, int n_points, const ObservableOptions& options);
} // namespace detail

} // namespace ionmirror
