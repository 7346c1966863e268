#pragma once

// Synthetic two-channel photon-count records for a mirror scan, and the
// fringe-fit analysis that recovers the correlation phase from them.

#include "ionmirror/observables.hpp"

#include <cstdint>
#include <vector>

namespace ionmirror
{

struct CountBin
{
    double t_s = 0.0;
    double psi_rad = 0.0;
    std::int64_t green_counts = 0;
    std::int64_t red_counts = 0;
};

struct CountRecord
{
    double bin_duration_s = 0.1;
    std::vector<CountBin> bins;

    void validate() const;
};

struct DriftModel
{
    double red_detuning_drift_mhz_per_hour = 2.0;
    double acoustic_phase_jitter_rms_rad = 0.0; // Gaussian jitter of the true psi per bin
};

// Linear mirror-phase ramp.
struct ScanRamp
{
    int periods = 80;
    int bins_per_period = 32;
    double bin_duration_s = 0.1;
    double start_time_s = 0.0; // drift clock at the first bin
    double start_psi_rad = 0.0;
};

// Period-averaged detected rates at the undrifted working point.
struct CountRates
{
    double green_cps = 15000.0;
    double red_cps = 25000.0;
    double dark_cps = 0.0;
};

// Poisson counts per bin with means proportional to the green signal model
// and the P population at the instantaneous (drifted, jittered) parameters.
// Reproducible from the seed.
CountRecord synth_counts(const SystemParams& params, const ScanRamp& ramp, const CountRates& rates,
                         const DriftModel& drift, std::uint64_t seed, const ObservableOptions& options = {});

struct PhaseEstimate
{
    double phase_rad = 0.0;
    double phase_error_rad = 0.0; // propagated 1 sigma
    double green_contrast = 0.0;
    double red_contrast = 0.0;
};

struct ExtractOptions
{
    double contrast_floor = 1e-6;
    // A channel's fringe amplitude must exceed this many standard errors.
    double min_significance = 5.0;
};

// Poisson-weighted sinusoid fit of each channel (two reweighting passes),
// phase difference red - green and its propagated error.
PhaseEstimate extract_correlation_phase(const CountRecord& record, const ExtractOptions& options = {});

} // namespace ionmirror
