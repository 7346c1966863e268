#include "ionmirror/photon_counts.hpp"

#include "ionmirror/errors.hpp"
#include "ionmirror/parallel.hpp"

#include <cmath>
#include <map>
#include <random>
#include <utility>

namespace ionmirror
{

void CountRecord::validate() const
{
    if (!(bin_duration_s > 0.0))
        throw InvalidArgument("count record bin duration must be > 0");
    for (std::size_t i = 0; i < bins.size(); ++i)
    {
        if (bins[i].green_counts < 0 || bins[i].red_counts < 0)
            throw InvalidArgument("count record holds negative counts");
        if (i > 0 && !(bins[i].t_s > bins[i - 1].t_s))
            throw InvalidArgument("count record times must be strictly increasing");
    }
}

namespace
{

struct ChannelMeans
{
    double green = 0.0;
    double red = 0.0;
};

ChannelMeans signals_at(const SystemParams& params, const ObservableOptions& options)
{
    const double pop = p_population(solve_steady_state(params, options.solver));
    return {green_signal_from_population(params, pop, options.detection_contrast, options.green_convention), pop};
}

std::int64_t draw_poisson(std::mt19937_64& rng, double mean)
{
    if (!(mean > 0.0))
        return 0;
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(rng);
}

struct ChannelFit
{
    FringeFit fit;
    double phase_variance = 0.0;
    double amplitude_sigma = 0.0;
};

// Weighted fit with Poisson variances: first from the counts, then from the
// first-pass model.
ChannelFit fit_channel(const std::vector<double>& psi, const std::vector<double>& counts)
{
    std::vector<double> weights(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        weights[i] = 1.0 / std::max(counts[i], 1.0);
    FringeFit fit = fit_fringe_weighted(psi, counts, weights);
    for (std::size_t i = 0; i < counts.size(); ++i)
    {
        const double model = fit.mean + fit.cos_amp * std::cos(psi[i]) + fit.sin_amp * std::sin(psi[i]);
        weights[i] = 1.0 / std::max(model, 1.0);
    }
    fit = fit_fringe_weighted(psi, counts, weights);

    ChannelFit out{fit};
    const double b = fit.cos_amp;
    const double c = fit.sin_amp;
    const double a2 = b * b + c * c;
    const auto& cov = fit.covariance;
    if (a2 > 0.0)
    {
        out.phase_variance = (c * c * cov(1, 1) + b * b * cov(2, 2) - 2.0 * b * c * cov(1, 2)) / (a2 * a2);
        out.amplitude_sigma = std::sqrt(std::max(0.0, (b * b * cov(1, 1) + c * c * cov(2, 2) + 2.0 * b * c * cov(1, 2)) / a2));
    }
    return out;
}

} // namespace

CountRecord synth_counts(const SystemParams& params, const ScanRamp& ramp, const CountRates& rates,
                         const DriftModel& drift, std::uint64_t seed, const ObservableOptions& options)
{
    params.validate();
    if (ramp.periods < 1 || ramp.bins_per_period < 3)
        throw InvalidArgument("synth_counts: need >= 1 period and >= 3 bins per period");
    if (!(ramp.bin_duration_s > 0.0))
        throw InvalidArgument("synth_counts: bin duration must be > 0");
    if (!(rates.green_cps >= 0.0) || !(rates.red_cps >= 0.0) || !(rates.dark_cps >= 0.0))
        throw InvalidArgument("synth_counts: count rates must be >= 0");
    if (!(drift.acoustic_phase_jitter_rms_rad >= 0.0))
        throw InvalidArgument("synth_counts: phase jitter must be >= 0");

    // Period averages at the undrifted working point set the rate scale.
    const auto reference = fringe_scan(params, std::max(ramp.bins_per_period, 8), options);
    double green_ref = 0.0;
    double red_ref = 0.0;
    for (std::size_t k = 0; k < reference.psi_rad.size(); ++k)
    {
        green_ref += reference.green_signal[k];
        red_ref += reference.red_signal[k];
    }
    green_ref /= static_cast<double>(reference.psi_rad.size());
    red_ref /= static_cast<double>(reference.psi_rad.size());
    if (!(green_ref > 0.0) || !(red_ref > 0.0))
        throw InvalidArgument("synth_counts: model signals vanish at the working point");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, 1.0);

    const std::size_t n_bins = static_cast<std::size_t>(ramp.periods) * ramp.bins_per_period;
    CountRecord record;
    record.bin_duration_s = ramp.bin_duration_s;
    record.bins.resize(n_bins);

    // Instantaneous parameters first (sequential, consumes the jitter stream).
    std::vector<std::pair<double, double>> points(n_bins); // (true psi, red detuning)
    for (std::size_t k = 0; k < n_bins; ++k)
    {
        // Whole periods are dropped so repeated phases are bitwise equal.
        const double nominal =
            ramp.start_psi_rad + kTwoPi * static_cast<double>(k % ramp.bins_per_period) / ramp.bins_per_period;
        const double t = ramp.start_time_s + static_cast<double>(k) * ramp.bin_duration_s;
        double true_psi = nominal;
        if (drift.acoustic_phase_jitter_rms_rad > 0.0)
            true_psi += drift.acoustic_phase_jitter_rms_rad * jitter(rng);
        record.bins[k].t_s = t;
        record.bins[k].psi_rad = wrap_phase(nominal);
        points[k] = {wrap_phase(true_psi),
                     params.red.detuning_mhz + drift.red_detuning_drift_mhz_per_hour * t / 3600.0};
    }

    // Distinct operating points are solved once.
    std::map<std::pair<double, double>, std::size_t> index;
    std::vector<std::pair<double, double>> unique;
    std::vector<std::size_t> slot(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k)
    {
        auto [it, inserted] = index.try_emplace(points[k], unique.size());
        if (inserted)
            unique.push_back(points[k]);
        slot[k] = it->second;
    }
    const auto means = parallel_map<ChannelMeans>(unique.size(), [&](std::size_t i) {
        return signals_at(params.with_red_detuning(unique[i].second).at_phase(unique[i].first), options);
    });

    const double dt = ramp.bin_duration_s;
    for (std::size_t k = 0; k < n_bins; ++k)
    {
        const auto& m = means[slot[k]];
        const double green_mean = rates.green_cps * dt * m.green / green_ref + rates.dark_cps * dt;
        const double red_mean = rates.red_cps * dt * m.red / red_ref + rates.dark_cps * dt;
        record.bins[k].green_counts = draw_poisson(rng, green_mean);
        record.bins[k].red_counts = draw_poisson(rng, red_mean);
    }
    return record;
}

PhaseEstimate extract_correlation_phase(const CountRecord& record, const ExtractOptions& options)
{
    record.validate();
    if (record.bins.size() < 3)
        throw DegenerateGrid("extract_correlation_phase: need at least 3 bins");

    std::vector<double> psi, green, red;
    psi.reserve(record.bins.size());
    green.reserve(record.bins.size());
    red.reserve(record.bins.size());
    for (const auto& bin : record.bins)
    {
        psi.push_back(bin.psi_rad);
        green.push_back(static_cast<double>(bin.green_counts));
        red.push_back(static_cast<double>(bin.red_counts));
    }

    const ChannelFit g = fit_channel(psi, green);
    const ChannelFit r = fit_channel(psi, red);
    for (const auto* ch : {&g, &r})
    {
        const char* name = ch == &g ? "green" : "red";
        if (!ch->fit.phase_defined || !(ch->fit.contrast >= options.contrast_floor))
            throw UndefinedPhase(std::string("extract_correlation_phase: ") + name + " contrast below floor");
        if (ch->fit.amplitude() < options.min_significance * ch->amplitude_sigma)
            throw UndefinedPhase(std::string("extract_correlation_phase: ") + name +
                                 " fringe amplitude not significant");
    }

    PhaseEstimate estimate;
    estimate.phase_rad = correlation_phase(g.fit, r.fit, options.contrast_floor);
    estimate.phase_error_rad = std::sqrt(g.phase_variance + r.phase_variance);
    estimate.green_contrast = g.fit.contrast;
    estimate.red_contrast = r.fit.contrast;
    return estimate;
}

} // namespace ionmirror
