#pragma once

// Run configuration: a `key = value` text file ('#' starts a comment) plus
// `--set key=value` overrides. Every module invariant is checked at load time
// and reported with the offending line and key.

#include "ionmirror/estimation.hpp"
#include "ionmirror/photon_counts.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ionmirror
{

class ConfigError : public Error
{
public:
    // line 0 means a command-line override.
    ConfigError(std::string source, int line, std::string key, const std::string& message);

    const std::string& source() const { return m_source; }
    int line() const { return m_line; }
    const std::string& key() const { return m_key; }

private:
    std::string m_source;
    int m_line;
    std::string m_key;
};

struct RunConfig
{
    SystemParams system = SystemParams::defaults();
    ObservableOptions observe;

    double detuning_r_min_mhz = -60.0;
    double detuning_r_max_mhz = 60.0;
    int detuning_r_points = 100;

    double anomaly_rabi_r_min_mhz = 5.0;
    double anomaly_rabi_r_max_mhz = 40.0;
    int anomaly_rabi_r_points = 8;
    double anomaly_contrast_threshold = 1e-3;

    ScanRamp ramp;
    CountRates rates;
    DriftModel drift;
    ExtractOptions extract;

    FitConfig fit;
    std::vector<std::string> fit_free = {"rabi_g_mhz", "rabi_r_mhz", "detuning_g_mhz", "larmor_unit_mhz"};
    double spectrum_signal_scale = 1.0;
    double epsilon_upper = 0.5;

    std::string input_csv;
    std::uint64_t seed = 1;

    std::vector<double> detuning_grid() const;
    std::vector<double> anomaly_rabi_grid() const;
};

// All recognized keys, in documentation order.
const std::vector<std::string>& config_keys();

// Applies one setting; throws ConfigError for unknown keys or unparsable values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value,
                   const std::string& source = "<memory>", int line = 0);

// Parses `key=value` from an override string.
void apply_override(RunConfig& config, std::string_view key_value);

// Checks every invariant; `lines` maps keys to where they were set.
void validate_config(const RunConfig& config, const std::string& source = "<memory>",
                     const std::map<std::string, int>& lines = {});

RunConfig parse_config(std::string_view text, const std::string& source = "<memory>",
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

} // namespace ionmirror
