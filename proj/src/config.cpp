#include "ionmirror/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace ionmirror
{

namespace
{

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct BadValue
{
    std::string message;
};

double to_double(const std::string& v)
{
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        throw BadValue{"expected a finite number, got '" + v + "'"};
    return out;
}

long long to_integer(const std::string& v)
{
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
        throw BadValue{"expected an integer, got '" + v + "'"};
    return out;
}

int to_int(const std::string& v)
{
    const long long out = to_integer(v);
    if (out < -2147483647LL || out > 2147483647LL)
        throw BadValue{"integer out of range: '" + v + "'"};
    return static_cast<int>(out);
}

std::uint64_t to_u64(const std::string& v)
{
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
        throw BadValue{"expected an unsigned integer, got '" + v + "'"};
    return out;
}

bool to_bool(const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw BadValue{"expected a boolean, got '" + v + "'"};
}

std::vector<std::string> to_list(const std::string& v)
{
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

Polarization to_polarization(const std::string& v)
{
    std::vector<double> nums;
    for (const auto& item : to_list(v))
        nums.push_back(to_double(item));
    Polarization::Components a{};
    if (nums.size() == 3)
        a = {nums[0], nums[1], nums[2]};
    else if (nums.size() == 6)
        a = {std::complex<double>(nums[0], nums[1]), std::complex<double>(nums[2], nums[3]),
             std::complex<double>(nums[4], nums[5])};
    else
        throw BadValue{"polarization needs 3 real or 6 (re,im) components"};
    try
    {
        return Polarization(a);
    }
    catch (const InvalidArgument& e)
    {
        throw BadValue{e.what()};
    }
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters()
{
    auto scalar = [](const char* name) {
        return std::pair<std::string, Setter>{
            name, [name](RunConfig& c, const std::string& v) { set_parameter(c.system, name, to_double(v)); }};
    };
    static const std::vector<std::pair<std::string, Setter>> table = {
        scalar("gamma_g_mhz"),
        scalar("gamma_r_mhz"),
        scalar("detuning_g_mhz"),
        scalar("detuning_r_mhz"),
        scalar("rabi_g_mhz"),
        scalar("rabi_r_mhz"),
        scalar("larmor_unit_mhz"),
        scalar("epsilon"),
        scalar("psi_rad"),
        {"polarization_g", [](RunConfig& c, const std::string& v) { c.system.green.polarization = to_polarization(v); }},
        {"polarization_r", [](RunConfig& c, const std::string& v) { c.system.red.polarization = to_polarization(v); }},
        {"polarization_g_linear_rad",
         [](RunConfig& c, const std::string& v) { c.system.green.polarization = Polarization::linear(to_double(v)); }},
        {"polarization_r_linear_rad",
         [](RunConfig& c, const std::string& v) { c.system.red.polarization = Polarization::linear(to_double(v)); }},
        {"decay_mod_enabled", [](RunConfig& c, const std::string& v) { c.system.mirror.decay_mod_enabled = to_bool(v); }},
        {"shift_enabled", [](RunConfig& c, const std::string& v) { c.system.mirror.shift_enabled = to_bool(v); }},
        {"detection_contrast", [](RunConfig& c, const std::string& v) { c.observe.detection_contrast = to_double(v); }},
        {"green_convention",
         [](RunConfig& c, const std::string& v) {
             if (v == "enhanced_decay_maximum")
                 c.observe.green_convention = GreenConvention::EnhancedDecayMaximum;
             else if (v == "suppressed_decay_maximum")
                 c.observe.green_convention = GreenConvention::SuppressedDecayMaximum;
             else
                 throw BadValue{"expected enhanced_decay_maximum or suppressed_decay_maximum"};
         }},
        {"contrast_floor", [](RunConfig& c, const std::string& v) { c.observe.contrast_floor = to_double(v); }},
        {"psi_points", [](RunConfig& c, const std::string& v) { c.observe.psi_points = to_int(v); }},
        {"degenerate_policy",
         [](RunConfig& c, const std::string& v) {
             if (v == "error")
                 c.observe.solver.policy = DegeneratePolicy::Error;
             else if (v == "minimum_norm")
                 c.observe.solver.policy = DegeneratePolicy::MinimumNorm;
             else
                 throw BadValue{"expected error or minimum_norm"};
         }},
        {"detuning_r_min_mhz", [](RunConfig& c, const std::string& v) { c.detuning_r_min_mhz = to_double(v); }},
        {"detuning_r_max_mhz", [](RunConfig& c, const std::string& v) { c.detuning_r_max_mhz = to_double(v); }},
        {"detuning_r_points", [](RunConfig& c, const std::string& v) { c.detuning_r_points = to_int(v); }},
        {"anomaly_rabi_r_min_mhz", [](RunConfig& c, const std::string& v) { c.anomaly_rabi_r_min_mhz = to_double(v); }},
        {"anomaly_rabi_r_max_mhz", [](RunConfig& c, const std::string& v) { c.anomaly_rabi_r_max_mhz = to_double(v); }},
        {"anomaly_rabi_r_points", [](RunConfig& c, const std::string& v) { c.anomaly_rabi_r_points = to_int(v); }},
        {"anomaly_contrast_threshold",
         [](RunConfig& c, const std::string& v) { c.anomaly_contrast_threshold = to_double(v); }},
        {"periods", [](RunConfig& c, const std::string& v) { c.ramp.periods = to_int(v); }},
        {"bins_per_period", [](RunConfig& c, const std::string& v) { c.ramp.bins_per_period = to_int(v); }},
        {"bin_duration_s", [](RunConfig& c, const std::string& v) { c.ramp.bin_duration_s = to_double(v); }},
        {"start_time_s", [](RunConfig& c, const std::string& v) { c.ramp.start_time_s = to_double(v); }},
        {"start_psi_rad", [](RunConfig& c, const std::string& v) { c.ramp.start_psi_rad = to_double(v); }},
        {"green_cps", [](RunConfig& c, const std::string& v) { c.rates.green_cps = to_double(v); }},
        {"red_cps", [](RunConfig& c, const std::string& v) { c.rates.red_cps = to_double(v); }},
        {"dark_cps", [](RunConfig& c, const std::string& v) { c.rates.dark_cps = to_double(v); }},
        {"red_detuning_drift_mhz_per_hour",
         [](RunConfig& c, const std::string& v) { c.drift.red_detuning_drift_mhz_per_hour = to_double(v); }},
        {"acoustic_phase_jitter_rms_rad",
         [](RunConfig& c, const std::string& v) { c.drift.acoustic_phase_jitter_rms_rad = to_double(v); }},
        {"phase_min_significance", [](RunConfig& c, const std::string& v) { c.extract.min_significance = to_double(v); }},
        {"fit_max_iter", [](RunConfig& c, const std::string& v) { c.fit.max_iter = to_int(v); }},
        {"fit_tol", [](RunConfig& c, const std::string& v) { c.fit.tol = to_double(v); }},
        {"fit_relative_step", [](RunConfig& c, const std::string& v) { c.fit.relative_step = to_double(v); }},
        {"fit_free", [](RunConfig& c, const std::string& v) { c.fit_free = to_list(v); }},
        {"spectrum_signal_scale", [](RunConfig& c, const std::string& v) { c.spectrum_signal_scale = to_double(v); }},
        {"epsilon_upper", [](RunConfig& c, const std::string& v) { c.epsilon_upper = to_double(v); }},
        {"input_csv", [](RunConfig& c, const std::string& v) { c.input_csv = v; }},
        {"seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64(v); }},
    };
    return table;
}

int line_of(const std::map<std::string, int>& lines, const std::string& key)
{
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
}

} // namespace

ConfigError::ConfigError(std::string source, int line, std::string key, const std::string& message)
    : Error("config_error source=" + source + " line=" + std::to_string(line) + " key=" + key + " message=\"" +
            message + "\""),
      m_source(std::move(source)), m_line(line), m_key(std::move(key))
{
}

std::vector<double> RunConfig::detuning_grid() const
{
    return linear_grid(detuning_r_min_mhz, detuning_r_max_mhz, detuning_r_points);
}

std::vector<double> RunConfig::anomaly_rabi_grid() const
{
    return linear_grid(anomaly_rabi_r_min_mhz, anomaly_rabi_r_max_mhz, anomaly_rabi_r_points);
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [k, _] : setters())
            out.push_back(k);
        return out;
    }();
    return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value, const std::string& source,
                   int line)
{
    for (const auto& [k, setter] : setters())
    {
        if (k != key)
            continue;
        try
        {
            setter(config, value);
        }
        catch (const BadValue& e)
        {
            throw ConfigError(source, line, key, e.message);
        }
        return;
    }
    throw ConfigError(source, line, key, "unknown key");
}

void apply_override(RunConfig& config, std::string_view key_value)
{
    const auto eq = key_value.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("--set", 0, trim(key_value), "override must look like key=value");
    apply_setting(config, trim(key_value.substr(0, eq)), trim(key_value.substr(eq + 1)), "--set", 0);
}

void validate_config(const RunConfig& c, const std::string& source, const std::map<std::string, int>& lines)
{
    auto require = [&](bool ok, const std::string& key, const std::string& message) {
        if (!ok)
            throw ConfigError(source, line_of(lines, key), key, message);
    };
    const auto& s = c.system;
    require(s.rates.gamma_g_mhz > 0.0, "gamma_g_mhz", "must be > 0");
    require(s.rates.gamma_r_mhz > 0.0, "gamma_r_mhz", "must be > 0");
    require(s.green.rabi_mhz >= 0.0, "rabi_g_mhz", "must be >= 0");
    require(s.red.rabi_mhz >= 0.0, "rabi_r_mhz", "must be >= 0");
    require(s.mirror.epsilon >= 0.0 && s.mirror.epsilon < 1.0, "epsilon", "must lie in [0, 1)");
    require(s.mirror.psi_rad >= 0.0 && s.mirror.psi_rad < kTwoPi, "psi_rad", "must lie in [0, 2pi)");
    require(c.observe.detection_contrast >= 0.0 && c.observe.detection_contrast <= 1.0, "detection_contrast",
            "must lie in [0, 1]");
    require(c.observe.contrast_floor >= 0.0, "contrast_floor", "must be >= 0");
    require(c.observe.psi_points >= 8, "psi_points", "must be >= 8");
    require(c.detuning_r_points >= 1, "detuning_r_points", "must be >= 1");
    require(c.detuning_r_min_mhz <= c.detuning_r_max_mhz, "detuning_r_max_mhz", "must be >= detuning_r_min_mhz");
    require(c.anomaly_rabi_r_points >= 1, "anomaly_rabi_r_points", "must be >= 1");
    require(c.anomaly_rabi_r_min_mhz >= 0.0, "anomaly_rabi_r_min_mhz", "must be >= 0");
    require(c.anomaly_rabi_r_min_mhz <= c.anomaly_rabi_r_max_mhz, "anomaly_rabi_r_max_mhz",
            "must be >= anomaly_rabi_r_min_mhz");
    require(c.anomaly_contrast_threshold >= 0.0, "anomaly_contrast_threshold", "must be >= 0");
    require(c.ramp.periods >= 1, "periods", "must be >= 1");
    require(c.ramp.bins_per_period >= 3, "bins_per_period", "must be >= 3");
    require(c.ramp.bin_duration_s > 0.0, "bin_duration_s", "must be > 0");
    require(c.rates.green_cps >= 0.0, "green_cps", "must be >= 0");
    require(c.rates.red_cps >= 0.0, "red_cps", "must be >= 0");
    require(c.rates.dark_cps >= 0.0, "dark_cps", "must be >= 0");
    require(c.drift.acoustic_phase_jitter_rms_rad >= 0.0, "acoustic_phase_jitter_rms_rad", "must be >= 0");
    require(c.extract.min_significance >= 0.0, "phase_min_significance", "must be >= 0");
    require(c.fit.max_iter >= 0, "fit_max_iter", "must be >= 0");
    require(c.fit.tol > 0.0, "fit_tol", "must be > 0");
    require(c.fit.relative_step > 0.0, "fit_relative_step", "must be > 0");
    require(c.spectrum_signal_scale > 0.0, "spectrum_signal_scale", "must be > 0");
    require(c.epsilon_upper > 0.0 && c.epsilon_upper < 1.0, "epsilon_upper", "must lie in (0, 1)");
    require(!c.fit_free.empty(), "fit_free", "needs at least one parameter");
    for (const auto& name : c.fit_free)
    {
        bool known = false;
        for (const auto& n : scalar_parameter_names())
            known = known || n == name;
        require(known, "fit_free", "unknown parameter '" + name + "'");
        const auto bounds = default_bounds(name);
        const double v = get_parameter(s, name);
        require(v >= bounds.lower && v <= bounds.upper, name, "start value outside fit bounds");
    }
}

RunConfig parse_config(std::string_view text, const std::string& source, const std::vector<std::string>& overrides)
{
    RunConfig config;
    std::map<std::string, int> lines;
    std::stringstream ss{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(ss, raw))
    {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source, line_no, trim(line), "expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (lines.count(key))
            throw ConfigError(source, line_no, key, "duplicate key");
        apply_setting(config, key, trim(std::string_view(line).substr(eq + 1)), source, line_no);
        lines[key] = line_no;
    }
    for (const auto& o : overrides)
    {
        apply_override(config, o);
        const auto eq = o.find('=');
        lines[trim(std::string_view(o).substr(0, eq))] = 0;
    }
    validate_config(config, source, lines);
    return config;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(path.string(), 0, "-", "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string(), overrides);
}

} // namespace ionmirror
