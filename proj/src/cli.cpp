#include "ionmirror/cli.hpp"

#include "ionmirror/io.hpp"

#include <cmath>
#include <filesystem>
#include <typeinfo>

namespace ionmirror
{

namespace
{

namespace fs = std::filesystem;

std::string flag(bool b)
{
    return b ? "1" : "0";
}

fs::path emit(const fs::path& out_dir, const std::string& name, const CsvTable& table)
{
    const fs::path path = out_dir / name;
    write_csv(path, table);
    return path;
}

void fail_if_any(std::size_t failures, std::size_t total, const std::string& first_note, const std::string& what)
{
    if (failures > 0)
        throw Error(what + ": solver failed at " + std::to_string(failures) + " of " + std::to_string(total) +
                    " grid points (first: " + first_note + ")");
}

std::vector<fs::path> cmd_steady(const RunConfig& c, const fs::path& out)
{
    const auto rho = solve_steady_state(c.system, c.observe.solver);
    CsvTable t{{"index", "level", "two_m", "population"}, {}};
    for (std::size_t i = 0; i < kNumSublevels; ++i)
    {
        const auto& s = kSublevels[i];
        t.rows.push_back({std::to_string(i), to_string(s.level), std::to_string(s.two_m),
                          format_double(rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real())});
    }
    return {emit(out, "steady.csv", t)};
}

std::vector<fs::path> cmd_fringe(const RunConfig& c, const fs::path& out)
{
    const auto scan = fringe_scan(c.system, c.observe.psi_points, c.observe);
    CsvTable t{{"psi_rad", "red_p_population", "green_signal"}, {}};
    for (std::size_t k = 0; k < scan.psi_rad.size(); ++k)
        t.rows.push_back(
            {format_double(scan.psi_rad[k]), format_double(scan.red_signal[k]), format_double(scan.green_signal[k])});

    CsvTable fits{{"channel", "mean", "cos_amp", "sin_amp", "phase_rad", "contrast"}, {}};
    auto add = [&fits](const std::string& name, const FringeFit& f) {
        fits.rows.push_back({name, format_double(f.mean), format_double(f.cos_amp), format_double(f.sin_amp),
                             format_double(f.phase_rad), format_double(f.contrast)});
    };
    add("red", fit_fringe(scan.psi_rad, scan.red_signal));
    add("green", fit_fringe(scan.psi_rad, scan.green_signal));
    return {emit(out, "fringe.csv", t), emit(out, "fringe_fit.csv", fits)};
}

std::vector<fs::path> cmd_phase_scan(const RunConfig& c, const fs::path& out)
{
    const auto grid = c.detuning_grid();
    const auto points = phase_vs_detuning(c.system, grid, c.observe);
    CsvTable t{{"detuning_r_mhz", "phase_rad", "red_contrast", "phase_defined", "solver_ok"}, {}};
    std::size_t failures = 0;
    std::string first_note;
    for (const auto& p : points)
    {
        t.rows.push_back({format_double(p.detuning_r_mhz), format_double(p.phase_defined ? p.phase_rad : NAN),
                          format_double(p.red_contrast), flag(p.phase_defined), flag(p.solver_ok)});
        if (!p.solver_ok && failures++ == 0)
            first_note = p.note;
    }
    auto path = emit(out, "phase_scan.csv", t);
    fail_if_any(failures, points.size(), first_note, "phase-scan");
    return {path};
}

std::vector<fs::path> cmd_contrast_scan(const RunConfig& c, const fs::path& out)
{
    const auto grid = c.detuning_grid();
    const auto points = contrast_vs_detuning(c.system, grid, c.observe);
    CsvTable t{{"detuning_r_mhz", "red_contrast", "ok"}, {}};
    std::size_t failures = 0;
    for (const auto& p : points)
    {
        t.rows.push_back({format_double(p.detuning_r_mhz), format_double(p.red_contrast), flag(p.ok)});
        failures += p.ok ? 0 : 1;
    }
    auto path = emit(out, "contrast_scan.csv", t);
    fail_if_any(failures, points.size(), "see contrast_scan.csv", "contrast-scan");
    return {path};
}

std::vector<fs::path> cmd_spectrum(const RunConfig& c, const fs::path& out)
{
    const auto grid = c.detuning_grid();
    const auto points = excitation_spectrum(c.system, grid, c.observe.solver);
    CsvTable t{{"detuning_r_mhz", "p_population", "ok"}, {}};
    std::size_t failures = 0;
    std::string first_note;
    for (const auto& p : points)
    {
        t.rows.push_back({format_double(p.detuning_r_mhz), format_double(p.p_population), flag(p.ok)});
        if (!p.ok && failures++ == 0)
            first_note = p.note;
    }
    auto path = emit(out, "spectrum.csv", t);
    fail_if_any(failures, points.size(), first_note, "spectrum");
    return {path};
}

std::vector<Observation> read_observations(const RunConfig& c)
{
    if (c.input_csv.empty())
        throw ConfigError("<config>", 0, "input_csv", "this command needs an input file");
    return observations_from_table(read_csv(c.input_csv));
}

CsvTable fit_table(const FitResult& r)
{
    CsvTable t{{"parameter", "value", "uncertainty"}, {}};
    for (std::size_t i = 0; i < r.names.size(); ++i)
        t.rows.push_back({r.names[i], format_double(r.values[i]), format_double(r.uncertainties[i])});
    return t;
}

CsvTable fit_summary(const FitResult& r)
{
    return {{"chi2", "iterations", "convergence"},
            {{format_double(r.chi2), std::to_string(r.iterations), to_string(r.convergence)}}};
}

std::vector<fs::path> cmd_fit_spectrum(const RunConfig& c, const fs::path& out)
{
    const auto data = read_observations(c);
    SpectrumFitOptions opts;
    opts.free = c.fit_free;
    opts.signal_scale = c.spectrum_signal_scale;
    opts.fit = c.fit;
    opts.solver = c.observe.solver;
    const auto r = fit_spectrum(data, c.system, opts);
    return {emit(out, "fit_spectrum.csv", fit_table(r)), emit(out, "fit_spectrum_summary.csv", fit_summary(r))};
}

std::vector<fs::path> cmd_fit_epsilon(const RunConfig& c, const fs::path& out)
{
    const auto data = read_observations(c);
    EpsilonFitOptions opts;
    opts.epsilon_upper = c.epsilon_upper;
    opts.fit = c.fit;
    opts.observe = c.observe;
    const auto r = fit_epsilon(data, c.system, opts);
    return {emit(out, "fit_epsilon.csv", fit_table(r)), emit(out, "fit_epsilon_summary.csv", fit_summary(r))};
}

std::vector<fs::path> cmd_synth(const RunConfig& c, const fs::path& out)
{
    const auto record = synth_counts(c.system, c.ramp, c.rates, c.drift, c.seed, c.observe);
    const auto scan = fringe_scan(c.system, c.observe.psi_points, c.observe);
    const auto red = fit_fringe(scan.psi_rad, scan.red_signal);
    const auto green = fit_fringe(scan.psi_rad, scan.green_signal);
    CsvTable truth{{"model_phase_rad", "green_contrast", "red_contrast", "seed"},
                   {{format_double(correlation_phase(green, red, c.observe.contrast_floor)),
                     format_double(green.contrast), format_double(red.contrast), std::to_string(c.seed)}}};
    return {emit(out, "counts.csv", count_record_table(record)), emit(out, "synth_truth.csv", truth)};
}

std::vector<fs::path> cmd_extract_phase(const RunConfig& c, const fs::path& out)
{
    if (c.input_csv.empty())
        throw ConfigError("<config>", 0, "input_csv", "this command needs an input file");
    const auto record = count_record_from_table(read_csv(c.input_csv));
    const auto e = extract_correlation_phase(record, c.extract);
    CsvTable t{{"phase_rad", "phase_error_rad", "green_contrast", "red_contrast"},
               {{format_double(e.phase_rad), format_double(e.phase_error_rad), format_double(e.green_contrast),
                 format_double(e.red_contrast)}}};
    return {emit(out, "extract_phase.csv", t)};
}

// Net change of the unwrapped phase from the first to the last defined point.
double phase_winding(const std::vector<PhasePoint>& points)
{
    bool started = false;
    double previous = 0.0;
    double total = 0.0;
    for (const auto& p : points)
    {
        if (!p.phase_defined)
            continue;
        if (started)
            total += std::remainder(p.phase_rad - previous, kTwoPi);
        previous = p.phase_rad;
        started = true;
    }
    return total;
}

std::vector<fs::path> cmd_anomaly_search(const RunConfig& c, const fs::path& out)
{
    const auto grid = c.detuning_grid();
    CsvTable cells{{"rabi_r_mhz", "detuning_r_mhz", "phase_rad", "red_contrast", "phase_defined", "low_contrast"},
                   {}};
    CsvTable summary{{"rabi_r_mhz", "min_red_contrast", "low_contrast_points", "phase_winding_rad", "returns_to_zero"},
                     {}};
    std::size_t failures = 0;
    std::size_t total = 0;
    std::string first_note;
    for (const double rabi : c.anomaly_rabi_grid())
    {
        SystemParams p = c.system;
        p.red.rabi_mhz = rabi;
        const auto points = phase_vs_detuning(p, grid, c.observe);
        double min_contrast = INFINITY;
        int low = 0;
        for (const auto& q : points)
        {
            ++total;
            if (!q.solver_ok && failures++ == 0)
                first_note = q.note;
            const bool is_low = q.solver_ok && q.red_contrast < c.anomaly_contrast_threshold;
            if (q.solver_ok)
                min_contrast = std::min(min_contrast, q.red_contrast);
            low += is_low ? 1 : 0;
            cells.rows.push_back({format_double(rabi), format_double(q.detuning_r_mhz),
                                  format_double(q.phase_defined ? q.phase_rad : NAN), format_double(q.red_contrast),
                                  flag(q.phase_defined), flag(is_low)});
        }
        const double winding = phase_winding(points);
        summary.rows.push_back({format_double(rabi), format_double(min_contrast), std::to_string(low),
                                format_double(winding), flag(std::abs(winding) < kPi)});
    }
    std::vector<fs::path> paths{emit(out, "anomaly_grid.csv", cells), emit(out, "anomaly_summary.csv", summary)};
    fail_if_any(failures, total, first_note, "anomaly-search");
    return paths;
}

using Handler = std::vector<fs::path> (*)(const RunConfig&, const fs::path&);

const std::vector<std::pair<std::string, Handler>>& handlers()
{
    static const std::vector<std::pair<std::string, Handler>> table = {
        {"steady", cmd_steady},
        {"fringe", cmd_fringe},
        {"phase-scan", cmd_phase_scan},
        {"contrast-scan", cmd_contrast_scan},
        {"spectrum", cmd_spectrum},
        {"fit-spectrum", cmd_fit_spectrum},
        {"fit-epsilon", cmd_fit_epsilon},
        {"synth", cmd_synth},
        {"extract-phase", cmd_extract_phase},
        {"anomaly-search", cmd_anomaly_search},
    };
    return table;
}

std::string one_line(std::string s, bool keep_quotes = false)
{
    for (auto& ch : s)
        if (ch == '\n' || ch == '\r')
            ch = ' ';
        else if (ch == '"' && !keep_quotes)
            ch = '\'';
    return s;
}

} // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, _] : handlers())
            out.push_back(name);
        return out;
    }();
    return names;
}

std::vector<fs::path> run_command(const std::string& command, const RunConfig& config, const fs::path& out_dir)
{
    for (const auto& [name, handler] : handlers())
    {
        if (name != command)
            continue;
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec)
            throw InvalidArgument("cannot create output directory '" + out_dir.string() + "': " + ec.message());
        return handler(config, out_dir);
    }
    throw InvalidArgument("unknown command '" + command + "'");
}

int exit_code_for(const std::exception& error)
{
    if (dynamic_cast<const ConfigError*>(&error) || dynamic_cast<const InvalidArgument*>(&error) ||
        dynamic_cast<const fs::filesystem_error*>(&error))
        return 1;
    return 2;
}

std::string error_line(const std::exception& error)
{
    if (dynamic_cast<const ConfigError*>(&error))
        return one_line(error.what(), true);
    std::string kind = "solver_error";
    if (dynamic_cast<const InvalidArgument*>(&error) || dynamic_cast<const fs::filesystem_error*>(&error))
        kind = "input_error";
    else if (dynamic_cast<const SingularSystem*>(&error))
        kind = "singular_system";
    else if (dynamic_cast<const NonPhysical*>(&error))
        kind = "non_physical";
    else if (dynamic_cast<const StepFailure*>(&error))
        kind = "step_failure";
    else if (dynamic_cast<const UndefinedPhase*>(&error))
        kind = "undefined_phase";
    else if (dynamic_cast<const DegenerateGrid*>(&error))
        kind = "degenerate_grid";
    else if (dynamic_cast<const BadInitial*>(&error))
        kind = "bad_initial";
    return kind + " message=\"" + one_line(error.what()) + "\"";
}

} // namespace ionmirror
