#pragma once

// Subcommands of the `ionmirror` tool. Each writes one or more CSV files into
// the output directory and returns their paths in write order.

#include "ionmirror/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ionmirror
{

// steady, fringe, phase-scan, contrast-scan, spectrum, fit-spectrum,
// fit-epsilon, synth, extract-phase, anomaly-search
const std::vector<std::string>& command_names();

// Throws ConfigError / InvalidArgument for bad input and the solver error
// types when a computation fails. Scan files are written before a failure
// inside the scan is reported.
std::vector<std::filesystem::path> run_command(const std::string& command, const RunConfig& config,
                                               const std::filesystem::path& out_dir);

// 1 for configuration or input errors, 2 for solver failures.
int exit_code_for(const std::exception& error);

// Single-line, machine-parsable description of an error.
std::string error_line(const std::exception& error);

} // namespace ionmirror
