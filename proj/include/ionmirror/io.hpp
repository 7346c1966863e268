#pragma once

// CSV files with a mandatory header row. Floating-point values are written
// with 17 significant digits so that re-reading reproduces them exactly.

#include "ionmirror/estimation.hpp"
#include "ionmirror/photon_counts.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ionmirror
{

std::string format_double(double value);

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const;
    // Column parsed as doubles; throws InvalidArgument on a malformed cell.
    std::vector<double> numeric_column(const std::string& name) const;
    std::vector<double> numeric_column(std::size_t index) const;
};

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

// t_s,psi_rad,green_counts,red_counts
CsvTable count_record_table(const CountRecord& record);
CountRecord count_record_from_table(const CsvTable& table);

// First three columns read as x, y, sigma.
std::vector<Observation> observations_from_table(const CsvTable& table);

} // namespace ionmirror
