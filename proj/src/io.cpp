#include "ionmirror/io.hpp"

#include "ionmirror/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ionmirror
{

namespace
{

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

double parse_double(const std::string& cell)
{
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw InvalidArgument("csv: cannot parse '" + cell + "' as a number");
    return v;
}

} // namespace

std::string format_double(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::size_t CsvTable::column_index(const std::string& name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw InvalidArgument("csv: no column '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const
{
    return numeric_column(column_index(name));
}

std::vector<double> CsvTable::numeric_column(std::size_t index) const
{
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows)
    {
        if (index >= row.size())
            throw InvalidArgument("csv: short row");
        out.push_back(parse_double(row[index]));
    }
    return out;
}

std::string to_csv(const CsvTable& table)
{
    std::string out;
    auto append_row = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            if (i > 0)
                out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    append_row(table.header);
    for (const auto& row : table.rows)
        append_row(row);
    return out;
}

CsvTable parse_csv(const std::string& text)
{
    CsvTable table;
    std::stringstream ss(text);
    std::string line;
    bool have_header = false;
    while (std::getline(ss, line))
    {
        if (trim(line).empty() || trim(line)[0] == '#')
            continue;
        auto cells = split_line(line);
        if (!have_header)
        {
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size())
            throw InvalidArgument("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(table.header.size()));
        table.rows.push_back(std::move(cells));
    }
    if (!have_header)
        throw InvalidArgument("csv: missing header row");
    return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InvalidArgument("cannot open '" + path.string() + "' for writing");
    out << to_csv(table);
    if (!out)
        throw InvalidArgument("failed writing '" + path.string() + "'");
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidArgument("cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

CsvTable count_record_table(const CountRecord& record)
{
    CsvTable table{{"t_s", "psi_rad", "green_counts", "red_counts"}, {}};
    table.rows.reserve(record.bins.size());
    for (const auto& bin : record.bins)
        table.rows.push_back({format_double(bin.t_s), format_double(bin.psi_rad), std::to_string(bin.green_counts),
                              std::to_string(bin.red_counts)});
    return table;
}

CountRecord count_record_from_table(const CsvTable& table)
{
    const auto t = table.numeric_column("t_s");
    const auto psi = table.numeric_column("psi_rad");
    const auto green = table.numeric_column("green_counts");
    const auto red = table.numeric_column("red_counts");

    CountRecord record;
    record.bins.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        auto to_count = [](double v) {
            if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::int64_t>(v)))
                throw InvalidArgument("csv: counts must be non-negative integers");
            return static_cast<std::int64_t>(v);
        };
        record.bins[i] = {t[i], psi[i], to_count(green[i]), to_count(red[i])};
    }
    if (t.size() >= 2)
        record.bin_duration_s = t[1] - t[0];
    record.validate();
    return record;
}

std::vector<Observation> observations_from_table(const CsvTable& table)
{
    if (table.header.size() < 3)
        throw InvalidArgument("csv: observations need x, y and sigma columns");
    const auto x = table.numeric_column(std::size_t{0});
    const auto y = table.numeric_column(std::size_t{1});
    const auto s = table.numeric_column(std::size_t{2});
    std::vector<Observation> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = {x[i], y[i], s[i]};
    return out;
}

} // namespace ionmirror
