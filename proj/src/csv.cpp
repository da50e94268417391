#include "bttf/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace bttf {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

} // namespace

TimeSeries load_csv(const DatasetSpec& spec, LoadInfo* info) {
    std::ifstream in(spec.path);
    if (!in) throw std::runtime_error("load_csv: cannot open '" + spec.path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: '" + spec.path + "' is empty");
    const auto header = split_line(strip_cr(line));

    // resolve target column
    std::string target = spec.target_column;
    if (target.empty()) {
        for (const auto& h : header)
            if (h == "OT") target = "OT";
        if (target.empty()) {
            for (auto it = header.rbegin(); it != header.rend(); ++it)
                if (*it != spec.date_column) {
                    target = *it;
                    break;
                }
        }
    }
    std::size_t target_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == target) target_idx = i;
    if (target_idx == header.size()) {
        std::string cols;
        for (const auto& h : header) cols += (cols.empty() ? "" : ", ") + h;
        throw std::runtime_error("load_csv: column '" + target + "' not found in '" + spec.path +
                                 "'; available columns: " + cols);
    }

    std::vector<double> values;
    long row = 0;
    long skipped_blank = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) {
            ++skipped_blank;
            continue;
        }
        if (skipped_blank > 0)
            throw std::runtime_error("load_csv: blank line inside data of '" + spec.path + "'");
        ++row;
        const auto fields = split_line(line);
        if (target_idx >= fields.size())
            throw std::runtime_error("load_csv: row " + std::to_string(row) + " of '" + spec.path +
                                     "' has " + std::to_string(fields.size()) + " fields, column '" +
                                     target + "' is missing");
        const std::string& cell = fields[target_idx];
        double v = 0.0;
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
            throw std::runtime_error("load_csv: cannot parse '" + cell + "' as a number at row " +
                                     std::to_string(row) + " of '" + spec.path + "'");
        if (!std::isfinite(v))
            throw std::runtime_error("load_csv: non-finite value at row " + std::to_string(row) +
                                     " of '" + spec.path + "'");
        values.push_back(v);
    }
    if (values.empty()) throw std::runtime_error("load_csv: no data rows in '" + spec.path + "'");

    if (info) {
        info->rows = row;
        info->skipped_trailing_blank = skipped_blank;
        info->resolved_target = target;
    }
    Vecd vec = Eigen::Map<const Vecd>(values.data(), static_cast<Index>(values.size()));
    return make_series(spec.name.empty() ? target : spec.name, std::move(vec));
}

void write_csv(const std::string& path, const TimeSeries& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
    out << (series.name.empty() ? "value" : series.name) << "\n";
    char buf[40];
    for (Index i = 0; i < series.length(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", series.values[i]);
        out << buf << "\n";
    }
    if (!out) throw std::runtime_error("write_csv: write to '" + path + "' failed");
}

} // namespace bttf
