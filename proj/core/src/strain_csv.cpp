#include "iceload/strain_csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "iceload/error.hpp"

namespace iceload {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& v) {
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    const auto [p, ec] = std::from_chars(first, s.data() + s.size(), v);
    return ec == std::errc{} && p == s.data() + s.size() && std::isfinite(v);
}

std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.11e", v);
    return buf;
}

}  // namespace

StrainSeries read_strain_csv(std::istream& in, const GaugeSet& gauges, const std::string& source) {
    StrainSeries series;
    std::vector<std::size_t> column_gauge;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cells = split(line);
        if (!have_header) {
            if (cells.empty() || cells[0] != "t_s") throw ParseError(source, line_no, "header must start with 't_s'");
            std::vector<char> seen(gauges.size(), 0);
            for (std::size_t c = 1; c < cells.size(); ++c) {
                const auto idx = gauges.find(cells[c]);
                if (!idx) throw ParseError(source, line_no, "column " + std::to_string(c + 1) + ": unknown gauge id '" + cells[c] + "'");
                if (seen[*idx]) throw ParseError(source, line_no, "duplicate gauge column '" + cells[c] + "'");
                seen[*idx] = 1;
                column_gauge.push_back(*idx);
                series.columns.push_back(cells[c]);
            }
            if (column_gauge.empty()) throw ParseError(source, line_no, "header names no gauges");
            have_header = true;
            continue;
        }
        if (cells.size() != column_gauge.size() + 1) {
            throw ParseError(source, line_no, "expected " + std::to_string(column_gauge.size() + 1) + " fields, found " +
                                                  std::to_string(cells.size()));
        }
        StrainRecord rec;
        if (!parse_double(cells[0], rec.timestamp)) throw ParseError(source, line_no, "invalid timestamp '" + cells[0] + "'");
        if (!series.records.empty() && !(rec.timestamp > series.records.back().timestamp)) {
            throw ParseError(source, line_no, "timestamps must be strictly increasing");
        }
        rec.strain.assign(gauges.size(), 0.0);
        rec.valid.assign(gauges.size(), 0);
        for (std::size_t c = 0; c < column_gauge.size(); ++c) {
            const std::string& cell = cells[c + 1];
            if (cell.empty()) continue;
            double v = 0.0;
            if (!parse_double(cell, v)) {
                throw ParseError(source, line_no, "column '" + series.columns[c] + "': invalid strain '" + cell + "'");
            }
            rec.strain[column_gauge[c]] = v;
            rec.valid[column_gauge[c]] = 1;
        }
        series.records.push_back(std::move(rec));
    }
    if (!have_header) throw ParseError(source, std::max<std::size_t>(line_no, 1), "empty strain file");
    if (series.records.empty()) throw ParseError(source, line_no, "strain file has no records");
    return series;
}

StrainSeries parse_strain_csv(const std::filesystem::path& path, const GaugeSet& gauges) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open strain file " + path.string());
    return read_strain_csv(in, gauges, path.string());
}

void write_strain_csv(std::ostream& out, const GaugeSet& gauges, const std::vector<std::size_t>& gauge_index,
                      const std::vector<ObservationSet>& records) {
    out << "t_s";
    for (std::size_t g : gauge_index) out << ',' << gauges.gauges.at(g).id;
    out << '\n';
    for (const auto& r : records) {
        if (r.strains.size() != static_cast<Eigen::Index>(gauge_index.size())) {
            throw InputError("write_strain_csv: record length does not match the gauge list");
        }
        out << format(r.timestamp);
        for (Eigen::Index i = 0; i < r.strains.size(); ++i) out << ',' << format(r.strains[i]);
        out << '\n';
    }
}

SeriesObservations to_observations(const StrainSeries& series, const std::vector<std::size_t>& gauge_index,
                                   double noise_std) {
    SeriesObservations out;
    for (std::size_t r = 0; r < series.records.size(); ++r) {
        const auto& rec = series.records[r];
        ObservationSet obs;
        obs.noise_std = noise_std;
        obs.timestamp = rec.timestamp;
        std::vector<double> values;
        for (std::size_t row = 0; row < gauge_index.size(); ++row) {
            const std::size_t g = gauge_index[row];
            if (g < rec.valid.size() && rec.valid[g]) {
                obs.rows.push_back(static_cast<Eigen::Index>(row));
                values.push_back(rec.strain[g]);
            }
        }
        if (values.empty()) {
            std::ostringstream msg;
            msg << "record at t=" << rec.timestamp << " s has no valid live gauge; skipped";
            out.warnings.push_back(msg.str());
            continue;
        }
        obs.strains = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
        out.observations.push_back(std::move(obs));
        out.record_index.push_back(r);
    }
    return out;
}

}  // namespace iceload
