#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "iceload/geometry.hpp"
#include "iceload/inference.hpp"

namespace iceload {

// CSV schema: a header "t_s,<gauge id>,..." followed by one row per record.
// Strains are dimensionless. A blank cell marks that gauge invalid for the
// record.
struct StrainRecord {
    double timestamp = 0.0;
    std::vector<double> strain;  // indexed like GaugeSet::gauges
    std::vector<char> valid;
};

struct StrainSeries {
    std::vector<std::string> columns;  // gauge ids in file order
    std::vector<StrainRecord> records;
};

StrainSeries read_strain_csv(std::istream& in, const GaugeSet& gauges, const std::string& source = "<csv>");
StrainSeries parse_strain_csv(const std::filesystem::path& path, const GaugeSet& gauges);

// Writes strains for the gauges listed in gauge_index (one value per entry of
// each record) with 12 significant digits.
void write_strain_csv(std::ostream& out, const GaugeSet& gauges, const std::vector<std::size_t>& gauge_index,
                      const std::vector<ObservationSet>& records);

struct SeriesObservations {
    std::vector<ObservationSet> observations;
    std::vector<std::size_t> record_index;  // observation -> record
    std::vector<std::string> warnings;
};

// Maps records onto the rows of H. Dead, missing and blank gauges are left
// out of each record; a record with no valid row is skipped with a warning.
SeriesObservations to_observations(const StrainSeries& series, const std::vector<std::size_t>& gauge_index,
                                   double noise_std);

}  // namespace iceload
