#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "iceload/error.hpp"
#include "iceload/field_io.hpp"
#include "iceload/geometry.hpp"
#include "iceload/inference.hpp"
#include "iceload/strain_csv.hpp"
#include "oracles.hpp"

using namespace iceload;
using iceload::testing::Gen;

namespace {

const GaugeSet& gauges() {
    static const GaugeSet g = gauge_locations(default_gauge_layout(CylinderSpec{}));
    return g;
}

std::size_t csv_error_line(const std::string& text) {
    std::istringstream in(text);
    try {
        read_strain_csv(in, gauges(), "s.csv");
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST(StrainCsv, RoundTripThroughObservations) {
    const GaugeSet& g = gauges();
    const std::vector<std::size_t> idx = g.live_indices();
    Gen gen(301);
    std::vector<ObservationSet> records;
    for (int k = 0; k < 3; ++k) {
        ObservationSet o;
        o.strains = 1e-4 * gen.gaussian(static_cast<Eigen::Index>(idx.size()));
        o.timestamp = 0.5 * k;
        records.push_back(o);
    }
    std::stringstream ss;
    write_strain_csv(ss, g, idx, records);
    const StrainSeries series = read_strain_csv(ss, g);
    ASSERT_EQ(series.records.size(), 3u);
    EXPECT_EQ(series.columns.size(), idx.size());
    const SeriesObservations obs = to_observations(series, idx, 1e-6);
    ASSERT_EQ(obs.observations.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_TRUE(obs.observations[k].rows.empty() || obs.observations[k].rows.size() == idx.size());
        EXPECT_LT((obs.observations[k].strains - records[k].strains).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_EQ(obs.observations[k].timestamp, records[k].timestamp);
        EXPECT_EQ(obs.observations[k].noise_std, 1e-6);
    }
}

TEST(StrainCsv, BlankCellsAndMissingColumnsDropRows) {
    const GaugeSet& g = gauges();
    const std::vector<std::size_t> idx = g.live_indices();
    std::string text = "t_s,top_0_h,mid_120_h,bot_0_h\n0.0,1e-5,,3e-5\n0.5,,,\n1.0,1e-5,2e-5,3e-5\n";
    std::istringstream in(text);
    const StrainSeries series = read_strain_csv(in, g);
    const SeriesObservations obs = to_observations(series, idx, 1e-6);
    ASSERT_EQ(obs.observations.size(), 2u);
    EXPECT_EQ(obs.record_index, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(obs.warnings.size(), 1u);
    // bot_0_h is dead, so it never becomes a row; blank mid_120_h drops out.
    EXPECT_EQ(obs.observations[0].rows.size(), 1u);
    EXPECT_EQ(obs.observations[1].rows.size(), 2u);
    EXPECT_EQ(obs.observations[0].strains[0], 1e-5);
}

TEST(StrainCsv, MalformedFilesReportLines) {
    EXPECT_EQ(csv_error_line(""), 1u);
    EXPECT_EQ(csv_error_line("time,top_0_h\n"), 1u);
    EXPECT_EQ(csv_error_line("t_s,nope_0_h\n"), 1u);
    EXPECT_EQ(csv_error_line("t_s,top_0_h,top_0_h\n"), 1u);
    EXPECT_EQ(csv_error_line("t_s,top_0_h\n0,1\n1,2,3\n"), 3u);
    EXPECT_EQ(csv_error_line("t_s,top_0_h\n0,1\n0,2\n"), 3u);
    EXPECT_EQ(csv_error_line("t_s,top_0_h\n0,abc\n"), 2u);
    EXPECT_EQ(csv_error_line("t_s,top_0_h\n"), 1u);
}

TEST(FieldIo, LoadCsvRoundTripAndErrors) {
    const Mesh mesh = generate_cylinder_mesh(iceload::testing::small_spec());
    const SurfacePatch band = tag_load_surface(mesh, 0.235, 0.835);
    Gen g(307);
    const Eigen::VectorXd p = 1e6 * g.gaussian(static_cast<Eigen::Index>(3 * band.size()));
    std::stringstream ss;
    write_load_csv(ss, band, p);
    const Eigen::VectorXd back = read_load_csv(ss, band);
    EXPECT_LT((back - p).cwiseAbs().maxCoeff(), 1e-4);
    std::istringstream partial("node_id,p_N,p_H,p_V\n" + std::to_string(band.node_ids[1]) + ",1,2,3\n");
    const Eigen::VectorXd one = read_load_csv(partial, band);
    const Eigen::Index n = static_cast<Eigen::Index>(band.size());
    EXPECT_EQ(one[1], 1.0);
    EXPECT_EQ(one[n + 1], 2.0);
    EXPECT_EQ(one[2 * n + 1], 3.0);
    EXPECT_EQ(one.cwiseAbs().sum(), 6.0);
    std::istringstream bad_id("node_id,p_N,p_H,p_V\n-5,1,2,3\n");
    EXPECT_THROW(read_load_csv(bad_id, band), ParseError);
    std::istringstream bad_row("node_id,p_N,p_H,p_V\n" + std::to_string(band.node_ids[0]) + ",1,2\n");
    EXPECT_THROW(read_load_csv(bad_row, band), ParseError);
}

TEST(FieldIo, VtkHasConsistentSections) {
    const Mesh mesh = generate_cylinder_mesh(iceload::testing::small_spec());
    const SurfacePatch band = tag_load_surface(mesh, 0.235, 0.835);
    const Eigen::VectorXd p = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(3 * band.size()));
    const NodalField f = band_field(mesh, band, p, "p");
    EXPECT_EQ(f.components, 3);
    EXPECT_EQ(f.values.size(), 3 * mesh.nodes.size());
    std::ostringstream out;
    write_vtk(out, mesh, {f, displacement_field(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count())))});
    const std::string s = out.str();
    EXPECT_EQ(s.rfind("# vtk DataFile Version", 0), 0u);
    EXPECT_NE(s.find("POINTS " + std::to_string(mesh.nodes.size())), std::string::npos);
    EXPECT_NE(s.find("CELLS " + std::to_string(mesh.tets.size()) + " " + std::to_string(5 * mesh.tets.size())), std::string::npos);
    EXPECT_NE(s.find("POINT_DATA " + std::to_string(mesh.nodes.size())), std::string::npos);
    EXPECT_NE(s.find("VECTORS displacement"), std::string::npos);
    EXPECT_THROW(displacement_field(Eigen::VectorXd::Zero(4)), InputError);
}

TEST(FieldIo, NormalCdf) {
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
    EXPECT_NEAR(normal_cdf(1.0), 0.8413447460685429, 1e-15);
    EXPECT_NEAR(normal_cdf(-1.96), 0.024997895148220435, 1e-15);
}
