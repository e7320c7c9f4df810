#include <gtest/gtest.h>

#include "iceload/config.hpp"
#include "iceload/error.hpp"
#include "iceload/toml.hpp"
#include "iceload/units.hpp"

using namespace iceload;

namespace {

std::size_t error_line(const std::string& text) {
    try {
        parse_config(text, "test.toml");
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST(Toml, ParsesTheSupportedSubset) {
    const auto t = toml::parse(R"(# comment
top = 1
[a]
s = "x # not a comment"   # trailing
f = -2.5e3
flag = true
arr = [1, 2.0, "three"]
[a.b]
n = 7
[[list]]
k = 1
[[list]]
k = 2
)");
    EXPECT_TRUE(t.values.at("top").integer);
    const auto& a = *t.tables.at("a");
    EXPECT_EQ(std::get<std::string>(a.values.at("s").data), "x # not a comment");
    EXPECT_EQ(std::get<double>(a.values.at("f").data), -2500.0);
    EXPECT_FALSE(a.values.at("f").integer);
    EXPECT_TRUE(std::get<bool>(a.values.at("flag").data));
    EXPECT_EQ(std::get<toml::Array>(a.values.at("arr").data).size(), 3u);
    EXPECT_EQ(a.values.at("arr").line, 7u);
    EXPECT_EQ(std::get<double>(a.tables.at("b")->values.at("n").data), 7.0);
    ASSERT_EQ(t.arrays.at("list").size(), 2u);
    EXPECT_EQ(std::get<double>(t.arrays.at("list")[1]->values.at("k").data), 2.0);
}

TEST(Toml, ReportsLineNumbers) {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            toml::parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("a = 1\nb = \n"), 2u);
    EXPECT_EQ(line_of("a = 1\n[t\n"), 2u);
    EXPECT_EQ(line_of("a = 1\na = 2\n"), 2u);
    EXPECT_EQ(line_of("\n\ns = \"open\n"), 3u);
    EXPECT_EQ(line_of("x = [1, 2\n"), 1u);
    EXPECT_EQ(line_of("x = 1.2.3\n"), 1u);
    EXPECT_EQ(line_of("just words\n"), 1u);
}

TEST(Config, DefaultsAreValidAndRoundTrip) {
    const RunConfig cfg = default_config();
    EXPECT_NO_THROW(cfg.validate());
    ASSERT_TRUE(cfg.experiment.has_value());
    EXPECT_EQ(cfg.noise_std, 1e-6);
    EXPECT_EQ(cfg.material.youngs_modulus, 200e9);
    const std::string text = format_config(cfg);
    const RunConfig back = parse_config(text);
    EXPECT_EQ(format_config(back), text);
}

TEST(Config, ParsesUnitsAndPatches) {
    const RunConfig cfg = parse_config(R"(
[geometry]
wall_thickness = "12.7 mm"
angular_resolution = 24
vertical_resolution = 12

[material]
youngs_modulus = "70 GPa"
rigid_body = "pin"

[prior.normal]
sigma = "2 MPa"
meridional_lengthscale = "12 deg"

[noise]
sigma_z = 2e-6

[experiment]
records = 4

[[experiment.patch]]
center_angle = "90 deg"
width = "30 cm"
z_center = "50 cm"
height = "10 cm"
magnitude = "1 MPa"
component = "H"

[paths]
output_dir = "results"
)",
                                       "cfg.toml", "/base");
    EXPECT_DOUBLE_EQ(cfg.geometry.wall_thickness, 0.0127);
    EXPECT_EQ(cfg.geometry.angular_resolution, 24);
    EXPECT_DOUBLE_EQ(cfg.material.youngs_modulus, 70e9);
    EXPECT_EQ(cfg.rigid_body, RigidBodyTreatment::Pin);
    EXPECT_DOUBLE_EQ(cfg.prior.kernels[0].sigma, 2e6);
    EXPECT_NEAR(cfg.prior.kernels[0].meridional_lengthscale, units::deg(12), 1e-15);
    EXPECT_DOUBLE_EQ(cfg.prior.kernels[1].sigma, 0.5e6);
    EXPECT_DOUBLE_EQ(cfg.noise_std, 2e-6);
    ASSERT_TRUE(cfg.experiment);
    EXPECT_EQ(cfg.experiment->records, 4u);
    ASSERT_EQ(cfg.experiment->patches.size(), 1u);
    EXPECT_FALSE(cfg.experiment->use_layout);
    const PatchSpec& p = cfg.experiment->patches[0];
    EXPECT_NEAR(p.center_angle, units::kPi / 2, 1e-15);
    EXPECT_DOUBLE_EQ(p.angular_width, 0.3);
    EXPECT_EQ(p.component, Component::Horizontal);
    EXPECT_EQ(cfg.paths.output_dir, std::filesystem::path("/base/results"));
    const RunConfig back = parse_config(format_config(cfg));
    EXPECT_EQ(back.experiment->patches.size(), 1u);
    EXPECT_EQ(format_config(back), format_config(cfg));
}

TEST(Config, WithoutExperimentSectionHasNoExperiment) {
    EXPECT_FALSE(parse_config("[noise]\nsigma_z = 1e-6\n").experiment.has_value());
}

TEST(Config, RejectsInvalidInputWithLineNumbers) {
    EXPECT_EQ(error_line("[geometry]\nouter_radius = 0.381\nbogus = 1\n"), 3u);
    EXPECT_EQ(error_line("\n[nonsense]\n"), 2u);
    EXPECT_EQ(error_line("[geometry]\nwall_thickness = \"3 MPa\"\n"), 2u);
    EXPECT_EQ(error_line("[geometry]\nangular_resolution = 12.5\n"), 2u);
    EXPECT_EQ(error_line("[material]\nrigid_body = \"glue\"\n"), 2u);
    EXPECT_EQ(error_line("[experiment]\n[[experiment.patch]]\ncomponent = \"Q\"\n"), 3u);
    EXPECT_THROW(parse_config("[material]\npoisson_ratio = 0.5\n"), InputError);
    EXPECT_THROW(parse_config("[noise]\nsigma_z = -1\n"), InputError);
    EXPECT_THROW(parse_config("[load_band]\nz_top = 0.9\nz_bottom = 0.3\n"), InputError);
    EXPECT_THROW(parse_config("[gauges]\nring_names = [\"a\"]\nring_depths = [0.1, 0.2]\n"), InputError);
    EXPECT_THROW(parse_config("[prior.normal]\nsigma = 0\n"), InputError);
    EXPECT_THROW(load_config("/nonexistent/config.toml"), InputError);
}

TEST(Config, ShippedExampleSpellsOutTheDefaults) {
    RunConfig cfg = load_config(std::filesystem::path(ICELOAD_SOURCE_DIR) / "configs" / "synthetic_patches.toml");
    ASSERT_TRUE(cfg.experiment);
    EXPECT_EQ(cfg.experiment->records, 20u);
    RunConfig expected = default_config();
    expected.experiment->records = 20;
    expected.paths.output_dir = cfg.paths.output_dir;
    EXPECT_EQ(format_config(cfg), format_config(expected));
}
