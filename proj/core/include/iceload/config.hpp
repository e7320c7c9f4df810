#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iceload/elasticity.hpp"
#include "iceload/experiments.hpp"
#include "iceload/geometry.hpp"
#include "iceload/prior.hpp"

namespace iceload {

struct BandConfig {
    double z_top = 0.235;
    double z_bottom = 0.835;
    bool include_flange_underside = true;
};

struct ExperimentConfig {
    // Explicit patches replace the default verification layout when present.
    std::vector<PatchSpec> patches;
    SyntheticLayout layout;
    bool use_layout = true;
    std::uint64_t seed = 1;
    std::size_t records = 1;
    double dt = 0.5;
    // Noise added to synthetic strains; negative uses noise.sigma_z.
    double noise_std = -1.0;
};

struct PathsConfig {
    std::filesystem::path mesh;        // load instead of generating when set
    std::filesystem::path mesh_cache;  // generated meshes are stored here
    std::filesystem::path input_csv;
    std::filesystem::path load_file;
    std::filesystem::path output_dir = "out";
};

struct OutputConfig {
    std::vector<double> slice_depths = {0.515, 0.5875};
    bool fields = true;          // VTK field files
    bool per_record_csv = true;  // posterior CSV for every record
};

struct RunConfig {
    CylinderSpec geometry;
    GaugeLayoutConfig gauges;
    BandConfig band;
    Material material;
    RigidBodyTreatment rigid_body = RigidBodyTreatment::Deflate;
    PriorConfig prior;
    double noise_std = 1e-6;
    std::optional<ExperimentConfig> experiment;
    PathsConfig paths;
    OutputConfig output;
    bool flip_normal_sign = false;

    // Checks every section; throws InputError naming the offending key.
    void validate() const;
};

// Quantities accept a bare SI number or a string with a unit ("6.35 mm",
// "4 MPa", "60 deg"). Unknown keys and sections are rejected. Relative paths
// are resolved against base_dir.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>",
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Fully resolved config, re-parseable by parse_config.
std::string format_config(const RunConfig& cfg);

// Default config with the verification experiment enabled.
RunConfig default_config();

}  // namespace iceload
