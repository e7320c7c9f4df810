#include "iceload/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>

#include "iceload/error.hpp"
#include "iceload/mesh_io.hpp"

namespace iceload {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string spec_key(const CylinderSpec& s) {
    RunConfig probe;
    probe.geometry = s;
    std::string key = format_config(probe);
    key = key.substr(0, key.find("[gauges]"));
    for (double e : s.extra_levels) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g;", e);
        key += buf;
    }
    return key;
}

}  // namespace

CylinderSpec effective_spec(const RunConfig& cfg) {
    CylinderSpec s = cfg.geometry;
    s.extra_levels.push_back(cfg.band.z_top);
    s.extra_levels.push_back(cfg.band.z_bottom);
    return s;
}

Mesh obtain_mesh(const RunConfig& cfg, std::string* origin) {
    if (!cfg.paths.mesh.empty()) {
        if (origin) *origin = "loaded " + cfg.paths.mesh.string();
        return load_mesh(cfg.paths.mesh);
    }
    const CylinderSpec spec = effective_spec(cfg);
    if (cfg.paths.mesh_cache.empty()) {
        if (origin) *origin = "generated";
        return generate_cylinder_mesh(spec);
    }
    char name[40];
    std::snprintf(name, sizeof(name), "mesh_%016llx.txt", static_cast<unsigned long long>(fnv1a(spec_key(spec))));
    const auto path = cfg.paths.mesh_cache / name;
    if (std::filesystem::exists(path)) {
        if (origin) *origin = "cache hit " + path.string();
        return load_mesh(path);
    }
    Mesh mesh = generate_cylinder_mesh(spec);
    std::filesystem::create_directories(cfg.paths.mesh_cache);
    save_mesh(mesh, path);
    if (origin) *origin = "generated, cached at " + path.string();
    return mesh;
}

Model build_model(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    std::string origin;
    CylinderSpec spec = effective_spec(cfg);
    Mesh mesh = obtain_mesh(cfg, &origin);
    GaugeSet gauges = gauge_locations(cfg.gauges);
    if (gauges.live_count() == 0) throw InputError("gauge layout has no live gauge");
    LoadBandOptions band_opts;
    band_opts.include_flange_underside = cfg.band.include_flange_underside;
    SurfacePatch band = tag_load_surface(mesh, cfg.band.z_top, cfg.band.z_bottom, band_opts);
    StiffnessSystem system = assemble_stiffness(mesh, cfg.material, cfg.rigid_body);
    StrainObserver observer = assemble_strain_observer(mesh, gauges);
    LoadOptions load_opts;
    load_opts.flip_normal_sign = cfg.flip_normal_sign;
    LoadOperator load = assemble_surface_load(mesh, band, load_opts);
    ObservationOperator h = build_observation_operator(system, observer, load);
    BlockGaussian prior = assemble_prior(mesh, band, cfg.prior);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return Model{std::move(spec),     std::move(mesh), std::move(gauges), std::move(band),  std::move(system),
                 std::move(observer), std::move(load), std::move(h),      std::move(prior), std::move(origin),
                 seconds};
}

Eigen::VectorXd experiment_truth(const RunConfig& cfg, const Model& model) {
    if (!cfg.experiment) throw InputError("config has no [experiment] section");
    const auto& e = *cfg.experiment;
    const auto patches = e.use_layout ? synthetic_patches(e.layout) : e.patches;
    if (patches.empty()) throw InputError("experiment has no patches");
    return patch_load(model.mesh, model.band, patches, cfg.geometry.outer_radius);
}

}  // namespace iceload
