#pragma once

#include <string>

#include "iceload/config.hpp"
#include "iceload/elasticity.hpp"
#include "iceload/geometry.hpp"
#include "iceload/prior.hpp"

namespace iceload {

// Geometry spec actually meshed: the configured one plus the load band edges
// as mandatory depth levels.
CylinderSpec effective_spec(const RunConfig& cfg);

// Loads paths.mesh, else reuses or fills paths.mesh_cache (a directory, one
// file per geometry hash), else generates.
Mesh obtain_mesh(const RunConfig& cfg, std::string* origin = nullptr);

// Everything downstream of a config that does not depend on data.
struct Model {
    CylinderSpec spec;
    Mesh mesh;
    GaugeSet gauges;
    SurfacePatch band;
    StiffnessSystem system;
    StrainObserver observer;
    LoadOperator load;
    ObservationOperator h;
    BlockGaussian prior;
    std::string mesh_origin;
    double build_seconds = 0.0;
};

Model build_model(const RunConfig& cfg);

// p_true for the configured experiment on the model's band.
Eigen::VectorXd experiment_truth(const RunConfig& cfg, const Model& model);

}  // namespace iceload
