#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "iceload/geometry.hpp"
#include "iceload/inference.hpp"
#include "iceload/prior.hpp"

namespace iceload {

// Rectangular load on the barrel. Width is arc length at the outer radius,
// depths are measured from the buoy top.
struct PatchSpec {
    double center_angle = 0.0;
    double angular_width = 0.0;
    double z_center = 0.0;
    double z_height = 0.0;
    double magnitude = 0.0;
    Component component = Component::Normal;
};

// Sum of the magnitudes of every patch covering a node, per component, with
// hard edges. Throws when a patch leaves the load band or covers no node.
Eigen::VectorXd patch_load(const Mesh& mesh, const SurfacePatch& band, const std::vector<PatchSpec>& patches,
                           double outer_radius);

// Verification layout: one front patch centred on theta = 0 and two back
// patches mirrored about theta = 180 deg.
struct SyntheticLayout {
    double front_magnitude = 4.0e6;
    double back_magnitude = 2.0e6;
    double front_width = 0.699;
    double back_width = 0.344;
    double height = 0.200;
    double z_center = 0.55;
    // Arc gap between the two back patches. Negative selects
    // front_width - 2 * back_width, so the pair spans the front extent.
    double back_gap = -1.0;
    double outer_radius = 0.381;

    double resolved_gap() const { return back_gap < 0.0 ? front_width - 2.0 * back_width : back_gap; }
    // Centre angles of the two back patches, below then above 180 deg.
    std::pair<double, double> back_centers() const;
};

std::vector<PatchSpec> synthetic_patches(const SyntheticLayout& layout);

// eps = H p_true (+ N(0, sigma_z^2) noise when sigma_z > 0) on the given rows
// of H (all rows when empty).
ObservationSet synthesize_observations(const Eigen::VectorXd& p_true, const Eigen::MatrixXd& h, double noise_std,
                                       std::uint64_t seed, std::vector<Eigen::Index> rows = {});

// `count` records with the same truth and independent noise, spaced dt apart.
std::vector<ObservationSet> synthesize_series(const Eigen::VectorXd& p_true, const Eigen::MatrixXd& h, double noise_std,
                                              std::uint64_t seed, std::size_t count, double dt = 0.5);

struct Peak {
    double value = 0.0;
    double angle = 0.0;  // [0, 2 pi)
    double depth = 0.0;
    int node = -1;
};

struct SlicePoint {
    double theta = 0.0;
    double mean = 0.0;
    double std = 0.0;
    double truth = 0.0;
};

struct SliceProfile {
    double depth = 0.0;
    std::vector<SlicePoint> points;  // ascending theta
};

struct RecoveryMetrics {
    Peak front;             // |theta| < 90 deg
    Peak back;              // the remaining half
    Peak back_lower;        // theta in [90, 180] deg
    Peak back_upper;        // theta in [180, 270] deg
    double max_negative_excursion = 0.0;  // -min(mean_N), 0 if never negative
    std::vector<SliceProfile> slices;
};

RecoveryMetrics recovery_metrics(const Mesh& mesh, const SurfacePatch& band, const Eigen::VectorXd& p_true,
                                 const Posterior& post, const std::vector<double>& slice_depths,
                                 Component component = Component::Normal);

// Interpolates a nodal field (one value per band node) around the barrel at
// a depth. Each angular column of barrel nodes is interpolated linearly.
SliceProfile slice_profile(const Mesh& mesh, const SurfacePatch& band, const Eigen::VectorXd& mean,
                           const Eigen::VectorXd& std, const Eigen::VectorXd& truth, double depth);

}  // namespace iceload
