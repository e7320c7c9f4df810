#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace iceload {

using Vec3 = Eigen::Vector3d;

// Mesh coordinates are right-handed with z pointing up and the buoy top at
// z = 0. Depth below the top (the convention used in all files) is -z.

enum class SurfaceRegion : int {
    ExteriorBarrel = 0,
    InteriorBarrel = 1,
    TopCapOuter = 2,
    TopCapInner = 3,
    BottomCapOuter = 4,
    BottomCapInner = 5,
    FlangeTop = 6,
    FlangeRim = 7,
    FlangeUnderside = 8,
};

inline constexpr int kSurfaceRegionCount = 9;

std::string_view region_name(SurfaceRegion region);
std::optional<SurfaceRegion> parse_region(std::string_view name);

struct CylinderSpec {
    double outer_radius = 0.381;
    double wall_thickness = 0.00635;
    double height = 1.168;
    double flange_offset_from_top = 0.235;
    int angular_resolution = 48;
    int vertical_resolution = 24;
    int through_thickness_layers = 1;

    // Flat end caps; thickness defaults to the wall thickness.
    double cap_thickness = 0.00635;
    // 0 picks a radial division count from the angular resolution.
    int cap_radial_divisions = 0;
    // Flange modelled as a solid annulus outside the wall whose underside sits
    // at flange_offset_from_top. A width of 0 disables it.
    double flange_width = 0.0381;
    double flange_thickness = 0.0127;
    // Additional depths that must appear as mesh levels (load band edges).
    std::vector<double> extra_levels;

    double inner_radius() const { return outer_radius - wall_thickness; }
    bool has_flange() const { return flange_width > 0.0; }

    // Throws InputError with a diagnostic if an invariant is violated.
    void validate() const;
};

struct SurfaceTri {
    std::array<int, 3> nodes;  // counter-clockwise seen from outside
    SurfaceRegion region;
};

struct Mesh {
    std::vector<Vec3> nodes;
    std::vector<std::array<int, 4>> tets;
    std::vector<SurfaceTri> surface_tris;

    std::size_t node_count() const { return nodes.size(); }
    std::size_t dof_count() const { return 3 * nodes.size(); }
    double depth(int node) const { return -nodes[static_cast<std::size_t>(node)].z(); }
};

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
double mesh_volume(const Mesh& mesh);
// Exact volume of the idealised solid described by a spec.
double analytic_volume(const CylinderSpec& spec);

// Checks connectivity ranges, positive tet volumes, and that the tagged
// surface is exactly the set of unshared tet faces. Throws on failure.
void validate_mesh(const Mesh& mesh);

Mesh generate_cylinder_mesh(const CylinderSpec& spec);

// Nodes touching at least one surface triangle of the given region.
std::vector<int> region_nodes(const Mesh& mesh, SurfaceRegion region);

struct SurfacePatch {
    std::string name;
    std::vector<int> node_ids;  // ascending, duplicate free
    double z_top = 0.0;         // depth of the upper band edge
    double z_bottom = 0.0;      // depth of the lower band edge
    bool includes_flange_underside = false;

    std::size_t size() const { return node_ids.size(); }
};

struct LoadBandOptions {
    std::string name = "load_band";
    // Flange underside nodes inside the band join the patch and use the barrel
    // frame at their angle.
    bool include_flange_underside = true;
};

SurfacePatch tag_load_surface(const Mesh& mesh, double z_top, double z_bottom,
                              const LoadBandOptions& options = {});

// Local buoy frame. t_h is horizontal and positive clockwise seen from above,
// t_v points up, n is the outward normal of the barrel.
struct Frame {
    Vec3 n;
    Vec3 t_h;
    Vec3 t_v;

    // Columns of the pressure-to-Cartesian map for (p_N, p_H, p_V). Positive
    // p_N pushes inward, hence the minus sign on the normal column.
    Vec3 a_normal() const { return Vec3(-n.x(), -n.y(), 0.0); }
    Vec3 a_horizontal() const { return Vec3(t_h.x(), t_h.y(), 0.0); }
    Vec3 a_vertical() const { return Vec3(0.0, 0.0, t_v.z()); }
};

Frame frame_at_angle(double theta);
// Frame for a node on the exterior barrel or the flange underside.
Frame surface_frame(const Mesh& mesh, int node_id);

enum class GaugeDirection { Horizontal, Vertical };

struct GaugeRing {
    std::string name;
    double depth = 0.0;
};

struct GaugeLayoutConfig {
    std::vector<GaugeRing> rings = {{"top", 0.347}, {"mid", 0.512}, {"bot", 0.677}};
    double angle_start = 0.0;
    double angle_interval = 3.14159265358979323846 / 3.0;
    std::vector<std::string> dead = {"bot_0_h"};
    double inner_radius = 0.381 - 0.00635;
    double height = 1.168;
    // Gauges sit this far inside the inner wall so each one lies in the
    // interior of the solid.
    double radial_inset = 1e-5;
};

struct Gauge {
    std::string id;  // ring_angle_direction, e.g. mid_120_h
    std::size_t ring = 0;
    double theta = 0.0;
    GaugeDirection direction = GaugeDirection::Horizontal;
    Vec3 position;
    bool live = true;

    Vec3 direction_vector() const;
};

struct GaugeSet {
    std::vector<GaugeRing> rings;
    std::vector<Gauge> gauges;

    std::size_t size() const { return gauges.size(); }
    std::size_t live_count() const;
    std::vector<std::size_t> live_indices() const;
    std::optional<std::size_t> find(std::string_view id) const;
};

GaugeLayoutConfig default_gauge_layout(const CylinderSpec& spec);
GaugeSet gauge_locations(const GaugeLayoutConfig& layout);

std::string gauge_id(std::string_view ring, double theta, GaugeDirection dir);

}  // namespace iceload
