#include "iceload/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "iceload/error.hpp"
#include "iceload/units.hpp"

namespace iceload {

namespace {

constexpr double kPi = units::kPi;

constexpr std::string_view kRegionNames[kSurfaceRegionCount] = {
    "exterior_barrel", "interior_barrel", "top_cap_outer",   "top_cap_inner",  "bottom_cap_outer",
    "bottom_cap_inner", "flange_top",     "flange_rim",      "flange_underside",
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Structured (r, depth) profile that is revolved about the axis.
struct Profile {
    std::vector<double> radii;   // ascending, radii[0] == 0
    std::vector<double> depths;  // ascending, depths[0] == 0
    std::vector<int> node_id;    // (jr, kd) -> 2D node id or -1
    std::vector<char> cell_active;           // (jr, kd) cell of the solid
    std::vector<std::pair<int, int>> nodes;  // 2D node id -> (jr, kd)

    int at(int jr, int kd) const {
        return node_id[static_cast<std::size_t>(kd) * radii.size() + static_cast<std::size_t>(jr)];
    }
};

std::vector<double> depth_levels(const CylinderSpec& s) {
    const double h = s.height;
    const int layers = s.through_thickness_layers;
    std::vector<double> mandatory;
    for (int k = 1; k <= layers; ++k) {
        mandatory.push_back(s.cap_thickness * k / layers);
        mandatory.push_back(h - s.cap_thickness * k / layers);
    }
    if (s.has_flange()) {
        for (int k = 0; k <= layers; ++k) {
            mandatory.push_back(s.flange_offset_from_top - s.flange_thickness * k / layers);
        }
    }
    for (double e : s.extra_levels) {
        if (e > 0.0 && e < h) mandatory.push_back(e);
    }

    const double spacing = h / s.vertical_resolution;
    std::vector<double> levels = {0.0, h};
    levels.insert(levels.end(), mandatory.begin(), mandatory.end());
    for (int k = 1; k < s.vertical_resolution; ++k) {
        const double z = h * k / s.vertical_resolution;
        const bool crowded = std::any_of(mandatory.begin(), mandatory.end(), [&](double m) {
            return std::abs(m - z) < 0.3 * spacing;
        });
        if (!crowded) levels.push_back(z);
    }
    std::sort(levels.begin(), levels.end());
    std::vector<double> unique;
    for (double z : levels) {
        if (unique.empty() || z - unique.back() > 1e-9 * h) unique.push_back(z);
    }
    return unique;
}

Profile build_profile(const CylinderSpec& s) {
    Profile p;
    const double ri = s.inner_radius();
    const double ro = s.outer_radius;
    const int layers = s.through_thickness_layers;
    const int n_cap = s.cap_radial_divisions > 0 ? s.cap_radial_divisions
                                                 : std::max(2, s.angular_resolution / 8);
    p.radii.push_back(0.0);
    for (int j = 1; j <= n_cap; ++j) p.radii.push_back(ri * j / n_cap);
    for (int l = 1; l <= layers; ++l) p.radii.push_back(ri + s.wall_thickness * l / layers);
    if (s.has_flange()) {
        const int n_fl = std::max(1, static_cast<int>(std::ceil(s.flange_width / (2.0 * s.flange_thickness))));
        for (int m = 1; m <= n_fl; ++m) p.radii.push_back(ro + s.flange_width * m / n_fl);
    }
    p.depths = depth_levels(s);

    const double tol = 1e-9 * (ro + s.height);
    const std::size_t nr = p.radii.size();
    const std::size_t nd = p.depths.size();
    p.node_id.assign(nr * nd, -1);

    auto active = [&](std::size_t jr, std::size_t kd) {
        const double r0 = p.radii[jr], r1 = p.radii[jr + 1];
        const double d0 = p.depths[kd], d1 = p.depths[kd + 1];
        const bool wall = r0 >= ri - tol && r1 <= ro + tol;
        const bool cap = r1 <= ri + tol &&
                         (d1 <= s.cap_thickness + tol || d0 >= s.height - s.cap_thickness - tol);
        const bool flange = s.has_flange() && r0 >= ro - tol &&
                            d0 >= s.flange_offset_from_top - s.flange_thickness - tol &&
                            d1 <= s.flange_offset_from_top + tol;
        return wall || cap || flange;
    };

    p.cell_active.assign(nr * nd, 0);
    std::vector<char> used(nr * nd, 0);
    for (std::size_t kd = 0; kd + 1 < nd; ++kd) {
        for (std::size_t jr = 0; jr + 1 < nr; ++jr) {
            if (!active(jr, kd)) continue;
            p.cell_active[kd * nr + jr] = 1;
            used[kd * nr + jr] = used[kd * nr + jr + 1] = 1;
            used[(kd + 1) * nr + jr] = used[(kd + 1) * nr + jr + 1] = 1;
        }
    }
    int next = 0;
    for (std::size_t kd = 0; kd < nd; ++kd) {
        for (std::size_t jr = 0; jr < nr; ++jr) {
            if (!used[kd * nr + jr]) continue;
            p.node_id[kd * nr + jr] = next++;
            p.nodes.emplace_back(static_cast<int>(jr), static_cast<int>(kd));
        }
    }
    return p;
}

struct Revolver {
    const Profile& profile;
    int n_theta;
    std::vector<int> first;  // 2D node -> first 3D node id

    bool on_axis(int n2) const { return profile.nodes[static_cast<std::size_t>(n2)].first == 0; }

    int node3(int n2, int column) const {
        const int base = first[static_cast<std::size_t>(n2)];
        return on_axis(n2) ? base : base + ((column % n_theta) + n_theta) % n_theta;
    }

    // Ordering key inside one angular sector. The preferred side flips in the
    // upper half so the split is mirror symmetric about the x-z plane.
    long key(int n2, int side, int sector) const {
        if (on_axis(n2)) return 2L * n2;
        const bool upper = 2 * sector >= n_theta;
        const int preferred = upper ? 1 : 0;
        return 2L * n2 + (side == preferred ? 0 : 1);
    }
};

void push_tet(std::vector<std::array<int, 4>>& tets, const std::vector<Vec3>& xyz,
              std::array<int, 4> t) {
    const auto& a = xyz[static_cast<std::size_t>(t[0])];
    const auto& b = xyz[static_cast<std::size_t>(t[1])];
    const auto& c = xyz[static_cast<std::size_t>(t[2])];
    const auto& d = xyz[static_cast<std::size_t>(t[3])];
    const double v = tet_signed_volume(a, b, c, d);
    const double scale = std::pow(std::max({(b - a).norm(), (c - a).norm(), (d - a).norm()}), 3);
    if (std::abs(v) <= 1e-12 * scale) {
        throw NumericalError("mesh generation produced a degenerate tetrahedron");
    }
    if (v < 0.0) std::swap(t[2], t[3]);
    tets.push_back(t);
}

struct FaceRecord {
    std::array<int, 3> sorted;
    std::array<int, 3> oriented;
    std::size_t tet;
};

std::vector<FaceRecord> collect_faces(const Mesh& mesh) {
    static constexpr int kFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    std::vector<FaceRecord> faces;
    faces.reserve(mesh.tets.size() * 4);
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto& t = mesh.tets[e];
        for (const auto& f : kFaces) {
            FaceRecord r;
            r.oriented = {t[static_cast<std::size_t>(f[0])], t[static_cast<std::size_t>(f[1])],
                          t[static_cast<std::size_t>(f[2])]};
            r.sorted = r.oriented;
            std::sort(r.sorted.begin(), r.sorted.end());
            r.tet = e;
            faces.push_back(r);
        }
    }
    std::sort(faces.begin(), faces.end(),
              [](const FaceRecord& a, const FaceRecord& b) { return a.sorted < b.sorted; });
    return faces;
}

// Faces that belong to exactly one tet, outward oriented.
std::vector<FaceRecord> boundary_faces(const Mesh& mesh) {
    const auto faces = collect_faces(mesh);
    std::vector<FaceRecord> out;
    for (std::size_t i = 0; i < faces.size();) {
        std::size_t j = i;
        while (j < faces.size() && faces[j].sorted == faces[i].sorted) ++j;
        if (j - i == 1) {
            out.push_back(faces[i]);
        } else if (j - i > 2) {
            throw InputError("mesh face shared by more than two tetrahedra (tet " +
                             std::to_string(faces[i].tet) + ")");
        }
        i = j;
    }
    return out;
}

SurfaceRegion classify_edge(const CylinderSpec& s, const Profile& p, std::pair<int, int> a,
                            std::pair<int, int> b) {
    const double tol = 1e-9 * (s.outer_radius + s.height);
    const double ro = s.outer_radius;
    if (a.second == b.second) {
        const double d = p.depths[static_cast<std::size_t>(a.second)];
        const double rmax = std::max(p.radii[static_cast<std::size_t>(a.first)],
                                     p.radii[static_cast<std::size_t>(b.first)]);
        if (s.has_flange() && rmax > ro + tol) {
            if (near(d, s.flange_offset_from_top, tol)) return SurfaceRegion::FlangeUnderside;
            if (near(d, s.flange_offset_from_top - s.flange_thickness, tol)) return SurfaceRegion::FlangeTop;
        }
        if (near(d, 0.0, tol)) return SurfaceRegion::TopCapOuter;
        if (near(d, s.height, tol)) return SurfaceRegion::BottomCapOuter;
        if (near(d, s.cap_thickness, tol)) return SurfaceRegion::TopCapInner;
        if (near(d, s.height - s.cap_thickness, tol)) return SurfaceRegion::BottomCapInner;
    } else if (a.first == b.first) {
        const double r = p.radii[static_cast<std::size_t>(a.first)];
        if (near(r, ro, tol)) return SurfaceRegion::ExteriorBarrel;
        if (near(r, s.inner_radius(), tol)) return SurfaceRegion::InteriorBarrel;
        if (s.has_flange() && near(r, ro + s.flange_width, tol)) return SurfaceRegion::FlangeRim;
    }
    throw NumericalError("unclassifiable boundary edge in the revolved profile");
}

}  // namespace

std::string_view region_name(SurfaceRegion region) {
    return kRegionNames[static_cast<int>(region)];
}

std::optional<SurfaceRegion> parse_region(std::string_view name) {
    for (int i = 0; i < kSurfaceRegionCount; ++i) {
        if (kRegionNames[i] == name) return static_cast<SurfaceRegion>(i);
    }
    return std::nullopt;
}

void CylinderSpec::validate() const {
    auto fail = [](const std::string& msg) { throw InputError("invalid cylinder spec: " + msg); };
    if (!(wall_thickness > 0.0)) fail("wall_thickness must be positive");
    if (!(outer_radius > wall_thickness)) fail("outer_radius must exceed wall_thickness");
    if (!(height > 0.0)) fail("height must be positive");
    if (!(flange_offset_from_top >= 0.0 && flange_offset_from_top < height)) {
        fail("flange_offset_from_top must lie in [0, height)");
    }
    if (angular_resolution < 4) fail("angular_resolution must be at least 4");
    if (angular_resolution % 2 != 0) fail("angular_resolution must be even");
    if (vertical_resolution < 4) fail("vertical_resolution must be at least 4");
    if (through_thickness_layers < 1) fail("through_thickness_layers must be at least 1");
    if (!(cap_thickness > 0.0) || 2.0 * cap_thickness >= height) fail("cap_thickness out of range");
    if (cap_radial_divisions < 0) fail("cap_radial_divisions must be non-negative");
    if (flange_width < 0.0) fail("flange_width must be non-negative");
    if (has_flange()) {
        if (!(flange_thickness > 0.0)) fail("flange_thickness must be positive");
        if (flange_offset_from_top - flange_thickness <= cap_thickness ||
            flange_offset_from_top >= height - cap_thickness) {
            fail("flange must sit between the end caps");
        }
    }
}

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

double mesh_volume(const Mesh& mesh) {
    double v = 0.0;
    for (const auto& t : mesh.tets) {
        v += tet_signed_volume(mesh.nodes[static_cast<std::size_t>(t[0])], mesh.nodes[static_cast<std::size_t>(t[1])],
                               mesh.nodes[static_cast<std::size_t>(t[2])], mesh.nodes[static_cast<std::size_t>(t[3])]);
    }
    return v;
}

double analytic_volume(const CylinderSpec& s) {
    const double ro = s.outer_radius, ri = s.inner_radius();
    double v = kPi * s.height * (ro * ro - ri * ri) + 2.0 * kPi * ri * ri * s.cap_thickness;
    if (s.has_flange()) {
        const double rf = ro + s.flange_width;
        v += kPi * (rf * rf - ro * ro) * s.flange_thickness;
    }
    return v;
}

void validate_mesh(const Mesh& mesh) {
    if (mesh.nodes.empty() || mesh.tets.empty()) throw InputError("mesh is empty");
    const auto n = static_cast<int>(mesh.nodes.size());
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto& t = mesh.tets[e];
        for (int v : t) {
            if (v < 0 || v >= n) throw InputError("tet " + std::to_string(e) + " has an out of range node");
        }
        const double vol = tet_signed_volume(mesh.nodes[static_cast<std::size_t>(t[0])], mesh.nodes[static_cast<std::size_t>(t[1])],
                                             mesh.nodes[static_cast<std::size_t>(t[2])], mesh.nodes[static_cast<std::size_t>(t[3])]);
        if (!(vol > 0.0)) throw NumericalError("tet " + std::to_string(e) + " has non-positive volume");
    }
    std::vector<std::array<int, 3>> tagged;
    tagged.reserve(mesh.surface_tris.size());
    for (const auto& tri : mesh.surface_tris) {
        for (int v : tri.nodes) {
            if (v < 0 || v >= n) throw InputError("surface triangle has an out of range node");
        }
        auto s = tri.nodes;
        std::sort(s.begin(), s.end());
        tagged.push_back(s);
    }
    std::sort(tagged.begin(), tagged.end());
    if (std::adjacent_find(tagged.begin(), tagged.end()) != tagged.end()) {
        throw InputError("duplicate surface triangle");
    }
    std::vector<std::array<int, 3>> boundary;
    for (const auto& f : boundary_faces(mesh)) boundary.push_back(f.sorted);
    std::sort(boundary.begin(), boundary.end());
    if (boundary != tagged) {
        throw InputError("tagged surface does not match the boundary of the tetrahedra (" +
                         std::to_string(tagged.size()) + " tagged, " + std::to_string(boundary.size()) +
                         " boundary faces)");
    }
}

Mesh generate_cylinder_mesh(const CylinderSpec& spec) {
    spec.validate();
    const Profile profile = build_profile(spec);
    const int n_theta = spec.angular_resolution;

    Mesh mesh;
    Revolver rev{profile, n_theta, {}};
    rev.first.resize(profile.nodes.size());
    for (std::size_t n2 = 0; n2 < profile.nodes.size(); ++n2) {
        const auto [jr, kd] = profile.nodes[n2];
        const double r = profile.radii[static_cast<std::size_t>(jr)];
        const double z = -profile.depths[static_cast<std::size_t>(kd)];
        rev.first[n2] = static_cast<int>(mesh.nodes.size());
        if (jr == 0) {
            mesh.nodes.emplace_back(0.0, 0.0, z);
        } else {
            for (int i = 0; i < n_theta; ++i) {
                const double th = 2.0 * kPi * i / n_theta;
                mesh.nodes.emplace_back(r * std::cos(th), r * std::sin(th), z);
            }
        }
    }

    // Triangulate the active profile cells.
    std::vector<std::array<int, 3>> tris2;
    const std::size_t nr = profile.radii.size();
    const std::size_t nd = profile.depths.size();
    for (std::size_t kd = 0; kd + 1 < nd; ++kd) {
        for (std::size_t jr = 0; jr + 1 < nr; ++jr) {
            if (!profile.cell_active[kd * nr + jr]) continue;
            const int a = profile.at(static_cast<int>(jr), static_cast<int>(kd));
            const int b = profile.at(static_cast<int>(jr + 1), static_cast<int>(kd));
            const int c = profile.at(static_cast<int>(jr + 1), static_cast<int>(kd + 1));
            const int d = profile.at(static_cast<int>(jr), static_cast<int>(kd + 1));
            tris2.push_back({a, b, c});
            tris2.push_back({a, c, d});
        }
    }

    static constexpr int kRot[6][6] = {{0, 1, 2, 3, 4, 5}, {1, 2, 0, 4, 5, 3}, {2, 0, 1, 5, 3, 4},
                                       {3, 5, 4, 0, 2, 1}, {4, 3, 5, 1, 0, 2}, {5, 4, 3, 2, 1, 0}};

    for (int sector = 0; sector < n_theta; ++sector) {
        for (const auto& t2 : tris2) {
            std::array<int, 3> axis{}, off{};
            int n_axis = 0, n_off = 0;
            for (int v : t2) {
                if (rev.on_axis(v)) axis[static_cast<std::size_t>(n_axis++)] = v;
                else off[static_cast<std::size_t>(n_off++)] = v;
            }
            if (n_axis == 0) {
                std::array<int, 6> v{};
                std::array<long, 6> k{};
                for (int j = 0; j < 3; ++j) {
                    v[static_cast<std::size_t>(j)] = rev.node3(t2[static_cast<std::size_t>(j)], sector);
                    v[static_cast<std::size_t>(j + 3)] = rev.node3(t2[static_cast<std::size_t>(j)], sector + 1);
                    k[static_cast<std::size_t>(j)] = rev.key(t2[static_cast<std::size_t>(j)], 0, sector);
                    k[static_cast<std::size_t>(j + 3)] = rev.key(t2[static_cast<std::size_t>(j)], 1, sector);
                }
                const auto m = static_cast<std::size_t>(std::min_element(k.begin(), k.end()) - k.begin());
                std::array<int, 6> w{};
                std::array<long, 6> kw{};
                for (std::size_t j = 0; j < 6; ++j) {
                    w[j] = v[static_cast<std::size_t>(kRot[m][j])];
                    kw[j] = k[static_cast<std::size_t>(kRot[m][j])];
                }
                if (std::min(kw[1], kw[5]) < std::min(kw[2], kw[4])) {
                    push_tet(mesh.tets, mesh.nodes, {w[0], w[1], w[2], w[5]});
                    push_tet(mesh.tets, mesh.nodes, {w[0], w[1], w[5], w[4]});
                } else {
                    push_tet(mesh.tets, mesh.nodes, {w[0], w[1], w[2], w[4]});
                    push_tet(mesh.tets, mesh.nodes, {w[0], w[4], w[2], w[5]});
                }
                push_tet(mesh.tets, mesh.nodes, {w[0], w[4], w[5], w[3]});
            } else if (n_axis == 1) {
                const int a = rev.node3(axis[0], 0);
                const int v1i = rev.node3(off[0], sector), v1j = rev.node3(off[0], sector + 1);
                const int v2i = rev.node3(off[1], sector), v2j = rev.node3(off[1], sector + 1);
                const long k1i = rev.key(off[0], 0, sector), k1j = rev.key(off[0], 1, sector);
                const long k2i = rev.key(off[1], 0, sector), k2j = rev.key(off[1], 1, sector);
                if (std::min(k1i, k2j) < std::min(k2i, k1j)) {
                    push_tet(mesh.tets, mesh.nodes, {a, v1i, v2i, v2j});
                    push_tet(mesh.tets, mesh.nodes, {a, v1i, v2j, v1j});
                } else {
                    push_tet(mesh.tets, mesh.nodes, {a, v1i, v2i, v1j});
                    push_tet(mesh.tets, mesh.nodes, {a, v2i, v2j, v1j});
                }
            } else if (n_axis == 2) {
                push_tet(mesh.tets, mesh.nodes,
                         {rev.node3(axis[0], 0), rev.node3(axis[1], 0), rev.node3(off[0], sector),
                          rev.node3(off[0], sector + 1)});
            } else {
                throw NumericalError("profile triangle lies on the axis");
            }
        }
    }

    // 3D node -> 2D profile node.
    std::vector<int> to2d(mesh.nodes.size());
    for (std::size_t n2 = 0; n2 < profile.nodes.size(); ++n2) {
        const int count = rev.on_axis(static_cast<int>(n2)) ? 1 : n_theta;
        for (int i = 0; i < count; ++i) to2d[static_cast<std::size_t>(rev.first[n2] + i)] = static_cast<int>(n2);
    }
    for (const auto& f : boundary_faces(mesh)) {
        std::set<int> ids;
        for (int v : f.oriented) ids.insert(to2d[static_cast<std::size_t>(v)]);
        if (ids.size() != 2) throw NumericalError("boundary face does not map to a profile edge");
        const auto a = profile.nodes[static_cast<std::size_t>(*ids.begin())];
        const auto b = profile.nodes[static_cast<std::size_t>(*ids.rbegin())];
        mesh.surface_tris.push_back({f.oriented, classify_edge(spec, profile, a, b)});
    }
    validate_mesh(mesh);
    return mesh;
}

std::vector<int> region_nodes(const Mesh& mesh, SurfaceRegion region) {
    std::vector<char> mark(mesh.nodes.size(), 0);
    for (const auto& t : mesh.surface_tris) {
        if (t.region != region) continue;
        for (int v : t.nodes) mark[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < mark.size(); ++i) {
        if (mark[i]) out.push_back(static_cast<int>(i));
    }
    return out;
}

SurfacePatch tag_load_surface(const Mesh& mesh, double z_top, double z_bottom,
                              const LoadBandOptions& options) {
    if (!(z_bottom > z_top)) throw InputError("load band needs z_bottom > z_top");
    const double tol = 1e-9;
    std::vector<char> mark(mesh.nodes.size(), 0);
    auto take = [&](SurfaceRegion region) {
        for (int v : region_nodes(mesh, region)) {
            const double d = mesh.depth(v);
            if (d >= z_top - tol && d <= z_bottom + tol) mark[static_cast<std::size_t>(v)] = 1;
        }
    };
    take(SurfaceRegion::ExteriorBarrel);
    if (options.include_flange_underside) take(SurfaceRegion::FlangeUnderside);

    SurfacePatch patch;
    patch.name = options.name;
    patch.z_top = z_top;
    patch.z_bottom = z_bottom;
    patch.includes_flange_underside = options.include_flange_underside;
    for (std::size_t i = 0; i < mark.size(); ++i) {
        if (mark[i]) patch.node_ids.push_back(static_cast<int>(i));
    }
    if (patch.node_ids.empty()) {
        std::ostringstream msg;
        msg << "load band [" << z_top << ", " << z_bottom << "] m contains no exterior surface nodes";
        throw InputError(msg.str());
    }
    return patch;
}

Frame frame_at_angle(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return Frame{Vec3(c, s, 0.0), Vec3(s, -c, 0.0), Vec3(0.0, 0.0, 1.0)};
}

Frame surface_frame(const Mesh& mesh, int node_id) {
    if (node_id < 0 || static_cast<std::size_t>(node_id) >= mesh.nodes.size()) {
        throw InputError("node " + std::to_string(node_id) + " out of range");
    }
    bool on_barrel = false;
    for (const auto& t : mesh.surface_tris) {
        if (t.region != SurfaceRegion::ExteriorBarrel && t.region != SurfaceRegion::FlangeUnderside) continue;
        if (std::find(t.nodes.begin(), t.nodes.end(), node_id) != t.nodes.end()) {
            on_barrel = true;
            break;
        }
    }
    if (!on_barrel) {
        throw InputError("node " + std::to_string(node_id) +
                         " is not on the exterior barrel; its normal is not horizontal");
    }
    const auto& x = mesh.nodes[static_cast<std::size_t>(node_id)];
    if (std::hypot(x.x(), x.y()) < 1e-12) throw InputError("node on the axis has no barrel frame");
    return frame_at_angle(std::atan2(x.y(), x.x()));
}

Vec3 Gauge::direction_vector() const {
    if (direction == GaugeDirection::Vertical) return Vec3(0.0, 0.0, 1.0);
    return frame_at_angle(theta).t_h;
}

std::size_t GaugeSet::live_count() const {
    return static_cast<std::size_t>(std::count_if(gauges.begin(), gauges.end(), [](const Gauge& g) { return g.live; }));
}

std::vector<std::size_t> GaugeSet::live_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < gauges.size(); ++i) {
        if (gauges[i].live) out.push_back(i);
    }
    return out;
}

std::optional<std::size_t> GaugeSet::find(std::string_view id) const {
    for (std::size_t i = 0; i < gauges.size(); ++i) {
        if (gauges[i].id == id) return i;
    }
    return std::nullopt;
}

std::string gauge_id(std::string_view ring, double theta, GaugeDirection dir) {
    const long degrees = std::lround(units::to_deg(units::wrap_angle(theta))) % 360;
    return std::string(ring) + "_" + std::to_string(degrees) + (dir == GaugeDirection::Horizontal ? "_h" : "_v");
}

GaugeLayoutConfig default_gauge_layout(const CylinderSpec& spec) {
    GaugeLayoutConfig layout;
    layout.inner_radius = spec.inner_radius();
    layout.height = spec.height;
    return layout;
}

GaugeSet gauge_locations(const GaugeLayoutConfig& layout) {
    if (layout.rings.empty()) throw InputError("gauge layout needs at least one ring");
    if (!(layout.angle_interval > 0.0)) throw InputError("gauge angle interval must be positive");
    if (!(layout.inner_radius > 0.0)) throw InputError("gauge layout needs a positive inner radius");
    const int n_angles = static_cast<int>(std::floor(2.0 * kPi / layout.angle_interval + 1e-9));
    GaugeSet set;
    set.rings = layout.rings;
    const double r = layout.inner_radius + layout.radial_inset;
    for (std::size_t ri = 0; ri < layout.rings.size(); ++ri) {
        const auto& ring = layout.rings[ri];
        if (!(ring.depth > 0.0 && ring.depth < layout.height)) {
            std::ostringstream msg;
            msg << "gauge ring '" << ring.name << "' at depth " << ring.depth << " m lies outside the shell height";
            throw InputError(msg.str());
        }
        for (int k = 0; k < n_angles; ++k) {
            const double theta = units::wrap_angle(layout.angle_start + k * layout.angle_interval);
            for (auto dir : {GaugeDirection::Horizontal, GaugeDirection::Vertical}) {
                Gauge g;
                g.id = gauge_id(ring.name, theta, dir);
                g.ring = ri;
                g.theta = theta;
                g.direction = dir;
                g.position = Vec3(r * std::cos(theta), r * std::sin(theta), -ring.depth);
                set.gauges.push_back(std::move(g));
            }
        }
    }
    for (const auto& id : layout.dead) {
        const auto idx = set.find(id);
        if (!idx) throw InputError("dead gauge '" + id + "' is not part of the layout");
        set.gauges[*idx].live = false;
    }
    return set;
}

}  // namespace iceload
