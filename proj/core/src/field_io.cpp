#include "iceload/field_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "iceload/error.hpp"
#include "iceload/units.hpp"

namespace iceload {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.11e", v);
    return buf;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<NodalField>& fields, const std::string& title) {
    const std::size_t n = mesh.nodes.size();
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << n << " double\n";
    for (const auto& x : mesh.nodes) out << fmt(x.x()) << ' ' << fmt(x.y()) << ' ' << fmt(x.z()) << '\n';
    out << "CELLS " << mesh.tets.size() << ' ' << 5 * mesh.tets.size() << '\n';
    for (const auto& t : mesh.tets) out << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
    out << "CELL_TYPES " << mesh.tets.size() << '\n';
    for (std::size_t i = 0; i < mesh.tets.size(); ++i) out << "10\n";
    if (fields.empty()) return;
    out << "POINT_DATA " << n << '\n';
    for (const auto& f : fields) {
        if (f.components != 1 && f.components != 3) throw InputError("field " + f.name + ": components must be 1 or 3");
        if (f.values.size() != n * static_cast<std::size_t>(f.components)) {
            throw InputError("field " + f.name + " does not match the node count");
        }
        if (f.components == 1) {
            out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : f.values) out << fmt(v) << '\n';
        } else {
            out << "VECTORS " << f.name << " double\n";
            for (std::size_t i = 0; i < n; ++i) {
                out << fmt(f.values[3 * i]) << ' ' << fmt(f.values[3 * i + 1]) << ' ' << fmt(f.values[3 * i + 2]) << '\n';
            }
        }
    }
}

void save_vtk(const std::filesystem::path& path, const Mesh& mesh, const std::vector<NodalField>& fields) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    write_vtk(out, mesh, fields, path.filename().string());
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

NodalField band_field(const Mesh& mesh, const SurfacePatch& band, const Eigen::VectorXd& blocks,
                      const std::string& name) {
    const auto n = static_cast<Eigen::Index>(band.node_ids.size());
    if (blocks.size() != 3 * n) throw InputError("band field " + name + " has the wrong length");
    NodalField f{name, 3, std::vector<double>(3 * mesh.nodes.size(), 0.0)};
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto node = static_cast<std::size_t>(band.node_ids[static_cast<std::size_t>(j)]);
        for (int c = 0; c < 3; ++c) f.values[3 * node + static_cast<std::size_t>(c)] = blocks[c * n + j];
    }
    return f;
}

NodalField displacement_field(const Eigen::VectorXd& d, const std::string& name) {
    if (d.size() % 3 != 0) throw InputError("displacement vector length is not a multiple of 3");
    return {name, 3, std::vector<double>(d.data(), d.data() + d.size())};
}

void write_posterior_csv(std::ostream& out, const Mesh& mesh, const SurfacePatch& band, const Posterior& post) {
    const auto n = static_cast<Eigen::Index>(band.node_ids.size());
    if (post.mean.size() != 3 * n) throw InputError("posterior does not match the load band");
    const Eigen::VectorXd sd = post.stddev();
    out << "node_id,theta_deg,depth_m,mean_N,mean_H,mean_V,std_N,std_H,std_V,prob_nonneg_N\n";
    for (Eigen::Index j = 0; j < n; ++j) {
        const int id = band.node_ids[static_cast<std::size_t>(j)];
        const Vec3& x = mesh.nodes[static_cast<std::size_t>(id)];
        const double theta = units::to_deg(units::wrap_angle(std::atan2(x.y(), x.x())));
        const double prob = sd[j] > 0.0 ? normal_cdf(post.mean[j] / sd[j]) : (post.mean[j] >= 0.0 ? 1.0 : 0.0);
        out << id << ',' << fmt(theta) << ',' << fmt(-x.z());
        for (int c = 0; c < 3; ++c) out << ',' << fmt(post.mean[c * n + j]);
        for (int c = 0; c < 3; ++c) out << ',' << fmt(sd[c * n + j]);
        out << ',' << fmt(prob) << '\n';
    }
}

void write_slices_csv(std::ostream& out, const std::vector<SliceProfile>& slices) {
    out << "depth_m,theta_deg,mean_N,std_N,truth_N\n";
    for (const auto& s : slices) {
        for (const auto& p : s.points) {
            out << fmt(s.depth) << ',' << fmt(units::to_deg(p.theta)) << ',' << fmt(p.mean) << ',' << fmt(p.std) << ','
                << fmt(p.truth) << '\n';
        }
    }
}

void write_load_csv(std::ostream& out, const SurfacePatch& band, const Eigen::VectorXd& p) {
    const auto n = static_cast<Eigen::Index>(band.node_ids.size());
    if (p.size() != 3 * n) throw InputError("load vector does not match the load band");
    out << "node_id,p_N,p_H,p_V\n";
    for (Eigen::Index j = 0; j < n; ++j) {
        out << band.node_ids[static_cast<std::size_t>(j)] << ',' << fmt(p[j]) << ',' << fmt(p[n + j]) << ','
            << fmt(p[2 * n + j]) << '\n';
    }
}

Eigen::VectorXd read_load_csv(std::istream& in, const SurfacePatch& band, const std::string& source) {
    const auto n = static_cast<Eigen::Index>(band.node_ids.size());
    std::map<int, Eigen::Index> local;
    for (Eigen::Index j = 0; j < n; ++j) local[band.node_ids[static_cast<std::size_t>(j)]] = j;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(3 * n);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) {
            const auto a = c.find_first_not_of(" \t");
            const auto b = c.find_last_not_of(" \t");
            cells.push_back(a == std::string::npos ? std::string() : c.substr(a, b - a + 1));
        }
        if (!header) {
            if (cells != std::vector<std::string>{"node_id", "p_N", "p_H", "p_V"}) {
                throw ParseError(source, line_no, "expected header node_id,p_N,p_H,p_V");
            }
            header = true;
            continue;
        }
        if (cells.size() != 4) throw ParseError(source, line_no, "expected 4 fields");
        int id = 0;
        {
            const auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), id);
            if (ec != std::errc{} || ptr != cells[0].data() + cells[0].size()) {
                throw ParseError(source, line_no, "invalid node id '" + cells[0] + "'");
            }
        }
        auto it = local.find(id);
        if (it == local.end()) throw ParseError(source, line_no, "node " + cells[0] + " is not in the load band");
        if (seen[static_cast<std::size_t>(it->second)]) throw ParseError(source, line_no, "node " + cells[0] + " listed twice");
        seen[static_cast<std::size_t>(it->second)] = 1;
        for (int c = 0; c < 3; ++c) {
            const std::string& s = cells[static_cast<std::size_t>(c + 1)];
            double v = 0.0;
            const char* first = s.data() + (!s.empty() && s[0] == '+' ? 1 : 0);
            const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
                throw ParseError(source, line_no, "invalid pressure '" + s + "'");
            }
            p[c * n + it->second] = v;
        }
    }
    if (!header) throw ParseError(source, line_no, "empty load file");
    return p;
}

}  // namespace iceload
