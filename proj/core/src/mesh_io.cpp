#include "iceload/mesh_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "iceload/error.hpp"

namespace iceload {

namespace {

void put_double(std::ostream& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, res.ptr - buf);
}

class LineReader {
public:
    LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    // Next non-blank, non-comment line split into whitespace tokens.
    std::vector<std::string> next(const char* expecting) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto first = line.find_first_not_of(" \t");
            if (first == std::string::npos || line[first] == '#') continue;
            std::istringstream ss(line);
            std::vector<std::string> tokens;
            for (std::string t; ss >> t;) tokens.push_back(std::move(t));
            return tokens;
        }
        throw ParseError(source_, line_no_ + 1, std::string("unexpected end of file, expected ") + expecting);
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_no_, what); }

    double to_double(const std::string& s) const {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) fail("invalid number '" + s + "'");
        return v;
    }

    long to_long(const std::string& s) const {
        long v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) fail("invalid integer '" + s + "'");
        return v;
    }

    std::size_t section(const char* name) {
        const auto tok = next(name);
        if (tok.size() != 2 || tok[0] != name) fail(std::string("expected '") + name + " <count>'");
        const long n = to_long(tok[1]);
        if (n < 0) fail("negative count");
        return static_cast<std::size_t>(n);
    }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_no_ = 0;
};

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh) {
    out << "iceload-mesh 1\n";
    out << "nodes " << mesh.nodes.size() << '\n';
    for (const auto& x : mesh.nodes) {
        put_double(out, x.x());
        out << ' ';
        put_double(out, x.y());
        out << ' ';
        put_double(out, -x.z());
        out << '\n';
    }
    out << "tets " << mesh.tets.size() << '\n';
    for (const auto& t : mesh.tets) out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
    out << "surface " << mesh.surface_tris.size() << '\n';
    for (const auto& s : mesh.surface_tris) {
        out << s.nodes[0] << ' ' << s.nodes[1] << ' ' << s.nodes[2] << ' ' << region_name(s.region) << '\n';
    }
    out << "end\n";
}

Mesh read_mesh(std::istream& in, const std::string& source) {
    LineReader r(in, source);
    {
        const auto tok = r.next("header");
        if (tok.size() != 2 || tok[0] != "iceload-mesh") r.fail("missing 'iceload-mesh <version>' header");
        if (tok[1] != "1") r.fail("unsupported mesh format version " + tok[1]);
    }
    Mesh mesh;
    const std::size_t n_nodes = r.section("nodes");
    mesh.nodes.reserve(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const auto tok = r.next("node coordinates");
        if (tok.size() != 3) r.fail("node line needs 3 coordinates");
        mesh.nodes.emplace_back(r.to_double(tok[0]), r.to_double(tok[1]), -r.to_double(tok[2]));
    }
    const std::size_t n_tets = r.section("tets");
    mesh.tets.reserve(n_tets);
    for (std::size_t i = 0; i < n_tets; ++i) {
        const auto tok = r.next("tet connectivity");
        if (tok.size() != 4) r.fail("tet line needs 4 node indices");
        std::array<int, 4> t{};
        for (std::size_t k = 0; k < 4; ++k) {
            const long v = r.to_long(tok[k]);
            if (v < 0 || static_cast<std::size_t>(v) >= n_nodes) r.fail("node index out of range");
            t[k] = static_cast<int>(v);
        }
        mesh.tets.push_back(t);
    }
    const std::size_t n_tris = r.section("surface");
    mesh.surface_tris.reserve(n_tris);
    for (std::size_t i = 0; i < n_tris; ++i) {
        const auto tok = r.next("surface triangle");
        if (tok.size() != 4) r.fail("surface line needs 3 node indices and a region");
        SurfaceTri s{};
        for (std::size_t k = 0; k < 3; ++k) {
            const long v = r.to_long(tok[k]);
            if (v < 0 || static_cast<std::size_t>(v) >= n_nodes) r.fail("node index out of range");
            s.nodes[k] = static_cast<int>(v);
        }
        const auto region = parse_region(tok[3]);
        if (!region) r.fail("unknown surface region '" + tok[3] + "'");
        s.region = *region;
        mesh.surface_tris.push_back(s);
    }
    {
        const auto tok = r.next("end");
        if (tok.size() != 1 || tok[0] != "end") r.fail("expected 'end'");
    }
    if (mesh.nodes.empty() || mesh.tets.empty()) throw InputError(source + ": mesh is empty");
    validate_mesh(mesh);
    return mesh;
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write mesh file " + path.string());
    write_mesh(out, mesh);
    if (!out) throw InputError("failed writing mesh file " + path.string());
}

Mesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open mesh file " + path.string());
    return read_mesh(in, path.string());
}

}  // namespace iceload
