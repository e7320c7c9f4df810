#include "iceload/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "iceload/error.hpp"
#include "iceload/toml.hpp"
#include "iceload/units.hpp"

namespace iceload {

namespace {

using units::Dimension;

// Wraps a table and remembers which keys were read, so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const toml::Table* table, std::string name, const std::string& source)
        : table_(table), name_(std::move(name)), source_(source) {}

    bool present() const { return table_ != nullptr; }

    const toml::Value* get(const std::string& key) {
        used_.insert(key);
        if (!table_) return nullptr;
        auto it = table_->values.find(key);
        return it == table_->values.end() ? nullptr : &it->second;
    }

    [[noreturn]] void fail(const toml::Value& v, const std::string& key, const std::string& what) const {
        throw ParseError(source_, v.line, name_ + "." + key + ": " + what);
    }

    void quantity(const std::string& key, Dimension dim, double& out) {
        if (const auto* v = get(key)) out = to_quantity(*v, key, dim);
    }

    double to_quantity(const toml::Value& v, const std::string& key, Dimension dim) const {
        try {
            if (v.is_number()) return std::get<double>(v.data);
            if (v.is_string()) return units::parse_quantity(std::get<std::string>(v.data), dim);
        } catch (const InputError& e) {
            fail(v, key, e.what());
        }
        fail(v, key, "expected a number or a quantity string");
    }

    void integer(const std::string& key, int& out) {
        if (const auto* v = get(key)) {
            if (!v->is_number() || !v->integer) fail(*v, key, "expected an integer");
            out = static_cast<int>(std::get<double>(v->data));
        }
    }

    void count(const std::string& key, std::size_t& out) {
        int tmp = static_cast<int>(out);
        integer(key, tmp);
        if (tmp < 0) fail(*get(key), key, "must be non-negative");
        out = static_cast<std::size_t>(tmp);
    }

    void seed(const std::string& key, std::uint64_t& out) {
        if (const auto* v = get(key)) {
            if (!v->is_number() || !v->integer || std::get<double>(v->data) < 0) fail(*v, key, "expected a non-negative integer");
            out = static_cast<std::uint64_t>(std::get<double>(v->data));
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const auto* v = get(key)) {
            if (!v->is_bool()) fail(*v, key, "expected true or false");
            out = std::get<bool>(v->data);
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const auto* v = get(key)) {
            if (!v->is_string()) fail(*v, key, "expected a string");
            out = std::get<std::string>(v->data);
        }
    }

    void path(const std::string& key, std::filesystem::path& out, const std::filesystem::path& base) {
        std::string s;
        if (get(key)) {
            string(key, s);
            std::filesystem::path p(s);
            out = p.is_relative() && !base.empty() ? base / p : p;
        }
    }

    void strings(const std::string& key, std::vector<std::string>& out) {
        if (const auto* v = get(key)) {
            if (!v->is_array()) fail(*v, key, "expected an array of strings");
            out.clear();
            for (const auto& item : std::get<toml::Array>(v->data)) {
                if (!item.is_string()) fail(item, key, "expected an array of strings");
                out.push_back(std::get<std::string>(item.data));
            }
        }
    }

    void quantities(const std::string& key, Dimension dim, std::vector<double>& out) {
        if (const auto* v = get(key)) {
            if (!v->is_array()) fail(*v, key, "expected an array");
            out.clear();
            for (const auto& item : std::get<toml::Array>(v->data)) out.push_back(to_quantity(item, key, dim));
        }
    }

    // Throws on any key or sub-table that was never asked for.
    void finish(const std::set<std::string>& subtables = {}) const {
        if (!table_) return;
        for (const auto& [key, v] : table_->values) {
            if (!used_.count(key)) throw ParseError(source_, v.line, "unknown key '" + key + "' in [" + name_ + "]");
        }
        for (const auto& [key, t] : table_->tables) {
            if (!subtables.count(key)) {
                throw ParseError(source_, t->line, "unknown section [" + name_ + "." + key + "]");
            }
        }
        for (const auto& [key, list] : table_->arrays) {
            if (!subtables.count(key)) {
                throw ParseError(source_, list.front()->line, "unknown section [[" + name_ + "." + key + "]]");
            }
        }
    }

private:
    const toml::Table* table_;
    std::string name_;
    const std::string& source_;
    std::set<std::string> used_;
};

const toml::Table* child(const toml::Table* t, const std::string& key) {
    if (!t) return nullptr;
    auto it = t->tables.find(key);
    return it == t->tables.end() ? nullptr : it->second.get();
}

void put(std::ostream& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    out << s;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out + "\"";
}

const char* kKernelNames[3] = {"normal", "horizontal", "vertical"};

}  // namespace

void RunConfig::validate() const {
    geometry.validate();
    if (!(band.z_bottom > band.z_top)) throw InputError("load_band: z_bottom must exceed z_top");
    if (band.z_top < 0.0 || band.z_bottom > geometry.height) throw InputError("load_band lies outside the shell height");
    (void)material.lame();
    for (const auto& k : prior.kernels) k.validate();
    if (!(prior.jitter >= 0.0)) throw InputError("prior.jitter must be non-negative");
    if (!(noise_std > 0.0)) throw InputError("noise.sigma_z must be positive");
    (void)gauge_locations(gauges);
    for (double d : output.slice_depths) {
        if (d < band.z_top || d > band.z_bottom) throw InputError("output.slice_depths must lie inside the load band");
    }
    if (experiment) {
        if (experiment->records == 0) throw InputError("experiment.records must be at least 1");
        if (!(experiment->dt > 0.0)) throw InputError("experiment.dt must be positive");
        if (!experiment->use_layout && experiment->patches.empty()) throw InputError("experiment has no patches");
    }
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.gauges = default_gauge_layout(cfg.geometry);
    cfg.experiment = ExperimentConfig{};
    return cfg;
}

RunConfig parse_config(const std::string& text, const std::string& source, const std::filesystem::path& base_dir) {
    const toml::Table root = toml::parse(text, source);
    RunConfig cfg;

    {
        for (const auto& [key, v] : root.values) throw ParseError(source, v.line, "key '" + key + "' outside any section");
        for (const auto& [key, list] : root.arrays) {
            throw ParseError(source, list.front()->line, "unknown section [[" + key + "]]");
        }
        static const std::set<std::string> known = {"geometry", "gauges", "load_band", "material", "prior",
                                                    "noise",    "experiment", "paths", "output", "debug"};
        for (const auto& [key, t] : root.tables) {
            if (!known.count(key)) throw ParseError(source, t->line, "unknown section [" + key + "]");
        }
    }

    Section g(child(&root, "geometry"), "geometry", source);
    auto& s = cfg.geometry;
    g.quantity("outer_radius", Dimension::Length, s.outer_radius);
    g.quantity("wall_thickness", Dimension::Length, s.wall_thickness);
    g.quantity("height", Dimension::Length, s.height);
    g.quantity("flange_offset_from_top", Dimension::Length, s.flange_offset_from_top);
    g.integer("angular_resolution", s.angular_resolution);
    g.integer("vertical_resolution", s.vertical_resolution);
    g.integer("through_thickness_layers", s.through_thickness_layers);
    g.quantity("cap_thickness", Dimension::Length, s.cap_thickness);
    g.integer("cap_radial_divisions", s.cap_radial_divisions);
    g.quantity("flange_width", Dimension::Length, s.flange_width);
    g.quantity("flange_thickness", Dimension::Length, s.flange_thickness);
    g.finish();

    cfg.gauges = default_gauge_layout(s);
    Section ga(child(&root, "gauges"), "gauges", source);
    {
        std::vector<std::string> names;
        std::vector<double> depths;
        for (const auto& r : cfg.gauges.rings) {
            names.push_back(r.name);
            depths.push_back(r.depth);
        }
        ga.strings("ring_names", names);
        ga.quantities("ring_depths", Dimension::Length, depths);
        if (names.size() != depths.size()) {
            throw ParseError(source, ga.get("ring_names") ? ga.get("ring_names")->line : 0,
                             "gauges: ring_names and ring_depths differ in length");
        }
        cfg.gauges.rings.clear();
        for (std::size_t i = 0; i < names.size(); ++i) cfg.gauges.rings.push_back({names[i], depths[i]});
    }
    ga.quantity("angle_start", Dimension::Angle, cfg.gauges.angle_start);
    ga.quantity("angle_interval", Dimension::Angle, cfg.gauges.angle_interval);
    ga.strings("dead", cfg.gauges.dead);
    ga.quantity("radial_inset", Dimension::Length, cfg.gauges.radial_inset);
    ga.finish();

    Section b(child(&root, "load_band"), "load_band", source);
    b.quantity("z_top", Dimension::Length, cfg.band.z_top);
    b.quantity("z_bottom", Dimension::Length, cfg.band.z_bottom);
    b.boolean("include_flange_underside", cfg.band.include_flange_underside);
    b.finish();

    Section m(child(&root, "material"), "material", source);
    m.quantity("youngs_modulus", Dimension::Pressure, cfg.material.youngs_modulus);
    m.quantity("poisson_ratio", Dimension::Dimensionless, cfg.material.poisson_ratio);
    {
        std::string rb = cfg.rigid_body == RigidBodyTreatment::Pin ? "pin" : "deflate";
        m.string("rigid_body", rb);
        if (rb == "deflate") {
            cfg.rigid_body = RigidBodyTreatment::Deflate;
        } else if (rb == "pin") {
            cfg.rigid_body = RigidBodyTreatment::Pin;
        } else {
            m.fail(*m.get("rigid_body"), "rigid_body", "expected \"deflate\" or \"pin\"");
        }
    }
    m.finish();

    const toml::Table* prior_table = child(&root, "prior");
    Section p(prior_table, "prior", source);
    p.quantity("jitter", Dimension::Dimensionless, cfg.prior.jitter);
    for (std::size_t c = 0; c < 3; ++c) {
        Section k(child(prior_table, kKernelNames[c]), std::string("prior.") + kKernelNames[c], source);
        k.quantity("sigma", Dimension::Pressure, cfg.prior.kernels[c].sigma);
        k.quantity("meridional_lengthscale", Dimension::Angle, cfg.prior.kernels[c].meridional_lengthscale);
        k.quantity("vertical_lengthscale", Dimension::Length, cfg.prior.kernels[c].vertical_lengthscale);
        k.quantity("mean", Dimension::Pressure, cfg.prior.means[c]);
        k.finish();
    }
    p.finish({"normal", "horizontal", "vertical"});

    Section n(child(&root, "noise"), "noise", source);
    n.quantity("sigma_z", Dimension::Dimensionless, cfg.noise_std);
    n.finish();

    const toml::Table* exp_table = child(&root, "experiment");
    if (exp_table) {
        ExperimentConfig e;
        Section x(exp_table, "experiment", source);
        x.seed("seed", e.seed);
        x.count("records", e.records);
        x.quantity("dt", Dimension::Dimensionless, e.dt);
        x.quantity("noise_std", Dimension::Dimensionless, e.noise_std);
        auto& l = e.layout;
        x.quantity("front_magnitude", Dimension::Pressure, l.front_magnitude);
        x.quantity("back_magnitude", Dimension::Pressure, l.back_magnitude);
        x.quantity("front_width", Dimension::Length, l.front_width);
        x.quantity("back_width", Dimension::Length, l.back_width);
        x.quantity("height", Dimension::Length, l.height);
        x.quantity("z_center", Dimension::Length, l.z_center);
        x.quantity("back_gap", Dimension::Length, l.back_gap);
        l.outer_radius = s.outer_radius;
        if (auto it = exp_table->arrays.find("patch"); it != exp_table->arrays.end()) {
            e.use_layout = false;
            for (const auto& pt : it->second) {
                Section ps(pt.get(), "experiment.patch", source);
                PatchSpec spec;
                ps.quantity("center_angle", Dimension::Angle, spec.center_angle);
                ps.quantity("width", Dimension::Length, spec.angular_width);
                ps.quantity("z_center", Dimension::Length, spec.z_center);
                ps.quantity("height", Dimension::Length, spec.z_height);
                ps.quantity("magnitude", Dimension::Pressure, spec.magnitude);
                std::string comp = "N";
                ps.string("component", comp);
                const auto parsed = parse_component(comp);
                if (!parsed) ps.fail(*ps.get("component"), "component", "expected N, H or V");
                spec.component = *parsed;
                for (const char* required : {"width", "z_center", "height", "magnitude"}) {
                    if (!pt->values.count(required)) {
                        throw ParseError(source, pt->line, std::string("experiment.patch: missing '") + required + "'");
                    }
                }
                ps.finish();
                e.patches.push_back(spec);
            }
        }
        x.finish({"patch"});
        cfg.experiment = e;
    }

    Section pa(child(&root, "paths"), "paths", source);
    pa.path("mesh", cfg.paths.mesh, base_dir);
    pa.path("mesh_cache", cfg.paths.mesh_cache, base_dir);
    pa.path("input_csv", cfg.paths.input_csv, base_dir);
    pa.path("load_file", cfg.paths.load_file, base_dir);
    if (!base_dir.empty()) cfg.paths.output_dir = base_dir / cfg.paths.output_dir;
    pa.path("output_dir", cfg.paths.output_dir, base_dir);
    pa.finish();

    Section o(child(&root, "output"), "output", source);
    o.quantities("slice_depths", Dimension::Length, cfg.output.slice_depths);
    o.boolean("fields", cfg.output.fields);
    o.boolean("per_record_csv", cfg.output.per_record_csv);
    o.finish();

    Section d(child(&root, "debug"), "debug", source);
    d.boolean("flip_normal_sign", cfg.flip_normal_sign);
    d.finish();

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string(), path.parent_path());
}

std::string format_config(const RunConfig& cfg) {
    std::ostringstream out;
    auto kv = [&](const char* key, double v) {
        out << key << " = ";
        put(out, v);
        out << "\n";
    };
    auto ki = [&](const char* key, long long v) { out << key << " = " << v << "\n"; };
    auto kb = [&](const char* key, bool v) { out << key << " = " << (v ? "true" : "false") << "\n"; };
    auto ks = [&](const char* key, const std::string& v) { out << key << " = " << quote(v) << "\n"; };
    auto kd = [&](const char* key, const std::vector<double>& v) {
        out << key << " = [";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out << ", ";
            put(out, v[i]);
        }
        out << "]\n";
    };

    out << "# Resolved configuration (SI units: m, Pa, rad).\n\n[geometry]\n";
    const auto& s = cfg.geometry;
    kv("outer_radius", s.outer_radius);
    kv("wall_thickness", s.wall_thickness);
    kv("height", s.height);
    kv("flange_offset_from_top", s.flange_offset_from_top);
    ki("angular_resolution", s.angular_resolution);
    ki("vertical_resolution", s.vertical_resolution);
    ki("through_thickness_layers", s.through_thickness_layers);
    kv("cap_thickness", s.cap_thickness);
    ki("cap_radial_divisions", s.cap_radial_divisions);
    kv("flange_width", s.flange_width);
    kv("flange_thickness", s.flange_thickness);

    out << "\n[gauges]\nring_names = [";
    for (std::size_t i = 0; i < cfg.gauges.rings.size(); ++i) out << (i ? ", " : "") << quote(cfg.gauges.rings[i].name);
    out << "]\n";
    std::vector<double> depths;
    for (const auto& r : cfg.gauges.rings) depths.push_back(r.depth);
    kd("ring_depths", depths);
    kv("angle_start", cfg.gauges.angle_start);
    kv("angle_interval", cfg.gauges.angle_interval);
    out << "dead = [";
    for (std::size_t i = 0; i < cfg.gauges.dead.size(); ++i) out << (i ? ", " : "") << quote(cfg.gauges.dead[i]);
    out << "]\n";
    kv("radial_inset", cfg.gauges.radial_inset);

    out << "\n[load_band]\n";
    kv("z_top", cfg.band.z_top);
    kv("z_bottom", cfg.band.z_bottom);
    kb("include_flange_underside", cfg.band.include_flange_underside);

    out << "\n[material]\n";
    kv("youngs_modulus", cfg.material.youngs_modulus);
    kv("poisson_ratio", cfg.material.poisson_ratio);
    ks("rigid_body", cfg.rigid_body == RigidBodyTreatment::Pin ? "pin" : "deflate");

    out << "\n[prior]\n";
    kv("jitter", cfg.prior.jitter);
    for (std::size_t c = 0; c < 3; ++c) {
        out << "\n[prior." << kKernelNames[c] << "]\n";
        kv("sigma", cfg.prior.kernels[c].sigma);
        kv("meridional_lengthscale", cfg.prior.kernels[c].meridional_lengthscale);
        kv("vertical_lengthscale", cfg.prior.kernels[c].vertical_lengthscale);
        kv("mean", cfg.prior.means[c]);
    }

    out << "\n[noise]\n";
    kv("sigma_z", cfg.noise_std);

    if (cfg.experiment) {
        const auto& e = *cfg.experiment;
        out << "\n[experiment]\n";
        ki("seed", static_cast<long long>(e.seed));
        ki("records", static_cast<long long>(e.records));
        kv("dt", e.dt);
        kv("noise_std", e.noise_std);
        const auto& l = e.layout;
        kv("front_magnitude", l.front_magnitude);
        kv("back_magnitude", l.back_magnitude);
        kv("front_width", l.front_width);
        kv("back_width", l.back_width);
        kv("height", l.height);
        kv("z_center", l.z_center);
        kv("back_gap", l.back_gap);
        if (!e.use_layout) {
            for (const auto& p : e.patches) {
                out << "\n[[experiment.patch]]\n";
                kv("center_angle", p.center_angle);
                kv("width", p.angular_width);
                kv("z_center", p.z_center);
                kv("height", p.z_height);
                kv("magnitude", p.magnitude);
                ks("component", std::string(component_name(p.component)));
            }
        }
    }

    out << "\n[paths]\n";
    if (!cfg.paths.mesh.empty()) ks("mesh", cfg.paths.mesh.string());
    if (!cfg.paths.mesh_cache.empty()) ks("mesh_cache", cfg.paths.mesh_cache.string());
    if (!cfg.paths.input_csv.empty()) ks("input_csv", cfg.paths.input_csv.string());
    if (!cfg.paths.load_file.empty()) ks("load_file", cfg.paths.load_file.string());
    ks("output_dir", cfg.paths.output_dir.string());

    out << "\n[output]\n";
    kd("slice_depths", cfg.output.slice_depths);
    kb("fields", cfg.output.fields);
    kb("per_record_csv", cfg.output.per_record_csv);

    out << "\n[debug]\n";
    kb("flip_normal_sign", cfg.flip_normal_sign);
    return out.str();
}

}  // namespace iceload
