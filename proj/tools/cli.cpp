#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "iceload/config.hpp"
#include "iceload/error.hpp"
#include "iceload/experiments.hpp"
#include "iceload/field_io.hpp"
#include "iceload/inference.hpp"
#include "iceload/mesh_io.hpp"
#include "iceload/pipeline.hpp"
#include "iceload/strain_csv.hpp"
#include "iceload/units.hpp"
#include "iceload/validation.hpp"

namespace fs = std::filesystem;

namespace iceload::cli {

namespace {

struct Common {
    std::string config;
    std::string output_dir;
};

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config.empty() ? default_config() : load_config(c.config);
    if (!c.output_dir.empty()) cfg.paths.output_dir = c.output_dir;
    cfg.validate();
    return cfg;
}

fs::path prepare_output(const RunConfig& cfg) {
    fs::create_directories(cfg.paths.output_dir);
    std::ofstream echo(cfg.paths.output_dir / "resolved_config.toml");
    echo << format_config(cfg);
    if (!echo) throw std::runtime_error("cannot write resolved_config.toml");
    return cfg.paths.output_dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string indexed(const char* stem, std::size_t i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%04zu%s", stem, i, ext);
    return buf;
}

void describe_model(std::ostream& out, const Model& m) {
    out << "mesh: " << m.mesh.nodes.size() << " nodes, " << m.mesh.tets.size() << " tets (" << m.mesh_origin << ")\n"
        << "gauges: " << m.gauges.size() << " total, " << m.gauges.live_count() << " live\n"
        << "load band: " << m.band.size() << " nodes, H " << m.h.rows() << " x " << m.h.cols() << "\n"
        << "model built in " << m.build_seconds << " s\n";
}

void write_metrics(std::ostream& out, const RecoveryMetrics& m) {
    out << "metric,value,angle_deg,depth_m\n";
    auto peak = [&](const char* name, const Peak& p) {
        out << name << ',' << p.value << ',' << units::to_deg(p.angle) << ',' << p.depth << '\n';
    };
    peak("front_peak", m.front);
    peak("back_peak", m.back);
    peak("back_peak_lower", m.back_lower);
    peak("back_peak_upper", m.back_upper);
    out << "max_negative_excursion," << m.max_negative_excursion << ",,\n";
}

void summarize_metrics(std::ostream& out, const RecoveryMetrics& m) {
    auto mpa = [](double v) { return v / 1e6; };
    out << "front peak " << mpa(m.front.value) << " MPa at " << units::to_deg(m.front.angle) << " deg; back peak "
        << mpa(m.back.value) << " MPa at " << units::to_deg(m.back.angle) << " deg; max negative excursion "
        << mpa(m.max_negative_excursion) << " MPa\n";
}

int cmd_mesh(const Common& c, const std::string& out_file, std::ostream& out) {
    const RunConfig cfg = resolve(c);
    std::string origin;
    const Mesh mesh = obtain_mesh(cfg, &origin);
    const fs::path dir = prepare_output(cfg);
    const fs::path path = out_file.empty() ? dir / "mesh.txt" : fs::path(out_file);
    save_mesh(mesh, path);
    const double vol = mesh_volume(mesh);
    const double exact = analytic_volume(effective_spec(cfg));
    std::size_t counts[kSurfaceRegionCount] = {};
    for (const auto& t : mesh.surface_tris) ++counts[static_cast<int>(t.region)];
    out << "wrote " << path.string() << " (" << origin << ")\n"
        << "nodes " << mesh.nodes.size() << ", tets " << mesh.tets.size() << ", surface triangles "
        << mesh.surface_tris.size() << "\n"
        << "volume " << vol << " m^3, analytic " << exact << " m^3, difference " << 100.0 * (vol / exact - 1.0) << " %\n";
    for (int r = 0; r < kSurfaceRegionCount; ++r) {
        out << "  " << region_name(static_cast<SurfaceRegion>(r)) << ": " << counts[r] << " triangles\n";
    }
    return kSuccess;
}

int cmd_synth(const Common& c, int records, long long seed, double noise, std::ostream& out) {
    RunConfig cfg = resolve(c);
    if (!cfg.experiment) throw InputError("synth needs an [experiment] section in the config");
    if (records > 0) cfg.experiment->records = static_cast<std::size_t>(records);
    if (seed >= 0) cfg.experiment->seed = static_cast<std::uint64_t>(seed);
    if (noise >= 0.0) cfg.experiment->noise_std = noise;
    const Model model = build_model(cfg);
    describe_model(out, model);
    const Eigen::VectorXd truth = experiment_truth(cfg, model);
    const double sz = cfg.experiment->noise_std >= 0.0 ? cfg.experiment->noise_std : cfg.noise_std;
    const auto series =
        synthesize_series(truth, model.h.matrix, sz, cfg.experiment->seed, cfg.experiment->records, cfg.experiment->dt);

    const fs::path dir = prepare_output(cfg);
    {
        auto f = open_out(dir / "synthetic_strains.csv");
        write_strain_csv(f, model.gauges, model.h.gauge_index, series);
    }
    {
        auto f = open_out(dir / "truth_load.csv");
        write_load_csv(f, model.band, truth);
    }
    if (cfg.output.fields) {
        const Eigen::VectorXd d = solve_forward(model.system, model.load, truth);
        save_vtk(dir / "truth.vtk", model.mesh,
                 {band_field(model.mesh, model.band, truth, "pressure_NHV"), displacement_field(d)});
    }
    out << "wrote " << series.size() << " record(s) of " << model.h.rows() << " gauges to "
        << (dir / "synthetic_strains.csv").string() << " (noise std " << sz << ")\n";
    return kSuccess;
}

int cmd_infer(const Common& c, const std::string& input, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve(c);
    if (!input.empty()) cfg.paths.input_csv = input;
    if (cfg.paths.input_csv.empty()) throw InputError("infer needs an input CSV (--input or paths.input_csv)");
    if (!fs::exists(cfg.paths.input_csv)) throw InputError("input CSV not found: " + cfg.paths.input_csv.string());
    const Model model = build_model(cfg);
    describe_model(out, model);
    const StrainSeries series = parse_strain_csv(cfg.paths.input_csv, model.gauges);
    const SeriesObservations obs = to_observations(series, model.h.gauge_index, cfg.noise_std);
    for (const auto& w : obs.warnings) err << "warning: " << w << '\n';

    const auto t0 = std::chrono::steady_clock::now();
    TimeseriesOptions opts;
    const auto posts = infer_timeseries(obs.observations, model.h.matrix, model.prior, opts);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::optional<Eigen::VectorXd> truth;
    if (cfg.experiment) truth = experiment_truth(cfg, model);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.prior.size());

    const fs::path dir = prepare_output(cfg);
    auto diag = open_out(dir / "diagnostics.csv");
    diag << "record,t_s,n_obs,prior_residual,posterior_residual,misfit_norm,condition_number\n";
    for (std::size_t k = 0; k < posts.size(); ++k) {
        const Posterior& p = posts[k];
        const std::size_t rec = obs.record_index[k];
        diag << rec << ',' << p.timestamp << ',' << p.rows.size() << ',' << p.diagnostics.prior_residual << ','
             << p.diagnostics.posterior_residual << ',' << p.diagnostics.misfit_norm << ','
             << p.diagnostics.condition_number << '\n';
        for (const auto& w : p.diagnostics.warnings) err << "warning: t=" << p.timestamp << " s: " << w << '\n';
        if (cfg.output.per_record_csv) {
            auto f = open_out(dir / indexed("posterior", rec, ".csv"));
            write_posterior_csv(f, model.mesh, model.band, p);
        }
        const RecoveryMetrics m = recovery_metrics(model.mesh, model.band, truth ? *truth : zero, p, cfg.output.slice_depths);
        {
            auto f = open_out(dir / indexed("slices", rec, ".csv"));
            write_slices_csv(f, m.slices);
        }
        if (cfg.output.fields) {
            const Eigen::VectorXd d = posterior_displacement(p, model.system, model.load);
            save_vtk(dir / indexed("posterior", rec, ".vtk"), model.mesh,
                     {band_field(model.mesh, model.band, p.mean, "mean_NHV"),
                      band_field(model.mesh, model.band, p.stddev(), "std_NHV"), displacement_field(d)});
        }
        if (truth && k == 0) {
            auto f = open_out(dir / "metrics.csv");
            write_metrics(f, m);
            summarize_metrics(out, m);
        }
    }
    double worst = 0.0;
    for (const auto& p : posts) worst = std::max(worst, p.diagnostics.posterior_residual);
    out << "inferred " << posts.size() << " of " << series.records.size() << " record(s) in " << seconds
        << " s; max posterior-predictive residual " << worst << "\n";
    return kSuccess;
}

int cmd_forward(const Common& c, const std::string& load_file, std::ostream& out) {
    RunConfig cfg = resolve(c);
    if (!load_file.empty()) cfg.paths.load_file = load_file;
    const Model model = build_model(cfg);
    describe_model(out, model);
    Eigen::VectorXd p;
    if (!cfg.paths.load_file.empty()) {
        std::ifstream in(cfg.paths.load_file);
        if (!in) throw InputError("cannot open load file " + cfg.paths.load_file.string());
        p = read_load_csv(in, model.band, cfg.paths.load_file.string());
    } else if (cfg.experiment) {
        p = experiment_truth(cfg, model);
    } else {
        throw InputError("forward needs a load file (--load or paths.load_file) or an [experiment] section");
    }
    const Eigen::VectorXd d = solve_forward(model.system, model.load, p);
    ObservationSet strains;
    strains.strains = model.observer.matrix * d;
    const fs::path dir = prepare_output(cfg);
    {
        auto f = open_out(dir / "forward_strains.csv");
        write_strain_csv(f, model.gauges, model.observer.gauge_index, {strains});
    }
    if (cfg.output.fields) {
        save_vtk(dir / "forward.vtk", model.mesh,
                 {band_field(model.mesh, model.band, p, "pressure_NHV"), displacement_field(d)});
    }
    out << "max |displacement| " << d.cwiseAbs().maxCoeff() << " m; strains written to "
        << (dir / "forward_strains.csv").string() << "\n";
    return kSuccess;
}

int cmd_validate(const Common& c, bool no_table, std::ostream& out) {
    const RunConfig cfg = resolve(c);
    const Model model = build_model(cfg);
    describe_model(out, model);
    ValidationOptions opts;
    opts.convergence_table = !no_table;
    const ValidationReport report = run_validation(cfg, model, opts);
    report.print(out);
    return report.passed() ? kSuccess : kRuntimeFailure;
}

// Reads mean_N / std_N from a posterior CSV written by infer.
void read_posterior_normal(const fs::path& path, const SurfacePatch& band, Eigen::VectorXd& mean, Eigen::VectorXd& sd) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open posterior file " + path.string());
    std::map<int, std::size_t> local;
    for (std::size_t j = 0; j < band.node_ids.size(); ++j) local[band.node_ids[j]] = j;
    mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(band.size()));
    sd = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(band.size()));
    std::vector<char> seen(band.size(), 0);
    std::string line;
    std::size_t line_no = 0;
    int col_mean = -1, col_std = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (col_mean < 0) {
            for (std::size_t k = 0; k < cells.size(); ++k) {
                if (cells[k] == "mean_N") col_mean = static_cast<int>(k);
                if (cells[k] == "std_N") col_std = static_cast<int>(k);
            }
            if (cells.empty() || cells[0] != "node_id" || col_mean < 0 || col_std < 0) {
                throw ParseError(path.string(), line_no, "expected a posterior CSV header with node_id, mean_N, std_N");
            }
            continue;
        }
        if (cells.size() <= static_cast<std::size_t>(std::max(col_mean, col_std))) {
            throw ParseError(path.string(), line_no, "row has too few fields");
        }
        try {
            const int id = std::stoi(cells[0]);
            auto it = local.find(id);
            if (it == local.end()) throw ParseError(path.string(), line_no, "node " + cells[0] + " is not in the load band");
            mean[static_cast<Eigen::Index>(it->second)] = std::stod(cells[static_cast<std::size_t>(col_mean)]);
            sd[static_cast<Eigen::Index>(it->second)] = std::stod(cells[static_cast<std::size_t>(col_std)]);
            seen[it->second] = 1;
        } catch (const std::invalid_argument&) {
            throw ParseError(path.string(), line_no, "invalid number");
        } catch (const std::out_of_range&) {
            throw ParseError(path.string(), line_no, "number out of range");
        }
    }
    for (std::size_t j = 0; j < seen.size(); ++j) {
        if (!seen[j]) throw InputError(path.string() + ": band node " + std::to_string(band.node_ids[j]) + " is missing");
    }
}

int cmd_export_slices(const Common& c, const std::string& posterior, const std::vector<double>& depths_cm,
                      const std::string& out_file, std::ostream& out) {
    RunConfig cfg = resolve(c);
    if (!depths_cm.empty()) {
        cfg.output.slice_depths.clear();
        for (double d : depths_cm) cfg.output.slice_depths.push_back(d / 100.0);
        cfg.validate();
    }
    std::string origin;
    const Mesh mesh = obtain_mesh(cfg, &origin);
    LoadBandOptions opts;
    opts.include_flange_underside = cfg.band.include_flange_underside;
    const SurfacePatch band = tag_load_surface(mesh, cfg.band.z_top, cfg.band.z_bottom, opts);
    Eigen::VectorXd mean, sd;
    read_posterior_normal(posterior, band, mean, sd);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(mean.size());
    std::vector<SliceProfile> slices;
    for (double d : cfg.output.slice_depths) slices.push_back(slice_profile(mesh, band, mean, sd, zero, d));
    const fs::path dir = prepare_output(cfg);
    const fs::path path = out_file.empty() ? dir / "slices.csv" : fs::path(out_file);
    auto f = open_out(path);
    write_slices_csv(f, slices);
    out << "wrote " << slices.size() << " slice(s) to " << path.string() << "\n";
    return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pressure inference on an instrumented cylindrical shell", "iceload"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "iceload 0.1.0");

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", common.config, "TOML run config (defaults when omitted)");
        sub->add_option("-o,--output-dir", common.output_dir, "Override paths.output_dir");
    };

    std::string mesh_out;
    auto* mesh = app.add_subcommand("mesh", "Generate the shell mesh and print a summary");
    add_common(mesh);
    mesh->add_option("--mesh-file", mesh_out, "Mesh file to write (default <output>/mesh.txt)");

    int records = 0;
    long long seed = -1;
    double noise = -1.0;
    auto* synth = app.add_subcommand("synth", "Synthesize gauge strains from the configured patch load");
    add_common(synth);
    synth->add_option("--records", records, "Number of records (overrides experiment.records)");
    synth->add_option("--seed", seed, "Noise seed (overrides experiment.seed)");
    synth->add_option("--noise", noise, "Noise std in strain (overrides experiment.noise_std)");

    std::string input;
    auto* infer = app.add_subcommand("infer", "Infer pressures for every record of a strain CSV");
    add_common(infer);
    infer->add_option("-i,--input", input, "Strain CSV (overrides paths.input_csv)");

    std::string load_file;
    auto* forward = app.add_subcommand("forward", "Apply a load file and emit gauge strains");
    add_common(forward);
    forward->add_option("--load", load_file, "Load CSV node_id,p_N,p_H,p_V (overrides paths.load_file)");

    bool no_table = false;
    auto* validate = app.add_subcommand("validate", "Run the invariant and oracle suites");
    add_common(validate);
    validate->add_flag("--no-convergence", no_table, "Skip the coarse-mesh thin-wall table");

    std::string posterior, slices_out;
    std::vector<double> depths_cm;
    auto* slices = app.add_subcommand("export-slices", "Interpolate a posterior CSV at fixed depths");
    add_common(slices);
    slices->add_option("--posterior", posterior, "Posterior CSV written by infer")->required();
    slices->add_option("--depths-cm", depths_cm, "Depths below the top in cm (overrides output.slice_depths)");
    slices->add_option("--out", slices_out, "Output CSV (default <output>/slices.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << "\n";
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        if (mesh->parsed()) return cmd_mesh(common, mesh_out, out);
        if (synth->parsed()) return cmd_synth(common, records, seed, noise, out);
        if (infer->parsed()) return cmd_infer(common, input, out, err);
        if (forward->parsed()) return cmd_forward(common, load_file, out);
        if (validate->parsed()) return cmd_validate(common, no_table, out);
        if (slices->parsed()) return cmd_export_slices(common, posterior, depths_cm, slices_out, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
    return kInputError;
}

}  // namespace iceload::cli
