#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "iceload/config.hpp"
#include "iceload/elasticity.hpp"
#include "iceload/experiments.hpp"
#include "iceload/geometry.hpp"
#include "iceload/inference.hpp"
#include "iceload/pipeline.hpp"
#include "iceload/prior.hpp"
#include "iceload/units.hpp"
#include "iceload/validation.hpp"
#include "oracles.hpp"

using namespace iceload;
using iceload::testing::Gen;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool passed = false;
    std::string detail;
};

void check(bool cond, const std::string& what, Outcome& o, std::ostringstream& log) {
    log << (log.tellp() > 0 ? "; " : "") << what << (cond ? "" : " [violated]");
    if (!cond) o.passed = false;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

const Model& default_model() {
    static const RunConfig cfg = default_config();
    static const Model model = build_model(cfg);
    return model;
}

Outcome thin_wall() {
    Outcome o{true, {}};
    std::ostringstream log;
    const auto t0 = Clock::now();
    const RunConfig cfg = default_config();
    CylinderSpec half = cfg.geometry, twice = cfg.geometry;
    half.angular_resolution /= 2;
    half.vertical_resolution /= 2;
    twice.angular_resolution *= 2;
    twice.vertical_resolution *= 2;
    const ThinWallResult r = thin_wall_check(cfg.geometry, cfg.material);
    const ThinWallResult rh = thin_wall_check(half, cfg.material);
    const ThinWallResult rt = thin_wall_check(twice, cfg.material);
    const double t = seconds_since(t0);
    check(r.relative_error <= 0.05, "default error " + fmt("%.3f%%", 100 * r.relative_error) + " <= 5%", o, log);
    check(rh.discretization_error > r.discretization_error && r.discretization_error > rt.discretization_error,
          "error vs exact elastic solution 1/2x " + fmt("%.3f%%", 100 * rh.discretization_error) + " > 1x " +
              fmt("%.3f%%", 100 * r.discretization_error) + " > 2x " + fmt("%.3f%%", 100 * rt.discretization_error),
          o, log);
    log << "; thin-shell error 1/2x " << fmt("%.3f%%", 100 * rh.relative_error) << " 2x "
        << fmt("%.3f%%", 100 * rt.relative_error) << " (model floor "
        << fmt("%.3f%%", 100 * std::abs(r.exact_strain / r.analytic_strain - 1.0)) << ")";
    check(t < 60.0, fmt("%.1f s < 60 s", t), o, log);
    o.detail = log.str();
    return o;
}

Outcome observation_operator() {
    Outcome o{true, {}};
    std::ostringstream log;
    const auto t0 = Clock::now();
    RunConfig cfg = default_config();
    cfg.geometry = iceload::testing::small_spec();
    cfg.geometry.angular_resolution = 12;
    cfg.geometry.vertical_resolution = 8;
    cfg.gauges = default_gauge_layout(cfg.geometry);
    const Model m = build_model(cfg);
    Eigen::MatrixXd brute(m.h.matrix.rows(), m.h.matrix.cols());
    for (Eigen::Index j = 0; j < brute.cols(); ++j) {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(brute.cols());
        p[j] = 1.0;
        brute.col(j) = m.observer.matrix * solve_forward(m.system, m.load, p);
    }
    const double err = iceload::testing::rel_max(m.h.matrix, brute);
    const double t = seconds_since(t0);
    check(m.mesh.dof_count() <= 2000, std::to_string(m.mesh.dof_count()) + " dofs <= 2000", o, log);
    check(err <= 1e-10, "max |H_adj - H_fwd| / max |H_fwd| = " + fmt("%.2e", err) + " <= 1e-10", o, log);
    check(t < 30.0, fmt("%.2f s < 30 s", t), o, log);
    o.detail = log.str();
    return o;
}

Outcome posterior_oracle() {
    Outcome o{true, {}};
    std::ostringstream log;
    const auto t0 = Clock::now();
    // Instances cut from the small physical model: a random band subset for
    // the prior and the matching columns of a random set of gauge rows.
    RunConfig cfg = default_config();
    cfg.geometry = iceload::testing::small_spec();
    cfg.gauges = default_gauge_layout(cfg.geometry);
    const Model m = build_model(cfg);
    Gen g(2024);
    double worst_mean = 0.0, worst_cov = 0.0;
    int max_dofs = 0;
    const Eigen::Index nb = static_cast<Eigen::Index>(m.band.size());
    for (int trial = 0; trial < 100; ++trial) {
        const int nodes = g.integer(4, 20);
        const int gauges = g.integer(6, 12);
        auto node_perm = g.permutation(m.band.size());
        node_perm.resize(static_cast<std::size_t>(nodes));
        std::sort(node_perm.begin(), node_perm.end());
        auto row_perm = g.permutation(static_cast<std::size_t>(m.h.matrix.rows()));
        row_perm.resize(static_cast<std::size_t>(gauges));
        SurfacePatch sub = m.band;
        sub.node_ids.clear();
        for (std::size_t k : node_perm) sub.node_ids.push_back(m.band.node_ids[k]);
        PriorConfig pc = cfg.prior;
        pc.means = {g.uniform(-1e6, 1e6), g.uniform(-1e5, 1e5), g.uniform(-1e5, 1e5)};
        const BlockGaussian prior = assemble_prior(m.mesh, sub, pc);
        Eigen::MatrixXd h(gauges, 3 * nodes);
        for (int i = 0; i < gauges; ++i) {
            for (int c = 0; c < 3; ++c) {
                for (int j = 0; j < nodes; ++j) {
                    h(i, c * nodes + j) = m.h.matrix(static_cast<Eigen::Index>(row_perm[static_cast<std::size_t>(i)]),
                                                     c * nb + static_cast<Eigen::Index>(node_perm[static_cast<std::size_t>(j)]));
                }
            }
        }
        const double noise = std::pow(10.0, g.uniform(-7.0, -5.0));
        const Eigen::VectorXd p = sample_prior(prior, static_cast<std::uint64_t>(trial), 1).col(0);
        const Eigen::VectorXd y = h * p + noise * g.gaussian(gauges);
        const Posterior post = condition(prior, h, {y, {}, noise, 0.0});
        const auto oracle = iceload::testing::information_posterior(prior.covariance(), prior.mean, h, y, noise);
        worst_mean = std::max(worst_mean, (post.mean - oracle.mean).norm() / oracle.mean.norm());
        worst_cov = std::max(worst_cov, (*post.covariance - oracle.covariance).norm() / oracle.covariance.norm());
        max_dofs = std::max(max_dofs, 3 * nodes);
    }
    const double t = seconds_since(t0);
    check(max_dofs <= 60, "up to " + std::to_string(max_dofs) + " pressure dofs", o, log);
    check(worst_mean <= 1e-8, "mean rel err " + fmt("%.2e", worst_mean) + " <= 1e-8", o, log);
    check(worst_cov <= 1e-8, "cov rel err " + fmt("%.2e", worst_cov) + " <= 1e-8", o, log);
    check(t < 60.0, "100 instances in " + fmt("%.2f s < 60 s", t), o, log);
    o.detail = log.str();
    return o;
}

Outcome predictive_residual() {
    Outcome o{true, {}};
    std::ostringstream log;
    const RunConfig cfg = default_config();
    const Model& m = default_model();
    const Eigen::VectorXd truth = experiment_truth(cfg, m);
    const ObservationSet obs = synthesize_observations(truth, m.h.matrix, 0.0, 0);
    const Posterior post = condition(m.prior, m.h.matrix, {obs.strains, {}, 1e-9, 0.0}, {false, false});
    const double r = posterior_predictive_strain(post, m.h.matrix).residual;
    check(r <= 1e-8, "sigma_z 1e-9, max |eps - H mu_post| = " + fmt("%.3e", r) + " <= 1e-8", o, log);
    log << "; cond(Sigma_eps) " << fmt("%.2e", post.diagnostics.condition_number);
    o.detail = log.str();
    return o;
}

Outcome patch_recovery() {
    Outcome o{true, {}};
    std::ostringstream log;
    const auto t0 = Clock::now();
    const RunConfig cfg = default_config();
    const Model m = build_model(cfg);
    const Eigen::VectorXd truth = experiment_truth(cfg, m);
    const ObservationSet obs = synthesize_observations(truth, m.h.matrix, cfg.noise_std, cfg.experiment->seed);
    const Posterior post = condition(m.prior, m.h.matrix, obs, {false, false});
    const RecoveryMetrics r = recovery_metrics(m.mesh, m.band, truth, post, cfg.output.slice_depths);
    const double t = seconds_since(t0);
    const auto [lo, hi] = cfg.experiment->layout.back_centers();
    auto deg_off = [](double a, double b) { return std::abs(units::to_deg(units::wrap_signed(a - b))); };
    const double front_off = deg_off(r.front.angle, 0.0);
    check(front_off <= 15.0, "front peak at " + fmt("%.1f deg", units::to_deg(r.front.angle)) + " within 15 deg of 0", o, log);
    check(deg_off(r.back_lower.angle, lo) <= 20.0 && deg_off(r.back_upper.angle, hi) <= 20.0,
          "back peaks at " + fmt("%.1f", units::to_deg(r.back_lower.angle)) + "/" + fmt("%.1f deg", units::to_deg(r.back_upper.angle)) +
              " within 20 deg of " + fmt("%.1f", units::to_deg(lo)) + "/" + fmt("%.1f", units::to_deg(hi)),
          o, log);
    const double frac = r.front.value / cfg.experiment->layout.front_magnitude;
    check(frac >= 0.5 && frac <= 1.1, "front peak " + fmt("%.2f MPa", r.front.value / 1e6) + " = " + fmt("%.0f%%", 100 * frac) + " of truth in [50%, 110%]", o, log);
    check(r.front.value > r.back.value, "front > back " + fmt("%.2f MPa", r.back.value / 1e6), o, log);
    check(r.max_negative_excursion < 1.5e6, "max negative excursion " + fmt("%.2f MPa", r.max_negative_excursion / 1e6) + " < 1.5 MPa", o, log);
    check(t < 300.0, fmt("%.1f s < 300 s", t), o, log);
    o.detail = log.str();
    return o;
}

Outcome variance_structure() {
    Outcome o{true, {}};
    std::ostringstream log;
    const RunConfig cfg = default_config();
    const Model& m = default_model();
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(m.h.matrix.rows());
    const Posterior post = condition(m.prior, m.h.matrix, {y, {}, cfg.noise_std, 0.0}, {false, false});
    const double sigma = cfg.prior.kernels[0].sigma;
    const double lt = cfg.prior.kernels[0].meridional_lengthscale, lz = cfg.prior.kernels[0].vertical_lengthscale;
    const Eigen::Index n = static_cast<Eigen::Index>(m.band.size());
    std::vector<double> theta(static_cast<std::size_t>(n)), depth(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vec3& x = m.mesh.nodes[static_cast<std::size_t>(m.band.node_ids[static_cast<std::size_t>(j)])];
        theta[static_cast<std::size_t>(j)] = std::atan2(x.y(), x.x());
        depth[static_cast<std::size_t>(j)] = -x.z();
    }
    std::set<std::pair<double, double>> sites;
    for (std::size_t gi : m.h.gauge_index) {
        const Gauge& gauge = m.gauges.gauges[gi];
        sites.insert({units::wrap_signed(gauge.theta), -gauge.position.z()});
    }
    auto dist = [&](std::size_t j, const std::pair<double, double>& s) {
        const double dt = units::wrap_signed(theta[j] - s.first) / lt, dz = (depth[j] - s.second) / lz;
        return std::sqrt(dt * dt + dz * dz);
    };
    double near_worst = 0.0, far_worst = std::numeric_limits<double>::infinity();
    std::size_t far_count = 0;
    for (const auto& s : sites) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < theta.size(); ++j) {
            if (dist(j, s) < dist(best, s)) best = j;
        }
        near_worst = std::max(near_worst, std::sqrt(post.variance[static_cast<Eigen::Index>(best)]) / sigma);
    }
    for (std::size_t j = 0; j < theta.size(); ++j) {
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& s : sites) dmin = std::min(dmin, dist(j, s));
        if (dmin > 3.0) {
            ++far_count;
            far_worst = std::min(far_worst, std::sqrt(post.variance[static_cast<Eigen::Index>(j)]) / sigma);
        }
    }
    check(near_worst < 0.5, "gauge-adjacent std <= " + fmt("%.1f%%", 100 * near_worst) + " of prior (< 50%) over " + std::to_string(sites.size()) + " sites", o, log);
    check(far_count > 0 && far_worst > 0.95, "far-field std >= " + fmt("%.2f%%", 100 * far_worst) + " of prior (> 95%) over " + std::to_string(far_count) + " nodes", o, log);
    o.detail = log.str();
    return o;
}

Outcome property_suites() {
    Outcome o{true, {}};
    std::ostringstream log;
    const RunConfig cfg = default_config();
    ValidationOptions opts;
    opts.convergence_table = false;
    const ValidationReport rep = run_validation(cfg, default_model(), opts);
    int failed = 0;
    for (const auto& c : rep.checks) {
        if (!c.informational && !c.passed) {
            ++failed;
            log << (log.tellp() > 0 ? "; " : "") << c.name << " " << fmt("%.3e", c.measured) << " [violated]";
        }
    }
    if (failed == 0) log << rep.checks.size() << " checks passed";
    o.passed = rep.passed();
    o.detail = log.str();
    return o;
}

Outcome throughput() {
    Outcome o{true, {}};
    std::ostringstream log;
    const RunConfig cfg = default_config();
    const Model& m = default_model();
    const Eigen::VectorXd truth = experiment_truth(cfg, m);
    auto records = synthesize_series(truth, m.h.matrix, cfg.noise_std, 5, 600, 0.5);
    // Every seventh record loses a gauge so several gauge masks are in play.
    for (std::size_t k = 0; k < records.size(); k += 7) {
        const Eigen::Index drop = static_cast<Eigen::Index>(k / 7) % m.h.matrix.rows();
        ObservationSet& r = records[k];
        Eigen::VectorXd kept(r.strains.size() - 1);
        for (Eigen::Index i = 0, j = 0; i < r.strains.size(); ++i) {
            if (i == drop) continue;
            r.rows.push_back(i);
            kept[j++] = r.strains[i];
        }
        r.strains = kept;
    }
    const auto t0 = Clock::now();
    const auto posts = infer_timeseries(records, m.h.matrix, m.prior);
    const double t = seconds_since(t0);
    Gen g(77);
    const auto perm = g.permutation(records.size());
    std::vector<ObservationSet> shuffled;
    for (std::size_t k : perm) shuffled.push_back(records[k]);
    const auto again = infer_timeseries(shuffled, m.h.matrix, m.prior);
    bool identical = again.size() == posts.size();
    for (std::size_t k = 0; identical && k < perm.size(); ++k) {
        identical = again[k].mean == posts[perm[k]].mean && again[k].variance == posts[perm[k]].variance &&
                    again[k].timestamp == posts[perm[k]].timestamp;
    }
    double solo_err = 0.0;
    for (std::size_t k : {std::size_t{0}, std::size_t{1}, std::size_t{299}, std::size_t{599}}) {
        const Posterior solo = condition(m.prior, m.h.matrix, records[k], {false, false});
        solo_err = std::max(solo_err, (solo.mean - posts[k].mean).norm() / solo.mean.norm());
    }
    check(posts.size() == 600 && t < 600.0, "600 records in " + fmt("%.1f s < 600 s", t), o, log);
    check(identical, "shuffled run reproduces every record bit-for-bit", o, log);
    check(solo_err < 1e-12, "single-record conditioning agrees to " + fmt("%.1e", solo_err), o, log);
    o.detail = log.str();
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"thin-wall hoop strain", thin_wall},
        {"adjoint H vs forward columns", observation_operator},
        {"Kalman vs information form", posterior_oracle},
        {"posterior-predictive residual", predictive_residual},
        {"synthetic patch recovery", patch_recovery},
        {"posterior variance structure", variance_structure},
        {"property suites", property_suites},
        {"600-record throughput", throughput},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::cerr << "usage: " << argv[0] << " [criterion 1-" << criteria.size() << "]...\n";
            return 2;
        }
        selected.push_back(k);
    }
    if (selected.empty()) {
        for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);
    }
    int failures = 0;
    for (int k : selected) {
        const auto& [name, fn] = criteria[static_cast<std::size_t>(k - 1)];
        Outcome out;
        const auto t0 = Clock::now();
        try {
            out = fn();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double t = seconds_since(t0);
        std::cout << (out.passed ? "PASS" : "FAIL") << "  criterion " << k << "  " << name << ": " << out.detail << "  ("
                  << fmt("%.1f s", t) << ")" << std::endl;
        if (!out.passed) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
