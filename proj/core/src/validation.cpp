#include "iceload/validation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "iceload/error.hpp"
#include "iceload/inference.hpp"
#include "iceload/units.hpp"

namespace iceload {

namespace {

double point_strain(const Mesh& mesh, const Eigen::VectorXd& d, const Vec3& x, const Vec3& dir) {
    const auto hits = locate_point(mesh, x);
    if (hits.empty()) throw NumericalError("strain probe lies outside the mesh");
    double e = 0.0;
    for (std::size_t t : hits) {
        const auto g = shape_gradients(mesh, t);
        for (std::size_t a = 0; a < 4; ++a) {
            const Vec3 u = d.segment<3>(3 * static_cast<Eigen::Index>(mesh.tets[t][a]));
            e += dir.dot(u) * dir.dot(g[a]);
        }
    }
    return e / static_cast<double>(hits.size());
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

CheckResult at_most(std::string name, double measured, double tolerance, std::string detail = {}) {
    return {std::move(name), measured <= tolerance, measured, tolerance, std::move(detail), false};
}

CheckResult at_least(std::string name, double measured, double tolerance, std::string detail = {}) {
    return {std::move(name), measured >= tolerance, measured, tolerance, std::move(detail), false};
}

}  // namespace

bool ValidationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed || c.informational; });
}

void ValidationReport::print(std::ostream& out) const {
    for (const auto& c : checks) {
        out << (c.informational ? "[info] " : c.passed ? "[pass] " : "[FAIL] ") << std::left << std::setw(30) << c.name
            << " measured " << std::setw(12) << std::setprecision(4) << std::scientific << c.measured;
        if (!c.informational) out << "  limit " << c.tolerance;
        if (!c.detail.empty()) out << "  " << c.detail;
        out << std::defaultfloat << '\n';
    }
    out << (passed() ? "all checks passed" : "validation FAILED") << '\n';
}

ThinWallResult thin_wall_check(const CylinderSpec& spec_in, const Material& material, double pressure,
                               bool flip_normal_sign) {
    CylinderSpec spec = spec_in;
    spec.flange_width = 0.0;
    spec.extra_levels.clear();
    spec.validate();
    const Mesh mesh = generate_cylinder_mesh(spec);
    const StiffnessSystem sys = assemble_stiffness(mesh, material);
    LoadBandOptions opts;
    opts.include_flange_underside = false;
    const SurfacePatch band = tag_load_surface(mesh, 0.0, spec.height, opts);
    LoadOptions load_opts;
    load_opts.flip_normal_sign = flip_normal_sign;
    const LoadOperator load = assemble_surface_load(mesh, band, load_opts);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * band.size()));
    p.head(static_cast<Eigen::Index>(band.size())).setConstant(pressure);
    const Eigen::VectorXd d = solve_forward(sys, load, p);

    const double rm = spec.outer_radius - 0.5 * spec.wall_thickness;
    constexpr int kProbes = 6;
    double sum = 0.0;
    for (int k = 0; k < kProbes; ++k) {
        // Offset from the node columns so probes sit inside single elements.
        const double th = 2.0 * units::kPi * (k + 0.37) / kProbes;
        const double dth = 2.0 * units::kPi / spec.angular_resolution;
        const double phi = std::fmod(th, dth);
        const double r = rm * std::cos(0.5 * dth) / std::cos(phi - 0.5 * dth);
        const Vec3 x(r * std::cos(th), r * std::sin(th), -0.5 * spec.height);
        sum += point_strain(mesh, d, x, frame_at_angle(th).t_h);
    }
    ThinWallResult r;
    r.fem_strain = sum / kProbes;
    r.analytic_strain = -pressure * rm / (spec.wall_thickness * material.youngs_modulus);
    r.relative_error = std::abs(r.fem_strain / r.analytic_strain - 1.0);
    const double ro2 = spec.outer_radius * spec.outer_radius;
    const double ri2 = spec.inner_radius() * spec.inner_radius();
    const double a = -pressure * ro2 / (ro2 - ri2);
    const double hoop = a * (1.0 + ri2 / (rm * rm));
    const double radial = a * (1.0 - ri2 / (rm * rm));
    r.exact_strain = (hoop - material.poisson_ratio * radial) / material.youngs_modulus;
    r.discretization_error = std::abs(r.fem_strain / r.exact_strain - 1.0);
    r.nodes = mesh.nodes.size();
    return r;
}

InformationPosterior information_form(const Eigen::MatrixXd& prior_cov, const Eigen::VectorXd& prior_mean,
                                      const Eigen::MatrixXd& h, const Eigen::VectorXd& obs, double noise_std) {
    const double w = 1.0 / (noise_std * noise_std);
    const Eigen::MatrixXd prior_prec = prior_cov.ldlt().solve(Eigen::MatrixXd::Identity(prior_cov.rows(), prior_cov.cols()));
    const Eigen::MatrixXd prec = prior_prec + w * h.transpose() * h;
    InformationPosterior out;
    const auto ldlt = prec.ldlt();
    out.covariance = ldlt.solve(Eigen::MatrixXd::Identity(prec.rows(), prec.cols()));
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    out.mean = ldlt.solve(prior_prec * prior_mean + w * h.transpose() * obs);
    return out;
}

ValidationReport run_validation(const RunConfig& cfg, const Model& model, const ValidationOptions& options) {
    ValidationReport report;
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto randn = [&](Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
        }
        return m;
    };

    // Thin-wall pressure vessel.
    {
        const auto r = thin_wall_check(cfg.geometry, cfg.material, 1e6, cfg.flip_normal_sign);
        std::ostringstream detail;
        detail << "fem " << r.fem_strain << " analytic " << r.analytic_strain << " (" << r.nodes << " nodes)";
        report.checks.push_back(at_most("thin_wall_hoop_strain", r.relative_error, 0.05, detail.str()));
        if (options.convergence_table) {
            for (int div : {4, 2}) {
                CylinderSpec coarse = cfg.geometry;
                coarse.angular_resolution = std::max(4, 2 * (cfg.geometry.angular_resolution / (2 * div)));
                coarse.vertical_resolution = std::max(4, cfg.geometry.vertical_resolution / div);
                const auto c = thin_wall_check(coarse, cfg.material, 1e6, cfg.flip_normal_sign);
                std::ostringstream d;
                d << coarse.angular_resolution << "x" << coarse.vertical_resolution << " error vs thick-wall solution";
                report.checks.push_back({"thin_wall_coarse_1/" + std::to_string(div), true, c.discretization_error, 0.0, d.str(), true});
            }
        }
    }

    // Kernel Gram matrices on (a subsample of) the load band.
    {
        const std::size_t stride = std::max<std::size_t>(1, model.band.size() / 600);
        std::vector<Vec3> pts;
        for (std::size_t j = 0; j < model.band.size(); j += stride) {
            pts.push_back(model.mesh.nodes[static_cast<std::size_t>(model.band.node_ids[j])]);
        }
        double worst = 0.0;
        for (const auto& k : cfg.prior.kernels) {
            Eigen::MatrixXd gram(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(pts.size()));
            for (std::size_t i = 0; i < pts.size(); ++i) {
                for (std::size_t j = 0; j < pts.size(); ++j) {
                    gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = product_kernel(pts[i], pts[j], k);
                }
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
            worst = std::min(worst, eig.eigenvalues().minCoeff() / (k.sigma * k.sigma));
        }
        report.checks.push_back(at_least("kernel_gram_psd", worst, -1e-10,
                                         "min eigenvalue / sigma^2 over " + std::to_string(pts.size()) + " nodes"));
    }

    // Periodicity of the meridional factor, in units of the rounding of the shifted argument.
    {
        constexpr long double kTwoPiL = 6.283185307179586476925286766559L;
        constexpr double kEps = std::numeric_limits<double>::epsilon();
        std::uniform_real_distribution<double> angle(-10.0, 10.0);
        const double l = cfg.prior.kernels[0].meridional_lengthscale;
        double worst = 0.0;
        double worst_abs = 0.0;
        for (int i = 0; i < 2000; ++i) {
            const double a = angle(rng), b = angle(rng);
            const double k0 = periodic_kernel(a, b, l);
            const double s = std::sin(0.5 * (a - b)), c = std::cos(0.5 * (a - b));
            const double slope = 2.0 * std::abs(s * c) * k0 / (l * l);
            for (double shifted : {a + 2 * units::kPi, a - 2 * units::kPi}) {
                const long double rounding = std::abs(static_cast<long double>(shifted) - static_cast<long double>(a) -
                                                      (shifted > a ? kTwoPiL : -kTwoPiL));
                const double arg = kEps * (std::abs(shifted - b) + std::abs(a - b));
                const double diff = std::abs(periodic_kernel(shifted, b, l) - k0);
                worst_abs = std::max(worst_abs, diff);
                worst = std::max(worst, diff / (slope * (static_cast<double>(rounding) + arg) + 4.0 * kEps));
            }
        }
        std::ostringstream d;
        d << "max |k(a+-2pi,b) - k(a,b)| / (|dk/da| argument rounding + 4 eps); absolute " << worst_abs;
        report.checks.push_back(at_most("kernel_periodicity", worst, 4.0, d.str()));
    }

    // Rigid-body modes in the nullspace of K.
    {
        const Eigen::MatrixXd kr = model.system.matrix() * model.system.nullspace();
        const double rel = kr.norm() / model.system.matrix().norm();
        report.checks.push_back(at_most("rigid_modes_annihilated", rel, 1e-9, "||K R||_F / ||K||_F"));
    }

    // Closed-surface equilibrium.
    {
        std::vector<SurfaceRegion> all;
        for (int r = 0; r < kSurfaceRegionCount; ++r) all.push_back(static_cast<SurfaceRegion>(r));
        const double p = 1e6;
        const Eigen::VectorXd f = facet_pressure_load(model.mesh, all, p);
        double area = 0.0;
        for (const auto& t : model.mesh.surface_tris) {
            const Vec3& a = model.mesh.nodes[static_cast<std::size_t>(t.nodes[0])];
            const Vec3& b = model.mesh.nodes[static_cast<std::size_t>(t.nodes[1])];
            const Vec3& c = model.mesh.nodes[static_cast<std::size_t>(t.nodes[2])];
            area += 0.5 * (b - a).cross(c - a).norm();
        }
        const auto [force, torque] = resultant(model.mesh, f);
        report.checks.push_back(at_most("closed_surface_equilibrium", force.norm() / (p * area), 1e-10, "|F| / (p A)"));

        // Any band load is balanced once rigid components are projected out.
        const Eigen::VectorXd pr = randn(model.load.matrix.cols(), 1).col(0) * 1e6;
        const Eigen::VectorXd fb = model.load.matrix * pr;
        const Eigen::VectorXd fp = model.system.project(fb);
        const auto [fp_force, fp_torque] = resultant(model.mesh, fp);
        const auto [fb_force, fb_torque] = resultant(model.mesh, fb);
        double scale = 0.0;
        for (std::size_t i = 0; i < model.mesh.nodes.size(); ++i) {
            scale += fb.segment<3>(3 * static_cast<Eigen::Index>(i)).norm();
        }
        (void)fb_force;
        (void)fb_torque;
        if (model.system.treatment() == RigidBodyTreatment::Deflate) {
            report.checks.push_back(at_most("projected_load_balanced",
                                            std::max(fp_force.norm(), fp_torque.norm() / cfg.geometry.outer_radius) / scale,
                                            1e-10, "net force and torque / sum |f_i|"));
        }
    }

    // Adjoint-built H against direct forward columns.
    {
        const Eigen::Index cols = model.h.matrix.cols();
        const int samples = 16;
        double worst = 0.0;
        for (int s = 0; s < samples; ++s) {
            const Eigen::Index j = (static_cast<Eigen::Index>(s) * 7919) % cols;
            Eigen::VectorXd e = Eigen::VectorXd::Zero(cols);
            e[j] = 1.0;
            const Eigen::VectorXd direct = model.observer.matrix * solve_forward(model.system, model.load, e);
            worst = std::max(worst, max_abs(direct - model.h.matrix.col(j)));
        }
        report.checks.push_back(at_most("h_adjoint_vs_direct", worst / max_abs(model.h.matrix), 1e-10,
                                        "max |dH| / max |H| over 16 sampled columns"));
    }

    // Linearity of the forward chain.
    {
        const Eigen::Index cols = model.load.matrix.cols();
        const Eigen::VectorXd p = randn(cols, 1).col(0) * 1e6;
        const Eigen::VectorXd q = randn(cols, 1).col(0) * 1e6;
        const double alpha = 1.7, beta = -0.3;
        auto chain = [&](const Eigen::VectorXd& x) {
            return Eigen::VectorXd(model.observer.matrix * solve_forward(model.system, model.load, x));
        };
        const Eigen::VectorXd lhs = chain(alpha * p + beta * q);
        const Eigen::VectorXd rhs = alpha * chain(p) + beta * chain(q);
        const Eigen::VectorXd two = solve_forward(model.system, model.load, 2.0 * p);
        const Eigen::VectorXd one = solve_forward(model.system, model.load, p);
        const double rel = std::max((lhs - rhs).norm() / rhs.norm(), (two - 2.0 * one).norm() / two.norm());
        report.checks.push_back(at_most("forward_chain_linearity", rel, 1e-12));
    }

    // Kalman form against the information form on small random instances.
    {
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::Index nodes = 10, gauges = 6;
            Mesh tiny;
            std::uniform_real_distribution<double> th(0.0, 2 * units::kPi), z(-0.8, -0.2);
            SurfacePatch patch;
            for (Eigen::Index i = 0; i < nodes; ++i) {
                const double a = th(rng);
                tiny.nodes.emplace_back(0.381 * std::cos(a), 0.381 * std::sin(a), z(rng));
                patch.node_ids.push_back(static_cast<int>(i));
            }
            const BlockGaussian prior = assemble_prior(tiny, patch, cfg.prior);
            const Eigen::MatrixXd h = randn(gauges, 3 * nodes) * 1e-10;
            const double sz = 1e-6;
            ObservationSet obs;
            obs.noise_std = sz;
            obs.strains = randn(gauges, 1).col(0) * 1e-4;
            const Posterior post = condition(prior, h, obs);
            const auto ref = information_form(prior.covariance(), prior.mean, h, obs.strains, sz);
            worst = std::max({worst, max_abs(post.mean - ref.mean) / max_abs(ref.mean),
                              max_abs(*post.covariance - ref.covariance) / max_abs(ref.covariance)});
        }
        report.checks.push_back(at_most("kalman_vs_information_form", worst, 1e-8, "10 random instances"));
    }

    // Posterior variance never exceeds the prior variance.
    {
        ConditionOptions opts;
        opts.full_covariance = false;
        opts.retain_gain = false;
        const Conditioner cond(model.prior, model.h.matrix, {}, cfg.noise_std, opts);
        ObservationSet obs;
        obs.noise_std = cfg.noise_std;
        obs.strains = Eigen::VectorXd::Zero(model.h.matrix.rows());
        const Posterior post = cond.condition(obs);
        const Eigen::VectorXd prior_var = model.prior.variance();
        double worst = -std::numeric_limits<double>::infinity();
        const auto n = model.prior.n();
        for (Eigen::Index i = 0; i < prior_var.size(); ++i) {
            const double s2 = model.prior.sigma[static_cast<std::size_t>(i / n)] * model.prior.sigma[static_cast<std::size_t>(i / n)];
            worst = std::max(worst, (post.variance[i] - prior_var[i]) / s2);
        }
        report.checks.push_back(at_most("posterior_variance_reduction", worst, 1e-12, "max (var_post - var_prior) / sigma^2"));
    }
    return report;
}

}  // namespace iceload
