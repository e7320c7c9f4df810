#include "iceload/prior.hpp"

#include <cmath>
#include <random>

#include "iceload/error.hpp"
#include "parallel.hpp"

namespace iceload {

std::string_view component_name(Component c) {
    switch (c) {
        case Component::Normal: return "N";
        case Component::Horizontal: return "H";
        case Component::Vertical: return "V";
    }
    return "?";
}

std::optional<Component> parse_component(std::string_view name) {
    if (name == "N" || name == "normal") return Component::Normal;
    if (name == "H" || name == "horizontal") return Component::Horizontal;
    if (name == "V" || name == "vertical") return Component::Vertical;
    return std::nullopt;
}

void KernelConfig::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("kernel sigma must be positive");
    if (!(meridional_lengthscale > 0.0) || !std::isfinite(meridional_lengthscale)) {
        throw InputError("meridional lengthscale must be positive");
    }
    if (!(vertical_lengthscale > 0.0) || !std::isfinite(vertical_lengthscale)) {
        throw InputError("vertical lengthscale must be positive");
    }
}

double matern32(double distance, double lengthscale) {
    if (distance < 0.0) throw InputError("matern32: negative distance");
    if (!(lengthscale > 0.0)) throw InputError("matern32: lengthscale must be positive");
    const double s = std::sqrt(3.0) * distance / lengthscale;
    return (1.0 + s) * std::exp(-s);
}

double periodic_kernel(double theta, double theta_prime, double lengthscale) {
    if (!(lengthscale > 0.0)) throw InputError("periodic_kernel: lengthscale must be positive");
    const double s = std::sin(0.5 * (theta - theta_prime));
    return std::exp(-2.0 * s * s / (lengthscale * lengthscale));
}

double product_kernel(const Vec3& x, const Vec3& x_prime, const KernelConfig& cfg) {
    constexpr double kAxisTol = 1e-12;
    if (std::hypot(x.x(), x.y()) < kAxisTol || std::hypot(x_prime.x(), x_prime.y()) < kAxisTol) {
        throw InputError("product_kernel: point on the cylinder axis has no angle");
    }
    const double t = std::atan2(x.y(), x.x());
    const double tp = std::atan2(x_prime.y(), x_prime.x());
    return cfg.sigma * cfg.sigma * periodic_kernel(t, tp, cfg.meridional_lengthscale) *
           matern32(std::abs(x.z() - x_prime.z()), cfg.vertical_lengthscale);
}

Eigen::VectorXd BlockGaussian::variance() const {
    Eigen::VectorXd v(size());
    for (int c = 0; c < 3; ++c) v.segment(c * n(), n()) = blocks[static_cast<std::size_t>(c)].diagonal();
    return v;
}

Eigen::MatrixXd BlockGaussian::covariance() const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(size(), size());
    for (int c = 0; c < 3; ++c) s.block(c * n(), c * n(), n(), n()) = blocks[static_cast<std::size_t>(c)];
    return s;
}

Eigen::MatrixXd BlockGaussian::apply(const Eigen::MatrixXd& m) const {
    if (m.rows() != size()) throw InputError("BlockGaussian::apply: dimension mismatch");
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (int c = 0; c < 3; ++c) {
        out.middleRows(c * n(), n()).noalias() = blocks[static_cast<std::size_t>(c)] * m.middleRows(c * n(), n());
    }
    return out;
}

BlockGaussian assemble_prior(const Mesh& mesh, const SurfacePatch& patch, const PriorConfig& cfg) {
    if (patch.node_ids.empty()) throw InputError("assemble_prior: empty patch");
    for (const auto& k : cfg.kernels) k.validate();
    if (!(cfg.jitter >= 0.0)) throw InputError("prior jitter must be non-negative");

    const auto n = static_cast<Eigen::Index>(patch.node_ids.size());
    std::vector<Vec3> x;
    x.reserve(patch.node_ids.size());
    std::vector<double> theta;
    for (int id : patch.node_ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= mesh.nodes.size()) throw InputError("patch node out of range");
        const Vec3& p = mesh.nodes[static_cast<std::size_t>(id)];
        if (std::hypot(p.x(), p.y()) < 1e-12) throw InputError("patch node on the cylinder axis");
        x.push_back(p);
        theta.push_back(std::atan2(p.y(), p.x()));
    }

    BlockGaussian prior;
    prior.mean.resize(3 * n);
    for (std::size_t c = 0; c < 3; ++c) {
        const KernelConfig& k = cfg.kernels[c];
        const double var = k.sigma * k.sigma;
        prior.sigma[c] = k.sigma;
        prior.mean.segment(static_cast<Eigen::Index>(c) * n, n).setConstant(cfg.means[c]);
        Eigen::MatrixXd& s = prior.blocks[c];
        s.resize(n, n);
        detail::parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
            const auto ii = static_cast<Eigen::Index>(i);
            for (Eigen::Index j = 0; j <= ii; ++j) {
                const double v = var * periodic_kernel(theta[i], theta[static_cast<std::size_t>(j)], k.meridional_lengthscale) *
                                 matern32(std::abs(x[i].z() - x[static_cast<std::size_t>(j)].z()), k.vertical_lengthscale);
                s(ii, j) = v;
                s(j, ii) = v;
            }
        });
        s.diagonal().array() += cfg.jitter * var;
        auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(s);
        if (llt->info() != Eigen::Success) {
            throw NumericalError(std::string("prior covariance for component ") + std::string(component_name(kComponents[c])) +
                                 " is not factorizable even with jitter");
        }
        prior.cholesky[c] = std::move(llt);
    }
    return prior;
}

Eigen::MatrixXd sample_prior(const BlockGaussian& prior, std::uint64_t seed, std::size_t count) {
    const auto n = prior.n();
    Eigen::MatrixXd out(prior.size(), static_cast<Eigen::Index>(count));
    if (count == 0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(prior.size(), static_cast<Eigen::Index>(count));
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = normal(rng);
    }
    for (int c = 0; c < 3; ++c) {
        const auto& llt = *prior.cholesky[static_cast<std::size_t>(c)];
        out.middleRows(c * n, n) = llt.matrixL() * z.middleRows(c * n, n);
    }
    out.colwise() += prior.mean;
    return out;
}

}  // namespace iceload
