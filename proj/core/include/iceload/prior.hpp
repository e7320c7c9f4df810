#pragma once

#include <array>
#include <cstdint>
#include <memory>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "iceload/geometry.hpp"

namespace iceload {

// Pressure components, in the block order used by every pressure vector.
enum class Component : int { Normal = 0, Horizontal = 1, Vertical = 2 };

inline constexpr std::array<Component, 3> kComponents = {Component::Normal, Component::Horizontal,
                                                          Component::Vertical};

std::string_view component_name(Component c);  // "N", "H", "V"
std::optional<Component> parse_component(std::string_view name);

struct KernelConfig {
    double sigma = 4.0e6;                                          // Pa
    double meridional_lengthscale = 3.14159265358979323846 / 20.0;  // rad
    double vertical_lengthscale = 0.5;                             // m

    void validate() const;
};

double matern32(double distance, double lengthscale);
double periodic_kernel(double theta, double theta_prime, double lengthscale);

// Covariance between two barrel points. The angle is taken about the z axis
// and the vertical coordinate drives the Matern factor.
double product_kernel(const Vec3& x, const Vec3& x_prime, const KernelConfig& cfg);

struct PriorConfig {
    std::array<KernelConfig, 3> kernels = {
        KernelConfig{4.0e6, 3.14159265358979323846 / 20.0, 0.5},
        KernelConfig{0.5e6, 3.14159265358979323846 / 20.0, 0.5},
        KernelConfig{0.5e6, 3.14159265358979323846 / 20.0, 0.5},
    };
    std::array<double, 3> means = {0.0, 0.0, 0.0};  // Pa, constant per component
    double jitter = 1e-8;                          // relative to sigma^2
};

// Independent Gaussian fields for the three components on a patch. The full
// covariance is block diagonal and never formed unless asked for.
struct BlockGaussian {
    Eigen::VectorXd mean;                 // 3n, blocks (N, H, V)
    std::array<Eigen::MatrixXd, 3> blocks;
    std::array<double, 3> sigma{};
    std::array<std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>>, 3> cholesky;

    Eigen::Index n() const { return blocks[0].rows(); }
    Eigen::Index size() const { return 3 * n(); }

    Eigen::VectorXd variance() const;
    Eigen::MatrixXd covariance() const;
    // Sigma_p * m for a 3n x k matrix, exploiting the block structure.
    Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const;
};

BlockGaussian assemble_prior(const Mesh& mesh, const SurfacePatch& patch, const PriorConfig& cfg = {});

// Columns are independent draws mean + L z with z ~ N(0, I).
Eigen::MatrixXd sample_prior(const BlockGaussian& prior, std::uint64_t seed, std::size_t count);

}  // namespace iceload
