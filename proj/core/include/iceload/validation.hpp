#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "iceload/config.hpp"
#include "iceload/pipeline.hpp"

namespace iceload {

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
    bool informational = false;  // reported but never fails the run
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    bool passed() const;
    void print(std::ostream& out) const;
};

struct ThinWallResult {
    double fem_strain = 0.0;       // mean mid-height, mid-wall hoop strain
    double analytic_strain = 0.0;  // -p r_m / (t E)
    double relative_error = 0.0;
    double exact_strain = 0.0;          // thick-wall elastic solution at r_m, zero axial stress
    double discretization_error = 0.0;  // relative to exact_strain
    std::size_t nodes = 0;
};

// Plain capped cylinder (no flange) under uniform p_N on the whole exterior
// barrel, loaded through the surface-load operator.
ThinWallResult thin_wall_check(const CylinderSpec& spec, const Material& material, double pressure = 1e6,
                               bool flip_normal_sign = false);

struct ValidationOptions {
    bool convergence_table = true;
    std::uint64_t seed = 7;
};

// Runs every invariant suite against the config's model.
ValidationReport run_validation(const RunConfig& cfg, const Model& model, const ValidationOptions& options = {});

// Dense information-form posterior, used as an oracle for the Kalman form.
struct InformationPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};
InformationPosterior information_form(const Eigen::MatrixXd& prior_cov, const Eigen::VectorXd& prior_mean,
                                      const Eigen::MatrixXd& h, const Eigen::VectorXd& obs, double noise_std);

}  // namespace iceload
