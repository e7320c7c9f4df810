#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "iceload/elasticity.hpp"
#include "iceload/prior.hpp"

namespace iceload {

// One strain record. `rows` lists the rows of H that were observed (the
// gauges valid in this record); empty means every row of H.
struct ObservationSet {
    Eigen::VectorXd strains;
    std::vector<Eigen::Index> rows;
    double noise_std = 1e-6;
    double timestamp = 0.0;
};

struct PosteriorDiagnostics {
    double prior_residual = 0.0;      // max |eps - H mu_p|
    double posterior_residual = 0.0;  // max |eps - H mu_post|
    double misfit_norm = 0.0;         // ||eps - H mu_post||_2
    double condition_number = 0.0;    // of Sigma_eps
    std::vector<std::string> warnings;
};

struct Posterior {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
    // Shared by every posterior conditioned on the same gauge mask. Null when
    // only the diagonal was requested.
    std::shared_ptr<const Eigen::MatrixXd> covariance;
    std::shared_ptr<const Eigen::MatrixXd> gain;
    Eigen::VectorXd observed;
    Eigen::VectorXd predicted;  // H mu_post on the observed rows
    std::vector<Eigen::Index> rows;
    double timestamp = 0.0;
    PosteriorDiagnostics diagnostics;

    Eigen::VectorXd stddev() const { return variance.cwiseMax(0.0).cwiseSqrt(); }
};

// Sigma_eps = H Sigma_p H^T + sigma_z^2 I.
Eigen::MatrixXd prior_predictive_cov(const Eigen::MatrixXd& h, const BlockGaussian& prior, double noise_std);

// G = Sigma_p H^T Sigma_eps^-1 by a Cholesky solve. The condition number of
// Sigma_eps is written to *condition when given.
Eigen::MatrixXd kalman_gain(const BlockGaussian& prior, const Eigen::MatrixXd& h, const Eigen::MatrixXd& sigma_eps,
                            double* condition = nullptr);

inline constexpr double kConditionWarning = 1e14;

struct ConditionOptions {
    bool full_covariance = true;  // false keeps only the posterior variance
    bool retain_gain = true;
};

// Everything that depends on H, the prior, the noise level and the gauge mask
// but not on the data. Immutable; condition() may be called concurrently.
class Conditioner {
public:
    Conditioner(const BlockGaussian& prior, const Eigen::MatrixXd& h, std::vector<Eigen::Index> rows, double noise_std,
                const ConditionOptions& options = {});

    Posterior condition(const ObservationSet& obs) const;

    const Eigen::MatrixXd& gain() const { return *gain_; }
    const Eigen::MatrixXd& predictive_cov() const { return sigma_eps_; }
    const std::vector<Eigen::Index>& rows() const { return rows_; }
    double noise_std() const { return noise_std_; }

private:
    const BlockGaussian* prior_;
    Eigen::MatrixXd h_;  // observed rows only
    std::vector<Eigen::Index> rows_;
    double noise_std_;
    Eigen::MatrixXd sigma_eps_;
    std::shared_ptr<const Eigen::MatrixXd> gain_;
    std::shared_ptr<const Eigen::MatrixXd> covariance_;
    Eigen::VectorXd variance_;
    PosteriorDiagnostics base_;
    bool retain_gain_;
};

Posterior condition(const BlockGaussian& prior, const Eigen::MatrixXd& h, const ObservationSet& obs,
                    const ConditionOptions& options = {});

struct PredictiveStrain {
    Eigen::VectorXd strain;  // H mu_post over every row of H
    double residual = 0.0;   // max |observed - predicted| over observed rows
};

PredictiveStrain posterior_predictive_strain(const Posterior& post, const Eigen::MatrixXd& h);

Eigen::VectorXd posterior_displacement(const Posterior& post, const StiffnessSystem& system, const LoadOperator& load);

struct TimeseriesOptions {
    ConditionOptions condition{false, false};
};

// Conditions each record independently. Records sharing a gauge mask share one
// Conditioner; work is spread over ICELOAD_THREADS workers and the output
// order always follows the input order.
std::vector<Posterior> infer_timeseries(const std::vector<ObservationSet>& records, const Eigen::MatrixXd& h,
                                        const BlockGaussian& prior, const TimeseriesOptions& options = {});

}  // namespace iceload
