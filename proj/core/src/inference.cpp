#include "iceload/inference.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "iceload/error.hpp"
#include "parallel.hpp"

namespace iceload {

namespace {

std::vector<Eigen::Index> all_rows(Eigen::Index n) {
    std::vector<Eigen::Index> r(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = i;
    return r;
}

void check_noise(double noise_std) {
    if (!(noise_std > 0.0) || !std::isfinite(noise_std)) throw InputError("noise std must be positive and finite");
}

}  // namespace

Eigen::MatrixXd prior_predictive_cov(const Eigen::MatrixXd& h, const BlockGaussian& prior, double noise_std) {
    check_noise(noise_std);
    if (h.cols() != prior.size()) throw InputError("H columns do not match the prior dimension");
    const Eigen::MatrixXd hs = prior.apply(h.transpose()).transpose();  // H Sigma_p
    Eigen::MatrixXd s = hs * h.transpose();
    s = 0.5 * (s + s.transpose()).eval();
    s.diagonal().array() += noise_std * noise_std;
    return s;
}

Eigen::MatrixXd kalman_gain(const BlockGaussian& prior, const Eigen::MatrixXd& h, const Eigen::MatrixXd& sigma_eps,
                            double* condition) {
    if (sigma_eps.rows() != h.rows() || sigma_eps.cols() != h.rows()) {
        throw InputError("Sigma_eps does not match the number of observations");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_eps);
    if (llt.info() != Eigen::Success) throw NumericalError("prior predictive covariance is not positive definite");
    if (condition) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_eps, Eigen::EigenvaluesOnly);
        const auto& ev = eig.eigenvalues();
        *condition = ev.size() == 0 ? 1.0 : ev.maxCoeff() / ev.minCoeff();
    }
    const Eigen::MatrixXd sht = prior.apply(h.transpose());  // Sigma_p H^T
    // G^T = Sigma_eps^-1 (H Sigma_p).
    return llt.solve(sht.transpose()).transpose();
}

Conditioner::Conditioner(const BlockGaussian& prior, const Eigen::MatrixXd& h, std::vector<Eigen::Index> rows,
                         double noise_std, const ConditionOptions& options)
    : prior_(&prior), rows_(std::move(rows)), noise_std_(noise_std), retain_gain_(options.retain_gain) {
    check_noise(noise_std);
    if (h.cols() != prior.size()) throw InputError("H columns do not match the prior dimension");
    if (rows_.empty()) rows_ = all_rows(h.rows());
    h_.resize(static_cast<Eigen::Index>(rows_.size()), h.cols());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i] < 0 || rows_[i] >= h.rows()) throw InputError("observation row out of range");
        h_.row(static_cast<Eigen::Index>(i)) = h.row(rows_[i]);
    }

    sigma_eps_ = prior_predictive_cov(h_, prior, noise_std);
    double cond = 0.0;
    auto g = std::make_shared<Eigen::MatrixXd>(kalman_gain(prior, h_, sigma_eps_, &cond));
    base_.condition_number = cond;
    if (cond > kConditionWarning) {
        std::ostringstream msg;
        msg << "prior predictive covariance is ill-conditioned (condition number " << cond << ")";
        base_.warnings.push_back(msg.str());
    }

    const Eigen::MatrixXd hs = prior.apply(h_.transpose()).transpose();  // H Sigma_p
    if (options.full_covariance) {
        auto cov = std::make_shared<Eigen::MatrixXd>(prior.covariance());
        cov->noalias() -= (*g) * hs;
        *cov = 0.5 * (*cov + cov->transpose()).eval();
        variance_ = cov->diagonal();
        covariance_ = std::move(cov);
    } else {
        variance_ = prior.variance() - ((*g).array() * hs.transpose().array()).rowwise().sum().matrix();
    }
    gain_ = std::move(g);
}

Posterior Conditioner::condition(const ObservationSet& obs) const {
    if (obs.strains.size() != static_cast<Eigen::Index>(rows_.size())) {
        std::ostringstream msg;
        msg << "record at t=" << obs.timestamp << " has " << obs.strains.size() << " strains, expected " << rows_.size();
        throw InputError(msg.str());
    }
    if (!obs.strains.allFinite()) {
        std::ostringstream msg;
        msg << "record at t=" << obs.timestamp << " contains non-finite strains";
        throw InputError(msg.str());
    }
    Posterior post;
    const Eigen::VectorXd innovation = obs.strains - h_ * prior_->mean;
    post.mean = prior_->mean + (*gain_) * innovation;
    post.variance = variance_;
    post.covariance = covariance_;
    if (retain_gain_) post.gain = gain_;
    post.observed = obs.strains;
    post.predicted = h_ * post.mean;
    post.rows = rows_;
    post.timestamp = obs.timestamp;
    post.diagnostics = base_;
    if (innovation.size() > 0) {
        const Eigen::VectorXd r = obs.strains - post.predicted;
        post.diagnostics.prior_residual = innovation.cwiseAbs().maxCoeff();
        post.diagnostics.posterior_residual = r.cwiseAbs().maxCoeff();
        post.diagnostics.misfit_norm = r.norm();
    }
    return post;
}

Posterior condition(const BlockGaussian& prior, const Eigen::MatrixXd& h, const ObservationSet& obs,
                    const ConditionOptions& options) {
    return Conditioner(prior, h, obs.rows, obs.noise_std, options).condition(obs);
}

PredictiveStrain posterior_predictive_strain(const Posterior& post, const Eigen::MatrixXd& h) {
    PredictiveStrain out;
    out.strain = h * post.mean;
    for (std::size_t i = 0; i < post.rows.size(); ++i) {
        const double d = std::abs(post.observed[static_cast<Eigen::Index>(i)] - out.strain[post.rows[i]]);
        out.residual = std::max(out.residual, d);
    }
    return out;
}

Eigen::VectorXd posterior_displacement(const Posterior& post, const StiffnessSystem& system, const LoadOperator& load) {
    return solve_forward(system, load, post.mean);
}

std::vector<Posterior> infer_timeseries(const std::vector<ObservationSet>& records, const Eigen::MatrixXd& h,
                                        const BlockGaussian& prior, const TimeseriesOptions& options) {
    using Key = std::pair<std::vector<Eigen::Index>, double>;
    std::map<Key, std::size_t> index;
    std::vector<Key> keys;
    std::vector<std::size_t> which(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        Key key{records[r].rows.empty() ? all_rows(h.rows()) : records[r].rows, records[r].noise_std};
        auto [it, inserted] = index.try_emplace(key, keys.size());
        if (inserted) keys.push_back(key);
        which[r] = it->second;
    }

    std::vector<std::unique_ptr<Conditioner>> conditioners(keys.size());
    detail::parallel_for(keys.size(), [&](std::size_t k) {
        conditioners[k] = std::make_unique<Conditioner>(prior, h, keys[k].first, keys[k].second, options.condition);
    });

    std::vector<Posterior> out(records.size());
    detail::parallel_for(records.size(), [&](std::size_t r) { out[r] = conditioners[which[r]]->condition(records[r]); });
    return out;
}

}  // namespace iceload
