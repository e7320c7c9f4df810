#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>

#include "iceload/error.hpp"
#include "iceload/inference.hpp"
#include "iceload/prior.hpp"
#include "oracles.hpp"

using namespace iceload;
using iceload::testing::Gen;

namespace {

BlockGaussian random_prior(Gen& g, Eigen::Index n, double decades = 3.0) {
    BlockGaussian p;
    p.mean = 1e5 * g.gaussian(3 * n);
    for (std::size_t c = 0; c < 3; ++c) {
        p.sigma[c] = g.uniform(1e5, 4e6);
        p.blocks[c] = g.spd(n, p.sigma[c] * p.sigma[c], decades);
        p.cholesky[c] = std::make_shared<const Eigen::LLT<Eigen::MatrixXd>>(p.blocks[c]);
    }
    return p;
}

struct Instance {
    BlockGaussian prior;
    Eigen::MatrixXd h;
    Eigen::VectorXd y;
    double noise = 1e-6;
};

Instance random_instance(Gen& g) {
    Instance in;
    const Eigen::Index n = g.integer(2, 20);
    const Eigen::Index m = g.integer(6, 12);
    in.prior = random_prior(g, n);
    in.h = 1e-11 * g.gaussian(m, 3 * n);
    in.noise = std::pow(10.0, g.uniform(-7.0, -5.0));
    const Eigen::VectorXd p = in.prior.mean + 1e6 * g.gaussian(3 * n);
    in.y = in.h * p + in.noise * g.gaussian(m);
    return in;
}

}  // namespace

TEST(Inference, KalmanFormMatchesExtendedPrecisionInformationForm) {
    Gen g(101);
    for (int trial = 0; trial < 40; ++trial) {
        const Instance in = random_instance(g);
        ObservationSet obs{in.y, {}, in.noise, 0.0};
        const Posterior post = condition(in.prior, in.h, obs);
        const auto oracle = iceload::testing::information_posterior(in.prior.covariance(), in.prior.mean, in.h, in.y, in.noise);
        EXPECT_LT((post.mean - oracle.mean).norm() / oracle.mean.norm(), 1e-8) << trial;
        ASSERT_TRUE(post.covariance);
        EXPECT_LT((*post.covariance - oracle.covariance).norm() / oracle.covariance.norm(), 1e-8) << trial;
        EXPECT_LT((post.variance - oracle.covariance.diagonal()).cwiseAbs().maxCoeff() / oracle.covariance.diagonal().maxCoeff(), 1e-8);
    }
}

TEST(Inference, PosteriorVarianceNeverExceedsPrior) {
    Gen g(103);
    for (int trial = 0; trial < 40; ++trial) {
        const Instance in = random_instance(g);
        const Posterior post = condition(in.prior, in.h, {in.y, {}, in.noise, 0.0});
        const Eigen::VectorXd prior_var = in.prior.variance();
        for (Eigen::Index i = 0; i < prior_var.size(); ++i) EXPECT_LE(post.variance[i], prior_var[i] * (1.0 + 1e-12));
        const Eigen::MatrixXd& c = *post.covariance;
        EXPECT_EQ(c, c.transpose());
    }
}

TEST(Inference, DiagonalOnlyModeMatchesFullCovariance) {
    Gen g(107);
    const Instance in = random_instance(g);
    const ObservationSet obs{in.y, {}, in.noise, 0.0};
    const Posterior full = condition(in.prior, in.h, obs);
    const Posterior diag = condition(in.prior, in.h, obs, {false, false});
    EXPECT_FALSE(diag.covariance);
    EXPECT_FALSE(diag.gain);
    EXPECT_LT((full.variance - diag.variance).cwiseAbs().maxCoeff() / full.variance.maxCoeff(), 1e-12);
    EXPECT_EQ(full.mean, diag.mean);
}

TEST(Inference, NoiseFreeDataIsReproduced) {
    Gen g(109);
    const Eigen::Index n = 30;
    const BlockGaussian prior = random_prior(g, n, 1.0);
    const Eigen::MatrixXd h = 1e-11 * g.gaussian(8, 3 * n);
    const Eigen::VectorXd p = prior.mean + 1e6 * g.gaussian(3 * n);
    const Eigen::VectorXd y = h * p;
    const Posterior post = condition(prior, h, {y, {}, 1e-9, 0.0});
    EXPECT_LT(post.diagnostics.posterior_residual, 1e-8);
    EXPECT_LT(post.diagnostics.posterior_residual, 1e-3 * post.diagnostics.prior_residual);
    const PredictiveStrain pred = posterior_predictive_strain(post, h);
    EXPECT_NEAR(pred.residual, post.diagnostics.posterior_residual, 1e-20);
    EXPECT_LT((pred.strain - h * post.mean).norm(), 1e-20);
}

TEST(Inference, RowSubsetEqualsConditioningOnSubmatrix) {
    Gen g(113);
    const Instance in = random_instance(g);
    const std::vector<Eigen::Index> rows = {0, 2, 5};
    Eigen::MatrixXd hs(3, in.h.cols());
    Eigen::VectorXd ys(3);
    for (int i = 0; i < 3; ++i) {
        hs.row(i) = in.h.row(rows[static_cast<std::size_t>(i)]);
        ys[i] = in.y[rows[static_cast<std::size_t>(i)]];
    }
    const Posterior sub = condition(in.prior, in.h, {ys, rows, in.noise, 1.5});
    const Posterior direct = condition(in.prior, hs, {ys, {}, in.noise, 1.5});
    EXPECT_LT((sub.mean - direct.mean).norm() / direct.mean.norm(), 1e-12);
    EXPECT_EQ(sub.rows, rows);
    EXPECT_EQ(sub.timestamp, 1.5);
}

TEST(Inference, IllConditioningIsReported) {
    Gen g(127);
    const Eigen::Index n = 5;
    const BlockGaussian prior = random_prior(g, n, 1.0);
    Eigen::MatrixXd h = 1e-11 * g.gaussian(4, 3 * n);
    h.row(3) = h.row(2) + 1e-19 * g.gaussian(3 * n).transpose();
    const Eigen::VectorXd y = h * prior.mean;
    const Posterior post = condition(prior, h, {y, {}, 3e-13, 0.0});
    EXPECT_GT(post.diagnostics.condition_number, kConditionWarning);
    EXPECT_FALSE(post.diagnostics.warnings.empty());
}

TEST(Inference, RejectsBadInputs) {
    Gen g(131);
    const Instance in = random_instance(g);
    EXPECT_THROW(condition(in.prior, in.h, {in.y, {}, 0.0, 0.0}), InputError);
    EXPECT_THROW(condition(in.prior, in.h, {in.y.head(2), {}, in.noise, 0.0}), InputError);
    EXPECT_THROW(condition(in.prior, in.h, {in.y.head(1), {99}, in.noise, 0.0}), InputError);
    Eigen::VectorXd bad = in.y;
    bad[0] = std::nan("");
    try {
        condition(in.prior, in.h, {bad, {}, in.noise, 42.0});
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("t=42"), std::string::npos);
    }
    EXPECT_THROW(condition(in.prior, Eigen::MatrixXd::Zero(3, 2), {Eigen::VectorXd::Zero(3), {}, in.noise, 0.0}), InputError);
}

TEST(Inference, TimeseriesIsIndependentOfRecordOrderAndThreads) {
    Gen g(137);
    const Eigen::Index n = 15;
    const BlockGaussian prior = random_prior(g, n);
    const Eigen::MatrixXd h = 1e-11 * g.gaussian(10, 3 * n);
    std::vector<ObservationSet> records;
    for (int k = 0; k < 60; ++k) {
        ObservationSet o;
        o.timestamp = 0.5 * k;
        o.noise_std = 1e-6;
        if (k % 3 == 1) o.rows = {0, 1, 2, 3, 4, 6, 7, 8, 9};
        const Eigen::VectorXd full = h * (prior.mean + 1e6 * g.gaussian(3 * n)) + 1e-6 * g.gaussian(10);
        if (o.rows.empty()) {
            o.strains = full;
        } else {
            o.strains.resize(static_cast<Eigen::Index>(o.rows.size()));
            for (std::size_t i = 0; i < o.rows.size(); ++i) o.strains[static_cast<Eigen::Index>(i)] = full[o.rows[i]];
        }
        records.push_back(o);
    }
    const auto base = infer_timeseries(records, h, prior);
    ASSERT_EQ(base.size(), records.size());
    for (std::size_t k = 0; k < records.size(); ++k) {
        const Posterior single = condition(prior, h, records[k], {false, false});
        EXPECT_EQ(base[k].timestamp, records[k].timestamp);
        EXPECT_LT((base[k].mean - single.mean).norm() / single.mean.norm(), 1e-13);
    }
    const auto perm = g.permutation(records.size());
    std::vector<ObservationSet> shuffled;
    for (std::size_t k : perm) shuffled.push_back(records[k]);
    for (const char* threads : {"1", "3"}) {
        setenv("ICELOAD_THREADS", threads, 1);
        const auto out = infer_timeseries(shuffled, h, prior);
        for (std::size_t k = 0; k < perm.size(); ++k) {
            EXPECT_EQ(out[k].mean, base[perm[k]].mean);
            EXPECT_EQ(out[k].variance, base[perm[k]].variance);
        }
    }
    unsetenv("ICELOAD_THREADS");
}
