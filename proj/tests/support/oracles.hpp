#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/LU>

#include "iceload/elasticity.hpp"
#include "iceload/geometry.hpp"

namespace iceload::testing {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double normal() { return normal_(rng_); }

    Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
        }
        return m;
    }

    Eigen::VectorXd gaussian(Eigen::Index n) { return gaussian(n, 1).col(0); }

    // SPD with eigenvalues spread over `decades` orders of magnitude.
    Eigen::MatrixXd spd(Eigen::Index n, double scale, double decades) {
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(n, n));
        const Eigen::MatrixXd q = qr.householderQ();
        Eigen::VectorXd ev(n);
        for (Eigen::Index i = 0; i < n; ++i) ev[i] = scale * std::pow(10.0, -decades * uniform(0.0, 1.0));
        Eigen::MatrixXd s = q * ev.asDiagonal() * q.transpose();
        return 0.5 * (s + s.transpose());
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        std::shuffle(p.begin(), p.end(), rng_);
        return p;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Posterior of p ~ N(m, S), y = H p + N(0, s^2 I) via the precision matrix in
// extended precision.
struct DensePosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

inline DensePosterior information_posterior(const Eigen::MatrixXd& prior_cov, const Eigen::VectorXd& prior_mean,
                                            const Eigen::MatrixXd& h, const Eigen::VectorXd& y, double noise_std) {
    const MatrixXld s = prior_cov.cast<long double>();
    const MatrixXld hl = h.cast<long double>();
    const long double w = 1.0L / (static_cast<long double>(noise_std) * noise_std);
    const Eigen::FullPivLU<MatrixXld> s_lu(s);
    const MatrixXld prior_prec = s_lu.inverse();
    MatrixXld prec = prior_prec + w * hl.transpose() * hl;
    const Eigen::FullPivLU<MatrixXld> lu(prec);
    MatrixXld cov = lu.inverse();
    const VectorXld rhs = prior_prec * prior_mean.cast<long double>() + w * hl.transpose() * y.cast<long double>();
    DensePosterior out;
    out.mean = (cov * rhs).cast<double>();
    cov = (0.5L * (cov + cov.transpose())).eval();
    out.covariance = cov.cast<double>();
    return out;
}

// Rigid modes from node coordinates with Gram-Schmidt, independent of the
// library's QR-based construction.
inline Eigen::MatrixXd rigid_modes(const iceload::Mesh& mesh) {
    const Eigen::Index n = static_cast<Eigen::Index>(mesh.nodes.size());
    Vec3 c = Vec3::Zero();
    for (const auto& x : mesh.nodes) c += x;
    c /= static_cast<double>(n);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(3 * n, 6);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3 x = mesh.nodes[static_cast<std::size_t>(i)] - c;
        for (int a = 0; a < 3; ++a) r(3 * i + a, a) = 1.0;
        r(3 * i + 1, 3) = -x.z();
        r(3 * i + 2, 3) = x.y();
        r(3 * i + 0, 4) = x.z();
        r(3 * i + 2, 4) = -x.x();
        r(3 * i + 0, 5) = -x.y();
        r(3 * i + 1, 5) = x.x();
    }
    for (int j = 0; j < 6; ++j) {
        for (int k = 0; k < j; ++k) r.col(j) -= r.col(k).dot(r.col(j)) * r.col(k);
        r.col(j).normalize();
    }
    return r;
}

// Dense K^+ restricted to loads orthogonal to the rigid modes, by shifting
// the nullspace away: (K + a R R^T)^-1 on range(K).
inline Eigen::MatrixXd dense_pseudo_solve(const iceload::Mesh& mesh, const iceload::SparseMatrix& stiffness,
                                          const Eigen::MatrixXd& f) {
    const Eigen::MatrixXd k = Eigen::MatrixXd(stiffness);
    const Eigen::MatrixXd r = rigid_modes(mesh);
    const double a = k.diagonal().mean();
    const Eigen::MatrixXd shifted = k + a * r * r.transpose();
    const Eigen::MatrixXd pf = f - r * (r.transpose() * f);
    Eigen::MatrixXd u = shifted.ldlt().solve(pf);
    return u - r * (r.transpose() * u);
}

inline iceload::CylinderSpec small_spec() {
    iceload::CylinderSpec s;
    s.angular_resolution = 12;
    s.vertical_resolution = 6;
    s.flange_width = 0.0;
    s.cap_radial_divisions = 1;
    return s;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

inline double rel_max(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return max_abs(a - b) / max_abs(b); }

}  // namespace iceload::testing
