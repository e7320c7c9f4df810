#include "iceload/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "iceload/error.hpp"
#include "iceload/units.hpp"

namespace iceload {

namespace {

constexpr double kTol = 1e-9;

double node_angle(const Vec3& x) { return units::wrap_angle(std::atan2(x.y(), x.x())); }

}  // namespace

Eigen::VectorXd patch_load(const Mesh& mesh, const SurfacePatch& band, const std::vector<PatchSpec>& patches,
                           double outer_radius) {
    const auto n = static_cast<Eigen::Index>(band.node_ids.size());
    Eigen::VectorXd p = Eigen::VectorXd::Zero(3 * n);
    if (!(outer_radius > 0.0)) throw InputError("patch_load: outer radius must be positive");
    for (std::size_t k = 0; k < patches.size(); ++k) {
        const PatchSpec& s = patches[k];
        if (!(s.angular_width > 0.0) || !(s.z_height > 0.0)) {
            throw InputError("patch " + std::to_string(k) + ": width and height must be positive");
        }
        if (!std::isfinite(s.magnitude)) throw InputError("patch " + std::to_string(k) + ": magnitude is not finite");
        const double top = s.z_center - 0.5 * s.z_height;
        const double bottom = s.z_center + 0.5 * s.z_height;
        if (top < band.z_top - kTol || bottom > band.z_bottom + kTol) {
            std::ostringstream msg;
            msg << "patch " << k << " spans depths [" << top << ", " << bottom << "] outside the load band ["
                << band.z_top << ", " << band.z_bottom << "]";
            throw InputError(msg.str());
        }
        const double half_angle = 0.5 * s.angular_width / outer_radius;
        if (half_angle >= units::kPi) throw InputError("patch " + std::to_string(k) + " wraps the whole circumference");
        const Eigen::Index offset = static_cast<Eigen::Index>(s.component) * n;
        int covered = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const Vec3& x = mesh.nodes[static_cast<std::size_t>(band.node_ids[static_cast<std::size_t>(j)])];
            const double dtheta = std::abs(units::wrap_signed(std::atan2(x.y(), x.x()) - s.center_angle));
            const double depth = -x.z();
            if (dtheta <= half_angle + kTol && depth >= top - kTol && depth <= bottom + kTol) {
                p[offset + j] += s.magnitude;
                ++covered;
            }
        }
        if (covered == 0) throw InputError("patch " + std::to_string(k) + " covers no load-band node");
    }
    return p;
}

std::pair<double, double> SyntheticLayout::back_centers() const {
    const double offset = (0.5 * resolved_gap() + 0.5 * back_width) / outer_radius;
    return {units::kPi - offset, units::kPi + offset};
}

std::vector<PatchSpec> synthetic_patches(const SyntheticLayout& layout) {
    if (layout.resolved_gap() < 0.0) throw InputError("back patch gap must be non-negative");
    const auto [lo, hi] = layout.back_centers();
    return {
        {0.0, layout.front_width, layout.z_center, layout.height, layout.front_magnitude, Component::Normal},
        {lo, layout.back_width, layout.z_center, layout.height, layout.back_magnitude, Component::Normal},
        {hi, layout.back_width, layout.z_center, layout.height, layout.back_magnitude, Component::Normal},
    };
}

ObservationSet synthesize_observations(const Eigen::VectorXd& p_true, const Eigen::MatrixXd& h, double noise_std,
                                       std::uint64_t seed, std::vector<Eigen::Index> rows) {
    if (p_true.size() != h.cols()) throw InputError("truth vector does not match H");
    if (!(noise_std >= 0.0)) throw InputError("noise std must be non-negative");
    const Eigen::VectorXd clean = h * p_true;
    ObservationSet obs;
    obs.noise_std = noise_std;
    if (rows.empty()) {
        obs.strains = clean;
    } else {
        obs.strains.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) obs.strains[static_cast<Eigen::Index>(i)] = clean[rows[i]];
    }
    obs.rows = std::move(rows);
    if (noise_std > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, noise_std);
        for (Eigen::Index i = 0; i < obs.strains.size(); ++i) obs.strains[i] += normal(rng);
    }
    return obs;
}

std::vector<ObservationSet> synthesize_series(const Eigen::VectorXd& p_true, const Eigen::MatrixXd& h, double noise_std,
                                              std::uint64_t seed, std::size_t count, double dt) {
    std::vector<ObservationSet> out;
    out.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
        std::uint32_t words[2];
        seq.generate(words, words + 2);
        const std::uint64_t record_seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
        auto obs = synthesize_observations(p_true, h, noise_std, record_seed);
        obs.timestamp = dt * static_cast<double>(r);
        out.push_back(std::move(obs));
    }
    return out;
}

SliceProfile slice_profile(const Mesh& mesh, const SurfacePatch& band, const Eigen::VectorXd& mean,
                           const Eigen::VectorXd& std, const Eigen::VectorXd& truth, double depth) {
    if (depth < band.z_top - kTol || depth > band.z_bottom + kTol) {
        std::ostringstream msg;
        msg << "slice depth " << depth << " lies outside the load band [" << band.z_top << ", " << band.z_bottom << "]";
        throw InputError(msg.str());
    }
    const std::size_t n = band.node_ids.size();
    if (static_cast<std::size_t>(mean.size()) != n || static_cast<std::size_t>(std.size()) != n ||
        static_cast<std::size_t>(truth.size()) != n) {
        throw InputError("slice_profile: field length does not match the band");
    }
    double r_min = std::numeric_limits<double>::infinity();
    for (int id : band.node_ids) {
        const Vec3& x = mesh.nodes[static_cast<std::size_t>(id)];
        r_min = std::min(r_min, std::hypot(x.x(), x.y()));
    }

    struct Entry {
        double theta, depth;
        std::size_t j;
    };
    std::vector<Entry> barrel;
    for (std::size_t j = 0; j < n; ++j) {
        const Vec3& x = mesh.nodes[static_cast<std::size_t>(band.node_ids[j])];
        if (std::hypot(x.x(), x.y()) > r_min * (1.0 + 1e-9)) continue;  // flange underside
        barrel.push_back({node_angle(x), -x.z(), j});
    }
    std::sort(barrel.begin(), barrel.end(), [](const Entry& a, const Entry& b) {
        return a.theta < b.theta - kTol || (std::abs(a.theta - b.theta) <= kTol && a.depth < b.depth);
    });

    SliceProfile profile;
    profile.depth = depth;
    for (std::size_t start = 0; start < barrel.size();) {
        std::size_t end = start + 1;
        while (end < barrel.size() && std::abs(barrel[end].theta - barrel[start].theta) <= kTol) ++end;
        // Bracket the depth within this column.
        std::size_t hi = start;
        while (hi < end && barrel[hi].depth < depth) ++hi;
        std::size_t lo = hi == start ? start : hi - 1;
        if (hi == end) hi = end - 1;
        double w = 0.0;
        if (hi != lo && barrel[hi].depth > barrel[lo].depth) {
            w = std::clamp((depth - barrel[lo].depth) / (barrel[hi].depth - barrel[lo].depth), 0.0, 1.0);
        }
        const auto a = static_cast<Eigen::Index>(barrel[lo].j);
        const auto b = static_cast<Eigen::Index>(barrel[hi].j);
        profile.points.push_back({barrel[start].theta, (1 - w) * mean[a] + w * mean[b], (1 - w) * std[a] + w * std[b],
                                  (1 - w) * truth[a] + w * truth[b]});
        start = end;
    }
    return profile;
}

RecoveryMetrics recovery_metrics(const Mesh& mesh, const SurfacePatch& band, const Eigen::VectorXd& p_true,
                                 const Posterior& post, const std::vector<double>& slice_depths, Component component) {
    const auto n = static_cast<Eigen::Index>(band.node_ids.size());
    if (post.mean.size() != 3 * n || p_true.size() != 3 * n) throw InputError("posterior is not on this load band");
    const Eigen::Index off = static_cast<Eigen::Index>(component) * n;
    const Eigen::VectorXd mean = post.mean.segment(off, n);
    const Eigen::VectorXd sd = post.variance.segment(off, n).cwiseMax(0.0).cwiseSqrt();
    const Eigen::VectorXd truth = p_true.segment(off, n);

    RecoveryMetrics m;
    auto consider = [&](Peak& peak, Eigen::Index j, double theta, double depth) {
        if (peak.node < 0 || mean[j] > peak.value) {
            peak = {mean[j], theta, depth, band.node_ids[static_cast<std::size_t>(j)]};
        }
    };
    double min_mean = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vec3& x = mesh.nodes[static_cast<std::size_t>(band.node_ids[static_cast<std::size_t>(j)])];
        const double theta = node_angle(x);
        const double deg = units::to_deg(theta);
        const double depth = -x.z();
        if (std::abs(units::wrap_signed(theta)) < units::kPi / 2) {
            consider(m.front, j, theta, depth);
        } else {
            consider(m.back, j, theta, depth);
        }
        if (deg >= 90.0 - kTol && deg <= 180.0 + kTol) consider(m.back_lower, j, theta, depth);
        if (deg >= 180.0 - kTol && deg <= 270.0 + kTol) consider(m.back_upper, j, theta, depth);
        min_mean = std::min(min_mean, mean[j]);
    }
    m.max_negative_excursion = -min_mean;
    for (double d : slice_depths) m.slices.push_back(slice_profile(mesh, band, mean, sd, truth, d));
    return m;
}

}  // namespace iceload
