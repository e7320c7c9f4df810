#include "iceload/elasticity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "iceload/error.hpp"

namespace iceload {

struct StiffnessSystem::Factor {
    Eigen::SimplicialLLT<SparseMatrix> llt;
};

namespace {

const Vec3& node_at(const Mesh& mesh, int i) { return mesh.nodes[static_cast<std::size_t>(i)]; }

std::array<double, 4> barycentric(const Mesh& mesh, const std::array<int, 4>& t, const Vec3& p) {
    const Vec3& x0 = node_at(mesh, t[0]);
    Eigen::Matrix3d j;
    j.col(0) = node_at(mesh, t[1]) - x0;
    j.col(1) = node_at(mesh, t[2]) - x0;
    j.col(2) = node_at(mesh, t[3]) - x0;
    const Vec3 l = j.partialPivLu().solve(p - x0);
    return {1.0 - l.sum(), l[0], l[1], l[2]};
}

}  // namespace

LameParameters lame_parameters(double youngs_modulus, double poisson_ratio) {
    if (!(youngs_modulus > 0.0)) throw InputError("Young's modulus must be positive");
    if (!(poisson_ratio >= 0.0)) throw InputError("Poisson's ratio must be non-negative");
    if (!(poisson_ratio < 0.5)) throw InputError("Poisson's ratio must be below 0.5 (incompressible limit unsupported)");
    const double mu = youngs_modulus / (2.0 * (1.0 + poisson_ratio));
    const double lambda = youngs_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
    return {mu, lambda};
}

Eigen::MatrixXd rigid_body_modes(const Mesh& mesh) {
    const auto n = static_cast<Eigen::Index>(mesh.nodes.size());
    Vec3 c = Vec3::Zero();
    for (const auto& x : mesh.nodes) c += x;
    c /= static_cast<double>(n);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(3 * n, 6);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3 x = mesh.nodes[static_cast<std::size_t>(i)] - c;
        for (int k = 0; k < 3; ++k) r(3 * i + k, k) = 1.0;
        // e_k cross x
        r(3 * i + 1, 3) = -x.z();
        r(3 * i + 2, 3) = x.y();
        r(3 * i + 0, 4) = x.z();
        r(3 * i + 2, 4) = -x.x();
        r(3 * i + 0, 5) = -x.y();
        r(3 * i + 1, 5) = x.x();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(r);
    return qr.householderQ() * Eigen::MatrixXd::Identity(3 * n, 6);
}

std::array<Vec3, 4> shape_gradients(const Mesh& mesh, std::size_t tet) {
    const auto& t = mesh.tets[tet];
    const Vec3& x0 = node_at(mesh, t[0]);
    Eigen::Matrix3d j;
    j.col(0) = node_at(mesh, t[1]) - x0;
    j.col(1) = node_at(mesh, t[2]) - x0;
    j.col(2) = node_at(mesh, t[3]) - x0;
    const Eigen::Matrix3d inv = j.inverse();
    std::array<Vec3, 4> g;
    g[1] = inv.row(0).transpose();
    g[2] = inv.row(1).transpose();
    g[3] = inv.row(2).transpose();
    g[0] = -(g[1] + g[2] + g[3]);
    return g;
}

Eigen::VectorXd StiffnessSystem::project(const Eigen::VectorXd& v) const {
    const auto& r = *nullspace_;
    return v - r * (r.transpose() * v);
}

Eigen::MatrixXd StiffnessSystem::project(const Eigen::MatrixXd& v) const {
    const auto& r = *nullspace_;
    return v - r * (r.transpose() * v);
}

Eigen::MatrixXd StiffnessSystem::solve(const Eigen::MatrixXd& f) const {
    if (f.rows() != static_cast<Eigen::Index>(dof_count())) {
        throw InputError("right-hand side has the wrong number of dofs");
    }
    if (!f.allFinite()) throw InputError("right-hand side contains non-finite values");
    const bool deflate = treatment_ == RigidBodyTreatment::Deflate;
    const Eigen::MatrixXd rhs = deflate ? project(f) : f;
    const auto n_free = factor_->llt.rows();
    Eigen::MatrixXd reduced(n_free, rhs.cols());
    for (std::size_t d = 0; d < free_index_.size(); ++d) {
        if (free_index_[d] >= 0) reduced.row(free_index_[d]) = rhs.row(static_cast<Eigen::Index>(d));
    }
    const Eigen::MatrixXd sol = factor_->llt.solve(reduced);
    if (factor_->llt.info() != Eigen::Success) throw NumericalError("stiffness solve failed");
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(rhs.rows(), rhs.cols());
    for (std::size_t d = 0; d < free_index_.size(); ++d) {
        if (free_index_[d] >= 0) u.row(static_cast<Eigen::Index>(d)) = sol.row(free_index_[d]);
    }
    return deflate ? project(u) : u;
}

Eigen::VectorXd StiffnessSystem::solve(const Eigen::VectorXd& f) const {
    return solve(Eigen::MatrixXd(f)).col(0);
}

StiffnessSystem assemble_stiffness(const Mesh& mesh, const Material& material, RigidBodyTreatment treatment) {
    const LameParameters lame = material.lame();
    const auto n_dof = static_cast<Eigen::Index>(mesh.dof_count());
    if (n_dof == 0) throw InputError("cannot assemble stiffness on an empty mesh");

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.tets.size() * 144);
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto& t = mesh.tets[e];
        const double vol = tet_signed_volume(node_at(mesh, t[0]), node_at(mesh, t[1]), node_at(mesh, t[2]),
                                             node_at(mesh, t[3]));
        if (!(vol > 0.0)) {
            throw NumericalError("inverted or degenerate element: tet " + std::to_string(e));
        }
        const auto g = shape_gradients(mesh, e);
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                const double gg = g[static_cast<std::size_t>(a)].dot(g[static_cast<std::size_t>(b)]);
                for (int i = 0; i < 3; ++i) {
                    for (int j = 0; j < 3; ++j) {
                        double k = lame.lambda * g[static_cast<std::size_t>(a)][i] * g[static_cast<std::size_t>(b)][j] +
                                   lame.mu * g[static_cast<std::size_t>(a)][j] * g[static_cast<std::size_t>(b)][i];
                        if (i == j) k += lame.mu * gg;
                        trip.emplace_back(3 * t[static_cast<std::size_t>(a)] + i, 3 * t[static_cast<std::size_t>(b)] + j,
                                          vol * k);
                    }
                }
            }
        }
    }
    auto k = std::make_shared<SparseMatrix>(n_dof, n_dof);
    k->setFromTriplets(trip.begin(), trip.end());
    k->makeCompressed();

    StiffnessSystem sys;
    sys.treatment_ = treatment;
    sys.nullspace_ = std::make_shared<const Eigen::MatrixXd>(rigid_body_modes(mesh));

    // Three far-apart nodes provide nine candidate dofs; column-pivoted QR on
    // their rigid-mode rows picks six that fix every rigid motion.
    Vec3 c = Vec3::Zero();
    for (const auto& x : mesh.nodes) c += x;
    c /= static_cast<double>(mesh.nodes.size());
    auto farthest = [&](auto&& dist) {
        std::size_t best = 0;
        double best_d = -1.0;
        for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
            const double d = dist(mesh.nodes[i]);
            if (d > best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    };
    const std::size_t na = farthest([&](const Vec3& x) { return (x - c).squaredNorm(); });
    const Vec3 xa = mesh.nodes[na];
    const std::size_t nb = farthest([&](const Vec3& x) { return (x - xa).squaredNorm(); });
    const Vec3 ab = (mesh.nodes[nb] - xa).normalized();
    const std::size_t nc = farthest([&](const Vec3& x) { return (x - xa).cross(ab).squaredNorm(); });
    std::array<int, 9> candidates{};
    Eigen::Matrix<double, 6, 9> rows;
    {
        std::size_t k_idx = 0;
        for (std::size_t node : {na, nb, nc}) {
            for (int comp = 0; comp < 3; ++comp, ++k_idx) {
                const int dof = static_cast<int>(3 * node) + comp;
                candidates[k_idx] = dof;
                rows.col(static_cast<Eigen::Index>(k_idx)) = sys.nullspace_->row(dof).transpose();
            }
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 6, 9>> piv(rows);
    if (piv.rank() < 6) throw NumericalError("mesh nodes do not constrain all rigid-body modes");
    for (int i = 0; i < 6; ++i) {
        sys.pinned_[static_cast<std::size_t>(i)] = candidates[static_cast<std::size_t>(piv.colsPermutation().indices()[i])];
    }
    std::sort(sys.pinned_.begin(), sys.pinned_.end());

    sys.free_index_.assign(static_cast<std::size_t>(n_dof), 0);
    for (int d : sys.pinned_) sys.free_index_[static_cast<std::size_t>(d)] = -1;
    int next = 0;
    for (auto& f : sys.free_index_) {
        if (f == 0) f = next++;
    }
    std::vector<Eigen::Triplet<double>> reduced;
    reduced.reserve(static_cast<std::size_t>(k->nonZeros()));
    for (Eigen::Index col = 0; col < k->outerSize(); ++col) {
        const int fc = sys.free_index_[static_cast<std::size_t>(col)];
        if (fc < 0) continue;
        for (SparseMatrix::InnerIterator it(*k, col); it; ++it) {
            const int fr = sys.free_index_[static_cast<std::size_t>(it.row())];
            if (fr >= 0) reduced.emplace_back(fr, fc, it.value());
        }
    }
    SparseMatrix kff(next, next);
    kff.setFromTriplets(reduced.begin(), reduced.end());

    auto factor = std::make_shared<StiffnessSystem::Factor>();
    factor->llt.compute(kff);
    if (factor->llt.info() != Eigen::Success) {
        throw NumericalError("stiffness factorization failed (matrix not positive definite after pinning)");
    }
    sys.factor_ = std::move(factor);
    sys.matrix_ = std::move(k);
    return sys;
}

std::vector<std::size_t> locate_point(const Mesh& mesh, const Vec3& point) {
    constexpr double kTol = 1e-10;
    std::vector<std::size_t> hits;
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto& t = mesh.tets[e];
        Vec3 lo = node_at(mesh, t[0]), hi = lo;
        for (int v : t) {
            lo = lo.cwiseMin(node_at(mesh, v));
            hi = hi.cwiseMax(node_at(mesh, v));
        }
        const double pad = 1e-9 * (hi - lo).norm();
        if ((point.array() < lo.array() - pad).any() || (point.array() > hi.array() + pad).any()) continue;
        const auto l = barycentric(mesh, t, point);
        if (*std::min_element(l.begin(), l.end()) >= -kTol) hits.push_back(e);
    }
    return hits;
}

StrainObserver assemble_strain_observer(const Mesh& mesh, const GaugeSet& gauges) {
    StrainObserver obs;
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t gi = 0; gi < gauges.gauges.size(); ++gi) {
        const auto& gauge = gauges.gauges[gi];
        if (!gauge.live) continue;
        const auto hits = locate_point(mesh, gauge.position);
        if (hits.empty()) throw InputError("gauge " + gauge.id + " lies outside the mesh");
        const auto row = static_cast<int>(obs.gauge_index.size());
        const Vec3 dir = gauge.direction_vector();
        const double w = 1.0 / static_cast<double>(hits.size());
        for (std::size_t e : hits) {
            const auto g = shape_gradients(mesh, e);
            for (int a = 0; a < 4; ++a) {
                const double s = dir.dot(g[static_cast<std::size_t>(a)]) * w;
                for (int i = 0; i < 3; ++i) {
                    trip.emplace_back(row, 3 * mesh.tets[e][static_cast<std::size_t>(a)] + i, dir[i] * s);
                }
            }
        }
        obs.gauge_index.push_back(gi);
        obs.elements.push_back(hits);
    }
    obs.matrix.resize(static_cast<Eigen::Index>(obs.gauge_index.size()), static_cast<Eigen::Index>(mesh.dof_count()));
    obs.matrix.setFromTriplets(trip.begin(), trip.end());
    obs.matrix.makeCompressed();
    return obs;
}

LoadOperator assemble_surface_load(const Mesh& mesh, const SurfacePatch& patch, const LoadOptions& options) {
    if (patch.node_ids.empty()) throw InputError("surface patch is empty");
    const auto n_p = static_cast<Eigen::Index>(patch.node_ids.size());
    std::vector<int> local(mesh.nodes.size(), -1);
    for (Eigen::Index j = 0; j < n_p; ++j) {
        const int node = patch.node_ids[static_cast<std::size_t>(j)];
        if (node < 0 || static_cast<std::size_t>(node) >= mesh.nodes.size()) throw InputError("patch node out of range");
        local[static_cast<std::size_t>(node)] = static_cast<int>(j);
    }

    std::vector<Frame> frames;
    frames.reserve(patch.node_ids.size());
    for (int node : patch.node_ids) {
        const auto& x = node_at(mesh, node);
        if (std::hypot(x.x(), x.y()) < 1e-12) throw InputError("patch node on the axis has no barrel frame");
        frames.push_back(frame_at_angle(std::atan2(x.y(), x.x())));
    }
    const double normal_sign = options.flip_normal_sign ? -1.0 : 1.0;

    LoadOperator load;
    load.patch_nodes = patch.node_ids;
    std::vector<char> covered(patch.node_ids.size(), 0);
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& tri : mesh.surface_tris) {
        const bool barrel = tri.region == SurfaceRegion::ExteriorBarrel;
        const bool flange = patch.includes_flange_underside && tri.region == SurfaceRegion::FlangeUnderside;
        if (!barrel && !flange) continue;
        std::array<int, 3> loc{};
        bool inside = true;
        for (std::size_t k = 0; k < 3; ++k) {
            loc[k] = local[static_cast<std::size_t>(tri.nodes[k])];
            inside = inside && loc[k] >= 0;
        }
        if (!inside) continue;
        const Vec3& a = node_at(mesh, tri.nodes[0]);
        const Vec3& b = node_at(mesh, tri.nodes[1]);
        const Vec3& c = node_at(mesh, tri.nodes[2]);
        const double area = 0.5 * (b - a).cross(c - a).norm();
        load.patch_area += area;
        // Exact linear-triangle surface mass matrix: area/12 * (1 + delta_ij).
        for (std::size_t i = 0; i < 3; ++i) {
            covered[static_cast<std::size_t>(loc[i])] = 1;
            for (std::size_t j = 0; j < 3; ++j) {
                const double m = area / 12.0 * (i == j ? 2.0 : 1.0);
                const auto& fr = frames[static_cast<std::size_t>(loc[j])];
                const std::array<Vec3, 3> cols = {normal_sign * fr.a_normal(), fr.a_horizontal(), fr.a_vertical()};
                for (int comp = 0; comp < 3; ++comp) {
                    for (int d = 0; d < 3; ++d) {
                        const double v = m * cols[static_cast<std::size_t>(comp)][d];
                        if (v != 0.0) trip.emplace_back(3 * tri.nodes[i] + d, comp * n_p + loc[j], v);
                    }
                }
            }
        }
    }
    for (std::size_t j = 0; j < covered.size(); ++j) {
        if (!covered[j]) {
            throw InputError("patch node " + std::to_string(patch.node_ids[j]) +
                             " has no adjacent surface triangle inside the patch");
        }
    }
    load.matrix.resize(static_cast<Eigen::Index>(mesh.dof_count()), 3 * n_p);
    load.matrix.setFromTriplets(trip.begin(), trip.end());
    load.matrix.makeCompressed();
    return load;
}

Eigen::VectorXd facet_pressure_load(const Mesh& mesh, const std::vector<SurfaceRegion>& regions, double pressure) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
    for (const auto& tri : mesh.surface_tris) {
        if (std::find(regions.begin(), regions.end(), tri.region) == regions.end()) continue;
        const Vec3& a = node_at(mesh, tri.nodes[0]);
        const Vec3& b = node_at(mesh, tri.nodes[1]);
        const Vec3& c = node_at(mesh, tri.nodes[2]);
        // (b - a) x (c - a) = 2 * area * outward normal.
        const Vec3 share = -pressure * (b - a).cross(c - a) / 6.0;
        for (int v : tri.nodes) f.segment<3>(3 * v) += share;
    }
    return f;
}

std::pair<Vec3, Vec3> resultant(const Mesh& mesh, const Eigen::VectorXd& forces) {
    Vec3 force = Vec3::Zero(), torque = Vec3::Zero();
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const Vec3 fi = forces.segment<3>(static_cast<Eigen::Index>(3 * i));
        force += fi;
        torque += mesh.nodes[i].cross(fi);
    }
    return {force, torque};
}

ObservationOperator build_observation_operator(const StiffnessSystem& system, const StrainObserver& observer,
                                               const LoadOperator& load) {
    if (observer.matrix.cols() != static_cast<Eigen::Index>(system.dof_count()) ||
        load.matrix.rows() != static_cast<Eigen::Index>(system.dof_count())) {
        throw InputError("observer, load operator and stiffness have incompatible dimensions");
    }
    // K^+ is symmetric in both rigid-body treatments, so H = (K^+ B^T)^T L.
    const Eigen::MatrixXd bt = Eigen::MatrixXd(observer.matrix.transpose());
    const Eigen::MatrixXd adjoint = system.solve(bt);
    ObservationOperator h;
    h.matrix = (load.matrix.transpose() * adjoint).transpose();
    h.gauge_index = observer.gauge_index;
    if (!h.matrix.allFinite()) throw NumericalError("observation operator has non-finite entries");
    return h;
}

Eigen::VectorXd solve_forward(const StiffnessSystem& system, const LoadOperator& load, const Eigen::VectorXd& pressure) {
    if (pressure.size() != load.matrix.cols()) throw InputError("pressure vector has the wrong length");
    if (!pressure.allFinite()) throw InputError("pressure vector contains non-finite values");
    return system.solve(Eigen::VectorXd(load.matrix * pressure));
}

}  // namespace iceload
