#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "iceload/geometry.hpp"

namespace iceload {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct LameParameters {
    double mu = 0.0;
    double lambda = 0.0;
};

// Isotropic conversion from Young's modulus and Poisson's ratio. Rejects
// E <= 0 and nu outside [0, 0.5).
LameParameters lame_parameters(double youngs_modulus, double poisson_ratio);

struct Material {
    double youngs_modulus = 200e9;
    double poisson_ratio = 0.3;

    LameParameters lame() const { return lame_parameters(youngs_modulus, poisson_ratio); }
};

// How the six zero-energy modes of the traction-only problem are removed.
enum class RigidBodyTreatment {
    // Right-hand sides and solutions are projected onto the orthogonal
    // complement of the rigid-body modes (pseudo-inverse solve).
    Deflate,
    // Six well-conditioned displacement components are held at zero and
    // nothing is projected.
    Pin,
};

// Assembled stiffness K together with a factorization of K restricted to the
// unpinned dofs. Immutable after construction; solve() is safe to call from
// several threads at once.
class StiffnessSystem {
public:
    const SparseMatrix& matrix() const { return *matrix_; }
    // dof_count x 6, orthonormal columns spanning translations and rotations.
    const Eigen::MatrixXd& nullspace() const { return *nullspace_; }
    RigidBodyTreatment treatment() const { return treatment_; }
    const std::array<int, 6>& pinned_dofs() const { return pinned_; }
    std::size_t dof_count() const { return static_cast<std::size_t>(matrix_->rows()); }

    // Removes the rigid-body components of a nodal vector.
    Eigen::VectorXd project(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd project(const Eigen::MatrixXd& v) const;

    Eigen::VectorXd solve(const Eigen::VectorXd& f) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& f) const;

    friend StiffnessSystem assemble_stiffness(const Mesh&, const Material&, RigidBodyTreatment);

private:
    struct Factor;

    StiffnessSystem() = default;

    std::shared_ptr<const SparseMatrix> matrix_;
    std::shared_ptr<const Eigen::MatrixXd> nullspace_;
    std::shared_ptr<const Factor> factor_;
    std::vector<int> free_index_;  // dof -> reduced index, -1 when pinned
    std::array<int, 6> pinned_{};
    RigidBodyTreatment treatment_ = RigidBodyTreatment::Deflate;
};

// Orthonormal rigid-body modes of a node set (translations, then rotations
// about the centroid).
Eigen::MatrixXd rigid_body_modes(const Mesh& mesh);

StiffnessSystem assemble_stiffness(const Mesh& mesh, const Material& material,
                                   RigidBodyTreatment treatment = RigidBodyTreatment::Deflate);

// Gradients of the four barycentric shape functions of a tet (constant).
std::array<Vec3, 4> shape_gradients(const Mesh& mesh, std::size_t tet);

// Directional strain readout. Gauge i's row evaluates t^T eps t with eps the
// small-strain tensor of the element containing the gauge. A gauge that lies
// on a shared element face reads the mean of the elements touching it.
struct StrainObserver {
    SparseMatrix matrix;                          // n_live x dof_count
    std::vector<std::size_t> gauge_index;         // row -> index into the GaugeSet
    std::vector<std::vector<std::size_t>> elements;  // row -> containing tets

    std::size_t rows() const { return gauge_index.size(); }
};

StrainObserver assemble_strain_observer(const Mesh& mesh, const GaugeSet& gauges);

// Tets whose closure contains the point (barycentric tolerance 1e-10).
std::vector<std::size_t> locate_point(const Mesh& mesh, const Vec3& point);

struct LoadOptions {
    // Fault injection for the validation suite: treats positive p_N as
    // pulling outward.
    bool flip_normal_sign = false;
};

// Consistent nodal forces f = D A p for a pressure field on a surface patch.
// Columns are ordered [all p_N, all p_H, all p_V] over patch.node_ids.
struct LoadOperator {
    SparseMatrix matrix;  // dof_count x 3 * n_patch
    std::vector<int> patch_nodes;
    double patch_area = 0.0;

    std::size_t patch_size() const { return patch_nodes.size(); }
};

LoadOperator assemble_surface_load(const Mesh& mesh, const SurfacePatch& patch,
                                   const LoadOptions& options = {});

// Nodal forces from a uniform pressure acting against the true facet normals
// of the given regions (positive pushes into the solid).
Eigen::VectorXd facet_pressure_load(const Mesh& mesh, const std::vector<SurfaceRegion>& regions,
                                    double pressure);

// Net force and net torque (about the origin) of a nodal force vector.
std::pair<Vec3, Vec3> resultant(const Mesh& mesh, const Eigen::VectorXd& forces);

// Dense pressure-to-strain map H = B K^-1 L for the live gauges.
struct ObservationOperator {
    Eigen::MatrixXd matrix;  // n_live x 3 * n_patch
    std::vector<std::size_t> gauge_index;

    std::size_t rows() const { return static_cast<std::size_t>(matrix.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(matrix.cols()); }
};

// Builds H row by row from adjoint solves K w_i = B_i^T, i.e. one solve per
// gauge instead of one per pressure dof.
ObservationOperator build_observation_operator(const StiffnessSystem& system, const StrainObserver& observer,
                                               const LoadOperator& load);

// Displacement for a pressure vector, d = K^-1 L p.
Eigen::VectorXd solve_forward(const StiffnessSystem& system, const LoadOperator& load,
                              const Eigen::VectorXd& pressure);

}  // namespace iceload
