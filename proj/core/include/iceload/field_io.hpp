#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "iceload/experiments.hpp"
#include "iceload/geometry.hpp"
#include "iceload/inference.hpp"

namespace iceload {

// Per-node array attached to a field file. `components` is 1 or 3 and
// values holds node_count * components entries, node-major.
struct NodalField {
    std::string name;
    int components = 1;
    std::vector<double> values;
};

// Legacy VTK ASCII unstructured grid (tets, cell type 10) in the internal
// frame (z up, top at z = 0) with the given point data.
void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<NodalField>& fields,
               const std::string& title = "iceload");
void save_vtk(const std::filesystem::path& path, const Mesh& mesh, const std::vector<NodalField>& fields);

// Scatters band values (blocks N, H, V of length n) to a mesh-sized field
// with zeros off the band.
NodalField band_field(const Mesh& mesh, const SurfacePatch& band, const Eigen::VectorXd& blocks,
                      const std::string& name);
NodalField displacement_field(const Eigen::VectorXd& d, const std::string& name = "displacement");

// node_id,theta_deg,depth_m,mean_N,mean_H,mean_V,std_N,std_H,std_V,prob_nonneg_N
void write_posterior_csv(std::ostream& out, const Mesh& mesh, const SurfacePatch& band, const Posterior& post);
// depth_m,theta_deg,mean_N,std_N,truth_N
void write_slices_csv(std::ostream& out, const std::vector<SliceProfile>& slices);

// node_id,p_N,p_H,p_V (Pa) for band nodes.
void write_load_csv(std::ostream& out, const SurfacePatch& band, const Eigen::VectorXd& p);
// Band nodes absent from the file get zero load. Unknown node ids and
// malformed rows are parse errors.
Eigen::VectorXd read_load_csv(std::istream& in, const SurfacePatch& band, const std::string& source = "<csv>");

// Standard normal CDF.
double normal_cdf(double x);

}  // namespace iceload
