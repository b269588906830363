#pragma once

#include <functional>
#include <utility>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fdc/mesh.hpp"

namespace fdc {

using SparseMat = Eigen::SparseMatrix<double>;

/// Velocity in the Mini space: per component, P1 nodal values followed by
/// one cubic-bubble coefficient per triangle; all x-dofs then all y-dofs.
struct VelocityField {
  Eigen::VectorXd coeffs;

  static VelocityField zero(const Mesh& mesh);
  int size() const { return static_cast<int>(coeffs.size()); }
};

/// P1 nodal pressure.
struct PressureField {
  Eigen::VectorXd coeffs;

  static PressureField zero(const Mesh& mesh);
};

/// Trace data on the inflow or outflow boundary: one value per component
/// per boundary node of that tag, x-components first.
struct BoundaryField {
  NodeTag tag = NodeTag::Inflow;
  Eigen::VectorXd values;

  static BoundaryField zero(const Mesh& mesh, NodeTag tag);
};

/// Number of scalar velocity dofs per component (nodes + bubbles).
inline int velocity_dofs_per_component(const Mesh& mesh) {
  return mesh.num_nodes() + mesh.num_triangles();
}
inline int velocity_dofs(const Mesh& mesh) { return 2 * velocity_dofs_per_component(mesh); }

/// All sparse operators of the discrete model for a fixed convecting field.
struct SystemMatrices {
  SparseMat K;   // vector Laplacian on the Mini space
  SparseMat M;   // velocity mass
  SparseMat Mp;  // pressure mass
  SparseMat C;   // skew-symmetric convection for the given convecting field
  SparseMat B;   // discrete divergence, pressure rows x velocity columns
  SparseMat R;   // boundary mass on inflow + wall (penalty Dirichlet)
  SparseMat E;   // extension by zero of inflow trace dofs
  SparseMat N;   // outflow boundary mass, trace dofs to velocity dofs
  SparseMat G;   // inflow H^1_0 Gramian
  SparseMat H;   // outflow L^2 Gramian
};

SparseMat assemble_stiffness(const Mesh& mesh);
std::pair<SparseMat, SparseMat> assemble_mass(const Mesh& mesh);  // (M, Mp)
SparseMat assemble_convection(const Mesh& mesh, const VelocityField& w);
SparseMat assemble_divergence(const Mesh& mesh);

struct BoundaryMatrices {
  SparseMat R, E, N, G, H;
};
BoundaryMatrices assemble_boundary(const Mesh& mesh);

/// Assembles everything for the convecting field w.
SystemMatrices assemble_system(const Mesh& mesh, const VelocityField& w);

/// Nodal interpolation into the Mini space (bubble coefficients zero).
VelocityField interpolate(const Mesh& mesh,
                          const std::function<Eigen::Vector2d(double, double)>& fn);
PressureField interpolate_pressure(const Mesh& mesh,
                                   const std::function<double(double, double)>& fn);

/// Inflow/outflow trace of an analytic profile at the boundary nodes.
BoundaryField interpolate_boundary(const Mesh& mesh, NodeTag tag,
                                   const std::function<Eigen::Vector2d(double, double)>& fn);

/// Evaluation helpers for the Mini representation on one triangle at
/// barycentric coordinates (l1,l2,l3).
Eigen::Vector2d eval_velocity(const Mesh& mesh, const VelocityField& v, int tri, double l1,
                              double l2, double l3);
Eigen::Matrix2d eval_velocity_gradient(const Mesh& mesh, const VelocityField& v, int tri,
                                       double l1, double l2, double l3);
double eval_pressure(const Mesh& mesh, const PressureField& p, int tri, double l1, double l2,
                     double l3);

}  // namespace fdc
