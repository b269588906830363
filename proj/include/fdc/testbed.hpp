#pragma once

#include <cstdint>
#include <vector>

#include "fdc/fem.hpp"
#include "fdc/solver.hpp"

namespace fdc {

/// Plane Poiseuille flow in the channel (0,L) x (0,H).
struct PoiseuilleCase {
  double length = 5.0;
  double height = 1.0;
  double nu = 0.01;
  double p0 = 1.0;
  double pL = 0.0;

  Eigen::Vector2d velocity(double x, double y) const;
  Eigen::Matrix2d velocity_gradient(double x, double y) const;
  double pressure(double x, double y) const;

  /// Exact data triple (f = 0, inflow profile, outflow traction) that the
  /// Poiseuille pair satisfies in the weak formulation.
  ModelData exact_data(const Mesh& mesh) const;
};

struct NoiseSpec {
  double delta = 0.0;
  std::uint64_t seed = 0;
};

/// Adds i.i.d. standard normal perturbations at the P1 nodal dofs and
/// rescales the perturbation so its L^3(Omega) norm equals delta.
VelocityField add_noise(const Mesh& mesh, const VelocityField& clean, const NoiseSpec& spec);

double norm_l2(const Mesh& mesh, const VelocityField& v);
double norm_l3(const Mesh& mesh, const VelocityField& v);
double norm_h1(const Mesh& mesh, const VelocityField& v);

/// Misspecified force prior f* with ||f*||_{L2} = magnitude, used by the
/// model-error experiments. The profile is the curl of a stream function
/// vanishing on the boundary, so it has no gradient component in the
/// Helmholtz sense: a (partly) gradient force would be absorbed by the
/// pressure, invisible in the velocity data and uncorrectable by any filter.
VelocityField force_prior_offset(const Mesh& mesh, double magnitude);

struct ErrorNorms {
  double err_u_l2 = 0.0;
  double err_u_h1 = 0.0;
  double err_p_l2 = 0.0;
  double div_h = 0.0;
};

/// Errors against the analytic reference, evaluated by quadrature; div_h is
/// the pressure-space L^2 norm of the discrete divergence Mp^{-1} B u.
/// Pass p = nullptr when the method produces no pressure (err_p_l2 = NaN).
ErrorNorms error_norms(const Mesh& mesh, const SystemMatrices& matrices, const VelocityField& u,
                       const PressureField* p, const PoiseuilleCase& reference);

double discrete_divergence_norm(const SystemMatrices& matrices, const VelocityField& u);

struct LinearizationRow {
  int mesh_ny = 0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  double err_u_h1 = 0.0;
  double err_p_l2 = 0.0;
};

/// Solves the linearized model with exact data and noisy convecting field
/// for every (mesh, delta) cell of the ladder.
std::vector<LinearizationRow> linearization_experiment(const std::vector<int>& ny_ladder,
                                                       const std::vector<double>& deltas,
                                                       std::uint64_t seed, double nu = 0.01,
                                                       double epsilon = 1e-8);

}  // namespace fdc
