#pragma once

#include <memory>
#include <utility>

#include <Eigen/SparseLU>

#include "fdc/fem.hpp"

namespace fdc {

/// Control triple (volume force, inflow profile, outflow traction).
struct ModelData {
  Eigen::VectorXd f;  // velocity-shaped
  BoundaryField g;    // inflow
  BoundaryField h;    // outflow

  static ModelData zero(const Mesh& mesh);
};

/// Factorized saddle operator [[A, B^T], [B, 0]] with
/// A = nu K + C(u_delta) + (1/eps) R. Immutable after construction; a
/// single factorization serves state and adjoint solves.
class StateOperator {
 public:
  StateOperator(const SystemMatrices& matrices, double nu, double epsilon);

  /// Solve the state system for the given data triple.
  std::pair<VelocityField, PressureField> solve_state(const ModelData& data) const;

  /// Solve the transposed saddle system with right-hand side M * residual.
  std::pair<VelocityField, PressureField> solve_adjoint(const VelocityField& residual) const;

  /// Raw solves with an arbitrary velocity-block right-hand side
  /// (pressure-block right-hand side zero).
  std::pair<Eigen::VectorXd, Eigen::VectorXd> solve(const Eigen::VectorXd& rhs_velocity) const;
  std::pair<Eigen::VectorXd, Eigen::VectorXd> solve_transposed(
      const Eigen::VectorXd& rhs_velocity) const;

  /// Right-hand side of the momentum block, M f + (1/eps) R E g + N h.
  Eigen::VectorXd assemble_rhs(const ModelData& data) const;

  const SystemMatrices& matrices() const { return *matrices_; }
  double nu() const { return nu_; }
  double epsilon() const { return epsilon_; }
  int velocity_size() const { return nv_; }
  int pressure_size() const { return np_; }

 private:
  std::shared_ptr<const SystemMatrices> matrices_;
  double nu_;
  double epsilon_;
  int nv_;
  int np_;
  SparseMat saddle_;
  // SparseLU::transpose() is non-const in Eigen 3.4 even though the
  // transposed solve does not mutate the factorization.
  mutable Eigen::SparseLU<SparseMat> lu_;
};

StateOperator build_state_operator(const SystemMatrices& matrices, double nu, double epsilon);

}  // namespace fdc
