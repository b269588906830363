#include "fdc/solver.hpp"

#include <stdexcept>
#include <vector>

namespace fdc {

ModelData ModelData::zero(const Mesh& mesh) {
  return {Eigen::VectorXd::Zero(velocity_dofs(mesh)),
          BoundaryField::zero(mesh, NodeTag::Inflow),
          BoundaryField::zero(mesh, NodeTag::Outflow)};
}

StateOperator::StateOperator(const SystemMatrices& matrices, double nu, double epsilon)
    : matrices_(std::make_shared<SystemMatrices>(matrices)),
      nu_(nu),
      epsilon_(epsilon),
      nv_(static_cast<int>(matrices.K.rows())),
      np_(static_cast<int>(matrices.B.rows())) {
  if (!(nu > 0.0)) throw std::invalid_argument("build_state_operator: nu must be positive");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("build_state_operator: epsilon must be positive");

  SparseMat A = nu_ * matrices.K + matrices.C + (1.0 / epsilon_) * matrices.R;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nonZeros() + 2 * matrices.B.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMat::InnerIterator it(A, k); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int k = 0; k < matrices.B.outerSize(); ++k)
    for (SparseMat::InnerIterator it(matrices.B, k); it; ++it) {
      trip.emplace_back(nv_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      trip.emplace_back(static_cast<int>(it.col()), nv_ + static_cast<int>(it.row()), it.value());
    }
  saddle_.resize(nv_ + np_, nv_ + np_);
  saddle_.setFromTriplets(trip.begin(), trip.end());
  saddle_.makeCompressed();

  lu_.compute(saddle_);
  if (lu_.info() != Eigen::Success)
    throw std::runtime_error("build_state_operator: saddle matrix factorization failed");
}

Eigen::VectorXd StateOperator::assemble_rhs(const ModelData& data) const {
  const auto& m = *matrices_;
  if (data.f.size() != nv_ || data.g.values.size() != m.E.cols() ||
      data.h.values.size() != m.N.cols())
    throw std::invalid_argument("assemble_rhs: data shapes do not conform");
  return m.M * data.f + (1.0 / epsilon_) * (m.R * (m.E * data.g.values)) + m.N * data.h.values;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> StateOperator::solve(
    const Eigen::VectorXd& rhs_velocity) const {
  if (rhs_velocity.size() != nv_) throw std::invalid_argument("solve: rhs shape mismatch");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv_ + np_);
  rhs.head(nv_) = rhs_velocity;
  // Two steps of iterative refinement: the 1/eps penalty block makes the
  // saddle matrix ill-conditioned enough that a bare solve loses ~6 digits.
  Eigen::VectorXd sol = lu_.solve(rhs);
  for (int step = 0; step < 2; ++step) sol += lu_.solve(rhs - saddle_ * sol);
  return {sol.head(nv_), sol.tail(np_)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> StateOperator::solve_transposed(
    const Eigen::VectorXd& rhs_velocity) const {
  if (rhs_velocity.size() != nv_)
    throw std::invalid_argument("solve_transposed: rhs shape mismatch");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv_ + np_);
  rhs.head(nv_) = rhs_velocity;
  auto lut = lu_.transpose();
  Eigen::VectorXd sol = lut.solve(rhs);
  for (int step = 0; step < 2; ++step)
    sol += lut.solve(rhs - saddle_.transpose() * sol);
  return {sol.head(nv_), sol.tail(np_)};
}

std::pair<VelocityField, PressureField> StateOperator::solve_state(const ModelData& data) const {
  auto [u, p] = solve(assemble_rhs(data));
  return {VelocityField{std::move(u)}, PressureField{std::move(p)}};
}

std::pair<VelocityField, PressureField> StateOperator::solve_adjoint(
    const VelocityField& residual) const {
  if (residual.coeffs.size() != nv_)
    throw std::invalid_argument("solve_adjoint: residual shape mismatch");
  auto [z, zeta] = solve_transposed(matrices_->M * residual.coeffs);
  return {VelocityField{std::move(z)}, PressureField{std::move(zeta)}};
}

StateOperator build_state_operator(const SystemMatrices& matrices, double nu, double epsilon) {
  return StateOperator(matrices, nu, epsilon);
}

}  // namespace fdc
