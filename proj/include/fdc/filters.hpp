#pragma once

#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fdc/solver.hpp"

namespace fdc {

/// One row of a filter-comparison table. Unavailable entries are NaN.
struct FilterReport {
  std::string method;
  double alpha = 0.0;
  double residual_l2 = 0.0;
  /// L3 data residual; the norm in which the noise level delta is calibrated
  /// and therefore the quantity thresholded by the discrepancy rule. Only
  /// computed when the problem carries a mesh, NaN otherwise.
  double residual_l3 = std::numeric_limits<double>::quiet_NaN();
  double err_u_l2 = 0.0;
  double err_u_h1 = 0.0;
  double err_p_l2 = 0.0;
  double div_h = 0.0;
  int iters = 0;
  double seconds = 0.0;
};

struct FdcProblem {
  const StateOperator* op = nullptr;
  const Mesh* mesh = nullptr;  // optional; enables the L3 residual
  ModelData priors;            // f*, g*, h*
  VelocityField data;          // u_delta
  double alpha = 0.0;
  double cg_tol = 1e-10;
  int cg_max_iters = 500;
};

struct FdcSolution {
  VelocityField u;
  PressureField p;
  ModelData controls;
  FilterReport report;
};

class IterationLimitError : public std::runtime_error {
 public:
  IterationLimitError(const std::string& what, FdcSolution last);
  const FdcSolution& last_iterate() const { return *last_; }

 private:
  std::shared_ptr<FdcSolution> last_;
};

class NoAdmissibleAlphaError : public std::runtime_error {
 public:
  NoAdmissibleAlphaError(const std::string& what, std::vector<std::pair<double, double>> trace);
  /// (alpha, residual) pairs for every k that was tried.
  const std::vector<std::pair<double, double>>& residual_trace() const { return trace_; }

 private:
  std::vector<std::pair<double, double>> trace_;
};

/// Regularized normal equations (M + alpha K) u = M u_delta.
VelocityField smoothing_filter(const SystemMatrices& matrices, const VelocityField& u_delta,
                               double alpha);

/// Divergence-constrained smoothing; the multiplier is returned as the
/// pressure component.
std::pair<VelocityField, PressureField> solenoidal_filter(const SystemMatrices& matrices,
                                                          const VelocityField& u_delta,
                                                          double alpha);

/// Reduced-space preconditioned CG on the controls (f, g, h); the state
/// factorization of the problem operator is reused across all iterations.
/// warm_start, when given, seeds the CG iteration.
FdcSolution fdc_filter(const FdcProblem& problem, const ModelData* warm_start = nullptr);

/// Gradient of the reduced objective at the given controls: one state
/// solve plus one adjoint solve.
ModelData reduced_gradient(const FdcProblem& problem, const ModelData& controls);

/// Objective value J_alpha at the given controls.
double fdc_objective(const FdcProblem& problem, const ModelData& controls);

/// M-norm of u - u_delta.
double data_residual(const StateOperator& op, const VelocityField& u, const VelocityField& u_delta);

struct DiscrepancyResult {
  double alpha = 0.0;
  FdcSolution solution;
  std::vector<std::pair<double, double>> trace;  // (alpha, L3 residual) per k
};

/// Walks alpha = alpha0 * 2^-k, k = 0, 1, ... and returns the first
/// (largest) alpha whose data residual is <= tau * delta. The residual is
/// measured in L3, the norm in which delta calibrates the noise (the rule is
/// only meaningful when both sides use the same norm), so the problem must
/// carry a mesh.
DiscrepancyResult discrepancy_select(const FdcProblem& problem, double delta, double tau,
                                     double alpha0, int max_k = 40);

/// One-shot solve of the full optimality system with a sparse direct
/// factorization; cross-check for fdc_filter.
FdcSolution solve_full_kkt(const FdcProblem& problem);

/// The sparse symmetric optimality matrix used by solve_full_kkt, with
/// unknown layout (u, p, f, g, h, adjoint velocity, adjoint pressure).
SparseMat build_kkt_matrix(const FdcProblem& problem);

}  // namespace fdc
