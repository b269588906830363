#include "fdc/filters.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "fdc/testbed.hpp"

namespace fdc {

namespace {

double residual_l3_or_nan(const FdcProblem& problem, const VelocityField& u) {
  if (!problem.mesh) return std::numeric_limits<double>::quiet_NaN();
  return norm_l3(*problem.mesh, VelocityField{u.coeffs - problem.data.coeffs});
}

}  // namespace

IterationLimitError::IterationLimitError(const std::string& what, FdcSolution last)
    : std::runtime_error(what), last_(std::make_shared<FdcSolution>(std::move(last))) {}

NoAdmissibleAlphaError::NoAdmissibleAlphaError(const std::string& what,
                                               std::vector<std::pair<double, double>> trace)
    : std::runtime_error(what), trace_(std::move(trace)) {}

VelocityField smoothing_filter(const SystemMatrices& matrices, const VelocityField& u_delta,
                               double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("smoothing_filter: alpha must be nonnegative");
  if (u_delta.coeffs.size() != matrices.M.rows())
    throw std::invalid_argument("smoothing_filter: field shape mismatch");
  if (alpha == 0.0) return u_delta;  // exact identity, skip the roundoff of a solve
  SparseMat A = matrices.M + alpha * matrices.K;
  Eigen::SimplicialLDLT<SparseMat> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("smoothing_filter: factorization failed");
  return {ldlt.solve(matrices.M * u_delta.coeffs)};
}

std::pair<VelocityField, PressureField> solenoidal_filter(const SystemMatrices& matrices,
                                                          const VelocityField& u_delta,
                                                          double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("solenoidal_filter: alpha must be nonnegative");
  const int nv = static_cast<int>(matrices.M.rows());
  const int np = static_cast<int>(matrices.B.rows());
  if (u_delta.coeffs.size() != nv)
    throw std::invalid_argument("solenoidal_filter: field shape mismatch");

  SparseMat A = matrices.M + alpha * matrices.K;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nonZeros() + 2 * matrices.B.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMat::InnerIterator it(A, k); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int k = 0; k < matrices.B.outerSize(); ++k)
    for (SparseMat::InnerIterator it(matrices.B, k); it; ++it) {
      trip.emplace_back(nv + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      trip.emplace_back(static_cast<int>(it.col()), nv + static_cast<int>(it.row()), it.value());
    }
  SparseMat saddle(nv + np, nv + np);
  saddle.setFromTriplets(trip.begin(), trip.end());

  Eigen::SparseLU<SparseMat> lu(saddle);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solenoidal_filter: factorization failed");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + np);
  rhs.head(nv) = matrices.M * u_delta.coeffs;
  Eigen::VectorXd sol = lu.solve(rhs);
  return {VelocityField{sol.head(nv)}, PressureField{sol.tail(np)}};
}

double data_residual(const StateOperator& op, const VelocityField& u,
                     const VelocityField& u_delta) {
  Eigen::VectorXd d = u.coeffs - u_delta.coeffs;
  return std::sqrt(d.dot(op.matrices().M * d));
}

namespace {

/// Control space (f, g, h) with the block-Gramian inner product; carries
/// the factorizations used by the CG preconditioner.
class ControlSpace {
 public:
  explicit ControlSpace(const StateOperator& op)
      : op_(op),
        nf_(op.velocity_size()),
        ng_(static_cast<int>(op.matrices().G.rows())),
        nh_(static_cast<int>(op.matrices().H.rows())) {
    mass_.compute(op.matrices().M);
    gram_g_.compute(op.matrices().G);
    gram_h_.compute(op.matrices().H);
    if (mass_.info() != Eigen::Success || gram_g_.info() != Eigen::Success ||
        gram_h_.info() != Eigen::Success)
      throw std::runtime_error("fdc_filter: Gramian factorization failed");
  }

  int size() const { return nf_ + ng_ + nh_; }

  Eigen::VectorXd pack(const ModelData& d) const {
    if (d.f.size() != nf_ || d.g.values.size() != ng_ || d.h.values.size() != nh_)
      throw std::invalid_argument("fdc_filter: control shapes do not conform");
    Eigen::VectorXd c(size());
    c << d.f, d.g.values, d.h.values;
    return c;
  }

  ModelData unpack(const Eigen::VectorXd& c) const {
    ModelData d;
    d.f = c.head(nf_);
    d.g = {NodeTag::Inflow, c.segment(nf_, ng_)};
    d.h = {NodeTag::Outflow, c.tail(nh_)};
    return d;
  }

  Eigen::VectorXd gram_apply(const Eigen::VectorXd& c) const {
    const auto& m = op_.matrices();
    Eigen::VectorXd out(size());
    out.head(nf_) = m.M * c.head(nf_);
    out.segment(nf_, ng_) = m.G * c.segment(nf_, ng_);
    out.tail(nh_) = m.H * c.tail(nh_);
    return out;
  }

  Eigen::VectorXd gram_solve(const Eigen::VectorXd& c) const {
    Eigen::VectorXd out(size());
    out.head(nf_) = mass_.solve(c.head(nf_));
    out.segment(nf_, ng_) = gram_g_.solve(c.segment(nf_, ng_));
    out.tail(nh_) = gram_h_.solve(c.tail(nh_));
    return out;
  }

  /// Velocity part of the state solve with controls c.
  Eigen::VectorXd forward(const Eigen::VectorXd& c) const {
    return op_.solve(momentum_rhs(c)).first;
  }

  /// T^T M r: adjoint solve followed by the control-space pullback.
  Eigen::VectorXd pullback(const Eigen::VectorXd& r) const {
    const auto& m = op_.matrices();
    Eigen::VectorXd z = op_.solve_transposed(m.M * r).first;
    Eigen::VectorXd out(size());
    out.head(nf_) = m.M * z;
    out.segment(nf_, ng_) = (1.0 / op_.epsilon()) * (m.E.transpose() * (m.R * z));
    out.tail(nh_) = m.N.transpose() * z;
    return out;
  }

  Eigen::VectorXd momentum_rhs(const Eigen::VectorXd& c) const {
    const auto& m = op_.matrices();
    return m.M * c.head(nf_) +
           (1.0 / op_.epsilon()) * (m.R * (m.E * c.segment(nf_, ng_))) +
           m.N * c.tail(nh_);
  }

  const StateOperator& op() const { return op_; }

 private:
  const StateOperator& op_;
  int nf_, ng_, nh_;
  Eigen::SimplicialLDLT<SparseMat> mass_;
  Eigen::SimplicialLDLT<SparseMat> gram_g_;
  Eigen::SimplicialLDLT<SparseMat> gram_h_;
};

FdcSolution make_solution(const ControlSpace& cs, const FdcProblem& problem,
                          const Eigen::VectorXd& c, int iters, double seconds) {
  FdcSolution sol;
  sol.controls = cs.unpack(c);
  auto [u, p] = problem.op->solve_state(sol.controls);
  sol.u = std::move(u);
  sol.p = std::move(p);
  sol.report.method = "fdc";
  sol.report.alpha = problem.alpha;
  sol.report.residual_l2 = data_residual(*problem.op, sol.u, problem.data);
  sol.report.residual_l3 = residual_l3_or_nan(problem, sol.u);
  sol.report.err_u_l2 = std::numeric_limits<double>::quiet_NaN();
  sol.report.err_u_h1 = std::numeric_limits<double>::quiet_NaN();
  sol.report.err_p_l2 = std::numeric_limits<double>::quiet_NaN();
  sol.report.div_h = std::numeric_limits<double>::quiet_NaN();
  sol.report.iters = iters;
  sol.report.seconds = seconds;
  return sol;
}

FdcSolution fdc_solve(const ControlSpace& cs, const FdcProblem& problem,
                      const ModelData* warm_start) {
  if (!(problem.alpha > 0.0))
    throw std::invalid_argument("fdc_filter: alpha must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const double alpha = problem.alpha;

  // Quadratic objective in the controls c:
  //   J(c) = ||T c - u_delta||_M^2 + alpha ||c - c*||_Gram^2,
  // normal equations H c = b with H = 2 T^T M T + 2 alpha Gram.
  auto hessian = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return 2.0 * cs.pullback(cs.forward(v)) + 2.0 * alpha * cs.gram_apply(v);
  };
  const Eigen::VectorXd prior = cs.pack(problem.priors);
  const Eigen::VectorXd b =
      2.0 * cs.pullback(problem.data.coeffs) + 2.0 * alpha * cs.gram_apply(prior);

  Eigen::VectorXd x = warm_start ? cs.pack(*warm_start) : prior;
  Eigen::VectorXd r = b - hessian(x);
  Eigen::VectorXd z = cs.gram_solve(r);
  double rho = r.dot(z);
  const double b_norm = std::sqrt(b.dot(cs.gram_solve(b)));
  const double stop = problem.cg_tol * std::max(b_norm, 1e-300);

  Eigen::VectorXd d = z;
  int it = 0;
  while (std::sqrt(std::max(rho, 0.0)) > stop) {
    if (it >= problem.cg_max_iters) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      throw IterationLimitError("fdc_filter: CG iteration limit reached",
                                make_solution(cs, problem, x, it, secs));
    }
    Eigen::VectorXd q = hessian(d);
    const double dq = d.dot(q);
    if (!(dq > 0.0)) throw std::runtime_error("fdc_filter: CG breakdown (operator not SPD)");
    const double gamma = rho / dq;
    x += gamma * d;
    r -= gamma * q;
    z = cs.gram_solve(r);
    const double rho_new = r.dot(z);
    d = z + (rho_new / rho) * d;
    rho = rho_new;
    ++it;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return make_solution(cs, problem, x, it, secs);
}

}  // namespace

FdcSolution fdc_filter(const FdcProblem& problem, const ModelData* warm_start) {
  if (!problem.op) throw std::invalid_argument("fdc_filter: missing state operator");
  ControlSpace cs(*problem.op);
  return fdc_solve(cs, problem, warm_start);
}

ModelData reduced_gradient(const FdcProblem& problem, const ModelData& controls) {
  if (!problem.op) throw std::invalid_argument("reduced_gradient: missing state operator");
  ControlSpace cs(*problem.op);
  const Eigen::VectorXd c = cs.pack(controls);
  const Eigen::VectorXd u = cs.forward(c);
  const Eigen::VectorXd grad = 2.0 * cs.pullback(u - problem.data.coeffs) +
                               2.0 * problem.alpha * cs.gram_apply(c - cs.pack(problem.priors));
  return cs.unpack(grad);
}

double fdc_objective(const FdcProblem& problem, const ModelData& controls) {
  if (!problem.op) throw std::invalid_argument("fdc_objective: missing state operator");
  const auto& m = problem.op->matrices();
  auto [u, p] = problem.op->solve_state(controls);
  (void)p;
  const Eigen::VectorXd du = u.coeffs - problem.data.coeffs;
  const Eigen::VectorXd df = controls.f - problem.priors.f;
  const Eigen::VectorXd dg = controls.g.values - problem.priors.g.values;
  const Eigen::VectorXd dh = controls.h.values - problem.priors.h.values;
  return du.dot(m.M * du) +
         problem.alpha * (df.dot(m.M * df) + dg.dot(m.G * dg) + dh.dot(m.H * dh));
}

DiscrepancyResult discrepancy_select(const FdcProblem& problem, double delta, double tau,
                                     double alpha0, int max_k) {
  if (!problem.op) throw std::invalid_argument("discrepancy_select: missing state operator");
  if (!problem.mesh)
    throw std::invalid_argument("discrepancy_select: missing mesh (needed for the L3 residual)");
  if (!(tau > 1.0)) throw std::invalid_argument("discrepancy_select: tau must exceed 1");
  if (!(delta > 0.0)) throw std::invalid_argument("discrepancy_select: delta must be positive");
  if (!(alpha0 > 0.0)) throw std::invalid_argument("discrepancy_select: alpha0 must be positive");

  ControlSpace cs(*problem.op);
  std::vector<std::pair<double, double>> trace;
  ModelData warm = problem.priors;
  bool have_warm = false;
  for (int k = 0; k <= max_k; ++k) {
    FdcProblem sub = problem;
    sub.alpha = alpha0 * std::pow(2.0, -k);
    FdcSolution sol = fdc_solve(cs, sub, have_warm ? &warm : nullptr);
    trace.emplace_back(sub.alpha, sol.report.residual_l3);
    if (sol.report.residual_l3 <= tau * delta) {
      DiscrepancyResult res;
      res.alpha = sub.alpha;
      res.solution = std::move(sol);
      res.trace = std::move(trace);
      return res;
    }
    warm = sol.controls;
    have_warm = true;
  }
  throw NoAdmissibleAlphaError("discrepancy_select: no admissible alpha on the dyadic grid",
                               std::move(trace));
}

namespace {

void add_block(std::vector<Eigen::Triplet<double>>& trip, int row0, int col0, const SparseMat& m,
               double scale, bool transpose = false) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMat::InnerIterator it(m, k); it; ++it) {
      const int r = transpose ? static_cast<int>(it.col()) : static_cast<int>(it.row());
      const int c = transpose ? static_cast<int>(it.row()) : static_cast<int>(it.col());
      trip.emplace_back(row0 + r, col0 + c, scale * it.value());
    }
}

}  // namespace

SparseMat build_kkt_matrix(const FdcProblem& problem) {
  if (!problem.op) throw std::invalid_argument("build_kkt_matrix: missing state operator");
  if (!(problem.alpha > 0.0))
    throw std::invalid_argument("build_kkt_matrix: alpha must be positive");

  const auto& m = problem.op->matrices();
  const double alpha = problem.alpha;
  const double inv_eps = 1.0 / problem.op->epsilon();
  const int nv = problem.op->velocity_size();
  const int np = problem.op->pressure_size();
  const int ng = static_cast<int>(m.G.rows());
  const int nh = static_cast<int>(m.H.rows());

  // Unknown layout: (u, p, f, g, h, z, zeta).
  const int ou = 0, op_ = nv, of = nv + np, og = of + nv, oh = og + ng, oz = oh + nh,
            oze = oz + nv;
  const int n = oze + np;

  SparseMat A = problem.op->nu() * m.K + m.C + inv_eps * m.R;
  SparseMat RE = m.R * m.E;

  std::vector<Eigen::Triplet<double>> trip;
  add_block(trip, ou, ou, m.M, 2.0);
  add_block(trip, ou, oz, A, 1.0, /*transpose=*/true);
  add_block(trip, ou, oze, m.B, 1.0, /*transpose=*/true);
  add_block(trip, op_, oz, m.B, 1.0);
  add_block(trip, of, of, m.M, 2.0 * alpha);
  add_block(trip, of, oz, m.M, -1.0);
  add_block(trip, og, og, m.G, 2.0 * alpha);
  add_block(trip, og, oz, RE, -inv_eps, /*transpose=*/true);
  add_block(trip, oh, oh, m.H, 2.0 * alpha);
  add_block(trip, oh, oz, m.N, -1.0, /*transpose=*/true);
  add_block(trip, oz, ou, A, 1.0);
  add_block(trip, oz, op_, m.B, 1.0, /*transpose=*/true);
  add_block(trip, oz, of, m.M, -1.0);
  add_block(trip, oz, og, RE, -inv_eps);
  add_block(trip, oz, oh, m.N, -1.0);
  add_block(trip, oze, ou, m.B, 1.0);

  SparseMat S(n, n);
  S.setFromTriplets(trip.begin(), trip.end());
  S.makeCompressed();
  return S;
}

FdcSolution solve_full_kkt(const FdcProblem& problem) {
  if (!problem.op) throw std::invalid_argument("solve_full_kkt: missing state operator");
  if (!(problem.alpha > 0.0))
    throw std::invalid_argument("solve_full_kkt: alpha must be positive");
  const auto t0 = std::chrono::steady_clock::now();

  const auto& m = problem.op->matrices();
  const double alpha = problem.alpha;
  const int nv = problem.op->velocity_size();
  const int np = problem.op->pressure_size();
  const int ng = static_cast<int>(m.G.rows());
  const int nh = static_cast<int>(m.H.rows());
  const int ou = 0, op_ = nv, of = nv + np, og = of + nv, oh = og + ng;
  const int n = oh + nh + nv + np;

  SparseMat S = build_kkt_matrix(problem);

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs.segment(ou, nv) = 2.0 * (m.M * problem.data.coeffs);
  rhs.segment(of, nv) = 2.0 * alpha * (m.M * problem.priors.f);
  rhs.segment(og, ng) = 2.0 * alpha * (m.G * problem.priors.g.values);
  rhs.segment(oh, nh) = 2.0 * alpha * (m.H * problem.priors.h.values);

  Eigen::SparseLU<SparseMat> lu(S);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_full_kkt: factorization of the optimality system failed");
  Eigen::VectorXd sol = lu.solve(rhs);

  FdcSolution out;
  out.u = {sol.segment(ou, nv)};
  out.p = {sol.segment(op_, np)};
  out.controls.f = sol.segment(of, nv);
  out.controls.g = {NodeTag::Inflow, sol.segment(og, ng)};
  out.controls.h = {NodeTag::Outflow, sol.segment(oh, nh)};
  out.report.method = "fdc-kkt";
  out.report.alpha = alpha;
  out.report.residual_l2 = data_residual(*problem.op, out.u, problem.data);
  out.report.residual_l3 = residual_l3_or_nan(problem, out.u);
  out.report.err_u_l2 = std::numeric_limits<double>::quiet_NaN();
  out.report.err_u_h1 = std::numeric_limits<double>::quiet_NaN();
  out.report.err_p_l2 = std::numeric_limits<double>::quiet_NaN();
  out.report.div_h = std::numeric_limits<double>::quiet_NaN();
  out.report.iters = 1;
  out.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace fdc
