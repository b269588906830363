#include "fdc/testbed.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "fdc/quadrature.hpp"

namespace fdc {

Eigen::Vector2d PoiseuilleCase::velocity(double /*x*/, double y) const {
  const double c = (p0 - pL) / (2.0 * nu * length);
  return {c * y * (height - y), 0.0};
}

Eigen::Matrix2d PoiseuilleCase::velocity_gradient(double /*x*/, double y) const {
  const double c = (p0 - pL) / (2.0 * nu * length);
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  g(0, 1) = c * (height - 2.0 * y);  // d u_x / d y
  return g;
}

double PoiseuilleCase::pressure(double x, double /*y*/) const {
  return p0 + (pL - p0) / length * x;
}

ModelData PoiseuilleCase::exact_data(const Mesh& mesh) const {
  ModelData data = ModelData::zero(mesh);
  data.g = interpolate_boundary(mesh, NodeTag::Inflow,
                                [this](double x, double y) { return velocity(x, y); });
  // Outflow traction of the weak form: nu du/dn - (u_conv . n) u / 2 - p n,
  // evaluated for the Poiseuille pair at x = L.
  data.h = interpolate_boundary(mesh, NodeTag::Outflow, [this](double x, double y) {
    const double ux = velocity(x, y).x();
    return Eigen::Vector2d(-0.5 * ux * ux - pL, 0.0);
  });
  return data;
}

namespace {

template <typename F>
double quadrature_norm(const Mesh& mesh, F&& point_value) {
  const auto& rule = triangle_rule_deg8();
  double acc = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area2 = 2.0 * mesh.triangle_area(t);
    for (const auto& q : rule) acc += area2 * q.w * point_value(t, q);
  }
  return acc;
}

Eigen::Vector2d quad_coords(const Mesh& mesh, int t, const TriQuadPoint& q) {
  const auto& tri = mesh.triangles[t];
  return q.l1 * mesh.nodes[tri[0]] + q.l2 * mesh.nodes[tri[1]] + q.l3 * mesh.nodes[tri[2]];
}

}  // namespace

double norm_l2(const Mesh& mesh, const VelocityField& v) {
  return std::sqrt(quadrature_norm(mesh, [&](int t, const TriQuadPoint& q) {
    return eval_velocity(mesh, v, t, q.l1, q.l2, q.l3).squaredNorm();
  }));
}

double norm_l3(const Mesh& mesh, const VelocityField& v) {
  const double acc = quadrature_norm(mesh, [&](int t, const TriQuadPoint& q) {
    return std::pow(eval_velocity(mesh, v, t, q.l1, q.l2, q.l3).norm(), 3.0);
  });
  return std::cbrt(acc);
}

VelocityField force_prior_offset(const Mesh& mesh, double magnitude) {
  const double lx = mesh.length, ly = mesh.height;
  if (!(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("force_prior_offset: mesh has no extent");
  VelocityField f = interpolate(mesh, [lx, ly](double x, double y) {
    // curl of the stream function sin(pi x / L) sin(pi y / H); the lowest
    // mode is the most data-visible misspecification, so the filter corrects
    // it quickly and the discrepancy-selected alpha is perturbed only mildly
    return Eigen::Vector2d((M_PI / ly) * std::sin(M_PI * x / lx) * std::cos(M_PI * y / ly),
                           -(M_PI / lx) * std::cos(M_PI * x / lx) * std::sin(M_PI * y / ly));
  });
  f.coeffs *= magnitude / norm_l2(mesh, f);
  return f;
}

double norm_h1(const Mesh& mesh, const VelocityField& v) {
  const double acc = quadrature_norm(mesh, [&](int t, const TriQuadPoint& q) {
    return eval_velocity(mesh, v, t, q.l1, q.l2, q.l3).squaredNorm() +
           eval_velocity_gradient(mesh, v, t, q.l1, q.l2, q.l3).squaredNorm();
  });
  return std::sqrt(acc);
}

VelocityField add_noise(const Mesh& mesh, const VelocityField& clean, const NoiseSpec& spec) {
  if (clean.size() != velocity_dofs(mesh))
    throw std::invalid_argument("add_noise: field does not conform to mesh");
  if (clean.size() == 0) throw std::invalid_argument("add_noise: empty field");
  if (spec.delta < 0.0) throw std::invalid_argument("add_noise: delta must be nonnegative");
  if (spec.delta == 0.0) return clean;

  const int nvc = velocity_dofs_per_component(mesh);
  VelocityField noise = VelocityField::zero(mesh);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < mesh.num_nodes(); ++i) noise.coeffs[c * nvc + i] = normal(rng);

  const double raw = norm_l3(mesh, noise);
  if (!(raw > 0.0)) throw std::runtime_error("add_noise: degenerate noise draw");
  VelocityField out = clean;
  out.coeffs += (spec.delta / raw) * noise.coeffs;
  return out;
}

double discrete_divergence_norm(const SystemMatrices& matrices, const VelocityField& u) {
  Eigen::VectorXd bu = matrices.B * u.coeffs;
  Eigen::SimplicialLDLT<SparseMat> ldlt(matrices.Mp);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("discrete_divergence_norm: pressure mass factorization failed");
  Eigen::VectorXd divh = ldlt.solve(bu);
  return std::sqrt(divh.dot(bu));
}

ErrorNorms error_norms(const Mesh& mesh, const SystemMatrices& matrices, const VelocityField& u,
                       const PressureField* p, const PoiseuilleCase& reference) {
  ErrorNorms out;
  double l2 = 0.0, semi = 0.0, pl2 = 0.0;
  const auto& rule = triangle_rule_deg8();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area2 = 2.0 * mesh.triangle_area(t);
    for (const auto& q : rule) {
      const Eigen::Vector2d x = quad_coords(mesh, t, q);
      const double w = area2 * q.w;
      const Eigen::Vector2d du =
          eval_velocity(mesh, u, t, q.l1, q.l2, q.l3) - reference.velocity(x.x(), x.y());
      const Eigen::Matrix2d dg = eval_velocity_gradient(mesh, u, t, q.l1, q.l2, q.l3) -
                                 reference.velocity_gradient(x.x(), x.y());
      l2 += w * du.squaredNorm();
      semi += w * dg.squaredNorm();
      if (p) {
        const double dp =
            eval_pressure(mesh, *p, t, q.l1, q.l2, q.l3) - reference.pressure(x.x(), x.y());
        pl2 += w * dp * dp;
      }
    }
  }
  out.err_u_l2 = std::sqrt(l2);
  out.err_u_h1 = std::sqrt(l2 + semi);
  out.err_p_l2 = p ? std::sqrt(pl2) : std::numeric_limits<double>::quiet_NaN();
  out.div_h = discrete_divergence_norm(matrices, u);
  return out;
}

std::vector<LinearizationRow> linearization_experiment(const std::vector<int>& ny_ladder,
                                                       const std::vector<double>& deltas,
                                                       std::uint64_t seed, double nu,
                                                       double epsilon) {
  if (ny_ladder.empty() || deltas.empty())
    throw std::invalid_argument("linearization_experiment: empty ladder or delta list");
  const PoiseuilleCase ref;
  std::vector<LinearizationRow> rows;
  std::uint64_t cell = 0;
  for (int ny : ny_ladder) {
    const Mesh mesh = generate_channel_mesh(ref.length, ref.height, 5 * ny, ny);
    const VelocityField clean =
        interpolate(mesh, [&](double x, double y) { return ref.velocity(x, y); });
    const ModelData data = ref.exact_data(mesh);
    for (double delta : deltas) {
      const std::uint64_t cell_seed = seed + 0x9e3779b97f4a7c15ull * (++cell);
      const VelocityField noisy = add_noise(mesh, clean, {delta, cell_seed});
      const SystemMatrices matrices = assemble_system(mesh, noisy);
      const StateOperator op(matrices, nu, epsilon);
      auto [u, p] = op.solve_state(data);
      const ErrorNorms err = error_norms(mesh, matrices, u, &p, ref);
      rows.push_back({ny, delta, cell_seed, err.err_u_h1, err.err_p_l2});
    }
  }
  return rows;
}

}  // namespace fdc
