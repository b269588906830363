#include "fdc/fem.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "fdc/quadrature.hpp"

namespace fdc {

VelocityField VelocityField::zero(const Mesh& mesh) {
  return {Eigen::VectorXd::Zero(velocity_dofs(mesh))};
}

PressureField PressureField::zero(const Mesh& mesh) {
  return {Eigen::VectorXd::Zero(mesh.num_nodes())};
}

BoundaryField BoundaryField::zero(const Mesh& mesh, NodeTag tag) {
  const auto nodes = boundary_nodes(mesh, tag);
  return {tag, Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(nodes.size()))};
}

namespace {

struct ElementGeometry {
  double area;
  Eigen::Vector2d grad_lambda[3];  // constant P1 gradients
};

ElementGeometry element_geometry(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Eigen::Vector2d& p0 = mesh.nodes[tri[0]];
  const Eigen::Vector2d& p1 = mesh.nodes[tri[1]];
  const Eigen::Vector2d& p2 = mesh.nodes[tri[2]];
  ElementGeometry g;
  g.area = 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y()));
  if (!(g.area > 0.0)) throw std::invalid_argument("element with non-positive area");
  const double inv2A = 1.0 / (2.0 * g.area);
  g.grad_lambda[0] = inv2A * Eigen::Vector2d(p1.y() - p2.y(), p2.x() - p1.x());
  g.grad_lambda[1] = inv2A * Eigen::Vector2d(p2.y() - p0.y(), p0.x() - p2.x());
  g.grad_lambda[2] = inv2A * Eigen::Vector2d(p0.y() - p1.y(), p1.x() - p0.x());
  return g;
}

// Scalar Mini basis on one element: three hats followed by the bubble.
void shape_values(const double l[3], double N[4]) {
  N[0] = l[0];
  N[1] = l[1];
  N[2] = l[2];
  N[3] = 27.0 * l[0] * l[1] * l[2];
}

void shape_gradients(const ElementGeometry& g, const double l[3], Eigen::Vector2d dN[4]) {
  dN[0] = g.grad_lambda[0];
  dN[1] = g.grad_lambda[1];
  dN[2] = g.grad_lambda[2];
  dN[3] = 27.0 * (g.grad_lambda[0] * l[1] * l[2] + l[0] * g.grad_lambda[1] * l[2] +
                  l[0] * l[1] * g.grad_lambda[2]);
}

using Triplet = Eigen::Triplet<double>;

int vdof(const Mesh& mesh, int comp, int t, int local) {
  const int nvc = velocity_dofs_per_component(mesh);
  if (local < 3) return comp * nvc + mesh.triangles[t][local];
  return comp * nvc + mesh.num_nodes() + t;
}

}  // namespace

SparseMat assemble_stiffness(const Mesh& mesh) {
  const auto& rule = triangle_rule_deg8();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(mesh.num_triangles()) * 32);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    double Ke[4][4] = {};
    for (const auto& q : rule) {
      const double l[3] = {q.l1, q.l2, q.l3};
      Eigen::Vector2d dN[4];
      shape_gradients(g, l, dN);
      const double w = 2.0 * g.area * q.w;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) Ke[i][j] += w * dN[i].dot(dN[j]);
    }
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          trip.emplace_back(vdof(mesh, c, t, i), vdof(mesh, c, t, j), Ke[i][j]);
  }
  SparseMat K(velocity_dofs(mesh), velocity_dofs(mesh));
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

std::pair<SparseMat, SparseMat> assemble_mass(const Mesh& mesh) {
  const auto& rule = triangle_rule_deg8();
  std::vector<Triplet> trip_m, trip_p;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    double Me[4][4] = {};
    for (const auto& q : rule) {
      const double l[3] = {q.l1, q.l2, q.l3};
      double N[4];
      shape_values(l, N);
      const double w = 2.0 * g.area * q.w;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) Me[i][j] += w * N[i] * N[j];
    }
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          trip_m.emplace_back(vdof(mesh, c, t, i), vdof(mesh, c, t, j), Me[i][j]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip_p.emplace_back(mesh.triangles[t][i], mesh.triangles[t][j], Me[i][j]);
  }
  SparseMat M(velocity_dofs(mesh), velocity_dofs(mesh));
  M.setFromTriplets(trip_m.begin(), trip_m.end());
  SparseMat Mp(mesh.num_nodes(), mesh.num_nodes());
  Mp.setFromTriplets(trip_p.begin(), trip_p.end());
  return {std::move(M), std::move(Mp)};
}

SparseMat assemble_convection(const Mesh& mesh, const VelocityField& w) {
  if (w.size() != velocity_dofs(mesh))
    throw std::invalid_argument("assemble_convection: field does not conform to mesh");
  const auto& rule = triangle_rule_deg8();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(mesh.num_triangles()) * 32);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    // (w . grad N_j, N_i) on this element; the skew form is applied globally.
    double Ce[4][4] = {};
    for (const auto& q : rule) {
      const double l[3] = {q.l1, q.l2, q.l3};
      double N[4];
      shape_values(l, N);
      Eigen::Vector2d dN[4];
      shape_gradients(g, l, dN);
      Eigen::Vector2d wq = Eigen::Vector2d::Zero();
      for (int k = 0; k < 4; ++k) {
        wq.x() += w.coeffs[vdof(mesh, 0, t, k)] * N[k];
        wq.y() += w.coeffs[vdof(mesh, 1, t, k)] * N[k];
      }
      const double wt = 2.0 * g.area * q.w;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) Ce[i][j] += wt * wq.dot(dN[j]) * N[i];
    }
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          trip.emplace_back(vdof(mesh, c, t, i), vdof(mesh, c, t, j), Ce[i][j]);
  }
  SparseMat C1(velocity_dofs(mesh), velocity_dofs(mesh));
  C1.setFromTriplets(trip.begin(), trip.end());
  SparseMat C1t = SparseMat(C1.transpose());
  return 0.5 * (C1 - C1t);
}

SparseMat assemble_divergence(const Mesh& mesh) {
  const auto& rule = triangle_rule_deg8();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(mesh.num_triangles()) * 24);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    double Be[2][3][4] = {};  // component, pressure hat, velocity shape
    for (const auto& q : rule) {
      const double l[3] = {q.l1, q.l2, q.l3};
      Eigen::Vector2d dN[4];
      shape_gradients(g, l, dN);
      const double w = 2.0 * g.area * q.w;
      for (int c = 0; c < 2; ++c)
        for (int p = 0; p < 3; ++p)
          for (int i = 0; i < 4; ++i) Be[c][p][i] -= w * dN[i][c] * l[p];
    }
    for (int c = 0; c < 2; ++c)
      for (int p = 0; p < 3; ++p)
        for (int i = 0; i < 4; ++i)
          trip.emplace_back(mesh.triangles[t][p], vdof(mesh, c, t, i), Be[c][p][i]);
  }
  SparseMat B(mesh.num_nodes(), velocity_dofs(mesh));
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

BoundaryMatrices assemble_boundary(const Mesh& mesh) {
  const int nvc = velocity_dofs_per_component(mesh);
  const int nv = velocity_dofs(mesh);
  const auto inflow = boundary_nodes(mesh, NodeTag::Inflow);
  const auto outflow = boundary_nodes(mesh, NodeTag::Outflow);
  const int nin = static_cast<int>(inflow.size());
  const int nout = static_cast<int>(outflow.size());

  std::unordered_map<int, int> inflow_pos, outflow_pos;
  for (int k = 0; k < nin; ++k) inflow_pos[inflow[k]] = k;
  for (int k = 0; k < nout; ++k) outflow_pos[outflow[k]] = k;

  std::vector<Triplet> trip_r, trip_n, trip_g, trip_h;
  for (const auto& edge : mesh.boundary_edges) {
    const int n0 = edge.a, n1 = edge.b;
    const double le = (mesh.nodes[n1] - mesh.nodes[n0]).norm();
    const double mass[2][2] = {{le / 3.0, le / 6.0}, {le / 6.0, le / 3.0}};
    const double stiff[2][2] = {{1.0 / le, -1.0 / le}, {-1.0 / le, 1.0 / le}};
    const int nodes[2] = {n0, n1};

    if (edge.tag == NodeTag::Inflow || edge.tag == NodeTag::Wall) {
      for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            trip_r.emplace_back(c * nvc + nodes[i], c * nvc + nodes[j], mass[i][j]);
    }
    if (edge.tag == NodeTag::Inflow) {
      // H^1_0 Gramian: endpoint (corner) rows and columns are dropped.
      for (int i = 0; i < 2; ++i) {
        auto it_i = inflow_pos.find(nodes[i]);
        if (it_i == inflow_pos.end()) continue;
        for (int j = 0; j < 2; ++j) {
          auto it_j = inflow_pos.find(nodes[j]);
          if (it_j == inflow_pos.end()) continue;
          for (int c = 0; c < 2; ++c)
            trip_g.emplace_back(c * nin + it_i->second, c * nin + it_j->second,
                                mass[i][j] + stiff[i][j]);
        }
      }
    }
    if (edge.tag == NodeTag::Outflow) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          auto it_j = outflow_pos.find(nodes[j]);
          if (it_j == outflow_pos.end()) continue;  // corner trace is zero
          for (int c = 0; c < 2; ++c)
            trip_n.emplace_back(c * nvc + nodes[i], c * nout + it_j->second, mass[i][j]);
        }
        auto it_i = outflow_pos.find(nodes[i]);
        if (it_i == outflow_pos.end()) continue;
        for (int j = 0; j < 2; ++j) {
          auto it_j = outflow_pos.find(nodes[j]);
          if (it_j == outflow_pos.end()) continue;
          for (int c = 0; c < 2; ++c)
            trip_h.emplace_back(c * nout + it_i->second, c * nout + it_j->second, mass[i][j]);
        }
      }
    }
  }

  BoundaryMatrices bm;
  bm.R.resize(nv, nv);
  bm.R.setFromTriplets(trip_r.begin(), trip_r.end());
  bm.E.resize(nv, 2 * nin);
  {
    std::vector<Triplet> trip_e;
    for (int c = 0; c < 2; ++c)
      for (int k = 0; k < nin; ++k) trip_e.emplace_back(c * nvc + inflow[k], c * nin + k, 1.0);
    bm.E.setFromTriplets(trip_e.begin(), trip_e.end());
  }
  bm.N.resize(nv, 2 * nout);
  bm.N.setFromTriplets(trip_n.begin(), trip_n.end());
  bm.G.resize(2 * nin, 2 * nin);
  bm.G.setFromTriplets(trip_g.begin(), trip_g.end());
  bm.H.resize(2 * nout, 2 * nout);
  bm.H.setFromTriplets(trip_h.begin(), trip_h.end());
  return bm;
}

SystemMatrices assemble_system(const Mesh& mesh, const VelocityField& w) {
  SystemMatrices sm;
  sm.K = assemble_stiffness(mesh);
  auto masses = assemble_mass(mesh);
  sm.M = std::move(masses.first);
  sm.Mp = std::move(masses.second);
  sm.C = assemble_convection(mesh, w);
  sm.B = assemble_divergence(mesh);
  auto bm = assemble_boundary(mesh);
  sm.R = std::move(bm.R);
  sm.E = std::move(bm.E);
  sm.N = std::move(bm.N);
  sm.G = std::move(bm.G);
  sm.H = std::move(bm.H);
  return sm;
}

VelocityField interpolate(const Mesh& mesh,
                          const std::function<Eigen::Vector2d(double, double)>& fn) {
  VelocityField v = VelocityField::zero(mesh);
  const int nvc = velocity_dofs_per_component(mesh);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const Eigen::Vector2d val = fn(mesh.nodes[i].x(), mesh.nodes[i].y());
    if (!val.allFinite()) throw std::invalid_argument("interpolate: non-finite value");
    v.coeffs[i] = val.x();
    v.coeffs[nvc + i] = val.y();
  }
  return v;
}

PressureField interpolate_pressure(const Mesh& mesh,
                                   const std::function<double(double, double)>& fn) {
  PressureField p = PressureField::zero(mesh);
  for (int i = 0; i < mesh.num_nodes(); ++i) p.coeffs[i] = fn(mesh.nodes[i].x(), mesh.nodes[i].y());
  return p;
}

BoundaryField interpolate_boundary(const Mesh& mesh, NodeTag tag,
                                   const std::function<Eigen::Vector2d(double, double)>& fn) {
  const auto nodes = boundary_nodes(mesh, tag);
  const int n = static_cast<int>(nodes.size());
  BoundaryField bf{tag, Eigen::VectorXd::Zero(2 * n)};
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector2d val = fn(mesh.nodes[nodes[k]].x(), mesh.nodes[nodes[k]].y());
    bf.values[k] = val.x();
    bf.values[n + k] = val.y();
  }
  return bf;
}

Eigen::Vector2d eval_velocity(const Mesh& mesh, const VelocityField& v, int tri, double l1,
                              double l2, double l3) {
  const double l[3] = {l1, l2, l3};
  double N[4];
  shape_values(l, N);
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int k = 0; k < 4; ++k) {
    out.x() += v.coeffs[vdof(mesh, 0, tri, k)] * N[k];
    out.y() += v.coeffs[vdof(mesh, 1, tri, k)] * N[k];
  }
  return out;
}

Eigen::Matrix2d eval_velocity_gradient(const Mesh& mesh, const VelocityField& v, int tri,
                                       double l1, double l2, double l3) {
  const auto g = element_geometry(mesh, tri);
  const double l[3] = {l1, l2, l3};
  Eigen::Vector2d dN[4];
  shape_gradients(g, l, dN);
  Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();  // grad(i,j) = d u_i / d x_j
  for (int k = 0; k < 4; ++k) {
    grad.row(0) += v.coeffs[vdof(mesh, 0, tri, k)] * dN[k].transpose();
    grad.row(1) += v.coeffs[vdof(mesh, 1, tri, k)] * dN[k].transpose();
  }
  return grad;
}

double eval_pressure(const Mesh& mesh, const PressureField& p, int tri, double l1, double l2,
                     double l3) {
  const auto& t = mesh.triangles[tri];
  return l1 * p.coeffs[t[0]] + l2 * p.coeffs[t[1]] + l3 * p.coeffs[t[2]];
}

}  // namespace fdc
