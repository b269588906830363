#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "fdc/fem.hpp"
#include "fdc/quadrature.hpp"
#include "oracles.hpp"

using namespace fdc;

namespace {

Mesh unit_right_triangle() {
  Mesh m;
  m.length = 1.0;
  m.height = 1.0;
  m.nodes = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  m.triangles = {{0, 1, 2}};
  m.node_tags = {NodeTag::Interior, NodeTag::Interior, NodeTag::Interior};
  return m;
}

int bubble_dof(const Mesh& mesh, int component, int tri) {
  return component * velocity_dofs_per_component(mesh) + mesh.num_nodes() + tri;
}

double max_abs(const SparseMat& m) {
  double v = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMat::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

}  // namespace

TEST_CASE("assembly quadrature is exact to total degree 8") {
  const auto& rule = triangle_rule_deg8();
  for (int a = 0; a <= 8; ++a)
    for (int b = 0; a + b <= 8; ++b) {
      const int c = 8 - a - b;
      double acc = 0.0;
      for (const auto& q : rule)
        acc += q.w * std::pow(q.l1, a) * std::pow(q.l2, b) * std::pow(q.l3, c);
      // reference triangle has area 1/2
      const double exact = test::barycentric_monomial_integral(0.5, a, b, c);
      CHECK(acc == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("edge rule integrates degree-5 monomials on [0,1]") {
  for (int d = 0; d <= 5; ++d) {
    double acc = 0.0;
    for (const auto& q : edge_rule()) acc += q.w * std::pow(q.t, d);
    CHECK(acc == doctest::Approx(1.0 / (d + 1)).epsilon(1e-14));
  }
}

TEST_CASE("element stiffness on the unit right triangle") {
  const Mesh m = unit_right_triangle();
  const SparseMat K = assemble_stiffness(m);
  const double expected[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(K.coeff(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-13));
      // y-component block is identical
      const int nvc = velocity_dofs_per_component(m);
      CHECK(K.coeff(nvc + i, nvc + j) == doctest::Approx(expected[i][j]).epsilon(1e-13));
    }
  // bubble-P1 stiffness coupling vanishes: int grad b . grad (linear) = 0
  for (int j = 0; j < 3; ++j) CHECK(std::abs(K.coeff(bubble_dof(m, 0, 0), j)) < 1e-14);
}

TEST_CASE("stiffness annihilates constants and matches a Dirichlet energy") {
  const Mesh m = generate_channel_mesh(5, 1, 10, 4);
  const SparseMat K = assemble_stiffness(m);

  const VelocityField ones = interpolate(m, [](double, double) {
    return Eigen::Vector2d(1.0, -3.0);
  });
  CHECK((K * ones.coeffs).norm() < 1e-12 * max_abs(K));

  // v = (x, 0): |grad v|^2 = 1, energy = area = 5
  const VelocityField v = interpolate(m, [](double x, double) {
    return Eigen::Vector2d(x, 0.0);
  });
  CHECK(v.coeffs.dot(K * v.coeffs) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("mass matrices on the unit right triangle") {
  const Mesh m = unit_right_triangle();
  auto [M, Mp] = assemble_mass(m);
  const double area = 0.5;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double expect = (i == j) ? area / 6.0 : area / 12.0;
      CHECK(Mp.coeff(i, j) == doctest::Approx(expect).epsilon(1e-13));
      CHECK(M.coeff(i, j) == doctest::Approx(expect).epsilon(1e-13));
    }

  const int bub = bubble_dof(m, 0, 0);
  const double bb = 729.0 * test::barycentric_monomial_integral(area, 2, 2, 2);
  CHECK(M.coeff(bub, bub) == doctest::Approx(bb).epsilon(1e-13));

  // sum over the P1 row entries of the bubble equals int b (partition of unity)
  double row = 0.0;
  for (int j = 0; j < 3; ++j) row += M.coeff(bub, j);
  CHECK(row == doctest::Approx(27.0 * test::barycentric_monomial_integral(area, 1, 1, 1))
                   .epsilon(1e-13));
}

TEST_CASE("pressure mass integrates the domain") {
  const Mesh m = generate_channel_mesh(5, 1, 10, 4);
  auto [M, Mp] = assemble_mass(m);
  (void)M;
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(m.num_nodes());
  CHECK(one.dot(Mp * one) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("convection is skew-symmetric") {
  const Mesh m = generate_channel_mesh(5, 1, 4, 2);
  SUBCASE("zero convecting field gives the zero operator") {
    const SparseMat C = assemble_convection(m, VelocityField::zero(m));
    CHECK(max_abs(C) < 1e-15);
  }
  SUBCASE("quadratic form vanishes for random fields") {
    const VelocityField w = interpolate(m, [](double x, double y) {
      return Eigen::Vector2d(10.0 * y * (1.0 - y), 0.2 * std::sin(x));
    });
    const SparseMat C = assemble_convection(m, w);
    const double scale = max_abs(C);
    CHECK(max_abs(SparseMat(C + SparseMat(C.transpose()))) < 1e-13 * scale);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd v(velocity_dofs(m));
      for (int i = 0; i < v.size(); ++i) v[i] = dist(rng);
      CHECK(std::abs(v.dot(C * v)) < 1e-12 * scale * v.squaredNorm());
    }
  }
}

TEST_CASE("convection entries match a high-order quadrature oracle") {
  const Mesh m = generate_channel_mesh(5, 1, 1, 1);
  const VelocityField w = interpolate(m, [](double x, double y) {
    return Eigen::Vector2d(10.0 * y * (1.0 - y), 0.3 * x);
  });
  const SparseMat C = assemble_convection(m, w);

  // P1 hat function and gradient of global node n restricted to triangle t
  auto hat = [&](int n, int t, double x, double y) -> double {
    const auto& tri = m.triangles[t];
    int local = -1;
    for (int k = 0; k < 3; ++k)
      if (tri[k] == n) local = k;
    if (local < 0) return 0.0;
    const Eigen::Vector2d& pa = m.nodes[tri[(local + 1) % 3]];
    const Eigen::Vector2d& pb = m.nodes[tri[(local + 2) % 3]];
    const double twoA = 2.0 * m.triangle_area(t);
    return ((pa.x() - x) * (pb.y() - y) - (pb.x() - x) * (pa.y() - y)) / twoA;
  };
  auto hat_grad = [&](int n, int t) -> Eigen::Vector2d {
    const auto& tri = m.triangles[t];
    int local = -1;
    for (int k = 0; k < 3; ++k)
      if (tri[k] == n) local = k;
    if (local < 0) return Eigen::Vector2d::Zero();
    const Eigen::Vector2d& pa = m.nodes[tri[(local + 1) % 3]];
    const Eigen::Vector2d& pb = m.nodes[tri[(local + 2) % 3]];
    const double twoA = 2.0 * m.triangle_area(t);
    return Eigen::Vector2d(pa.y() - pb.y(), pb.x() - pa.x()) / twoA;
  };
  auto wfun = [&](double x, double y) -> Eigen::Vector2d {
    // w is a nodal interpolant; evaluate it the same analytic way
    return Eigen::Vector2d(10.0 * y * (1.0 - y), 0.3 * x);
  };
  // oracle for the nonsymmetrized form c1(i, j) = int (w . grad hat_j) hat_i;
  // w itself is piecewise linear, so integrate its interpolant per triangle
  auto c1 = [&](int i, int j) -> double {
    double acc = 0.0;
    for (int t = 0; t < m.num_triangles(); ++t) {
      const Eigen::Vector2d gj = hat_grad(j, t);
      acc += test::integrate_triangle(m, t, [&](double x, double y) {
        const auto& tri = m.triangles[t];
        Eigen::Vector2d wv = Eigen::Vector2d::Zero();
        for (int k = 0; k < 3; ++k) wv += hat(tri[k], t, x, y) * wfun(m.nodes[tri[k]].x(), m.nodes[tri[k]].y());
        return wv.dot(gj) * hat(i, t, x, y);
      });
    }
    return acc;
  };
  for (int i = 0; i < m.num_nodes(); ++i)
    for (int j = 0; j < m.num_nodes(); ++j) {
      const double expect = 0.5 * (c1(i, j) - c1(j, i));
      CHECK(C.coeff(i, j) == doctest::Approx(expect).epsilon(1e-11).scale(1.0));
    }
}

TEST_CASE("discrete divergence") {
  const Mesh m = generate_channel_mesh(5, 1, 2, 2);
  const SparseMat B = assemble_divergence(m);

  const VelocityField c = interpolate(m, [](double, double) {
    return Eigen::Vector2d(2.0, -1.0);
  });
  CHECK((B * c.coeffs).norm() < 1e-13 * max_abs(B));

  // (x, -y) is linear and pointwise divergence-free
  const VelocityField s = interpolate(m, [](double x, double y) {
    return Eigen::Vector2d(x, -y);
  });
  CHECK((B * s.coeffs).norm() < 1e-12 * max_abs(B));

  // 1^T B v = -int div v = -(area) for v = (x, 0)
  const VelocityField v = interpolate(m, [](double x, double) {
    return Eigen::Vector2d(x, 0.0);
  });
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(m.num_nodes());
  CHECK(one.dot(B * v.coeffs) == doctest::Approx(-5.0).epsilon(1e-12));
}

TEST_CASE("boundary operators") {
  const Mesh m = generate_channel_mesh(5, 1, 2, 80);
  const BoundaryMatrices bm = assemble_boundary(m);
  const auto inflow = boundary_nodes(m, NodeTag::Inflow);
  const auto outflow = boundary_nodes(m, NodeTag::Outflow);
  const int nin = static_cast<int>(inflow.size());
  const int nout = static_cast<int>(outflow.size());

  SUBCASE("shapes") {
    CHECK(bm.R.rows() == velocity_dofs(m));
    CHECK(bm.E.cols() == 2 * nin);
    CHECK(bm.N.cols() == 2 * nout);
    CHECK(bm.G.rows() == 2 * nin);
    CHECK(bm.H.rows() == 2 * nout);
  }

  SUBCASE("extension by zero") {
    BoundaryField g = interpolate_boundary(m, NodeTag::Inflow, [](double, double y) {
      return Eigen::Vector2d(10.0 * y * (1.0 - y), 0.0);
    });
    const Eigen::VectorXd ext = bm.E * g.values;
    const int nvc = velocity_dofs_per_component(m);
    for (int k = 0; k < nin; ++k)
      CHECK(ext[inflow[k]] == g.values[k]);
    // everything off the inflow is zero
    double off = 0.0;
    for (int i = 0; i < m.num_nodes(); ++i)
      if (m.node_tags[i] != NodeTag::Inflow) off += std::abs(ext[i]) + std::abs(ext[nvc + i]);
    CHECK(off == 0.0);
  }

  SUBCASE("inflow H1 Gramian energy of the parabolic profile") {
    BoundaryField g = interpolate_boundary(m, NodeTag::Inflow, [](double, double y) {
      return Eigen::Vector2d(10.0 * y * (1.0 - y), 0.0);
    });
    // int_0^1 g^2 + (g')^2 dy = 10/3 + 100/3
    CHECK(g.values.dot(bm.G * g.values) == doctest::Approx(110.0 / 3.0).epsilon(0.01));
  }

  SUBCASE("outflow mass of a constant trace") {
    BoundaryField h = interpolate_boundary(m, NodeTag::Outflow, [](double, double) {
      return Eigen::Vector2d(1.0, 0.0);
    });
    // the trace representation drops to zero at the corner nodes, so the
    // constant loses 2/3 of each end cell: 1 - 4/(3 ny)
    const double expect = 1.0 - 4.0 / (3.0 * 80.0);
    CHECK(h.values.dot(bm.H * h.values) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(h.values.dot(bm.H * h.values) == doctest::Approx(1.0).epsilon(0.02));
  }

  SUBCASE("penalty mass covers inflow and walls only") {
    // R * interpolant of a field supported on the outflow only is zero
    VelocityField v = VelocityField::zero(m);
    const int nvc = velocity_dofs_per_component(m);
    for (int i = 0; i < m.num_nodes(); ++i)
      if (m.nodes[i].x() == 5.0 && m.node_tags[i] == NodeTag::Outflow) v.coeffs[i] = 1.0;
    (void)nvc;
    CHECK((bm.R * v.coeffs).norm() == 0.0);

    // quadratic form for u = (1, 0) equals the inflow + wall length
    const VelocityField one = interpolate(m, [](double, double) {
      return Eigen::Vector2d(1.0, 0.0);
    });
    CHECK(one.coeffs.dot(bm.R * one.coeffs) == doctest::Approx(11.0).epsilon(1e-12));
  }
}

TEST_CASE("mixed velocity-pressure system is solvable (inf-sup)") {
  for (auto [nx, ny] : {std::pair{2, 2}, {10, 4}, {20, 8}}) {
    CAPTURE(nx);
    const Mesh m = generate_channel_mesh(5, 1, nx, ny);
    auto [M, Mp] = assemble_mass(m);
    (void)Mp;
    const SparseMat B = assemble_divergence(m);
    const int nv = velocity_dofs(m);
    const int np = m.num_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < M.outerSize(); ++k)
      for (SparseMat::InnerIterator it(M, k); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int k = 0; k < B.outerSize(); ++k)
      for (SparseMat::InnerIterator it(B, k); it; ++it) {
        trip.emplace_back(nv + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        trip.emplace_back(static_cast<int>(it.col()), nv + static_cast<int>(it.row()), it.value());
      }
    SparseMat saddle(nv + np, nv + np);
    saddle.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<SparseMat> lu(saddle);
    REQUIRE(lu.info() == Eigen::Success);

    // the solve reproduces a manufactured solution
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(nv + np, -1.0, 1.0);
    Eigen::VectorXd y = lu.solve(saddle * x);
    CHECK((y - x).norm() < 1e-8 * x.norm());
  }
}

TEST_CASE("interpolation and pointwise evaluation agree") {
  const Mesh m = generate_channel_mesh(5, 1, 4, 2);
  const VelocityField v = interpolate(m, [](double x, double y) {
    return Eigen::Vector2d(x + 2.0 * y, 1.0 - y);
  });
  // linear fields are reproduced exactly anywhere inside each triangle
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double l1 = 0.2, l2 = 0.3, l3 = 0.5;
    const Eigen::Vector2d p =
        l1 * m.nodes[tri[0]] + l2 * m.nodes[tri[1]] + l3 * m.nodes[tri[2]];
    const Eigen::Vector2d val = eval_velocity(m, v, t, l1, l2, l3);
    CHECK(val.x() == doctest::Approx(p.x() + 2.0 * p.y()).epsilon(1e-13));
    CHECK(val.y() == doctest::Approx(1.0 - p.y()).epsilon(1e-13));
    const Eigen::Matrix2d grad = eval_velocity_gradient(m, v, t, l1, l2, l3);
    CHECK(grad(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(grad(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(grad(1, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(grad(1, 1) == doctest::Approx(-1.0).epsilon(1e-12));
  }

  const PressureField p = interpolate_pressure(m, [](double x, double) { return 1.0 - x / 5.0; });
  const auto& tri = m.triangles[0];
  const double centroid_x = (m.nodes[tri[0]].x() + m.nodes[tri[1]].x() + m.nodes[tri[2]].x()) / 3.0;
  CHECK(eval_pressure(m, p, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3) ==
        doctest::Approx(1.0 - centroid_x / 5.0).epsilon(1e-13));
}
