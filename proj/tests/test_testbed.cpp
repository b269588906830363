#include <doctest.h>

#include <cmath>

#include "fdc/testbed.hpp"
#include "oracles.hpp"

using namespace fdc;

namespace {

const PoiseuilleCase kCase;

VelocityField exact_interpolant(const Mesh& mesh) {
  return interpolate(mesh, [](double x, double y) { return kCase.velocity(x, y); });
}

}  // namespace

TEST_CASE("Poiseuille reference values") {
  CHECK(kCase.velocity(2.5, 0.5).x() == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(kCase.velocity(2.5, 0.5).y() == 0.0);
  CHECK(kCase.velocity(1.0, 0.0).x() == 0.0);  // no-slip at the walls
  CHECK(kCase.velocity(1.0, 1.0).x() == 0.0);
  for (double y : {0.1, 0.5, 0.9}) CHECK(kCase.pressure(5.0, y) == doctest::Approx(0.0).scale(1.0));
  CHECK(kCase.pressure(0.0, 0.3) == doctest::Approx(1.0).epsilon(1e-14));

  const Eigen::Matrix2d g = kCase.velocity_gradient(2.0, 0.25);
  CHECK(g(0, 1) == doctest::Approx(10.0 * (1.0 - 2.0 * 0.25)).epsilon(1e-13));
  CHECK(g(0, 0) == 0.0);

  const Mesh mesh = generate_channel_mesh(5, 1, 10, 4);
  const ModelData d = kCase.exact_data(mesh);
  CHECK(d.f.norm() == 0.0);
  // outflow traction at mid-height: (-50 y^2 (1-y)^2, 0) = (-3.125, 0)
  const auto outflow = boundary_nodes(mesh, NodeTag::Outflow);
  for (size_t k = 0; k < outflow.size(); ++k) {
    const double y = mesh.nodes[outflow[k]].y();
    CHECK(d.h.values[k] == doctest::Approx(-50.0 * y * y * (1.0 - y) * (1.0 - y)).epsilon(1e-13));
    CHECK(d.h.values[outflow.size() + k] == 0.0);
  }
  const auto inflow = boundary_nodes(mesh, NodeTag::Inflow);
  for (size_t k = 0; k < inflow.size(); ++k) {
    const double y = mesh.nodes[inflow[k]].y();
    CHECK(d.g.values[k] == doctest::Approx(10.0 * y * (1.0 - y)).epsilon(1e-13));
  }
}

TEST_CASE("noise injection hits the target L3 norm exactly") {
  const Mesh mesh = generate_channel_mesh(5, 1, 20, 8);
  const VelocityField clean = exact_interpolant(mesh);

  SUBCASE("zero level returns the clean field") {
    const VelocityField u = add_noise(mesh, clean, {0.0, 9});
    CHECK(u.coeffs == clean.coeffs);
  }
  SUBCASE("calibration and determinism") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const VelocityField u = add_noise(mesh, clean, {0.1, seed});
      VelocityField diff{u.coeffs - clean.coeffs};
      CHECK(norm_l3(mesh, diff) == doctest::Approx(0.1).epsilon(1e-10));
    }
    const VelocityField a = add_noise(mesh, clean, {0.1, 5});
    const VelocityField b = add_noise(mesh, clean, {0.1, 5});
    CHECK(a.coeffs == b.coeffs);
    const VelocityField c = add_noise(mesh, clean, {0.1, 6});
    CHECK((a.coeffs - c.coeffs).norm() > 0.0);
  }
  SUBCASE("bubbles are untouched") {
    const VelocityField u = add_noise(mesh, clean, {0.1, 3});
    const int nvc = velocity_dofs_per_component(mesh);
    for (int c = 0; c < 2; ++c)
      for (int t = 0; t < mesh.num_triangles(); ++t)
        CHECK(u.coeffs[c * nvc + mesh.num_nodes() + t] == 0.0);
  }
  SUBCASE("invalid level is rejected") {
    CHECK_THROWS_AS(add_noise(mesh, clean, {-0.1, 1}), std::invalid_argument);
  }
}

TEST_CASE("norms") {
  const Mesh mesh = generate_channel_mesh(5, 1, 10, 4);

  SUBCASE("constant fields have closed-form norms") {
    const VelocityField one = interpolate(mesh, [](double, double) {
      return Eigen::Vector2d(1.0, 0.0);
    });
    CHECK(norm_l2(mesh, one) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
    CHECK(norm_l3(mesh, one) == doctest::Approx(std::cbrt(5.0)).epsilon(1e-12));
    CHECK(norm_h1(mesh, one) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
    CHECK(norm_l2(mesh, VelocityField::zero(mesh)) == 0.0);
  }
  SUBCASE("homogeneity and triangle inequality") {
    const VelocityField v = exact_interpolant(mesh);
    VelocityField w = interpolate(mesh, [](double x, double y) {
      return Eigen::Vector2d(std::sin(x), std::cos(3.0 * y));
    });
    VelocityField scaled{-2.5 * v.coeffs};
    CHECK(norm_l3(mesh, scaled) == doctest::Approx(2.5 * norm_l3(mesh, v)).epsilon(1e-12));
    CHECK(norm_l2(mesh, scaled) == doctest::Approx(2.5 * norm_l2(mesh, v)).epsilon(1e-12));
    VelocityField sum{v.coeffs + w.coeffs};
    for (auto norm : {norm_l2, norm_l3, norm_h1})
      CHECK(norm(mesh, sum) <= norm(mesh, v) + norm(mesh, w) + 1e-12);
  }
  SUBCASE("H1 norm of the exact interpolant approaches sqrt(550/3)") {
    const Mesh fine = generate_channel_mesh(5, 1, 40, 16);
    CHECK(norm_h1(fine, exact_interpolant(fine)) ==
          doctest::Approx(std::sqrt(550.0 / 3.0)).epsilon(0.01));
  }
  SUBCASE("L2 norm agrees with an independent quadrature oracle") {
    // The norm of the nodal interpolant differs from the analytic norm only
    // by interpolation error, O(h^2); ny = 16 keeps that below the 1%
    // comparison tolerance.
    const Mesh fine = generate_channel_mesh(5, 1, 40, 16);
    const VelocityField v = exact_interpolant(fine);
    const double oracle = std::sqrt(test::integrate_mesh(fine, [&](double x, double y) {
      const double ux = 10.0 * y * (1.0 - y);
      (void)x;
      return ux * ux;
    }));
    CHECK(norm_l2(fine, v) == doctest::Approx(oracle).epsilon(0.01));
  }
}

TEST_CASE("error norms against the analytic reference") {
  const Mesh coarse = generate_channel_mesh(5, 1, 10, 4);
  const Mesh fine = generate_channel_mesh(5, 1, 20, 8);

  const SystemMatrices mc = assemble_system(coarse, exact_interpolant(coarse));
  const SystemMatrices mf = assemble_system(fine, exact_interpolant(fine));

  const PressureField pc = interpolate_pressure(coarse, [](double x, double y) {
    return kCase.pressure(x, y);
  });
  const ErrorNorms ec = error_norms(coarse, mc, exact_interpolant(coarse), &pc, kCase);
  const PressureField pf = interpolate_pressure(fine, [](double x, double y) {
    return kCase.pressure(x, y);
  });
  const ErrorNorms ef = error_norms(fine, mf, exact_interpolant(fine), &pf, kCase);

  // interpolation error rates: L2 ~ h^2, H1 ~ h
  CHECK(ef.err_u_l2 < 0.3 * ec.err_u_l2);
  CHECK(ef.err_u_h1 < 0.6 * ec.err_u_h1);
  // the linear pressure is reproduced exactly
  CHECK(ec.err_p_l2 < 1e-12);

  // The reference profile depends only on y, so its nodal interpolant is
  // discretely divergence-free to roundoff on every mesh.
  CHECK(ec.div_h < 1e-12);
  CHECK(ef.div_h < 1e-12);

  // A genuinely curved divergence-free field is only approximately
  // divergence-free after interpolation, and improves under refinement.
  auto curl_field = [](const Mesh& m) {
    return interpolate(m, [](double x, double y) {
      return Eigen::Vector2d(std::sin(x) * std::cos(y), -std::cos(x) * std::sin(y));
    });
  };
  const double div_c = discrete_divergence_norm(mc, curl_field(coarse));
  const double div_f = discrete_divergence_norm(mf, curl_field(fine));
  CHECK(div_f < 0.7 * div_c);

  // missing pressure reports NaN
  const ErrorNorms en = error_norms(coarse, mc, exact_interpolant(coarse), nullptr, kCase);
  CHECK(std::isnan(en.err_p_l2));
  CHECK(en.err_u_l2 == doctest::Approx(ec.err_u_l2).epsilon(1e-12));
}

TEST_CASE("force prior offset") {
  const Mesh mesh = generate_channel_mesh(5, 1, 40, 16);
  const VelocityField f = force_prior_offset(mesh, 5.0);

  // normalized to the requested L2 magnitude
  CHECK(norm_l2(mesh, f) == doctest::Approx(5.0).epsilon(1e-12));

  // zero normal trace: no harmonic-gradient Helmholtz component, so the
  // misspecification is fully visible in the velocity data
  const int nvc = velocity_dofs_per_component(mesh);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const auto& x = mesh.nodes[i];
    if (x.x() == 0.0 || x.x() == mesh.length) CHECK(f.coeffs[i] == doctest::Approx(0.0));
    if (x.y() == 0.0 || x.y() == mesh.height)
      CHECK(f.coeffs[nvc + i] == doctest::Approx(0.0));
  }

  // interpolant of a divergence-free profile: small discrete divergence
  const SystemMatrices m = assemble_system(mesh, f);
  Eigen::VectorXd div = m.B * f.coeffs;
  CHECK(std::sqrt(div.dot(div)) < 1e-2 * f.coeffs.norm());
}

TEST_CASE("linearization experiment harness") {
  const auto rows = linearization_experiment({4, 8}, {0.0, 0.2}, 101);
  REQUIRE(rows.size() == 4);

  for (const auto& r : rows) {
    CHECK(r.err_u_h1 > 0.0);
    CHECK(r.err_p_l2 > 0.0);
  }
  // delta = 0 rows carry only discretization error and refine with the mesh
  const auto& clean4 = rows[0];
  const auto& clean8 = rows[2];
  REQUIRE(clean4.delta == 0.0);
  REQUIRE(clean8.delta == 0.0);
  CHECK(clean8.err_u_h1 < clean4.err_u_h1);

  // noise dominates discretization on the finer mesh
  CHECK(rows[3].err_u_h1 > clean8.err_u_h1);

  // deterministic given the seed
  const auto again = linearization_experiment({4, 8}, {0.0, 0.2}, 101);
  for (size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].err_u_h1 == again[k].err_u_h1);
    CHECK(rows[k].err_p_l2 == again[k].err_p_l2);
  }
}
