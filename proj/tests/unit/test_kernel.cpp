#include <doctest.h>

#include <cmath>
#include <random>

#include <translab/error.hpp>
#include <translab/kernel.hpp>

#include "support/fixtures.hpp"

using namespace translab;

namespace {

// Relaxed geometry whose damping reaches the interface with b = value there.
Geometry relaxed_geometry(double value) {
  GeometryDescriptor d = fixtures::golden_annulus();
  d.relaxed = true;
  d.damping.value = value;
  d.damping.radial_inner = 0.2;
  d.damping.radial_outer = 0.9;
  d.damping.radial_ramp = 0.1;
  return build_geometry(d);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ConfigParseError;
}

}  // namespace

TEST_CASE("build_kernel constants") {
  const MemoryKernel k = build_kernel({{0.5, 1.0}});
  CHECK(k.k0() == 0.5);
  CHECK(k.c_bound() == 1.0);
  CHECK(build_kernel({{0.25, 1.0}, {0.25, 2.0}}).k0() == 0.75);
  CHECK(code_of([] { build_kernel({{-0.1, 1.0}}); }) == ErrorCode::NegativeAmplitude);
  CHECK(code_of([] { build_kernel({}); }) == ErrorCode::EmptyKernel);
  CHECK(code_of([] { build_kernel({{0.1, 0.0}}); }) == ErrorCode::NonpositiveRelaxationTime);
}

TEST_CASE("kernel monotonicity and decay bound on random Prony sums") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> amp(0.0, 2.0), tau(0.05, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PronyTerm> terms;
    const int m = 1 + trial % 4;
    double k0 = 0.0;
    for (int j = 0; j < m; ++j) {
      terms.push_back({amp(rng), tau(rng)});
      k0 += terms.back().amplitude * terms.back().tau;
    }
    const MemoryKernel k = build_kernel(terms);
    CHECK(k.k0() == k0);
    for (int i = 0; i <= 1000; ++i) {
      const double s = 20.0 * k.max_tau() * i / 1000.0;
      CHECK(k.g(s) > 0.0);
      CHECK(k.g_prime(s) <= 0.0);
      CHECK(k.g(s) + k.c_bound() * k.g_prime(s) <= 1e-12);
    }
  }
}

TEST_CASE("check_compat") {
  GeometryDescriptor d = fixtures::golden_annulus();
  const MemoryKernel half = build_kernel({{0.5, 1.0}});
  CHECK(check_compat(half, build_geometry(d)).l == doctest::Approx(0.5));
  CHECK(check_compat(half, build_geometry(d)).valid);
  d.damping.value = 2.0;
  CHECK(check_compat(half, build_geometry(d)).l == doctest::Approx(0.0));
  CHECK_FALSE(check_compat(half, build_geometry(d)).valid);
  d.damping.value = 1.0;
  const KernelGeometryCompat c = check_compat(build_kernel({{1.5, 1.0}}), build_geometry(d));
  CHECK(c.l == doctest::Approx(-0.5));
  CHECK_FALSE(c.valid);
}

TEST_CASE("apply_G vanishes when b = 0 on the interface") {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  BoundaryTrace f = BoundaryTrace::zeros(0.0, 0.01, 200, {0.0, 0.25, 0.5});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  for (double& v : f.values) v = n(rng);
  const BoundaryTrace out = apply_G(fixtures::golden_kernel(), g, f);
  for (double v : out.values) CHECK(v == 0.0);
}

TEST_CASE("apply_G Dirac and constant oracles") {
  const Geometry g = relaxed_geometry(1.0);
  const MemoryKernel k = build_kernel({{0.5, 1.0}});
  const double dt = 1e-3;
  const std::size_t nt = 8000;
  BoundaryTrace f = BoundaryTrace::zeros(0.0, dt, nt, {0.0});
  const std::size_t i0 = 1000;
  f.at(i0, 0) = 1.0 / dt;
  const BoundaryTrace out = apply_G(k, g, f);
  for (std::size_t i = i0 + 10; i < nt; i += 97) {
    const double expected = 0.5 * std::exp(-(f.times[i] - f.times[i0]));
    CHECK(out.at(i, 0) == doctest::Approx(expected).epsilon(1e-6));
  }
  for (std::size_t i = 0; i < i0; ++i) CHECK(out.at(i, 0) == 0.0);

  BoundaryTrace one = BoundaryTrace::zeros(0.0, dt, 40000, {0.0});
  for (double& v : one.values) v = 1.0;
  const BoundaryTrace plateau = apply_G(k, g, one);
  CHECK(plateau.at(39999, 0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("apply_G_adjoint is the discrete adjoint") {
  const Geometry g = relaxed_geometry(0.8);
  const MemoryKernel k = build_kernel({{0.3, 0.7}, {0.2, 2.0}});
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 1);
  BoundaryTrace f = BoundaryTrace::zeros(0.0, 0.02, 300, {0.0, 0.3, 0.6});
  BoundaryTrace h = f;
  for (double& v : f.values) v = n(rng);
  for (double& v : h.values) v = n(rng);
  const BoundaryTrace gf = apply_G(k, g, f);
  const BoundaryTrace gth = apply_G_adjoint(k, g, h);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    lhs += gf.values[i] * h.values[i];
    rhs += f.values[i] * gth.values[i];
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("nonuniform time grid is rejected") {
  const Geometry g = relaxed_geometry(1.0);
  BoundaryTrace f = BoundaryTrace::zeros(0.0, 0.1, 10, {0.0});
  f.times[5] += 0.01;
  CHECK(code_of([&] { apply_G(fixtures::golden_kernel(), g, f); }) == ErrorCode::NonuniformTimeGrid);
}

TEST_CASE("Neumann inversion") {
  const MemoryKernel k = build_kernel({{0.5, 1.0}});
  BoundaryTrace y = BoundaryTrace::zeros(0.0, 0.01, 500, {0.0, 0.5});
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0, 1);
  for (double& v : y.values) v = n(rng);

  const NeumannResult id = invert_I_minus_G(k, build_geometry(fixtures::golden_annulus()), y);
  CHECK(id.terms == 1);
  CHECK(id.x.values == y.values);

  const NeumannResult r = invert_I_minus_G(k, relaxed_geometry(1.0), y);
  CHECK(r.terms <= 35);
  CHECK(r.residual <= 1e-9);

  CHECK(code_of([&] { invert_I_minus_G(k, relaxed_geometry(2.0), y); }) == ErrorCode::NotAContraction);
}

TEST_CASE("power iteration norm stays below the Young bound") {
  const MemoryKernel k = build_kernel({{0.5, 1.0}});
  const Geometry g = relaxed_geometry(1.0);
  const double est = estimate_G_norm(k, g, 400, 0.05, 4, 21, 100);
  CHECK(est <= k.k0() * g.max_b_on_interface() + 1e-3);
  CHECK(est > 0.3);
}
