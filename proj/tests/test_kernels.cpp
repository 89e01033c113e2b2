#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gmoe/kernels.hpp"
#include "gmoe/rng.hpp"
#include "testutil.hpp"

using namespace gmoe;

namespace {

KernelSpec spec(KernelKind kind, int degree = 2) {
  KernelSpec k;
  k.kind = kind;
  k.degree = degree;
  return k;
}

const KernelKind kAllKinds[] = {
    KernelKind::dot_product,   KernelKind::complement_dot_product,
    KernelKind::rbf,           KernelKind::scaled_rbf,
    KernelKind::scaled_rbf_reciprocal, KernelKind::polynomial,
};

std::vector<double> random_point(Rng& rng, int d) {
  std::vector<double> z(static_cast<std::size_t>(d));
  for (auto& v : z) v = 0.05 + 2.0 * rng.uniform01();
  return z;
}

}  // namespace

TEST_CASE("dot product: parallel and orthogonal extremes") {
  const auto k = spec(KernelKind::dot_product);
  const std::vector<double> e1{1.0, 0.0}, e2{0.0, 1.0};
  CHECK(kernel_eval(k, e1, e1) == 1.0 - k.eps_phi);
  CHECK(kernel_eval(k, e1, e2) == k.eps_phi);
  const auto c = spec(KernelKind::complement_dot_product);
  CHECK(kernel_eval(c, e1, e2) == 1.0 - c.eps_phi);
  CHECK(kernel_eval(c, e1, e1) == c.eps_phi);
}

TEST_CASE("rbf: coincident points and the half-probability distance") {
  const auto k = spec(KernelKind::rbf);
  const std::vector<double> z{0.4, 1.1, 0.2};
  CHECK(kernel_eval(k, z, z) == 1.0 - k.eps_phi);
  const double shift = std::sqrt(std::log(2.0));
  const std::vector<double> a{0.0, 0.0}, b{shift, 0.0};
  CHECK(kernel_eval(k, a, b) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("polynomial: equal arguments normalize to one") {
  const auto k = spec(KernelKind::polynomial, 2);
  const std::vector<double> z{0.7, 0.3, 1.9};
  CHECK(kernel_eval(k, z, z) == 1.0 - k.eps_phi);
}

TEST_CASE("scaled rbf exceeds one at equal arguments; the reciprocal variant stays below") {
  const std::vector<double> z{1.0, 0.5};
  const auto s = spec(KernelKind::scaled_rbf);
  CHECK(kernel_eval(s, z, z) == 1.0 - s.eps_phi);  // raw 1 + |z|^2, clamped
  const auto r = spec(KernelKind::scaled_rbf_reciprocal);
  CHECK(kernel_eval(r, z, z) == doctest::Approx(1.0 / 2.25));
}

TEST_CASE("symmetry holds bit-exactly for every kernel") {
  Rng rng(5);
  for (auto kind : kAllKinds) {
    const auto k = spec(kind);
    for (int rep = 0; rep < 200; ++rep) {
      const auto a = random_point(rng, 4);
      const auto b = random_point(rng, 4);
      CHECK(kernel_eval(k, a, b) == kernel_eval(k, b, a));
    }
  }
}

TEST_CASE("outputs stay inside the clamp for extreme inputs") {
  Rng rng(7);
  for (auto kind : kAllKinds) {
    const auto k = spec(kind);
    for (int rep = 0; rep < 300; ++rep) {
      std::vector<double> a = random_point(rng, 3);
      std::vector<double> b = random_point(rng, 3);
      const double scale = rep % 3 == 0 ? 1e-5 : (rep % 3 == 1 ? 1.0 : 50.0);
      for (auto& v : a) v *= scale;
      for (auto& v : b) v *= scale;
      if (kind == KernelKind::dot_product || kind == KernelKind::complement_dot_product) {
        double na = 0.0;
        for (double v : a) na += v * v;
        if (std::sqrt(na) < k.eps_z) continue;
      }
      const double phi = kernel_eval(k, a, b);
      CHECK(phi >= k.eps_phi);
      CHECK(phi <= 1.0 - k.eps_phi);
    }
  }
}

TEST_CASE("degenerate embeddings are rejected for the normalized dot family") {
  const auto k = spec(KernelKind::dot_product);
  const std::vector<double> tiny{1e-9, 0.0}, ok{1.0, 0.0};
  CHECK_THROWS_AS(kernel_eval(k, tiny, ok), NumericError);
  CHECK_THROWS_AS(kernel_eval(spec(KernelKind::complement_dot_product), ok, tiny),
                  NumericError);
  CHECK_THROWS_AS(kernel_eval(k, ok, std::vector<double>{1.0}), ConfigError);
}

TEST_CASE("rbf gradient vanishes at coincident points") {
  const auto k = spec(KernelKind::rbf);
  const std::vector<double> z{0.3, 0.9};
  std::vector<double> g(2, 1.0);
  kernel_grad_z1(k, z, z, g);
  // clamp active at raw value 1
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("dot-product gradient at orthogonal unit vectors points along the partner") {
  // just off the clamp boundary so the raw gradient applies
  const auto k = spec(KernelKind::dot_product);
  const std::vector<double> z1{1.0, 1e-3}, z2{0.0, 1.0};
  std::vector<double> g(2);
  kernel_grad_z1(k, z1, z2, g);
  const auto fd = testutil::fd_gradient(
      [&](std::span<const double> x) {
        return kernel_eval(k, x, z2);
      },
      z1);
  CHECK(testutil::rel_err(g, fd) <= 1e-5);
  CHECK(g[1] > 0.9);  // dominated by the partner direction
}

TEST_CASE("gradients match central finite differences at random points") {
  Rng rng(11);
  for (auto kind : kAllKinds) {
    KernelSpec k = spec(kind, 1);
    int checked = 0;
    while (checked < 1000) {
      const auto a = random_point(rng, 3);
      const auto b = random_point(rng, 3);
      const double phi = kernel_eval(k, a, b);
      if (phi <= k.eps_phi + 1e-4 || phi >= 1.0 - k.eps_phi - 1e-4)
        continue;  // keep clear of the clamp so differences are smooth
      std::vector<double> g(3);
      kernel_grad_z1(k, a, b, g);
      const auto fd = testutil::fd_gradient(
          [&](std::span<const double> x) { return kernel_eval(k, x, b); }, a);
      CHECK(testutil::rel_err(g, fd) <= 1e-5);
      ++checked;
    }
  }
}

TEST_CASE("polynomial degree-1 gradient against finite differences") {
  Rng rng(13);
  const auto k = spec(KernelKind::polynomial, 1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto a = random_point(rng, 5);
    const auto b = random_point(rng, 5);
    std::vector<double> g(5);
    kernel_grad_z1(k, a, b, g);
    const auto fd = testutil::fd_gradient(
        [&](std::span<const double> x) { return kernel_eval(k, x, b); }, a);
    CHECK(testutil::rel_err(g, fd) <= 1e-5);
  }
}

TEST_CASE("kernel labels parse to kind and order") {
  const auto dp4 = parse_kernel_label("DP4");
  CHECK(dp4.kind == KernelKind::dot_product);
  CHECK(dp4.order == 4);
  const auto rbf5 = parse_kernel_label("RBF5");
  CHECK(rbf5.kind == KernelKind::rbf);
  CHECK(rbf5.order == 5);
  const auto bare = parse_kernel_label("SRBFR");
  CHECK(bare.kind == KernelKind::scaled_rbf_reciprocal);
  CHECK(bare.order == 0);
  CHECK_THROWS_AS(parse_kernel_label("XYZ3"), ConfigError);
}
