#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gmoe/generator.hpp"
#include "testutil.hpp"

using namespace gmoe;

namespace {

GeneratorConfig small_cfg() {
  GeneratorConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden1 = 5;
  cfg.hidden2 = 5;
  cfg.n = 3;
  cfg.d = 2;
  return cfg;
}

}  // namespace

TEST_CASE("zero parameters: q is 1/2 and z is softplus(0) everywhere") {
  auto cfg = small_cfg();
  GeneratorParams params;
  params.cfg = cfg;
  params.theta.assign(static_cast<std::size_t>(cfg.param_count()), 0.0);
  const std::vector<double> omega(4, 0.7);
  const auto out = generator_forward(params, omega);
  for (double q : out.q) CHECK(q == doctest::Approx(0.5));
  for (double z : out.z) CHECK(z == doctest::Approx(std::log(2.0)));
}

TEST_CASE("forward is deterministic in (params, omega)") {
  const auto params = GeneratorParams::init(small_cfg(), 42);
  Rng rng(7);
  const auto omega = sample_noise(rng, 4);
  const auto a = generator_forward(params, omega);
  const auto b = generator_forward(params, omega);
  CHECK(a.q == b.q);
  CHECK(a.z == b.z);
}

TEST_CASE("outputs satisfy the head ranges over many draws") {
  const auto params = GeneratorParams::init(small_cfg(), 3);
  Rng rng(11);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto out = generator_forward(params, sample_noise(rng, 4));
    for (double q : out.q) {
      CHECK(q > 0.0);
      CHECK(q < 1.0);
    }
    for (double z : out.z) CHECK(z >= 0.0);
    for (int i = 0; i < 3; ++i) {
      double nrm = 0.0;
      for (double v : out.z_row(i)) nrm += v * v;
      CHECK(std::sqrt(nrm) >= params.cfg.eps_z);
    }
  }
}

TEST_CASE("pinned q stays at one and the head disappears from the output") {
  auto cfg = small_cfg();
  cfg.train_q = false;
  CHECK(cfg.output_dim() == cfg.n * cfg.d);
  const auto params = GeneratorParams::init(cfg, 5);
  Rng rng(5);
  const auto out = generator_forward(params, sample_noise(rng, 4));
  for (double q : out.q) CHECK(q == 1.0);
}

TEST_CASE("shape mismatches are rejected") {
  const auto params = GeneratorParams::init(small_cfg(), 1);
  CHECK_THROWS_AS(generator_forward(params, std::vector<double>{1.0, 2.0}),
                  ConfigError);
  Rng rng(2);
  const auto out = generator_forward(params, sample_noise(rng, 4));
  std::vector<double> grad(static_cast<std::size_t>(params.cfg.param_count()), 0.0);
  LatentUpstream up;
  const std::vector<double> bad_dq{1.0};
  up.dq = bad_dq;
  CHECK_THROWS_AS(generator_backward(params, out, up, grad), ConfigError);
  LatentOutput no_cache;
  no_cache.mode = GeneratorMode::latent;
  CHECK_THROWS_AS(generator_backward(params, no_cache, LatentUpstream{}, grad),
                  ConfigError);
}

TEST_CASE("zero upstream gradients give a zero parameter gradient") {
  const auto params = GeneratorParams::init(small_cfg(), 9);
  Rng rng(9);
  const auto out = generator_forward(params, sample_noise(rng, 4));
  std::vector<double> grad(static_cast<std::size_t>(params.cfg.param_count()), 0.0);
  const std::vector<double> dq(3, 0.0), dz(6, 0.0);
  LatentUpstream up;
  up.dq = dq;
  up.dz = dz;
  generator_backward(params, out, up, grad);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("backward matches finite differences of a one-hot q head") {
  auto params = GeneratorParams::init(small_cfg(), 17);
  Rng rng(17);
  const auto omega = sample_noise(rng, 4);
  const auto out = generator_forward(params, omega);
  std::vector<double> grad(static_cast<std::size_t>(params.cfg.param_count()), 0.0);
  std::vector<double> dq(3, 0.0), dz(6, 0.0);
  dq[0] = 1.0;
  LatentUpstream up;
  up.dq = dq;
  up.dz = dz;
  generator_backward(params, out, up, grad);

  const auto fd = testutil::fd_gradient(
      [&](std::span<const double> theta) {
        GeneratorParams probe = params;
        probe.theta.assign(theta.begin(), theta.end());
        return generator_forward(probe, omega).q[0];
      },
      params.theta);
  CHECK(testutil::rel_err(grad, fd) <= 1e-5);
}

TEST_CASE("backward matches finite differences of a random head projection") {
  auto params = GeneratorParams::init(small_cfg(), 23);
  Rng rng(23);
  const auto omega = sample_noise(rng, 4);
  std::vector<double> dq(3), dz(6);
  for (auto& v : dq) v = rng.normal();
  for (auto& v : dz) v = rng.normal();

  const auto out = generator_forward(params, omega);
  std::vector<double> grad(static_cast<std::size_t>(params.cfg.param_count()), 0.0);
  LatentUpstream up;
  up.dq = dq;
  up.dz = dz;
  generator_backward(params, out, up, grad);

  const auto fd = testutil::fd_gradient(
      [&](std::span<const double> theta) {
        GeneratorParams probe = params;
        probe.theta.assign(theta.begin(), theta.end());
        const auto o = generator_forward(probe, omega);
        double s = 0.0;
        for (int i = 0; i < 3; ++i) s += dq[static_cast<std::size_t>(i)] * o.q[static_cast<std::size_t>(i)];
        for (int i = 0; i < 6; ++i) s += dz[static_cast<std::size_t>(i)] * o.z[static_cast<std::size_t>(i)];
        return s;
      },
      params.theta);
  CHECK(testutil::rel_err(grad, fd) <= 1e-5);
}

TEST_CASE("adjacency mode emits clamped pair probabilities with gradients") {
  GeneratorConfig cfg;
  cfg.mode = GeneratorMode::adjacency;
  cfg.input_dim = 3;
  cfg.hidden1 = 4;
  cfg.hidden2 = 4;
  cfg.n = 4;
  auto params = GeneratorParams::init(cfg, 31);
  Rng rng(31);
  const auto omega = sample_noise(rng, 3);
  const auto out = generator_forward(params, omega);
  REQUIRE(out.edge_prob.size() == 6);
  for (double y : out.edge_prob) {
    CHECK(y >= cfg.eps_y);
    CHECK(y <= 1.0 - cfg.eps_y);
  }
  std::vector<double> dedge(6);
  for (auto& v : dedge) v = rng.normal();
  std::vector<double> grad(static_cast<std::size_t>(cfg.param_count()), 0.0);
  LatentUpstream up;
  up.d_edge_prob = dedge;
  generator_backward(params, out, up, grad);
  const auto fd = testutil::fd_gradient(
      [&](std::span<const double> theta) {
        GeneratorParams probe = params;
        probe.theta.assign(theta.begin(), theta.end());
        const auto o = generator_forward(probe, omega);
        double s = 0.0;
        for (std::size_t i = 0; i < o.edge_prob.size(); ++i)
          s += dedge[i] * o.edge_prob[i];
        return s;
      },
      params.theta);
  CHECK(testutil::rel_err(grad, fd) <= 1e-5);
}

TEST_CASE("community mode: logits gradient passes straight through") {
  GeneratorConfig cfg;
  cfg.mode = GeneratorMode::community;
  cfg.input_dim = 3;
  cfg.hidden1 = 4;
  cfg.hidden2 = 4;
  cfg.n = 50;
  cfg.d = 2;
  cfg.t = 3;
  auto params = GeneratorParams::init(cfg, 37);
  CHECK(params.logits().size() == 3);
  Rng rng(37);
  const auto out = generator_forward(params, sample_noise(rng, 3));
  CHECK(out.z.size() == 6);
  std::vector<double> grad(static_cast<std::size_t>(cfg.param_count()), 0.0);
  const std::vector<double> d_logits{0.5, -1.0, 2.0};
  LatentUpstream up;
  up.d_logits = d_logits;
  generator_backward(params, out, up, grad);
  const auto tail = std::span<const double>(grad).last(3);
  CHECK(tail[0] == 0.5);
  CHECK(tail[1] == -1.0);
  CHECK(tail[2] == 2.0);
}

TEST_CASE("noise moments and determinism") {
  Rng rng(41);
  const int draws = 100000;
  double mean = 0.0, var = 0.0;
  for (int k = 0; k < draws; ++k) {
    const auto omega = sample_noise(rng, 1);
    mean += omega[0];
    var += omega[0] * omega[0];
  }
  mean /= draws;
  var = var / draws - mean * mean;
  CHECK(std::fabs(mean) <= 4.0 / std::sqrt(static_cast<double>(draws)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));

  Rng a(99), b(99);
  for (int k = 0; k < 100; ++k) CHECK(a.normal() == b.normal());
}

TEST_CASE("weight penalty: flat inside the radius, quadratic outside") {
  std::vector<double> theta{0.3, 0.4};  // norm 0.5
  std::vector<double> grad(2, 1.0);
  CHECK(weight_penalty(theta, 2.0, 1.0, grad) == 0.0);
  CHECK(grad[0] == 0.0);
  CHECK(grad[1] == 0.0);

  // norm 2*kappa at kappa = 0.25 gives lambda * kappa^2
  theta = {0.3, 0.4};
  CHECK(weight_penalty(theta, 2.0, 0.25, grad) == doctest::Approx(2.0 * 0.0625));
}

TEST_CASE("weight penalty gradient against finite differences") {
  Rng rng(47);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> theta(10);
    for (auto& v : theta) v = rng.normal();
    std::vector<double> grad(10, 0.0);
    const double lambda = 0.7, kappa = 1.3;
    weight_penalty(theta, lambda, kappa, grad);
    double nrm = 0.0;
    for (double v : theta) nrm += v * v;
    if (std::fabs(std::sqrt(nrm) - kappa) < 1e-4) continue;  // kink
    const auto fd = testutil::fd_gradient(
        [&](std::span<const double> x) {
          return weight_penalty(x, lambda, kappa, {});
        },
        theta);
    CHECK(testutil::rel_err(grad, fd) <= 1e-5);
  }
}

TEST_CASE("softmax and its backward") {
  const std::vector<double> logits{0.2, -1.0, 3.0};
  const auto s = softmax(logits);
  CHECK(s[0] + s[1] + s[2] == doctest::Approx(1.0));
  Rng rng(53);
  std::vector<double> ds(3);
  for (auto& v : ds) v = rng.normal();
  std::vector<double> dx(3, 0.0);
  softmax_backward(s, ds, dx);
  const auto fd = testutil::fd_gradient(
      [&](std::span<const double> x) {
        const auto sx = softmax(x);
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) acc += ds[static_cast<std::size_t>(i)] * sx[static_cast<std::size_t>(i)];
        return acc;
      },
      logits);
  CHECK(testutil::rel_err(dx, fd) <= 1e-6);
}
