#include "gmoe/generator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gmoe {
namespace {

constexpr double kLeak = 0.01;

double leaky_relu(double x) { return x >= 0.0 ? x : kLeak * x; }
double leaky_relu_grad(double x) { return x >= 0.0 ? 1.0 : kLeak; }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

void affine(std::span<const double> w, std::span<const double> b,
            std::span<const double> x, std::span<double> y) {
  const std::size_t rows = b.size(), cols = x.size();
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b[r];
    const double* wr = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

}  // namespace

void mlp_forward(const MlpShape& s, std::span<const double> theta,
                 std::span<const double> x, MlpCache& cache) {
  if (static_cast<int>(theta.size()) != s.param_count())
    throw ConfigError("parameter vector does not match net shape");
  if (static_cast<int>(x.size()) != s.in)
    throw ConfigError("input dimension mismatch");
  cache.x.assign(x.begin(), x.end());
  cache.a1.resize(static_cast<std::size_t>(s.h1));
  cache.y1.resize(static_cast<std::size_t>(s.h1));
  cache.a2.resize(static_cast<std::size_t>(s.h2));
  cache.y2.resize(static_cast<std::size_t>(s.h2));
  cache.raw.resize(static_cast<std::size_t>(s.out));

  affine(theta.subspan(static_cast<std::size_t>(s.w1()), static_cast<std::size_t>(s.h1 * s.in)),
         theta.subspan(static_cast<std::size_t>(s.b1()), static_cast<std::size_t>(s.h1)), x,
         cache.a1);
  for (int i = 0; i < s.h1; ++i)
    cache.y1[static_cast<std::size_t>(i)] = leaky_relu(cache.a1[static_cast<std::size_t>(i)]);
  affine(theta.subspan(static_cast<std::size_t>(s.w2()), static_cast<std::size_t>(s.h2 * s.h1)),
         theta.subspan(static_cast<std::size_t>(s.b2()), static_cast<std::size_t>(s.h2)),
         cache.y1, cache.a2);
  for (int i = 0; i < s.h2; ++i)
    cache.y2[static_cast<std::size_t>(i)] = leaky_relu(cache.a2[static_cast<std::size_t>(i)]);
  affine(theta.subspan(static_cast<std::size_t>(s.w3()), static_cast<std::size_t>(s.out * s.h2)),
         theta.subspan(static_cast<std::size_t>(s.b3()), static_cast<std::size_t>(s.out)),
         cache.y2, cache.raw);
}

void mlp_backward(const MlpShape& s, std::span<const double> theta,
                  const MlpCache& cache, std::span<const double> d_raw,
                  std::span<double> grad) {
  if (static_cast<int>(d_raw.size()) != s.out ||
      static_cast<int>(grad.size()) < s.param_count())
    throw ConfigError("backward buffers do not match net shape");
  if (cache.raw.empty()) throw ConfigError("forward cache missing");

  std::vector<double> dy2(static_cast<std::size_t>(s.h2), 0.0);
  {
    double* gw3 = grad.data() + s.w3();
    double* gb3 = grad.data() + s.b3();
    const double* w3 = theta.data() + s.w3();
    for (int r = 0; r < s.out; ++r) {
      const double dr = d_raw[static_cast<std::size_t>(r)];
      if (dr == 0.0) continue;
      gb3[r] += dr;
      for (int c = 0; c < s.h2; ++c) {
        gw3[r * s.h2 + c] += dr * cache.y2[static_cast<std::size_t>(c)];
        dy2[static_cast<std::size_t>(c)] += dr * w3[r * s.h2 + c];
      }
    }
  }
  std::vector<double> dy1(static_cast<std::size_t>(s.h1), 0.0);
  {
    double* gw2 = grad.data() + s.w2();
    double* gb2 = grad.data() + s.b2();
    const double* w2 = theta.data() + s.w2();
    for (int r = 0; r < s.h2; ++r) {
      const double da = dy2[static_cast<std::size_t>(r)] *
                        leaky_relu_grad(cache.a2[static_cast<std::size_t>(r)]);
      if (da == 0.0) continue;
      gb2[r] += da;
      for (int c = 0; c < s.h1; ++c) {
        gw2[r * s.h1 + c] += da * cache.y1[static_cast<std::size_t>(c)];
        dy1[static_cast<std::size_t>(c)] += da * w2[r * s.h1 + c];
      }
    }
  }
  {
    double* gw1 = grad.data() + s.w1();
    double* gb1 = grad.data() + s.b1();
    for (int r = 0; r < s.h1; ++r) {
      const double da = dy1[static_cast<std::size_t>(r)] *
                        leaky_relu_grad(cache.a1[static_cast<std::size_t>(r)]);
      if (da == 0.0) continue;
      gb1[r] += da;
      for (int c = 0; c < s.in; ++c)
        gw1[r * s.in + c] += da * cache.x[static_cast<std::size_t>(c)];
    }
  }
}

int GeneratorConfig::rows() const {
  return mode == GeneratorMode::community ? t : n;
}

int GeneratorConfig::output_dim() const {
  switch (mode) {
    case GeneratorMode::latent:
      return (train_q ? n : 0) + n * d;
    case GeneratorMode::community:
      return t * d;
    case GeneratorMode::adjacency:
      return n * (n - 1) / 2;
  }
  return 0;
}

int GeneratorConfig::param_count() const {
  return mlp().param_count() + (mode == GeneratorMode::community ? t : 0);
}

MlpShape GeneratorConfig::mlp() const {
  return MlpShape{input_dim, hidden1, hidden2, output_dim()};
}

void GeneratorConfig::validate() const {
  if (input_dim < 1 || hidden1 < 1 || hidden2 < 1)
    throw ConfigError("net dimensions must be positive");
  if (n < 1) throw ConfigError("generator node count must be >= 1");
  if (mode != GeneratorMode::adjacency && d < 1)
    throw ConfigError("embedding dimension must be >= 1");
  if (mode == GeneratorMode::community && t < 1)
    throw ConfigError("community count must be >= 1");
}

GeneratorParams GeneratorParams::init(const GeneratorConfig& cfg,
                                      std::uint64_t seed) {
  cfg.validate();
  GeneratorParams p;
  p.cfg = cfg;
  p.theta.assign(static_cast<std::size_t>(cfg.param_count()), 0.0);
  Rng rng(seed);
  const MlpShape s = cfg.mlp();
  // Community embeddings prefer weak noise coupling: the objective constrains
  // expected statistics only, and noise-induced spread biases them through
  // curvature, so the weight scale starts an order of magnitude down. The
  // head biases start block-orthogonal (each community leaning on its own
  // coordinate range): coincident or colinear community embeddings are
  // self-trapping saddles of the moment objective. The per-node modes keep
  // the plain fan-based init with zero biases.
  const double weight_scale = cfg.mode == GeneratorMode::community ? 0.1 : 1.0;
  auto fill = [&](int off, int rows, int cols) {
    const double a = weight_scale * std::sqrt(6.0 / (rows + cols));
    for (int i = 0; i < rows * cols; ++i)
      p.theta[static_cast<std::size_t>(off + i)] = a * (2.0 * rng.uniform01() - 1.0);
  };
  fill(s.w1(), s.h1, s.in);
  fill(s.w2(), s.h2, s.h1);
  fill(s.w3(), s.out, s.h2);
  if (cfg.mode == GeneratorMode::community) {
    const int block = std::max(1, cfg.d / cfg.t);
    for (int c = 0; c < cfg.t; ++c)
      for (int k = 0; k < cfg.d; ++k) {
        const bool own = k / block == c;
        p.theta[static_cast<std::size_t>(s.b3() + c * cfg.d + k)] =
            (own ? 0.0 : -2.0) + 0.2 * (2.0 * rng.uniform01() - 1.0);
      }
  }
  return p;
}

std::span<const double> GeneratorParams::logits() const {
  if (cfg.mode != GeneratorMode::community) return {};
  return {theta.data() + cfg.mlp().param_count(), static_cast<std::size_t>(cfg.t)};
}

std::span<double> GeneratorParams::logits() {
  if (cfg.mode != GeneratorMode::community) return {};
  return {theta.data() + cfg.mlp().param_count(), static_cast<std::size_t>(cfg.t)};
}

LatentOutput generator_forward(const GeneratorParams& params,
                               std::span<const double> omega) {
  const auto& cfg = params.cfg;
  const MlpShape s = cfg.mlp();
  LatentOutput out;
  out.mode = cfg.mode;
  out.d = cfg.d;
  mlp_forward(s, std::span<const double>(params.theta).subspan(0, static_cast<std::size_t>(s.param_count())),
              omega, out.cache);
  const auto& raw = out.cache.raw;

  switch (cfg.mode) {
    case GeneratorMode::latent: {
      out.q.assign(static_cast<std::size_t>(cfg.n), 1.0);
      if (cfg.train_q)
        for (int i = 0; i < cfg.n; ++i)
          out.q[static_cast<std::size_t>(i)] = logistic(raw[static_cast<std::size_t>(i)]);
      const int z_off = cfg.train_q ? cfg.n : 0;
      out.z.resize(static_cast<std::size_t>(cfg.n) * cfg.d);
      for (int i = 0; i < cfg.n * cfg.d; ++i)
        out.z[static_cast<std::size_t>(i)] = softplus(raw[static_cast<std::size_t>(z_off + i)]);
      break;
    }
    case GeneratorMode::community: {
      out.z.resize(static_cast<std::size_t>(cfg.t) * cfg.d);
      for (int i = 0; i < cfg.t * cfg.d; ++i)
        out.z[static_cast<std::size_t>(i)] = softplus(raw[static_cast<std::size_t>(i)]);
      break;
    }
    case GeneratorMode::adjacency: {
      out.q.assign(static_cast<std::size_t>(cfg.n), 1.0);  // fixed size
      out.edge_prob.resize(raw.size());
      for (std::size_t i = 0; i < raw.size(); ++i)
        out.edge_prob[i] = std::clamp(logistic(raw[i]), cfg.eps_y, 1.0 - cfg.eps_y);
      return out;
    }
  }
  // Norm floor: a vanishing embedding gets eps_z added to its first
  // coordinate; the shift is constant so gradients pass through unchanged.
  for (int r = 0; r < cfg.rows(); ++r) {
    double nrm = 0.0;
    for (int c = 0; c < cfg.d; ++c) {
      const double v = out.z[static_cast<std::size_t>(r) * cfg.d + c];
      nrm += v * v;
    }
    if (std::sqrt(nrm) < cfg.eps_z)
      out.z[static_cast<std::size_t>(r) * cfg.d] += cfg.eps_z;
  }
  return out;
}

void generator_backward(const GeneratorParams& params, const LatentOutput& out,
                        const LatentUpstream& up, std::span<double> grad) {
  const auto& cfg = params.cfg;
  const MlpShape s = cfg.mlp();
  if (static_cast<int>(grad.size()) != cfg.param_count())
    throw ConfigError("gradient buffer does not match parameter count");
  if (out.cache.raw.empty()) throw ConfigError("forward cache missing");

  std::vector<double> d_raw(out.cache.raw.size(), 0.0);
  switch (cfg.mode) {
    case GeneratorMode::latent: {
      if (!up.dq.empty() && cfg.train_q) {
        if (static_cast<int>(up.dq.size()) != cfg.n)
          throw ConfigError("dq dimension mismatch");
        for (int i = 0; i < cfg.n; ++i) {
          const double qi = out.q[static_cast<std::size_t>(i)];
          d_raw[static_cast<std::size_t>(i)] = up.dq[static_cast<std::size_t>(i)] * qi * (1.0 - qi);
        }
      }
      if (!up.dz.empty()) {
        if (up.dz.size() != out.z.size())
          throw ConfigError("dz dimension mismatch");
        const int z_off = cfg.train_q ? cfg.n : 0;
        for (std::size_t i = 0; i < out.z.size(); ++i)
          d_raw[static_cast<std::size_t>(z_off) + i] =
              up.dz[i] * logistic(out.cache.raw[static_cast<std::size_t>(z_off) + i]);
      }
      break;
    }
    case GeneratorMode::community: {
      if (!up.dz.empty()) {
        if (up.dz.size() != out.z.size())
          throw ConfigError("dz dimension mismatch");
        for (std::size_t i = 0; i < out.z.size(); ++i)
          d_raw[i] = up.dz[i] * logistic(out.cache.raw[i]);
      }
      break;
    }
    case GeneratorMode::adjacency: {
      if (!up.d_edge_prob.empty()) {
        if (up.d_edge_prob.size() != out.edge_prob.size())
          throw ConfigError("edge gradient dimension mismatch");
        for (std::size_t i = 0; i < out.edge_prob.size(); ++i) {
          const double y = out.edge_prob[i];
          if (y <= cfg.eps_y || y >= 1.0 - cfg.eps_y) continue;  // clamp active
          d_raw[i] = up.d_edge_prob[i] * y * (1.0 - y);
        }
      }
      break;
    }
  }
  mlp_backward(s, std::span<const double>(params.theta).subspan(0, static_cast<std::size_t>(s.param_count())),
               out.cache, d_raw, grad);
  if (cfg.mode == GeneratorMode::community && !up.d_logits.empty()) {
    if (static_cast<int>(up.d_logits.size()) != cfg.t)
      throw ConfigError("logit gradient dimension mismatch");
    double* gl = grad.data() + s.param_count();
    for (int c = 0; c < cfg.t; ++c) gl[c] += up.d_logits[static_cast<std::size_t>(c)];
  }
}

std::vector<double> sample_noise(Rng& rng, int input_dim) {
  std::vector<double> omega(static_cast<std::size_t>(input_dim));
  for (auto& v : omega) v = rng.normal();
  return omega;
}

double weight_penalty(std::span<const double> theta, double lambda, double kappa,
                      std::span<double> grad_out) {
  if (lambda < 0.0 || kappa <= 0.0)
    throw ConfigError("penalty requires lambda >= 0 and kappa > 0");
  double sq = 0.0;
  for (double v : theta) sq += v * v;
  const double nrm = std::sqrt(sq);
  if (!grad_out.empty() && grad_out.size() != theta.size())
    throw ConfigError("penalty gradient buffer size mismatch");
  if (nrm < kappa || lambda == 0.0) {
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    return 0.0;
  }
  const double excess = nrm - kappa;
  const double coef = lambda * 2.0 * excess / nrm;
  for (std::size_t i = 0; i < grad_out.size(); ++i) grad_out[i] = coef * theta[i];
  return lambda * excess * excess;
}

std::vector<double> softmax(std::span<const double> x) {
  std::vector<double> s(x.size());
  double mx = x[0];
  for (double v : x) mx = std::max(mx, v);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s[i] = std::exp(x[i] - mx);
    total += s[i];
  }
  for (auto& v : s) v /= total;
  return s;
}

void softmax_backward(std::span<const double> s, std::span<const double> ds,
                      std::span<double> out) {
  double inner = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) inner += ds[i] * s[i];
  for (std::size_t i = 0; i < s.size(); ++i) out[i] += s[i] * (ds[i] - inner);
}

}  // namespace gmoe
