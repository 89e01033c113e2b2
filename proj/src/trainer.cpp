#include "gmoe/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gmoe {
namespace {

enum class StatKind { node, graphlet, partial };

struct StatDraw {
  StatKind kind = StatKind::node;
  int index = 0;       // class id or partial index
  int wsize = 1;       // subset size for this statistic
  double class_size = 0.0;
  EdgeCode canonical;
};

StatDraw describe_stat(const StatisticSet& stats, int f) {
  StatDraw s;
  const int nclasses = stats.registry->class_count(stats.order);
  if (f == 0) return s;
  if (f <= nclasses) {
    const auto& gc = stats.registry->classes(stats.order)[static_cast<std::size_t>(f - 1)];
    s.kind = StatKind::graphlet;
    s.index = f - 1;
    s.wsize = stats.order;
    s.class_size = static_cast<double>(gc.size);
    s.canonical = gc.canonical;
    return s;
  }
  const int k = f - 1 - nclasses;
  s.kind = StatKind::partial;
  s.index = k;
  s.wsize = stats.partials[static_cast<std::size_t>(k)].order;
  return s;
}

int draw_stat(std::span<const double> weights, double total, Rng& rng) {
  double u = rng.uniform01() * total;
  for (std::size_t f = 0; f < weights.size(); ++f) {
    u -= weights[f];
    if (u < 0.0) return static_cast<int>(f);
  }
  return static_cast<int>(weights.size()) - 1;
}

double weight_total(std::span<const double> weights) {
  double t = 0.0;
  for (double w : weights) t += w;
  return t;
}

double q_product(const LatentOutput& latent, std::span<const int> w) {
  double p = 1.0;
  for (int v : w) p *= latent.q[static_cast<std::size_t>(v)];
  return p;
}

// Sum over all 2^m patterns of prod(bit ? phi : 1-phi), credited per class.
// Recursive partial products keep it O(2^m) multiplies.
void accumulate_all_patterns(const ClassRegistry& reg, int p,
                             std::span<const double> phi, double base,
                             std::span<double> acc) {
  const int m = pair_count(p);
  auto rec = [&](auto&& self, int bit, std::uint32_t code, double prod) -> void {
    if (bit == m) {
      acc[static_cast<std::size_t>(reg.classify(EdgeCode{p, code}))] += prod;
      return;
    }
    self(self, bit + 1, code, prod * (1.0 - phi[static_cast<std::size_t>(bit)]));
    self(self, bit + 1, code | (1u << bit), prod * phi[static_cast<std::size_t>(bit)]);
  };
  rec(rec, 0, 0u, base);
}

void check_finite(std::span<const double> grad, std::int64_t iter) {
  for (double g : grad)
    if (!std::isfinite(g))
      throw NumericError("non-finite gradient at iteration " + std::to_string(iter));
}

}  // namespace

EtaResult eta(const LatentOutput& latent, const KernelSpec& kernel,
              std::span<const int> w, EdgeCode a, double class_size,
              bool want_grad) {
  const int p = static_cast<int>(w.size());
  if (a.order != p)
    throw ConfigError("pattern order does not match subset size");
  const int d = latent.d;
  const int m = pair_count(p);

  double qpre[kMaxGraphletOrder + 1], qsuf[kMaxGraphletOrder + 1];
  qpre[0] = 1.0;
  for (int k = 0; k < p; ++k)
    qpre[k + 1] = qpre[k] * latent.q[static_cast<std::size_t>(w[k])];
  qsuf[p] = 1.0;
  for (int k = p - 1; k >= 0; --k)
    qsuf[k] = qsuf[k + 1] * latent.q[static_cast<std::size_t>(w[k])];
  const double qprod = qpre[p];

  double fac[28];
  double facprod = 1.0;
  {
    int idx = 0;
    for (int ai = 0; ai < p; ++ai)
      for (int bi = ai + 1; bi < p; ++bi, ++idx) {
        const double phi = kernel_eval(kernel, latent.z_row(w[ai]), latent.z_row(w[bi]));
        fac[idx] = a.edge(ai, bi) ? phi : 1.0 - phi;
        facprod *= fac[idx];
      }
  }

  EtaResult out;
  out.value = class_size * qprod * facprod;
  if (!want_grad) return out;

  out.dq.assign(static_cast<std::size_t>(p), 0.0);
  out.dz.assign(static_cast<std::size_t>(p) * d, 0.0);
  for (int k = 0; k < p; ++k)
    out.dq[static_cast<std::size_t>(k)] = class_size * qpre[k] * qsuf[k + 1] * facprod;

  const double base = class_size * qprod;
  std::vector<double> ga(static_cast<std::size_t>(d)), gb(static_cast<std::size_t>(d));
  int idx = 0;
  for (int ai = 0; ai < p; ++ai)
    for (int bi = ai + 1; bi < p; ++bi, ++idx) {
      const double excl = base * (facprod / fac[idx]);  // factors clamped >= eps
      if (excl == 0.0) continue;
      const double sgn = a.edge(ai, bi) ? 1.0 : -1.0;
      kernel_grad_z1(kernel, latent.z_row(w[ai]), latent.z_row(w[bi]), ga);
      kernel_grad_z1(kernel, latent.z_row(w[bi]), latent.z_row(w[ai]), gb);
      for (int c = 0; c < d; ++c) {
        out.dz[static_cast<std::size_t>(ai) * d + c] += excl * sgn * ga[static_cast<std::size_t>(c)];
        out.dz[static_cast<std::size_t>(bi) * d + c] += excl * sgn * gb[static_cast<std::size_t>(c)];
      }
    }
  (void)m;
  return out;
}

EtaResult eta_node(const LatentOutput& latent, int node) {
  EtaResult out;
  out.value = latent.q[static_cast<std::size_t>(node)];
  out.dq.assign(1, 1.0);
  return out;
}

EtaResult eta_partial_star(const LatentOutput& latent, const KernelSpec& kernel,
                           std::span<const int> w, bool want_grad) {
  const int p = static_cast<int>(w.size());
  const int d = latent.d;

  double qpre[kMaxGraphletOrder + 1], qsuf[kMaxGraphletOrder + 1];
  qpre[0] = 1.0;
  for (int k = 0; k < p; ++k)
    qpre[k + 1] = qpre[k] * latent.q[static_cast<std::size_t>(w[k])];
  qsuf[p] = 1.0;
  for (int k = p - 1; k >= 0; --k)
    qsuf[k] = qsuf[k + 1] * latent.q[static_cast<std::size_t>(w[k])];
  const double qprod = qpre[p];

  double phi[kMaxGraphletOrder][kMaxGraphletOrder];
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      phi[a][b] = phi[b][a] =
          kernel_eval(kernel, latent.z_row(w[a]), latent.z_row(w[b]));

  double hub[kMaxGraphletOrder];  // prod over the spokes of one hub choice
  double total = 0.0;
  for (int h = 0; h < p; ++h) {
    double r = 1.0;
    for (int j = 0; j < p; ++j)
      if (j != h) r *= phi[h][j];
    hub[h] = r;
    total += r;
  }

  EtaResult out;
  out.value = qprod * total;
  if (!want_grad) return out;

  out.dq.assign(static_cast<std::size_t>(p), 0.0);
  out.dz.assign(static_cast<std::size_t>(p) * d, 0.0);
  for (int k = 0; k < p; ++k)
    out.dq[static_cast<std::size_t>(k)] = qpre[k] * qsuf[k + 1] * total;

  std::vector<double> g(static_cast<std::size_t>(d));
  for (int k = 0; k < p; ++k) {
    for (int j = 0; j < p; ++j) {
      if (j == k) continue;
      // hub at k, spoke j, plus hub at j, spoke k: both differentiate through
      // phi(z_k, z_j).
      const double coef = qprod * (hub[k] / phi[k][j] + hub[j] / phi[j][k]);
      kernel_grad_z1(kernel, latent.z_row(w[k]), latent.z_row(w[j]), g);
      for (int c = 0; c < d; ++c)
        out.dz[static_cast<std::size_t>(k) * d + c] += coef * g[static_cast<std::size_t>(c)];
    }
  }
  return out;
}

EtaResult eta_adjacency(const LatentOutput& latent, std::span<const int> w,
                        EdgeCode a, double class_size, bool want_grad) {
  if (latent.mode != GeneratorMode::adjacency)
    throw ConfigError("latent output is not adjacency-mode");
  const int p = static_cast<int>(w.size());
  if (a.order != p)
    throw ConfigError("pattern order does not match subset size");
  const int n = static_cast<int>(latent.q.size());

  double fac[28];
  std::int64_t pair_pos[28];
  double facprod = 1.0;
  int idx = 0;
  for (int ai = 0; ai < p; ++ai)
    for (int bi = ai + 1; bi < p; ++bi, ++idx) {
      int u = w[ai], v = w[bi];
      if (u > v) std::swap(u, v);
      const std::int64_t pos = static_cast<std::int64_t>(u) * (2 * n - u - 1) / 2 + (v - u - 1);
      const double y = latent.edge_prob[static_cast<std::size_t>(pos)];
      pair_pos[idx] = pos;
      fac[idx] = a.edge(ai, bi) ? y : 1.0 - y;
      facprod *= fac[idx];
    }

  EtaResult out;
  out.value = class_size * facprod;
  if (!want_grad) return out;
  out.dedge.reserve(static_cast<std::size_t>(idx));
  int e = 0;
  for (int ai = 0; ai < p; ++ai)
    for (int bi = ai + 1; bi < p; ++bi, ++e) {
      const double excl = class_size * (facprod / fac[e]);
      const double sgn = a.edge(ai, bi) ? 1.0 : -1.0;
      out.dedge.emplace_back(pair_pos[e], excl * sgn);
    }
  return out;
}

CommunityEtaResult eta_community(const CommunityModel& cm,
                                 const KernelSpec& kernel, EdgeCode a,
                                 double class_size, std::uint64_t budget,
                                 bool want_grad) {
  const int p = a.order;
  const int t = cm.t, d = cm.d;
  double combos = 1.0;
  for (int i = 0; i < p; ++i) combos *= t;
  if (combos > static_cast<double>(budget))
    throw ConfigError("community assignment sum exceeds budget (t^p too large)");

  // Pairwise kernel values and directional gradients between communities.
  std::vector<double> phi(static_cast<std::size_t>(t) * t);
  std::vector<double> gdir;  // grad wrt first argument, [a*t+b] row of d
  for (int ca = 0; ca < t; ++ca)
    for (int cb = 0; cb < t; ++cb)
      phi[static_cast<std::size_t>(ca) * t + cb] =
          kernel_eval(kernel, cm.z_row(ca), cm.z_row(cb));
  if (want_grad) {
    gdir.resize(static_cast<std::size_t>(t) * t * d);
    std::vector<double> g(static_cast<std::size_t>(d));
    for (int ca = 0; ca < t; ++ca)
      for (int cb = 0; cb < t; ++cb) {
        kernel_grad_z1(kernel, cm.z_row(ca), cm.z_row(cb), g);
        std::copy(g.begin(), g.end(),
                  gdir.begin() + (static_cast<std::size_t>(ca) * t + cb) * d);
      }
  }

  CommunityEtaResult out;
  if (want_grad) {
    out.dz.assign(static_cast<std::size_t>(t) * d, 0.0);
    out.ds.assign(static_cast<std::size_t>(t), 0.0);
  }

  int c[kMaxGraphletOrder] = {0};
  const int m = pair_count(p);
  double spre[kMaxGraphletOrder + 1], ssuf[kMaxGraphletOrder + 1];
  double fac[28];
  for (;;) {
    spre[0] = 1.0;
    for (int i = 0; i < p; ++i)
      spre[i + 1] = spre[i] * cm.s[static_cast<std::size_t>(c[i])];
    ssuf[p] = 1.0;
    for (int i = p - 1; i >= 0; --i)
      ssuf[i] = ssuf[i + 1] * cm.s[static_cast<std::size_t>(c[i])];
    const double sprod = spre[p];

    double facprod = 1.0;
    int idx = 0;
    for (int ai = 0; ai < p; ++ai)
      for (int bi = ai + 1; bi < p; ++bi, ++idx) {
        const double ph = phi[static_cast<std::size_t>(c[ai]) * t + c[bi]];
        fac[idx] = a.edge(ai, bi) ? ph : 1.0 - ph;
        facprod *= fac[idx];
      }
    out.value += sprod * facprod;

    if (want_grad) {
      for (int i = 0; i < p; ++i)
        out.ds[static_cast<std::size_t>(c[i])] += spre[i] * ssuf[i + 1] * facprod;
      idx = 0;
      for (int ai = 0; ai < p; ++ai)
        for (int bi = ai + 1; bi < p; ++bi, ++idx) {
          const double excl = sprod * (facprod / fac[idx]);
          if (excl == 0.0) continue;
          const double sgn = a.edge(ai, bi) ? 1.0 : -1.0;
          const double* gab = gdir.data() + (static_cast<std::size_t>(c[ai]) * t + c[bi]) * d;
          const double* gba = gdir.data() + (static_cast<std::size_t>(c[bi]) * t + c[ai]) * d;
          for (int e = 0; e < d; ++e) {
            out.dz[static_cast<std::size_t>(c[ai]) * d + e] += excl * sgn * gab[e];
            out.dz[static_cast<std::size_t>(c[bi]) * d + e] += excl * sgn * gba[e];
          }
        }
    }

    int i = p - 1;
    while (i >= 0 && c[i] == t - 1) c[i--] = 0;
    if (i < 0) break;
    ++c[i];
  }
  (void)m;

  out.value *= class_size;
  if (want_grad) {
    for (auto& v : out.dz) v *= class_size;
    for (auto& v : out.ds) v *= class_size;
  }
  return out;
}

std::vector<double> make_weights(const MomentVector& targets, WeightMode mode,
                                 double floor_delta) {
  std::vector<double> w(static_cast<std::size_t>(targets.stat_count()), 1.0);
  if (mode == WeightMode::inverse_frequency) {
    for (int f = 0; f < targets.stat_count(); ++f)
      w[static_cast<std::size_t>(f)] =
          1.0 / std::max(std::fabs(targets.stat(f)), floor_delta);
  }
  return w;
}

namespace {

// Shared minibatch pass for the per-node latent and adjacency modes. When
// grad is non-null the summed product-rule gradient is accumulated into it.
double minibatch_nodewise(const GeneratorParams& params, const KernelSpec& kernel,
                          const StatisticSet& stats, const MomentVector& targets,
                          std::span<const double> weights, double wtotal,
                          int pair_batch, int noise_batch, Rng& rng,
                          std::vector<double>* grad) {
  const auto& cfg = params.cfg;
  const int f = draw_stat(weights, wtotal, rng);
  const double hbar = targets.stat(f);
  StatDraw sd = describe_stat(stats, f);

  EdgeCode pat_a, pat_b;
  if (sd.kind == StatKind::graphlet) {
    const auto perm_a = random_permutation(rng, sd.wsize);
    const auto perm_b = random_permutation(rng, sd.wsize);
    pat_a = permute_code(sd.canonical, perm_a);
    pat_b = permute_code(sd.canonical, perm_b);
  }

  const int m2 = 2 * noise_batch;
  std::vector<std::vector<double>> omegas(static_cast<std::size_t>(m2));
  for (auto& o : omegas) o = sample_noise(rng, cfg.input_dim);
  const int l2 = 2 * pair_batch;
  std::vector<std::vector<int>> subsets(static_cast<std::size_t>(l2));
  for (auto& w : subsets)
    w = sd.wsize == 1
            ? std::vector<int>{static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n)))}
            : floyd_sample(rng, cfg.n, sd.wsize);

  const bool want_grad = grad != nullptr;
  std::vector<LatentOutput> lats(static_cast<std::size_t>(m2));
  std::vector<std::vector<EtaResult>> res(static_cast<std::size_t>(m2));
#pragma omp parallel for schedule(static)
  for (int jj = 0; jj < m2; ++jj) {
    lats[static_cast<std::size_t>(jj)] = generator_forward(params, omegas[static_cast<std::size_t>(jj)]);
    auto& row = res[static_cast<std::size_t>(jj)];
    row.resize(static_cast<std::size_t>(pair_batch));
    const int side = jj & 1;
    const EdgeCode& pat = side ? pat_b : pat_a;
    for (int i = 0; i < pair_batch; ++i) {
      const auto& w = subsets[static_cast<std::size_t>(2 * i + side)];
      switch (sd.kind) {
        case StatKind::node:
          row[static_cast<std::size_t>(i)] = eta_node(lats[static_cast<std::size_t>(jj)], w[0]);
          break;
        case StatKind::graphlet:
          row[static_cast<std::size_t>(i)] =
              cfg.mode == GeneratorMode::adjacency
                  ? eta_adjacency(lats[static_cast<std::size_t>(jj)], w, pat, sd.class_size, want_grad)
                  : eta(lats[static_cast<std::size_t>(jj)], kernel, w, pat, sd.class_size, want_grad);
          break;
        case StatKind::partial:
          row[static_cast<std::size_t>(i)] =
              eta_partial_star(lats[static_cast<std::size_t>(jj)], kernel, w, want_grad);
          break;
      }
    }
  }

  double est = 0.0;
  for (int j = 0; j < noise_batch; ++j)
    for (int i = 0; i < pair_batch; ++i)
      est += (res[static_cast<std::size_t>(2 * j + 1)][static_cast<std::size_t>(i)].value - hbar) *
             (res[static_cast<std::size_t>(2 * j)][static_cast<std::size_t>(i)].value - hbar);
  est = wtotal * est / (static_cast<double>(pair_batch) * noise_batch);

  if (want_grad) {
    const int nparams = cfg.param_count();
    std::vector<std::vector<double>> bufs(
        static_cast<std::size_t>(m2),
        std::vector<double>(static_cast<std::size_t>(nparams), 0.0));
#pragma omp parallel for schedule(static)
    for (int jj = 0; jj < m2; ++jj) {
      const int j = jj >> 1, side = jj & 1;
      std::vector<double> up_dq(static_cast<std::size_t>(cfg.n), 0.0);
      std::vector<double> up_dz;
      std::vector<double> up_dedge;
      if (cfg.mode == GeneratorMode::adjacency)
        up_dedge.assign(lats[static_cast<std::size_t>(jj)].edge_prob.size(), 0.0);
      else
        up_dz.assign(static_cast<std::size_t>(cfg.n) * cfg.d, 0.0);
      for (int i = 0; i < pair_batch; ++i) {
        const double coef =
            res[static_cast<std::size_t>(2 * j + (1 - side))][static_cast<std::size_t>(i)].value - hbar;
        if (coef == 0.0) continue;
        const auto& r = res[static_cast<std::size_t>(jj)][static_cast<std::size_t>(i)];
        const auto& w = subsets[static_cast<std::size_t>(2 * i + side)];
        for (std::size_t k = 0; k < r.dq.size(); ++k)
          up_dq[static_cast<std::size_t>(w[k])] += coef * r.dq[k];
        if (!r.dz.empty())
          for (std::size_t k = 0; k < w.size(); ++k)
            for (int c = 0; c < cfg.d; ++c)
              up_dz[static_cast<std::size_t>(w[k]) * cfg.d + c] +=
                  coef * r.dz[k * static_cast<std::size_t>(cfg.d) + c];
        for (const auto& [pos, g] : r.dedge)
          up_dedge[static_cast<std::size_t>(pos)] += coef * g;
      }
      LatentUpstream up;
      up.dq = up_dq;
      up.dz = up_dz;
      up.d_edge_prob = up_dedge;
      generator_backward(params, lats[static_cast<std::size_t>(jj)], up,
                         bufs[static_cast<std::size_t>(jj)]);
    }
    for (const auto& b : bufs)
      for (int k = 0; k < nparams; ++k) (*grad)[static_cast<std::size_t>(k)] += b[static_cast<std::size_t>(k)];
  }
  return est;
}

double minibatch_community(const GeneratorParams& params, const KernelSpec& kernel,
                           const StatisticSet& stats, const MomentVector& targets,
                           std::span<const double> weights, double wtotal,
                           int noise_batch, std::uint64_t budget, Rng& rng,
                           std::vector<double>* grad) {
  const auto& cfg = params.cfg;
  const int f = draw_stat(weights, wtotal, rng);
  const double hbar = targets.stat(f);
  StatDraw sd = describe_stat(stats, f);
  if (sd.kind == StatKind::partial)
    throw ConfigError("partial graphlets are not supported with the community model");
  if (sd.kind == StatKind::node) {
    // Fixed size: the node statistic is identically 1 and carries no gradient.
    return wtotal * (1.0 - hbar) * (1.0 - hbar);
  }

  const int m2 = 2 * noise_batch;
  std::vector<std::vector<double>> omegas(static_cast<std::size_t>(m2));
  for (auto& o : omegas) o = sample_noise(rng, cfg.input_dim);

  const bool want_grad = grad != nullptr;
  std::vector<LatentOutput> lats(static_cast<std::size_t>(m2));
  std::vector<CommunityModel> cms(static_cast<std::size_t>(m2));
  std::vector<CommunityEtaResult> etas(static_cast<std::size_t>(m2));
#pragma omp parallel for schedule(static)
  for (int jj = 0; jj < m2; ++jj) {
    lats[static_cast<std::size_t>(jj)] = generator_forward(params, omegas[static_cast<std::size_t>(jj)]);
    cms[static_cast<std::size_t>(jj)] =
        community_model_from(params, lats[static_cast<std::size_t>(jj)]);
    etas[static_cast<std::size_t>(jj)] = eta_community(
        cms[static_cast<std::size_t>(jj)], kernel, sd.canonical, sd.class_size, budget, want_grad);
  }

  double est = 0.0;
  for (int j = 0; j < noise_batch; ++j)
    est += (etas[static_cast<std::size_t>(2 * j + 1)].value - hbar) *
           (etas[static_cast<std::size_t>(2 * j)].value - hbar);
  est = wtotal * est / noise_batch;

  if (want_grad) {
    const int nparams = cfg.param_count();
    std::vector<std::vector<double>> bufs(
        static_cast<std::size_t>(m2),
        std::vector<double>(static_cast<std::size_t>(nparams), 0.0));
#pragma omp parallel for schedule(static)
    for (int jj = 0; jj < m2; ++jj) {
      const int j = jj >> 1, side = jj & 1;
      const double coef =
          etas[static_cast<std::size_t>(2 * j + (1 - side))].value - hbar;
      const auto& er = etas[static_cast<std::size_t>(jj)];
      std::vector<double> up_dz(er.dz.size());
      for (std::size_t k = 0; k < er.dz.size(); ++k) up_dz[k] = coef * er.dz[k];
      std::vector<double> ds(er.ds.size());
      for (std::size_t k = 0; k < er.ds.size(); ++k) ds[k] = coef * er.ds[k];
      std::vector<double> d_logits(static_cast<std::size_t>(cfg.t), 0.0);
      softmax_backward(cms[static_cast<std::size_t>(jj)].s, ds, d_logits);
      LatentUpstream up;
      up.dz = up_dz;
      up.d_logits = d_logits;
      generator_backward(params, lats[static_cast<std::size_t>(jj)], up,
                         bufs[static_cast<std::size_t>(jj)]);
    }
    for (const auto& b : bufs)
      for (int k = 0; k < nparams; ++k) (*grad)[static_cast<std::size_t>(k)] += b[static_cast<std::size_t>(k)];
  }
  return est;
}

double run_minibatch(const GeneratorParams& params, const KernelSpec& kernel,
                     const StatisticSet& stats, const MomentVector& targets,
                     std::span<const double> weights, int pair_batch,
                     int noise_batch, std::uint64_t budget, Rng& rng,
                     std::vector<double>* grad) {
  if (pair_batch < 1 || noise_batch < 1)
    throw ConfigError("minibatch sizes must be >= 1");
  if (static_cast<int>(weights.size()) != stats.count() ||
      targets.stat_count() != stats.count())
    throw ConfigError("weights/targets do not match the statistic set");
  const double wtotal = weight_total(weights);
  if (params.cfg.mode == GeneratorMode::community)
    return minibatch_community(params, kernel, stats, targets, weights, wtotal,
                               noise_batch, budget, rng, grad);
  return minibatch_nodewise(params, kernel, stats, targets, weights, wtotal,
                            pair_batch, noise_batch, rng, grad);
}

}  // namespace

MomentVector expected_moments(const GeneratorParams& params,
                              const KernelSpec& kernel, const StatisticSet& stats,
                              int samples, Rng& rng, std::uint64_t community_budget) {
  const auto& cfg = params.cfg;
  const int p = stats.order;
  const int nclasses = stats.registry->class_count(p);
  if (!stats.partials.empty() && cfg.mode != GeneratorMode::latent)
    throw ConfigError("partial graphlets require the per-node latent model");

  MomentVector mv;
  mv.order = p;
  mv.class_values.assign(static_cast<std::size_t>(nclasses), 0.0);
  mv.partial_values.assign(stats.partials.size(), 0.0);
  double acc_node = 0.0;

  const int m = pair_count(p);
  const bool enumerate_patterns = m <= 11 && cfg.mode != GeneratorMode::community;
  std::vector<double> phi(static_cast<std::size_t>(std::max(m, 1)));

  for (int r = 0; r < samples; ++r) {
    const auto omega = sample_noise(rng, cfg.input_dim);
    const LatentOutput lat = generator_forward(params, omega);

    if (cfg.mode == GeneratorMode::community) {
      acc_node += 1.0;
      const CommunityModel cm = community_model_from(params, lat);
      for (int cls = 0; cls < nclasses; ++cls) {
        const auto& gc = stats.registry->classes(p)[static_cast<std::size_t>(cls)];
        mv.class_values[static_cast<std::size_t>(cls)] +=
            eta_community(cm, kernel, gc.canonical,
                          static_cast<double>(gc.size), community_budget, false)
                .value;
      }
      continue;
    }

    double qmean = 0.0;
    for (double qv : lat.q) qmean += qv;
    acc_node += qmean / static_cast<double>(lat.q.size());

    const auto w = floyd_sample(rng, cfg.n, p);
    if (enumerate_patterns) {
      int idx = 0;
      for (int ai = 0; ai < p; ++ai)
        for (int bi = ai + 1; bi < p; ++bi, ++idx) {
          if (cfg.mode == GeneratorMode::adjacency) {
            int u = w[static_cast<std::size_t>(ai)], v = w[static_cast<std::size_t>(bi)];
            if (u > v) std::swap(u, v);
            const std::int64_t pos =
                static_cast<std::int64_t>(u) * (2 * cfg.n - u - 1) / 2 + (v - u - 1);
            phi[static_cast<std::size_t>(idx)] = lat.edge_prob[static_cast<std::size_t>(pos)];
          } else {
            phi[static_cast<std::size_t>(idx)] =
                kernel_eval(kernel, lat.z_row(w[static_cast<std::size_t>(ai)]),
                            lat.z_row(w[static_cast<std::size_t>(bi)]));
          }
        }
      accumulate_all_patterns(*stats.registry, p, phi, q_product(lat, w),
                              mv.class_values);
    } else {
      for (int cls = 0; cls < nclasses; ++cls) {
        const auto& gc = stats.registry->classes(p)[static_cast<std::size_t>(cls)];
        const auto pat = permute_code(gc.canonical, random_permutation(rng, p));
        mv.class_values[static_cast<std::size_t>(cls)] +=
            (cfg.mode == GeneratorMode::adjacency
                 ? eta_adjacency(lat, w, pat, static_cast<double>(gc.size), false)
                 : eta(lat, kernel, w, pat, static_cast<double>(gc.size), false))
                .value;
      }
    }
    for (std::size_t k = 0; k < stats.partials.size(); ++k) {
      const auto wk = floyd_sample(rng, cfg.n, stats.partials[k].order);
      mv.partial_values[k] += eta_partial_star(lat, kernel, wk, false).value;
    }
  }

  const double inv = 1.0 / static_cast<double>(samples);
  mv.node_stat = acc_node * inv;
  for (auto& v : mv.class_values) v *= inv;
  for (auto& v : mv.partial_values) v *= inv;
  return mv;
}

double estimate_objective(const GeneratorParams& params, const KernelSpec& kernel,
                          const StatisticSet& stats, const MomentVector& targets,
                          std::span<const double> weights, int samples, Rng& rng,
                          std::uint64_t community_budget) {
  const MomentVector mv =
      expected_moments(params, kernel, stats, samples, rng, community_budget);
  double u = 0.0;
  for (int f = 0; f < stats.count(); ++f) {
    const double dev = mv.stat(f) - targets.stat(f);
    u += weights[static_cast<std::size_t>(f)] * dev * dev;
  }
  return u;
}

double objective_exact(const GeneratorParams& params, const KernelSpec& kernel,
                       const StatisticSet& stats, const MomentVector& targets,
                       std::span<const double> weights, int noise_draws, Rng& rng) {
  const auto& cfg = params.cfg;
  if (cfg.mode == GeneratorMode::community)
    throw ConfigError("objective_exact supports the per-node models only");
  if (cfg.n > 8)
    throw ConfigError("objective_exact is limited to n <= 8");
  const int p = stats.order;
  const int nclasses = stats.registry->class_count(p);
  const int m = pair_count(p);

  std::vector<double> mean_class(static_cast<std::size_t>(nclasses), 0.0);
  std::vector<double> mean_part(stats.partials.size(), 0.0);
  double mean_node = 0.0;
  std::vector<double> phi(static_cast<std::size_t>(m));
  std::vector<int> w(static_cast<std::size_t>(p));

  for (int e = 0; e < noise_draws; ++e) {
    const auto omega = sample_noise(rng, cfg.input_dim);
    const LatentOutput lat = generator_forward(params, omega);
    double qmean = 0.0;
    for (double qv : lat.q) qmean += qv;
    mean_node += qmean / static_cast<double>(lat.q.size());

    std::vector<double> cls_acc(static_cast<std::size_t>(nclasses), 0.0);
    for_each_combination(cfg.n, p, [&](std::span<const int> idx) {
      for (int i = 0; i < p; ++i) w[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)];
      int k = 0;
      for (int ai = 0; ai < p; ++ai)
        for (int bi = ai + 1; bi < p; ++bi, ++k) {
          if (cfg.mode == GeneratorMode::adjacency) {
            const int u = w[static_cast<std::size_t>(ai)], v = w[static_cast<std::size_t>(bi)];
            const std::int64_t pos =
                static_cast<std::int64_t>(u) * (2 * cfg.n - u - 1) / 2 + (v - u - 1);
            phi[static_cast<std::size_t>(k)] = lat.edge_prob[static_cast<std::size_t>(pos)];
          } else {
            phi[static_cast<std::size_t>(k)] =
                kernel_eval(kernel, lat.z_row(w[static_cast<std::size_t>(ai)]),
                            lat.z_row(w[static_cast<std::size_t>(bi)]));
          }
        }
      accumulate_all_patterns(*stats.registry, p, phi, q_product(lat, w), cls_acc);
    });
    const double inv_subsets = 1.0 / binom(cfg.n, p);
    for (int cls = 0; cls < nclasses; ++cls)
      mean_class[static_cast<std::size_t>(cls)] +=
          cls_acc[static_cast<std::size_t>(cls)] * inv_subsets;

    for (std::size_t k = 0; k < stats.partials.size(); ++k) {
      const int pk = stats.partials[k].order;
      double acc = 0.0;
      std::vector<int> wk(static_cast<std::size_t>(pk));
      for_each_combination(cfg.n, pk, [&](std::span<const int> idx) {
        for (int i = 0; i < pk; ++i) wk[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)];
        acc += eta_partial_star(lat, kernel, wk, false).value;
      });
      mean_part[k] += acc / binom(cfg.n, pk);
    }
  }

  const double inv = 1.0 / static_cast<double>(noise_draws);
  MomentVector mv;
  mv.order = p;
  mv.node_stat = mean_node * inv;
  mv.class_values = mean_class;
  for (auto& v : mv.class_values) v *= inv;
  mv.partial_values = mean_part;
  for (auto& v : mv.partial_values) v *= inv;

  double u = 0.0;
  for (int f = 0; f < stats.count(); ++f) {
    const double dev = mv.stat(f) - targets.stat(f);
    u += weights[static_cast<std::size_t>(f)] * dev * dev;
  }
  return u;
}

double stochastic_objective(const GeneratorParams& params, const KernelSpec& kernel,
                            const StatisticSet& stats, const MomentVector& targets,
                            std::span<const double> weights, int pair_batch,
                            int noise_batch, Rng& rng, std::uint64_t community_budget) {
  return run_minibatch(params, kernel, stats, targets, weights, pair_batch,
                       noise_batch, community_budget, rng, nullptr);
}

double sgd_step(GeneratorParams& params, const KernelSpec& kernel,
                const StatisticSet& stats, const MomentVector& targets,
                std::span<const double> weights, const TrainConfig& cfg,
                double gamma, Rng& rng) {
  std::vector<double> grad(params.theta.size(), 0.0);
  double est = 0.0;
  for (int rep = 0; rep < cfg.draws_per_step; ++rep)
    est += run_minibatch(params, kernel, stats, targets, weights, cfg.pair_batch,
                         cfg.noise_batch, cfg.community_budget, rng, &grad);
  est /= cfg.draws_per_step;

  if (cfg.penalty_lambda > 0.0) {
    std::vector<double> pgrad(params.theta.size(), 0.0);
    weight_penalty(params.theta, cfg.penalty_lambda, cfg.penalty_kappa, pgrad);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += pgrad[i];
  }
  check_finite(grad, -1);
  for (std::size_t i = 0; i < grad.size(); ++i)
    params.theta[i] -= gamma * grad[i];
  return est;
}

TrainResult train(GeneratorParams params, const KernelSpec& kernel,
                  const StatisticSet& stats, const MomentVector& targets,
                  const TrainConfig& cfg,
                  const std::function<void(const TraceRow&)>& on_trace) {
  const auto& sched = cfg.schedule;
  const std::size_t phases = sched.gammas.size();
  const auto& u_raw = sched.u_abs.empty() ? sched.u_fracs : sched.u_abs;
  if (phases == 0 || u_raw.size() != phases)
    throw ConfigError("schedule needs matching step sizes and phase targets");
  for (std::size_t k = 1; k < phases; ++k)
    if (sched.gammas[k] >= sched.gammas[k - 1] || u_raw[k] >= u_raw[k - 1])
      throw ConfigError("step sizes and phase targets must strictly decrease");
  if (params.cfg.mode == GeneratorMode::community && !stats.partials.empty())
    throw ConfigError("partial graphlets are not supported with the community model");

  const auto weights = make_weights(targets, cfg.weight_mode, cfg.weight_floor);
  Rng step_rng(derive_seed(cfg.seed, "train-step"));
  Rng eval_rng(derive_seed(cfg.seed, "train-eval"));
  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  const double u0 = estimate_objective(params, kernel, stats, targets, weights,
                                       cfg.eval_samples, eval_rng, cfg.community_budget);
  std::vector<double> thresholds(phases);
  for (std::size_t k = 0; k < phases; ++k)
    thresholds[k] = sched.u_abs.empty() ? sched.u_fracs[k] * u0 : sched.u_abs[k];

  TrainResult result;
  result.params = params;
  std::size_t phase = 0;
  while (phase < phases && u0 < thresholds[phase]) ++phase;
  TraceRow row{0, u0, static_cast<int>(phase), wall()};
  result.trace.push_back(row);
  if (on_trace) on_trace(row);

  GeneratorParams best = params;
  double best_u = u0;
  double last_u = u0;
  std::int64_t t = 0;
  while (phase < phases && t < cfg.max_iters) {
    const double gamma = sched.gammas[phase];
    try {
      sgd_step(params, kernel, stats, targets, weights, cfg, gamma, step_rng);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (iteration " + std::to_string(t) + ")");
    }
    ++t;
    if (t % cfg.eval_every == 0) {
      const double u = estimate_objective(params, kernel, stats, targets, weights,
                                          cfg.eval_samples, eval_rng, cfg.community_budget);
      last_u = u;
      while (phase < phases && u < thresholds[phase]) ++phase;
      TraceRow r{t, u, static_cast<int>(phase), wall()};
      result.trace.push_back(r);
      if (on_trace) on_trace(r);
      if (u < best_u) {
        best_u = u;
        best = params;
      }
    }
  }

  result.iterations = t;
  result.reached_final_phase = phase >= phases;
  result.final_objective = last_u;
  result.params = result.reached_final_phase ? params : best;
  return result;
}

}  // namespace gmoe
