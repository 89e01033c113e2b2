#include "gmoe/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace gmoe {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_dims(const KernelSpec& k, std::span<const double> z1,
                std::span<const double> z2) {
  if (z1.size() != z2.size() || z1.empty())
    throw ConfigError("kernel arguments must share a nonzero dimension");
  if (k.kind == KernelKind::dot_product ||
      k.kind == KernelKind::complement_dot_product) {
    if (norm(z1) < k.eps_z || norm(z2) < k.eps_z)
      throw NumericError("degenerate embedding: norm below eps_z");
  }
  if (k.kind == KernelKind::polynomial && k.degree < 1)
    throw ConfigError("polynomial degree must be >= 1");
}

double raw_eval(const KernelSpec& k, std::span<const double> z1,
                std::span<const double> z2) {
  switch (k.kind) {
    case KernelKind::dot_product:
      return std::fabs(dot(z1, z2)) / (norm(z1) * norm(z2));
    case KernelKind::complement_dot_product:
      return 1.0 - std::fabs(dot(z1, z2)) / (norm(z1) * norm(z2));
    case KernelKind::rbf:
      return std::exp(-sq_dist(z1, z2));
    case KernelKind::scaled_rbf:
      return std::sqrt((1.0 + dot(z1, z1)) * (1.0 + dot(z2, z2))) *
             std::exp(-sq_dist(z1, z2));
    case KernelKind::scaled_rbf_reciprocal:
      return std::exp(-sq_dist(z1, z2)) /
             std::sqrt((1.0 + dot(z1, z1)) * (1.0 + dot(z2, z2)));
    case KernelKind::polynomial: {
      const double s = 1.0 + dot(z1, z2);
      const double d1 = 1.0 + dot(z1, z1);
      const double d2 = 1.0 + dot(z2, z2);
      return std::pow(s, k.degree) /
             std::sqrt(std::pow(d1, k.degree) * std::pow(d2, k.degree));
    }
  }
  throw ConfigError("unknown kernel kind");
}

}  // namespace

double kernel_eval(const KernelSpec& k, std::span<const double> z1,
                   std::span<const double> z2) {
  check_dims(k, z1, z2);
  return std::clamp(raw_eval(k, z1, z2), k.eps_phi, 1.0 - k.eps_phi);
}

void kernel_grad_z1(const KernelSpec& k, std::span<const double> z1,
                    std::span<const double> z2, std::span<double> out) {
  check_dims(k, z1, z2);
  if (out.size() != z1.size())
    throw ConfigError("gradient output has wrong dimension");
  const double raw = raw_eval(k, z1, z2);
  if (raw <= k.eps_phi || raw >= 1.0 - k.eps_phi) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const std::size_t d = z1.size();
  switch (k.kind) {
    case KernelKind::dot_product:
    case KernelKind::complement_dot_product: {
      const double s = dot(z1, z2);
      const double u = norm(z1), v = norm(z2);
      const double sign = s >= 0.0 ? 1.0 : -1.0;
      const double phi = std::fabs(s) / (u * v);
      const double flip =
          k.kind == KernelKind::complement_dot_product ? -1.0 : 1.0;
      for (std::size_t i = 0; i < d; ++i)
        out[i] = flip * (sign * z2[i] / (u * v) - phi * z1[i] / (u * u));
      return;
    }
    case KernelKind::rbf: {
      for (std::size_t i = 0; i < d; ++i)
        out[i] = -2.0 * (z1[i] - z2[i]) * raw;
      return;
    }
    case KernelKind::scaled_rbf: {
      const double a = 1.0 + dot(z1, z1);
      for (std::size_t i = 0; i < d; ++i)
        out[i] = raw * (z1[i] / a - 2.0 * (z1[i] - z2[i]));
      return;
    }
    case KernelKind::scaled_rbf_reciprocal: {
      const double a = 1.0 + dot(z1, z1);
      for (std::size_t i = 0; i < d; ++i)
        out[i] = raw * (-z1[i] / a - 2.0 * (z1[i] - z2[i]));
      return;
    }
    case KernelKind::polynomial: {
      const double s = 1.0 + dot(z1, z2);
      const double a = 1.0 + dot(z1, z1);
      const double c = static_cast<double>(k.degree);
      for (std::size_t i = 0; i < d; ++i)
        out[i] = raw * (c * z2[i] / s - c * z1[i] / a);
      return;
    }
  }
  throw ConfigError("unknown kernel kind");
}

const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::dot_product: return "DP";
    case KernelKind::complement_dot_product: return "CDP";
    case KernelKind::rbf: return "RBF";
    case KernelKind::scaled_rbf: return "SRBF";
    case KernelKind::scaled_rbf_reciprocal: return "SRBFR";
    case KernelKind::polynomial: return "POLY";
  }
  return "?";
}

KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "DP") return KernelKind::dot_product;
  if (name == "CDP") return KernelKind::complement_dot_product;
  if (name == "RBF") return KernelKind::rbf;
  if (name == "SRBF") return KernelKind::scaled_rbf;
  if (name == "SRBFR") return KernelKind::scaled_rbf_reciprocal;
  if (name == "POLY") return KernelKind::polynomial;
  throw ConfigError("unknown kernel '" + name +
                    "' (expected DP, CDP, RBF, SRBF, SRBFR, or POLY)");
}

ParsedKernel parse_kernel_label(const std::string& label) {
  std::size_t split = label.size();
  while (split > 0 && std::isdigit(static_cast<unsigned char>(label[split - 1])))
    --split;
  ParsedKernel out;
  out.kind = kernel_kind_from_name(label.substr(0, split));
  if (split < label.size()) out.order = std::stoi(label.substr(split));
  return out;
}

}  // namespace gmoe
