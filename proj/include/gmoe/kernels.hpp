#pragma once

#include <span>
#include <string>

#include "gmoe/error.hpp"

namespace gmoe {

enum class KernelKind {
  dot_product,
  complement_dot_product,
  rbf,
  scaled_rbf,             // scale factor in the numerator, as printed
  scaled_rbf_reciprocal,  // scale factor in the denominator; stays within (0, 1]
  polynomial,
};

// Edge-probability kernel on the nonnegative hyperquadrant. Outputs are
// clamped into [eps_phi, 1 - eps_phi] so that downstream log-derivatives stay
// bounded; gradients are zeroed wherever the clamp is active.
struct KernelSpec {
  KernelKind kind = KernelKind::dot_product;
  int degree = 2;          // polynomial only
  double eps_phi = 1e-6;   // probability clamp margin
  double eps_z = 1e-6;     // minimum norm for the normalized dot family
};

double kernel_eval(const KernelSpec& k, std::span<const double> z1,
                   std::span<const double> z2);

// d/dz1 of the raw kernel, zero when the clamp is active at (z1, z2).
void kernel_grad_z1(const KernelSpec& k, std::span<const double> z1,
                    std::span<const double> z2, std::span<double> out);

const char* kernel_kind_name(KernelKind k);
KernelKind kernel_kind_from_name(const std::string& name);

// Parse a "<KIND><order>" label such as "DP4" or "RBF5"; order may be absent.
struct ParsedKernel {
  KernelKind kind;
  int order = 0;  // 0 when the label carries no order
};
ParsedKernel parse_kernel_label(const std::string& label);

}  // namespace gmoe
