#ifndef COSA_ADAPTER_HPP
#define COSA_ADAPTER_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>

#include "cosa/matrix.hpp"

namespace cosa {

/// Adapted linear layer parameterized as W0 + alpha_scale * L * Y * R.
/// L and R are frozen and regenerate from the seed (derive_seed(seed, 0)
/// and derive_seed(seed, 1)); Y starts at exactly zero so a fresh adapter
/// is transparent.
struct CosaAdapter {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  std::uint64_t seed = 0;
  double alpha_scale = 1.0;
  Matrix core;   // Y, a x b, trainable
  Matrix left;   // L, m x a, frozen
  Matrix right;  // R, b x n, frozen
};

CosaAdapter make_cosa_adapter(std::uint64_t seed, std::size_t m, std::size_t n,
                              std::size_t a, std::size_t b, double alpha_scale = 1.0);

/// LoRA baseline: W0 + alpha_scale * B * A with A Gaussian, B zero at init.
struct LoraAdapter {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t r = 0;
  std::uint64_t seed = 0;
  double alpha_scale = 1.0;
  Matrix down;  // A, r x n, Gaussian init
  Matrix up;    // B, m x r, zero init
};

LoraAdapter make_lora_adapter(std::uint64_t seed, std::size_t m, std::size_t n,
                              std::size_t r, double alpha_scale = 1.0);

struct AdaptedLinear {
  Matrix base;  // W0, m x n, frozen
  std::variant<CosaAdapter, LoraAdapter> adapter;
};

struct CosaGradients {
  Matrix core;   // dL/dY, a x b
  Matrix input;  // dL/dX, n x batch
};

struct LoraGradients {
  Matrix down;   // dL/dA
  Matrix up;     // dL/dB
  Matrix input;  // dL/dX
};

/// Z = W0 X + alpha_scale * L (Y (R X)), evaluated right to left; the
/// adapter branch is skipped entirely while Y is all zero, so the result is
/// then bit-identical to W0 X.
Matrix cosa_forward(const Matrix& base, const CosaAdapter& adapter, const Matrix& x);

/// gradY = alpha_scale * (L^T g) (R X)^T summed over the batch;
/// gradX = W0^T g + alpha_scale * R^T Y^T L^T g.
CosaGradients cosa_backward(const Matrix& base, const CosaAdapter& adapter,
                            const Matrix& x, const Matrix& g);

Matrix lora_forward(const Matrix& base, const LoraAdapter& adapter, const Matrix& x);
LoraGradients lora_backward(const Matrix& base, const LoraAdapter& adapter,
                            const Matrix& x, const Matrix& g);

/// Dispatch over the adapter variant.
Matrix forward(const AdaptedLinear& layer, const Matrix& x);

/// COSA1 binary adapter file: only Y, the seed, dims and the scale are
/// stored; L and R are regenerated on load.
void save_adapter(const CosaAdapter& adapter, const std::filesystem::path& path);
CosaAdapter load_adapter(const std::filesystem::path& path);

/// Structural metrics of a trained core. For an all-zero core the spectral
/// fields are undefined and left empty.
struct CoreStats {
  double sparsity_fraction = 0.0;            // share of |Y_ij| < threshold
  std::optional<std::size_t> effective_rank; // 95% spectral-energy rank
  double frobenius_norm = 0.0;
  std::optional<double> condition_number;
};

CoreStats analyze_core(const Matrix& core, double sparsity_threshold = 1e-4,
                       double energy = 0.95);

}  // namespace cosa

#endif
