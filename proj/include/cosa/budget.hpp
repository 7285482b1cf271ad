#ifndef COSA_BUDGET_HPP
#define COSA_BUDGET_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cosa {

struct LayerShape {
  std::string name;
  std::uint64_t m = 0;      // output dim
  std::uint64_t n = 0;      // input dim
  std::uint64_t count = 1;  // multiplicity across the model
};

struct ModelManifest {
  std::string model_name;
  std::vector<LayerShape> layers;
};

ModelManifest load_manifest(const std::filesystem::path& path);

enum class Method { lora, pissa, dora, vera, cosa, full };

Method parse_method(const std::string& name);
std::string method_name(Method method);

struct MethodSpec {
  Method method = Method::lora;
  std::uint64_t rank = 0;  // lora / pissa / dora
  std::uint64_t a = 0;     // cosa
  std::uint64_t b = 0;     // cosa
};

/// Trainable parameters for one layer instance:
/// lora/pissa (m+n)r, dora (m+n)r + m, vera m+n, cosa ab, full mn.
std::uint64_t layer_params(const MethodSpec& spec, const LayerShape& shape);

/// params * bytes_per_param * (1 + opt_multiplier).
std::uint64_t memory_estimate(std::uint64_t params, std::uint64_t bytes_per_param,
                              std::uint64_t opt_multiplier);

struct BudgetRow {
  std::string name;
  std::uint64_t m = 0;
  std::uint64_t n = 0;
  std::uint64_t count = 1;
  std::uint64_t params_per_instance = 0;
  std::uint64_t params_total = 0;
};

struct BudgetReport {
  std::string model_name;
  MethodSpec spec;
  std::vector<BudgetRow> rows;
  std::uint64_t total_params = 0;
  std::uint64_t bytes_per_param = 4;
  std::uint64_t opt_multiplier = 3;
  std::uint64_t memory_bytes = 0;
};

BudgetReport model_budget(const MethodSpec& spec, const ModelManifest& manifest,
                          std::uint64_t bytes_per_param = 4,
                          std::uint64_t opt_multiplier = 3);

}  // namespace cosa

#endif
