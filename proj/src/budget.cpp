#include "cosa/budget.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cosa {

ModelManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_manifest: cannot open " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_manifest: invalid JSON in " + path.string() + ": " +
                             e.what());
  }
  ModelManifest manifest;
  manifest.model_name = doc.at("model_name").get<std::string>();
  for (const auto& layer : doc.at("layers")) {
    LayerShape shape;
    shape.name = layer.at("name").get<std::string>();
    shape.m = layer.at("m").get<std::uint64_t>();
    shape.n = layer.at("n").get<std::uint64_t>();
    shape.count = layer.value("count", std::uint64_t{1});
    if (shape.m < 1 || shape.n < 1 || shape.count < 1) {
      throw std::runtime_error("load_manifest: non-positive dimension in layer " + shape.name);
    }
    manifest.layers.push_back(std::move(shape));
  }
  if (manifest.layers.empty()) {
    throw std::runtime_error("load_manifest: manifest has no layers");
  }
  return manifest;
}

Method parse_method(const std::string& name) {
  if (name == "lora") return Method::lora;
  if (name == "pissa") return Method::pissa;
  if (name == "dora") return Method::dora;
  if (name == "vera") return Method::vera;
  if (name == "cosa") return Method::cosa;
  if (name == "full") return Method::full;
  // AdaLoRA has no closed-form parameter formula and is deliberately absent.
  throw std::invalid_argument("unknown method '" + name +
                              "' (supported: lora, pissa, dora, vera, cosa, full)");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::lora: return "lora";
    case Method::pissa: return "pissa";
    case Method::dora: return "dora";
    case Method::vera: return "vera";
    case Method::cosa: return "cosa";
    case Method::full: return "full";
  }
  return "?";
}

std::uint64_t layer_params(const MethodSpec& spec, const LayerShape& shape) {
  switch (spec.method) {
    case Method::lora:
    case Method::pissa:
      if (spec.rank == 0) throw std::invalid_argument("layer_params: rank required");
      return (shape.m + shape.n) * spec.rank;
    case Method::dora:
      if (spec.rank == 0) throw std::invalid_argument("layer_params: rank required");
      return (shape.m + shape.n) * spec.rank + shape.m;
    case Method::vera:
      return shape.m + shape.n;
    case Method::cosa:
      if (spec.a == 0 || spec.b == 0) {
        throw std::invalid_argument("layer_params: cosa needs both a and b");
      }
      return spec.a * spec.b;
    case Method::full:
      return shape.m * shape.n;
  }
  throw std::invalid_argument("layer_params: unknown method");
}

std::uint64_t memory_estimate(std::uint64_t params, std::uint64_t bytes_per_param,
                              std::uint64_t opt_multiplier) {
  return params * bytes_per_param * (1 + opt_multiplier);
}

BudgetReport model_budget(const MethodSpec& spec, const ModelManifest& manifest,
                          std::uint64_t bytes_per_param, std::uint64_t opt_multiplier) {
  BudgetReport report;
  report.model_name = manifest.model_name;
  report.spec = spec;
  report.bytes_per_param = bytes_per_param;
  report.opt_multiplier = opt_multiplier;
  for (const auto& shape : manifest.layers) {
    BudgetRow row;
    row.name = shape.name;
    row.m = shape.m;
    row.n = shape.n;
    row.count = shape.count;
    row.params_per_instance = layer_params(spec, shape);
    row.params_total = row.params_per_instance * shape.count;
    report.total_params += row.params_total;
    report.rows.push_back(std::move(row));
  }
  report.memory_bytes = memory_estimate(report.total_params, bytes_per_param, opt_multiplier);
  return report;
}

}  // namespace cosa
