#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <string>

#include "cosa/budget.hpp"
#include "cosa/rng.hpp"

namespace {

const std::string kManifestDir = COSA_MANIFEST_DIR;

cosa::MethodSpec spec_of(cosa::Method method, std::uint64_t rank = 0, std::uint64_t a = 0,
                         std::uint64_t b = 0) {
  cosa::MethodSpec spec;
  spec.method = method;
  spec.rank = rank;
  spec.a = a;
  spec.b = b;
  return spec;
}

// Second, independently written formula table used to cross-check
// layer_params.
std::uint64_t reference_params(const cosa::MethodSpec& spec, std::uint64_t m,
                               std::uint64_t n) {
  using cosa::Method;
  switch (spec.method) {
    case Method::lora:
    case Method::pissa: return spec.rank * m + spec.rank * n;
    case Method::dora: return spec.rank * m + spec.rank * n + m;
    case Method::vera: return m + n;
    case Method::cosa: return spec.a * spec.b;
    case Method::full: return m * n;
  }
  return 0;
}

}  // namespace

TEST_CASE("method names round-trip and unknown methods are rejected") {
  for (const char* name : {"lora", "pissa", "dora", "vera", "cosa", "full"}) {
    CHECK(cosa::method_name(cosa::parse_method(name)) == name);
  }
  CHECK_THROWS_AS(cosa::parse_method("adalora"), std::invalid_argument);
  CHECK_THROWS_AS(cosa::parse_method(""), std::invalid_argument);
}

TEST_CASE("per-layer parameter formulas") {
  cosa::LayerShape shape{"q", 4096, 4096, 1};
  CHECK(cosa::layer_params(spec_of(cosa::Method::lora, 128), shape) == 1048576);
  CHECK(cosa::layer_params(spec_of(cosa::Method::cosa, 0, 1024, 256), shape) == 262144);
  cosa::LayerShape bert{"ffn", 768, 768, 1};
  CHECK(cosa::layer_params(spec_of(cosa::Method::dora, 16), bert) == 25344);
  CHECK(cosa::layer_params(spec_of(cosa::Method::vera), bert) == 1536);
  CHECK(cosa::layer_params(spec_of(cosa::Method::full), bert) == 768 * 768);

  CHECK_THROWS_AS(cosa::layer_params(spec_of(cosa::Method::lora), shape),
                  std::invalid_argument);
  CHECK_THROWS_AS(cosa::layer_params(spec_of(cosa::Method::cosa, 0, 8, 0), shape),
                  std::invalid_argument);
}

TEST_CASE("formulas agree with an independent reference over random shapes") {
  cosa::RngStream s(5);
  for (int trial = 0; trial < 200; ++trial) {
    cosa::LayerShape shape{"x", 1 + s.next_u64() % 8192, 1 + s.next_u64() % 8192, 1};
    const std::uint64_t r = 1 + s.next_u64() % 256;
    const std::uint64_t a = 1 + s.next_u64() % 1024;
    const std::uint64_t b = 1 + s.next_u64() % 1024;
    for (auto method : {cosa::Method::lora, cosa::Method::pissa, cosa::Method::dora,
                        cosa::Method::vera, cosa::Method::cosa, cosa::Method::full}) {
      const auto spec = spec_of(method, r, a, b);
      CHECK(cosa::layer_params(spec, shape) == reference_params(spec, shape.m, shape.n));
    }
  }
}

TEST_CASE("memory model") {
  CHECK(cosa::memory_estimate(58720256, 4, 0) == 234881024);
  CHECK(cosa::memory_estimate(0, 4, 3) == 0);
  CHECK(cosa::memory_estimate(1000, 4, 3) == 4 * cosa::memory_estimate(1000, 4, 0));
}

TEST_CASE("bundled manifests reproduce the published totals") {
  const auto llama1b = cosa::load_manifest(kManifestDir + "/llama32-1b.json");
  const auto llama8b = cosa::load_manifest(kManifestDir + "/llama31-8b.json");
  const auto qwen = cosa::load_manifest(kManifestDir + "/qwen2-7b.json");

  const auto cosa_spec = spec_of(cosa::Method::cosa, 0, 1024, 256);
  const auto lora_spec = spec_of(cosa::Method::lora, 128);

  CHECK(cosa::model_budget(cosa_spec, llama1b).total_params == 29360128);
  CHECK(cosa::model_budget(lora_spec, llama1b).total_params == 90177536);
  CHECK(cosa::model_budget(cosa_spec, llama8b).total_params == 58720256);
  CHECK(cosa::model_budget(lora_spec, llama8b).total_params == 335544320);
  CHECK(cosa::model_budget(cosa_spec, qwen).total_params == 51380224);
  CHECK(cosa::model_budget(lora_spec, qwen).total_params == 322961408);
}

TEST_CASE("budget report structure") {
  const auto manifest = cosa::load_manifest(kManifestDir + "/llama32-1b.json");
  const auto report = cosa::model_budget(spec_of(cosa::Method::cosa, 0, 64, 32), manifest, 4, 3);
  std::uint64_t sum = 0;
  for (const auto& row : report.rows) {
    // One core shape regardless of layer dimensions.
    CHECK(row.params_per_instance == 64 * 32);
    CHECK(row.params_total == row.params_per_instance * row.count);
    sum += row.params_total;
  }
  CHECK(report.total_params == sum);
  CHECK(report.memory_bytes == sum * 4 * 4);
}

TEST_CASE("smaller core beats low-rank counts when ab < (m+n)r") {
  const auto manifest = cosa::load_manifest(kManifestDir + "/qwen2-7b.json");
  const auto lora = cosa::model_budget(spec_of(cosa::Method::lora, 16), manifest);
  const auto small = cosa::model_budget(spec_of(cosa::Method::cosa, 0, 128, 64), manifest);
  bool all_layers_smaller = true;
  for (const auto& shape : manifest.layers) {
    all_layers_smaller = all_layers_smaller && (128 * 64 < (shape.m + shape.n) * 16);
  }
  REQUIRE(all_layers_smaller);
  CHECK(small.total_params < lora.total_params);
}

TEST_CASE("manifest loading errors") {
  CHECK_THROWS(cosa::load_manifest(kManifestDir + "/does-not-exist.json"));
}
