#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "cosa/adapter.hpp"
#include "cosa/errors.hpp"
#include "cosa/matrix.hpp"
#include "cosa/numerics.hpp"
#include "cosa/rng.hpp"

using cosa::Matrix;

namespace {

// Scalar fixture: W0=[1], L=[2], R=[3], Y=[4], X=[5].
cosa::CosaAdapter scalar_adapter() {
  cosa::CosaAdapter ad;
  ad.m = ad.n = ad.a = ad.b = 1;
  ad.alpha_scale = 1.0;
  ad.core = Matrix(1, 1, 4.0);
  ad.left = Matrix(1, 1, 2.0);
  ad.right = Matrix(1, 1, 3.0);
  return ad;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("fresh adapters start at zero and regenerate their projections") {
  const auto ad = cosa::make_cosa_adapter(17, 12, 10, 4, 3, 0.5);
  CHECK(ad.core.is_zero());
  CHECK(ad.left == cosa::gaussian_matrix(cosa::derive_seed(17, 0), 12, 4));
  CHECK(ad.right == cosa::gaussian_matrix(cosa::derive_seed(17, 1), 3, 10));

  const auto lora = cosa::make_lora_adapter(17, 12, 10, 4);
  CHECK(lora.up.is_zero());
  CHECK(lora.down == cosa::gaussian_matrix(cosa::derive_seed(17, 0), 4, 10));
}

TEST_CASE("zero-init adapters are bit-exact pass-throughs") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    cosa::RngStream s(seed);
    const std::size_t m = 2 + s.next_u64() % 10;
    const std::size_t n = 2 + s.next_u64() % 10;
    const std::size_t a = 1 + s.next_u64() % m;
    const std::size_t b = 1 + s.next_u64() % n;
    const Matrix w0 = cosa::gaussian_matrix(cosa::derive_seed(seed, 2), m, n);
    const Matrix x = cosa::gaussian_matrix(cosa::derive_seed(seed, 3), n, 3);
    const Matrix plain = cosa::matmul(w0, x);

    cosa::AdaptedLinear cosa_layer{w0, cosa::make_cosa_adapter(seed, m, n, a, b)};
    CHECK(cosa::forward(cosa_layer, x) == plain);

    cosa::AdaptedLinear lora_layer{
        w0, cosa::make_lora_adapter(seed, m, n, 1 + seed % std::min(m, n))};
    CHECK(cosa::forward(lora_layer, x) == plain);
  }
}

TEST_CASE("scalar forward and backward by hand") {
  const auto ad = scalar_adapter();
  const Matrix w0(1, 1, 1.0);
  const Matrix x(1, 1, 5.0);
  const Matrix z = cosa::cosa_forward(w0, ad, x);
  CHECK(z(0, 0) == doctest::Approx(125.0).epsilon(1e-15));  // 5 + 2*4*3*5

  const Matrix g(1, 1, 7.0);
  const auto grads = cosa::cosa_backward(w0, ad, x, g);
  CHECK(grads.core(0, 0) == doctest::Approx(210.0).epsilon(1e-15));  // (2*7)*(3*5)
  // gradX = W0^T g + alpha R^T Y^T L^T g = 7 + 3*4*2*7.
  CHECK(grads.input(0, 0) == doctest::Approx(175.0).epsilon(1e-15));

  const auto zero_grads = cosa::cosa_backward(w0, ad, x, Matrix(1, 1));
  CHECK(zero_grads.core.is_zero());
  CHECK(zero_grads.input.is_zero());
}

TEST_CASE("scalar lora forward and backward by hand") {
  cosa::LoraAdapter lora;
  lora.m = lora.n = lora.r = 1;
  lora.alpha_scale = 1.0;
  lora.down = Matrix(1, 1, 3.0);  // A
  lora.up = Matrix(1, 1, 2.0);    // B
  const Matrix w0(1, 1, 1.0);
  const Matrix x(1, 1, 5.0);
  CHECK(cosa::lora_forward(w0, lora, x)(0, 0) == doctest::Approx(35.0));  // 5 + 2*3*5

  const Matrix g(1, 1, 7.0);
  const auto grads = cosa::lora_backward(w0, lora, x, g);
  CHECK(grads.down(0, 0) == doctest::Approx(70.0));  // B^T g X^T = 2*7*5
  CHECK(grads.up(0, 0) == doctest::Approx(105.0));   // g (A X)^T = 7*15
  CHECK(grads.input(0, 0) == doctest::Approx(49.0)); // 7 + 3*2*7
}

TEST_CASE("forward matches an explicitly formed weight delta") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto ad = cosa::make_cosa_adapter(seed, 8, 6, 3, 2, 0.7);
    ad.core = cosa::gaussian_matrix(cosa::derive_seed(seed, 4), 3, 2);
    const Matrix w0 = cosa::gaussian_matrix(cosa::derive_seed(seed, 5), 8, 6);
    const Matrix x = cosa::gaussian_matrix(cosa::derive_seed(seed, 6), 6, 4);

    const Matrix delta =
        cosa::scale(cosa::matmul(cosa::matmul(ad.left, ad.core), ad.right), 0.7);
    const Matrix expect = cosa::matmul(cosa::add(w0, delta), x);
    CHECK(cosa::max_abs(cosa::subtract(cosa::cosa_forward(w0, ad, x), expect)) <= 1e-12);
  }
}

TEST_CASE("single-column gradients are rank one") {
  auto ad = cosa::make_cosa_adapter(5, 10, 8, 4, 3);
  ad.core = cosa::gaussian_matrix(1, 4, 3);
  const Matrix w0 = cosa::gaussian_matrix(2, 10, 8);
  const Matrix x = cosa::gaussian_matrix(3, 8, 1);
  const Matrix g = cosa::gaussian_matrix(4, 10, 1);
  const auto grads = cosa::cosa_backward(w0, ad, x, g);
  const auto svd = cosa::jacobi_svd(grads.core);
  REQUIRE(svd.singular_values.size() >= 2);
  CHECK(svd.singular_values[1] <= 1e-10 * svd.singular_values[0]);
}

TEST_CASE("forward rejects mismatched shapes") {
  const auto ad = cosa::make_cosa_adapter(1, 6, 5, 3, 2);
  CHECK_THROWS_AS(cosa::cosa_forward(Matrix(6, 5), ad, Matrix(4, 2)), cosa::shape_error);
  CHECK_THROWS_AS(cosa::cosa_forward(Matrix(6, 4), ad, Matrix(5, 2)), cosa::shape_error);
}

TEST_CASE("adapter files round-trip bit-exactly") {
  auto ad = cosa::make_cosa_adapter(123, 20, 16, 6, 5, 0.25);
  ad.core = cosa::gaussian_matrix(9, 6, 5);
  const auto p1 = temp_file("adapter_rt1.cosa");
  const auto p2 = temp_file("adapter_rt2.cosa");
  cosa::save_adapter(ad, p1);
  const auto loaded = cosa::load_adapter(p1);
  CHECK(loaded.m == ad.m);
  CHECK(loaded.n == ad.n);
  CHECK(loaded.a == ad.a);
  CHECK(loaded.b == ad.b);
  CHECK(loaded.seed == ad.seed);
  CHECK(loaded.alpha_scale == ad.alpha_scale);
  CHECK(loaded.core == ad.core);
  CHECK(loaded.left == ad.left);
  CHECK(loaded.right == ad.right);
  cosa::save_adapter(loaded, p2);

  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::vector<char> b1((std::istreambuf_iterator<char>(f1)), {});
  const std::vector<char> b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("adapter file size follows the format arithmetic") {
  const auto ad = cosa::make_cosa_adapter(5, 256, 128, 128, 56);
  const auto path = temp_file("adapter_size.cosa");
  cosa::save_adapter(ad, path);
  // 40-byte header + 8 * a * b payload + 4-byte checksum.
  CHECK(std::filesystem::file_size(path) == 57388);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt or malformed files are rejected") {
  auto ad = cosa::make_cosa_adapter(77, 12, 9, 4, 3);
  ad.core = cosa::gaussian_matrix(1, 4, 3);
  const auto path = temp_file("adapter_bad.cosa");
  cosa::save_adapter(ad, path);

  // Flip one payload byte: checksum failure.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(45);
    char byte;
    f.seekg(45);
    f.get(byte);
    byte = static_cast<char>(byte ^ 0x1);
    f.seekp(45);
    f.put(byte);
  }
  CHECK_THROWS_AS(cosa::load_adapter(path), cosa::format_error);

  // Wrong magic.
  cosa::save_adapter(ad, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
  }
  CHECK_THROWS_AS(cosa::load_adapter(path), cosa::format_error);

  // Truncated.
  cosa::save_adapter(ad, path);
  std::filesystem::resize_file(path, 30);
  CHECK_THROWS(cosa::load_adapter(path));
  std::filesystem::remove(path);
}

TEST_CASE("core analysis fixtures") {
  // Rank-1 core.
  Matrix outer(4, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      outer(i, j) = static_cast<double>(i + 1) * static_cast<double>(j + 1);
    }
  }
  auto stats = cosa::analyze_core(outer);
  REQUIRE(stats.effective_rank.has_value());
  CHECK(*stats.effective_rank == 1);

  // Uniform spectrum: smallest k with k/128 >= 0.95 is 122.
  stats = cosa::analyze_core(Matrix::identity(128));
  REQUIRE(stats.effective_rank.has_value());
  CHECK(*stats.effective_rank == 122);
  REQUIRE(stats.condition_number.has_value());
  CHECK(*stats.condition_number == doctest::Approx(1.0));

  // Half the entries below threshold.
  Matrix half(2, 4);
  for (std::size_t j = 0; j < 4; ++j) half(0, j) = 1.0;
  stats = cosa::analyze_core(half);
  CHECK(stats.sparsity_fraction == doctest::Approx(0.5));

  // Zero core: spectral fields undefined.
  stats = cosa::analyze_core(Matrix(3, 3));
  CHECK(stats.sparsity_fraction == doctest::Approx(1.0));
  CHECK(stats.frobenius_norm == 0.0);
  CHECK_FALSE(stats.effective_rank.has_value());
  CHECK_FALSE(stats.condition_number.has_value());
}
