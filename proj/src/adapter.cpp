#include "cosa/adapter.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cosa/errors.hpp"
#include "cosa/numerics.hpp"
#include "cosa/rng.hpp"

namespace cosa {

namespace {

void check_input_shape(std::size_t n, const Matrix& x) {
  if (x.rows() != n) {
    throw shape_error("forward: input has " + std::to_string(x.rows()) +
                      " rows, layer expects " + std::to_string(n));
  }
}

void check_grad_shape(std::size_t m, const Matrix& x, const Matrix& g) {
  if (g.rows() != m || g.cols() != x.cols()) {
    throw shape_error("backward: output gradient is " + std::to_string(g.rows()) + "x" +
                      std::to_string(g.cols()) + ", expected " + std::to_string(m) + "x" +
                      std::to_string(x.cols()));
  }
}

// CRC-32, IEEE polynomial (reflected 0xEDB88320).
std::uint32_t crc32(const std::vector<std::uint8_t>& bytes) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) {
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      }
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::uint8_t b : bytes) {
    crc = table[(crc ^ b) & 0xFFu] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
public:
  ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(u(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(u(4)); }
  std::uint64_t u64() { return u(8); }
  double f64() { return std::bit_cast<double>(u(8)); }

  std::array<char, 4> magic() {
    need(4);
    std::array<char, 4> out;
    std::memcpy(out.data(), bytes_.data() + pos_, 4);
    pos_ += 4;
    return out;
  }

private:
  void need(std::size_t count) {
    if (pos_ + count > bytes_.size()) {
      throw format_error("load_adapter: truncated file");
    }
  }
  std::uint64_t u(std::size_t count) {
    need(count);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < count; ++i) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += count;
    return v;
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

CosaAdapter make_cosa_adapter(std::uint64_t seed, std::size_t m, std::size_t n,
                              std::size_t a, std::size_t b, double alpha_scale) {
  if (a < 1 || b < 1 || a > m || b > n) {
    throw std::invalid_argument("make_cosa_adapter: need 1 <= a <= m and 1 <= b <= n");
  }
  CosaAdapter adapter;
  adapter.m = m;
  adapter.n = n;
  adapter.a = a;
  adapter.b = b;
  adapter.seed = seed;
  adapter.alpha_scale = alpha_scale;
  adapter.core = Matrix(a, b);
  adapter.left = gaussian_matrix(derive_seed(seed, 0), m, a);
  adapter.right = gaussian_matrix(derive_seed(seed, 1), b, n);
  return adapter;
}

LoraAdapter make_lora_adapter(std::uint64_t seed, std::size_t m, std::size_t n,
                              std::size_t r, double alpha_scale) {
  if (r < 1 || r > std::min(m, n)) {
    throw std::invalid_argument("make_lora_adapter: need 1 <= r <= min(m, n)");
  }
  LoraAdapter adapter;
  adapter.m = m;
  adapter.n = n;
  adapter.r = r;
  adapter.seed = seed;
  adapter.alpha_scale = alpha_scale;
  adapter.down = gaussian_matrix(derive_seed(seed, 0), r, n);
  adapter.up = Matrix(m, r);
  return adapter;
}

Matrix cosa_forward(const Matrix& base, const CosaAdapter& adapter, const Matrix& x) {
  check_input_shape(adapter.n, x);
  Matrix z = matmul(base, x);
  if (adapter.core.is_zero()) return z;  // zero-init transparency, bit-exact
  const Matrix compressed = matmul(adapter.right, x);        // b x batch
  const Matrix mixed = matmul(adapter.core, compressed);     // a x batch
  const Matrix reconstructed = matmul(adapter.left, mixed);  // m x batch
  return add(z, scale(reconstructed, adapter.alpha_scale));
}

CosaGradients cosa_backward(const Matrix& base, const CosaAdapter& adapter,
                            const Matrix& x, const Matrix& g) {
  check_input_shape(adapter.n, x);
  check_grad_shape(adapter.m, x, g);
  const Matrix lt_g = matmul(transpose(adapter.left), g);  // a x batch
  const Matrix rx = matmul(adapter.right, x);              // b x batch
  CosaGradients grads;
  grads.core = scale(matmul(lt_g, transpose(rx)), adapter.alpha_scale);
  const Matrix core_path = matmul(transpose(adapter.right),
                                  matmul(transpose(adapter.core), lt_g));
  grads.input = add(matmul(transpose(base), g), scale(core_path, adapter.alpha_scale));
  return grads;
}

Matrix lora_forward(const Matrix& base, const LoraAdapter& adapter, const Matrix& x) {
  check_input_shape(adapter.n, x);
  Matrix z = matmul(base, x);
  if (adapter.up.is_zero()) return z;
  return add(z, scale(matmul(adapter.up, matmul(adapter.down, x)), adapter.alpha_scale));
}

LoraGradients lora_backward(const Matrix& base, const LoraAdapter& adapter,
                            const Matrix& x, const Matrix& g) {
  check_input_shape(adapter.n, x);
  check_grad_shape(adapter.m, x, g);
  LoraGradients grads;
  const Matrix bt_g = matmul(transpose(adapter.up), g);  // r x batch
  grads.down = scale(matmul(bt_g, transpose(x)), adapter.alpha_scale);
  grads.up = scale(matmul(g, transpose(matmul(adapter.down, x))), adapter.alpha_scale);
  const Matrix adapter_path = matmul(transpose(adapter.down), bt_g);
  grads.input = add(matmul(transpose(base), g), scale(adapter_path, adapter.alpha_scale));
  return grads;
}

Matrix forward(const AdaptedLinear& layer, const Matrix& x) {
  if (const auto* cosa = std::get_if<CosaAdapter>(&layer.adapter)) {
    return cosa_forward(layer.base, *cosa, x);
  }
  return lora_forward(layer.base, std::get<LoraAdapter>(layer.adapter), x);
}

void save_adapter(const CosaAdapter& adapter, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(44 + 8 * adapter.core.size());
  bytes.insert(bytes.end(), {'C', 'O', 'S', 'A'});
  put_u16(bytes, 1);  // version
  put_u16(bytes, 0);  // flags
  put_u32(bytes, static_cast<std::uint32_t>(adapter.m));
  put_u32(bytes, static_cast<std::uint32_t>(adapter.n));
  put_u32(bytes, static_cast<std::uint32_t>(adapter.a));
  put_u32(bytes, static_cast<std::uint32_t>(adapter.b));
  put_f64(bytes, adapter.alpha_scale);
  put_u64(bytes, adapter.seed);
  for (double v : adapter.core.data()) put_f64(bytes, v);
  put_u32(bytes, crc32(bytes));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("save_adapter: cannot open " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("save_adapter: write failed for " + path.string());
  }
}

CosaAdapter load_adapter(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_adapter: cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 44) {
    throw format_error("load_adapter: truncated file");
  }

  std::vector<std::uint8_t> body(bytes.begin(), bytes.end() - 4);
  ByteReader reader(body);
  const auto magic = reader.magic();
  if (magic != std::array<char, 4>{'C', 'O', 'S', 'A'}) {
    throw format_error("load_adapter: bad magic, not a COSA adapter file");
  }
  const std::uint16_t version = reader.u16();
  if (version != 1) {
    throw format_error("load_adapter: unsupported version " + std::to_string(version));
  }
  reader.u16();  // flags, must-ignore
  const std::uint32_t m = reader.u32();
  const std::uint32_t n = reader.u32();
  const std::uint32_t a = reader.u32();
  const std::uint32_t b = reader.u32();
  const double alpha_scale = reader.f64();
  const std::uint64_t seed = reader.u64();

  const std::size_t payload = static_cast<std::size_t>(a) * b;
  if (bytes.size() != 44 + 8 * payload) {
    throw format_error("load_adapter: file size does not match header dimensions");
  }
  const std::uint32_t stored_crc = static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
                                   static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8 |
                                   static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16 |
                                   static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24;
  if (crc32(body) != stored_crc) {
    throw format_error("load_adapter: CRC mismatch, file is corrupt");
  }

  CosaAdapter adapter = make_cosa_adapter(seed, m, n, a, b, alpha_scale);
  auto core = adapter.core.data();
  for (std::size_t i = 0; i < payload; ++i) core[i] = reader.f64();
  return adapter;
}

CoreStats analyze_core(const Matrix& core, double sparsity_threshold, double energy) {
  CoreStats stats;
  std::size_t below = 0;
  for (double v : core.data()) {
    if (std::fabs(v) < sparsity_threshold) ++below;
  }
  stats.sparsity_fraction = static_cast<double>(below) / static_cast<double>(core.size());
  stats.frobenius_norm = frobenius_norm(core);
  if (core.is_zero()) return stats;  // spectral fields undefined

  const auto svd = jacobi_svd(core);
  double total = 0.0;
  for (double sigma : svd.singular_values) total += sigma * sigma;
  double running = 0.0;
  std::size_t rank = svd.singular_values.size();
  for (std::size_t k = 0; k < svd.singular_values.size(); ++k) {
    running += svd.singular_values[k] * svd.singular_values[k];
    if (running >= energy * total) {
      rank = k + 1;
      break;
    }
  }
  stats.effective_rank = rank;
  stats.condition_number = condition_number(core);
  return stats;
}

}  // namespace cosa
