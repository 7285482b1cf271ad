#include "cosa/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "cosa/errors.hpp"
#include "cosa/projection.hpp"
#include "cosa/rng.hpp"

namespace cosa {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  if (name == "adamw") return OptimizerKind::adamw;
  throw std::invalid_argument("unknown optimizer '" + name + "' (sgd, adam, adamw)");
}

std::string optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::adamw: return "adamw";
  }
  return "?";
}

OptimizerState make_optimizer(const OptimizerConfig& config, std::size_t rows,
                              std::size_t cols) {
  OptimizerState state;
  state.config = config;
  state.first_moment = Matrix(rows, cols);
  state.second_moment = Matrix(rows, cols);
  return state;
}

void optimizer_step(OptimizerState& state, Matrix& params, const Matrix& grad,
                    double lr_scale) {
  if (params.rows() != grad.rows() || params.cols() != grad.cols()) {
    throw shape_error("optimizer_step: parameter/gradient shape mismatch");
  }
  if (!grad.all_finite()) {
    throw numerical_error("optimizer_step: non-finite gradient");
  }
  const auto& cfg = state.config;
  const double lr = cfg.learning_rate * lr_scale;
  state.step += 1;

  auto p = params.data();
  auto g = grad.data();
  if (cfg.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
    return;
  }

  auto m1 = state.first_moment.data();
  auto m2 = state.second_moment.data();
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < p.size(); ++i) {
    m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * g[i];
    m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double mhat = m1[i] / bc1;
    const double vhat = m2[i] / bc2;
    double update = mhat / (std::sqrt(vhat) + cfg.epsilon);
    if (cfg.kind == OptimizerKind::adamw) {
      update += cfg.weight_decay * p[i];  // decoupled decay
    }
    p[i] -= lr * update;
  }
}

namespace {

double half_squared_error(const Matrix& z, const Matrix& target) {
  double acc = 0.0;
  auto a = z.data();
  auto b = target.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return 0.5 * acc;
}

double relative_diff(double analytic, double numeric) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

double check_entries(const AdaptedLinear& layer, Matrix& block, const Matrix& analytic,
                     const Matrix& x, const Matrix& target, double step) {
  double worst = 0.0;
  for (std::size_t i = 0; i < block.rows(); ++i) {
    for (std::size_t j = 0; j < block.cols(); ++j) {
      const double saved = block(i, j);
      block(i, j) = saved + step;
      const double plus = half_squared_error(forward(layer, x), target);
      block(i, j) = saved - step;
      const double minus = half_squared_error(forward(layer, x), target);
      block(i, j) = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      worst = std::max(worst, relative_diff(analytic(i, j), numeric));
    }
  }
  return worst;
}

}  // namespace

double grad_check(const AdaptedLinear& layer, const Matrix& x, const Matrix& target,
                  double step) {
  AdaptedLinear probe = layer;
  const Matrix z = forward(probe, x);
  const Matrix g = subtract(z, target);
  if (auto* cosa = std::get_if<CosaAdapter>(&probe.adapter)) {
    if (cosa->a * cosa->b > 256) {
      throw std::invalid_argument("grad_check: core too large for exhaustive perturbation");
    }
    const CosaGradients grads = cosa_backward(probe.base, *cosa, x, g);
    return check_entries(probe, cosa->core, grads.core, x, target, step);
  }
  auto& lora = std::get<LoraAdapter>(probe.adapter);
  if (lora.r * (lora.m + lora.n) > 4096) {
    throw std::invalid_argument("grad_check: factors too large for exhaustive perturbation");
  }
  const LoraGradients grads = lora_backward(probe.base, lora, x, g);
  const double worst_down = check_entries(probe, lora.down, grads.down, x, target, step);
  const double worst_up = check_entries(probe, lora.up, grads.up, x, target, step);
  return std::max(worst_down, worst_up);
}

ToyTaskKind parse_task(const std::string& name) {
  if (name == "inspan") return ToyTaskKind::inspan_recovery;
  if (name == "offspan") return ToyTaskKind::offspan_regression;
  throw std::invalid_argument("unknown task '" + name + "' (inspan, offspan)");
}

namespace {

struct ToyFixture {
  Matrix w0;       // m x n
  Matrix left;     // m x a
  Matrix right;    // b x n
  Matrix x;        // n x batch
  Matrix target;   // m x batch teacher outputs
  Matrix teacher_core;   // embedded in the student's (a, b) shape; inspan only
  Matrix teacher_delta;  // dense teacher update; offspan only
};

Matrix toy_forward(const ToyFixture& fx, const Matrix& core, double alpha) {
  const Matrix z = matmul(fx.w0, fx.x);
  if (core.is_zero()) return z;
  return add(z, scale(matmul(fx.left, matmul(core, matmul(fx.right, fx.x))), alpha));
}

ToyFixture build_fixture(const ToyTaskSpec& spec, const Matrix& left, const Matrix& right,
                         const Matrix* planted_core, std::size_t planted_a,
                         std::size_t planted_b) {
  ToyFixture fx;
  fx.left = left;
  fx.right = right;
  fx.w0 = gaussian_matrix(derive_seed(spec.data_seed, 0), spec.m, spec.n);
  fx.x = gaussian_matrix(derive_seed(spec.data_seed, 1), spec.n, spec.batch);

  if (spec.kind == ToyTaskKind::inspan_recovery) {
    const Matrix core_small =
        planted_core != nullptr
            ? *planted_core
            : gaussian_matrix(derive_seed(spec.data_seed, 2), planted_a, planted_b);
    fx.teacher_core = Matrix(spec.a, spec.b);
    for (std::size_t i = 0; i < planted_a; ++i) {
      for (std::size_t j = 0; j < planted_b; ++j) {
        fx.teacher_core(i, j) = core_small(i, j);
      }
    }
    fx.target = toy_forward(fx, fx.teacher_core, spec.alpha_scale);
  } else {
    fx.teacher_delta = gaussian_matrix(derive_seed(spec.data_seed, 3), spec.m, spec.n);
    fx.target = add(matmul(fx.w0, fx.x), matmul(fx.teacher_delta, fx.x));
  }
  return fx;
}

TrainTrace train_fixture(const ToyTaskSpec& spec, const ToyFixture& fx) {
  const auto start = std::chrono::steady_clock::now();
  const double inv_batch = 1.0 / static_cast<double>(spec.batch);

  Matrix core(spec.a, spec.b);
  OptimizerState opt = make_optimizer(spec.optimizer, spec.a, spec.b);

  TrainTrace trace;
  trace.losses.reserve(spec.steps);
  double initial_loss = 0.0;
  for (std::size_t step = 0; step < spec.steps; ++step) {
    const Matrix z = toy_forward(fx, core, spec.alpha_scale);
    const double loss = half_squared_error(z, fx.target) * inv_batch;
    if (!std::isfinite(loss)) {
      throw numerical_error("run_toy: non-finite loss at step " + std::to_string(step));
    }
    if (step == 0) initial_loss = loss;
    if (loss > 1e6 * initial_loss && initial_loss > 0.0) {
      throw numerical_error("run_toy: diverged at step " + std::to_string(step) +
                            " (loss " + std::to_string(loss) + ")");
    }
    trace.losses.push_back(loss);

    const Matrix g = scale(subtract(z, fx.target), inv_batch);
    const Matrix lt_g = matmul(transpose(fx.left), g);
    const Matrix rx = matmul(fx.right, fx.x);
    const Matrix grad_core = scale(matmul(lt_g, transpose(rx)), spec.alpha_scale);
    const double lr_scale =
        spec.decay_lr ? 1.0 - static_cast<double>(step) / static_cast<double>(spec.steps)
                      : 1.0;
    optimizer_step(opt, core, grad_core, lr_scale);
  }

  const Matrix z_final = toy_forward(fx, core, spec.alpha_scale);
  trace.final_loss = half_squared_error(z_final, fx.target) * inv_batch;
  if (spec.kind == ToyTaskKind::inspan_recovery) {
    trace.final_relative_error =
        frobenius_norm(subtract(core, fx.teacher_core)) / frobenius_norm(fx.teacher_core);
  } else {
    const Matrix delta = scale(matmul(matmul(fx.left, core), fx.right), spec.alpha_scale);
    trace.final_relative_error =
        frobenius_norm(subtract(delta, fx.teacher_delta)) / frobenius_norm(fx.teacher_delta);
  }
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

}  // namespace

TrainTrace run_toy(const ToyTaskSpec& spec) {
  if (spec.steps == 0) {
    // Degenerate spec: report the teacher-student gap at Y = 0.
    const ProjectionPair pair = make_projection_pair(spec.pair_seed, spec.m, spec.n,
                                                     spec.a, spec.b, spec.orthonormalize);
    const ToyFixture fx = build_fixture(spec, pair.left, pair.right, nullptr, spec.a, spec.b);
    TrainTrace trace;
    trace.final_loss = half_squared_error(matmul(fx.w0, fx.x), fx.target) /
                       static_cast<double>(spec.batch);
    trace.final_relative_error = 1.0;
    return trace;
  }
  const ProjectionPair pair = make_projection_pair(spec.pair_seed, spec.m, spec.n, spec.a,
                                                   spec.b, spec.orthonormalize);
  const ToyFixture fx = build_fixture(spec, pair.left, pair.right, nullptr, spec.a, spec.b);
  return train_fixture(spec, fx);
}

SweepTable sweep_ab(const ToyTaskSpec& base, const std::vector<std::size_t>& a_list,
                    const std::vector<std::size_t>& b_list) {
  if (a_list.empty() || b_list.empty()) {
    throw std::invalid_argument("sweep_ab: empty grid");
  }
  std::size_t a_max = 0, b_max = 0;
  std::size_t a_min = SIZE_MAX, b_min = SIZE_MAX;
  for (std::size_t a : a_list) {
    a_max = std::max(a_max, a);
    a_min = std::min(a_min, a);
  }
  for (std::size_t b : b_list) {
    b_max = std::max(b_max, b);
    b_min = std::min(b_min, b);
  }
  const ProjectionPair master = make_projection_pair(base.pair_seed, base.m, base.n, a_max,
                                                     b_max, base.orthonormalize);
  const Matrix planted = gaussian_matrix(derive_seed(base.data_seed, 2), a_min, b_min);

  SweepTable table;
  table.base = base;
  for (std::size_t a : a_list) {
    for (std::size_t b : b_list) {
      Matrix left(base.m, a);
      for (std::size_t i = 0; i < base.m; ++i) {
        for (std::size_t j = 0; j < a; ++j) left(i, j) = master.left(i, j);
      }
      Matrix right(b, base.n);
      for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < base.n; ++j) right(i, j) = master.right(i, j);
      }
      ToyTaskSpec spec = base;
      spec.a = a;
      spec.b = b;
      const ToyFixture fx = build_fixture(spec, left, right, &planted, a_min, b_min);
      const TrainTrace trace = train_fixture(spec, fx);

      SweepRow row;
      row.a = a;
      row.b = b;
      row.params = static_cast<std::uint64_t>(a) * b;
      row.final_loss = trace.final_loss;
      row.final_relative_error = trace.final_relative_error;
      table.rows.push_back(row);
    }
  }
  return table;
}

}  // namespace cosa
