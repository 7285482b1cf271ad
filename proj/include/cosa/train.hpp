#ifndef COSA_TRAIN_HPP
#define COSA_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cosa/adapter.hpp"
#include "cosa/matrix.hpp"

namespace cosa {

enum class OptimizerKind { sgd, adam, adamw };

OptimizerKind parse_optimizer(const std::string& name);
std::string optimizer_name(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // decoupled, adamw only
};

/// Serial recurrence; one state per trained matrix.
struct OptimizerState {
  OptimizerConfig config;
  std::size_t step = 0;
  Matrix first_moment;
  Matrix second_moment;
};

OptimizerState make_optimizer(const OptimizerConfig& config, std::size_t rows,
                              std::size_t cols);

/// In-place parameter update with bias-corrected moments for adam/adamw.
/// An optional scale multiplies the configured learning rate (used for
/// schedules); decay never touches frozen matrices because only the passed
/// parameter block is updated.
void optimizer_step(OptimizerState& state, Matrix& params, const Matrix& grad,
                    double lr_scale = 1.0);

/// Central-difference check of the analytic adapter gradients against the
/// loss 0.5 * |forward(X) - target|_F^2. Returns the max entrywise relative
/// error over every trainable entry (1e-8 absolute floor).
double grad_check(const AdaptedLinear& layer, const Matrix& x, const Matrix& target,
                  double step = 1e-5);

enum class ToyTaskKind { inspan_recovery, offspan_regression };

ToyTaskKind parse_task(const std::string& name);

/// Teacher-student planted-recovery task. The teacher is W0 plus either a
/// core planted in the student's own projection span (inspan) or a dense
/// random update generally outside it (offspan); the student trains Y from
/// zero on a fixed Gaussian batch.
struct ToyTaskSpec {
  ToyTaskKind kind = ToyTaskKind::inspan_recovery;
  std::size_t m = 64;
  std::size_t n = 48;
  std::size_t a = 16;
  std::size_t b = 8;
  std::uint64_t pair_seed = 7;
  std::uint64_t data_seed = 1;
  std::size_t batch = 64;
  std::size_t steps = 5000;
  double alpha_scale = 1.0;
  bool orthonormalize = false;
  OptimizerConfig optimizer;
  bool decay_lr = true;  // linear ramp of the step size to zero
};

struct TrainTrace {
  std::vector<double> losses;  // one entry per step, before the update
  double final_loss = 0.0;
  double final_relative_error = 0.0;
  double wall_seconds = 0.0;
};

TrainTrace run_toy(const ToyTaskSpec& spec);

struct SweepRow {
  std::size_t a = 0;
  std::size_t b = 0;
  std::uint64_t params = 0;
  double final_loss = 0.0;
  double final_relative_error = 0.0;
};

struct SweepTable {
  ToyTaskSpec base;
  std::vector<SweepRow> rows;
};

/// Grid of toy runs over (a, b). All cells slice one master projection pair
/// generated at the grid maxima and the in-span teacher is planted at the
/// grid minima, so cell hypothesis spaces are genuinely nested.
SweepTable sweep_ab(const ToyTaskSpec& base, const std::vector<std::size_t>& a_list,
                    const std::vector<std::size_t>& b_list);

}  // namespace cosa

#endif
