// cosa: command-line front end for the compressed-sensing adaptation toolkit.
//
// Every subcommand is deterministic given its flags (including --threads),
// and every report starts with a provenance object echoing the resolved
// configuration. Exit codes: 0 success, 1 runtime/numerical failure,
// 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cosa/adapter.hpp"
#include "cosa/budget.hpp"
#include "cosa/errors.hpp"
#include "cosa/projection.hpp"
#include "cosa/report.hpp"
#include "cosa/rip.hpp"
#include "cosa/rng.hpp"
#include "cosa/train.hpp"

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct GlobalFlags {
  std::string out;
  std::string format = "json";
  unsigned threads = 1;
};

unsigned default_threads() {
  if (const char* env = std::getenv("COSA_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed >= 1) return static_cast<unsigned>(parsed);
  }
  return 1;
}

void add_global_flags(CLI::App* cmd, GlobalFlags& flags) {
  cmd->add_option("--out", flags.out, "Write the report to this file (default: stdout)");
  cmd->add_option("--format", flags.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", flags.threads, "Worker threads for Monte-Carlo loops")
      ->check(CLI::PositiveNumber);
}

cosa::Json provenance(const std::string& command, cosa::Json flags) {
  cosa::Json prov;
  prov["tool"] = "cosa";
  prov["version"] = kToolVersion;
  prov["command"] = command;
  prov["flags"] = std::move(flags);
  return prov;
}

void emit_report(const GlobalFlags& flags, const std::string& command,
                 cosa::Json resolved_flags, cosa::Json payload) {
  cosa::Json report;
  report["provenance"] = provenance(command, std::move(resolved_flags));
  for (auto& [key, value] : payload.items()) {
    report[key] = std::move(value);
  }
  const std::string body =
      flags.format == "csv" ? cosa::to_csv(report) : report.dump(2) + "\n";
  if (flags.out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream file(flags.out, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw std::runtime_error("cannot open output file " + flags.out);
  }
  file << body;
}

struct RipArgs {
  GlobalFlags global;
  std::string preset;
  std::size_t m = 512, n = 256;
  std::vector<std::size_t> a_list, b_list, s_list;
  std::size_t num_samples = 1000;
  std::vector<std::uint64_t> matrix_seeds;
  bool ortho = false;
  double bound_c = 1.0;
  std::size_t bound_m_eff = 0, bound_n_ambient = 0;
};

void apply_table4_preset(RipArgs& args) {
  args.m = 512;
  args.n = 256;
  args.a_list = {32, 64, 128, 256};
  args.b_list = {8, 16, 32, 64};
  args.s_list = {5, 10, 20};
  args.num_samples = 1000;
  args.matrix_seeds = {1, 2, 3, 4, 5};
  args.ortho = false;
}

std::vector<std::pair<std::size_t, std::size_t>> paired_configs(const RipArgs& args) {
  if (args.a_list.size() != args.b_list.size() || args.a_list.empty()) {
    throw CLI::ValidationError("--a and --b must be given the same number of times");
  }
  std::vector<std::pair<std::size_t, std::size_t>> configs;
  for (std::size_t i = 0; i < args.a_list.size(); ++i) {
    configs.emplace_back(args.a_list[i], args.b_list[i]);
  }
  return configs;
}

cosa::Json rip_flags_json(const RipArgs& args) {
  cosa::Json flags;
  flags["preset"] = args.preset;
  flags["m"] = args.m;
  flags["n"] = args.n;
  flags["a"] = args.a_list;
  flags["b"] = args.b_list;
  flags["s"] = args.s_list;
  flags["num_samples"] = args.num_samples;
  flags["matrix_seeds"] = args.matrix_seeds;
  flags["ortho"] = args.ortho;
  // Thread count is deliberately not echoed: it cannot affect results, and
  // report bodies must be byte-identical across --threads values.
  return flags;
}

void cmd_rip(const RipArgs& args_in) {
  RipArgs args = args_in;
  if (args.preset == "paper-table4") apply_table4_preset(args);
  if (args.s_list.empty()) args.s_list = {5, 10, 20};
  if (args.matrix_seeds.empty()) args.matrix_seeds = {1, 2, 3, 4, 5};

  cosa::RipStudyOptions opts;
  opts.num_samples = args.num_samples;
  opts.threads = args.global.threads;
  opts.orthonormalize = args.ortho;
  opts.bound_c = args.bound_c;
  opts.bound_m_eff = args.bound_m_eff;
  opts.bound_n_ambient = args.bound_n_ambient;

  const auto report = cosa::run_rip_study(paired_configs(args), args.s_list, args.m, args.n,
                                          args.matrix_seeds, opts);
  for (const auto& row : report.rows) {
    std::cerr << "(" << row.a << "," << row.b << ") s=" << row.s
              << " delta=" << cosa::format_double(row.delta_mean)
              << " +/- " << cosa::format_double(row.delta_std)
              << " mu=" << cosa::format_double(row.coherence_mean) << "\n";
  }
  emit_report(args.global, "rip", rip_flags_json(args), cosa::to_json(report));
}

void cmd_coherence(const RipArgs& args_in) {
  RipArgs args = args_in;
  if (args.preset == "paper-table4") apply_table4_preset(args);
  if (args.matrix_seeds.empty()) args.matrix_seeds = {1, 2, 3, 4, 5};

  cosa::Json rows = cosa::Json::array();
  for (const auto& [a, b] : paired_configs(args)) {
    double sum = 0.0;
    for (std::uint64_t seed : args.matrix_seeds) {
      sum += cosa::coherence(cosa::make_dictionary_view(
          cosa::make_projection_pair(seed, args.m, args.n, a, b, args.ortho)));
    }
    const double mean = sum / static_cast<double>(args.matrix_seeds.size());
    cosa::Json row;
    row["a"] = a;
    row["b"] = b;
    row["coherence"] = mean;
    rows.push_back(std::move(row));
    std::cerr << "(" << a << "," << b << ") mu=" << cosa::format_double(mean) << "\n";
  }
  cosa::Json payload;
  payload["m"] = args.m;
  payload["n"] = args.n;
  payload["matrix_seeds"] = args.matrix_seeds;
  payload["rows"] = std::move(rows);
  emit_report(args.global, "coherence", rip_flags_json(args), std::move(payload));
}

struct BoundArgs {
  GlobalFlags global;
  std::size_t s = 10;
  double c = 1.0;
  std::size_t m_eff = 512;
  std::size_t n_ambient = 256;
  double eta = 0.01;
};

void cmd_bound(const BoundArgs& args) {
  cosa::RipTheoryConfig cfg;
  cfg.c = args.c;
  cfg.m_eff = args.m_eff;
  cfg.n_ambient = args.n_ambient;
  cfg.eta = args.eta;
  const double bound = cosa::theoretical_bound(cfg, args.s);
  std::cerr << "bound=" << cosa::format_double(bound) << "\n";

  cosa::Json flags;
  flags["s"] = args.s;
  flags["C"] = args.c;
  flags["m_eff"] = args.m_eff;
  flags["n_ambient"] = args.n_ambient;
  flags["eta"] = args.eta;
  cosa::Json payload;
  payload["bound"] = bound;
  emit_report(args.global, "bound", std::move(flags), std::move(payload));
}

struct OmpArgs {
  GlobalFlags global;
  std::size_t m = 512, n = 256, a = 32, b = 8;
  std::size_t s = 3;
  std::size_t trials = 100;
  std::uint64_t pair_seed = 7;
  std::uint64_t trial_seed = 1;
  bool ortho = false;
};

void cmd_omp(const OmpArgs& args) {
  const auto view = cosa::make_dictionary_view(
      cosa::make_projection_pair(args.pair_seed, args.m, args.n, args.a, args.b, args.ortho));

  std::size_t successes = 0;
  double worst_coeff_error = 0.0;
  for (std::size_t trial = 0; trial < args.trials; ++trial) {
    // Planted coefficients with |value| >= 0.5 so supports are identifiable.
    cosa::SparseVector planted = cosa::sample_sparse_vector(
        cosa::derive_seed(args.trial_seed, trial), args.a * args.b, args.s);
    for (double& v : planted.values) {
      v = (v >= 0 ? 1.0 : -1.0) * (0.5 + std::fabs(v));
    }
    const cosa::Matrix target = cosa::apply_dictionary(view, planted);
    const cosa::SparseVector recovered = cosa::omp_recover(view, target, args.s);
    if (recovered.support != planted.support) continue;
    ++successes;
    for (std::size_t i = 0; i < args.s; ++i) {
      worst_coeff_error =
          std::max(worst_coeff_error, std::fabs(recovered.values[i] - planted.values[i]));
    }
  }
  std::cerr << "recovered " << successes << "/" << args.trials
            << " planted supports, max coeff error "
            << cosa::format_double(worst_coeff_error) << "\n";

  cosa::Json flags;
  flags["m"] = args.m;
  flags["n"] = args.n;
  flags["a"] = args.a;
  flags["b"] = args.b;
  flags["s"] = args.s;
  flags["trials"] = args.trials;
  flags["pair_seed"] = args.pair_seed;
  flags["trial_seed"] = args.trial_seed;
  flags["ortho"] = args.ortho;
  cosa::Json payload;
  payload["successes"] = successes;
  payload["trials"] = args.trials;
  payload["success_rate"] = static_cast<double>(successes) / static_cast<double>(args.trials);
  payload["max_coeff_error_on_successes"] = worst_coeff_error;
  emit_report(args.global, "omp", std::move(flags), std::move(payload));
}

struct BudgetArgs {
  GlobalFlags global;
  std::string manifest;
  std::string method = "cosa";
  std::uint64_t rank = 0, a = 0, b = 0;
  std::uint64_t bytes_per_param = 4;
  std::uint64_t opt_multiplier = 3;
};

void cmd_budget(const BudgetArgs& args) {
  const auto manifest = cosa::load_manifest(args.manifest);
  cosa::MethodSpec spec;
  spec.method = cosa::parse_method(args.method);
  spec.rank = args.rank;
  spec.a = args.a;
  spec.b = args.b;
  const auto report =
      cosa::model_budget(spec, manifest, args.bytes_per_param, args.opt_multiplier);
  std::cerr << manifest.model_name << " " << args.method << ": "
            << report.total_params << " trainable params, "
            << report.memory_bytes << " bytes\n";

  cosa::Json flags;
  flags["manifest"] = args.manifest;
  flags["method"] = args.method;
  flags["rank"] = args.rank;
  flags["a"] = args.a;
  flags["b"] = args.b;
  flags["bytes_per_param"] = args.bytes_per_param;
  flags["opt_multiplier"] = args.opt_multiplier;
  emit_report(args.global, "budget", std::move(flags), cosa::to_json(report));
}

struct TrainArgs {
  GlobalFlags global;
  std::string task = "inspan";
  cosa::ToyTaskSpec spec;
  std::string optimizer = "adam";
  std::vector<std::size_t> a_list, b_list;  // sweep only
};

cosa::Json train_flags_json(const TrainArgs& args) {
  cosa::Json flags;
  flags["task"] = args.task;
  flags["m"] = args.spec.m;
  flags["n"] = args.spec.n;
  flags["a"] = args.spec.a;
  flags["b"] = args.spec.b;
  flags["batch"] = args.spec.batch;
  flags["steps"] = args.spec.steps;
  flags["optimizer"] = args.optimizer;
  flags["lr"] = args.spec.optimizer.learning_rate;
  flags["alpha_scale"] = args.spec.alpha_scale;
  flags["pair_seed"] = args.spec.pair_seed;
  flags["data_seed"] = args.spec.data_seed;
  flags["ortho"] = args.spec.orthonormalize;
  flags["decay_lr"] = args.spec.decay_lr;
  return flags;
}

void finalize_train_spec(TrainArgs& args) {
  args.spec.kind = cosa::parse_task(args.task);
  args.spec.optimizer.kind = cosa::parse_optimizer(args.optimizer);
}

void cmd_train(TrainArgs args) {
  finalize_train_spec(args);
  const auto trace = cosa::run_toy(args.spec);
  std::cerr << "final loss " << cosa::format_double(trace.final_loss)
            << ", final relative error "
            << cosa::format_double(trace.final_relative_error) << " after "
            << args.spec.steps << " steps\n";
  emit_report(args.global, "train", train_flags_json(args), cosa::to_json(trace));
}

void cmd_sweep(TrainArgs args) {
  finalize_train_spec(args);
  const auto table = cosa::sweep_ab(args.spec, args.a_list, args.b_list);
  for (const auto& row : table.rows) {
    std::cerr << "(" << row.a << "," << row.b << ") params=" << row.params
              << " final_loss=" << cosa::format_double(row.final_loss) << "\n";
  }
  cosa::Json flags = train_flags_json(args);
  flags["a_list"] = args.a_list;
  flags["b_list"] = args.b_list;
  emit_report(args.global, "sweep", std::move(flags), cosa::to_json(table));
}

struct GradcheckArgs {
  GlobalFlags global;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  double step = 1e-5;
};

int cmd_gradcheck(const GradcheckArgs& args) {
  double worst = 0.0;
  for (std::size_t trial = 0; trial < args.trials; ++trial) {
    const std::uint64_t base = cosa::derive_seed(args.seed, trial);
    cosa::RngStream stream(base);
    const std::size_t a = 1 + stream.next_u64() % 8;
    const std::size_t b = 1 + stream.next_u64() % 8;
    const std::size_t m = a + stream.next_u64() % 8;
    const std::size_t n = b + stream.next_u64() % 8;
    const std::size_t batch = (stream.next_u64() % 2) ? 3 : 1;
    const std::size_t r = 1 + stream.next_u64() % std::min(m, n);

    const cosa::Matrix w0 = cosa::gaussian_matrix(cosa::derive_seed(base, 1), m, n);
    const cosa::Matrix x = cosa::gaussian_matrix(cosa::derive_seed(base, 2), n, batch);
    const cosa::Matrix target = cosa::gaussian_matrix(cosa::derive_seed(base, 3), m, batch);

    cosa::CosaAdapter cosa_adapter =
        cosa::make_cosa_adapter(cosa::derive_seed(base, 4), m, n, a, b, 0.75);
    cosa_adapter.core = cosa::gaussian_matrix(cosa::derive_seed(base, 5), a, b);
    worst = std::max(worst, cosa::grad_check({w0, cosa_adapter}, x, target, args.step));

    cosa::LoraAdapter lora_adapter =
        cosa::make_lora_adapter(cosa::derive_seed(base, 6), m, n, r, 0.75);
    lora_adapter.up = cosa::gaussian_matrix(cosa::derive_seed(base, 7), m, r);
    worst = std::max(worst, cosa::grad_check({w0, lora_adapter}, x, target, args.step));
  }
  std::cerr << "max relative gradient error over " << args.trials << " fixtures: "
            << cosa::format_double(worst) << "\n";

  cosa::Json flags;
  flags["trials"] = args.trials;
  flags["seed"] = args.seed;
  flags["step"] = args.step;
  cosa::Json payload;
  payload["max_relative_error"] = worst;
  payload["pass"] = worst <= 1e-6;
  emit_report(args.global, "gradcheck", std::move(flags), std::move(payload));
  return worst <= 1e-6 ? 0 : 1;
}

struct AnalyzeArgs {
  GlobalFlags global;
  std::string adapter_path;
  double threshold = 1e-4;
  double energy = 0.95;
};

void cmd_analyze(const AnalyzeArgs& args) {
  const cosa::CosaAdapter adapter = cosa::load_adapter(args.adapter_path);
  const cosa::CoreStats stats = cosa::analyze_core(adapter.core, args.threshold, args.energy);
  std::cerr << "core " << adapter.a << "x" << adapter.b << ": sparsity "
            << cosa::format_double(stats.sparsity_fraction) << ", |Y|_F "
            << cosa::format_double(stats.frobenius_norm) << "\n";

  cosa::Json flags;
  flags["adapter"] = args.adapter_path;
  flags["threshold"] = args.threshold;
  flags["energy"] = args.energy;
  cosa::Json payload;
  payload["m"] = adapter.m;
  payload["n"] = adapter.n;
  payload["a"] = adapter.a;
  payload["b"] = adapter.b;
  payload["seed"] = adapter.seed;
  payload["alpha_scale"] = adapter.alpha_scale;
  payload["stats"] = cosa::to_json(stats);
  emit_report(args.global, "analyze", std::move(flags), std::move(payload));
}

struct ExportArgs {
  std::string out;
  std::size_t m = 64, n = 48, a = 16, b = 8;
  std::uint64_t seed = 7;
  double alpha_scale = 1.0;
  std::uint64_t core_seed = 0;
  bool random_core = false;
};

void cmd_export(const ExportArgs& args) {
  cosa::CosaAdapter adapter =
      cosa::make_cosa_adapter(args.seed, args.m, args.n, args.a, args.b, args.alpha_scale);
  if (args.random_core) {
    adapter.core = cosa::gaussian_matrix(args.core_seed, args.a, args.b);
  }
  cosa::save_adapter(adapter, args.out);
  std::cerr << "wrote " << args.out << " (" << (44 + 8 * args.a * args.b) << " bytes)\n";
}

struct ImportArgs {
  std::string in;
  std::string out;
};

void cmd_import(const ImportArgs& args) {
  const cosa::CosaAdapter adapter = cosa::load_adapter(args.in);
  std::cerr << "adapter " << adapter.m << "x" << adapter.n << " core " << adapter.a << "x"
            << adapter.b << " seed " << adapter.seed << " alpha "
            << cosa::format_double(adapter.alpha_scale) << "\n";
  if (!args.out.empty()) {
    cosa::save_adapter(adapter, args.out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed-sensing adaptation toolkit"};
  app.require_subcommand(1);

  RipArgs rip_args;
  rip_args.global.threads = default_threads();
  auto* rip_cmd = app.add_subcommand("rip", "Monte-Carlo RIP study");
  add_global_flags(rip_cmd, rip_args.global);
  rip_cmd->add_option("--preset", rip_args.preset, "Named study preset")
      ->check(CLI::IsMember({"paper-table4"}));
  rip_cmd->add_option("--m", rip_args.m, "Base output dimension");
  rip_cmd->add_option("--n", rip_args.n, "Base input dimension");
  rip_cmd->add_option("--a", rip_args.a_list, "Core rows (repeat per config)");
  rip_cmd->add_option("--b", rip_args.b_list, "Core cols (repeat per config)");
  rip_cmd->add_option("--s", rip_args.s_list, "Sparsity levels");
  rip_cmd->add_option("--num-samples", rip_args.num_samples, "Samples per cell")
      ->check(CLI::Range(std::size_t{100}, std::size_t{10000000}));
  rip_cmd->add_option("--matrix-seeds", rip_args.matrix_seeds, "Dictionary seeds");
  rip_cmd->add_flag("--ortho", rip_args.ortho, "Orthonormalized (exact-isometry) pairs");
  rip_cmd->add_option("--bound-c", rip_args.bound_c, "Constant C in the theoretical bound");
  rip_cmd->add_option("--bound-m-eff", rip_args.bound_m_eff,
                      "Effective measurement count (default m*n)");
  rip_cmd->add_option("--bound-n-ambient", rip_args.bound_n_ambient,
                      "Ambient dimension (default a*b)");

  RipArgs coherence_args;
  coherence_args.global.threads = default_threads();
  auto* coherence_cmd = app.add_subcommand("coherence", "Dictionary mutual coherence");
  add_global_flags(coherence_cmd, coherence_args.global);
  coherence_cmd->add_option("--preset", coherence_args.preset, "Named preset")
      ->check(CLI::IsMember({"paper-table4"}));
  coherence_cmd->add_option("--m", coherence_args.m, "Base output dimension");
  coherence_cmd->add_option("--n", coherence_args.n, "Base input dimension");
  coherence_cmd->add_option("--a", coherence_args.a_list, "Core rows (repeat per config)");
  coherence_cmd->add_option("--b", coherence_args.b_list, "Core cols (repeat per config)");
  coherence_cmd->add_option("--matrix-seeds", coherence_args.matrix_seeds, "Dictionary seeds");
  coherence_cmd->add_flag("--ortho", coherence_args.ortho, "Orthonormalized pairs");

  BoundArgs bound_args;
  auto* bound_cmd = app.add_subcommand("bound", "Theoretical RIP bound");
  add_global_flags(bound_cmd, bound_args.global);
  bound_cmd->add_option("--s", bound_args.s, "Sparsity level")->check(CLI::PositiveNumber);
  bound_cmd->add_option("--C", bound_args.c, "Constant C");
  bound_cmd->add_option("--m-eff", bound_args.m_eff, "Effective measurement count")
      ->check(CLI::PositiveNumber);
  bound_cmd->add_option("--n-ambient", bound_args.n_ambient, "Ambient dimension")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
  bound_cmd->add_option("--eta", bound_args.eta, "Failure probability bookkeeping");

  OmpArgs omp_args;
  auto* omp_cmd = app.add_subcommand("omp", "Planted-support OMP recovery demo");
  add_global_flags(omp_cmd, omp_args.global);
  std::string omp_demo = "planted";
  omp_cmd->add_option("--demo", omp_demo, "Demo kind")->check(CLI::IsMember({"planted"}));
  omp_cmd->add_option("--m", omp_args.m, "Base output dimension");
  omp_cmd->add_option("--n", omp_args.n, "Base input dimension");
  omp_cmd->add_option("--a", omp_args.a, "Core rows");
  omp_cmd->add_option("--b", omp_args.b, "Core cols");
  omp_cmd->add_option("--s", omp_args.s, "Planted sparsity")->check(CLI::PositiveNumber);
  omp_cmd->add_option("--trials", omp_args.trials, "Trial count")->check(CLI::PositiveNumber);
  omp_cmd->add_option("--pair-seed", omp_args.pair_seed, "Dictionary seed");
  omp_cmd->add_option("--trial-seed", omp_args.trial_seed, "Planted-vector seed");
  omp_cmd->add_flag("--ortho", omp_args.ortho, "Orthonormalized pair");

  BudgetArgs budget_args;
  auto* budget_cmd = app.add_subcommand("budget", "Parameter/memory accounting");
  add_global_flags(budget_cmd, budget_args.global);
  budget_cmd->add_option("--manifest", budget_args.manifest, "Model manifest JSON")
      ->required();
  budget_cmd->add_option("--method", budget_args.method,
                         "lora | pissa | dora | vera | cosa | full");
  budget_cmd->add_option("--r", budget_args.rank, "Rank (lora/pissa/dora)");
  budget_cmd->add_option("--a", budget_args.a, "Core rows (cosa)");
  budget_cmd->add_option("--b", budget_args.b, "Core cols (cosa)");
  budget_cmd->add_option("--bytes", budget_args.bytes_per_param, "Bytes per parameter");
  budget_cmd->add_option("--opt-mult", budget_args.opt_multiplier,
                         "Optimizer-state multiplier");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Toy teacher-student training run");
  add_global_flags(train_cmd, train_args.global);
  train_cmd->add_option("--task", train_args.task, "inspan | offspan");
  train_cmd->add_option("--m", train_args.spec.m, "Layer output dimension");
  train_cmd->add_option("--n", train_args.spec.n, "Layer input dimension");
  train_cmd->add_option("--a", train_args.spec.a, "Core rows");
  train_cmd->add_option("--b", train_args.spec.b, "Core cols");
  train_cmd->add_option("--batch", train_args.spec.batch, "Fixed dataset columns");
  train_cmd->add_option("--steps", train_args.spec.steps, "Optimization steps");
  train_cmd->add_option("--optimizer", train_args.optimizer, "sgd | adam | adamw");
  train_cmd->add_option("--lr", train_args.spec.optimizer.learning_rate, "Learning rate");
  train_cmd->add_option("--alpha-scale", train_args.spec.alpha_scale, "Adapter scale");
  train_cmd->add_option("--pair-seed", train_args.spec.pair_seed, "Projection seed");
  train_cmd->add_option("--data-seed", train_args.spec.data_seed, "Data/teacher seed");
  train_cmd->add_flag("--ortho", train_args.spec.orthonormalize, "Orthonormalized pair");
  train_cmd->add_flag("!--no-decay", train_args.spec.decay_lr, "Disable the linear lr ramp");

  TrainArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid of toy runs over (a, b)");
  add_global_flags(sweep_cmd, sweep_args.global);
  sweep_cmd->add_option("--task", sweep_args.task, "inspan | offspan");
  sweep_cmd->add_option("--m", sweep_args.spec.m, "Layer output dimension");
  sweep_cmd->add_option("--n", sweep_args.spec.n, "Layer input dimension");
  sweep_cmd->add_option("--a-list", sweep_args.a_list, "Grid values for a")->required();
  sweep_cmd->add_option("--b-list", sweep_args.b_list, "Grid values for b")->required();
  sweep_cmd->add_option("--batch", sweep_args.spec.batch, "Fixed dataset columns");
  sweep_cmd->add_option("--steps", sweep_args.spec.steps, "Optimization steps");
  sweep_cmd->add_option("--optimizer", sweep_args.optimizer, "sgd | adam | adamw");
  sweep_cmd->add_option("--lr", sweep_args.spec.optimizer.learning_rate, "Learning rate");
  sweep_cmd->add_option("--alpha-scale", sweep_args.spec.alpha_scale, "Adapter scale");
  sweep_cmd->add_option("--pair-seed", sweep_args.spec.pair_seed, "Projection seed");
  sweep_cmd->add_option("--data-seed", sweep_args.spec.data_seed, "Data/teacher seed");

  GradcheckArgs gradcheck_args;
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  add_global_flags(gradcheck_cmd, gradcheck_args.global);
  gradcheck_cmd->add_option("--trials", gradcheck_args.trials, "Random fixtures")
      ->check(CLI::PositiveNumber);
  gradcheck_cmd->add_option("--seed", gradcheck_args.seed, "Fixture seed");
  gradcheck_cmd->add_option("--step", gradcheck_args.step, "Finite-difference step");

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Trained-core structural metrics");
  add_global_flags(analyze_cmd, analyze_args.global);
  analyze_cmd->add_option("--adapter", analyze_args.adapter_path, "COSA adapter file")
      ->required();
  analyze_cmd->add_option("--threshold", analyze_args.threshold, "Sparsity threshold");
  analyze_cmd->add_option("--energy", analyze_args.energy, "Spectral energy fraction");

  ExportArgs export_args;
  auto* export_cmd = app.add_subcommand("export", "Write a COSA adapter file");
  export_cmd->add_option("--out", export_args.out, "Output path")->required();
  export_cmd->add_option("--m", export_args.m, "Layer output dimension");
  export_cmd->add_option("--n", export_args.n, "Layer input dimension");
  export_cmd->add_option("--a", export_args.a, "Core rows");
  export_cmd->add_option("--b", export_args.b, "Core cols");
  export_cmd->add_option("--seed", export_args.seed, "Projection seed");
  export_cmd->add_option("--alpha-scale", export_args.alpha_scale, "Adapter scale");
  export_cmd->add_flag("--random-core", export_args.random_core,
                       "Fill the core with Gaussian values instead of zeros");
  export_cmd->add_option("--core-seed", export_args.core_seed, "Seed for --random-core");

  ImportArgs import_args;
  auto* import_cmd = app.add_subcommand("import", "Read (and optionally rewrite) an adapter");
  import_cmd->add_option("--in", import_args.in, "Input adapter file")->required();
  import_cmd->add_option("--out", import_args.out, "Optional re-export path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    if (rip_cmd->parsed()) {
      if (rip_args.preset.empty() && rip_args.a_list.empty()) {
        std::cerr << "rip: need --preset or --a/--b configs\n";
        return 2;
      }
      cmd_rip(rip_args);
    } else if (coherence_cmd->parsed()) {
      if (coherence_args.preset.empty() && coherence_args.a_list.empty()) {
        std::cerr << "coherence: need --preset or --a/--b configs\n";
        return 2;
      }
      cmd_coherence(coherence_args);
    } else if (bound_cmd->parsed()) {
      cmd_bound(bound_args);
    } else if (omp_cmd->parsed()) {
      cmd_omp(omp_args);
    } else if (budget_cmd->parsed()) {
      cmd_budget(budget_args);
    } else if (train_cmd->parsed()) {
      cmd_train(train_args);
    } else if (sweep_cmd->parsed()) {
      cmd_sweep(sweep_args);
    } else if (gradcheck_cmd->parsed()) {
      return cmd_gradcheck(gradcheck_args);
    } else if (analyze_cmd->parsed()) {
      cmd_analyze(analyze_args);
    } else if (export_cmd->parsed()) {
      cmd_export(export_args);
    } else if (import_cmd->parsed()) {
      cmd_import(import_args);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
