#include "cosa/report.hpp"

#include <charconv>
#include <cmath>

namespace cosa {

namespace {

// Non-finite values surface as strings so they survive JSON emission.
Json json_number(double value) {
  if (std::isfinite(value)) return value;
  if (std::isnan(value)) return "nan";
  return value > 0 ? "inf" : "-inf";
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

Json to_json(const RipStudyReport& report) {
  Json out;
  out["m"] = report.m;
  out["n"] = report.n;
  out["num_samples"] = report.num_samples;
  out["matrix_seeds"] = report.matrix_seeds;
  Json rows = Json::array();
  for (const auto& row : report.rows) {
    Json r;
    r["a"] = row.a;
    r["b"] = row.b;
    r["s"] = row.s;
    r["delta_mean"] = row.delta_mean;
    r["delta_std"] = row.delta_std;
    r["coherence"] = row.coherence_mean;
    r["bound"] = row.bound;
    r["conservative_factor"] = json_number(row.conservative_factor);
    rows.push_back(std::move(r));
  }
  out["rows"] = std::move(rows);
  return out;
}

Json to_json(const BudgetReport& report) {
  Json out;
  out["model_name"] = report.model_name;
  out["method"] = method_name(report.spec.method);
  if (report.spec.rank > 0) out["rank"] = report.spec.rank;
  if (report.spec.method == Method::cosa) {
    out["a"] = report.spec.a;
    out["b"] = report.spec.b;
  }
  out["bytes_per_param"] = report.bytes_per_param;
  out["opt_multiplier"] = report.opt_multiplier;
  out["total_params"] = report.total_params;
  out["memory_bytes"] = report.memory_bytes;
  Json rows = Json::array();
  for (const auto& row : report.rows) {
    Json r;
    r["name"] = row.name;
    r["m"] = row.m;
    r["n"] = row.n;
    r["count"] = row.count;
    r["params_per_instance"] = row.params_per_instance;
    r["params_total"] = row.params_total;
    rows.push_back(std::move(r));
  }
  out["rows"] = std::move(rows);
  return out;
}

Json to_json(const TrainTrace& trace) {
  // Wall time is deliberately absent: report bodies must be byte-identical
  // across reruns.
  Json out;
  out["final_loss"] = trace.final_loss;
  out["final_relative_error"] = trace.final_relative_error;
  Json rows = Json::array();
  for (std::size_t i = 0; i < trace.losses.size(); ++i) {
    Json r;
    r["step"] = i;
    r["loss"] = trace.losses[i];
    rows.push_back(std::move(r));
  }
  out["rows"] = std::move(rows);
  return out;
}

Json to_json(const SweepTable& table) {
  Json out;
  out["task"] = table.base.kind == ToyTaskKind::inspan_recovery ? "inspan" : "offspan";
  out["m"] = table.base.m;
  out["n"] = table.base.n;
  out["steps"] = table.base.steps;
  out["pair_seed"] = table.base.pair_seed;
  out["data_seed"] = table.base.data_seed;
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r;
    r["a"] = row.a;
    r["b"] = row.b;
    r["params"] = row.params;
    r["final_loss"] = row.final_loss;
    r["final_relative_error"] = row.final_relative_error;
    rows.push_back(std::move(r));
  }
  out["rows"] = std::move(rows);
  return out;
}

Json to_json(const CoreStats& stats) {
  Json out;
  out["sparsity_fraction"] = stats.sparsity_fraction;
  out["effective_rank"] =
      stats.effective_rank ? Json(*stats.effective_rank) : Json(nullptr);
  out["frobenius_norm"] = stats.frobenius_norm;
  out["condition_number"] =
      stats.condition_number ? json_number(*stats.condition_number) : Json(nullptr);
  return out;
}

namespace {

std::string csv_scalar(const Json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_float()) return format_double(value.get<double>());
  if (value.is_null()) return "";
  return value.dump();
}

void emit_comments(std::string& out, const std::string& prefix, const Json& value) {
  if (value.is_object()) {
    for (const auto& [key, child] : value.items()) {
      emit_comments(out, prefix.empty() ? key : prefix + "." + key, child);
    }
  } else if (value.is_array()) {
    std::string joined;
    for (const auto& item : value) {
      if (!joined.empty()) joined += ";";
      joined += csv_scalar(item);
    }
    out += "# " + prefix + "=" + joined + "\n";
  } else {
    out += "# " + prefix + "=" + csv_scalar(value) + "\n";
  }
}

}  // namespace

std::string to_csv(const Json& report) {
  std::string out;
  for (const auto& [key, value] : report.items()) {
    if (key == "rows") continue;
    emit_comments(out, key, value);
  }
  const auto rows = report.find("rows");
  if (rows == report.end() || rows->empty()) return out;

  std::string header;
  for (const auto& [key, value] : rows->front().items()) {
    (void)value;
    if (!header.empty()) header += ",";
    header += key;
  }
  out += header + "\n";
  for (const auto& row : *rows) {
    std::string line;
    for (const auto& [key, value] : row.items()) {
      (void)key;
      if (!line.empty()) line += ",";
      line += csv_scalar(value);
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace cosa
