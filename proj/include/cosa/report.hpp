#ifndef COSA_REPORT_HPP
#define COSA_REPORT_HPP

#include <string>

#include <json.hpp>

#include "cosa/adapter.hpp"
#include "cosa/budget.hpp"
#include "cosa/rip.hpp"
#include "cosa/train.hpp"

namespace cosa {

using Json = nlohmann::ordered_json;

Json to_json(const RipStudyReport& report);
Json to_json(const BudgetReport& report);
Json to_json(const TrainTrace& trace);
Json to_json(const SweepTable& table);
Json to_json(const CoreStats& stats);

/// Flatten {"provenance": {...}, "rows": [...], ...} into CSV: comment lines
/// carrying the scalar fields, then a dotted-name header and one line per
/// row. Row arrays must hold flat objects with identical keys.
std::string to_csv(const Json& report);

/// Round-trip-exact float formatting shared by JSON and CSV emission.
std::string format_double(double value);

}  // namespace cosa

#endif
