#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pambench {

double binomial_se(double p, std::uint64_t n);

// "46.00±7.05": percentages with two decimals.
std::string format_score(double p, double se);
// "+28.67", "-6.17", "+0.00"
std::string format_delta(double delta_pct);

struct ScoreCell {
  std::string label;
  std::uint64_t n = 0;
  std::uint64_t correct = 0;

  double p_hat() const { return n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0; }
  double se() const { return binomial_se(p_hat(), n); }
  std::string format() const { return format_score(p_hat(), se()); }
};

struct ScoreTable {
  std::string name;
  std::vector<ScoreCell> tasks;   // one per task label present, kinds in canonical order first
  std::vector<ScoreCell> groups;  // pooled rows

  const ScoreCell* find(const std::string& label) const;  // groups, then tasks
};

struct Outcome {
  std::string task;  // kind name or other task label
  bool correct = false;
  bool errored = false;
};

struct ScoreOptions {
  bool exclude_errors = false;  // errored trials count as incorrect by default
};

// Grouped rows: each pools all trials of its member tasks.
struct GroupDef {
  std::string label;
  std::vector<std::string> members;
};
const std::vector<GroupDef>& score_groups();

// Throws EmptyResults.
ScoreTable score_outcomes(const std::vector<Outcome>& outcomes, std::string name, const ScoreOptions& opts = {});

// Reads every per-trial result file under a result directory. Throws EmptyResults, SchemaError.
ScoreTable score(const std::filesystem::path& result_dir, const ScoreOptions& opts = {});

struct CorrelationResult {
  std::string x_label, y_label;
  std::size_t n = 0;
  double r = 0;
};

// Throws DegenerateInput for n < 2, unequal lengths or zero variance.
CorrelationResult pearson(const std::vector<double>& xs, const std::vector<double>& ys, std::string x_label = "x",
                          std::string y_label = "y");

struct DeltaRow {
  std::string label;
  double base_pct = 0, variant_pct = 0;
  double delta_pct = 0;  // percentage points
  double se_pct = 0;     // sqrt(se_base^2 + se_variant^2), in points
  int sign = 0;          // -1, 0, +1 at display precision

  std::string format() const;  // "+28.67±5.00"
};

struct DeltaTable {
  std::string base_name, variant_name;
  std::vector<DeltaRow> rows;  // groups first, then tasks
};

// Throws KindMismatch unless both tables cover the same tasks.
DeltaTable compare_runs(const ScoreTable& base, const ScoreTable& variant);

// Writes <stem>.csv and <stem>.md; returns the two paths. Throws EmptyResults, IoError.
std::vector<std::filesystem::path> emit_report(const std::vector<ScoreTable>& tables,
                                               const std::optional<DeltaTable>& delta,
                                               const std::filesystem::path& out_dir, const std::string& stem = "report");

inline constexpr std::string_view kReportCsvHeader =
    "section,table,row_type,row,n,correct,accuracy_pct,se_pct,delta_pct,delta_se_pct";

}  // namespace pambench
