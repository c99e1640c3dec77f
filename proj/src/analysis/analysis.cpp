#include "pambench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "pambench/errors.hpp"
#include "pambench/harness.hpp"
#include "pambench/taskgen.hpp"
#include "pambench/util.hpp"

namespace pambench {
namespace fs = std::filesystem;

namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

int kind_rank(const std::string& label) {
  auto k = parse_task_kind(label);
  return k ? static_cast<int>(*k) : kTaskKindCount;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<const ScoreCell*> rows_of(const ScoreTable& t) {
  std::vector<const ScoreCell*> out;
  for (const auto& c : t.groups) out.push_back(&c);
  for (const auto& c : t.tasks) out.push_back(&c);
  return out;
}

}  // namespace

double binomial_se(double p, std::uint64_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

std::string format_score(double p, double se) { return fixed2(100.0 * p) + "±" + fixed2(100.0 * se); }

std::string format_delta(double delta_pct) {
  const std::string s = fixed2(delta_pct);
  return s.starts_with("-") ? s : "+" + s;
}

std::string DeltaRow::format() const { return format_delta(delta_pct) + "±" + fixed2(se_pct); }

const ScoreCell* ScoreTable::find(const std::string& label) const {
  for (const auto& c : groups)
    if (c.label == label) return &c;
  for (const auto& c : tasks)
    if (c.label == label) return &c;
  return nullptr;
}

const std::vector<GroupDef>& score_groups() {
  static const std::vector<GroupDef> groups = {
      {"Percep. (Cat)", {"Perc-Cat-R", "Perc-Cat-C"}},
      {"Percep. (Loc)", {"Perc-Loc-R", "Perc-Loc-C"}},
      {"Feature Attn.", {"Att-Feat-R", "Att-Feat-C"}},
      {"Spatial Attn.", {"Att-Spa-R", "Att-Spa-C"}},
      {"Memory (Cat)", {"Mem-Cat-R", "Mem-Cat-C", "Mem-Dis-Cat-R", "Mem-Dis-Cat-C"}},
      {"Memory (Loc)", {"Mem-Loc-R", "Mem-Loc-C", "Mem-Dis-Loc-R", "Mem-Dis-Loc-C"}},
      {"CVR-Cat-L", {"CVR-Cat-L"}},
      {"CVR-Loc-L", {"CVR-Loc-L"}},
      {"CVR-Cat-M", {"CVR-Cat-M"}},
      {"CVR-Loc-M", {"CVR-Loc-M"}},
      {"CVR-Cat-H", {"CVR-Cat-H"}},
      {"CVR-Loc-H", {"CVR-Loc-H"}},
  };
  return groups;
}

ScoreTable score_outcomes(const std::vector<Outcome>& outcomes, std::string name, const ScoreOptions& opts) {
  std::map<std::string, ScoreCell> cells;
  for (const Outcome& o : outcomes) {
    if (o.errored && opts.exclude_errors) continue;
    ScoreCell& c = cells[o.task];
    c.label = o.task;
    ++c.n;
    c.correct += o.correct && !o.errored;
  }
  if (cells.empty()) throw EmptyResults("no scorable results for \"" + name + "\"");
  ScoreTable t;
  t.name = std::move(name);
  for (auto& [label, c] : cells) t.tasks.push_back(c);
  std::stable_sort(t.tasks.begin(), t.tasks.end(), [](const ScoreCell& a, const ScoreCell& b) {
    return kind_rank(a.label) < kind_rank(b.label);
  });
  for (const GroupDef& g : score_groups()) {
    ScoreCell pooled{g.label, 0, 0};
    for (const auto& m : g.members) {
      if (auto it = cells.find(m); it != cells.end()) {
        pooled.n += it->second.n;
        pooled.correct += it->second.correct;
      }
    }
    if (pooled.n) t.groups.push_back(pooled);
  }
  return t;
}

ScoreTable score(const fs::path& result_dir, const ScoreOptions& opts) {
  if (!fs::is_directory(result_dir)) throw MissingFile("no result set at " + result_dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(result_dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.starts_with("trial") && name.ends_with(".json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Outcome> outcomes;
  for (const auto& f : files) {
    const TrialResult r = read_result(f);
    outcomes.push_back({r.kind ? std::string(to_string(*r.kind)) : r.task, r.correct, r.error_class.has_value()});
  }
  return score_outcomes(outcomes, result_dir.filename().string(), opts);
}

CorrelationResult pearson(const std::vector<double>& xs, const std::vector<double>& ys, std::string x_label,
                          std::string y_label) {
  if (xs.size() != ys.size()) throw DegenerateInput("pearson needs equally long inputs");
  const std::size_t n = xs.size();
  if (n < 2) throw DegenerateInput("pearson needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw DegenerateInput("pearson input has zero variance");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return {std::move(x_label), std::move(y_label), n, r};
}

DeltaTable compare_runs(const ScoreTable& base, const ScoreTable& variant) {
  std::set<std::string> a, b;
  for (const auto& c : base.tasks) a.insert(c.label);
  for (const auto& c : variant.tasks) b.insert(c.label);
  if (a != b) throw KindMismatch("\"" + base.name + "\" and \"" + variant.name + "\" cover different tasks");
  DeltaTable d;
  d.base_name = base.name;
  d.variant_name = variant.name;
  for (const ScoreCell* c : rows_of(base)) {
    const ScoreCell* v = variant.find(c->label);
    if (!v) throw KindMismatch("row \"" + c->label + "\" missing from \"" + variant.name + "\"");
    DeltaRow row;
    row.label = c->label;
    row.base_pct = 100.0 * c->p_hat();
    row.variant_pct = 100.0 * v->p_hat();
    row.delta_pct = row.variant_pct - row.base_pct;
    row.se_pct = 100.0 * std::sqrt(c->se() * c->se() + v->se() * v->se());
    const double shown = std::round(row.delta_pct * 100.0);
    row.sign = shown > 0 ? 1 : (shown < 0 ? -1 : 0);
    d.rows.push_back(row);
  }
  return d;
}

std::vector<fs::path> emit_report(const std::vector<ScoreTable>& tables, const std::optional<DeltaTable>& delta,
                                  const fs::path& out_dir, const std::string& stem) {
  if (tables.empty()) throw EmptyResults("nothing to report");
  for (const auto& t : tables) {
    if (t.tasks.empty()) throw EmptyResults("table \"" + t.name + "\" has no rows");
  }
  std::string csv = std::string(kReportCsvHeader) + "\n";
  std::string md = "# Score report\n";
  for (const auto& t : tables) {
    md += "\n## " + t.name + "\n\n| Row | n | Accuracy (%) |\n|---|---:|---:|\n";
    for (const ScoreCell* c : rows_of(t)) {
      const bool group = c >= t.groups.data() && c < t.groups.data() + t.groups.size();
      csv += "score," + csv_field(t.name) + "," + (group ? "group" : "task") + "," + csv_field(c->label) + "," +
             std::to_string(c->n) + "," + std::to_string(c->correct) + "," + fixed2(100.0 * c->p_hat()) + "," +
             fixed2(100.0 * c->se()) + ",,\n";
      md += "| " + c->label + " | " + std::to_string(c->n) + " | " + c->format() + " |\n";
      if (group && c == &t.groups.back()) md += "| | | |\n";
    }
  }
  if (delta) {
    md += "\n## " + delta->variant_name + " vs " + delta->base_name +
          "\n\n| Row | Base (%) | Variant (%) | Change (pp) |\n|---|---:|---:|---:|\n";
    for (const DeltaRow& r : delta->rows) {
      csv += "delta," + csv_field(delta->variant_name + " vs " + delta->base_name) + ",row," + csv_field(r.label) +
             ",,," + fixed2(r.variant_pct) + ",," + format_delta(r.delta_pct) + "," + fixed2(r.se_pct) + "\n";
      const char* mark = r.sign > 0 ? " (up)" : (r.sign < 0 ? " (down)" : "");
      md += "| " + r.label + " | " + fixed2(r.base_pct) + " | " + fixed2(r.variant_pct) + " | " + r.format() + mark +
            " |\n";
    }
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const fs::path csv_path = out_dir / (stem + ".csv");
  const fs::path md_path = out_dir / (stem + ".md");
  write_file_atomic(csv_path, csv);
  write_file_atomic(md_path, md);
  return {csv_path, md_path};
}

}  // namespace pambench
