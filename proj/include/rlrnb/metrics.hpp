#pragma once

// Confusion matrix and the evaluation indicators: per-class recall,
// precision and F1, their unweighted macro averages, and micro accuracy.
// Undefined ratios (no true instances, never predicted, P + R = 0) are 0, and
// macro averages run over every class including those.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rlrnb/error.hpp"

namespace rlrnb {

class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> classes)
      : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0) {
    if (classes_.empty()) throw Error("confusion matrix needs at least one class");
  }

  const std::vector<std::string>& classes() const noexcept { return classes_; }
  std::size_t num_classes() const noexcept { return classes_.size(); }

  /// Count of instances of true class `t` predicted as `p`.
  std::uint64_t at(std::size_t t, std::size_t p) const { return counts_.at(t * classes_.size() + p); }
  void add(std::size_t t, std::size_t p, std::uint64_t n = 1) {
    if (t >= classes_.size() || p >= classes_.size()) throw Error("confusion: class index out of range");
    counts_[t * classes_.size() + p] += n;
    total_ += n;
  }

  std::uint64_t total() const noexcept { return total_; }

  std::uint64_t true_count(std::size_t t) const {
    std::uint64_t s = 0;
    for (std::size_t p = 0; p < classes_.size(); ++p) s += at(t, p);
    return s;
  }
  std::uint64_t predicted_count(std::size_t p) const {
    std::uint64_t s = 0;
    for (std::size_t t = 0; t < classes_.size(); ++t) s += at(t, p);
    return s;
  }

  nlohmann::json to_json() const {
    std::vector<std::vector<std::uint64_t>> rows(classes_.size());
    for (std::size_t t = 0; t < classes_.size(); ++t)
      for (std::size_t p = 0; p < classes_.size(); ++p) rows[t].push_back(at(t, p));
    return {{"classes", classes_}, {"counts", rows}};
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::string> classes_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Builds the matrix from parallel label lists. Every label must be in `classes`.
inline ConfusionMatrix confusion(std::span<const std::string> truth,
                                 std::span<const std::string> predicted,
                                 std::span<const std::string> classes) {
  if (truth.size() != predicted.size())
    throw Error("confusion: truth has " + std::to_string(truth.size()) + " labels but predictions have " +
                std::to_string(predicted.size()));
  if (truth.empty()) throw Error("confusion: no labels");
  ConfusionMatrix cm({classes.begin(), classes.end()});
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (!index.emplace(classes[i], i).second) throw Error("confusion: duplicate class " + classes[i]);
  auto lookup = [&](const std::string& label) {
    auto it = index.find(label);
    if (it == index.end()) throw Error("confusion: unknown label '" + label + "'");
    return it->second;
  };
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(lookup(truth[i]), lookup(predicted[i]));
  return cm;
}

/// Harmonic mean of precision and recall; 0 when both are 0.
inline double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

struct ClassMetrics {
  std::string label;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct EvaluationReport {
  std::vector<ClassMetrics> per_class;
  double macro_recall = 0.0;
  double macro_precision = 0.0;
  double macro_f1 = 0.0;
  double micro_accuracy = 0.0;
  ConfusionMatrix matrix;
};

inline EvaluationReport report(const ConfusionMatrix& cm) {
  if (cm.num_classes() == 0 || cm.total() == 0) throw Error("report: empty confusion matrix");
  EvaluationReport r;
  r.matrix = cm;
  std::uint64_t correct = 0;
  for (std::size_t c = 0; c < cm.num_classes(); ++c) {
    const std::uint64_t tp = cm.at(c, c);
    const std::uint64_t actual = cm.true_count(c);
    const std::uint64_t predicted = cm.predicted_count(c);
    ClassMetrics m;
    m.label = cm.classes()[c];
    m.support = actual;
    m.recall = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    m.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
    r.macro_recall += m.recall;
    r.macro_precision += m.precision;
    r.macro_f1 += m.f1;
    correct += tp;
    r.per_class.push_back(std::move(m));
  }
  const auto k = static_cast<double>(cm.num_classes());
  r.macro_recall /= k;
  r.macro_precision /= k;
  r.macro_f1 /= k;
  r.micro_accuracy = static_cast<double>(correct) / static_cast<double>(cm.total());
  return r;
}

inline constexpr int kReportFormatVersion = 1;

inline nlohmann::json to_json(const EvaluationReport& r) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& m : r.per_class)
    per_class.push_back({{"class", m.label},
                         {"recall", m.recall},
                         {"precision", m.precision},
                         {"f1", m.f1},
                         {"support", m.support}});
  return {{"format_version", kReportFormatVersion},
          {"kind", "evaluation_report"},
          {"per_class", per_class},
          {"macro_recall", r.macro_recall},
          {"macro_precision", r.macro_precision},
          {"macro_f1", r.macro_f1},
          {"micro_accuracy", r.micro_accuracy},
          {"confusion", r.matrix.to_json()}};
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kReportFormatVersion || j.at("kind") != "evaluation_report")
      throw Error("not an evaluation report (or unsupported format_version)");
    const auto& cj = j.at("confusion");
    ConfusionMatrix cm(cj.at("classes").get<std::vector<std::string>>());
    const auto rows = cj.at("counts").get<std::vector<std::vector<std::uint64_t>>>();
    if (rows.size() != cm.num_classes()) throw Error("confusion row count mismatch");
    for (std::size_t t = 0; t < rows.size(); ++t) {
      if (rows[t].size() != cm.num_classes()) throw Error("confusion column count mismatch");
      for (std::size_t p = 0; p < rows[t].size(); ++p) cm.add(t, p, rows[t][p]);
    }
    return report(cm);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed report JSON: ") + e.what());
  }
}

/// Aligned table: one row per class (R, P, F1), then macro and micro rows.
inline std::string format_table(const EvaluationReport& r) {
  std::size_t width = 8;
  for (const auto& m : r.per_class) width = std::max(width, m.label.size() + 2);
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << std::left << std::setw(static_cast<int>(width)) << "class" << std::right << std::setw(8) << "R"
     << std::setw(8) << "P" << std::setw(8) << "F1" << std::setw(10) << "support" << '\n';
  for (const auto& m : r.per_class)
    os << std::left << std::setw(static_cast<int>(width)) << m.label << std::right << std::setw(8)
       << m.recall << std::setw(8) << m.precision << std::setw(8) << m.f1 << std::setw(10) << m.support
       << '\n';
  os << std::left << std::setw(static_cast<int>(width)) << "macro" << std::right << std::setw(8)
     << r.macro_recall << std::setw(8) << r.macro_precision << std::setw(8) << r.macro_f1 << '\n';
  os << std::left << std::setw(static_cast<int>(width)) << "micro A" << std::right << std::setw(8)
     << r.micro_accuracy << '\n';
  return os.str();
}

}  // namespace rlrnb
