#pragma once

// Per-class regularization tuning for the RLR_UNB rule: Differential
// Evolution (rand/1/bin) over a continuous genome of log10 exponents, decoded
// onto the candidate grid and scored by validation macro-F1. An exhaustive
// grid search is provided for small class counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlrnb/classifiers.hpp"
#include "rlrnb/corpus.hpp"
#include "rlrnb/counts.hpp"
#include "rlrnb/detail/random.hpp"
#include "rlrnb/error.hpp"
#include "rlrnb/metrics.hpp"

namespace rlrnb {

struct TunerConfig {
  std::size_t max_gen = 50;
  std::size_t population = 30;
  double diff_weight = 0.8;
  double crossover_prob = 0.6;
  /// Candidate λ = 10^e for each e.
  std::vector<int> theta_exponents{-9, -8, -7, -6, -5, -4, -3, -2, -1};
  std::uint64_t seed = 0;

  void validate() const {
    if (max_gen == 0) throw Error("tuner: max_gen must be positive");
    if (population < 4) throw Error("tuner: population must be at least 4");
    if (!(diff_weight > 0.0) || !std::isfinite(diff_weight))
      throw Error("tuner: diff_weight must be positive and finite");
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0))
      throw Error("tuner: crossover_prob must lie in [0,1]");
    if (theta_exponents.empty()) throw Error("tuner: theta grid is empty");
    auto sorted = theta_exponents;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error("tuner: theta grid has duplicate exponents");
  }

  /// Grid exponents in increasing order.
  std::vector<int> grid() const {
    auto g = theta_exponents;
    std::sort(g.begin(), g.end());
    return g;
  }
};

inline double lambda_from_exponent(int exponent) { return std::pow(10.0, exponent); }

/// One real exponent per class (model class order).
struct Genome {
  std::vector<double> exponents;
};

/// Index into the sorted `grid` of the exponent that `x` decodes to: clamp to
/// the grid range, round half-to-even, and fall back to the nearest grid
/// member (lower on ties) when the rounded value is not on a sparse grid.
inline std::size_t decode_index(double x, std::span<const int> grid) {
  if (grid.empty()) throw Error("decode: empty grid");
  const double lo = grid.front();
  const double hi = grid.back();
  const double clamped = std::clamp(x, lo, hi);
  const auto rounded = static_cast<int>(std::nearbyint(clamped));
  if (auto it = std::lower_bound(grid.begin(), grid.end(), rounded); it != grid.end() && *it == rounded)
    return static_cast<std::size_t>(it - grid.begin());
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - clamped) < std::abs(grid[best] - clamped)) best = i;
  return best;
}

inline int decode_exponent(double x, std::span<const int> grid) { return grid[decode_index(x, grid)]; }

inline LambdaVector decode(const Genome& g, const std::vector<std::string>& classes,
                           std::span<const int> grid) {
  if (g.exponents.size() != classes.size()) throw Error("decode: genome length != class count");
  std::vector<double> values;
  values.reserve(classes.size());
  for (double x : g.exponents) values.push_back(lambda_from_exponent(decode_exponent(x, grid)));
  return {classes, std::move(values)};
}

/// Macro-F1 of RLR_UNB(λ) on the validation set.
inline double fitness(const FrequencyModel& model, const LambdaVector& lambdas, const Dataset& validation) {
  if (validation.empty()) throw Error("fitness: validation set is empty");
  const auto preds = predict_batch(model, ClassifierSpec::rlr_unb(lambdas), validation);
  std::vector<std::string> predicted;
  predicted.reserve(preds.size());
  for (const auto& p : preds) predicted.push_back(p.predicted_label);
  const auto truth = validation.labels();
  return report(confusion(truth, predicted, model.classes())).macro_f1;
}

/// RLR_UNB log scores of every validation instance for every (class, grid
/// value), so a candidate λ vector is scored by table lookups. Entries come
/// from unb_log_score, so results match fitness() exactly.
class FitnessTable {
 public:
  FitnessTable(const FrequencyModel& model, const Dataset& validation, std::vector<int> grid)
      : classes_(model.classes()), grid_(std::move(grid)) {
    if (validation.empty()) throw Error("fitness: validation set is empty");
    const std::size_t k = classes_.size();
    const std::size_t g = grid_.size();
    truth_.reserve(validation.size());
    scores_.resize(validation.size() * k * g);
    for (std::size_t i = 0; i < validation.size(); ++i) {
      auto c_true = model.find_class(validation[i].label);
      if (!c_true) throw Error("confusion: unknown label '" + validation[i].label + "'");
      truth_.push_back(*c_true);
      const auto ids = model.encode(validation[i]);
      for (ClassId c = 0; c < k; ++c)
        for (std::size_t e = 0; e < g; ++e)
          scores_[(i * k + c) * g + e] = unb_log_score(model, ids, c, lambda_from_exponent(grid_[e]));
    }
  }

  const std::vector<int>& grid() const noexcept { return grid_; }
  std::size_t num_classes() const noexcept { return classes_.size(); }

  /// Macro-F1 for the λ vector with grid index `index[c]` for class c.
  double evaluate(std::span<const std::size_t> index) const {
    const std::size_t k = classes_.size();
    const std::size_t g = grid_.size();
    ConfusionMatrix cm(classes_);
    std::vector<double> row(k);
    ++evaluations_;
    for (std::size_t i = 0; i < truth_.size(); ++i) {
      for (ClassId c = 0; c < k; ++c) row[c] = scores_[(i * k + c) * g + index[c]];
      cm.add(truth_[i], argmax_first(row));
    }
    return report(cm).macro_f1;
  }

  LambdaVector lambdas(std::span<const std::size_t> index) const {
    std::vector<double> values;
    for (auto e : index) values.push_back(lambda_from_exponent(grid_[e]));
    return {classes_, std::move(values)};
  }

  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  std::vector<std::string> classes_;
  std::vector<int> grid_;
  std::vector<ClassId> truth_;
  std::vector<double> scores_;  // [instance][class][grid]
  mutable std::size_t evaluations_ = 0;
};

struct TuneResult {
  LambdaVector lambdas;
  std::vector<int> exponents;
  double fitness = 0.0;
  /// Best fitness after initialization, then after each generation.
  std::vector<double> history;
  /// Fitness requests issued by the search (before caching).
  std::size_t fitness_requests = 0;
  /// Distinct λ vectors actually scored.
  std::size_t fitness_evaluations = 0;
  std::string mode = "de";
};

namespace detail {

class CachedFitness {
 public:
  explicit CachedFitness(const FitnessTable& table) : table_(table) {}

  double operator()(const std::vector<std::size_t>& index) {
    ++requests_;
    auto [it, inserted] = cache_.try_emplace(index, 0.0);
    if (inserted) it->second = table_.evaluate(index);
    return it->second;
  }

  std::size_t requests() const noexcept { return requests_; }
  std::size_t distinct() const noexcept { return cache_.size(); }

 private:
  const FitnessTable& table_;
  std::map<std::vector<std::size_t>, double> cache_;
  std::size_t requests_ = 0;
};

inline TuneResult make_result(const FitnessTable& table, const std::vector<std::size_t>& best,
                              double best_fitness) {
  TuneResult r;
  r.lambdas = table.lambdas(best);
  for (auto e : best) r.exponents.push_back(table.grid()[e]);
  r.fitness = best_fitness;
  return r;
}

}  // namespace detail

/// DE/rand/1/bin with synchronous generations. Every random draw happens in
/// trial construction, so results depend only on the inputs and cfg.seed.
/// A trial replaces its target only on strictly higher fitness.
inline TuneResult tune(const FrequencyModel& model, const Dataset& validation, const TunerConfig& cfg) {
  cfg.validate();
  const auto grid = cfg.grid();
  const FitnessTable table(model, validation, grid);
  detail::CachedFitness eval(table);
  detail::Rng rng(cfg.seed);

  const std::size_t dims = model.num_classes();
  const std::size_t np = cfg.population;
  const double lo = grid.front();
  const double hi = grid.back();

  auto decode_genome = [&](const std::vector<double>& x) {
    std::vector<std::size_t> idx(dims);
    for (std::size_t j = 0; j < dims; ++j) idx[j] = decode_index(x[j], grid);
    return idx;
  };

  std::vector<std::vector<double>> pop(np, std::vector<double>(dims));
  for (auto& x : pop)
    for (auto& v : x) v = rng.uniform(lo, hi);
  std::vector<double> fit(np);
  for (std::size_t i = 0; i < np; ++i) fit[i] = eval(decode_genome(pop[i]));

  std::size_t best = 0;
  for (std::size_t i = 1; i < np; ++i)
    if (fit[i] > fit[best]) best = i;
  std::vector<std::size_t> best_index = decode_genome(pop[best]);
  double best_fit = fit[best];
  std::vector<double> history{best_fit};

  if (grid.size() > 1) {
    std::vector<std::vector<double>> trials(np, std::vector<double>(dims));
    std::vector<double> trial_fit(np);
    for (std::size_t gen = 0; gen < cfg.max_gen; ++gen) {
      for (std::size_t i = 0; i < np; ++i) {
        std::size_t a, b, c;
        do a = rng.below(np); while (a == i);
        do b = rng.below(np); while (b == i || b == a);
        do c = rng.below(np); while (c == i || c == a || c == b);
        const std::size_t forced = rng.below(dims);
        for (std::size_t j = 0; j < dims; ++j) {
          const bool cross = rng.uniform() < cfg.crossover_prob;
          if (cross || j == forced)
            trials[i][j] = std::clamp(pop[a][j] + cfg.diff_weight * (pop[b][j] - pop[c][j]), lo, hi);
          else
            trials[i][j] = pop[i][j];
        }
      }
      for (std::size_t i = 0; i < np; ++i) trial_fit[i] = eval(decode_genome(trials[i]));
      for (std::size_t i = 0; i < np; ++i) {
        if (trial_fit[i] > fit[i]) {
          pop[i] = trials[i];
          fit[i] = trial_fit[i];
          if (fit[i] > best_fit) {
            best_fit = fit[i];
            best_index = decode_genome(pop[i]);
          }
        }
      }
      history.push_back(best_fit);
    }
  }

  auto result = detail::make_result(table, best_index, best_fit);
  result.history = std::move(history);
  result.fitness_requests = eval.requests();
  result.fitness_evaluations = eval.distinct();
  result.mode = "de";
  return result;
}

/// Scores every λ vector in grid^M in lexicographic grid-index order and
/// returns the first maximum.
inline TuneResult tune_exhaustive(const FrequencyModel& model, const Dataset& validation,
                                  const std::vector<int>& theta_exponents,
                                  std::size_t max_combinations = 10'000'000) {
  TunerConfig probe;
  probe.theta_exponents = theta_exponents;
  probe.validate();
  const auto grid = probe.grid();
  const std::size_t dims = model.num_classes();
  double combos = std::pow(static_cast<double>(grid.size()), static_cast<double>(dims));
  if (combos > static_cast<double>(max_combinations))
    throw Error("exhaustive grid has " + std::to_string(combos) + " combinations (limit " +
                std::to_string(max_combinations) + ")");

  const FitnessTable table(model, validation, grid);
  std::vector<std::size_t> idx(dims, 0);
  std::vector<std::size_t> best_index = idx;
  double best_fit = -std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  for (;;) {
    const double f = table.evaluate(idx);
    ++n;
    if (f > best_fit) {
      best_fit = f;
      best_index = idx;
    }
    std::size_t j = dims;
    while (j > 0 && ++idx[j - 1] == grid.size()) idx[--j] = 0;
    if (j == 0) break;
  }
  auto result = detail::make_result(table, best_index, best_fit);
  result.history = {best_fit};
  result.fitness_requests = n;
  result.fitness_evaluations = n;
  result.mode = "grid";
  return result;
}

inline constexpr int kTuneRecordFormatVersion = 1;

inline nlohmann::json to_json(const TuneResult& r, const TunerConfig& cfg) {
  nlohmann::json lambdas = nlohmann::json::object();
  for (std::size_t c = 0; c < r.lambdas.size(); ++c)
    lambdas[r.lambdas.classes()[c]] = {{"exponent", r.exponents.at(c)}, {"value", r.lambdas.values()[c]}};
  return {{"format_version", kTuneRecordFormatVersion},
          {"kind", "tune_record"},
          {"mode", r.mode},
          {"config",
           {{"max_gen", cfg.max_gen},
            {"population", cfg.population},
            {"diff_weight", cfg.diff_weight},
            {"crossover_prob", cfg.crossover_prob},
            {"theta_exponents", cfg.grid()}}},
          {"seed", cfg.seed},
          {"classes", r.lambdas.classes()},
          {"lambdas", lambdas},
          {"fitness", r.fitness},
          {"history", r.history},
          {"fitness_requests", r.fitness_requests},
          {"fitness_evaluations", r.fitness_evaluations}};
}

struct TuneRecord {
  TunerConfig config;
  TuneResult result;
};

inline TuneRecord tune_record_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kTuneRecordFormatVersion || j.at("kind") != "tune_record")
      throw Error("not a tune record (or unsupported format_version)");
    TuneRecord rec;
    const auto& cj = j.at("config");
    rec.config.max_gen = cj.at("max_gen").get<std::size_t>();
    rec.config.population = cj.at("population").get<std::size_t>();
    rec.config.diff_weight = cj.at("diff_weight").get<double>();
    rec.config.crossover_prob = cj.at("crossover_prob").get<double>();
    rec.config.theta_exponents = cj.at("theta_exponents").get<std::vector<int>>();
    rec.config.seed = j.at("seed").get<std::uint64_t>();
    auto& r = rec.result;
    r.mode = j.at("mode").get<std::string>();
    const auto classes = j.at("classes").get<std::vector<std::string>>();
    std::vector<double> values;
    for (const auto& c : classes) {
      const auto& entry = j.at("lambdas").at(c);
      r.exponents.push_back(entry.at("exponent").get<int>());
      values.push_back(entry.at("value").get<double>());
    }
    r.lambdas = LambdaVector(classes, std::move(values));
    r.fitness = j.at("fitness").get<double>();
    r.history = j.at("history").get<std::vector<double>>();
    r.fitness_requests = j.at("fitness_requests").get<std::size_t>();
    r.fitness_evaluations = j.at("fitness_evaluations").get<std::size_t>();
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed tune record: ") + e.what());
  }
}

}  // namespace rlrnb
