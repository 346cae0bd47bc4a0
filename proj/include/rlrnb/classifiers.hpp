#pragma once

// Six naive-Bayes style scoring rules over a shared FrequencyModel, all
// evaluated in log space:
//
//   NB            ln p(c) + Σ ln p̂(w|c)
//   CNB           ln p(c) − Σ ln p̂(w|c̄)
//   CNB_NO_PRIOR          − Σ ln p̂(w|c̄)
//   NNB       −ln(1−p(c)) − Σ ln p̂(w|c̄)
//   UNB       ln p(c) − ln(1−p(c)) + Σ ln r̃(w, c; λ = 0)
//   RLR_UNB   ln p(c) − ln(1−p(c)) + Σ ln r̃(w, c; λ_c)
//
// p̂ uses Laplace smoothing with the shared training vocabulary size v; r̃ is
// lr_corrected with the complement class as denominator sample.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rlrnb/corpus.hpp"
#include "rlrnb/counts.hpp"
#include "rlrnb/error.hpp"
#include "rlrnb/lr.hpp"

namespace rlrnb {

enum class ClassifierKind { NB, CNB, CNB_NO_PRIOR, NNB, UNB, RLR_UNB };

inline constexpr ClassifierKind kAllClassifierKinds[] = {
    ClassifierKind::NB,  ClassifierKind::CNB, ClassifierKind::CNB_NO_PRIOR,
    ClassifierKind::NNB, ClassifierKind::UNB, ClassifierKind::RLR_UNB};

inline std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::NB: return "nb";
    case ClassifierKind::CNB: return "cnb";
    case ClassifierKind::CNB_NO_PRIOR: return "cnb_no_prior";
    case ClassifierKind::NNB: return "nnb";
    case ClassifierKind::UNB: return "unb";
    case ClassifierKind::RLR_UNB: return "rlr_unb";
  }
  return "?";
}

inline ClassifierKind parse_classifier_kind(std::string_view name) {
  for (auto k : kAllClassifierKinds)
    if (to_string(k) == name) return k;
  throw Error("unknown classifier kind '" + std::string(name) +
              "' (expected nb, cnb, cnb_no_prior, nnb, unb or rlr_unb)");
}

/// One regularization parameter per class, keyed by class name.
class LambdaVector {
 public:
  LambdaVector() = default;
  LambdaVector(std::vector<std::string> classes, std::vector<double> values)
      : classes_(std::move(classes)), values_(std::move(values)) {
    if (classes_.size() != values_.size()) throw Error("lambda vector: class/value count mismatch");
    for (std::size_t i = 0; i < classes_.size(); ++i) {
      (void)Lambda{values_[i]};
      for (std::size_t j = 0; j < i; ++j)
        if (classes_[j] == classes_[i]) throw Error("lambda vector: duplicate class " + classes_[i]);
    }
  }

  /// Same λ for every class of the model.
  static LambdaVector uniform(const FrequencyModel& model, double value) {
    return {model.classes(), std::vector<double>(model.num_classes(), value)};
  }

  const std::vector<std::string>& classes() const noexcept { return classes_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  double at(std::string_view cls) const {
    for (std::size_t i = 0; i < classes_.size(); ++i)
      if (classes_[i] == cls) return values_[i];
    throw Error("no lambda for class '" + std::string(cls) + "'");
  }

  /// Values reordered to the model's class ids; every model class must be covered.
  std::vector<double> aligned_to(const FrequencyModel& model) const {
    std::vector<double> out;
    out.reserve(model.num_classes());
    for (const auto& c : model.classes()) out.push_back(at(c));
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < classes_.size(); ++i) j[classes_[i]] = values_[i];
    return j;
  }

  /// Accepts `{class: value}` or `{class: {"value": v, ...}}`.
  static LambdaVector from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error("lambdas must be a JSON object");
    std::vector<std::string> names;
    std::vector<double> values;
    for (auto it = j.begin(); it != j.end(); ++it) {
      names.push_back(it.key());
      if (it->is_number())
        values.push_back(it->get<double>());
      else if (it->is_object() && it->contains("value") && it->at("value").is_number())
        values.push_back(it->at("value").get<double>());
      else
        throw Error("lambda for class '" + it.key() + "' is not a number");
    }
    return {std::move(names), std::move(values)};
  }

  friend bool operator==(const LambdaVector&, const LambdaVector&) = default;

 private:
  std::vector<std::string> classes_;
  std::vector<double> values_;
};

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::NB;
  std::optional<LambdaVector> lambdas;

  static ClassifierSpec of(ClassifierKind kind) { return {kind, std::nullopt}; }
  static ClassifierSpec rlr_unb(LambdaVector lambdas) {
    return {ClassifierKind::RLR_UNB, std::move(lambdas)};
  }

  void validate(const FrequencyModel& model) const {
    if (kind == ClassifierKind::RLR_UNB) {
      if (!lambdas) throw Error("rlr_unb requires per-class lambdas");
      lambdas->aligned_to(model);
    } else if (lambdas) {
      throw Error("lambdas are only valid for rlr_unb");
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"kind", to_string(kind)}};
    if (lambdas) j["lambdas"] = lambdas->to_json();
    return j;
  }

  static ClassifierSpec from_json(const nlohmann::json& j) {
    try {
      ClassifierSpec s{parse_classifier_kind(j.at("kind").get<std::string>()), std::nullopt};
      if (j.contains("lambdas")) s.lambdas = LambdaVector::from_json(j.at("lambdas"));
      if ((s.kind == ClassifierKind::RLR_UNB) != s.lambdas.has_value())
        throw Error("lambdas must be present exactly when kind is rlr_unb");
      return s;
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("malformed classifier spec: ") + e.what());
    }
  }
};

struct ScoredPrediction {
  ClassId predicted = 0;
  std::string predicted_label;
  /// Indexed by model class id.
  std::vector<double> log_scores;
};

namespace detail {

// ln p(c) − ln p(c̄) with p(c̄) taken from the complement instance count.
inline double log_prior_odds(const FrequencyModel& m, ClassId c) {
  const double n = static_cast<double>(m.total_instances());
  const double p = static_cast<double>(m.class_instance_count(c)) / n;
  const double p_bar = static_cast<double>(m.total_instances() - m.class_instance_count(c)) / n;
  return std::log(p) - std::log(p_bar);
}

inline double log_complement_prior(const FrequencyModel& m, ClassId c) {
  const double n = static_cast<double>(m.total_instances());
  return std::log(static_cast<double>(m.total_instances() - m.class_instance_count(c)) / n);
}

inline double laplace(std::uint64_t f, std::uint64_t n, std::size_t v) {
  return (static_cast<double>(f) + 1.0) / (static_cast<double>(n) + static_cast<double>(v));
}

// −Σ ln p̂(w|c̄)
inline double negated_complement_loglik(const FrequencyModel& m, std::span<const TokenId> y,
                                        ClassId c) {
  double sum = 0.0;
  for (TokenId w : y) {
    const auto cs = m.complement(w, c);
    sum -= std::log(laplace(cs.token_count, cs.token_total, m.vocab_size()));
  }
  return sum;
}

}  // namespace detail

/// Log score of the regularized universal-set rule for class c with the given
/// λ (λ = 0 is plain UNB). Shared by Classifier and the tuner.
inline double unb_log_score(const FrequencyModel& m, std::span<const TokenId> y, ClassId c,
                            double lambda) {
  const std::uint64_t n_c = m.class_token_total(c);
  const std::uint64_t n_bar = m.total_tokens() - n_c;
  double sum = 0.0;
  for (TokenId w : y) {
    const std::uint64_t f_c = m.count(w, c);
    const std::uint64_t f_bar = m.global_count(w) - f_c;
    sum += std::log(regularized_quotient(corrected_probability(f_bar, n_bar),
                                         corrected_probability(f_c, n_c), lambda));
  }
  return detail::log_prior_odds(m, c) + sum;
}

/// Index of the first maximal score.
inline ClassId argmax_first(std::span<const double> scores) {
  ClassId best = 0;
  for (ClassId c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return best;
}

/// A scoring rule bound to a fitted model. The model must outlive it.
class Classifier {
 public:
  Classifier(const FrequencyModel& model, ClassifierSpec spec)
      : model_(&model), spec_(std::move(spec)) {
    spec_.validate(model);
    if (spec_.kind == ClassifierKind::RLR_UNB) lambdas_ = spec_.lambdas->aligned_to(model);
  }

  const FrequencyModel& model() const noexcept { return *model_; }
  const ClassifierSpec& spec() const noexcept { return spec_; }

  double log_score(std::span<const TokenId> y, ClassId c) const {
    const auto& m = *model_;
    if (c >= m.num_classes()) throw Error("class index out of range");
    switch (spec_.kind) {
      case ClassifierKind::NB: {
        double sum = 0.0;
        for (TokenId w : y)
          sum += std::log(detail::laplace(m.count(w, c), m.class_token_total(c), m.vocab_size()));
        return std::log(m.prior(c)) + sum;
      }
      case ClassifierKind::CNB:
        return std::log(m.prior(c)) + detail::negated_complement_loglik(m, y, c);
      case ClassifierKind::CNB_NO_PRIOR:
        return detail::negated_complement_loglik(m, y, c);
      case ClassifierKind::NNB:
        return -detail::log_complement_prior(m, c) + detail::negated_complement_loglik(m, y, c);
      case ClassifierKind::UNB:
        return unb_log_score(m, y, c, 0.0);
      case ClassifierKind::RLR_UNB:
        return unb_log_score(m, y, c, lambdas_[c]);
    }
    throw Error("invalid classifier kind");
  }

  double log_score(const Instance& y, std::string_view cls) const {
    return log_score(model_->encode(y), model_->class_index(cls));
  }

  ScoredPrediction classify(std::span<const TokenId> y) const {
    ScoredPrediction out;
    out.log_scores.resize(model_->num_classes());
    for (ClassId c = 0; c < model_->num_classes(); ++c) out.log_scores[c] = log_score(y, c);
    out.predicted = argmax_first(out.log_scores);
    out.predicted_label = model_->class_name(out.predicted);
    return out;
  }

  ScoredPrediction classify(const Instance& y) const { return classify(model_->encode(y)); }

  std::vector<ScoredPrediction> predict_batch(const Dataset& data) const {
    std::vector<ScoredPrediction> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      try {
        out.push_back(classify(data[i]));
      } catch (const Error& e) {
        throw Error("instance " + std::to_string(i) + ": " + e.what());
      }
    }
    return out;
  }

 private:
  const FrequencyModel* model_;
  ClassifierSpec spec_;
  std::vector<double> lambdas_;
};

inline double log_score(const FrequencyModel& model, const ClassifierSpec& spec, const Instance& y,
                        std::string_view cls) {
  return Classifier(model, spec).log_score(y, cls);
}

inline ScoredPrediction classify(const FrequencyModel& model, const ClassifierSpec& spec,
                                 const Instance& y) {
  return Classifier(model, spec).classify(y);
}

inline std::vector<ScoredPrediction> predict_batch(const FrequencyModel& model,
                                                   const ClassifierSpec& spec,
                                                   const Dataset& data) {
  return Classifier(model, spec).predict_batch(data);
}

}  // namespace rlrnb
