#pragma once

// Sufficient statistics shared by every classifier: per-class token
// frequencies f(w,c), per-class token totals n_c, per-class instance counts
// N_c and the training vocabulary. Complement-class statistics are derived on
// demand as (global - class).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rlrnb/corpus.hpp"
#include "rlrnb/error.hpp"

namespace rlrnb {

using ClassId = std::size_t;
using TokenId = std::size_t;

/// Token id used for tokens absent from the training vocabulary.
inline constexpr TokenId kUnseenToken = static_cast<TokenId>(-1);

struct ComplementStats {
  std::uint64_t token_count = 0;  ///< f(w, c̄)
  std::uint64_t token_total = 0;  ///< n_c̄

  friend bool operator==(const ComplementStats&, const ComplementStats&) = default;
};

inline constexpr int kModelFormatVersion = 1;

class FrequencyModel {
 public:
  FrequencyModel() = default;

  /// Counts every token occurrence of `train`. Requires at least two classes.
  static FrequencyModel fit(const Dataset& train) {
    if (train.classes().size() < 2)
      throw Error("training data has fewer than 2 classes (found " +
                  std::to_string(train.classes().size()) + ")");
    FrequencyModel m;
    for (const auto& c : train.classes()) m.add_class(c);
    for (const auto& inst : train) {
      const ClassId c = m.class_lookup_.at(inst.label);
      ++m.instance_counts_[c];
      for (const auto& tok : inst.tokens) m.increment(m.intern(tok), c, 1);
    }
    m.finish();
    return m;
  }

  std::size_t num_classes() const noexcept { return classes_.size(); }
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  const std::string& class_name(ClassId c) const { return classes_.at(c); }

  std::optional<ClassId> find_class(std::string_view name) const {
    auto it = class_lookup_.find(std::string(name));
    if (it == class_lookup_.end()) return std::nullopt;
    return it->second;
  }

  ClassId class_index(std::string_view name) const {
    auto c = find_class(name);
    if (!c) throw Error("unknown class '" + std::string(name) + "'");
    return *c;
  }

  /// v: number of distinct token types seen in training.
  std::size_t vocab_size() const noexcept { return vocab_.size(); }
  const std::vector<std::string>& vocab() const noexcept { return vocab_; }

  TokenId token_id(std::string_view token) const {
    auto it = vocab_lookup_.find(std::string(token));
    return it == vocab_lookup_.end() ? kUnseenToken : it->second;
  }

  std::vector<TokenId> encode(const Instance& inst) const {
    std::vector<TokenId> ids;
    ids.reserve(inst.tokens.size());
    for (const auto& tok : inst.tokens) ids.push_back(token_id(tok));
    return ids;
  }

  /// f(w, c); zero for unseen tokens.
  std::uint64_t count(TokenId w, ClassId c) const {
    check_class(c);
    if (w == kUnseenToken) return 0;
    return counts_.at(w * classes_.size() + c);
  }
  std::uint64_t count(std::string_view token, std::string_view cls) const {
    return count(token_id(token), class_index(cls));
  }

  /// Σ_c f(w, c)
  std::uint64_t global_count(TokenId w) const {
    return w == kUnseenToken ? 0 : global_counts_.at(w);
  }

  /// n_c
  std::uint64_t class_token_total(ClassId c) const { return token_totals_.at(c); }
  std::uint64_t total_tokens() const noexcept { return total_tokens_; }
  /// N_c
  std::uint64_t class_instance_count(ClassId c) const { return instance_counts_.at(c); }
  std::uint64_t total_instances() const noexcept { return total_instances_; }

  ComplementStats complement(TokenId w, ClassId c) const {
    return {global_count(w) - count(w, c), total_tokens_ - token_totals_.at(c)};
  }

  /// p(c) = N_c / N from instance counts.
  double prior(ClassId c) const {
    check_class(c);
    return static_cast<double>(instance_counts_[c]) / static_cast<double>(total_instances_);
  }

  nlohmann::json to_json() const {
    nlohmann::json counts = nlohmann::json::object();
    nlohmann::json totals = nlohmann::json::object();
    nlohmann::json instances = nlohmann::json::object();
    for (ClassId c = 0; c < classes_.size(); ++c) {
      std::map<std::string, std::uint64_t> row;
      for (TokenId w = 0; w < vocab_.size(); ++w)
        if (auto f = counts_[w * classes_.size() + c]; f > 0) row.emplace(vocab_[w], f);
      counts[classes_[c]] = row;
      totals[classes_[c]] = token_totals_[c];
      instances[classes_[c]] = instance_counts_[c];
    }
    return {{"format_version", kModelFormatVersion},
            {"kind", "frequency_model"},
            {"classes", classes_},
            {"vocab", vocab_},
            {"token_counts", counts},
            {"class_token_totals", totals},
            {"class_instance_counts", instances}};
  }

  /// Inverse of to_json; re-checks every model invariant.
  static FrequencyModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("format_version").get<int>() != kModelFormatVersion)
        throw Error("unsupported model format_version");
      if (j.value("kind", "") != "frequency_model") throw Error("document is not a frequency model");
      FrequencyModel m;
      for (const auto& c : j.at("classes").get<std::vector<std::string>>()) m.add_class(c);
      if (m.classes_.size() < 2) throw Error("model has fewer than 2 classes");
      for (const auto& w : j.at("vocab").get<std::vector<std::string>>()) {
        if (m.vocab_lookup_.count(w)) throw Error("duplicate vocab entry '" + w + "'");
        m.intern(w);
      }
      for (auto it = j.at("token_counts").begin(); it != j.at("token_counts").end(); ++it) {
        const ClassId c = m.class_index(it.key());
        for (auto jt = it->begin(); jt != it->end(); ++jt) {
          const TokenId w = m.token_id(jt.key());
          if (w == kUnseenToken) throw Error("token '" + jt.key() + "' missing from vocab");
          m.increment(w, c, jt->get<std::uint64_t>());
        }
      }
      for (ClassId c = 0; c < m.classes_.size(); ++c) {
        const auto& name = m.classes_[c];
        if (j.at("class_token_totals").at(name).get<std::uint64_t>() != m.token_totals_[c])
          throw Error("class_token_totals inconsistent with token_counts for '" + name + "'");
        m.instance_counts_[c] = j.at("class_instance_counts").at(name).get<std::uint64_t>();
        if (m.instance_counts_[c] == 0) throw Error("class '" + name + "' has no instances");
      }
      for (TokenId w = 0; w < m.vocab_.size(); ++w)
        if (m.global_counts_[w] == 0) throw Error("vocab token '" + m.vocab_[w] + "' has zero count");
      m.finish();
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("malformed model JSON: ") + e.what());
    }
  }

  /// Equality of the statistics, independent of class order and token ids.
  friend bool operator==(const FrequencyModel& a, const FrequencyModel& b) {
    if (a.num_classes() != b.num_classes() || a.vocab_size() != b.vocab_size()) return false;
    for (ClassId ca = 0; ca < a.num_classes(); ++ca) {
      auto cb = b.find_class(a.classes_[ca]);
      if (!cb) return false;
      if (a.instance_counts_[ca] != b.instance_counts_[*cb] ||
          a.token_totals_[ca] != b.token_totals_[*cb])
        return false;
      for (TokenId w = 0; w < a.vocab_size(); ++w)
        if (a.count(w, ca) != b.count(b.token_id(a.vocab_[w]), *cb)) return false;
    }
    return true;
  }

 private:
  void add_class(const std::string& name) {
    if (!class_lookup_.emplace(name, classes_.size()).second)
      throw Error("duplicate class '" + name + "'");
    classes_.push_back(name);
    token_totals_.push_back(0);
    instance_counts_.push_back(0);
    counts_.assign(vocab_.size() * classes_.size(), 0);  // classes are registered before tokens
  }

  TokenId intern(const std::string& token) {
    auto [it, inserted] = vocab_lookup_.emplace(token, vocab_.size());
    if (inserted) {
      vocab_.push_back(token);
      global_counts_.push_back(0);
      counts_.resize(counts_.size() + classes_.size(), 0);
    }
    return it->second;
  }

  void increment(TokenId w, ClassId c, std::uint64_t by) {
    counts_[w * classes_.size() + c] += by;
    global_counts_[w] += by;
    token_totals_[c] += by;
  }

  void finish() {
    total_tokens_ = 0;
    total_instances_ = 0;
    for (auto n : token_totals_) total_tokens_ += n;
    for (auto n : instance_counts_) total_instances_ += n;
  }

  void check_class(ClassId c) const {
    if (c >= classes_.size()) throw Error("class index out of range: " + std::to_string(c));
  }

  std::vector<std::string> classes_;
  std::unordered_map<std::string, ClassId> class_lookup_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> vocab_lookup_;
  std::vector<std::uint64_t> counts_;  // row-major [token][class]
  std::vector<std::uint64_t> global_counts_;
  std::vector<std::uint64_t> token_totals_;
  std::vector<std::uint64_t> instance_counts_;
  std::uint64_t total_tokens_ = 0;
  std::uint64_t total_instances_ = 0;
};

inline FrequencyModel fit_counts(const Dataset& train) { return FrequencyModel::fit(train); }

/// (f(w,c̄), n_c̄). Unknown tokens yield f = 0; unknown classes throw.
inline ComplementStats complement_stats(const FrequencyModel& model, std::string_view token,
                                        std::string_view cls) {
  return model.complement(model.token_id(token), model.class_index(cls));
}

inline double prior(const FrequencyModel& model, std::string_view cls) {
  return model.prior(model.class_index(cls));
}

}  // namespace rlrnb
