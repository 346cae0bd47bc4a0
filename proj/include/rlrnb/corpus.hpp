#pragma once

// Labeled token-sequence datasets: TSV loading/saving and a seeded synthetic
// generator for imbalanced multi-class problems.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rlrnb/detail/random.hpp"
#include "rlrnb/error.hpp"

namespace rlrnb {

struct Instance {
  std::string label;
  std::vector<std::string> tokens;

  friend bool operator==(const Instance&, const Instance&) = default;
};

namespace detail {

inline bool has_control_break(std::string_view s) {
  return s.find_first_of("\t\n\r") != std::string_view::npos;
}

inline void validate_instance(const Instance& inst) {
  if (inst.label.empty()) throw Error("instance has an empty label");
  if (has_control_break(inst.label))
    throw Error("label contains a tab or newline: '" + inst.label + "'");
  if (inst.tokens.empty()) throw Error("instance of class '" + inst.label + "' has no tokens");
  for (const auto& tok : inst.tokens) {
    if (tok.empty()) throw Error("instance of class '" + inst.label + "' has an empty token");
    if (has_control_break(tok) || tok.find(' ') != std::string::npos)
      throw Error("token contains whitespace: '" + tok + "'");
  }
}

}  // namespace detail

/// Immutable collection of instances. `classes()` lists the distinct labels in
/// first-appearance order; every downstream ordering derives from it.
class Dataset {
 public:
  Dataset() = default;

  explicit Dataset(std::vector<Instance> instances) : instances_(std::move(instances)) {
    std::unordered_map<std::string, bool> seen;
    for (const auto& inst : instances_) {
      detail::validate_instance(inst);
      if (seen.emplace(inst.label, true).second) classes_.push_back(inst.label);
    }
  }

  const std::vector<Instance>& instances() const noexcept { return instances_; }
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }
  const Instance& operator[](std::size_t i) const { return instances_[i]; }

  auto begin() const noexcept { return instances_.begin(); }
  auto end() const noexcept { return instances_.end(); }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(instances_.size());
    for (const auto& inst : instances_) out.push_back(inst.label);
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<Instance> instances_;
  std::vector<std::string> classes_;
};

struct TsvOptions {
  /// When false, a source without any instance is an error.
  bool allow_empty = false;
  /// Used in diagnostics.
  std::string source = "<stream>";
};

/// Parses `label<TAB>tok1 tok2 ...` lines. Blank lines are skipped.
inline Dataset read_tsv(std::istream& in, const TsvOptions& opts = {}) {
  std::vector<Instance> instances;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(opts.source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    const auto tab = line.find('\t');
    if (tab == std::string::npos) fail("missing tab between label and tokens");
    Instance inst;
    inst.label = line.substr(0, tab);
    if (inst.label.empty()) fail("empty label");
    std::istringstream toks(line.substr(tab + 1));
    std::string tok;
    while (toks >> tok) {
      if (tok.find('\t') != std::string::npos) fail("token contains a tab");
      inst.tokens.push_back(std::move(tok));
    }
    if (inst.tokens.empty()) fail("empty token list");
    instances.push_back(std::move(inst));
  }
  if (instances.empty() && !opts.allow_empty) throw Error(opts.source + ": no instances");
  return Dataset(std::move(instances));
}

inline Dataset load_tsv(const std::filesystem::path& path, TsvOptions opts = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file: " + path.string());
  opts.source = path.string();
  return read_tsv(in, opts);
}

inline void write_tsv(std::ostream& out, const Dataset& data) {
  for (const auto& inst : data) {
    out << inst.label << '\t';
    for (std::size_t k = 0; k < inst.tokens.size(); ++k) {
      if (k) out << ' ';
      out << inst.tokens[k];
    }
    out << '\n';
  }
}

inline void save_tsv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset file: " + path.string());
  write_tsv(out, data);
}

/// Parameters of the synthetic generator.
///
/// Each token of an instance of class c is drawn from the class's preferred
/// block with probability class_signal[c], otherwise uniformly from the whole
/// vocabulary. Class i (in class_sizes order) prefers the tokens
/// [i * block, (i + 1) * block) modulo vocab_size. Tokens are named `w<id>`.
struct SyntheticSpec {
  std::vector<std::pair<std::string, std::size_t>> class_sizes;
  std::size_t vocab_size = 1000;
  std::size_t tokens_per_instance = 10;
  std::vector<double> class_signal;
  /// Preferred-block width; 0 means vocab_size / number of classes.
  std::size_t block_size = 0;
  std::uint64_t seed = 0;

  std::size_t effective_block_size() const {
    if (block_size != 0) return block_size;
    return std::max<std::size_t>(1, vocab_size / std::max<std::size_t>(1, class_sizes.size()));
  }

  void validate() const {
    if (class_sizes.empty()) throw Error("synthetic spec: no classes");
    if (vocab_size == 0) throw Error("synthetic spec: vocab_size must be positive");
    if (tokens_per_instance == 0) throw Error("synthetic spec: tokens_per_instance must be positive");
    if (class_signal.size() != class_sizes.size())
      throw Error("synthetic spec: class_signal must have one entry per class");
    if (block_size > vocab_size) throw Error("synthetic spec: block_size exceeds vocab_size");
    std::unordered_map<std::string, bool> seen;
    for (std::size_t i = 0; i < class_sizes.size(); ++i) {
      const auto& [name, n] = class_sizes[i];
      if (name.empty() || detail::has_control_break(name) || name.find(' ') != std::string::npos)
        throw Error("synthetic spec: invalid class name '" + name + "'");
      if (!seen.emplace(name, true).second)
        throw Error("synthetic spec: duplicate class '" + name + "'");
      if (n == 0) throw Error("synthetic spec: class '" + name + "' has zero instances");
      const double s = class_signal[i];
      if (!(s >= 0.0 && s <= 1.0)) throw Error("synthetic spec: class_signal must lie in [0,1]");
    }
  }
};

inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  detail::Rng rng(spec.seed);
  const std::size_t block = spec.effective_block_size();
  std::vector<Instance> out;
  for (std::size_t ci = 0; ci < spec.class_sizes.size(); ++ci) {
    const auto& [name, count] = spec.class_sizes[ci];
    const std::size_t block_start = (ci * block) % spec.vocab_size;
    for (std::size_t i = 0; i < count; ++i) {
      Instance inst;
      inst.label = name;
      inst.tokens.reserve(spec.tokens_per_instance);
      for (std::size_t k = 0; k < spec.tokens_per_instance; ++k) {
        std::uint64_t id;
        if (rng.uniform() < spec.class_signal[ci])
          id = (block_start + rng.below(block)) % spec.vocab_size;
        else
          id = rng.below(spec.vocab_size);
        inst.tokens.push_back("w" + std::to_string(id));
      }
      out.push_back(std::move(inst));
    }
  }
  return Dataset(std::move(out));
}

}  // namespace rlrnb
