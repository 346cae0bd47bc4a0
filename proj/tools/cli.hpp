#pragma once

// Command-line front end. `run` takes the argument list (without the program
// name) and the two output streams so the commands can be driven from tests.

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rlrnb/rlrnb.hpp"

namespace rlrnb::cli {

namespace detail {

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path + ": invalid JSON: " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) parts.push_back(cur);
  return parts;
}

template <typename T>
T parse_number(const std::string& s, const std::string& what) {
  T v{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t pos = 0;
      v = static_cast<T>(std::stod(s, &pos));
      if (pos != s.size()) throw Error("");
    } catch (...) {
      throw Error("invalid " + what + ": '" + s + "'");
    }
  } else {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("invalid " + what + ": '" + s + "'");
  }
  return v;
}

/// "-9:-1" (inclusive range) or "-5,-3,-1".
inline std::vector<int> parse_theta(const std::string& s) {
  if (auto colon = s.find(':', 1); colon != std::string::npos) {
    const int a = parse_number<int>(s.substr(0, colon), "theta bound");
    const int b = parse_number<int>(s.substr(colon + 1), "theta bound");
    if (a > b) throw Error("theta range is empty: " + s);
    std::vector<int> g;
    for (int e = a; e <= b; ++e) g.push_back(e);
    return g;
  }
  std::vector<int> g;
  for (const auto& p : split(s, ',')) g.push_back(parse_number<int>(p, "theta exponent"));
  if (g.empty()) throw Error("theta grid is empty");
  return g;
}

inline ClassifierSpec load_spec(const FrequencyModel& model, const std::string& kind_name,
                                const std::string& lambdas_path) {
  const auto kind = parse_classifier_kind(kind_name);
  if (kind != ClassifierKind::RLR_UNB) {
    if (!lambdas_path.empty()) throw Error("--lambdas is only valid with --classifier rlr_unb");
    return ClassifierSpec::of(kind);
  }
  const auto j = read_json(lambdas_path);
  // Either a tune record or a bare classifier spec.
  auto spec = j.contains("kind") && j.at("kind") == "tune_record"
                  ? ClassifierSpec::rlr_unb(LambdaVector::from_json(j.at("lambdas")))
                  : ClassifierSpec::from_json(j);
  spec.validate(model);
  return spec;
}

struct UsageError : Error {
  using Error::Error;
};

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Naive Bayes family text classifiers with regularized likelihood-ratio tuning", "rlrnb"};
  app.require_subcommand(1);

  std::string format = "table";
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format for stdout")
        ->check(CLI::IsMember({"json", "table"}));
  };

  // train
  std::string train_path, model_out;
  auto* train = app.add_subcommand("train", "Fit frequency counts from a TSV dataset");
  train->add_option("train", train_path, "Training TSV")->required();
  train->add_option("--out", model_out, "Model JSON to write")->required();
  add_format(train);

  // tune
  std::string model_path, valid_path, tune_out, theta = "-9:-1";
  TunerConfig tcfg;
  bool grid_mode = false;
  auto* tune_cmd = app.add_subcommand("tune", "Tune per-class lambdas for rlr_unb on a validation set");
  tune_cmd->add_option("model", model_path, "Model JSON")->required();
  tune_cmd->add_option("validation", valid_path, "Validation TSV")->required();
  tune_cmd->add_option("--out", tune_out, "Tune record JSON to write")->required();
  tune_cmd->add_option("--max-gen", tcfg.max_gen, "Generations")->capture_default_str();
  tune_cmd->add_option("--population", tcfg.population, "Population size")->capture_default_str();
  tune_cmd->add_option("--diff-weight", tcfg.diff_weight, "Differential weight F")->capture_default_str();
  tune_cmd->add_option("--crossover", tcfg.crossover_prob, "Crossover probability CR")->capture_default_str();
  tune_cmd->add_option("--theta", theta, "Exponent grid: 'lo:hi' or comma list (use --theta=...)")
      ->capture_default_str();
  tune_cmd->add_option("--seed", tcfg.seed, "RNG seed")->capture_default_str();
  tune_cmd->add_flag("--grid", grid_mode, "Exhaustive grid search instead of DE");
  add_format(tune_cmd);

  // eval / predict
  std::string data_path, kind_name, lambdas_path, report_out;
  auto add_classifier_opts = [&](CLI::App* sub) {
    sub->add_option("model", model_path, "Model JSON")->required();
    sub->add_option("data", data_path, "Dataset TSV")->required();
    sub->add_option("--classifier", kind_name, "nb|cnb|cnb_no_prior|nnb|unb|rlr_unb")->required();
    sub->add_option("--lambdas", lambdas_path, "Tune record or classifier spec JSON (rlr_unb)");
  };
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a classifier on labeled data");
  add_classifier_opts(eval_cmd);
  eval_cmd->add_option("--out", report_out, "Report JSON to write");
  add_format(eval_cmd);

  std::string predict_out;
  auto* predict_cmd = app.add_subcommand("predict", "Print predicted class and per-class log scores");
  add_classifier_opts(predict_cmd);
  predict_cmd->add_option("--out", predict_out, "Write predictions here instead of stdout");

  // synth
  std::string sizes, signal = "0.3", synth_out;
  SyntheticSpec sspec;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
  synth->add_option("--sizes", sizes, "Class sizes, e.g. A=900,B=10")->required();
  synth->add_option("--vocab", sspec.vocab_size, "Vocabulary size")->capture_default_str();
  synth->add_option("--length", sspec.tokens_per_instance, "Tokens per instance")->capture_default_str();
  synth->add_option("--signal", signal, "Class signal: one value or A=0.3,B=0.1")->capture_default_str();
  synth->add_option("--block", sspec.block_size, "Preferred-block width (0 = vocab/classes)")
      ->capture_default_str();
  synth->add_option("--seed", sspec.seed, "RNG seed")->capture_default_str();
  synth->add_option("--out", synth_out, "TSV to write (default stdout)");

  // lr
  std::vector<std::uint64_t> freqs;
  double lambda = 0.0;
  std::string estimator = "corrected";
  auto* lr = app.add_subcommand("lr", "Evaluate a likelihood-ratio estimator: f_de n_de f_nu n_nu");
  lr->add_option("counts", freqs, "f_de n_de f_nu n_nu")->required()->expected(4);
  lr->add_option("--lambda", lambda, "Regularization parameter")->capture_default_str();
  lr->add_option("--estimator", estimator, "mle|regularized|corrected")
      ->check(CLI::IsMember({"mle", "regularized", "corrected"}))
      ->capture_default_str();

  std::vector<std::string> storage{"rlrnb"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train) {
      const auto data = load_tsv(train_path);
      const auto model = fit_counts(data);
      detail::write_text(model_out, model.to_json().dump(1) + "\n");
      if (format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (ClassId c = 0; c < model.num_classes(); ++c)
          j.push_back({{"class", model.class_name(c)},
                       {"instances", model.class_instance_count(c)},
                       {"tokens", model.class_token_total(c)}});
        out << j.dump(2) << '\n';
      } else {
        out << std::left << std::setw(16) << "class" << std::right << std::setw(12) << "instances"
            << std::setw(12) << "tokens" << '\n';
        for (ClassId c = 0; c < model.num_classes(); ++c)
          out << std::left << std::setw(16) << model.class_name(c) << std::right << std::setw(12)
              << model.class_instance_count(c) << std::setw(12) << model.class_token_total(c) << '\n';
        out << "vocabulary: " << model.vocab_size() << '\n';
      }
    } else if (*tune_cmd) {
      const auto model = FrequencyModel::from_json(detail::read_json(model_path));
      const auto valid = load_tsv(valid_path);
      tcfg.theta_exponents = detail::parse_theta(theta);
      const auto result = grid_mode ? tune_exhaustive(model, valid, tcfg.theta_exponents)
                                    : tune(model, valid, tcfg);
      const auto record = to_json(result, tcfg);
      detail::write_text(tune_out, record.dump(2) + "\n");
      if (format == "json") {
        out << record.dump(2) << '\n';
      } else {
        out << std::left << std::setw(16) << "class" << std::right << std::setw(10) << "lambda" << '\n';
        for (std::size_t c = 0; c < result.lambdas.size(); ++c)
          out << std::left << std::setw(16) << result.lambdas.classes()[c] << std::right << std::setw(10)
              << ("1e" + std::to_string(result.exponents[c])) << '\n';
        out << "validation macro-F1: " << std::fixed << std::setprecision(3) << result.fitness << '\n';
      }
    } else if (*eval_cmd || *predict_cmd) {
      const auto model = FrequencyModel::from_json(detail::read_json(model_path));
      const auto kind = parse_classifier_kind(kind_name);
      if (kind == ClassifierKind::RLR_UNB && lambdas_path.empty())
        throw detail::UsageError("--classifier rlr_unb requires --lambdas");
      const Classifier clf(model, detail::load_spec(model, kind_name, lambdas_path));
      if (*eval_cmd) {
        const auto data = load_tsv(data_path);
        const auto preds = clf.predict_batch(data);
        std::vector<std::string> predicted;
        for (const auto& p : preds) predicted.push_back(p.predicted_label);
        const auto truth = data.labels();
        const auto rep = report(confusion(truth, predicted, model.classes()));
        auto j = to_json(rep);
        j["classifier"] = clf.spec().to_json();
        if (!report_out.empty()) detail::write_text(report_out, j.dump(2) + "\n");
        if (format == "json")
          out << j.dump(2) << '\n';
        else
          out << "classifier: " << to_string(kind) << '\n' << format_table(rep);
      } else {
        const auto data = load_tsv(data_path, {.allow_empty = true});
        std::ostringstream os;
        os << std::setprecision(17);
        for (const auto& p : clf.predict_batch(data)) {
          os << p.predicted_label;
          for (ClassId c = 0; c < model.num_classes(); ++c)
            os << '\t' << model.class_name(c) << '=' << p.log_scores[c];
          os << '\n';
        }
        if (predict_out.empty())
          out << os.str();
        else
          detail::write_text(predict_out, os.str());
      }
    } else if (*synth) {
      for (const auto& item : detail::split(sizes, ',')) {
        const auto eq = item.rfind('=');
        if (eq == std::string::npos) throw Error("--sizes entries must be NAME=COUNT: '" + item + "'");
        sspec.class_sizes.emplace_back(item.substr(0, eq),
                                       detail::parse_number<std::size_t>(item.substr(eq + 1), "class size"));
      }
      if (signal.find('=') == std::string::npos) {
        sspec.class_signal.assign(sspec.class_sizes.size(), detail::parse_number<double>(signal, "signal"));
      } else {
        std::map<std::string, double> per;
        for (const auto& item : detail::split(signal, ',')) {
          const auto eq = item.rfind('=');
          if (eq == std::string::npos) throw Error("--signal entries must be NAME=VALUE: '" + item + "'");
          per[item.substr(0, eq)] = detail::parse_number<double>(item.substr(eq + 1), "signal");
        }
        for (const auto& [name, n] : sspec.class_sizes) {
          auto it = per.find(name);
          if (it == per.end()) throw Error("--signal has no value for class '" + name + "'");
          sspec.class_signal.push_back(it->second);
        }
      }
      const auto data = generate_synthetic(sspec);
      if (synth_out.empty())
        write_tsv(out, data);
      else
        save_tsv(synth_out, data);
    } else if (*lr) {
      const FreqPair p{freqs[0], freqs[1], freqs[2], freqs[3]};
      const Lambda lam{lambda};
      const double r = estimator == "mle"           ? lr_mle(p)
                       : estimator == "regularized" ? lr_regularized(p, lam)
                                                    : lr_corrected(p, lam);
      out << std::setprecision(12) << r << '\n';
    }
  } catch (const detail::UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace rlrnb::cli
