#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "cli.hpp"
#include "test_support.hpp"

using namespace rlrnb;
using rlrnb::testing::read_file;
using rlrnb::testing::TempDir;
using rlrnb::testing::write_file;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string l;
  while (std::getline(is, l)) out.push_back(l);
  return out;
}

// Small imbalanced 3-class problem written as train/validation/eval TSVs.
struct Splits {
  TempDir dir;
  std::string train, valid, eval, model;
  Splits() {
    train = (dir / "train.tsv").string();
    valid = (dir / "valid.tsv").string();
    eval = (dir / "eval.tsv").string();
    model = (dir / "model.json").string();
    for (auto [path, scale, seed] : {std::tuple{train, 4, 1}, std::tuple{valid, 1, 2}, std::tuple{eval, 1, 3}}) {
      const auto r = run({"synth", "--sizes", "big=" + std::to_string(400 * scale) + ",mid=" +
                                                   std::to_string(150 * scale) + ",tiny=" + std::to_string(6 * scale),
                            "--vocab", "2000", "--length", "10", "--signal", "0.3", "--block", "60", "--seed",
                            std::to_string(seed), "--out", path});
      EXPECT_EQ(r.code, 0) << r.err;
    }
    EXPECT_EQ(run({"train", train, "--out", model}).code, 0);
  }
};

}  // namespace

TEST(CliTrain, WritesModelWithMatchingCounts) {
  TempDir dir;
  write_file(dir / "t.tsv", "A\tx x\nB\ty\nA\tx y\n");
  const auto r = run({"train", (dir / "t.tsv").string(), "--out", (dir / "m.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = FrequencyModel::from_json(nlohmann::json::parse(read_file(dir / "m.json")));
  EXPECT_EQ(m.count("x", "A"), 3u);
  EXPECT_EQ(m.class_instance_count(m.class_index("A")), 2u);
  EXPECT_NE(r.out.find("instances"), std::string::npos);
  EXPECT_TRUE(r.err.empty());
}

TEST(CliTrain, SingleClassFails) {
  TempDir dir;
  write_file(dir / "t.tsv", "A\tx\nA\ty\n");
  const auto r = run({"train", (dir / "t.tsv").string(), "--out", (dir / "m.json").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("fewer than 2 classes"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(CliTrain, ByteIdenticalRerun) {
  Splits s;
  const auto first = read_file(s.model);
  ASSERT_EQ(run({"train", s.train, "--out", s.model}).code, 0);
  EXPECT_EQ(read_file(s.model), first);
}

TEST(CliTrain, MalformedInputNamesLine) {
  TempDir dir;
  write_file(dir / "t.tsv", "A\tx\nB\n");
  const auto r = run({"train", (dir / "t.tsv").string(), "--out", (dir / "m.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(":2:"), std::string::npos);
}

TEST(CliTune, DegenerateGridSeedAndExhaustiveMode) {
  Splits s;
  const auto out = (s.dir / "lam.json").string();
  auto r = run({"tune", s.model, s.valid, "--theta=-4", "--max-gen", "5", "--population", "8", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rec = tune_record_from_json(nlohmann::json::parse(read_file(out)));
  EXPECT_EQ(rec.result.exponents, (std::vector<int>{-4, -4, -4}));

  const std::vector<std::string> de{"tune", s.model, s.valid, "--theta=-5,-3,-1", "--max-gen", "10",
                                    "--population", "10", "--seed", "3", "--out", out};
  ASSERT_EQ(run(de).code, 0);
  const auto first = read_file(out);
  ASSERT_EQ(run(de).code, 0);
  EXPECT_EQ(read_file(out), first);
  const auto de_fit = tune_record_from_json(nlohmann::json::parse(first)).result.fitness;

  r = run({"tune", s.model, s.valid, "--theta=-5,-3,-1", "--grid", "--out", out, "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  rec = tune_record_from_json(nlohmann::json::parse(read_file(out)));
  EXPECT_EQ(rec.result.mode, "grid");
  EXPECT_EQ(rec.result.fitness_requests, 27u);
  EXPECT_GE(de_fit, 0.999 * rec.result.fitness);
  EXPECT_EQ(nlohmann::json::parse(r.out), nlohmann::json::parse(read_file(out)));
}

TEST(CliEval, MemorizedDatasetWithNaiveBayes) {
  TempDir dir;
  write_file(dir / "t.tsv", "A\ta1 a2 a3\nB\tb1 b2 b3\nC\tc1 c2 c3\nA\ta2 a4\nB\tb4 b1\n");
  ASSERT_EQ(run({"train", (dir / "t.tsv").string(), "--out", (dir / "m.json").string()}).code, 0);
  const auto r = run({"eval", (dir / "m.json").string(), (dir / "t.tsv").string(), "--classifier", "nb",
                      "--format", "json", "--out", (dir / "r.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GE(j.at("micro_accuracy").get<double>(), 0.999);
  EXPECT_EQ(j.at("classifier").at("kind"), "nb");
  EXPECT_EQ(report_from_json(nlohmann::json::parse(read_file(dir / "r.json"))).micro_accuracy,
            j.at("micro_accuracy").get<double>());
}

TEST(CliEval, RlrUnbNeedsLambdas) {
  Splits s;
  const auto r = run({"eval", s.model, s.eval, "--classifier", "rlr_unb"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--lambdas"), std::string::npos);
  EXPECT_NE(run({"eval", s.model, s.eval, "--classifier", "bogus"}).code, 0);
  EXPECT_NE(run({"eval", s.model, s.eval}).code, 0);
}

TEST(CliEval, TunedRlrBeatsUnbOnImbalancedSplits) {
  Splits s;
  const auto lam = (s.dir / "lam.json").string();
  ASSERT_EQ(run({"tune", s.model, s.valid, "--max-gen", "20", "--population", "16", "--seed", "1", "--out", lam}).code,
            0);
  auto unb = run({"eval", s.model, s.eval, "--classifier", "unb", "--format", "json"});
  auto rlr = run({"eval", s.model, s.eval, "--classifier", "rlr_unb", "--lambdas", lam, "--format", "json"});
  ASSERT_EQ(unb.code, 0) << unb.err;
  ASSERT_EQ(rlr.code, 0) << rlr.err;
  EXPECT_GT(nlohmann::json::parse(rlr.out).at("macro_f1").get<double>(),
            nlohmann::json::parse(unb.out).at("macro_f1").get<double>());
  const auto table = run({"eval", s.model, s.eval, "--classifier", "rlr_unb", "--lambdas", lam});
  EXPECT_NE(table.out.find("macro"), std::string::npos);
  EXPECT_NE(table.out.find("tiny"), std::string::npos);
}

TEST(CliPredict, LinesMatchLibrary) {
  Splits s;
  auto r = run({"predict", s.model, s.eval, "--classifier", "cnb"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto data = load_tsv(s.eval);
  const auto out = lines(r.out);
  ASSERT_EQ(out.size(), data.size());
  const auto model = FrequencyModel::from_json(nlohmann::json::parse(read_file(s.model)));
  const Classifier clf(model, ClassifierSpec::of(ClassifierKind::CNB));
  for (std::size_t i = 0; i < data.size(); i += 37) {
    const auto expect = clf.classify(data[i]);
    std::istringstream is(out[i]);
    std::string field;
    std::getline(is, field, '\t');
    EXPECT_EQ(field, expect.predicted_label);
    for (ClassId c = 0; c < model.num_classes(); ++c) {
      ASSERT_TRUE(std::getline(is, field, '\t'));
      const auto eq = field.rfind('=');
      EXPECT_EQ(field.substr(0, eq), model.class_name(c));
      EXPECT_EQ(std::stod(field.substr(eq + 1)), expect.log_scores[c]);
    }
  }
  write_file(s.dir / "empty.tsv", "");
  r = run({"predict", s.model, (s.dir / "empty.tsv").string(), "--classifier", "nb"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(CliSynth, SizesAndDeterminism) {
  const std::vector<std::string> args{"synth", "--sizes", "A=100,B=1", "--vocab", "40", "--length", "3",
                                      "--signal", "A=0.5,B=0.9", "--seed", "4"};
  const auto a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  std::istringstream is(a.out);
  const auto d = read_tsv(is);
  EXPECT_EQ(d.size(), 101u);
  EXPECT_EQ(d.classes(), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(run(args).out, a.out);
  EXPECT_NE(run({"synth", "--sizes", "A=0,B=1"}).code, 0);
  EXPECT_NE(run({"synth", "--sizes", "A=3", "--signal", "B=0.1"}).code, 0);
}

TEST(CliLr, EstimatorRows) {
  auto value = [](std::vector<std::string> args) {
    args.insert(args.begin(), "lr");
    const auto r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return std::stod(r.out);
  };
  EXPECT_EQ(value({"2000", "10000000", "100", "10000", "--estimator", "mle"}), 50.0);
  EXPECT_EQ(value({"20", "10000000", "2", "10000", "--estimator", "mle"}), 100.0);
  EXPECT_NEAR(value({"2000", "10000000", "100", "10000", "--estimator", "regularized", "--lambda", "1e-5"}), 47.6, 0.05);
  EXPECT_NEAR(value({"20", "10000000", "1", "10000", "--estimator", "regularized", "--lambda", "1e-5"}), 8.3, 0.05);
  EXPECT_NEAR(value({"20", "10000000", "2", "10000", "--estimator", "regularized", "--lambda", "1e-5"}), 16.7, 0.05);
  EXPECT_EQ(value({"0", "0", "0", "0"}), 1.0);
  EXPECT_NEAR(value({"2000", "10000000", "100", "10000", "--lambda", "1e-5"}), 48.06, 0.005);
  EXPECT_NE(run({"lr", "1", "0", "1", "1", "--estimator", "mle"}).code, 0);
  EXPECT_NE(run({"lr", "1", "2", "3"}).code, 0);
}

TEST(CliBinary, ExitStatusAndStreams) {
  TempDir dir;
  const std::string tool = RLRNB_TOOL_PATH;
  const auto out = (dir / "o.txt").string(), err = (dir / "e.txt").string();
  EXPECT_EQ(std::system((tool + " lr 20 10000000 1 10000 --estimator mle >" + out + " 2>" + err).c_str()), 0);
  EXPECT_EQ(read_file(out), "50\n");
  EXPECT_TRUE(read_file(err).empty());
  EXPECT_NE(std::system((tool + " train /nonexistent.tsv --out x.json >" + out + " 2>" + err).c_str()), 0);
  EXPECT_TRUE(read_file(out).empty());
  EXPECT_NE(read_file(err).find("cannot open"), std::string::npos);
}
