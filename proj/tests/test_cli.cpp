#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
  ASSERT_TRUE(out.good()) << p;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const char* bin = std::getenv("PANELSTAT_BIN");
    ASSERT_NE(bin, nullptr)
        << "PANELSTAT_BIN must point at the panelstat executable";
    bin_ = bin;
    dir_ = fs::temp_directory_path() /
           ("panelstat_cli_" + std::string(::testing::UnitTest::GetInstance()
                                               ->current_test_info()
                                               ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunResult run(const std::string& args) {
    const fs::path out_file = dir_ / "stdout.txt";
    const fs::path err_file = dir_ / "stderr.txt";
    const std::string cmd = "\"" + bin_ + "\" " + args + " > \"" +
                            out_file.string() + "\" 2> \"" +
                            err_file.string() + "\"";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
  }

  fs::path write_questions() {
    const fs::path p = dir_ / "questions.jsonl";
    spit(p,
         R"({"question_id":"Q1","dataset_tag":"unit","options":["A","B","C"],"correct_option":"A"})"
         "\n"
         R"({"question_id":"Q2","dataset_tag":"unit","options":["A","B","C"],"correct_option":"A"})"
         "\n");
    return p;
  }

  // Four models, both conditions; Q1 agentic converges on wrong B.
  fs::path write_responses(bool drop_one_triple = false) {
    std::string lines;
    auto add = [&lines](const std::string& q, const std::string& m,
                        const std::string& cond, const std::string& ans) {
      lines += R"({"question_id":")" + q + R"(","model_id":")" + m +
               R"(","condition":")" + cond + R"(","answer":")" + ans +
               "\"}\n";
    };
    add("Q1", "m1", "zero_shot", "A");
    add("Q1", "m2", "zero_shot", "B");
    add("Q1", "m3", "zero_shot", "B");
    add("Q1", "m4", "zero_shot", "C");
    for (const char* m : {"m1", "m2", "m3", "m4"}) {
      add("Q1", m, "agentic", "B");
    }
    for (const char* m : {"m1", "m2", "m3", "m4"}) {
      add("Q2", m, "zero_shot", "A");
    }
    add("Q2", "m1", "agentic", "A");
    add("Q2", "m2", "agentic", "A");
    add("Q2", "m3", "agentic", "A");
    if (!drop_one_triple) add("Q2", "m4", "agentic", "ABSTAIN");
    const fs::path p = dir_ / "responses.jsonl";
    spit(p, lines);
    return p;
  }

  fs::path write_sim_config(int seed = 3) {
    const fs::path p = dir_ / "sim.json";
    spit(p, "{\"questions\": 6, \"models\": 5, \"options\": 4, "
            "\"coordination\": 0.6, \"misleading_rate\": 0.3, \"seed\": " +
                std::to_string(seed) + "}");
    return p;
  }

  std::string bin_;
  fs::path dir_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Global flags and usage errors

TEST_F(CliTest, VersionFlag) {
  const auto r = run("--version");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "panelstat 1.0.0 (prng=splitmix64)\n");
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").exit_code, 2);            // subcommand required
  EXPECT_EQ(run("frobnicate").exit_code, 2);  // unknown subcommand
  EXPECT_EQ(run("analyze").exit_code, 2);     // missing required flags

  const auto q = write_questions();
  const auto resp = write_responses();
  const std::string base = "analyze --questions \"" + q.string() +
                           "\" --responses \"" + resp.string() + "\" --out \"" +
                           (dir_ / "out").string() + "\"";
  EXPECT_EQ(run(base + " --no-such-flag").exit_code, 2);
  EXPECT_EQ(run(base + " --bins nonsense").exit_code, 2);
  EXPECT_EQ(run(base + " --tokenizer bogus").exit_code, 2);
  EXPECT_EQ(run(base + " --jobs 0").exit_code, 2);
  EXPECT_EQ(run("analyze --questions /no/such/file --responses \"" +
                resp.string() + "\" --out x")
                .exit_code,
            2);
}

TEST_F(CliTest, HelpExitsZero) {
  EXPECT_EQ(run("--help").exit_code, 0);
  const auto r = run("analyze --help");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("--bins"), std::string::npos);
}

// ---------------------------------------------------------------------------
// analyze

TEST_F(CliTest, AnalyzeWritesReportsAndCharts) {
  const auto q = write_questions();
  const auto resp = write_responses();
  const fs::path out = dir_ / "out";
  const auto r = run("analyze --questions \"" + q.string() +
                     "\" --responses \"" + resp.string() + "\" --out \"" +
                     out.string() + "\" --bootstrap 50");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("analyzed 2 questions x 4 models"),
            std::string::npos)
      << r.out;
  for (const char* name :
       {"analysis.json", "per_question.csv", "paired_deltas.csv",
        "transitions.csv", "anomalies.csv", "severity_crosstab.csv",
        "severity_profile.csv", "per_model.csv", "delta_histogram.svg",
        "mr_scatter.svg", "bin_bars.svg"}) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
  // No severity data: that chart is skipped with a note, not an error.
  EXPECT_FALSE(fs::exists(out / "severity_bars.svg"));
  EXPECT_NE(r.err.find("note: chart severity_bars skipped"),
            std::string::npos)
      << r.err;
}

TEST_F(CliTest, AnalyzeWithSeverityRendersSeverityChart) {
  const auto q = write_questions();
  const auto resp = write_responses();
  const fs::path sev = dir_ / "severity.csv";
  spit(sev,
       "question_id,option_label,rater_id,severity\n"
       "Q1,B,r1,high\n"
       "Q1,B,r2,high\n"
       "Q1,C,r1,low\n"
       "Q1,C,r2,moderate\n");
  const fs::path out = dir_ / "out";
  const auto r = run("analyze --questions \"" + q.string() +
                     "\" --responses \"" + resp.string() + "\" --severity \"" +
                     sev.string() + "\" --out \"" + out.string() +
                     "\" --bootstrap 50");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "severity_bars.svg"));
  const std::string analysis = slurp(out / "analysis.json");
  EXPECT_NE(analysis.find("\"present\": true"), std::string::npos);
}

TEST_F(CliTest, AnalyzeRejectsInvalidPanel) {
  const auto q = write_questions();
  const fs::path resp = dir_ / "responses.jsonl";
  spit(resp,
       R"({"question_id":"Q1","model_id":"m1","condition":"zero_shot","answer":"A"})"
       "\n");
  const auto r = run("analyze --questions \"" + q.string() +
                     "\" --responses \"" + resp.string() + "\" --out \"" +
                     (dir_ / "out").string() + "\"");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("panel-too-small"), std::string::npos) << r.err;
}

TEST_F(CliTest, AnalyzeParseErrorsExitOne) {
  const auto q = write_questions();
  const fs::path resp = dir_ / "responses.jsonl";
  spit(resp,
       R"({"question_id":"QX","model_id":"m1","condition":"zero_shot","answer":"A"})"
       "\n");
  const auto r = run("analyze --questions \"" + q.string() +
                     "\" --responses \"" + resp.string() + "\" --out \"" +
                     (dir_ / "out").string() + "\"");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("unknown question_id"), std::string::npos) << r.err;
}

TEST_F(CliTest, StrictPromotesWarnings) {
  const auto q = write_questions();
  const auto resp = write_responses(/*drop_one_triple=*/true);
  const std::string base = "analyze --questions \"" + q.string() +
                           "\" --responses \"" + resp.string() +
                           "\" --bootstrap 20 --out \"";
  const auto lax = run(base + (dir_ / "lax").string() + "\"");
  EXPECT_EQ(lax.exit_code, 0) << lax.err;
  const auto strict = run(base + (dir_ / "strict").string() + "\" --strict");
  EXPECT_EQ(strict.exit_code, 1);
  EXPECT_NE(strict.err.find("missing-triple"), std::string::npos)
      << strict.err;
  EXPECT_NE(strict.err.find("completeness warning"), std::string::npos);
}

TEST_F(CliTest, JobsDoNotChangeOutput) {
  const auto cfg = write_sim_config();
  const fs::path data = dir_ / "data";
  ASSERT_EQ(run("simulate --config \"" + cfg.string() + "\" --out \"" +
                data.string() + "\"")
                .exit_code,
            0);
  const std::string base =
      "analyze --questions \"" + (data / "questions.jsonl").string() +
      "\" --responses \"" + (data / "responses.jsonl").string() +
      "\" --bootstrap 100 --seed 5 --out \"";
  ASSERT_EQ(run(base + (dir_ / "j1").string() + "\" --jobs 1").exit_code, 0);
  ASSERT_EQ(run(base + (dir_ / "j4").string() + "\" --jobs 4").exit_code, 0);
  EXPECT_EQ(slurp(dir_ / "j1" / "analysis.json"),
            slurp(dir_ / "j4" / "analysis.json"));
}

// ---------------------------------------------------------------------------
// adjudicate

TEST_F(CliTest, AdjudicateExtractsAnswers) {
  const auto q = write_questions();
  const fs::path raw = dir_ / "raw.jsonl";
  spit(raw,
       R"({"question_id":"Q1","model_id":"m1","condition":"zero_shot","raw_text":"I considered (A), but the answer is B."})"
       "\n"
       R"({"question_id":"Q1","model_id":"m2","condition":"zero_shot","raw_text":"There is no way to tell."})"
       "\n"
       R"({"question_id":"Q2","model_id":"m1","condition":"agentic","raw_text":"Option C."})"
       "\n");
  const fs::path out = dir_ / "adjudicated.jsonl";
  const auto r = run("adjudicate --questions \"" + q.string() + "\" --raw \"" +
                     raw.string() + "\" --out \"" + out.string() + "\"");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("adjudicated 3 responses (1 ABSTAIN)"),
            std::string::npos)
      << r.out;

  const std::string content = slurp(out);
  std::istringstream lines(content);
  std::string line;
  std::vector<std::string> answers;
  while (std::getline(lines, line)) {
    const auto obj = nlohmann::json::parse(line);
    answers.push_back(obj.at("answer").get<std::string>());
    EXPECT_TRUE(obj.contains("raw_text"));
  }
  EXPECT_EQ(answers,
            (std::vector<std::string>{"B", "ABSTAIN", "C"}));
}

TEST_F(CliTest, AdjudicateRejectsEmptyAndUnknown) {
  const auto q = write_questions();
  const fs::path empty = dir_ / "empty.jsonl";
  spit(empty, "");
  EXPECT_EQ(run("adjudicate --questions \"" + q.string() + "\" --raw \"" +
                empty.string() + "\" --out \"" + (dir_ / "x.jsonl").string() +
                "\"")
                .exit_code,
            1);

  const fs::path raw = dir_ / "raw.jsonl";
  spit(raw,
       R"({"question_id":"QX","model_id":"m1","condition":"zero_shot","raw_text":"The answer is A."})"
       "\n");
  const auto r = run("adjudicate --questions \"" + q.string() + "\" --raw \"" +
                     raw.string() + "\" --out \"" +
                     (dir_ / "y.jsonl").string() + "\"");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("unknown question_id"), std::string::npos);
}

// ---------------------------------------------------------------------------
// simulate

TEST_F(CliTest, SimulateIsDeterministicWithSeedOverride) {
  const auto cfg = write_sim_config();
  const fs::path a = dir_ / "a";
  const fs::path b = dir_ / "b";
  const fs::path c = dir_ / "c";
  ASSERT_EQ(run("simulate --config \"" + cfg.string() + "\" --out \"" +
                a.string() + "\"")
                .exit_code,
            0);
  ASSERT_EQ(run("simulate --config \"" + cfg.string() + "\" --out \"" +
                b.string() + "\"")
                .exit_code,
            0);
  EXPECT_EQ(slurp(a / "responses.jsonl"), slurp(b / "responses.jsonl"));
  EXPECT_EQ(slurp(a / "questions.jsonl"), slurp(b / "questions.jsonl"));

  const auto r = run("simulate --config \"" + cfg.string() + "\" --seed 9 " +
                     "--out \"" + c.string() + "\"");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("(seed 9)"), std::string::npos) << r.out;
  EXPECT_NE(slurp(a / "responses.jsonl"), slurp(c / "responses.jsonl"));
}

TEST_F(CliTest, SimulateRejectsBadConfig) {
  const fs::path bad = dir_ / "bad.json";
  spit(bad, "{\"questions\": 0}");
  EXPECT_EQ(run("simulate --config \"" + bad.string() + "\" --out \"" +
                (dir_ / "out").string() + "\"")
                .exit_code,
            1);
  const fs::path garbled = dir_ / "garbled.json";
  spit(garbled, "{not json");
  EXPECT_EQ(run("simulate --config \"" + garbled.string() + "\" --out \"" +
                (dir_ / "out2").string() + "\"")
                .exit_code,
            1);
}

// ---------------------------------------------------------------------------
// report

TEST_F(CliTest, ReportRerendersFromAnalysisJson) {
  const auto q = write_questions();
  const auto resp = write_responses();
  const fs::path out = dir_ / "out";
  ASSERT_EQ(run("analyze --questions \"" + q.string() + "\" --responses \"" +
                resp.string() + "\" --out \"" + out.string() +
                "\" --bootstrap 20")
                .exit_code,
            0);
  const fs::path charts = dir_ / "charts";
  const auto all = run("report --analysis \"" +
                       (out / "analysis.json").string() + "\" --out-dir \"" +
                       charts.string() + "\"");
  EXPECT_EQ(all.exit_code, 0) << all.err;
  EXPECT_NE(all.out.find("rendered 3 chart(s)"), std::string::npos)
      << all.out;
  EXPECT_TRUE(fs::exists(charts / "mr_scatter.svg"));
  EXPECT_FALSE(fs::exists(charts / "severity_bars.svg"));

  const auto single = run("report --analysis \"" +
                          (out / "analysis.json").string() +
                          "\" --out-dir \"" + charts.string() +
                          "\" --chart delta_histogram");
  EXPECT_EQ(single.exit_code, 0) << single.err;
  EXPECT_NE(single.out.find("rendered 1 chart(s)"), std::string::npos);

  // An explicitly requested chart that cannot render is an error.
  const auto missing = run("report --analysis \"" +
                           (out / "analysis.json").string() +
                           "\" --out-dir \"" + charts.string() +
                           "\" --chart severity_bars");
  EXPECT_EQ(missing.exit_code, 1);
  EXPECT_NE(missing.err.find("nothing to plot"), std::string::npos);
}

TEST_F(CliTest, ReportRejectsUnreadableAnalysis) {
  const fs::path garbled = dir_ / "analysis.json";
  spit(garbled, "{broken");
  EXPECT_EQ(run("report --analysis \"" + garbled.string() + "\" --out-dir \"" +
                (dir_ / "charts").string() + "\"")
                .exit_code,
            1);
}
