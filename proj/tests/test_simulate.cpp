#include <gtest/gtest.h>

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "panelstat/metrics.hpp"
#include "panelstat/simulate.hpp"

using namespace panelstat;
using nlohmann::json;

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.questions = 6;
  cfg.models = 5;
  cfg.options = 4;
  cfg.coordination = 0.5;
  cfg.misleading_rate = 0.2;
  cfg.seed = 11;
  return cfg;
}

// Per-question answers of one condition, in model order.
std::map<std::string, std::vector<std::string>> answers_by_question(
    const PanelDataset& ds, Condition cond) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& r : ds.responses) {
    if (r.condition != cond) continue;
    out[r.question_id].push_back(r.answer.value_or("ABSTAIN"));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config validation and parsing

TEST(SimConfigCheck, ValidationMessages) {
  std::string why;
  SimConfig cfg = small_config();
  EXPECT_TRUE(cfg.valid(&why)) << why;

  cfg.questions = 0;
  EXPECT_FALSE(cfg.valid(&why));
  EXPECT_EQ(why, "Q and N must be >= 1");

  cfg = small_config();
  cfg.options = 1;
  EXPECT_FALSE(cfg.valid(&why));
  EXPECT_EQ(why, "K must be in 2..26");
  cfg.options = 27;
  EXPECT_FALSE(cfg.valid(&why));

  cfg = small_config();
  cfg.coordination = 1.5;
  EXPECT_FALSE(cfg.valid(&why));
  cfg = small_config();
  cfg.misleading_rate = -0.1;
  EXPECT_FALSE(cfg.valid(&why));

  cfg = small_config();
  cfg.skill = {0.5, 0.5};  // wrong length for 5 models
  EXPECT_FALSE(cfg.valid(&why));
  cfg.skill = {0.5, 0.5, 0.5, 0.5, 1.5};
  EXPECT_FALSE(cfg.valid(&why));

  cfg = small_config();
  cfg.difficulty_low = 0.8;
  cfg.difficulty_high = 0.2;
  EXPECT_FALSE(cfg.valid(&why));
  EXPECT_EQ(why, "difficulty range invalid");

  EXPECT_THROW(simulate_panel(cfg), std::runtime_error);
}

TEST(SimConfigCheck, ParsesArraysAndRanges) {
  const json obj = {
      {"questions", 3},
      {"models", 2},
      {"options", 5},
      {"skill", {0.7, 0.9}},
      {"difficulty", {{"low", 0.2}, {"high", 0.6}}},
      {"coordination", 0.8},
      {"misleading_rate", 0.1},
      {"seed", 42},
  };
  const SimConfig cfg = parse_sim_config(obj);
  EXPECT_EQ(cfg.questions, 3u);
  EXPECT_EQ(cfg.models, 2u);
  EXPECT_EQ(cfg.options, 5u);
  EXPECT_EQ(cfg.skill, (std::vector<double>{0.7, 0.9}));
  EXPECT_TRUE(cfg.difficulty.empty());
  EXPECT_DOUBLE_EQ(cfg.difficulty_low, 0.2);
  EXPECT_DOUBLE_EQ(cfg.difficulty_high, 0.6);
  EXPECT_DOUBLE_EQ(cfg.coordination, 0.8);
  EXPECT_EQ(cfg.seed, 42u);
}

TEST(SimConfigCheck, ParseRejectsBadFields) {
  json base = {
      {"questions", 3},       {"models", 2},
      {"options", 4},         {"coordination", 0.5},
      {"misleading_rate", 0}, {"seed", 1},
  };
  EXPECT_NO_THROW(parse_sim_config(base));

  json bad = base;
  bad.erase("questions");
  EXPECT_THROW(parse_sim_config(bad), std::runtime_error);

  bad = base;
  bad["models"] = -2;
  EXPECT_THROW(parse_sim_config(bad), std::runtime_error);

  bad = base;
  bad.erase("coordination");
  EXPECT_THROW(parse_sim_config(bad), std::runtime_error);

  bad = base;
  bad["misleading_rate"] = "high";
  EXPECT_THROW(parse_sim_config(bad), std::runtime_error);

  bad = base;
  bad["seed"] = -1;
  EXPECT_THROW(parse_sim_config(bad), std::runtime_error);

  bad = base;
  bad["skill"] = "strong";
  EXPECT_THROW(parse_sim_config(bad), std::runtime_error);

  bad = base;
  bad["skill"] = {0.5, "x"};
  EXPECT_THROW(parse_sim_config(bad), std::runtime_error);

  bad = base;
  bad["coordination"] = 2.0;  // parses, fails validation
  EXPECT_THROW(parse_sim_config(bad), std::runtime_error);

  EXPECT_THROW(parse_sim_config(json::array()), std::runtime_error);
}

// ---------------------------------------------------------------------------
// Determinism

TEST(Simulate, SameSeedSameOutput) {
  const SimConfig cfg = small_config();
  const PanelDataset a = simulate_panel(cfg);
  const PanelDataset b = simulate_panel(cfg);
  ASSERT_EQ(a.responses.size(), b.responses.size());
  ASSERT_EQ(a.responses.size(), cfg.questions * cfg.models * 2);
  for (std::size_t i = 0; i < a.responses.size(); ++i) {
    EXPECT_EQ(a.responses[i].question_id, b.responses[i].question_id);
    EXPECT_EQ(a.responses[i].model_id, b.responses[i].model_id);
    EXPECT_EQ(a.responses[i].condition, b.responses[i].condition);
    EXPECT_EQ(a.responses[i].answer, b.responses[i].answer);
  }
  for (const auto& [qid, q] : a.questions) {
    EXPECT_EQ(q.correct_option, b.questions.at(qid).correct_option);
  }
}

TEST(Simulate, SeedChangesOutput) {
  SimConfig cfg = small_config();
  const PanelDataset a = simulate_panel(cfg);
  cfg.seed = 12;
  const PanelDataset b = simulate_panel(cfg);
  std::string sig_a, sig_b;
  for (const auto& r : a.responses) sig_a += r.answer.value_or("-");
  for (const auto& r : b.responses) sig_b += r.answer.value_or("-");
  EXPECT_NE(sig_a, sig_b);
}

TEST(Simulate, QuestionStreamsIndependentOfQuestionCount) {
  // With skills and difficulties pinned, question q depends only on the
  // seed and q, so a longer run extends a shorter one.
  SimConfig cfg = small_config();
  cfg.skill = std::vector<double>(cfg.models, 0.7);
  cfg.difficulty = std::vector<double>(cfg.questions, 0.4);
  const PanelDataset shorter = simulate_panel(cfg);

  SimConfig longer_cfg = cfg;
  longer_cfg.questions = cfg.questions + 4;
  longer_cfg.difficulty = std::vector<double>(longer_cfg.questions, 0.4);
  const PanelDataset longer = simulate_panel(longer_cfg);

  const auto zs_short = answers_by_question(shorter, Condition::kZeroShot);
  const auto zs_long = answers_by_question(longer, Condition::kZeroShot);
  for (const auto& [qid, answers] : zs_short) {
    EXPECT_EQ(zs_long.at(qid), answers) << qid;
  }
}

// ---------------------------------------------------------------------------
// Mechanism extremes

TEST(Simulate, FullCoordinationCleanAttractor) {
  SimConfig cfg = small_config();
  cfg.questions = 20;
  cfg.coordination = 1.0;
  cfg.misleading_rate = 0.0;
  const PanelDataset ds = simulate_panel(cfg);
  const auto agentic = answers_by_question(ds, Condition::kAgentic);
  for (const auto& [qid, answers] : agentic) {
    const std::string& correct = ds.questions.at(qid).correct_option;
    for (const auto& a : answers) EXPECT_EQ(a, correct) << qid;
    const auto dist = answer_distribution(ds, qid, Condition::kAgentic);
    EXPECT_EQ(decision_entropy(dist), 0.0);
    EXPECT_DOUBLE_EQ(majority(dist).second, 1.0);
    EXPECT_DOUBLE_EQ(robustness(ds, qid, Condition::kAgentic).second, 1.0);
  }
}

TEST(Simulate, FullCoordinationAlwaysMisleading) {
  SimConfig cfg = small_config();
  cfg.questions = 20;
  cfg.coordination = 1.0;
  cfg.misleading_rate = 1.0;
  const PanelDataset ds = simulate_panel(cfg);
  const auto agentic = answers_by_question(ds, Condition::kAgentic);
  for (const auto& [qid, answers] : agentic) {
    const std::string& correct = ds.questions.at(qid).correct_option;
    for (const auto& a : answers) {
      EXPECT_EQ(a, answers.front());
      EXPECT_NE(a, correct);
    }
    // Unanimous wrong convergence sits squarely in the anomaly zone.
    const auto dist = answer_distribution(ds, qid, Condition::kAgentic);
    EXPECT_DOUBLE_EQ(majority(dist).second, 1.0);
    EXPECT_DOUBLE_EQ(robustness(ds, qid, Condition::kAgentic).second, 0.0);
  }
}

TEST(Simulate, ZeroCoordinationMatchesMarginalLaw) {
  // skill 0.6, difficulty 0.5, K = 4: p = 0.6 * 0.5 + 0.25 = 0.55 per
  // response in both conditions when nothing couples the panel.
  SimConfig cfg;
  cfg.questions = 2500;
  cfg.models = 4;
  cfg.options = 4;
  cfg.skill = std::vector<double>(cfg.models, 0.6);
  cfg.difficulty = std::vector<double>(cfg.questions, 0.5);
  cfg.coordination = 0.0;
  cfg.misleading_rate = 0.0;
  cfg.seed = 7;
  const PanelDataset ds = simulate_panel(cfg);

  std::size_t zs_correct = 0, ag_correct = 0, zs_total = 0, ag_total = 0;
  for (const auto& r : ds.responses) {
    const bool correct =
        r.answer == ds.questions.at(r.question_id).correct_option;
    if (r.condition == Condition::kZeroShot) {
      ++zs_total;
      zs_correct += correct;
    } else {
      ++ag_total;
      ag_correct += correct;
    }
  }
  ASSERT_EQ(zs_total, 10000u);
  ASSERT_EQ(ag_total, 10000u);
  const double se3 = 3.0 * std::sqrt(0.55 * 0.45 / 10000.0);
  EXPECT_NEAR(static_cast<double>(zs_correct) / 10000.0, 0.55, se3);
  EXPECT_NEAR(static_cast<double>(ag_correct) / 10000.0, 0.55, se3);
}

// ---------------------------------------------------------------------------
// Identifiers

TEST(Simulate, IdentifierFormats) {
  SimConfig cfg = small_config();
  cfg.questions = 5;
  cfg.models = 3;
  const PanelDataset ds = simulate_panel(cfg);
  ASSERT_EQ(ds.models.size(), 3u);
  EXPECT_EQ(ds.models[0], "model_01");
  EXPECT_EQ(ds.models[2], "model_03");
  ASSERT_EQ(ds.questions.size(), 5u);
  EXPECT_TRUE(ds.questions.count("Q001"));
  EXPECT_TRUE(ds.questions.count("Q005"));
  for (const auto& [qid, q] : ds.questions) {
    EXPECT_EQ(q.dataset_tag, "simulated");
    ASSERT_EQ(q.options.size(), cfg.options);
    EXPECT_EQ(q.options[0], "A");
    EXPECT_EQ(q.options[3], "D");
  }

  // Wider id fields appear once the counts outgrow the minimum width.
  SimConfig wide = small_config();
  wide.questions = 1200;
  wide.models = 1;
  const PanelDataset big = simulate_panel(wide);
  EXPECT_TRUE(big.questions.count("Q0001"));
  EXPECT_TRUE(big.questions.count("Q1200"));
  EXPECT_EQ(big.models[0], "model_01");
}
