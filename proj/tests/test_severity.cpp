#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "panelstat/numeric.hpp"
#include "panelstat/severity.hpp"

using namespace panelstat;

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kLn3 = 1.0986122886681098;

std::vector<Severity> sev(std::initializer_list<Severity> list) {
  return std::vector<Severity>(list);
}

SeverityRating rating(const std::string& q, const std::string& opt,
                      const std::string& rater, Severity s) {
  SeverityRating r;
  r.question_id = q;
  r.option_label = opt;
  r.rater_id = rater;
  r.severity = s;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Per-option aggregation

TEST(AggregateOption, StrictMajorityWins) {
  const auto res = aggregate_option_severity(
      "Q1", "B",
      sev({Severity::kModerate, Severity::kModerate, Severity::kHigh}));
  EXPECT_EQ(res.aggregate, Severity::kModerate);
  EXPECT_EQ(res.rule_used, AggregationRule::kStrictMajority);
  EXPECT_EQ(res.question_id, "Q1");
  EXPECT_EQ(res.option_label, "B");
  ASSERT_EQ(res.ratings.size(), 3u);

  const auto high = aggregate_option_severity(
      "Q1", "C", sev({Severity::kHigh, Severity::kHigh, Severity::kModerate}));
  EXPECT_EQ(high.aggregate, Severity::kHigh);
  EXPECT_EQ(high.rule_used, AggregationRule::kStrictMajority);
}

TEST(AggregateOption, OrdinalMedianFallback) {
  // No label reaches a strict majority: the ordinal median decides.
  const auto split = aggregate_option_severity(
      "Q1", "B", sev({Severity::kLow, Severity::kModerate, Severity::kHigh}));
  EXPECT_EQ(split.aggregate, Severity::kModerate);
  EXPECT_EQ(split.rule_used, AggregationRule::kOrdinalMedian);

  // Half of four is not a strict majority.
  const auto four = aggregate_option_severity(
      "Q1", "B",
      sev({Severity::kLow, Severity::kLow, Severity::kModerate,
           Severity::kHigh}));
  EXPECT_EQ(four.aggregate, Severity::kModerate);
  EXPECT_EQ(four.rule_used, AggregationRule::kOrdinalMedian);
}

TEST(AggregateOption, EvenMiddleTieRoundsUp) {
  const auto mh = aggregate_option_severity(
      "Q1", "B", sev({Severity::kModerate, Severity::kHigh}));
  EXPECT_EQ(mh.aggregate, Severity::kHigh);
  const auto lm = aggregate_option_severity(
      "Q1", "B", sev({Severity::kLow, Severity::kModerate}));
  EXPECT_EQ(lm.aggregate, Severity::kModerate);
  // Middles two levels apart land exactly on the middle level.
  const auto lh = aggregate_option_severity(
      "Q1", "B", sev({Severity::kLow, Severity::kHigh}));
  EXPECT_EQ(lh.aggregate, Severity::kModerate);
  EXPECT_EQ(lh.rule_used, AggregationRule::kOrdinalMedian);
}

TEST(AggregateOption, RequiresTwoRatings) {
  EXPECT_THROW(aggregate_option_severity("Q1", "B", sev({Severity::kHigh})),
               std::runtime_error);
  EXPECT_THROW(aggregate_option_severity("Q1", "B", {}), std::runtime_error);
}

TEST(AggregateAll, GroupsAndOrders) {
  PanelDataset ds;
  ds.severity.push_back(rating("Q2", "D", "r1", Severity::kHigh));
  ds.severity.push_back(rating("Q1", "C", "r1", Severity::kLow));
  ds.severity.push_back(rating("Q1", "B", "r1", Severity::kModerate));
  ds.severity.push_back(rating("Q1", "B", "r2", Severity::kModerate));
  ds.severity.push_back(rating("Q2", "D", "r2", Severity::kModerate));
  ds.severity.push_back(rating("Q1", "C", "r2", Severity::kHigh));
  ds.severity.push_back(rating("Q1", "C", "r3", Severity::kLow));

  const auto all = aggregate_all_severity(ds);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].question_id, "Q1");
  EXPECT_EQ(all[0].option_label, "B");
  EXPECT_EQ(all[0].aggregate, Severity::kModerate);
  EXPECT_EQ(all[1].option_label, "C");
  EXPECT_EQ(all[1].aggregate, Severity::kLow);  // strict majority 2/3
  EXPECT_EQ(all[1].rule_used, AggregationRule::kStrictMajority);
  EXPECT_EQ(all[2].question_id, "Q2");
  EXPECT_EQ(all[2].aggregate, Severity::kHigh);  // median of {M,H} rounds up
  EXPECT_TRUE(aggregate_all_severity(PanelDataset{}).empty());
}

// ---------------------------------------------------------------------------
// Severity profile

TEST(Profile, ProportionsRounding) {
  SeverityProfileStratum s;
  s.counts = {160, 240, 172};
  const auto p = s.proportions();
  EXPECT_EQ(s.annotated_total(), 572u);
  EXPECT_DOUBLE_EQ(round_to(p[0], 2), 0.28);
  EXPECT_DOUBLE_EQ(round_to(p[1], 2), 0.42);
  EXPECT_DOUBLE_EQ(round_to(p[2], 2), 0.30);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);

  SeverityProfileStratum empty;
  const auto zero = empty.proportions();
  EXPECT_EQ(zero[0], 0.0);
  EXPECT_EQ(zero[2], 0.0);
}

TEST(Profile, CountsIncorrectOutputsByStratum) {
  PanelDataset ds;
  QuestionSpec q1;
  q1.question_id = "Q1";
  q1.dataset_tag = "cardio";
  q1.options = {"A", "B", "C"};
  q1.correct_option = "A";
  ds.questions.emplace("Q1", q1);
  QuestionSpec q2;
  q2.question_id = "Q2";
  q2.dataset_tag = "neuro";
  q2.options = {"X", "Y"};
  q2.correct_option = "X";
  ds.questions.emplace("Q2", q2);
  ds.models = {"m1", "m2", "m3", "m4"};

  auto add = [&ds](const std::string& q, const std::string& m, Condition c,
                   std::optional<std::string> ans) {
    ResponseRecord r;
    r.question_id = q;
    r.model_id = m;
    r.condition = c;
    r.answer = std::move(ans);
    ds.responses.push_back(r);
  };
  // Q1: B wrong and rated; C wrong and unrated; A correct; one abstain.
  add("Q1", "m1", Condition::kZeroShot, "B");
  add("Q1", "m2", Condition::kZeroShot, "C");
  add("Q1", "m3", Condition::kZeroShot, "A");
  add("Q1", "m4", Condition::kZeroShot, std::nullopt);
  add("Q1", "m1", Condition::kAgentic, "B");
  // Q2: one wrong pick of Y in the agentic condition.
  add("Q2", "m1", Condition::kAgentic, "Y");

  ds.severity.push_back(rating("Q1", "B", "r1", Severity::kModerate));
  ds.severity.push_back(rating("Q1", "B", "r2", Severity::kModerate));
  ds.severity.push_back(rating("Q2", "Y", "r1", Severity::kHigh));
  ds.severity.push_back(rating("Q2", "Y", "r2", Severity::kHigh));

  const auto profile = severity_profile(ds, aggregate_all_severity(ds));
  EXPECT_FALSE(profile.empty);
  ASSERT_EQ(profile.strata.size(), 3u);  // cardio, neuro, pooled
  EXPECT_EQ(profile.strata[0].stratum, "cardio");
  EXPECT_EQ(profile.strata[0].counts[1], 2u);  // B chosen twice, moderate
  EXPECT_EQ(profile.strata[0].counts[2], 0u);
  EXPECT_EQ(profile.strata[0].unannotated, 1u);  // the C pick
  EXPECT_EQ(profile.strata[1].stratum, "neuro");
  EXPECT_EQ(profile.strata[1].counts[2], 1u);
  EXPECT_EQ(profile.strata.back().stratum, "pooled");
  EXPECT_EQ(profile.strata.back().counts[1], 2u);
  EXPECT_EQ(profile.strata.back().counts[2], 1u);
  EXPECT_EQ(profile.strata.back().unannotated, 1u);
}

TEST(Profile, EmptyWhenNoIncorrectOutputs) {
  PanelDataset ds;
  QuestionSpec q;
  q.question_id = "Q1";
  q.dataset_tag = "unit";
  q.options = {"A", "B"};
  q.correct_option = "A";
  ds.questions.emplace("Q1", q);
  ds.models = {"m1"};
  ResponseRecord r;
  r.question_id = "Q1";
  r.model_id = "m1";
  r.condition = Condition::kZeroShot;
  r.answer = "A";
  ds.responses.push_back(r);

  const auto profile = severity_profile(ds, {});
  EXPECT_TRUE(profile.empty);
  ASSERT_EQ(profile.strata.size(), 1u);
  EXPECT_EQ(profile.strata[0].stratum, "pooled");
  EXPECT_EQ(profile.strata[0].annotated_total(), 0u);
}

// ---------------------------------------------------------------------------
// Rater agreement

TEST(RaterAgreement, BucketsAndFleiss) {
  PanelDataset ds;
  // Three raters, three rated options: unanimous / majority / split.
  for (const char* r : {"r1", "r2", "r3"}) {
    ds.severity.push_back(rating("Q1", "B", r, Severity::kModerate));
  }
  ds.severity.push_back(rating("Q1", "C", "r1", Severity::kModerate));
  ds.severity.push_back(rating("Q1", "C", "r2", Severity::kModerate));
  ds.severity.push_back(rating("Q1", "C", "r3", Severity::kHigh));
  ds.severity.push_back(rating("Q2", "Y", "r1", Severity::kLow));
  ds.severity.push_back(rating("Q2", "Y", "r2", Severity::kModerate));
  ds.severity.push_back(rating("Q2", "Y", "r3", Severity::kHigh));

  const auto rep = rater_agreement_report(ds);
  EXPECT_EQ(rep.n_options, 3u);
  EXPECT_EQ(rep.n_raters, 3u);
  EXPECT_EQ(rep.unanimous, 1u);
  EXPECT_EQ(rep.majority, 1u);
  EXPECT_EQ(rep.none, 1u);
  EXPECT_NEAR(rep.percent_agreement, 2.0 / 3.0, 1e-15);

  ASSERT_EQ(rep.per_item.size(), 3u);
  EXPECT_EQ(rep.per_item[0].first,
            (std::pair<std::string, std::string>{"Q1", "B"}));
  EXPECT_NEAR(rep.per_item[0].second, 1.0, 1e-15);
  EXPECT_NEAR(rep.per_item[1].second, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(rep.per_item[2].second, 0.0, 1e-15);

  // Hand-worked Fleiss kappa for the same table:
  // observed = 4/9, expected = 41/81, kappa = -0.125.
  EXPECT_NEAR(rep.fleiss.observed, 4.0 / 9.0, 1e-15);
  EXPECT_NEAR(rep.fleiss.expected, 41.0 / 81.0, 1e-15);
  EXPECT_NEAR(rep.fleiss.kappa, -0.125, 1e-15);
}

TEST(RaterAgreement, RejectsRaggedCoverage) {
  PanelDataset ds;
  ds.severity.push_back(rating("Q1", "B", "r1", Severity::kModerate));
  ds.severity.push_back(rating("Q1", "B", "r2", Severity::kModerate));
  ds.severity.push_back(rating("Q1", "C", "r1", Severity::kLow));
  // r2 never rated Q1/C.
  EXPECT_THROW(rater_agreement_report(ds), std::runtime_error);

  PanelDataset empty;
  EXPECT_THROW(rater_agreement_report(empty), std::runtime_error);
}

// ---------------------------------------------------------------------------
// Failure-pattern cross-tab

namespace {
QuestionOutcome outcome(const std::string& q, Condition c,
                        const std::string& modal, bool correct) {
  QuestionOutcome o;
  o.question_id = q;
  o.condition = c;
  o.modal_option = modal;
  o.majority_correct = correct;
  return o;
}
}  // namespace

TEST(FailureLinks, CrossTabSubsets) {
  std::map<std::string, QuestionSpec> questions;
  for (const auto& [qid, correct] :
       std::map<std::string, std::string>{
           {"Q1", "A"}, {"Q2", "C"}, {"Q3", "A"}}) {
    QuestionSpec q;
    q.question_id = qid;
    q.correct_option = correct;
    questions.emplace(qid, q);
  }

  std::vector<AggregatedSeverity> aggregated;
  AggregatedSeverity a1;
  a1.question_id = "Q1";
  a1.option_label = "B";
  a1.aggregate = Severity::kModerate;
  aggregated.push_back(a1);
  AggregatedSeverity a2;
  a2.question_id = "Q2";
  a2.option_label = "D";
  a2.aggregate = Severity::kHigh;
  aggregated.push_back(a2);

  std::vector<QuestionOutcome> outcomes;
  // Q1 wrong modal B in both conditions: one distinct pair.
  outcomes.push_back(outcome("Q1", Condition::kZeroShot, "B", false));
  outcomes.push_back(outcome("Q1", Condition::kAgentic, "B", false));
  // Q2 correct zero-shot, wrong agentic modal D.
  outcomes.push_back(outcome("Q2", Condition::kZeroShot, "C", true));
  outcomes.push_back(outcome("Q2", Condition::kAgentic, "D", false));
  // Q3 wrong modal E with no rating anywhere.
  outcomes.push_back(outcome("Q3", Condition::kZeroShot, "E", false));
  outcomes.push_back(outcome("Q3", Condition::kAgentic, "A", true));

  std::vector<AnomalyFlag> anomalies;
  AnomalyFlag f;
  f.question_id = "Q1";
  f.condition = Condition::kAgentic;
  f.modal_option = "B";
  anomalies.push_back(f);

  std::vector<PairedDelta> r_deltas;
  PairedDelta d;
  d.question_id = "Q2";
  d.metric = Metric::kRobustness;
  d.delta = -0.2;
  r_deltas.push_back(d);
  PairedDelta d3;  // robustness dropped but agentic majority is correct
  d3.question_id = "Q3";
  d3.metric = Metric::kRobustness;
  d3.delta = -0.1;
  r_deltas.push_back(d3);

  const auto tab = link_severity_to_failures(aggregated, outcomes, r_deltas,
                                             anomalies, questions);

  ASSERT_TRUE(tab.counts.count("incorrect_majority"));
  const auto& im = tab.counts.at("incorrect_majority");
  EXPECT_EQ(im[1], 1u);  // (Q1, B) moderate, deduplicated across conditions
  EXPECT_EQ(im[2], 1u);  // (Q2, D) high
  EXPECT_EQ(im[0], 0u);
  EXPECT_EQ(tab.unannotated.at("incorrect_majority"), 1u);  // (Q3, E)

  ASSERT_TRUE(tab.counts.count("anomaly"));
  EXPECT_EQ(tab.counts.at("anomaly")[1], 1u);
  EXPECT_EQ(tab.counts.at("anomaly")[2], 0u);

  ASSERT_TRUE(tab.counts.count("collapse"));
  EXPECT_EQ(tab.counts.at("collapse")[2], 1u);  // Q2 agentic modal D
  EXPECT_EQ(tab.counts.at("collapse")[1], 0u);
  // Q3 excluded: its agentic modal option is the correct answer.
  EXPECT_EQ(tab.counts.at("collapse")[0] + tab.counts.at("collapse")[1] +
                tab.counts.at("collapse")[2],
            1u);
}

TEST(FailureLinks, NonNegativeDeltaNeverCollapses) {
  std::map<std::string, QuestionSpec> questions;
  QuestionSpec q;
  q.question_id = "Q1";
  q.correct_option = "A";
  questions.emplace("Q1", q);

  std::vector<QuestionOutcome> outcomes = {
      outcome("Q1", Condition::kAgentic, "B", false)};
  std::vector<PairedDelta> flat;
  PairedDelta d;
  d.question_id = "Q1";
  d.metric = Metric::kRobustness;
  d.delta = 0.0;
  flat.push_back(d);

  const auto tab =
      link_severity_to_failures({}, outcomes, flat, {}, questions);
  EXPECT_EQ(tab.counts.count("collapse"), 0u);
  // The wrong modal still lands in incorrect_majority (unannotated).
  EXPECT_EQ(tab.unannotated.at("incorrect_majority"), 1u);
}

// ---------------------------------------------------------------------------
// Per-question severity entropy

TEST(EntropyByQuestion, GroupsAggregates) {
  std::vector<AggregatedSeverity> aggregated;
  auto push = [&aggregated](const std::string& q, const std::string& opt,
                            Severity s) {
    AggregatedSeverity a;
    a.question_id = q;
    a.option_label = opt;
    a.aggregate = s;
    aggregated.push_back(a);
  };
  push("Q1", "B", Severity::kModerate);
  push("Q1", "C", Severity::kModerate);
  push("Q2", "B", Severity::kLow);
  push("Q2", "C", Severity::kHigh);
  push("Q3", "B", Severity::kLow);
  push("Q3", "C", Severity::kModerate);
  push("Q3", "D", Severity::kHigh);

  const auto by_q = severity_entropy_by_question(aggregated);
  ASSERT_EQ(by_q.size(), 3u);
  EXPECT_DOUBLE_EQ(by_q.at("Q1"), 0.0);
  EXPECT_NEAR(by_q.at("Q2"), kLn2, 1e-15);
  EXPECT_NEAR(by_q.at("Q3"), kLn3, 1e-15);
  for (const auto& [qid, h] : by_q) EXPECT_LE(h, kLn3 + 1e-12);

  EXPECT_TRUE(severity_entropy_by_question({}).empty());
}
