#pragma once

// Per-question collective-behavior metrics: the panel's answer
// distribution, decision entropy, majority fraction, robustness of
// correctness, paired condition deltas, agreement-shift categories,
// robustness-bin transitions, anomaly flags, verbosity samples, and
// severity entropy.

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "panelstat/ingest.hpp"
#include "panelstat/numeric.hpp"
#include "panelstat/panel.hpp"

namespace panelstat {

// Empirical answer distribution of the panel on one question under one
// condition. `counts` holds only options that received at least one vote;
// `abstain_count` covers explicit abstentions plus missing responses, so
// counts + abstains always total the panel size.
struct AnswerDistribution {
  std::string question_id;
  Condition condition = Condition::kZeroShot;
  std::vector<std::string> option_order;  // the question's options
  std::map<std::string, std::size_t> counts;
  std::size_t abstain_count = 0;
  std::size_t responders = 0;   // panel_size - abstain_count
  std::size_t panel_size = 0;

  double probability(const std::string& option) const {
    auto it = counts.find(option);
    if (it == counts.end() || responders == 0) return 0.0;
    return static_cast<double>(it->second) /
           static_cast<double>(responders);
  }
};

enum class RobustnessBin : int { kLow = 0, kMedium = 1, kHigh = 2 };

inline const char* robustness_bin_name(RobustnessBin b) {
  switch (b) {
    case RobustnessBin::kLow: return "low";
    case RobustnessBin::kMedium: return "medium";
    case RobustnessBin::kHigh: return "high";
  }
  return "?";
}

// Everything we measure about one (question, condition) pair.
struct QuestionOutcome {
  std::string question_id;
  Condition condition = Condition::kZeroShot;
  AnswerDistribution distribution;
  double entropy = 0.0;            // nats
  double majority_fraction = 0.0;  // share of responders on the mode
  std::string modal_option;
  bool majority_correct = false;
  std::size_t correct_count = 0;
  double robustness = 0.0;         // correct_count / panel_size
  RobustnessBin bin = RobustnessBin::kLow;
};

enum class Metric { kEntropy, kMajority, kRobustness };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::kEntropy: return "H";
    case Metric::kMajority: return "M";
    case Metric::kRobustness: return "R";
  }
  return "?";
}

// Agentic-minus-zero-shot difference of one metric on one question.
struct PairedDelta {
  std::string question_id;
  Metric metric = Metric::kEntropy;
  double zero_shot = 0.0;
  double agentic = 0.0;
  double delta = 0.0;  // agentic - zero_shot
};

struct DeltaSummary {
  std::size_t count = 0;
  std::size_t negative = 0;
  std::size_t zero = 0;
  std::size_t positive = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;  // 25th percentile
  double q3 = 0.0;  // 75th percentile
};

struct PairedDeltaSet {
  Metric metric = Metric::kEntropy;
  std::vector<PairedDelta> deltas;    // question_id order
  std::vector<std::string> excluded;  // questions missing a usable condition
};

// ---------------------------------------------------------------------------

inline AnswerDistribution answer_distribution(const PanelDataset& ds,
                                              const std::string& question_id,
                                              Condition condition) {
  auto qit = ds.questions.find(question_id);
  if (qit == ds.questions.end()) {
    throw std::runtime_error("answer_distribution: unknown question '" +
                             question_id + "'");
  }
  AnswerDistribution dist;
  dist.question_id = question_id;
  dist.condition = condition;
  dist.option_order = qit->second.options;
  dist.panel_size = ds.panel_size();
  for (const auto& r : ds.responses) {
    if (r.question_id != question_id || r.condition != condition) continue;
    if (r.answer) ++dist.counts[*r.answer];
  }
  std::size_t votes = 0;
  for (const auto& [o, n] : dist.counts) votes += n;
  dist.responders = votes;
  dist.abstain_count = dist.panel_size - votes;
  if (dist.responders == 0) {
    throw std::runtime_error(
        "no decisions to analyze for question '" + question_id +
        "' under condition " + condition_name(condition));
  }
  return dist;
}

// Shannon entropy of the expressed decisions, in nats. Options nobody
// chose contribute zero. Range [0, ln(option count)].
inline double decision_entropy(const AnswerDistribution& dist) {
  if (dist.responders == 0) {
    throw std::runtime_error("decision_entropy: no responders");
  }
  double h = 0.0;
  for (const auto& [option, n] : dist.counts) {
    if (n == 0) continue;
    const double p =
        static_cast<double>(n) / static_cast<double>(dist.responders);
    h -= p * std::log(p);
  }
  // Clamp the -0.0 that falls out of a unanimous panel.
  return h == 0.0 ? 0.0 : h;
}

// Modal option and its share of responders. Ties go to the option that
// comes first in the question's option order.
inline std::pair<std::string, double> majority(
    const AnswerDistribution& dist) {
  if (dist.responders == 0) {
    throw std::runtime_error("majority: no responders");
  }
  std::string modal;
  std::size_t best = 0;
  for (const auto& option : dist.option_order) {
    auto it = dist.counts.find(option);
    const std::size_t n = it == dist.counts.end() ? 0 : it->second;
    if (n > best) {
      best = n;
      modal = option;
    }
  }
  return {modal, static_cast<double>(best) /
                     static_cast<double>(dist.responders)};
}

// Count and fraction of the full panel that answered correctly. Abstaining
// or missing responses count against correctness; the denominator is the
// panel size, not the responder count.
inline std::pair<std::size_t, double> robustness(
    const PanelDataset& ds, const std::string& question_id,
    Condition condition) {
  auto qit = ds.questions.find(question_id);
  if (qit == ds.questions.end()) {
    throw std::runtime_error("robustness: unknown question '" +
                             question_id + "'");
  }
  std::size_t correct = 0;
  for (const auto& r : ds.responses) {
    if (r.question_id != question_id || r.condition != condition) continue;
    if (r.answer && *r.answer == qit->second.correct_option) ++correct;
  }
  const std::size_t n = ds.panel_size();
  return {correct,
          n == 0 ? 0.0
                 : static_cast<double>(correct) / static_cast<double>(n)};
}

inline RobustnessBin robustness_bin(double r, const AnalysisConfig& cfg) {
  if (r < cfg.bin_edge_low) return RobustnessBin::kLow;
  if (r < cfg.bin_edge_high) return RobustnessBin::kMedium;
  return RobustnessBin::kHigh;
}

inline QuestionOutcome question_outcome(const PanelDataset& ds,
                                        const std::string& question_id,
                                        Condition condition,
                                        const AnalysisConfig& cfg) {
  QuestionOutcome out;
  out.question_id = question_id;
  out.condition = condition;
  out.distribution = answer_distribution(ds, question_id, condition);
  out.entropy = decision_entropy(out.distribution);
  auto [modal, m] = majority(out.distribution);
  out.modal_option = modal;
  out.majority_fraction = m;
  out.majority_correct =
      modal == ds.questions.at(question_id).correct_option;
  auto [correct, r] = robustness(ds, question_id, condition);
  out.correct_count = correct;
  out.robustness = r;
  out.bin = robustness_bin(r, cfg);
  return out;
}

namespace detail {

inline double metric_value(const QuestionOutcome& o, Metric m) {
  switch (m) {
    case Metric::kEntropy: return o.entropy;
    case Metric::kMajority: return o.majority_fraction;
    case Metric::kRobustness: return o.robustness;
  }
  return 0.0;
}

}  // namespace detail

// Paired agentic-minus-zero-shot deltas of one metric over all questions.
// Questions where either condition has no expressed decisions are excluded
// and reported, not silently dropped.
inline PairedDeltaSet paired_deltas(const PanelDataset& ds, Metric metric,
                                    const AnalysisConfig& cfg) {
  PairedDeltaSet out;
  out.metric = metric;
  for (const auto& [qid, q] : ds.questions) {
    QuestionOutcome zs, ag;
    try {
      zs = question_outcome(ds, qid, Condition::kZeroShot, cfg);
      ag = question_outcome(ds, qid, Condition::kAgentic, cfg);
    } catch (const std::runtime_error&) {
      out.excluded.push_back(qid);
      continue;
    }
    PairedDelta d;
    d.question_id = qid;
    d.metric = metric;
    d.zero_shot = detail::metric_value(zs, metric);
    d.agentic = detail::metric_value(ag, metric);
    d.delta = d.agentic - d.zero_shot;
    out.deltas.push_back(std::move(d));
  }
  return out;
}

inline DeltaSummary summarize_deltas(const std::vector<PairedDelta>& deltas) {
  DeltaSummary s;
  s.count = deltas.size();
  if (deltas.empty()) return s;
  std::vector<double> values;
  values.reserve(deltas.size());
  for (const auto& d : deltas) {
    values.push_back(d.delta);
    if (d.delta < 0.0) {
      ++s.negative;
    } else if (d.delta > 0.0) {
      ++s.positive;
    } else {
      ++s.zero;
    }
  }
  s.mean = mean(values);
  std::sort(values.begin(), values.end());
  s.median = quantile_sorted(values, 0.5);
  s.q1 = quantile_sorted(values, 0.25);
  s.q3 = quantile_sorted(values, 0.75);
  return s;
}

// ---------------------------------------------------------------------------
// Agreement shifts and robustness transitions

enum class ShiftCategory {
  kIncreaseCorrect,
  kIncreaseIncorrect,
  kDecrease,
  kNoChange,
};

inline const char* shift_category_name(ShiftCategory c) {
  switch (c) {
    case ShiftCategory::kIncreaseCorrect: return "increase_correct";
    case ShiftCategory::kIncreaseIncorrect: return "increase_incorrect";
    case ShiftCategory::kDecrease: return "decrease";
    case ShiftCategory::kNoChange: return "no_change";
  }
  return "?";
}

// Classifies a majority-fraction delta. Correctness is judged on the
// agentic-condition majority: the category describes where the panel ended
// up, not where it started.
inline ShiftCategory categorize_agreement_shift(
    const PairedDelta& delta, bool agentic_majority_correct) {
  if (delta.metric != Metric::kMajority) {
    throw std::invalid_argument(
        "categorize_agreement_shift: delta must be over M");
  }
  if (delta.delta > 0.0) {
    return agentic_majority_correct ? ShiftCategory::kIncreaseCorrect
                                    : ShiftCategory::kIncreaseIncorrect;
  }
  if (delta.delta < 0.0) return ShiftCategory::kDecrease;
  return ShiftCategory::kNoChange;
}

enum class TransitionLabel { kImproved, kDecreased, kNoChange };

inline const char* transition_label_name(TransitionLabel t) {
  switch (t) {
    case TransitionLabel::kImproved: return "improved";
    case TransitionLabel::kDecreased: return "decreased";
    case TransitionLabel::kNoChange: return "no_change";
  }
  return "?";
}

struct BinTransition {
  std::string question_id;
  RobustnessBin zero_shot = RobustnessBin::kLow;
  RobustnessBin agentic = RobustnessBin::kLow;
  TransitionLabel label = TransitionLabel::kNoChange;
};

struct BinTransitionTable {
  // counts[zero-shot bin][agentic bin], low/medium/high in index order.
  std::size_t counts[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  std::vector<BinTransition> per_question;   // question_id order
  std::vector<std::string> excluded;
};

inline BinTransitionTable bin_transitions(const PanelDataset& ds,
                                          const AnalysisConfig& cfg) {
  BinTransitionTable out;
  for (const auto& [qid, q] : ds.questions) {
    std::pair<std::size_t, double> zs, ag;
    try {
      zs = robustness(ds, qid, Condition::kZeroShot);
      ag = robustness(ds, qid, Condition::kAgentic);
    } catch (const std::runtime_error&) {
      out.excluded.push_back(qid);
      continue;
    }
    BinTransition t;
    t.question_id = qid;
    t.zero_shot = robustness_bin(zs.second, cfg);
    t.agentic = robustness_bin(ag.second, cfg);
    if (static_cast<int>(t.agentic) > static_cast<int>(t.zero_shot)) {
      t.label = TransitionLabel::kImproved;
    } else if (static_cast<int>(t.agentic) < static_cast<int>(t.zero_shot)) {
      t.label = TransitionLabel::kDecreased;
    } else {
      t.label = TransitionLabel::kNoChange;
    }
    ++out.counts[static_cast<int>(t.zero_shot)][static_cast<int>(t.agentic)];
    out.per_question.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// High-consensus / low-robustness anomalies

struct AnomalyFlag {
  std::string question_id;
  Condition condition = Condition::kZeroShot;
  double majority_fraction = 0.0;
  double robustness = 0.0;
  std::string modal_option;
  std::string correct_option;
};

// The coordinated-but-incorrect zone: strong consensus (M at or above the
// threshold) on a question most of the panel gets wrong (R below the
// ceiling).
inline std::vector<AnomalyFlag> flag_anomalies(
    const std::vector<QuestionOutcome>& outcomes,
    const std::map<std::string, QuestionSpec>& questions,
    const AnalysisConfig& cfg) {
  std::vector<AnomalyFlag> flags;
  for (const auto& o : outcomes) {
    if (o.majority_fraction >= cfg.anomaly_m_min &&
        o.robustness < cfg.anomaly_r_max) {
      AnomalyFlag f;
      f.question_id = o.question_id;
      f.condition = o.condition;
      f.majority_fraction = o.majority_fraction;
      f.robustness = o.robustness;
      f.modal_option = o.modal_option;
      auto qit = questions.find(o.question_id);
      if (qit != questions.end()) f.correct_option = qit->second.correct_option;
      flags.push_back(std::move(f));
    }
  }
  return flags;
}

// ---------------------------------------------------------------------------
// Verbosity

enum class VerbosityMeasure { kReasoning, kSummary, kTotal };

inline const char* verbosity_measure_name(VerbosityMeasure m) {
  switch (m) {
    case VerbosityMeasure::kReasoning: return "reasoning";
    case VerbosityMeasure::kSummary: return "summary";
    case VerbosityMeasure::kTotal: return "total";
  }
  return "?";
}

struct VerbositySamples {
  Condition condition = Condition::kZeroShot;
  VerbosityMeasure measure = VerbosityMeasure::kTotal;
  std::vector<double> correct;    // lengths of correct responses
  std::vector<double> incorrect;  // lengths of incorrect responses
  std::size_t abstain_excluded = 0;
  std::size_t missing_measure_excluded = 0;
};

// Splits response lengths by correctness, within one condition. In
// external_counts mode the length comes from the recorded token counts
// (total = reasoning + summary; rows lacking a needed count are excluded
// and counted). In whitespace_default mode the total measure is the
// whitespace token count of raw_text; reasoning and summary still require
// recorded counts since the split is not recoverable from raw text.
inline VerbositySamples verbosity_samples(const PanelDataset& ds,
                                          Condition condition,
                                          VerbosityMeasure measure,
                                          const AnalysisConfig& cfg) {
  VerbositySamples out;
  out.condition = condition;
  out.measure = measure;
  for (const auto& r : ds.responses) {
    if (r.condition != condition) continue;
    if (!r.answer) {
      ++out.abstain_excluded;
      continue;
    }
    std::optional<double> length;
    const bool whitespace_total =
        cfg.tokenizer_mode == TokenizerMode::kWhitespaceDefault &&
        measure == VerbosityMeasure::kTotal;
    if (whitespace_total) {
      if (r.raw_text) {
        length = static_cast<double>(whitespace_token_count(*r.raw_text));
      }
    } else {
      switch (measure) {
        case VerbosityMeasure::kReasoning:
          if (r.reasoning_tokens) {
            length = static_cast<double>(*r.reasoning_tokens);
          }
          break;
        case VerbosityMeasure::kSummary:
          if (r.summary_tokens) {
            length = static_cast<double>(*r.summary_tokens);
          }
          break;
        case VerbosityMeasure::kTotal:
          if (r.reasoning_tokens && r.summary_tokens) {
            length = static_cast<double>(*r.reasoning_tokens +
                                         *r.summary_tokens);
          }
          break;
      }
    }
    if (!length) {
      ++out.missing_measure_excluded;
      continue;
    }
    auto qit = ds.questions.find(r.question_id);
    if (qit == ds.questions.end()) continue;
    if (*r.answer == qit->second.correct_option) {
      out.correct.push_back(*length);
    } else {
      out.incorrect.push_back(*length);
    }
  }
  if (out.correct.empty() && out.incorrect.empty()) {
    throw std::runtime_error(
        std::string("verbosity_samples: measure '") +
        verbosity_measure_name(measure) + "' unavailable for all rows");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Severity entropy

// Shannon entropy (nats) of the aggregated severity labels across one
// question's annotated incorrect options. Bounded by ln 3.
inline double severity_entropy(const std::vector<Severity>& aggregates) {
  if (aggregates.empty()) {
    throw std::runtime_error("severity_entropy: no annotated options");
  }
  std::size_t counts[3] = {0, 0, 0};
  for (Severity s : aggregates) ++counts[static_cast<int>(s)];
  double h = 0.0;
  const double total = static_cast<double>(aggregates.size());
  for (std::size_t n : counts) {
    if (n == 0) continue;
    const double p = static_cast<double>(n) / total;
    h -= p * std::log(p);
  }
  return h == 0.0 ? 0.0 : h;
}

}  // namespace panelstat
