#pragma once

// Core domain types for panel answer data: questions, model responses under
// the two inference conditions, severity ratings, and the analysis
// configuration. Everything here is a plain value type, immutable by
// convention after construction, so analyses can share datasets across
// threads freely.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace panelstat {

enum class Condition { kZeroShot, kAgentic };

inline const char* condition_name(Condition c) {
  return c == Condition::kZeroShot ? "zero_shot" : "agentic";
}

inline std::optional<Condition> parse_condition(const std::string& s) {
  if (s == "zero_shot") return Condition::kZeroShot;
  if (s == "agentic") return Condition::kAgentic;
  return std::nullopt;
}

constexpr Condition kConditions[2] = {Condition::kZeroShot,
                                      Condition::kAgentic};

// A multiple-choice question. `options` holds the ordered labels (usually
// "A".."E" but any unique strings work); `option_texts`, when non-empty, is
// aligned with `options` and carries the full text of each choice.
struct QuestionSpec {
  std::string question_id;
  std::string dataset_tag;
  std::vector<std::string> options;
  std::vector<std::string> option_texts;  // empty, or same length as options
  std::string correct_option;
};

// One model's recorded answer to one question under one condition.
// `answer == nullopt` means ABSTAIN: the response could not be adjudicated
// to any option. Token counts are optional; they are only required by the
// verbosity analysis in external_counts mode.
struct ResponseRecord {
  std::string question_id;
  std::string model_id;
  Condition condition = Condition::kZeroShot;
  std::optional<std::string> answer;
  std::optional<std::string> raw_text;
  std::optional<std::int64_t> reasoning_tokens;
  std::optional<std::int64_t> summary_tokens;
};

// The serialized spelling of an abstaining answer. Reserved: no question
// may use it as an option label.
inline constexpr const char* kAbstainToken = "ABSTAIN";

// Severity levels for incorrect answer options, ordinal low < moderate <
// high. The integer encoding is fixed project-wide; aggregation relies on
// the ordering.
enum class Severity : int { kLow = 0, kModerate = 1, kHigh = 2 };

inline const char* severity_name(Severity s) {
  switch (s) {
    case Severity::kLow: return "low";
    case Severity::kModerate: return "moderate";
    case Severity::kHigh: return "high";
  }
  return "?";
}

inline std::optional<Severity> parse_severity_label(const std::string& s) {
  if (s == "low" || s == "0") return Severity::kLow;
  if (s == "moderate" || s == "1") return Severity::kModerate;
  if (s == "high" || s == "2") return Severity::kHigh;
  return std::nullopt;
}

// One rater's severity judgment of one incorrect option of one question.
struct SeverityRating {
  std::string question_id;
  std::string option_label;
  std::string rater_id;
  Severity severity = Severity::kLow;
};

// The three-axis answer record (question x model x condition) plus question
// specs. `models` is the panel roster in a fixed order; panel size N is
// models.size().
struct PanelDataset {
  std::map<std::string, QuestionSpec> questions;
  std::vector<std::string> models;
  std::vector<ResponseRecord> responses;
  std::vector<SeverityRating> severity;

  std::size_t panel_size() const { return models.size(); }
};

enum class TokenizerMode { kExternalCounts, kWhitespaceDefault };

// Tuning knobs shared by the whole pipeline. Defaults match the documented
// analysis protocol; every threshold is overridable from the command line.
struct AnalysisConfig {
  int bootstrap_reps = 1000;
  std::uint64_t rng_seed = 0;
  double bin_edge_low = 0.4;    // R below this is "low"
  double bin_edge_high = 0.8;   // R at or above this is "high"
  double anomaly_m_min = 0.8;   // consensus threshold of the anomaly zone
  double anomaly_r_max = 0.4;   // robustness ceiling of the anomaly zone
  int wilcoxon_exact_cutoff = 25;
  double alpha = 0.05;
  TokenizerMode tokenizer_mode = TokenizerMode::kExternalCounts;

  bool valid() const {
    return bootstrap_reps > 0 && bin_edge_low > 0.0 &&
           bin_edge_low < bin_edge_high && bin_edge_high < 1.0 &&
           anomaly_m_min > 0.0 && anomaly_m_min <= 1.0 &&
           anomaly_r_max >= 0.0 && anomaly_r_max < 1.0 &&
           wilcoxon_exact_cutoff >= 0 && alpha > 0.0 && alpha < 1.0;
  }
};

// ---------------------------------------------------------------------------
// Dataset validation

struct ValidationIssue {
  std::string rule;      // stable rule id, e.g. "duplicate-question-id"
  std::string location;  // human-readable locus: question/model/record
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;    // invariant violations
  std::vector<ValidationIssue> warnings;  // completeness gaps

  bool ok() const { return errors.empty(); }
};

// Checks every type invariant plus (question, model, condition)
// completeness. Invariant breaks are errors; missing triples are warnings.
// Pure: same input always yields the identical report.
inline ValidationReport validate_dataset(const PanelDataset& ds) {
  ValidationReport report;
  auto err = [&report](std::string rule, std::string loc, std::string msg) {
    report.errors.push_back(
        {std::move(rule), std::move(loc), std::move(msg)});
  };
  auto warn = [&report](std::string rule, std::string loc, std::string msg) {
    report.warnings.push_back(
        {std::move(rule), std::move(loc), std::move(msg)});
  };

  if (ds.models.size() < 2) {
    err("panel-too-small", "dataset",
        "panel needs at least 2 models, found " +
            std::to_string(ds.models.size()));
  }
  {
    std::set<std::string> seen;
    for (const auto& m : ds.models) {
      if (!seen.insert(m).second) {
        err("duplicate-model-id", "model " + m, "model listed twice");
      }
    }
  }

  for (const auto& [qid, q] : ds.questions) {
    const std::string loc = "question " + qid;
    if (q.question_id != qid) {
      err("question-key-mismatch", loc,
          "map key disagrees with question_id field '" + q.question_id + "'");
    }
    if (q.options.size() < 2 || q.options.size() > 26) {
      err("option-count", loc,
          "needs 2..26 options, found " + std::to_string(q.options.size()));
    }
    std::set<std::string> labels;
    for (const auto& o : q.options) {
      if (!labels.insert(o).second) {
        err("duplicate-option-label", loc, "option label '" + o +
                                               "' repeats");
      }
      if (o == kAbstainToken) {
        err("reserved-option-label", loc,
            "option label 'ABSTAIN' is reserved");
      }
    }
    if (!labels.count(q.correct_option)) {
      err("correct-option-unknown", loc, "correct_option '" +
                                             q.correct_option +
                                             "' is not an option");
    }
    if (!q.option_texts.empty() &&
        q.option_texts.size() != q.options.size()) {
      err("option-texts-misaligned", loc,
          "option_texts length " + std::to_string(q.option_texts.size()) +
              " != options length " + std::to_string(q.options.size()));
    }
  }

  std::set<std::string> model_set(ds.models.begin(), ds.models.end());
  std::set<std::tuple<std::string, std::string, Condition>> triples;
  for (const auto& r : ds.responses) {
    const std::string loc = "response (" + r.question_id + ", " +
                            r.model_id + ", " + condition_name(r.condition) +
                            ")";
    auto qit = ds.questions.find(r.question_id);
    if (qit == ds.questions.end()) {
      err("unknown-question", loc, "no such question_id");
      continue;
    }
    if (!model_set.count(r.model_id)) {
      err("unknown-model", loc, "model not in panel roster");
    }
    if (r.answer) {
      const auto& opts = qit->second.options;
      bool known = false;
      for (const auto& o : opts) known = known || o == *r.answer;
      if (!known) {
        err("unknown-option", loc, "answer '" + *r.answer +
                                       "' is not an option of the question");
      }
    }
    if (r.reasoning_tokens && *r.reasoning_tokens < 0) {
      err("negative-token-count", loc, "reasoning_tokens < 0");
    }
    if (r.summary_tokens && *r.summary_tokens < 0) {
      err("negative-token-count", loc, "summary_tokens < 0");
    }
    if (!triples.insert({r.question_id, r.model_id, r.condition}).second) {
      err("duplicate-response", loc,
          "more than one record for this (question, model, condition)");
    }
  }

  // Completeness: every (question, model, condition) should be present,
  // possibly as ABSTAIN. Gaps are warnings, not errors.
  for (const auto& [qid, q] : ds.questions) {
    for (const auto& m : ds.models) {
      for (Condition c : kConditions) {
        if (!triples.count({qid, m, c})) {
          warn("missing-triple",
               "(" + qid + ", " + m + ", " + condition_name(c) + ")",
               "no response recorded");
        }
      }
    }
  }

  // Severity ratings: must target an existing incorrect option, one rating
  // per (question, option, rater).
  std::set<std::tuple<std::string, std::string, std::string>> rating_keys;
  for (const auto& s : ds.severity) {
    const std::string loc = "severity (" + s.question_id + ", " +
                            s.option_label + ", " + s.rater_id + ")";
    auto qit = ds.questions.find(s.question_id);
    if (qit == ds.questions.end()) {
      err("unknown-question", loc, "no such question_id");
      continue;
    }
    const auto& q = qit->second;
    bool known = false;
    for (const auto& o : q.options) known = known || o == s.option_label;
    if (!known) {
      err("unknown-option", loc, "option '" + s.option_label +
                                     "' is not an option of the question");
    } else if (s.option_label == q.correct_option) {
      err("severity-on-correct-option", loc,
          "severity ratings apply to incorrect options only");
    }
    if (!rating_keys
             .insert({s.question_id, s.option_label, s.rater_id})
             .second) {
      err("duplicate-severity-rating", loc,
          "rater already rated this option");
    }
  }

  return report;
}

}  // namespace panelstat
