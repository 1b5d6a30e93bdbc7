#pragma once

// Clinical-severity aggregation: per-option rating consolidation, rater
// agreement reporting, severity profiles of incorrect model outputs, and
// descriptive links between severity and panel failure patterns.

#include <array>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "panelstat/metrics.hpp"
#include "panelstat/panel.hpp"
#include "panelstat/stats.hpp"

namespace panelstat {

enum class AggregationRule { kStrictMajority, kOrdinalMedian };

inline const char* aggregation_rule_name(AggregationRule r) {
  return r == AggregationRule::kStrictMajority ? "strict_majority"
                                               : "ordinal_median";
}

struct AggregatedSeverity {
  std::string question_id;
  std::string option_label;
  std::vector<Severity> ratings;  // rater order as supplied
  Severity aggregate = Severity::kLow;
  AggregationRule rule_used = AggregationRule::kStrictMajority;
};

// Consolidates one option's ratings: a label chosen by a strict majority
// of raters wins; otherwise the ordinal median of the encodings decides,
// with an even-count middle tie rounding up to the higher severity.
inline AggregatedSeverity aggregate_option_severity(
    const std::string& question_id, const std::string& option_label,
    const std::vector<Severity>& ratings) {
  if (ratings.size() < 2) {
    throw std::runtime_error(
        "aggregate_option_severity: need >= 2 ratings for " + question_id +
        "/" + option_label);
  }
  AggregatedSeverity out;
  out.question_id = question_id;
  out.option_label = option_label;
  out.ratings = ratings;

  const std::size_t r = ratings.size();
  std::size_t counts[3] = {0, 0, 0};
  for (Severity s : ratings) ++counts[static_cast<int>(s)];
  for (int level = 0; level < 3; ++level) {
    if (counts[level] * 2 > r) {
      out.aggregate = static_cast<Severity>(level);
      out.rule_used = AggregationRule::kStrictMajority;
      return out;
    }
  }
  std::vector<int> enc;
  enc.reserve(r);
  for (Severity s : ratings) enc.push_back(static_cast<int>(s));
  std::sort(enc.begin(), enc.end());
  int level;
  if (r % 2 == 1) {
    level = enc[r / 2];
  } else {
    // Higher of the two middles when their mean is fractional.
    level = (enc[r / 2 - 1] + enc[r / 2] + 1) / 2;
  }
  out.aggregate = static_cast<Severity>(level);
  out.rule_used = AggregationRule::kOrdinalMedian;
  return out;
}

// Aggregates every rated (question, option): groups the dataset's ratings
// and consolidates each. Output ordered by question_id then option_label.
inline std::vector<AggregatedSeverity> aggregate_all_severity(
    const PanelDataset& ds) {
  std::map<std::pair<std::string, std::string>, std::vector<Severity>>
      grouped;
  for (const auto& rating : ds.severity) {
    grouped[{rating.question_id, rating.option_label}].push_back(
        rating.severity);
  }
  std::vector<AggregatedSeverity> out;
  out.reserve(grouped.size());
  for (const auto& [key, ratings] : grouped) {
    out.push_back(
        aggregate_option_severity(key.first, key.second, ratings));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Severity profile of incorrect model outputs

struct SeverityProfileStratum {
  std::string stratum;  // dataset_tag, or "pooled"
  std::array<std::size_t, 3> counts = {0, 0, 0};  // by severity level
  std::size_t unannotated = 0;  // incorrect outputs on unrated options
  std::size_t annotated_total() const {
    return counts[0] + counts[1] + counts[2];
  }
  // Proportions over annotated incorrect outputs; zeros when empty.
  std::array<double, 3> proportions() const {
    std::array<double, 3> p = {0.0, 0.0, 0.0};
    const std::size_t t = annotated_total();
    if (t == 0) return p;
    for (int i = 0; i < 3; ++i) {
      p[i] = static_cast<double>(counts[i]) / static_cast<double>(t);
    }
    return p;
  }
};

struct SeverityProfile {
  std::vector<SeverityProfileStratum> strata;  // tags sorted, pooled last
  bool empty = false;  // no incorrect outputs at all
};

// Every incorrect, non-abstaining model output (both conditions pooled)
// inherits the aggregate severity of the option it chose; counts are
// reported per dataset_tag and pooled. Outputs whose chosen option has no
// aggregated rating are tallied separately, never guessed.
inline SeverityProfile severity_profile(
    const PanelDataset& ds,
    const std::vector<AggregatedSeverity>& aggregated) {
  std::map<std::pair<std::string, std::string>, Severity> lookup;
  for (const auto& a : aggregated) {
    lookup[{a.question_id, a.option_label}] = a.aggregate;
  }
  std::map<std::string, SeverityProfileStratum> strata;
  SeverityProfileStratum pooled;
  pooled.stratum = "pooled";
  std::size_t incorrect_total = 0;
  for (const auto& r : ds.responses) {
    if (!r.answer) continue;
    auto qit = ds.questions.find(r.question_id);
    if (qit == ds.questions.end()) continue;
    const QuestionSpec& q = qit->second;
    if (*r.answer == q.correct_option) continue;
    ++incorrect_total;
    auto& stratum = strata[q.dataset_tag];
    stratum.stratum = q.dataset_tag;
    auto found = lookup.find({r.question_id, *r.answer});
    if (found == lookup.end()) {
      ++stratum.unannotated;
      ++pooled.unannotated;
    } else {
      ++stratum.counts[static_cast<int>(found->second)];
      ++pooled.counts[static_cast<int>(found->second)];
    }
  }
  SeverityProfile out;
  out.empty = incorrect_total == 0;
  for (auto& [tag, stratum] : strata) out.strata.push_back(stratum);
  out.strata.push_back(pooled);
  return out;
}

// ---------------------------------------------------------------------------
// Rater agreement

struct RaterAgreementReport {
  std::size_t n_options = 0;
  std::size_t n_raters = 0;
  // Fraction of options on which at least a strict majority of raters
  // chose the same label (the unanimous and majority buckets combined).
  double percent_agreement = 0.0;
  std::vector<std::pair<std::pair<std::string, std::string>, double>>
      per_item;  // ((question_id, option_label), P_i), sorted
  FleissResult fleiss;
  std::size_t unanimous = 0;  // all raters agree
  std::size_t majority = 0;   // strict majority but not unanimous
  std::size_t none = 0;       // no strict majority
};

inline RaterAgreementReport rater_agreement_report(const PanelDataset& ds) {
  if (ds.severity.empty()) {
    throw std::runtime_error("rater_agreement_report: no ratings");
  }
  std::set<std::string> rater_set;
  for (const auto& r : ds.severity) rater_set.insert(r.rater_id);
  const std::size_t n_raters = rater_set.size();

  std::map<std::pair<std::string, std::string>,
           std::pair<std::set<std::string>, std::array<std::size_t, 3>>>
      grouped;
  for (const auto& r : ds.severity) {
    auto& entry = grouped[{r.question_id, r.option_label}];
    entry.first.insert(r.rater_id);
    ++entry.second[static_cast<int>(r.severity)];
  }
  for (const auto& [key, entry] : grouped) {
    if (entry.first != rater_set) {
      throw std::runtime_error(
          "rater_agreement_report: ragged coverage on " + key.first + "/" +
          key.second + " (every rater must rate every option in scope)");
    }
  }

  RaterAgreementReport out;
  out.n_options = grouped.size();
  out.n_raters = n_raters;
  std::vector<std::vector<std::size_t>> table;
  for (const auto& [key, entry] : grouped) {
    const auto& counts = entry.second;
    table.push_back({counts[0], counts[1], counts[2]});
    std::size_t top = std::max({counts[0], counts[1], counts[2]});
    if (top == n_raters) {
      ++out.unanimous;
    } else if (top * 2 > n_raters) {
      ++out.majority;
    } else {
      ++out.none;
    }
    out.per_item.push_back(
        {key, per_item_agreement(table.back(), n_raters)});
  }
  out.fleiss = fleiss_kappa(table, n_raters);
  out.percent_agreement =
      static_cast<double>(out.unanimous + out.majority) /
      static_cast<double>(out.n_options);
  return out;
}

// ---------------------------------------------------------------------------
// Severity of failure patterns

// Descriptive cross-tab of failure subsets against the aggregate severity
// of the majority-chosen wrong option. Subsets:
//   incorrect_majority - (question, condition) outcomes whose modal option
//                        is wrong; each distinct (question, option) pair
//                        counted once
//   anomaly            - flagged high-consensus/low-robustness pairs
//   collapse           - questions whose robustness dropped (delta R < 0),
//                        judged on the agentic modal option
struct FailureSeverityCrossTab {
  // subset -> counts by severity level (low, moderate, high)
  std::map<std::string, std::array<std::size_t, 3>> counts;
  // subset -> wrong modal options without an aggregated rating
  std::map<std::string, std::size_t> unannotated;
};

inline FailureSeverityCrossTab link_severity_to_failures(
    const std::vector<AggregatedSeverity>& aggregated,
    const std::vector<QuestionOutcome>& outcomes,
    const std::vector<PairedDelta>& robustness_deltas,
    const std::vector<AnomalyFlag>& anomalies,
    const std::map<std::string, QuestionSpec>& questions) {
  std::map<std::pair<std::string, std::string>, Severity> lookup;
  for (const auto& a : aggregated) {
    lookup[{a.question_id, a.option_label}] = a.aggregate;
  }
  auto correct_of = [&questions](const std::string& qid) -> std::string {
    auto it = questions.find(qid);
    return it == questions.end() ? std::string() : it->second.correct_option;
  };

  // Distinct (question, wrong modal option) pairs per subset.
  std::map<std::string, std::set<std::pair<std::string, std::string>>>
      subsets;
  for (const auto& o : outcomes) {
    if (!o.majority_correct && o.modal_option != correct_of(o.question_id)) {
      subsets["incorrect_majority"].insert(
          {o.question_id, o.modal_option});
    }
  }
  for (const auto& f : anomalies) {
    if (f.modal_option != correct_of(f.question_id)) {
      subsets["anomaly"].insert({f.question_id, f.modal_option});
    }
  }
  std::map<std::string, const QuestionOutcome*> agentic_outcomes;
  for (const auto& o : outcomes) {
    if (o.condition == Condition::kAgentic) {
      agentic_outcomes[o.question_id] = &o;
    }
  }
  for (const auto& d : robustness_deltas) {
    if (d.delta >= 0.0) continue;
    auto it = agentic_outcomes.find(d.question_id);
    if (it == agentic_outcomes.end()) continue;
    const QuestionOutcome& o = *it->second;
    if (o.modal_option != correct_of(o.question_id)) {
      subsets["collapse"].insert({o.question_id, o.modal_option});
    }
  }

  FailureSeverityCrossTab out;
  for (const auto& [name, pairs] : subsets) {
    auto& row = out.counts[name];
    row = {0, 0, 0};
    for (const auto& qo : pairs) {
      auto found = lookup.find(qo);
      if (found == lookup.end()) {
        ++out.unannotated[name];
      } else {
        ++row[static_cast<int>(found->second)];
      }
    }
  }
  return out;
}

// Severity entropy per question over its aggregated incorrect options.
inline std::map<std::string, double> severity_entropy_by_question(
    const std::vector<AggregatedSeverity>& aggregated) {
  std::map<std::string, std::vector<Severity>> grouped;
  for (const auto& a : aggregated) {
    grouped[a.question_id].push_back(a.aggregate);
  }
  std::map<std::string, double> out;
  for (const auto& [qid, labels] : grouped) {
    out[qid] = severity_entropy(labels);
  }
  return out;
}

}  // namespace panelstat
