#pragma once

// The full analysis pipeline: validates a dataset, computes per-question
// outcomes for both conditions, paired deltas with their tests,
// agreement-shift categories, robustness transitions, anomaly flags,
// consensus-robustness coupling, verbosity comparisons, severity
// aggregation, and per-model accuracy with bootstrap CIs and McNemar
// tests under FDR correction.

#include <atomic>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "panelstat/metrics.hpp"
#include "panelstat/panel.hpp"
#include "panelstat/severity.hpp"
#include "panelstat/stats.hpp"

namespace panelstat {

// Runs fn(0..n-1), possibly across `jobs` worker threads. Each index is
// processed exactly once and writes only its own slot, so results never
// depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

struct VerbosityComparison {
  Condition condition = Condition::kZeroShot;
  VerbosityMeasure measure = VerbosityMeasure::kTotal;
  std::size_t n_correct = 0;
  std::size_t n_incorrect = 0;
  double median_correct = 0.0;
  double median_incorrect = 0.0;
  StatResult test;  // Mann-Whitney, correct vs incorrect lengths
};

struct ModelAccuracy {
  std::string model_id;
  std::size_t questions = 0;
  std::size_t correct_zero_shot = 0;
  std::size_t correct_agentic = 0;
  BootstrapCI ci_zero_shot;
  BootstrapCI ci_agentic;
  StatResult mcnemar;          // b = zero-shot-only, c = agentic-only
  double mcnemar_p_adjusted = 1.0;  // Benjamini-Hochberg across models
};

struct AnalysisResult {
  AnalysisConfig config;

  // One outcome per (question, condition), ordered by question_id with
  // zero_shot before agentic. Question-condition pairs with no expressed
  // decisions are absent (listed in `skipped_pairs`).
  std::vector<QuestionOutcome> outcomes;
  std::vector<std::pair<std::string, Condition>> skipped_pairs;

  PairedDeltaSet delta_h, delta_m, delta_r;
  DeltaSummary delta_h_summary, delta_m_summary, delta_r_summary;

  // Agreement-shift category per question (from the M deltas), plus
  // counts indexed by ShiftCategory.
  std::vector<std::pair<std::string, ShiftCategory>> shifts;
  std::size_t shift_counts[4] = {0, 0, 0, 0};

  BinTransitionTable transitions;
  std::size_t transition_label_counts[3] = {0, 0, 0};

  std::vector<AnomalyFlag> anomalies;

  // Named hypothesis tests. Keys:
  //   delta_H_wilcoxon, delta_M_wilcoxon, delta_R_wilcoxon,
  //   coupling_zero_shot_spearman, coupling_agentic_spearman,
  //   verbosity_<measure>_<condition>_mwu
  std::map<std::string, StatResult> tests;

  std::vector<VerbosityComparison> verbosity;

  // Severity block; only populated when the dataset carries ratings.
  std::vector<AggregatedSeverity> aggregated_severity;
  std::optional<RaterAgreementReport> rater_agreement;
  SeverityProfile profile;
  FailureSeverityCrossTab failure_links;
  std::map<std::string, double> severity_entropy_per_question;

  std::vector<ModelAccuracy> per_model;

  std::vector<std::string> warnings;
};

namespace detail {

inline const char* condition_suffix(Condition c) {
  return c == Condition::kZeroShot ? "zero_shot" : "agentic";
}

}  // namespace detail

inline AnalysisResult run_analysis(const PanelDataset& ds,
                                   const AnalysisConfig& cfg,
                                   int jobs = 1) {
  if (!cfg.valid()) {
    throw std::runtime_error("invalid analysis configuration");
  }
  const ValidationReport report = validate_dataset(ds);
  if (!report.ok()) {
    throw std::runtime_error("dataset failed validation: " +
                             report.errors.front().rule + " at " +
                             report.errors.front().location + ": " +
                             report.errors.front().message);
  }

  AnalysisResult res;
  res.config = cfg;
  for (const auto& w : report.warnings) {
    res.warnings.push_back(w.rule + " at " + w.location);
  }

  // --- Per-question outcomes, both conditions, in parallel slots.
  std::vector<std::string> qids;
  qids.reserve(ds.questions.size());
  for (const auto& [qid, q] : ds.questions) qids.push_back(qid);

  struct Slot {
    std::optional<QuestionOutcome> zs, ag;
  };
  std::vector<Slot> slots(qids.size());
  parallel_for(qids.size(), jobs, [&](std::size_t i) {
    try {
      slots[i].zs = question_outcome(ds, qids[i], Condition::kZeroShot, cfg);
    } catch (const std::runtime_error&) {
    }
    try {
      slots[i].ag = question_outcome(ds, qids[i], Condition::kAgentic, cfg);
    } catch (const std::runtime_error&) {
    }
  });
  for (std::size_t i = 0; i < qids.size(); ++i) {
    if (slots[i].zs) {
      res.outcomes.push_back(*slots[i].zs);
    } else {
      res.skipped_pairs.push_back({qids[i], Condition::kZeroShot});
    }
    if (slots[i].ag) {
      res.outcomes.push_back(*slots[i].ag);
    } else {
      res.skipped_pairs.push_back({qids[i], Condition::kAgentic});
    }
  }
  for (const auto& [qid, cond] : res.skipped_pairs) {
    res.warnings.push_back(std::string("no expressed decisions for (") +
                           qid + ", " + condition_name(cond) + ")");
  }

  // --- Paired deltas and their summaries, from the outcome slots.
  auto build_deltas = [&](Metric metric) {
    PairedDeltaSet set;
    set.metric = metric;
    for (std::size_t i = 0; i < qids.size(); ++i) {
      if (!slots[i].zs || !slots[i].ag) {
        set.excluded.push_back(qids[i]);
        continue;
      }
      PairedDelta d;
      d.question_id = qids[i];
      d.metric = metric;
      d.zero_shot = detail::metric_value(*slots[i].zs, metric);
      d.agentic = detail::metric_value(*slots[i].ag, metric);
      d.delta = d.agentic - d.zero_shot;
      set.deltas.push_back(std::move(d));
    }
    return set;
  };
  res.delta_h = build_deltas(Metric::kEntropy);
  res.delta_m = build_deltas(Metric::kMajority);
  res.delta_r = build_deltas(Metric::kRobustness);
  res.delta_h_summary = summarize_deltas(res.delta_h.deltas);
  res.delta_m_summary = summarize_deltas(res.delta_m.deltas);
  res.delta_r_summary = summarize_deltas(res.delta_r.deltas);

  // --- Agreement-shift categories (correctness judged on the agentic
  // majority).
  {
    std::map<std::string, const QuestionOutcome*> agentic;
    for (std::size_t i = 0; i < qids.size(); ++i) {
      if (slots[i].ag) agentic[qids[i]] = &*slots[i].ag;
    }
    for (const auto& d : res.delta_m.deltas) {
      const ShiftCategory cat = categorize_agreement_shift(
          d, agentic.at(d.question_id)->majority_correct);
      res.shifts.push_back({d.question_id, cat});
      ++res.shift_counts[static_cast<int>(cat)];
    }
  }

  // --- Robustness transitions.
  res.transitions = bin_transitions(ds, cfg);
  for (const auto& t : res.transitions.per_question) {
    ++res.transition_label_counts[static_cast<int>(t.label)];
  }

  // --- Anomalies.
  res.anomalies = flag_anomalies(res.outcomes, ds.questions, cfg);

  // --- Paired tests on the deltas.
  auto add_wilcoxon = [&](const char* key, const PairedDeltaSet& set) {
    std::vector<double> deltas;
    deltas.reserve(set.deltas.size());
    for (const auto& d : set.deltas) deltas.push_back(d.delta);
    try {
      res.tests[key] = wilcoxon_signed_rank(deltas, cfg);
    } catch (const std::runtime_error& e) {
      res.warnings.push_back(std::string(key) + " skipped: " + e.what());
    }
  };
  add_wilcoxon("delta_H_wilcoxon", res.delta_h);
  add_wilcoxon("delta_M_wilcoxon", res.delta_m);
  add_wilcoxon("delta_R_wilcoxon", res.delta_r);

  // --- Consensus-robustness coupling per condition.
  for (Condition cond : kConditions) {
    std::vector<double> m_values, r_values;
    for (const auto& o : res.outcomes) {
      if (o.condition != cond) continue;
      m_values.push_back(o.majority_fraction);
      r_values.push_back(o.robustness);
    }
    const std::string key = std::string("coupling_") +
                            detail::condition_suffix(cond) + "_spearman";
    try {
      res.tests[key] = spearman_rho(m_values, r_values);
    } catch (const std::runtime_error& e) {
      res.warnings.push_back(key + " skipped: " + e.what());
    }
  }

  // --- Verbosity comparisons, within condition.
  for (Condition cond : kConditions) {
    for (VerbosityMeasure measure :
         {VerbosityMeasure::kReasoning, VerbosityMeasure::kSummary,
          VerbosityMeasure::kTotal}) {
      VerbositySamples samples;
      try {
        samples = verbosity_samples(ds, cond, measure, cfg);
      } catch (const std::runtime_error&) {
        continue;  // measure not recorded; nothing to report
      }
      VerbosityComparison v;
      v.condition = cond;
      v.measure = measure;
      v.n_correct = samples.correct.size();
      v.n_incorrect = samples.incorrect.size();
      if (samples.correct.empty() || samples.incorrect.empty()) {
        res.warnings.push_back(
            std::string("verbosity ") + verbosity_measure_name(measure) +
            " (" + condition_name(cond) +
            "): one side empty, test skipped");
        continue;
      }
      v.median_correct = median(samples.correct);
      v.median_incorrect = median(samples.incorrect);
      v.test = mann_whitney_u(samples.correct, samples.incorrect);
      const std::string key = std::string("verbosity_") +
                              verbosity_measure_name(measure) + "_" +
                              detail::condition_suffix(cond) + "_mwu";
      res.tests[key] = v.test;
      res.verbosity.push_back(std::move(v));
    }
  }

  // --- Severity block.
  if (!ds.severity.empty()) {
    res.aggregated_severity = aggregate_all_severity(ds);
    try {
      res.rater_agreement = rater_agreement_report(ds);
    } catch (const std::runtime_error& e) {
      res.warnings.push_back(std::string("rater agreement skipped: ") +
                             e.what());
    }
    res.profile = severity_profile(ds, res.aggregated_severity);
    res.failure_links = link_severity_to_failures(
        res.aggregated_severity, res.outcomes, res.delta_r.deltas,
        res.anomalies, ds.questions);
    res.severity_entropy_per_question =
        severity_entropy_by_question(res.aggregated_severity);
  }

  // --- Per-model accuracy, bootstrap CIs, and McNemar with FDR.
  {
    // Index answers by (model, condition, question).
    std::map<std::tuple<std::string, Condition, std::string>,
             const ResponseRecord*>
        by_key;
    for (const auto& r : ds.responses) {
      by_key[{r.model_id, r.condition, r.question_id}] = &r;
    }
    res.per_model.resize(ds.models.size());
    parallel_for(ds.models.size(), jobs, [&](std::size_t mi) {
      const std::string& model = ds.models[mi];
      ModelAccuracy acc;
      acc.model_id = model;
      acc.questions = qids.size();
      std::vector<int> zs_flags, ag_flags;
      zs_flags.reserve(qids.size());
      ag_flags.reserve(qids.size());
      std::size_t b = 0, c = 0;
      for (const auto& qid : qids) {
        const std::string& correct = ds.questions.at(qid).correct_option;
        auto flag_of = [&](Condition cond) {
          auto it = by_key.find({model, cond, qid});
          if (it == by_key.end() || !it->second->answer) return 0;
          return *it->second->answer == correct ? 1 : 0;
        };
        const int zf = flag_of(Condition::kZeroShot);
        const int af = flag_of(Condition::kAgentic);
        zs_flags.push_back(zf);
        ag_flags.push_back(af);
        if (zf == 1 && af == 0) ++b;
        if (zf == 0 && af == 1) ++c;
      }
      acc.correct_zero_shot = 0;
      acc.correct_agentic = 0;
      for (int f : zs_flags) acc.correct_zero_shot += f;
      for (int f : ag_flags) acc.correct_agentic += f;
      auto [ci_zs, ci_ag] =
          paired_bootstrap_accuracy(zs_flags, ag_flags, cfg);
      acc.ci_zero_shot = ci_zs;
      acc.ci_agentic = ci_ag;
      acc.mcnemar = mcnemar_exact(b, c);
      res.per_model[mi] = std::move(acc);
    });
    std::vector<double> raw_p;
    raw_p.reserve(res.per_model.size());
    for (const auto& m : res.per_model) {
      raw_p.push_back(m.mcnemar.p_two_sided);
    }
    const std::vector<double> adjusted = benjamini_hochberg(raw_p);
    for (std::size_t i = 0; i < res.per_model.size(); ++i) {
      res.per_model[i].mcnemar_p_adjusted = adjusted[i];
    }
  }

  return res;
}

}  // namespace panelstat
