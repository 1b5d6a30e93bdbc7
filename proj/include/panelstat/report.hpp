#pragma once

// Serialization of analysis results. analysis.json is written canonically:
// object keys sorted, floating-point numbers formatted with 12 significant
// digits, integers kept integral, LF line endings, 2-space indentation.
// Identical results therefore serialize to identical bytes, which the
// determinism tests rely on.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "panelstat/analysis.hpp"
#include "panelstat/svg.hpp"
#include "panelstat/version.hpp"

namespace panelstat {

namespace detail {

inline std::string format_double(double v) {
  if (!std::isfinite(v)) {
    throw std::runtime_error("refusing to serialize non-finite number");
  }
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline void write_canonical(std::ostream& out, const nlohmann::json& node,
                            int depth) {
  const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
  const std::string pad_in(2 * static_cast<std::size_t>(depth + 1), ' ');
  switch (node.type()) {
    case nlohmann::json::value_t::object: {
      if (node.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      std::size_t i = 0;
      for (auto it = node.begin(); it != node.end(); ++it, ++i) {
        out << pad_in << nlohmann::json(it.key()).dump() << ": ";
        write_canonical(out, it.value(), depth + 1);
        if (i + 1 < node.size()) out << ",";
        out << "\n";
      }
      out << pad << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (node.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < node.size(); ++i) {
        out << pad_in;
        write_canonical(out, node[i], depth + 1);
        if (i + 1 < node.size()) out << ",";
        out << "\n";
      }
      out << pad << "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out << format_double(node.get<double>());
      return;
    default:
      // Strings (with escaping), integers, booleans, null.
      out << node.dump();
      return;
  }
}

}  // namespace detail

inline std::string canonical_json(const nlohmann::json& doc) {
  std::ostringstream out;
  detail::write_canonical(out, doc, 0);
  out << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// AnalysisResult -> JSON document

namespace detail {

inline nlohmann::json stat_to_json(const StatResult& s) {
  return {
      {"method", s.method},
      {"statistic", s.statistic},
      {"p_two_sided", s.p_two_sided},
      {"effect_size", s.effect_size},
      {"n_used", s.n_used},
      {"n_excluded", s.n_excluded},
      {"approximation", approximation_name(s.approximation)},
  };
}

inline nlohmann::json ci_to_json(const BootstrapCI& ci) {
  return {
      {"point_estimate", ci.point_estimate}, {"boot_mean", ci.mean},
      {"boot_sd", ci.sd},                    {"ci_low", ci.ci_low},
      {"ci_high", ci.ci_high},               {"reps", ci.reps},
      {"seed", ci.seed},
  };
}

inline nlohmann::json summary_to_json(const DeltaSummary& s) {
  nlohmann::json out = {
      {"count", s.count},       {"negative", s.negative},
      {"zero", s.zero},         {"positive", s.positive},
  };
  if (s.count > 0) {
    out["mean"] = s.mean;
    out["median"] = s.median;
    out["q1"] = s.q1;
    out["q3"] = s.q3;
  }
  return out;
}

inline nlohmann::json delta_set_to_json(const PairedDeltaSet& set,
                                        const DeltaSummary& summary) {
  nlohmann::json deltas = nlohmann::json::array();
  for (const auto& d : set.deltas) {
    deltas.push_back({
        {"question_id", d.question_id},
        {"zero_shot", d.zero_shot},
        {"agentic", d.agentic},
        {"delta", d.delta},
    });
  }
  return {
      {"deltas", deltas},
      {"excluded", set.excluded},
      {"summary", summary_to_json(summary)},
  };
}

}  // namespace detail

inline nlohmann::json analysis_to_json(const AnalysisResult& res) {
  nlohmann::json doc;

  doc["config_echo"] = {
      {"bootstrap_reps", res.config.bootstrap_reps},
      {"rng_seed", res.config.rng_seed},
      {"prng", kPrngId},
      {"bin_edge_low", res.config.bin_edge_low},
      {"bin_edge_high", res.config.bin_edge_high},
      {"anomaly_m_min", res.config.anomaly_m_min},
      {"anomaly_r_max", res.config.anomaly_r_max},
      {"wilcoxon_exact_cutoff", res.config.wilcoxon_exact_cutoff},
      {"alpha", res.config.alpha},
      {"tokenizer_mode",
       res.config.tokenizer_mode == TokenizerMode::kExternalCounts
           ? "external_counts"
           : "whitespace_default"},
  };

  nlohmann::json per_question = nlohmann::json::array();
  for (const auto& o : res.outcomes) {
    nlohmann::json counts;
    for (const auto& [option, n] : o.distribution.counts) {
      counts[option] = n;
    }
    per_question.push_back({
        {"question_id", o.question_id},
        {"condition", condition_name(o.condition)},
        {"counts", counts},
        {"abstain_count", o.distribution.abstain_count},
        {"responders", o.distribution.responders},
        {"entropy", o.entropy},
        {"majority_fraction", o.majority_fraction},
        {"modal_option", o.modal_option},
        {"majority_correct", o.majority_correct},
        {"correct_count", o.correct_count},
        {"robustness", o.robustness},
        {"bin", robustness_bin_name(o.bin)},
    });
  }
  doc["per_question"] = per_question;

  nlohmann::json paired;
  paired["H"] = detail::delta_set_to_json(res.delta_h, res.delta_h_summary);
  paired["M"] = detail::delta_set_to_json(res.delta_m, res.delta_m_summary);
  paired["R"] = detail::delta_set_to_json(res.delta_r, res.delta_r_summary);
  {
    nlohmann::json per_q;
    for (const auto& [qid, cat] : res.shifts) {
      per_q[qid] = shift_category_name(cat);
    }
    paired["M"]["shift_categories"] = {
        {"per_question", per_q},
        {"counts",
         {{"increase_correct", res.shift_counts[0]},
          {"increase_incorrect", res.shift_counts[1]},
          {"decrease", res.shift_counts[2]},
          {"no_change", res.shift_counts[3]}}},
    };
  }
  doc["paired"] = paired;

  nlohmann::json tests;
  for (const auto& [name, stat] : res.tests) {
    tests[name] = detail::stat_to_json(stat);
  }
  doc["tests"] = tests;

  {
    nlohmann::json counts;
    const char* bin_names[3] = {"low", "medium", "high"};
    for (int zs = 0; zs < 3; ++zs) {
      nlohmann::json row;
      for (int ag = 0; ag < 3; ++ag) {
        row[bin_names[ag]] = res.transitions.counts[zs][ag];
      }
      counts[bin_names[zs]] = row;
    }
    nlohmann::json per_q = nlohmann::json::array();
    for (const auto& t : res.transitions.per_question) {
      per_q.push_back({
          {"question_id", t.question_id},
          {"zero_shot", robustness_bin_name(t.zero_shot)},
          {"agentic", robustness_bin_name(t.agentic)},
          {"label", transition_label_name(t.label)},
      });
    }
    doc["transitions"] = {
        {"counts", counts},
        {"label_counts",
         {{"improved", res.transition_label_counts[0]},
          {"decreased", res.transition_label_counts[1]},
          {"no_change", res.transition_label_counts[2]}}},
        {"per_question", per_q},
        {"excluded", res.transitions.excluded},
    };
  }

  nlohmann::json anomalies = nlohmann::json::array();
  for (const auto& f : res.anomalies) {
    anomalies.push_back({
        {"question_id", f.question_id},
        {"condition", condition_name(f.condition)},
        {"majority_fraction", f.majority_fraction},
        {"robustness", f.robustness},
        {"modal_option", f.modal_option},
        {"correct_option", f.correct_option},
    });
  }
  doc["anomalies"] = anomalies;

  nlohmann::json severity;
  if (res.aggregated_severity.empty()) {
    severity["present"] = false;
  } else {
    severity["present"] = true;
    nlohmann::json aggregated = nlohmann::json::array();
    for (const auto& a : res.aggregated_severity) {
      nlohmann::json ratings = nlohmann::json::array();
      for (Severity s : a.ratings) ratings.push_back(severity_name(s));
      aggregated.push_back({
          {"question_id", a.question_id},
          {"option_label", a.option_label},
          {"ratings", ratings},
          {"aggregate", severity_name(a.aggregate)},
          {"rule_used", aggregation_rule_name(a.rule_used)},
      });
    }
    severity["aggregated"] = aggregated;
    if (res.rater_agreement) {
      const auto& ra = *res.rater_agreement;
      nlohmann::json per_item = nlohmann::json::array();
      for (const auto& [key, p] : ra.per_item) {
        per_item.push_back({
            {"question_id", key.first},
            {"option_label", key.second},
            {"agreement", p},
        });
      }
      severity["agreement"] = {
          {"n_options", ra.n_options},
          {"n_raters", ra.n_raters},
          {"percent_agreement", ra.percent_agreement},
          {"per_item", per_item},
          {"fleiss",
           {{"observed", ra.fleiss.observed},
            {"expected", ra.fleiss.expected},
            {"kappa", ra.fleiss.kappa}}},
          {"buckets",
           {{"unanimous", ra.unanimous},
            {"majority", ra.majority},
            {"none", ra.none}}},
      };
    }
    {
      nlohmann::json strata = nlohmann::json::array();
      for (const auto& s : res.profile.strata) {
        const auto props = s.proportions();
        strata.push_back({
            {"stratum", s.stratum},
            {"counts",
             {{"low", s.counts[0]},
              {"moderate", s.counts[1]},
              {"high", s.counts[2]}}},
            {"proportions",
             {{"low", props[0]},
              {"moderate", props[1]},
              {"high", props[2]}}},
            {"unannotated", s.unannotated},
        });
      }
      severity["profile"] = {{"strata", strata},
                             {"empty", res.profile.empty}};
    }
    {
      nlohmann::json counts;
      for (const auto& [subset, row] : res.failure_links.counts) {
        counts[subset] = {{"low", row[0]},
                          {"moderate", row[1]},
                          {"high", row[2]}};
      }
      nlohmann::json unannotated;
      for (const auto& [subset, n] : res.failure_links.unannotated) {
        unannotated[subset] = n;
      }
      severity["failure_links"] = {{"counts", counts},
                                   {"unannotated", unannotated}};
    }
    {
      nlohmann::json by_q;
      for (const auto& [qid, h] : res.severity_entropy_per_question) {
        by_q[qid] = h;
      }
      severity["entropy_per_question"] = by_q;
    }
  }
  doc["severity"] = severity;

  nlohmann::json per_model = nlohmann::json::array();
  for (const auto& m : res.per_model) {
    per_model.push_back({
        {"model_id", m.model_id},
        {"questions", m.questions},
        {"zero_shot",
         {{"correct", m.correct_zero_shot},
          {"ci", detail::ci_to_json(m.ci_zero_shot)}}},
        {"agentic",
         {{"correct", m.correct_agentic},
          {"ci", detail::ci_to_json(m.ci_agentic)}}},
        {"mcnemar", detail::stat_to_json(m.mcnemar)},
        {"mcnemar_p_adjusted", m.mcnemar_p_adjusted},
    });
  }
  doc["per_model"] = per_model;

  nlohmann::json verbosity = nlohmann::json::array();
  for (const auto& v : res.verbosity) {
    verbosity.push_back({
        {"condition", condition_name(v.condition)},
        {"measure", verbosity_measure_name(v.measure)},
        {"n_correct", v.n_correct},
        {"n_incorrect", v.n_incorrect},
        {"median_correct", v.median_correct},
        {"median_incorrect", v.median_incorrect},
        {"test", detail::stat_to_json(v.test)},
    });
  }
  doc["verbosity"] = verbosity;

  doc["warnings"] = res.warnings;
  return doc;
}

// ---------------------------------------------------------------------------
// File emission

namespace detail {

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

inline std::string csv_bool(bool b) { return b ? "true" : "false"; }

}  // namespace detail

// Writes analysis.json plus the per-table CSVs into out_dir. Returns the
// paths written.
inline std::vector<std::filesystem::path> emit_analysis(
    const AnalysisResult& res, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    const auto path = out_dir / name;
    detail::write_file(path, content);
    written.push_back(path);
  };

  emit("analysis.json", canonical_json(analysis_to_json(res)));

  {
    std::ostringstream csv;
    csv << "question_id,condition,entropy,majority_fraction,modal_option,"
           "majority_correct,correct_count,robustness,bin,responders,"
           "abstain_count\n";
    for (const auto& o : res.outcomes) {
      csv << o.question_id << ',' << condition_name(o.condition) << ','
          << detail::format_double(o.entropy) << ','
          << detail::format_double(o.majority_fraction) << ','
          << o.modal_option << ',' << detail::csv_bool(o.majority_correct)
          << ',' << o.correct_count << ','
          << detail::format_double(o.robustness) << ','
          << robustness_bin_name(o.bin) << ',' << o.distribution.responders
          << ',' << o.distribution.abstain_count << "\n";
    }
    emit("per_question.csv", csv.str());
  }

  {
    std::ostringstream csv;
    csv << "question_id,metric,zero_shot,agentic,delta,category\n";
    std::map<std::string, ShiftCategory> shift_of(res.shifts.begin(),
                                                  res.shifts.end());
    std::map<std::string, TransitionLabel> transition_of;
    for (const auto& t : res.transitions.per_question) {
      transition_of[t.question_id] = t.label;
    }
    auto rows = [&](const PairedDeltaSet& set) {
      for (const auto& d : set.deltas) {
        std::string category;
        if (set.metric == Metric::kMajority) {
          auto it = shift_of.find(d.question_id);
          if (it != shift_of.end()) {
            category = shift_category_name(it->second);
          }
        } else if (set.metric == Metric::kRobustness) {
          auto it = transition_of.find(d.question_id);
          if (it != transition_of.end()) {
            category = transition_label_name(it->second);
          }
        }
        csv << d.question_id << ',' << metric_name(set.metric) << ','
            << detail::format_double(d.zero_shot) << ','
            << detail::format_double(d.agentic) << ','
            << detail::format_double(d.delta) << ',' << category << "\n";
      }
    };
    rows(res.delta_h);
    rows(res.delta_m);
    rows(res.delta_r);
    emit("paired_deltas.csv", csv.str());
  }

  {
    std::ostringstream csv;
    csv << "zero_shot_bin,agentic_bin,count\n";
    const char* names[3] = {"low", "medium", "high"};
    for (int zs = 0; zs < 3; ++zs) {
      for (int ag = 0; ag < 3; ++ag) {
        csv << names[zs] << ',' << names[ag] << ','
            << res.transitions.counts[zs][ag] << "\n";
      }
    }
    emit("transitions.csv", csv.str());
  }

  {
    std::ostringstream csv;
    csv << "question_id,condition,majority_fraction,robustness,"
           "modal_option,correct_option\n";
    for (const auto& f : res.anomalies) {
      csv << f.question_id << ',' << condition_name(f.condition) << ','
          << detail::format_double(f.majority_fraction) << ','
          << detail::format_double(f.robustness) << ',' << f.modal_option
          << ',' << f.correct_option << "\n";
    }
    emit("anomalies.csv", csv.str());
  }

  {
    std::ostringstream csv;
    csv << "subset,low,moderate,high,unannotated\n";
    for (const auto& [subset, row] : res.failure_links.counts) {
      std::size_t unann = 0;
      auto it = res.failure_links.unannotated.find(subset);
      if (it != res.failure_links.unannotated.end()) unann = it->second;
      csv << subset << ',' << row[0] << ',' << row[1] << ',' << row[2]
          << ',' << unann << "\n";
    }
    emit("severity_crosstab.csv", csv.str());
  }

  {
    std::ostringstream csv;
    csv << "stratum,low,moderate,high,unannotated,prop_low,prop_moderate,"
           "prop_high\n";
    if (!res.aggregated_severity.empty()) {
      for (const auto& s : res.profile.strata) {
        const auto props = s.proportions();
        csv << s.stratum << ',' << s.counts[0] << ',' << s.counts[1] << ','
            << s.counts[2] << ',' << s.unannotated << ','
            << detail::format_double(props[0]) << ','
            << detail::format_double(props[1]) << ','
            << detail::format_double(props[2]) << "\n";
      }
    }
    emit("severity_profile.csv", csv.str());
  }

  {
    std::ostringstream csv;
    csv << "model_id,questions,zero_shot_correct,zero_shot_accuracy,"
           "zero_shot_ci_low,zero_shot_ci_high,agentic_correct,"
           "agentic_accuracy,agentic_ci_low,agentic_ci_high,"
           "mcnemar_statistic,mcnemar_p,mcnemar_p_adjusted\n";
    for (const auto& m : res.per_model) {
      csv << m.model_id << ',' << m.questions << ',' << m.correct_zero_shot
          << ',' << detail::format_double(m.ci_zero_shot.point_estimate)
          << ',' << detail::format_double(m.ci_zero_shot.ci_low) << ','
          << detail::format_double(m.ci_zero_shot.ci_high) << ','
          << m.correct_agentic << ','
          << detail::format_double(m.ci_agentic.point_estimate) << ','
          << detail::format_double(m.ci_agentic.ci_low) << ','
          << detail::format_double(m.ci_agentic.ci_high) << ','
          << detail::format_double(m.mcnemar.statistic) << ','
          << detail::format_double(m.mcnemar.p_two_sided) << ','
          << detail::format_double(m.mcnemar_p_adjusted) << "\n";
    }
    emit("per_model.csv", csv.str());
  }

  return written;
}

// Renders one chart from a serialized analysis document to a file.
inline void emit_svg(const nlohmann::json& analysis, const std::string& kind,
                     const std::filesystem::path& out_path) {
  const std::string content = render_chart(analysis, kind);
  std::string why;
  if (!svg_structurally_valid(content, &why)) {
    throw std::runtime_error("internal error: emitted SVG invalid: " + why);
  }
  detail::write_file(out_path, content);
}

}  // namespace panelstat
