#pragma once

// Command-line front end. Subcommands:
//   analyze     run the full pipeline over recorded data and write reports
//   adjudicate  turn free-text raw responses into an answer file
//   simulate    generate a synthetic two-condition panel dataset
//   report      re-render SVG charts from an existing analysis.json
//
// Exit codes: 0 success, 1 data errors, 2 usage errors. All diagnostics go
// to standard error. No environment variables are consulted; behavior is
// controlled exclusively by flags and input files, and all randomness
// derives from --seed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "panelstat/analysis.hpp"
#include "panelstat/ingest.hpp"
#include "panelstat/report.hpp"
#include "panelstat/simulate.hpp"
#include "panelstat/version.hpp"

namespace panelstat {

namespace clidetail {

inline nlohmann::json question_to_json(const QuestionSpec& q) {
  nlohmann::json obj = {
      {"question_id", q.question_id},
      {"dataset_tag", q.dataset_tag},
      {"options", q.options},
      {"correct_option", q.correct_option},
  };
  if (!q.option_texts.empty()) obj["option_texts"] = q.option_texts;
  return obj;
}

inline nlohmann::json response_to_json(const ResponseRecord& r) {
  nlohmann::json obj = {
      {"question_id", r.question_id},
      {"model_id", r.model_id},
      {"condition", condition_name(r.condition)},
      {"answer", r.answer ? *r.answer : std::string(kAbstainToken)},
  };
  if (r.raw_text) obj["raw_text"] = *r.raw_text;
  if (r.reasoning_tokens) obj["reasoning_tokens"] = *r.reasoning_tokens;
  if (r.summary_tokens) obj["summary_tokens"] = *r.summary_tokens;
  return obj;
}

inline void write_lines(const std::filesystem::path& path,
                        const std::vector<nlohmann::json>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& obj : lines) out << obj.dump() << "\n";
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

struct AnalyzeArgs {
  std::string questions, responses, severity, out;
  std::uint64_t seed = 0;
  int bootstrap = 1000;
  std::string bins = "0.4,0.8";
  double anomaly_m = 0.8;
  double anomaly_r = 0.4;
  int exact_cutoff = 25;
  double alpha = 0.05;
  std::string tokenizer = "external_counts";
  bool strict = false;
  int jobs = 1;
};

inline int cmd_analyze(const AnalyzeArgs& args) {
  AnalysisConfig cfg;
  cfg.bootstrap_reps = args.bootstrap;
  cfg.rng_seed = args.seed;
  if (std::sscanf(args.bins.c_str(), "%lf,%lf", &cfg.bin_edge_low,
                  &cfg.bin_edge_high) != 2) {
    std::cerr << "error: --bins expects two comma-separated numbers\n";
    return 2;
  }
  cfg.anomaly_m_min = args.anomaly_m;
  cfg.anomaly_r_max = args.anomaly_r;
  cfg.wilcoxon_exact_cutoff = args.exact_cutoff;
  cfg.alpha = args.alpha;
  cfg.tokenizer_mode = args.tokenizer == "whitespace_default"
                           ? TokenizerMode::kWhitespaceDefault
                           : TokenizerMode::kExternalCounts;
  if (!cfg.valid()) {
    std::cerr << "error: invalid analysis configuration "
                 "(check --bins, --anomaly-m, --anomaly-r, --bootstrap, "
                 "--alpha)\n";
    return 2;
  }

  try {
    auto questions = parse_questions(args.questions);
    auto responses = parse_responses(args.responses, questions);
    PanelDataset ds = build_matrix(std::move(questions),
                                   std::move(responses));
    if (!args.severity.empty()) {
      ds.severity = parse_severity(args.severity, ds.questions);
    }

    const ValidationReport report = validate_dataset(ds);
    for (const auto& e : report.errors) {
      std::cerr << "error: " << e.rule << " at " << e.location << ": "
                << e.message << "\n";
    }
    if (!report.ok()) return 1;
    if (args.strict && !report.warnings.empty()) {
      for (const auto& w : report.warnings) {
        std::cerr << "strict: " << w.rule << " at " << w.location << ": "
                  << w.message << "\n";
      }
      std::cerr << "error: --strict treats " << report.warnings.size()
                << " completeness warning(s) as failures\n";
      return 1;
    }

    const AnalysisResult result = run_analysis(ds, cfg, args.jobs);
    const auto written = emit_analysis(result, args.out);
    const nlohmann::json doc = analysis_to_json(result);
    for (const auto& kind : chart_kinds()) {
      try {
        emit_svg(doc, kind, std::filesystem::path(args.out) /
                                (kind + ".svg"));
      } catch (const std::runtime_error& e) {
        std::cerr << "note: chart " << kind << " skipped: " << e.what()
                  << "\n";
      }
    }
    std::cout << "analyzed " << ds.questions.size() << " questions x "
              << ds.models.size() << " models ("
              << result.anomalies.size() << " anomalies, "
              << result.warnings.size() << " warnings); wrote "
              << (std::filesystem::path(args.out) / "analysis.json").string()
              << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

struct AdjudicateArgs {
  std::string questions, raw, out;
};

inline int cmd_adjudicate(const AdjudicateArgs& args) {
  try {
    const auto questions = parse_questions(args.questions);
    const auto raw = parse_raw_responses(args.raw);
    if (raw.empty()) {
      std::cerr << "error: raw responses file is empty\n";
      return 1;
    }
    std::vector<nlohmann::json> lines;
    std::size_t abstains = 0;
    for (const auto& r : raw) {
      auto qit = questions.find(r.question_id);
      if (qit == questions.end()) {
        std::cerr << "error: unknown question_id '" << r.question_id
                  << "' in raw responses\n";
        return 1;
      }
      const auto answer = adjudicate_answer(r, qit->second);
      if (!answer) ++abstains;
      ResponseRecord rec;
      rec.question_id = r.question_id;
      rec.model_id = r.model_id;
      rec.condition = r.condition;
      rec.answer = answer;
      rec.raw_text = r.raw_text;
      lines.push_back(response_to_json(rec));
    }
    write_lines(args.out, lines);
    std::cout << "adjudicated " << raw.size() << " responses ("
              << abstains << " ABSTAIN); wrote " << args.out << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

struct SimulateArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
};

inline int cmd_simulate(const SimulateArgs& args) {
  try {
    std::ifstream in(args.config, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot open config " << args.config << "\n";
      return 1;
    }
    nlohmann::json obj;
    try {
      in >> obj;
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "error: " << args.config << ": " << e.what() << "\n";
      return 1;
    }
    SimConfig cfg = parse_sim_config(obj);
    if (args.seed) cfg.seed = *args.seed;

    const PanelDataset ds = simulate_panel(cfg);
    std::filesystem::create_directories(args.out);
    std::vector<nlohmann::json> qlines;
    for (const auto& [qid, q] : ds.questions) {
      qlines.push_back(question_to_json(q));
    }
    write_lines(std::filesystem::path(args.out) / "questions.jsonl",
                qlines);
    std::vector<nlohmann::json> rlines;
    for (const auto& r : ds.responses) {
      rlines.push_back(response_to_json(r));
    }
    write_lines(std::filesystem::path(args.out) / "responses.jsonl",
                rlines);
    std::cout << "simulated " << cfg.questions << " questions x "
              << cfg.models << " models (seed " << cfg.seed << "); wrote "
              << args.out << "/{questions,responses}.jsonl\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

struct ReportArgs {
  std::string analysis, out_dir, chart;
};

inline int cmd_report(const ReportArgs& args) {
  try {
    std::ifstream in(args.analysis, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot open " << args.analysis << "\n";
      return 1;
    }
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "error: " << args.analysis << ": " << e.what() << "\n";
      return 1;
    }
    std::filesystem::create_directories(args.out_dir);
    std::vector<std::string> kinds;
    if (!args.chart.empty()) {
      kinds.push_back(args.chart);
    } else {
      kinds = chart_kinds();
    }
    std::size_t rendered = 0;
    for (const auto& kind : kinds) {
      const auto path =
          std::filesystem::path(args.out_dir) / (kind + ".svg");
      try {
        emit_svg(doc, kind, path);
        ++rendered;
      } catch (const std::runtime_error& e) {
        if (!args.chart.empty()) throw;  // explicit request must succeed
        std::cerr << "note: chart " << kind << " skipped: " << e.what()
                  << "\n";
      }
    }
    if (rendered == 0) {
      std::cerr << "error: nothing to plot\n";
      return 1;
    }
    std::cout << "rendered " << rendered << " chart(s) into "
              << args.out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace clidetail

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Panel reliability analysis toolkit"};
  app.set_version_flag(
      "--version", std::string("panelstat ") + kVersion +
                       " (prng=" + kPrngId + ")");
  app.require_subcommand(1);

  clidetail::AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand(
      "analyze", "Run the full analysis pipeline over recorded responses");
  analyze->add_option("--questions", analyze_args.questions,
                      "Questions file (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--responses", analyze_args.responses,
                      "Responses file (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--severity", analyze_args.severity,
                      "Severity ratings file (CSV)")
      ->check(CLI::ExistingFile);
  analyze->add_option("--out", analyze_args.out, "Output directory")
      ->required();
  analyze->add_option("--seed", analyze_args.seed,
                      "Seed for all random draws (default 0)");
  analyze->add_option("--bootstrap", analyze_args.bootstrap,
                      "Bootstrap replicates (default 1000)");
  analyze->add_option("--bins", analyze_args.bins,
                      "Robustness bin edges low,high (default 0.4,0.8)");
  analyze->add_option("--anomaly-m", analyze_args.anomaly_m,
                      "Anomaly consensus threshold (default 0.8)");
  analyze->add_option("--anomaly-r", analyze_args.anomaly_r,
                      "Anomaly robustness ceiling (default 0.4)");
  analyze->add_option("--exact-cutoff", analyze_args.exact_cutoff,
                      "Max n for exact signed-rank p (default 25)");
  analyze->add_option("--alpha", analyze_args.alpha,
                      "Significance level (default 0.05)");
  analyze
      ->add_option("--tokenizer", analyze_args.tokenizer,
                   "Verbosity tokenizer mode")
      ->check(CLI::IsMember({"external_counts", "whitespace_default"}));
  analyze->add_flag("--strict", analyze_args.strict,
                    "Treat completeness warnings as failures");
  analyze->add_option("--jobs", analyze_args.jobs,
                      "Worker threads (default 1; output is identical "
                      "for any value)")
      ->check(CLI::PositiveNumber);

  clidetail::AdjudicateArgs adjudicate_args;
  auto* adjudicate = app.add_subcommand(
      "adjudicate", "Extract final stated options from raw response text");
  adjudicate
      ->add_option("--questions", adjudicate_args.questions,
                   "Questions file (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  adjudicate
      ->add_option("--raw", adjudicate_args.raw,
                   "Raw responses file (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  adjudicate
      ->add_option("--out", adjudicate_args.out,
                   "Adjudicated responses output file (JSONL)")
      ->required();

  clidetail::SimulateArgs simulate_args;
  std::uint64_t simulate_seed = 0;
  auto* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic panel dataset");
  simulate
      ->add_option("--config", simulate_args.config,
                   "Simulator config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* seed_opt = simulate->add_option(
      "--seed", simulate_seed, "Override the seed from the config file");
  simulate->add_option("--out", simulate_args.out, "Output directory")
      ->required();

  clidetail::ReportArgs report_args;
  auto* report = app.add_subcommand(
      "report", "Re-render charts from an analysis.json");
  report
      ->add_option("--analysis", report_args.analysis,
                   "Path to analysis.json")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--out-dir", report_args.out_dir, "Output directory")
      ->required();
  report->add_option(
      "--chart", report_args.chart,
      "Render only this chart kind (delta_histogram, mr_scatter, "
      "bin_bars, severity_bars)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*analyze) return clidetail::cmd_analyze(analyze_args);
  if (*adjudicate) return clidetail::cmd_adjudicate(adjudicate_args);
  if (*simulate) {
    if (seed_opt->count() > 0) simulate_args.seed = simulate_seed;
    return clidetail::cmd_simulate(simulate_args);
  }
  if (*report) return clidetail::cmd_report(report_args);
  return 2;
}

}  // namespace panelstat
