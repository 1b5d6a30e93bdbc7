#pragma once

// Seeded synthetic panel generator. The mechanism is deliberately minimal:
// zero-shot answers are independent draws from a skill/difficulty law, and
// the agentic condition adds a shared per-question attractor that pulls a
// coordinated fraction of the panel toward one option. Small attractor
// error rates reproduce entropy drops with robustness gains; large ones
// produce coordinated wrong convergence.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "panelstat/panel.hpp"
#include "panelstat/rng.hpp"

namespace panelstat {

struct SimConfig {
  std::size_t questions = 0;  // Q
  std::size_t models = 0;     // N
  std::size_t options = 4;    // K

  // Per-model skill in [0,1]: explicit vector (size N), or sampled
  // uniformly from [skill_low, skill_high] when the vector is empty.
  std::vector<double> skill;
  double skill_low = 0.5, skill_high = 0.9;

  // Per-question difficulty in [0,1]: same convention.
  std::vector<double> difficulty;
  double difficulty_low = 0.1, difficulty_high = 0.9;

  double coordination = 0.0;     // c: P(model follows the attractor)
  double misleading_rate = 0.0;  // gamma: P(attractor is a wrong option)
  std::uint64_t seed = 0;

  bool valid(std::string* why = nullptr) const {
    auto fail = [&why](const char* msg) {
      if (why) *why = msg;
      return false;
    };
    if (questions < 1 || models < 1) return fail("Q and N must be >= 1");
    if (options < 2 || options > 26) return fail("K must be in 2..26");
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(coordination)) return fail("coordination outside [0,1]");
    if (!in01(misleading_rate)) return fail("misleading_rate outside [0,1]");
    if (!skill.empty() && skill.size() != models) {
      return fail("skill vector length must equal models");
    }
    for (double s : skill) {
      if (!in01(s)) return fail("skill outside [0,1]");
    }
    if (skill.empty() &&
        !(in01(skill_low) && in01(skill_high) && skill_low <= skill_high)) {
      return fail("skill range invalid");
    }
    if (!difficulty.empty() && difficulty.size() != questions) {
      return fail("difficulty vector length must equal questions");
    }
    for (double d : difficulty) {
      if (!in01(d)) return fail("difficulty outside [0,1]");
    }
    if (difficulty.empty() && !(in01(difficulty_low) &&
                                in01(difficulty_high) &&
                                difficulty_low <= difficulty_high)) {
      return fail("difficulty range invalid");
    }
    return true;
  }
};

// Config file format: a JSON object with fields questions, models,
// options, coordination, misleading_rate, seed, and skill / difficulty
// given either as arrays or as {"low": a, "high": b} sampling ranges.
inline SimConfig parse_sim_config(const nlohmann::json& obj) {
  if (!obj.is_object()) {
    throw std::runtime_error("simulator config must be a JSON object");
  }
  SimConfig cfg;
  auto is_uint = [](const nlohmann::json& v) {
    return v.is_number_unsigned() ||
           (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  };
  auto require_uint = [&obj, &is_uint](const char* field) {
    if (!obj.contains(field) || !is_uint(obj[field])) {
      throw std::runtime_error(std::string("config field '") + field +
                               "' must be a non-negative integer");
    }
    return obj[field].get<std::uint64_t>();
  };
  cfg.questions = static_cast<std::size_t>(require_uint("questions"));
  cfg.models = static_cast<std::size_t>(require_uint("models"));
  cfg.options = static_cast<std::size_t>(require_uint("options"));
  auto load_law = [&obj](const char* field, std::vector<double>* values,
                         double* low, double* high) {
    if (!obj.contains(field)) return;
    const auto& v = obj[field];
    if (v.is_array()) {
      for (const auto& e : v) {
        if (!e.is_number()) {
          throw std::runtime_error(std::string("config field '") + field +
                                   "' array must hold numbers");
        }
        values->push_back(e.get<double>());
      }
    } else if (v.is_object() && v.contains("low") && v.contains("high") &&
               v["low"].is_number() && v["high"].is_number()) {
      *low = v["low"].get<double>();
      *high = v["high"].get<double>();
    } else {
      throw std::runtime_error(std::string("config field '") + field +
                               "' must be an array or {low, high}");
    }
  };
  load_law("skill", &cfg.skill, &cfg.skill_low, &cfg.skill_high);
  load_law("difficulty", &cfg.difficulty, &cfg.difficulty_low,
           &cfg.difficulty_high);
  for (const char* field : {"coordination", "misleading_rate"}) {
    if (!obj.contains(field) || !obj[field].is_number()) {
      throw std::runtime_error(std::string("config field '") + field +
                               "' must be a number");
    }
  }
  cfg.coordination = obj["coordination"].get<double>();
  cfg.misleading_rate = obj["misleading_rate"].get<double>();
  if (obj.contains("seed")) {
    if (!is_uint(obj["seed"])) {
      throw std::runtime_error("config field 'seed' must be non-negative");
    }
    cfg.seed = obj["seed"].get<std::uint64_t>();
  }
  std::string why;
  if (!cfg.valid(&why)) {
    throw std::runtime_error("invalid simulator config: " + why);
  }
  return cfg;
}

namespace detail {

inline std::string zero_padded(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  while (s.size() < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace detail

// Generates a complete two-condition panel. Deterministic given the seed:
// substream 0 samples skills then difficulties (when not supplied), and
// substream 1+q drives question q. Every draw is consumed unconditionally
// so a question's stream layout never depends on earlier outcomes.
inline PanelDataset simulate_panel(const SimConfig& cfg) {
  std::string why;
  if (!cfg.valid(&why)) {
    throw std::runtime_error("invalid simulator config: " + why);
  }
  const std::size_t q_count = cfg.questions;
  const std::size_t n = cfg.models;
  const std::size_t k = cfg.options;

  std::vector<double> skill = cfg.skill;
  std::vector<double> difficulty = cfg.difficulty;
  {
    SplitMix64 setup(derive_stream_seed(cfg.seed, 0));
    if (skill.empty()) {
      for (std::size_t m = 0; m < n; ++m) {
        skill.push_back(cfg.skill_low +
                        (cfg.skill_high - cfg.skill_low) *
                            setup.next_double());
      }
    }
    if (difficulty.empty()) {
      for (std::size_t q = 0; q < q_count; ++q) {
        difficulty.push_back(cfg.difficulty_low +
                             (cfg.difficulty_high - cfg.difficulty_low) *
                                 setup.next_double());
      }
    }
  }

  const std::size_t q_width =
      std::max<std::size_t>(3, std::to_string(q_count).size());
  const std::size_t m_width =
      std::max<std::size_t>(2, std::to_string(n).size());

  PanelDataset ds;
  for (std::size_t m = 0; m < n; ++m) {
    ds.models.push_back("model_" + detail::zero_padded(m + 1, m_width));
  }

  std::vector<std::string> labels;
  for (std::size_t o = 0; o < k; ++o) {
    labels.push_back(std::string(1, static_cast<char>('A' + o)));
  }
  const double floor = 1.0 / static_cast<double>(k);

  for (std::size_t q = 0; q < q_count; ++q) {
    SplitMix64 gen(derive_stream_seed(cfg.seed, 1 + q));
    const std::size_t correct_idx =
        static_cast<std::size_t>(gen.next_below(k));
    // Attractor: wrong-option pick and the misleading draw are always
    // consumed, whether or not they end up mattering.
    const std::size_t attractor_wrong =
        static_cast<std::size_t>(gen.next_below(k - 1));
    const bool misleading = gen.next_double() < cfg.misleading_rate;
    auto wrong_to_option = [correct_idx](std::size_t w) {
      return w < correct_idx ? w : w + 1;
    };
    const std::size_t attractor_idx =
        misleading ? wrong_to_option(attractor_wrong) : correct_idx;

    QuestionSpec spec;
    spec.question_id = "Q" + detail::zero_padded(q + 1, q_width);
    spec.dataset_tag = "simulated";
    spec.options = labels;
    spec.correct_option = labels[correct_idx];
    ds.questions.emplace(spec.question_id, spec);

    for (std::size_t m = 0; m < n; ++m) {
      const double p_correct = std::min(
          1.0, skill[m] * (1.0 - difficulty[q]) + floor);
      const bool zs_correct = gen.next_double() < p_correct;
      const std::size_t zs_wrong =
          static_cast<std::size_t>(gen.next_below(k - 1));
      const bool follows = gen.next_double() < cfg.coordination;
      const bool fb_correct = gen.next_double() < p_correct;
      const std::size_t fb_wrong =
          static_cast<std::size_t>(gen.next_below(k - 1));

      const std::size_t zs_idx =
          zs_correct ? correct_idx : wrong_to_option(zs_wrong);
      const std::size_t ag_idx =
          follows ? attractor_idx
                  : (fb_correct ? correct_idx : wrong_to_option(fb_wrong));

      ResponseRecord zs;
      zs.question_id = spec.question_id;
      zs.model_id = ds.models[m];
      zs.condition = Condition::kZeroShot;
      zs.answer = labels[zs_idx];
      ds.responses.push_back(std::move(zs));

      ResponseRecord ag;
      ag.question_id = spec.question_id;
      ag.model_id = ds.models[m];
      ag.condition = Condition::kAgentic;
      ag.answer = labels[ag_idx];
      ds.responses.push_back(std::move(ag));
    }
  }
  return ds;
}

}  // namespace panelstat
