#pragma once

// File ingestion and free-text answer adjudication.
//
// File formats (all UTF-8, line-oriented):
//   questions:     JSON Lines, one object per line with fields
//                  question_id, dataset_tag, options, option_texts
//                  (optional), correct_option.
//   responses:     JSON Lines with question_id, model_id, condition
//                  ("zero_shot"|"agentic"), answer (label or "ABSTAIN"),
//                  optional raw_text, reasoning_tokens, summary_tokens.
//   raw responses: JSON Lines with question_id, model_id, condition,
//                  raw_text (adjudication input).
//   severity:      CSV with header question_id,option_label,rater_id,
//                  severity; severity is low|moderate|high (0|1|2 also
//                  accepted). No quoting; fields must not contain commas.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "panelstat/panel.hpp"

namespace panelstat {

// Raised for any malformed input file; message carries "path:line".
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RawResponse {
  std::string question_id;
  std::string model_id;
  Condition condition = Condition::kZeroShot;
  std::string raw_text;
};

namespace detail {

inline std::string location(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

[[noreturn]] inline void fail(const std::string& path, std::size_t line,
                              const std::string& msg) {
  throw ParseError(location(path, line) + ": " + msg);
}

inline std::string require_string(const nlohmann::json& obj,
                                  const char* field,
                                  const std::string& path,
                                  std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    fail(path, line, std::string("missing or non-string field '") + field +
                         "'");
  }
  return it->get<std::string>();
}

inline std::vector<std::string> require_string_array(
    const nlohmann::json& obj, const char* field, const std::string& path,
    std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_array()) {
    fail(path, line,
         std::string("missing or non-array field '") + field + "'");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      fail(path, line, std::string("field '") + field +
                           "' must contain only strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

// Iterates non-blank lines of a JSONL file, parsing each into an object.
template <typename Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    bool blank = true;
    for (char ch : raw) blank = blank && std::isspace(static_cast<unsigned char>(ch));
    if (blank) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      fail(path, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) fail(path, line_no, "record is not a JSON object");
    fn(obj, line_no);
  }
}

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string ascii_lower_copy(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// True when position p in s sits at a word boundary on the left, i.e. the
// previous character (if any) is not alphanumeric.
inline bool boundary_before(const std::string& s, std::size_t p) {
  return p == 0 || !is_word_char(s[p - 1]);
}

// True when the character at position p (one past a match) does not extend
// the previous token.
inline bool boundary_after(const std::string& s, std::size_t p) {
  return p >= s.size() || !is_word_char(s[p]);
}

inline std::size_t skip_spaces(const std::string& s, std::size_t p) {
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
  return p;
}

// True if `word` occurs at position p of s as a whole token.
inline bool word_at(const std::string& s, std::size_t p,
                    const std::string& word) {
  if (p + word.size() > s.size()) return false;
  if (s.compare(p, word.size(), word) != 0) return false;
  return boundary_before(s, p) && boundary_after(s, p + word.size());
}

}  // namespace detail

// Number of whitespace-delimited tokens in a UTF-8 string. Splits on the
// Unicode White_Space code points (decoded from UTF-8; malformed bytes are
// treated as non-space characters).
inline std::size_t whitespace_token_count(const std::string& text) {
  auto is_space_cp = [](std::uint32_t cp) {
    return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 ||
           cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
           cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
           cp == 0x3000;
  };
  std::size_t count = 0;
  bool in_token = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char b = static_cast<unsigned char>(text[i]);
    std::uint32_t cp = b;
    std::size_t len = 1;
    if (b >= 0xF0) {
      len = 4;
    } else if (b >= 0xE0) {
      len = 3;
    } else if (b >= 0xC0) {
      len = 2;
    }
    if (len > 1 && i + len <= text.size()) {
      static const std::uint32_t kLeadMask[5] = {0, 0x7F, 0x1F, 0x0F, 0x07};
      cp = b & kLeadMask[len];
      bool ok = true;
      for (std::size_t k = 1; k < len; ++k) {
        const unsigned char cont = static_cast<unsigned char>(text[i + k]);
        if ((cont & 0xC0) != 0x80) {
          ok = false;
          break;
        }
        cp = (cp << 6) | (cont & 0x3F);
      }
      if (!ok) {
        cp = b;
        len = 1;
      }
    } else {
      len = 1;
    }
    if (is_space_cp(cp)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
    i += len;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Answer adjudication
//
// Picks the LAST explicitly stated option in a free-text response. A
// mention is either a bare option label in one of six delimiting patterns
// (case-insensitive, whole-token):
//
//   "answer is X"   "answer: X"   "(X)"   "X)"   "X."   "option X"
//
// or an exact case-insensitive occurrence of the full option text (when
// option_texts are provided), delimited by word boundaries. The mention
// with the greatest end offset wins; on equal end offsets the longer match
// wins, then the earlier option in spec order. No mention at all means the
// response abstains (returned as nullopt).

namespace detail {

struct Mention {
  std::size_t end;     // one past the last matched character
  std::size_t length;  // total match length in characters
  std::size_t option;  // index into spec.options
};

// All pattern matches of option label `label` (already lowercased) in
// lowercased text `s`.
inline void collect_label_mentions(const std::string& s,
                                   const std::string& label,
                                   std::size_t option_index,
                                   std::vector<Mention>& out) {
  const std::size_t n = label.size();
  if (n == 0) return;

  // Keyword-led patterns: "answer is X", "answer: X", "option X".
  for (std::size_t p = 0; (p = s.find("answer", p)) != std::string::npos;
       ++p) {
    if (!word_at(s, p, "answer")) continue;
    std::size_t q = p + 6;
    // "answer is X"
    {
      std::size_t r = skip_spaces(s, q);
      if (r > q && word_at(s, r, "is")) {
        std::size_t t = skip_spaces(s, r + 2);
        if (t > r + 2 && s.compare(t, n, label) == 0 &&
            boundary_after(s, t + n)) {
          out.push_back({t + n, t + n - p, option_index});
        }
      }
    }
    // "answer: X"
    {
      std::size_t r = skip_spaces(s, q);
      if (r < s.size() && s[r] == ':') {
        std::size_t t = skip_spaces(s, r + 1);
        if (s.compare(t, n, label) == 0 && boundary_after(s, t + n)) {
          out.push_back({t + n, t + n - p, option_index});
        }
      }
    }
  }
  for (std::size_t p = 0; (p = s.find("option", p)) != std::string::npos;
       ++p) {
    if (!word_at(s, p, "option")) continue;
    std::size_t t = skip_spaces(s, p + 6);
    if (t > p + 6 && s.compare(t, n, label) == 0 &&
        boundary_after(s, t + n)) {
      out.push_back({t + n, t + n - p, option_index});
    }
  }

  // Delimiter patterns around a bare label: "(X)", "X)", "X.".
  for (std::size_t p = 0; (p = s.find(label, p)) != std::string::npos; ++p) {
    const std::size_t e = p + n;
    if (e < s.size() && s[e] == ')') {
      if (p > 0 && s[p - 1] == '(') {
        out.push_back({e + 1, n + 2, option_index});
      } else if (boundary_before(s, p)) {
        out.push_back({e + 1, n + 1, option_index});
      }
    }
    if (e < s.size() && s[e] == '.' && boundary_before(s, p)) {
      out.push_back({e + 1, n + 1, option_index});
    }
  }
}

}  // namespace detail

inline std::optional<std::string> adjudicate_answer(
    const RawResponse& raw, const QuestionSpec& spec) {
  const std::string text = detail::ascii_lower_copy(raw.raw_text);

  std::vector<detail::Mention> mentions;
  for (std::size_t i = 0; i < spec.options.size(); ++i) {
    detail::collect_label_mentions(
        text, detail::ascii_lower_copy(spec.options[i]), i, mentions);
  }
  if (!spec.option_texts.empty()) {
    for (std::size_t i = 0; i < spec.option_texts.size(); ++i) {
      const std::string needle =
          detail::ascii_lower_copy(spec.option_texts[i]);
      if (needle.empty()) continue;
      for (std::size_t p = 0;
           (p = text.find(needle, p)) != std::string::npos; ++p) {
        if (detail::boundary_before(text, p) &&
            detail::boundary_after(text, p + needle.size())) {
          mentions.push_back({p + needle.size(), needle.size(), i});
        }
      }
    }
  }
  if (mentions.empty()) return std::nullopt;

  const detail::Mention* best = &mentions[0];
  for (const auto& m : mentions) {
    if (m.end != best->end) {
      if (m.end > best->end) best = &m;
    } else if (m.length != best->length) {
      if (m.length > best->length) best = &m;
    } else if (m.option < best->option) {
      best = &m;
    }
  }
  return spec.options[best->option];
}

// ---------------------------------------------------------------------------
// File parsers

inline std::map<std::string, QuestionSpec> parse_questions(
    const std::string& path) {
  std::map<std::string, QuestionSpec> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& obj,
                                   std::size_t line) {
    QuestionSpec q;
    q.question_id = detail::require_string(obj, "question_id", path, line);
    q.dataset_tag = detail::require_string(obj, "dataset_tag", path, line);
    q.options = detail::require_string_array(obj, "options", path, line);
    if (obj.contains("option_texts")) {
      q.option_texts =
          detail::require_string_array(obj, "option_texts", path, line);
    }
    q.correct_option =
        detail::require_string(obj, "correct_option", path, line);

    if (q.options.size() < 2 || q.options.size() > 26) {
      detail::fail(path, line, "question '" + q.question_id +
                                   "' needs 2..26 options");
    }
    std::set<std::string> labels;
    for (const auto& o : q.options) {
      if (o == kAbstainToken) {
        detail::fail(path, line, "option label 'ABSTAIN' is reserved");
      }
      if (!labels.insert(o).second) {
        detail::fail(path, line, "duplicate option label '" + o +
                                     "' in question '" + q.question_id +
                                     "'");
      }
    }
    if (!labels.count(q.correct_option)) {
      detail::fail(path, line, "correct_option '" + q.correct_option +
                                   "' is not an option of question '" +
                                   q.question_id + "'");
    }
    if (!q.option_texts.empty() &&
        q.option_texts.size() != q.options.size()) {
      detail::fail(path, line, "option_texts misaligned for question '" +
                                   q.question_id + "'");
    }
    if (!out.emplace(q.question_id, q).second) {
      detail::fail(path, line, "duplicate question_id '" + q.question_id +
                                   "'");
    }
  });
  return out;
}

inline std::vector<ResponseRecord> parse_responses(
    const std::string& path,
    const std::map<std::string, QuestionSpec>& questions) {
  std::vector<ResponseRecord> out;
  std::set<std::tuple<std::string, std::string, Condition>> seen;
  detail::for_each_jsonl(path, [&](const nlohmann::json& obj,
                                   std::size_t line) {
    ResponseRecord r;
    r.question_id = detail::require_string(obj, "question_id", path, line);
    r.model_id = detail::require_string(obj, "model_id", path, line);
    const std::string cond =
        detail::require_string(obj, "condition", path, line);
    auto parsed = parse_condition(cond);
    if (!parsed) {
      detail::fail(path, line, "condition must be 'zero_shot' or 'agentic'");
    }
    r.condition = *parsed;
    const std::string answer =
        detail::require_string(obj, "answer", path, line);

    auto qit = questions.find(r.question_id);
    if (qit == questions.end()) {
      detail::fail(path, line, "unknown question_id '" + r.question_id +
                                   "'");
    }
    if (answer == kAbstainToken) {
      r.answer = std::nullopt;
    } else {
      const auto& opts = qit->second.options;
      if (std::find(opts.begin(), opts.end(), answer) == opts.end()) {
        detail::fail(path, line, "answer '" + answer +
                                     "' is not an option of question '" +
                                     r.question_id + "'");
      }
      r.answer = answer;
    }
    if (obj.contains("raw_text")) {
      if (!obj["raw_text"].is_string()) {
        detail::fail(path, line, "raw_text must be a string");
      }
      r.raw_text = obj["raw_text"].get<std::string>();
    }
    for (const char* field : {"reasoning_tokens", "summary_tokens"}) {
      if (!obj.contains(field)) continue;
      if (!obj[field].is_number_integer() ||
          obj[field].get<std::int64_t>() < 0) {
        detail::fail(path, line, std::string("field '") + field +
                                     "' must be a non-negative integer");
      }
      const std::int64_t v = obj[field].get<std::int64_t>();
      if (std::string(field) == "reasoning_tokens") {
        r.reasoning_tokens = v;
      } else {
        r.summary_tokens = v;
      }
    }
    if (!seen.insert({r.question_id, r.model_id, r.condition}).second) {
      detail::fail(path, line, "duplicate record for (" + r.question_id +
                                   ", " + r.model_id + ", " +
                                   condition_name(r.condition) + ")");
    }
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<RawResponse> parse_raw_responses(const std::string& path) {
  std::vector<RawResponse> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& obj,
                                   std::size_t line) {
    RawResponse r;
    r.question_id = detail::require_string(obj, "question_id", path, line);
    r.model_id = detail::require_string(obj, "model_id", path, line);
    const std::string cond =
        detail::require_string(obj, "condition", path, line);
    auto parsed = parse_condition(cond);
    if (!parsed) {
      detail::fail(path, line, "condition must be 'zero_shot' or 'agentic'");
    }
    r.condition = *parsed;
    r.raw_text = detail::require_string(obj, "raw_text", path, line);
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<SeverityRating> parse_severity(
    const std::string& path,
    const std::map<std::string, QuestionSpec>& questions) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string line;
  std::size_t line_no = 0;
  std::vector<SeverityRating> out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;

  auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    return fields;
  };

  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "question_id,option_label,rater_id,severity") {
    detail::fail(path, line_no,
                 "header must be question_id,option_label,rater_id,severity");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != 4) {
      detail::fail(path, line_no, "expected 4 comma-separated fields");
    }
    SeverityRating r;
    r.question_id = fields[0];
    r.option_label = fields[1];
    r.rater_id = fields[2];
    auto sev = parse_severity_label(fields[3]);
    if (!sev) {
      detail::fail(path, line_no, "severity '" + fields[3] +
                                      "' not in {low, moderate, high}");
    }
    r.severity = *sev;
    auto qit = questions.find(r.question_id);
    if (qit == questions.end()) {
      detail::fail(path, line_no, "unknown question_id '" + r.question_id +
                                      "'");
    }
    const auto& q = qit->second;
    if (std::find(q.options.begin(), q.options.end(), r.option_label) ==
        q.options.end()) {
      detail::fail(path, line_no, "option '" + r.option_label +
                                      "' is not an option of question '" +
                                      r.question_id + "'");
    }
    if (r.option_label == q.correct_option) {
      detail::fail(path, line_no,
                   "severity rates incorrect options only, but '" +
                       r.option_label + "' is the correct option of '" +
                       r.question_id + "'");
    }
    if (!seen.insert({r.question_id, r.option_label, r.rater_id}).second) {
      detail::fail(path, line_no, "duplicate rating for (" + r.question_id +
                                      ", " + r.option_label + ", " +
                                      r.rater_id + ")");
    }
    out.push_back(std::move(r));
  }
  return out;
}

// Assembles a PanelDataset. The roster is `models` when non-empty,
// otherwise the distinct model_ids in order of first appearance.
inline PanelDataset build_matrix(
    std::map<std::string, QuestionSpec> questions,
    std::vector<ResponseRecord> responses,
    std::vector<std::string> models = {}) {
  if (questions.empty()) throw ParseError("no questions loaded");
  if (models.empty()) {
    std::set<std::string> seen;
    for (const auto& r : responses) {
      if (seen.insert(r.model_id).second) models.push_back(r.model_id);
    }
  }
  if (models.empty()) throw ParseError("no models found in responses");
  PanelDataset ds;
  ds.questions = std::move(questions);
  ds.models = std::move(models);
  ds.responses = std::move(responses);
  return ds;
}

}  // namespace panelstat
