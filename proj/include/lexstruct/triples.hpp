// Copyright 2026 The lexstruct Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Knowledge triples: the surface parser, Few-Shot-CoT prompt templates,
// the provider abstraction with deterministic mocks, and the reference /
// triple generation drivers.

#ifndef LEXSTRUCT_TRIPLES_HPP_
#define LEXSTRUCT_TRIPLES_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lexstruct/error.hpp"
#include "lexstruct/extractor.hpp"
#include "lexstruct/numbering.hpp"
#include "lexstruct/text.hpp"

namespace lexstruct {

// ---------------------------------------------------------------------------
// Triples

namespace predicate {
inline constexpr std::string_view kRefersTo = "refers to";
inline constexpr std::string_view kCorrespondsTo = "corresponds to";
}  // namespace predicate

inline constexpr std::string_view kCurrentArticle = "the current article";

struct KnowledgeTriple {
  std::string subject;
  std::string predicate;
  std::string object;

  bool operator==(const KnowledgeTriple&) const = default;
  auto operator<=>(const KnowledgeTriple&) const = default;
};

// Canonical surface form: "(subject, predicate, object)".
inline std::string serialize_triple(const KnowledgeTriple& t) {
  return "(" + t.subject + ", " + t.predicate + ", " + t.object + ")";
}

inline std::string serialize_triples(const std::vector<KnowledgeTriple>& ts) {
  std::string out;
  for (const auto& t : ts) out += serialize_triple(t) + "\n";
  return out;
}

// The object as a LegalReference when it is one under the reference grammar.
inline std::optional<LegalReference> object_reference(const KnowledgeTriple& t) {
  return try_parse_reference(t.object);
}

namespace detail {

inline std::string_view strip_quotes(std::string_view s) {
  s = text::trim(s);
  static const std::pair<std::string_view, std::string_view> kPairs[] = {
      {"\"", "\""}, {"'", "'"}, {"`", "`"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"\xC2\xAB", "\xC2\xBB"}};
  for (const auto& [open, close] : kPairs) {
    if (s.size() >= open.size() + close.size() && s.substr(0, open.size()) == open &&
        s.substr(s.size() - close.size()) == close) {
      return text::trim(s.substr(open.size(), s.size() - open.size() - close.size()));
    }
  }
  return s;
}

inline bool balanced_parens(std::string_view s) {
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')' && --depth < 0) return false;
  }
  return depth == 0;
}

inline std::optional<std::string> normalize_predicate(std::string_view raw) {
  std::string p;
  for (char c : strip_quotes(raw)) p.push_back(c == '_' ? ' ' : text::to_lower(c));
  p = text::collapse_spaces(p);
  if (p.empty()) return std::nullopt;
  int words = 1;
  for (char c : p) {
    if (c == ' ') {
      ++words;
    } else if (!text::is_alpha(c) && c != '-' && c != '\'') {
      return std::nullopt;
    }
  }
  if (words > 4) return std::nullopt;
  return p;
}

inline std::optional<KnowledgeTriple> make_triple(std::string_view s, std::string_view p,
                                                  std::string_view o) {
  KnowledgeTriple t;
  t.subject = text::lower(text::collapse_spaces(strip_quotes(s)));
  auto pred = normalize_predicate(p);
  if (!pred) return std::nullopt;
  t.predicate = *pred;
  t.object = text::collapse_spaces(strip_quotes(o));
  if (t.subject.empty() || t.object.empty()) return std::nullopt;
  auto has_alnum = [](const std::string& f) {
    return std::any_of(f.begin(), f.end(), [](char c) { return text::is_alpha(c) || text::is_digit(c); });
  };
  if (!has_alnum(t.subject) || !has_alnum(t.predicate) || !has_alnum(t.object)) return std::nullopt;
  if (t.subject.find(',') != std::string::npos || t.subject.find('(') != std::string::npos ||
      t.subject.find(')') != std::string::npos) {
    return std::nullopt;
  }
  if (!balanced_parens(t.object)) return std::nullopt;
  if (auto ref = try_parse_reference(t.object)) t.object = format_reference(*ref);
  return t;
}

// Drops list bullets, numbering and an "Output:" label in front of a line.
inline std::string_view strip_line_prefix(std::string_view line) {
  line = text::trim(line);
  if (text::istarts_with(line, "output:")) line = text::trim(line.substr(7));
  if (line.substr(0, 3) == "\xE2\x80\xA2") return text::trim(line.substr(3));
  if (!line.empty() && (line[0] == '-' || line[0] == '*') && line.size() > 1 && line[1] == ' ') {
    return text::trim(line.substr(2));
  }
  std::size_t i = 0;
  while (i < line.size() && text::is_digit(line[i])) ++i;
  if (i > 0 && i + 1 < line.size() && (line[i] == '.' || line[i] == ')') && line[i + 1] == ' ') {
    return text::trim(line.substr(i + 2));
  }
  return line;
}

inline std::vector<std::string_view> split_on(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + sep.size();
  }
}

// One or more "(s, p, o)" groups, optionally separated by ',' or ';'.
inline std::optional<std::vector<KnowledgeTriple>> parse_paren_line(std::string_view line) {
  std::vector<KnowledgeTriple> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] != '(') return std::nullopt;
    int depth = 0;
    std::size_t close = std::string_view::npos;
    for (std::size_t j = i; j < line.size(); ++j) {
      if (line[j] == '(') ++depth;
      if (line[j] == ')' && --depth == 0) {
        close = j;
        break;
      }
    }
    if (close == std::string_view::npos) return std::nullopt;
    const std::string_view inner = line.substr(i + 1, close - i - 1);
    const auto c1 = inner.find(',');
    if (c1 == std::string_view::npos) return std::nullopt;
    const auto c2 = inner.find(',', c1 + 1);
    if (c2 == std::string_view::npos) return std::nullopt;
    auto t = make_triple(inner.substr(0, c1), inner.substr(c1 + 1, c2 - c1 - 1), inner.substr(c2 + 1));
    if (!t) return std::nullopt;
    out.push_back(std::move(*t));
    i = close + 1;
    while (i < line.size() && (text::is_space(line[i]) || line[i] == ',' || line[i] == ';' || line[i] == '.')) {
      ++i;
    }
  }
  return out;
}

inline std::optional<KnowledgeTriple> parse_separated_line(std::string_view line) {
  for (std::string_view sep : {std::string_view("|"), std::string_view("\xE2\x86\x92"), std::string_view("->")}) {
    auto parts = split_on(line, sep);
    if (parts.size() != 3) continue;
    // Markdown table rows: "| s | p | o |".
    return make_triple(parts[0], parts[1], parts[2]);
  }
  auto parts = split_on(line, "|");
  if (parts.size() == 5 && text::trim(parts[0]).empty() && text::trim(parts[4]).empty()) {
    // table header
    if (text::iequals(text::trim(parts[1]), "subject") && text::iequals(text::trim(parts[2]), "predicate") &&
        text::iequals(text::trim(parts[3]), "object")) {
      return std::nullopt;
    }
    return make_triple(parts[1], parts[2], parts[3]);
  }
  return std::nullopt;
}

}  // namespace detail

// Total: lines that are not triples are ignored. Duplicates are dropped,
// first occurrence wins.
inline std::vector<KnowledgeTriple> parse_triples(std::string_view text_in) {
  std::vector<KnowledgeTriple> out;
  std::set<KnowledgeTriple> seen;
  auto add = [&](KnowledgeTriple t) {
    if (seen.insert(t).second) out.push_back(std::move(t));
  };
  for (std::string_view raw : text::split(text_in, '\n')) {
    std::string_view line = detail::strip_line_prefix(raw);
    if (!line.empty() && line.back() == '\r') line = text::trim(line.substr(0, line.size() - 1));
    if (line.empty()) continue;
    if (line[0] == '(') {
      if (auto ts = detail::parse_paren_line(line)) {
        for (auto& t : *ts) add(std::move(t));
      }
      continue;
    }
    if (auto t = detail::parse_separated_line(line)) add(std::move(*t));
  }
  return out;
}

inline nlohmann::json triples_to_json(const std::vector<KnowledgeTriple>& ts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : ts) arr.push_back({t.subject, t.predicate, t.object});
  return arr;
}

inline std::vector<KnowledgeTriple> triples_from_json(const nlohmann::json& arr) {
  std::vector<KnowledgeTriple> out;
  for (const auto& t : arr) {
    if (!t.is_array() || t.size() != 3) throw Error(ErrorCode::MalformedRecord, "triple is not [s, p, o]");
    out.push_back({t[0].get<std::string>(), t[1].get<std::string>(), t[2].get<std::string>()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prompts

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct PromptExample {
  std::string content;
  Metadata metadata;
  std::vector<std::string> references;
  std::vector<KnowledgeTriple> output;

  bool operator==(const PromptExample&) const = default;
};

inline constexpr std::string_view kDefaultDirective = "Let's think step by step";

struct PromptTemplate {
  std::string instruction;
  std::string directive = std::string(kDefaultDirective);
  std::vector<PromptExample> examples;

  bool operator==(const PromptTemplate&) const = default;
};

// The metadata projection shown to the model.
inline Metadata article_metadata(const ArticleRecord& r) {
  Metadata m;
  m.emplace_back("name", r.name);
  m.emplace_back("number", r.number.raw);
  m.emplace_back("law_num", r.law_num);
  m.emplace_back("signature_date", r.signature_date);
  if (r.art_num) m.emplace_back("art_num", format_article_label(*r.art_num));
  if (r.heading) m.emplace_back("heading", *r.heading);
  if (!r.subdivision.empty()) m.emplace_back("subdivision", format_subdivision(r.subdivision));
  return m;
}

inline PromptExample make_target(const ArticleRecord& r, std::vector<std::string> references) {
  PromptExample t;
  t.content = r.content;
  t.metadata = article_metadata(r);
  t.references = std::move(references);
  return t;
}

namespace detail {

inline void render_block(std::ostringstream& out, const PromptExample& e, bool with_output) {
  out << "Content:\n" << e.content << "\n";
  out << "Metadata:\n";
  for (const auto& [k, v] : e.metadata) out << k << ": " << v << "\n";
  out << "References:\n";
  for (const auto& r : e.references) out << r << "\n";
  out << "Output:\n";
  if (with_output) out << serialize_triples(e.output);
}

}  // namespace detail

inline std::string render_prompt(const PromptTemplate& tpl, const PromptExample& target) {
  if (tpl.examples.empty()) throw Error(ErrorCode::EmptyExamples, "prompt template has no examples");
  std::ostringstream out;
  out << text::trim(tpl.instruction) << "\n";
  if (!tpl.directive.empty()) out << tpl.directive << ".\n";
  for (std::size_t i = 0; i < tpl.examples.size(); ++i) {
    out << "\nExample " << (i + 1) << "\n";
    detail::render_block(out, tpl.examples[i], true);
  }
  out << "\nCurrent article\n";
  detail::render_block(out, target, false);
  return out.str();
}

// Template files: "[instruction]" and "[directive]" sections, then one
// "[example]" per example followed by "[content]", "[metadata]" (key: value
// lines), "[references]" (one per line) and "[output]" (one triple per line).
inline std::string save_template(const PromptTemplate& tpl) {
  std::ostringstream out;
  out << "[instruction]\n" << text::trim(tpl.instruction) << "\n";
  out << "[directive]\n" << tpl.directive << "\n";
  for (const auto& e : tpl.examples) {
    out << "[example]\n[content]\n" << e.content << "\n[metadata]\n";
    for (const auto& [k, v] : e.metadata) out << k << ": " << v << "\n";
    out << "[references]\n";
    for (const auto& r : e.references) out << r << "\n";
    out << "[output]\n" << serialize_triples(e.output);
  }
  return out.str();
}

inline PromptTemplate load_template(std::string_view doc) {
  PromptTemplate tpl;
  tpl.directive.clear();
  std::string section;
  std::vector<std::string> buf;
  int line_no = 0;
  int section_line = 0;
  auto fail = [&](const std::string& why) -> void {
    throw Error(ErrorCode::ConfigError, "template line " + std::to_string(section_line) + ": " + why);
  };
  auto joined = [&]() {
    std::size_t b = 0;
    std::size_t e = buf.size();
    while (b < e && text::is_blank(buf[b])) ++b;
    while (e > b && text::is_blank(buf[e - 1])) --e;
    std::string s;
    for (std::size_t i = b; i < e; ++i) s += (i > b ? "\n" : "") + buf[i];
    return s;
  };
  auto flush = [&]() {
    if (section.empty()) {
      if (!joined().empty()) fail("text before the first section");
    } else if (section == "instruction") {
      tpl.instruction = joined();
    } else if (section == "directive") {
      tpl.directive = joined();
    } else if (section == "example") {
      tpl.examples.emplace_back();
    } else {
      if (tpl.examples.empty()) fail("[" + section + "] outside an example");
      PromptExample& e = tpl.examples.back();
      if (section == "content") {
        e.content = joined();
      } else if (section == "metadata") {
        for (const auto& l : buf) {
          if (text::is_blank(l)) continue;
          const auto colon = l.find(':');
          if (colon == std::string::npos) fail("metadata line without ':'");
          e.metadata.emplace_back(std::string(text::trim(std::string_view(l).substr(0, colon))),
                                  std::string(text::trim(std::string_view(l).substr(colon + 1))));
        }
      } else if (section == "references") {
        for (const auto& l : buf) {
          if (!text::is_blank(l)) e.references.emplace_back(text::trim(l));
        }
      } else if (section == "output") {
        std::string all;
        for (const auto& l : buf) all += l + "\n";
        e.output = parse_triples(all);
      } else {
        fail("unknown section [" + section + "]");
      }
    }
    buf.clear();
  };
  for (std::string_view raw : text::split(doc, '\n')) {
    ++line_no;
    std::string line(raw);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() > 2 && line.front() == '[' && line.back() == ']' &&
        line.find(' ') == std::string::npos) {
      flush();
      section = line.substr(1, line.size() - 2);
      section_line = line_no;
      continue;
    }
    buf.push_back(line);
  }
  flush();
  if (tpl.instruction.empty()) throw Error(ErrorCode::ConfigError, "template has no [instruction]");
  return tpl;
}

inline PromptTemplate load_template_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read template '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_template(ss.str());
}

// ---------------------------------------------------------------------------
// Providers

struct RetryPolicy {
  int attempts = 3;
  int backoff_ms = 200;
  double multiplier = 2.0;
};

struct MockSettings {
  std::string mode = "echo";  // echo | corrupt | fixed | delay | failing
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::string text;
  int delay_ms = 0;
  std::string inner = "echo";
  std::vector<std::string> fail_keys;  // failing mode: empty means every key
  bool retryable = false;
};

struct ProviderSpec {
  std::string name;
  std::string kind = "mock";  // mock | openai
  std::string endpoint;
  std::string model;
  std::string auth_env;  // name of the variable holding the key; never the key
  int max_concurrent = 1;
  RetryPolicy retry;
  std::optional<double> temperature;
  std::optional<int> max_tokens;
  std::optional<double> npb;
  int timeout_s = 120;
  MockSettings mock;
};

inline nlohmann::ordered_json provider_to_json(const ProviderSpec& p) {
  nlohmann::ordered_json j;
  j["name"] = p.name;
  j["kind"] = p.kind;
  if (!p.endpoint.empty()) j["endpoint"] = p.endpoint;
  if (!p.model.empty()) j["model"] = p.model;
  if (!p.auth_env.empty()) j["auth_env"] = p.auth_env;
  j["max_concurrent"] = p.max_concurrent;
  j["retry"] = {{"attempts", p.retry.attempts}, {"backoff_ms", p.retry.backoff_ms},
                {"multiplier", p.retry.multiplier}};
  if (p.temperature) j["temperature"] = *p.temperature;
  if (p.max_tokens) j["max_tokens"] = *p.max_tokens;
  if (p.npb) j["npb"] = *p.npb;
  j["timeout_s"] = p.timeout_s;
  if (p.kind == "mock") {
    nlohmann::ordered_json m;
    m["mode"] = p.mock.mode;
    m["rate"] = p.mock.rate;
    m["seed"] = p.mock.seed;
    if (!p.mock.text.empty()) m["text"] = p.mock.text;
    m["delay_ms"] = p.mock.delay_ms;
    m["inner"] = p.mock.inner;
    if (!p.mock.fail_keys.empty()) m["fail_keys"] = p.mock.fail_keys;
    m["retryable"] = p.mock.retryable;
    j["mock"] = std::move(m);
  }
  return j;
}

inline ProviderSpec provider_from_json(const nlohmann::json& j) {
  ProviderSpec p;
  try {
    p.name = j.at("name").get<std::string>();
    p.kind = j.value("kind", "mock");
    p.endpoint = j.value("endpoint", "");
    p.model = j.value("model", "");
    p.auth_env = j.value("auth_env", "");
    p.max_concurrent = j.value("max_concurrent", 1);
    if (j.contains("retry")) {
      const auto& r = j["retry"];
      p.retry.attempts = r.value("attempts", 3);
      p.retry.backoff_ms = r.value("backoff_ms", 200);
      p.retry.multiplier = r.value("multiplier", 2.0);
    }
    if (j.contains("temperature")) p.temperature = j["temperature"].get<double>();
    if (j.contains("max_tokens")) p.max_tokens = j["max_tokens"].get<int>();
    if (j.contains("npb")) p.npb = j["npb"].get<double>();
    p.timeout_s = j.value("timeout_s", 120);
    if (j.contains("mock")) {
      const auto& m = j["mock"];
      p.mock.mode = m.value("mode", "echo");
      p.mock.rate = m.value("rate", 0.0);
      p.mock.seed = m.value("seed", std::uint64_t{0});
      p.mock.text = m.value("text", "");
      p.mock.delay_ms = m.value("delay_ms", 0);
      p.mock.inner = m.value("inner", "echo");
      p.mock.fail_keys = m.value("fail_keys", std::vector<std::string>{});
      p.mock.retryable = m.value("retryable", false);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("provider config: ") + e.what());
  }
  if (p.name.empty()) throw Error(ErrorCode::ConfigError, "provider without a name");
  if (p.kind != "mock" && p.kind != "openai") {
    throw Error(ErrorCode::ConfigError, "provider '" + p.name + "': unknown kind '" + p.kind + "'");
  }
  if (p.max_concurrent < 1) throw Error(ErrorCode::ConfigError, "provider '" + p.name + "': max_concurrent < 1");
  if (p.retry.attempts < 1) throw Error(ErrorCode::ConfigError, "provider '" + p.name + "': retry.attempts < 1");
  if (p.kind == "mock") {
    static const std::set<std::string> kModes = {"echo", "corrupt", "fixed", "delay", "failing"};
    if (!kModes.count(p.mock.mode) || !kModes.count(p.mock.inner)) {
      throw Error(ErrorCode::ConfigError, "provider '" + p.name + "': unknown mock mode");
    }
    if (p.mock.rate < 0.0 || p.mock.rate > 1.0) {
      throw Error(ErrorCode::ConfigError, "provider '" + p.name + "': corruption rate outside [0, 1]");
    }
  } else if (p.endpoint.empty() || p.model.empty()) {
    throw Error(ErrorCode::ConfigError, "provider '" + p.name + "': endpoint and model are required");
  }
  return p;
}

// Transport-level failure. Retryable ones are retried by invoke_with_retry.
class ProviderFailure : public Error {
 public:
  ProviderFailure(const std::string& message, bool retryable)
      : Error(ErrorCode::ProviderError, message), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

struct ProviderRequest {
  std::string task;  // "refs" or "triples"
  std::string article_key;
  std::string prompt;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual const ProviderSpec& spec() const = 0;
  virtual std::string complete(const ProviderRequest& request) = 0;
};

inline std::string invoke_with_retry(Provider& provider, const ProviderRequest& request,
                                     const std::function<void(int)>& sleep_ms = nullptr) {
  const RetryPolicy& policy = provider.spec().retry;
  double delay = policy.backoff_ms;
  std::string last;
  for (int attempt = 1; attempt <= policy.attempts; ++attempt) {
    try {
      return provider.complete(request);
    } catch (const ProviderFailure& e) {
      last = e.what();
      if (!e.retryable()) {
        throw Error(ErrorCode::ProviderError, provider.spec().name + ": " + last);
      }
    }
    if (attempt < policy.attempts) {
      const int ms = static_cast<int>(delay);
      if (sleep_ms) {
        sleep_ms(ms);
      } else {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
      }
      delay *= policy.multiplier;
    }
  }
  throw Error(ErrorCode::ProviderError, provider.spec().name + ": gave up after " +
                                            std::to_string(policy.attempts) + " attempts: " + last);
}

// Ground truth keyed by article_key; feeds the mock provider and evaluation.
struct GroundTruthEntry {
  std::vector<std::string> references;
  std::vector<KnowledgeTriple> triples;
};
using GroundTruth = std::map<std::string, GroundTruthEntry>;

inline GroundTruth read_ground_truth(std::istream& in) {
  GroundTruth gt;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::is_blank(line)) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      GroundTruthEntry e;
      e.references = j.value("references", std::vector<std::string>{});
      e.triples = triples_from_json(j.at("triples"));
      gt[j.at("article").get<std::string>()] = std::move(e);
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(ErrorCode::MalformedRecord, n, e.what());
    }
  }
  return gt;
}

inline void write_ground_truth(std::ostream& out, const GroundTruth& gt) {
  for (const auto& [key, e] : gt) {
    nlohmann::ordered_json j;
    j["article"] = key;
    j["references"] = e.references;
    j["triples"] = triples_to_json(e.triples);
    out << j.dump() << '\n';
  }
}

namespace detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// splitmix64
inline std::uint64_t mix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::string junk_token(std::uint64_t r) {
  std::string s = "xq";
  for (int i = 0; i < 6; ++i) {
    s.push_back(static_cast<char>('a' + r % 26));
    r /= 26;
  }
  return s;
}

// Replaces each whitespace-separated word of every field with a junk word
// when its uniform draw falls below rate. Draws depend only on (seed, key,
// task, position), so the corrupted set grows with the rate.
inline std::vector<KnowledgeTriple> corrupt_triples(const std::vector<KnowledgeTriple>& ts, double rate,
                                                    std::uint64_t seed, const std::string& key,
                                                    const std::string& task) {
  std::uint64_t state = fnv1a(task, fnv1a(key, seed ^ 0xA5A5A5A5A5A5A5A5ULL));
  auto corrupt_field = [&](const std::string& field) {
    std::string out;
    for (auto word : text::split(field, ' ')) {
      // Two draws per position whether or not it is corrupted.
      const std::uint64_t r = mix(state);
      const std::uint64_t junk = mix(state);
      const double u = static_cast<double>(r >> 11) * 0x1.0p-53;
      const std::string w = u < rate ? junk_token(junk) : std::string(word);
      if (!out.empty()) out.push_back(' ');
      out += w;
    }
    return out;
  };
  std::vector<KnowledgeTriple> out;
  for (const auto& t : ts) {
    out.push_back({corrupt_field(t.subject), corrupt_field(t.predicate), corrupt_field(t.object)});
  }
  return out;
}

}  // namespace detail

class MockProvider : public Provider {
 public:
  MockProvider(ProviderSpec spec, std::shared_ptr<const GroundTruth> truth)
      : spec_(std::move(spec)), truth_(std::move(truth)) {
    if (!truth_) truth_ = std::make_shared<GroundTruth>();
  }

  const ProviderSpec& spec() const override { return spec_; }

  std::string complete(const ProviderRequest& request) override {
    ++calls_;
    return respond(spec_.mock.mode, request);
  }

  int calls() const { return calls_.load(); }

 private:
  std::string respond(const std::string& mode, const ProviderRequest& request) {
    if (mode == "fixed") return spec_.mock.text;
    if (mode == "delay") {
      std::this_thread::sleep_for(std::chrono::milliseconds(spec_.mock.delay_ms));
      if (spec_.mock.inner == "delay") return respond("echo", request);
      return respond(spec_.mock.inner, request);
    }
    if (mode == "failing") {
      const auto& keys = spec_.mock.fail_keys;
      if (keys.empty() || std::find(keys.begin(), keys.end(), request.article_key) != keys.end()) {
        throw ProviderFailure("mock failure for '" + request.article_key + "'", spec_.mock.retryable);
      }
      return respond("echo", request);
    }
    const auto it = truth_->find(request.article_key);
    const GroundTruthEntry empty;
    const GroundTruthEntry& e = it == truth_->end() ? empty : it->second;
    const double rate = mode == "corrupt" ? spec_.mock.rate : 0.0;
    if (request.task == "refs") {
      std::string out;
      for (const auto& r : e.references) {
        if (rate > 0.0) {
          auto c = detail::corrupt_triples({{"", "", r}}, rate, spec_.mock.seed, request.article_key, "refs");
          out += c[0].object + "\n";
        } else {
          out += r + "\n";
        }
      }
      return out.empty() ? "none\n" : out;
    }
    const auto ts = rate > 0.0 ? detail::corrupt_triples(e.triples, rate, spec_.mock.seed, request.article_key,
                                                         request.task)
                               : e.triples;
    return "The current article cites the entities listed in its references.\nOutput:\n" +
           serialize_triples(ts);
  }

  ProviderSpec spec_;
  std::shared_ptr<const GroundTruth> truth_;
  std::atomic<int> calls_{0};
};

// ---------------------------------------------------------------------------
// Drivers

struct ExtractedReference {
  std::string text;
  bool raw = false;  // the line did not parse under the reference grammar

  bool operator==(const ExtractedReference&) const = default;
};

inline std::string references_prompt(const ArticleRecord& article) {
  std::ostringstream out;
  out << "List every legal reference cited by the article below, one per line, in the form "
         "\"article(s) N[, M ...] of law|decree NUMBER\", \"this law\", \"this decree\" or "
         "\"the previous article\". Compress three or more consecutive article numbers with an "
         "ellipsis (\"5 ... 8\"). Answer \"none\" when there is no reference.\n\n";
  out << "Content:\n" << article.content << "\nMetadata:\n";
  for (const auto& [k, v] : article_metadata(article)) out << k << ": " << v << "\n";
  out << "References:\n";
  return out.str();
}

inline std::vector<ExtractedReference> parse_reference_lines(std::string_view response) {
  std::vector<ExtractedReference> out;
  std::set<std::string> seen;
  for (std::string_view raw : text::split(response, '\n')) {
    std::string_view line = detail::strip_line_prefix(raw);
    if (text::istarts_with(line, "references:")) line = text::trim(line.substr(11));
    line = detail::strip_quotes(line);
    if (line.empty() || text::iequals(line, "none")) continue;
    ExtractedReference r;
    if (auto ref = try_parse_reference(line)) {
      r.text = format_reference(*ref);
    } else {
      r.text = text::collapse_spaces(line);
      r.raw = true;
    }
    if (seen.insert(r.text).second) out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<ExtractedReference> extract_references(const ArticleRecord& article, Provider& provider) {
  ProviderRequest req{"refs", article_key(article), references_prompt(article)};
  return parse_reference_lines(invoke_with_retry(provider, req));
}

struct GenerationResult {
  std::vector<KnowledgeTriple> triples;
  std::string raw;
  bool empty_output = false;
};

inline GenerationResult generate_triples(const ArticleRecord& article, const std::vector<std::string>& references,
                                         const PromptTemplate& tpl, Provider& provider) {
  const std::string prompt = render_prompt(tpl, make_target(article, references));
  GenerationResult r;
  r.raw = invoke_with_retry(provider, ProviderRequest{"triples", article_key(article), prompt});
  r.triples = parse_triples(r.raw);
  r.empty_output = r.triples.empty();
  return r;
}

struct BatchItem {
  std::string article;
  std::vector<KnowledgeTriple> triples;
  std::string raw;
  std::optional<std::string> error;
  double seconds = 0.0;
};

struct BatchResult {
  std::vector<BatchItem> items;  // input order
  double total_seconds = 0.0;

  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(items.begin(), items.end(), [](const BatchItem& i) { return i.error.has_value(); }));
  }
};

// EID rendering, e.g. 233 s -> "3m53s".
inline std::string format_eid(double seconds) {
  if (seconds < 0) seconds = 0;
  const auto total = static_cast<long long>(seconds + 0.5);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lldm%02llds", total / 60, total % 60);
  return buf;
}

// Runs generation over every article with at most `limit` concurrent calls
// (further capped by the provider's own limit). Failures stay per article.
inline BatchResult run_batch(const std::vector<ArticleRecord>& articles,
                             const std::map<std::string, std::vector<std::string>>& references,
                             const PromptTemplate& tpl, Provider& provider, int limit) {
  using clock = std::chrono::steady_clock;
  if (tpl.examples.empty()) throw Error(ErrorCode::EmptyExamples, "prompt template has no examples");
  BatchResult result;
  result.items.resize(articles.size());
  const int workers = std::max(1, std::min({limit, provider.spec().max_concurrent,
                                            static_cast<int>(std::max<std::size_t>(articles.size(), 1))}));
  std::atomic<std::size_t> next{0};
  const auto start = clock::now();
  auto work = [&]() {
    while (true) {
      const std::size_t i = next++;
      if (i >= articles.size()) return;
      BatchItem& item = result.items[i];
      item.article = article_key(articles[i]);
      const auto t0 = clock::now();
      try {
        const auto it = references.find(item.article);
        static const std::vector<std::string> kNone;
        GenerationResult g = generate_triples(articles[i], it == references.end() ? kNone : it->second, tpl,
                                              provider);
        item.triples = std::move(g.triples);
        item.raw = std::move(g.raw);
      } catch (const std::exception& e) {
        item.error = e.what();
      }
      item.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  result.total_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return result;
}

// triples_<model>.jsonl records: {"article", "model", "triples", "raw", "error"}.
inline void write_batch_jsonl(std::ostream& out, const std::string& model, const BatchResult& batch) {
  for (const auto& item : batch.items) {
    nlohmann::ordered_json j;
    j["article"] = item.article;
    j["model"] = model;
    j["triples"] = triples_to_json(item.triples);
    j["raw"] = item.raw;
    j["error"] = item.error ? nlohmann::ordered_json(*item.error) : nlohmann::ordered_json(nullptr);
    out << j.dump() << '\n';
  }
}

struct GeneratedSet {
  std::string model;
  std::map<std::string, std::vector<KnowledgeTriple>> triples;
  std::map<std::string, std::string> errors;
};

inline GeneratedSet read_generated_jsonl(std::istream& in) {
  GeneratedSet set;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::is_blank(line)) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string key = j.at("article").get<std::string>();
      if (set.model.empty()) set.model = j.value("model", "");
      set.triples[key] = triples_from_json(j.value("triples", nlohmann::json::array()));
      if (j.contains("error") && !j["error"].is_null()) set.errors[key] = j["error"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(ErrorCode::MalformedRecord, n, e.what());
    }
  }
  return set;
}

}  // namespace lexstruct

#endif  // LEXSTRUCT_TRIPLES_HPP_
