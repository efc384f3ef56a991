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

// ROUGE-1/2/L/Lsum and the model comparison report.
//
// Reported numbers are F1 (precision and recall are kept alongside), means
// over articles, in percent rounded half-up to two decimals.

#ifndef LEXSTRUCT_ROUGE_HPP_
#define LEXSTRUCT_ROUGE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lexstruct/error.hpp"
#include "lexstruct/triples.hpp"

namespace lexstruct {

using TokenSequence = std::vector<std::string>;

namespace detail {

// Decodes one UTF-8 code point at s[i]; returns (cp, length). Invalid
// bytes decode as themselves with length 1.
inline std::pair<char32_t, std::size_t> decode_utf8(std::string_view s, std::size_t i) {
  const auto b = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  if (b < 0x80) return {b, 1};
  if ((b & 0xE0) == 0xC0 && cont(1)) {
    return {static_cast<char32_t>(((b & 0x1F) << 6) | (s[i + 1] & 0x3F)), 2};
  }
  if ((b & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    return {static_cast<char32_t>(((b & 0x0F) << 12) | ((s[i + 1] & 0x3F) << 6) | (s[i + 2] & 0x3F)), 3};
  }
  if ((b & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    return {static_cast<char32_t>(((b & 0x07) << 18) | ((s[i + 1] & 0x3F) << 12) | ((s[i + 2] & 0x3F) << 6) |
                                  (s[i + 3] & 0x3F)),
            4};
  }
  return {b, 1};
}

inline void encode_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline bool is_word_cp(char32_t cp) {
  if (cp < 0x80) return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp == 0xA0 || cp == 0xAB || cp == 0xBB || cp == 0xB7 || cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0xA1 && cp <= 0xBF) return false;                // Latin-1 symbols
  if (cp >= 0x2000 && cp <= 0x206F) return false;            // general punctuation
  if (cp == 0x3000 || (cp >= 0xFE10 && cp <= 0xFE6F)) return false;
  return true;
}

inline char32_t fold_case(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  return cp;
}

}  // namespace detail

// Lowercase; split on whitespace and punctuation; a hyphen between two
// digits stays inside the token ("64-46").
inline TokenSequence tokenize(std::string_view s) {
  TokenSequence out;
  std::string cur;
  auto flush = [&]() {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  std::size_t i = 0;
  while (i < s.size()) {
    auto [cp, len] = detail::decode_utf8(s, i);
    if (detail::is_word_cp(cp)) {
      detail::encode_utf8(cur, detail::fold_case(cp));
    } else if (cp == '-' && !cur.empty() && text::is_digit(cur.back()) && i + 1 < s.size() &&
               text::is_digit(s[i + 1])) {
      cur.push_back('-');
    } else {
      flush();
    }
    i += len;
  }
  flush();
  return out;
}

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline PRF make_prf(double matches, double gen_total, double ref_total) {
  PRF m;
  if (gen_total <= 0 || ref_total <= 0) return m;
  m.precision = matches / gen_total;
  m.recall = matches / ref_total;
  if (m.precision + m.recall > 0) m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

inline PRF rouge_n(const TokenSequence& gen, const TokenSequence& ref, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be positive");
  auto grams = [n](const TokenSequence& t) {
    std::map<std::vector<std::string>, long> m;
    for (std::size_t i = 0; i + n <= t.size(); ++i) ++m[TokenSequence(t.begin() + i, t.begin() + i + n)];
    return m;
  };
  const auto g = grams(gen);
  const auto r = grams(ref);
  long matches = 0;
  for (const auto& [gram, c] : g) {
    auto it = r.find(gram);
    if (it != r.end()) matches += std::min(c, it->second);
  }
  const long gt = gen.size() >= static_cast<std::size_t>(n) ? static_cast<long>(gen.size()) - n + 1 : 0;
  const long rt = ref.size() >= static_cast<std::size_t>(n) ? static_cast<long>(ref.size()) - n + 1 : 0;
  return make_prf(matches, gt, rt);
}

inline std::vector<std::vector<int>> lcs_table(const TokenSequence& a, const TokenSequence& b) {
  std::vector<std::vector<int>> t(a.size() + 1, std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t;
}

inline std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<int> prev(b.size() + 1, 0);
  std::vector<int> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return static_cast<std::size_t>(prev[b.size()]);
}

inline PRF rouge_l(const TokenSequence& gen, const TokenSequence& ref) {
  return make_prf(static_cast<double>(lcs_length(gen, ref)), gen.size(), ref.size());
}

namespace detail {

// Indices into ref of one LCS between ref and gen.
inline std::vector<std::size_t> lcs_indices(const TokenSequence& ref, const TokenSequence& gen) {
  const auto t = lcs_table(ref, gen);
  std::vector<std::size_t> idx;
  std::size_t i = ref.size();
  std::size_t j = gen.size();
  while (i > 0 && j > 0) {
    if (ref[i - 1] == gen[j - 1]) {
      idx.push_back(i - 1);
      --i;
      --j;
    } else if (t[i - 1][j] > t[i][j - 1]) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

// Summary-level LCS: for each reference line, the union of its LCS hits
// against every generated line, with hits clipped by the token counts left
// on both sides.
inline PRF rouge_lsum(const std::vector<TokenSequence>& gen_lines, const std::vector<TokenSequence>& ref_lines) {
  std::map<std::string, long> gen_left;
  std::map<std::string, long> ref_left;
  std::size_t gen_total = 0;
  std::size_t ref_total = 0;
  for (const auto& l : gen_lines) {
    for (const auto& t : l) ++gen_left[t];
    gen_total += l.size();
  }
  for (const auto& l : ref_lines) {
    for (const auto& t : l) ++ref_left[t];
    ref_total += l.size();
  }
  long hits = 0;
  for (const auto& ref : ref_lines) {
    std::set<std::size_t> uni;
    for (const auto& gen : gen_lines) {
      for (std::size_t k : detail::lcs_indices(ref, gen)) uni.insert(k);
    }
    for (std::size_t k : uni) {
      const std::string& tok = ref[k];
      if (gen_left[tok] > 0 && ref_left[tok] > 0) {
        ++hits;
        --gen_left[tok];
        --ref_left[tok];
      }
    }
  }
  return make_prf(hits, gen_total, ref_total);
}

struct RougeScore {
  PRF r1;
  PRF r2;
  PRF rl;
  PRF rlsum;
};

inline RougeScore score_article(const std::vector<KnowledgeTriple>& gen, const std::vector<KnowledgeTriple>& ref) {
  std::vector<TokenSequence> gl;
  std::vector<TokenSequence> rlines;
  TokenSequence gflat;
  TokenSequence rflat;
  for (const auto& t : gen) {
    gl.push_back(tokenize(serialize_triple(t)));
    gflat.insert(gflat.end(), gl.back().begin(), gl.back().end());
  }
  for (const auto& t : ref) {
    rlines.push_back(tokenize(serialize_triple(t)));
    rflat.insert(rflat.end(), rlines.back().begin(), rlines.back().end());
  }
  RougeScore s;
  s.r1 = rouge_n(gflat, rflat, 1);
  s.r2 = rouge_n(gflat, rflat, 2);
  s.rl = rouge_l(gflat, rflat);
  s.rlsum = rouge_lsum(gl, rlines);
  return s;
}

// ---------------------------------------------------------------------------
// Report

enum class Column { R1, R2, RL, RLsum, EID, NPB };

struct ComparisonRow {
  std::string model;
  double r1 = 0.0;  // percent, rounded
  double r2 = 0.0;
  double rl = 0.0;
  double rlsum = 0.0;
  // Unrounded means of precision / recall per metric, in [0, 1].
  PRF mean_r1;
  PRF mean_r2;
  PRF mean_rl;
  PRF mean_rlsum;
  std::optional<double> eid_seconds;
  std::optional<double> npb;
  std::size_t articles = 0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

// Half-up to two decimals on the percent value.
inline double round_percent(double fraction) {
  const double p = fraction * 100.0;
  return std::floor(p * 100.0 + 0.5 + 1e-9) / 100.0;
}

inline std::string format_percent(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", percent);
  return buf;
}

using ArticleScores = std::map<std::string, RougeScore>;

inline ComparisonReport build_report(const std::map<std::string, ArticleScores>& results,
                                     const std::map<std::string, double>& eid_seconds = {},
                                     const std::map<std::string, double>& npb = {}) {
  ComparisonReport report;
  const std::set<std::string>* first_keys = nullptr;
  std::set<std::string> reference_keys;
  std::string first_model;
  for (const auto& [model, scores] : results) {
    std::set<std::string> keys;
    for (const auto& [k, v] : scores) keys.insert(k);
    if (!first_keys) {
      reference_keys = keys;
      first_keys = &reference_keys;
      first_model = model;
    } else if (keys != reference_keys) {
      throw Error(ErrorCode::MismatchedArticleSets,
                  "model '" + model + "' was evaluated on a different article set than '" + first_model + "'");
    }
    ComparisonRow row;
    row.model = model;
    row.articles = scores.size();
    auto acc = [](PRF& into, const PRF& x) {
      into.precision += x.precision;
      into.recall += x.recall;
      into.f1 += x.f1;
    };
    for (const auto& [k, s] : scores) {
      acc(row.mean_r1, s.r1);
      acc(row.mean_r2, s.r2);
      acc(row.mean_rl, s.rl);
      acc(row.mean_rlsum, s.rlsum);
    }
    const double n = scores.empty() ? 1.0 : static_cast<double>(scores.size());
    for (PRF* p : {&row.mean_r1, &row.mean_r2, &row.mean_rl, &row.mean_rlsum}) {
      p->precision /= n;
      p->recall /= n;
      p->f1 /= n;
    }
    row.r1 = round_percent(row.mean_r1.f1);
    row.r2 = round_percent(row.mean_r2.f1);
    row.rl = round_percent(row.mean_rl.f1);
    row.rlsum = round_percent(row.mean_rlsum.f1);
    if (auto it = eid_seconds.find(model); it != eid_seconds.end()) row.eid_seconds = it->second;
    if (auto it = npb.find(model); it != npb.end()) row.npb = it->second;
    report.rows.push_back(std::move(row));
  }
  return report;
}

inline std::optional<double> column_value(const ComparisonRow& r, Column c) {
  switch (c) {
    case Column::R1: return r.r1;
    case Column::R2: return r.r2;
    case Column::RL: return r.rl;
    case Column::RLsum: return r.rlsum;
    case Column::EID:
      if (r.eid_seconds) return std::floor(*r.eid_seconds + 0.5);
      return std::nullopt;
    case Column::NPB: return r.npb;
  }
  return std::nullopt;
}

inline bool higher_is_better(Column c) { return c != Column::EID; }

inline Column column_from_name(std::string_view name) {
  const std::string n = text::lower(name);
  if (n == "r-1" || n == "r1") return Column::R1;
  if (n == "r-2" || n == "r2") return Column::R2;
  if (n == "r-l" || n == "rl") return Column::RL;
  if (n == "r-lsum" || n == "rlsum") return Column::RLsum;
  if (n == "eid") return Column::EID;
  if (n == "npb") return Column::NPB;
  throw Error(ErrorCode::ConfigError, "unknown report column '" + std::string(name) + "'");
}

// Sorts best-first on the column (missing values last), model name breaks ties.
inline void sort_report(ComparisonReport& report, Column c) {
  std::stable_sort(report.rows.begin(), report.rows.end(), [c](const ComparisonRow& a, const ComparisonRow& b) {
    const auto x = column_value(a, c);
    const auto y = column_value(b, c);
    if (x.has_value() != y.has_value()) return x.has_value();
    if (x && *x != *y) return higher_is_better(c) ? *x > *y : *x < *y;
    return a.model < b.model;
  });
}

// 1, 2, 3 for the best three distinct values of the column; 0 otherwise.
// Equal values share a rank.
inline int column_rank(const ComparisonReport& report, const ComparisonRow& row, Column c) {
  const auto v = column_value(row, c);
  if (!v) return 0;
  std::set<double> distinct;
  for (const auto& r : report.rows) {
    if (auto x = column_value(r, c)) distinct.insert(*x);
  }
  int rank = 1;
  if (higher_is_better(c)) {
    for (auto it = distinct.rbegin(); it != distinct.rend(); ++it, ++rank) {
      if (*it == *v) return rank <= 3 ? rank : 0;
    }
  } else {
    for (auto it = distinct.begin(); it != distinct.end(); ++it, ++rank) {
      if (*it == *v) return rank <= 3 ? rank : 0;
    }
  }
  return 0;
}

inline std::string format_npb(const std::optional<double>& npb) {
  if (!npb) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", *npb);
  return buf;
}

inline void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
  out << "model,R-1,R-2,R-L,R-Lsum,EID,NPB\n";
  for (const auto& r : report.rows) {
    out << csv_field(r.model) << ',' << format_percent(r.r1) << ',' << format_percent(r.r2) << ','
        << format_percent(r.rl) << ',' << format_percent(r.rlsum) << ','
        << (r.eid_seconds ? format_eid(*r.eid_seconds) : "") << ',' << format_npb(r.npb) << '\n';
  }
}

inline void write_comparison_markdown(std::ostream& out, const ComparisonReport& report) {
  static const char* kMarks[] = {"", " (1st)", " (2nd)", " (3rd)"};
  out << "| Model | R-1 | R-2 | R-L | R-Lsum | EID | NPB |\n";
  out << "|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& r : report.rows) {
    auto cell = [&](Column c, const std::string& v) { return v + kMarks[column_rank(report, r, c)]; };
    out << "| " << r.model << " | " << cell(Column::R1, format_percent(r.r1)) << " | "
        << cell(Column::R2, format_percent(r.r2)) << " | " << cell(Column::RL, format_percent(r.rl)) << " | "
        << cell(Column::RLsum, format_percent(r.rlsum)) << " | "
        << (r.eid_seconds ? cell(Column::EID, format_eid(*r.eid_seconds)) : "") << " | "
        << (r.npb ? cell(Column::NPB, format_npb(r.npb)) : "") << " |\n";
  }
  out << "\nScores are mean per-article F1 in percent. (1st)/(2nd)/(3rd) mark the best three values of "
         "each column; lower is better for EID.\n";
}

// Scores every ground-truth article; a missing or failed generation scores 0.
inline ArticleScores score_generated(const GeneratedSet& gen, const GroundTruth& truth) {
  ArticleScores out;
  for (const auto& [key, entry] : truth) {
    auto it = gen.triples.find(key);
    static const std::vector<KnowledgeTriple> kNone;
    out[key] = score_article(it == gen.triples.end() ? kNone : it->second, entry.triples);
  }
  return out;
}

}  // namespace lexstruct

#endif  // LEXSTRUCT_ROUGE_HPP_
