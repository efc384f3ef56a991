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

// Grammar for legal identifiers.
//
//   instrument number   <year>-<seq>            "2020-567", "64-46"
//   article label       [L.|R.] <n> [adverb]    "L. 1", "5 bis", "R. 38"
//   reference           article(s) <items> [of law|decree <number>]
//                       | this law | this decree | the previous article
//                       | <entity name>
//   items               <item> (, <item>)*
//   item                <label> | <label> ... <label>
//
// Canonical references compress every maximal run of at least three
// consecutive plain numbers (no adverb) into "<first> ... <last>".

#ifndef LEXSTRUCT_NUMBERING_HPP_
#define LEXSTRUCT_NUMBERING_HPP_

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexstruct/error.hpp"
#include "lexstruct/text.hpp"

namespace lexstruct {

struct InstrumentNumber {
  int year = 0;
  int seq = 0;
  std::string raw;  // as printed, e.g. "98-03"

  const std::string& str() const { return raw; }
  auto operator<=>(const InstrumentNumber&) const = default;
};

enum class ArticlePrefix { None, L, R };
enum class Multiplicative { None, Bis, Ter, Quater };

inline std::string_view multiplicative_name(Multiplicative m) {
  switch (m) {
    case Multiplicative::None: return "";
    case Multiplicative::Bis: return "bis";
    case Multiplicative::Ter: return "ter";
    case Multiplicative::Quater: return "quater";
  }
  return "";
}

struct ArticleLabel {
  ArticlePrefix prefix = ArticlePrefix::None;
  int number = 0;
  Multiplicative multiplicative = Multiplicative::None;

  auto operator<=>(const ArticleLabel&) const = default;
};

inline std::string format_article_label(const ArticleLabel& label) {
  std::string out;
  if (label.prefix == ArticlePrefix::L) out = "L. ";
  if (label.prefix == ArticlePrefix::R) out = "R. ";
  out += std::to_string(label.number);
  if (label.multiplicative != Multiplicative::None) {
    out.push_back(' ');
    out += multiplicative_name(label.multiplicative);
  }
  return out;
}

enum class ReferenceTarget { Absolute, CurrentLaw, CurrentDecree, PreviousArticle, NamedEntity };
enum class InstrumentKind { Law, Decree };

struct InstrumentRef {
  InstrumentKind kind = InstrumentKind::Law;
  InstrumentNumber number;

  auto operator<=>(const InstrumentRef&) const = default;
};

struct LegalReference {
  ReferenceTarget target = ReferenceTarget::Absolute;
  std::set<ArticleLabel> articles;          // Absolute only
  std::optional<InstrumentRef> instrument;  // Absolute only
  std::string entity_name;                  // NamedEntity only

  bool operator==(const LegalReference&) const = default;

  static LegalReference absolute(std::set<ArticleLabel> articles,
                                 std::optional<InstrumentRef> instrument = std::nullopt) {
    LegalReference r;
    r.articles = std::move(articles);
    r.instrument = std::move(instrument);
    return r;
  }
  static LegalReference relative(ReferenceTarget target) {
    LegalReference r;
    r.target = target;
    return r;
  }
  static LegalReference named(std::string name) {
    LegalReference r;
    r.target = ReferenceTarget::NamedEntity;
    r.entity_name = std::move(name);
    return r;
  }
};

namespace detail {

inline bool is_word_byte(char c) {
  return text::is_alpha(c) || text::is_digit(c) || static_cast<unsigned char>(c) >= 0x80;
}

// Skips ASCII whitespace and NBSP.
inline std::size_t skip_blank(std::string_view s, std::size_t pos) {
  while (pos < s.size()) {
    if (text::is_space(s[pos])) {
      ++pos;
    } else if (static_cast<unsigned char>(s[pos]) == 0xC2 && pos + 1 < s.size() &&
               static_cast<unsigned char>(s[pos + 1]) == 0xA0) {
      pos += 2;
    } else {
      break;
    }
  }
  return pos;
}

// Case-insensitive keyword at pos followed by a word boundary; returns the
// position after it.
inline std::optional<std::size_t> match_word(std::string_view s, std::size_t pos,
                                             std::string_view word) {
  if (!text::istarts_with(s.substr(pos), word)) return std::nullopt;
  const std::size_t end = pos + word.size();
  if (end < s.size() && is_word_byte(s[end])) return std::nullopt;
  return end;
}

// Length of an ellipsis token at pos ("..." or U+2026), 0 when absent.
inline std::size_t ellipsis_at(std::string_view s, std::size_t pos) {
  if (s.substr(pos, 3) == "...") return 3;
  if (s.substr(pos, 3) == "\xE2\x80\xA6") return 3;
  return 0;
}

}  // namespace detail

// Scans an article label at the start of s. Returns the label and the number
// of bytes consumed, or nullopt when s does not begin with a label.
// "premier"/"1er" map to 1; "quarter" is read as "quater".
inline std::optional<std::pair<ArticleLabel, std::size_t>> scan_article_label(std::string_view s) {
  using detail::is_word_byte;
  ArticleLabel label;
  std::size_t pos = 0;
  if (!s.empty() && (s[0] == 'L' || s[0] == 'R')) {
    std::size_t p = 1;
    if (p < s.size() && s[p] == '.') p = detail::skip_blank(s, p + 1);
    if (p > 1 && p < s.size() && text::is_digit(s[p])) {
      label.prefix = s[0] == 'L' ? ArticlePrefix::L : ArticlePrefix::R;
      pos = p;
    }
  }
  if (pos < s.size() && text::is_digit(s[pos])) {
    long value = 0;
    std::size_t p = pos;
    while (p < s.size() && text::is_digit(s[p])) {
      value = value * 10 + (s[p] - '0');
      if (value > 1'000'000) return std::nullopt;
      ++p;
    }
    if (value == 1 && p - pos == 1) {
      // "1er" / "1re"
      for (std::string_view suffix : {"er", "re"}) {
        if (s.substr(p, 2) == suffix && (p + 2 >= s.size() || !is_word_byte(s[p + 2]))) {
          p += 2;
          break;
        }
      }
    }
    if (p < s.size() && is_word_byte(s[p]) && !detail::ellipsis_at(s, p)) return std::nullopt;
    if (value <= 0) return std::nullopt;
    label.number = static_cast<int>(value);
    pos = p;
  } else if (label.prefix == ArticlePrefix::None) {
    std::optional<std::size_t> end = detail::match_word(s, 0, "premier");
    if (!end) end = detail::match_word(s, 0, "premi\xC3\xA8re");
    if (!end) return std::nullopt;
    label.number = 1;
    pos = *end;
  } else {
    return std::nullopt;
  }
  const std::size_t after_number = pos;
  std::size_t p = detail::skip_blank(s, pos);
  if (p > after_number) {
    static constexpr std::pair<std::string_view, Multiplicative> kAdverbs[] = {
        {"bis", Multiplicative::Bis},
        {"ter", Multiplicative::Ter},
        {"quater", Multiplicative::Quater},
        {"quarter", Multiplicative::Quater},
    };
    for (const auto& [word, mult] : kAdverbs) {
      if (auto end = detail::match_word(s, p, word)) {
        label.multiplicative = mult;
        pos = *end;
        break;
      }
    }
  }
  return std::make_pair(label, pos);
}

inline ArticleLabel parse_article_label(std::string_view s) {
  const std::string_view t = text::trim(s);
  auto scanned = scan_article_label(t);
  if (!scanned || scanned->second != t.size()) {
    throw Error(ErrorCode::NotAnArticleLabel, "'" + std::string(s) + "'");
  }
  return scanned->first;
}

inline InstrumentNumber parse_instrument_number(std::string_view s) {
  const std::string_view t = text::trim(s);
  const std::size_t dash = t.find('-');
  auto digits_only = [](std::string_view part) {
    if (part.empty()) return false;
    for (char c : part) {
      if (!text::is_digit(c)) return false;
    }
    return true;
  };
  if (dash == std::string_view::npos) {
    throw Error(ErrorCode::NotAnInstrumentNumber, "'" + std::string(s) + "'");
  }
  const std::string_view year = t.substr(0, dash);
  const std::string_view seq = t.substr(dash + 1);
  if (!digits_only(year) || !digits_only(seq) || (year.size() != 2 && year.size() != 4) ||
      seq.size() > 6) {
    throw Error(ErrorCode::NotAnInstrumentNumber, "'" + std::string(s) + "'");
  }
  InstrumentNumber n;
  n.year = std::stoi(std::string(year));
  n.seq = std::stoi(std::string(seq));
  n.raw = std::string(t);
  if (n.seq <= 0) throw Error(ErrorCode::NotAnInstrumentNumber, "zero sequence in '" + n.raw + "'");
  return n;
}

inline std::set<int> expand_range(int first, int last) {
  if (first > last) {
    throw Error(ErrorCode::InvertedRange,
                std::to_string(first) + " > " + std::to_string(last));
  }
  std::set<int> out;
  for (int i = first; i <= last; ++i) out.insert(out.end(), i);
  return out;
}

// Structural validity: Absolute has articles sharing one prefix, NamedEntity
// has a name, relative targets carry nothing.
inline bool is_valid(const LegalReference& r) {
  switch (r.target) {
    case ReferenceTarget::Absolute: {
      if (r.articles.empty()) return false;
      const ArticlePrefix p = r.articles.begin()->prefix;
      for (const auto& a : r.articles) {
        if (a.prefix != p || a.number <= 0) return false;
      }
      return r.entity_name.empty();
    }
    case ReferenceTarget::NamedEntity:
      return !r.entity_name.empty() && r.articles.empty() && !r.instrument;
    default:
      return r.articles.empty() && !r.instrument && r.entity_name.empty();
  }
}

inline std::string format_reference(const LegalReference& r) {
  switch (r.target) {
    case ReferenceTarget::CurrentLaw: return "this law";
    case ReferenceTarget::CurrentDecree: return "this decree";
    case ReferenceTarget::PreviousArticle: return "the previous article";
    case ReferenceTarget::NamedEntity: return r.entity_name;
    case ReferenceTarget::Absolute: break;
  }
  const std::vector<ArticleLabel> labels(r.articles.begin(), r.articles.end());
  std::string out = labels.size() == 1 ? "article " : "articles ";
  bool first_item = true;
  std::size_t i = 0;
  while (i < labels.size()) {
    // Extend a run of plain consecutive numbers starting at i.
    std::size_t j = i;
    if (labels[i].multiplicative == Multiplicative::None) {
      while (j + 1 < labels.size() && labels[j + 1].multiplicative == Multiplicative::None &&
             labels[j + 1].prefix == labels[j].prefix &&
             labels[j + 1].number == labels[j].number + 1) {
        ++j;
      }
    }
    if (!first_item) out += ", ";
    first_item = false;
    if (j - i + 1 >= 3) {
      out += format_article_label(labels[i]);
      out += " ... ";
      out += format_article_label(labels[j]);
      i = j + 1;
    } else {
      out += format_article_label(labels[i]);
      ++i;
    }
  }
  if (r.instrument) {
    out += r.instrument->kind == InstrumentKind::Law ? " of law " : " of decree ";
    out += r.instrument->number.raw;
  }
  return out;
}

namespace detail {

[[noreturn]] inline void reject(std::string_view s, std::size_t offset, std::size_t length,
                                const std::string& why) {
  offset = std::min(offset, s.size());
  length = std::min(length, s.size() - offset);
  throw UnparsableReferenceError(
      why + " at '" + std::string(s.substr(offset, length)) + "' in '" + std::string(s) + "'",
      offset, length);
}

inline std::size_t token_end(std::string_view s, std::size_t pos) {
  while (pos < s.size() && !text::is_space(s[pos]) && s[pos] != ',') ++pos;
  return pos;
}

inline LegalReference parse_absolute(std::string_view s, std::size_t pos) {
  LegalReference ref;
  std::optional<ArticlePrefix> prefix;
  auto check_prefix = [&](const ArticleLabel& label, std::size_t at, std::size_t len) {
    if (prefix && *prefix != label.prefix) reject(s, at, len, "mixed article prefixes");
    prefix = label.prefix;
  };
  while (true) {
    pos = skip_blank(s, pos);
    const std::size_t item_start = pos;
    auto first = scan_article_label(s.substr(pos));
    if (!first) reject(s, pos, token_end(s, pos) - pos, "expected article number");
    check_prefix(first->first, pos, first->second);
    pos += first->second;
    std::size_t look = skip_blank(s, pos);
    if (const std::size_t dots = ellipsis_at(s, look)) {
      look = skip_blank(s, look + dots);
      auto last = scan_article_label(s.substr(look));
      if (!last) reject(s, item_start, token_end(s, look) - item_start, "open range");
      const std::size_t range_end = look + last->second;
      check_prefix(last->first, look, last->second);
      const ArticleLabel& a = first->first;
      const ArticleLabel& b = last->first;
      if (a.multiplicative != Multiplicative::None || b.multiplicative != Multiplicative::None) {
        reject(s, item_start, range_end - item_start, "multiplicative inside range");
      }
      if (a.number > b.number) {
        reject(s, item_start, range_end - item_start, "inverted range");
      }
      for (int n : expand_range(a.number, b.number)) {
        ref.articles.insert(ArticleLabel{a.prefix, n, Multiplicative::None});
      }
      pos = range_end;
    } else {
      ref.articles.insert(first->first);
    }
    look = skip_blank(s, pos);
    if (look < s.size() && s[look] == ',') {
      pos = look + 1;
      continue;
    }
    pos = look;
    break;
  }
  if (pos == s.size()) return ref;
  const std::size_t tail = pos;
  auto of = match_word(s, pos, "of");
  if (!of) reject(s, tail, s.size() - tail, "unexpected text");
  pos = skip_blank(s, *of);
  InstrumentKind kind;
  if (auto e = match_word(s, pos, "law")) {
    kind = InstrumentKind::Law;
    pos = *e;
  } else if (auto d = match_word(s, pos, "decree")) {
    kind = InstrumentKind::Decree;
    pos = *d;
  } else {
    reject(s, tail, s.size() - tail, "expected 'law' or 'decree'");
  }
  pos = skip_blank(s, pos);
  const std::size_t num_start = pos;
  const std::size_t num_end = token_end(s, pos);
  InstrumentNumber number;
  try {
    number = parse_instrument_number(s.substr(num_start, num_end - num_start));
  } catch (const Error&) {
    reject(s, num_start, num_end - num_start, "expected instrument number");
  }
  if (skip_blank(s, num_end) != s.size()) {
    reject(s, num_end, s.size() - num_end, "trailing text");
  }
  ref.instrument = InstrumentRef{kind, std::move(number)};
  return ref;
}

}  // namespace detail

// Inverse of format_reference on canonical strings; also accepts extra
// whitespace, a capitalized leading word, keyword case variants and the
// Unicode ellipsis.
inline LegalReference parse_reference(std::string_view s) {
  const std::size_t start = detail::skip_blank(s, 0);
  if (start == s.size()) detail::reject(s, 0, s.size(), "empty reference");
  const std::string folded = text::lower(text::collapse_spaces(s));
  if (folded == "this law") return LegalReference::relative(ReferenceTarget::CurrentLaw);
  if (folded == "this decree") return LegalReference::relative(ReferenceTarget::CurrentDecree);
  if (folded == "the previous article" || folded == "previous article") {
    return LegalReference::relative(ReferenceTarget::PreviousArticle);
  }
  for (std::string_view kw : {"articles", "article"}) {
    if (auto end = detail::match_word(s, start, kw)) return detail::parse_absolute(s, *end);
  }
  // Named entity: must begin with a letter and must not look like a bare
  // article label or contain a range.
  const char c0 = s[start];
  if (!text::is_alpha(c0) && static_cast<unsigned char>(c0) < 0x80) {
    detail::reject(s, start, detail::token_end(s, start) - start, "not a reference");
  }
  if (scan_article_label(s.substr(start))) {
    detail::reject(s, start, detail::token_end(s, start) - start,
                   "article label without 'article' keyword");
  }
  for (std::size_t i = start; i < s.size(); ++i) {
    if (detail::ellipsis_at(s, i)) detail::reject(s, i, 3, "range outside an article list");
  }
  return LegalReference::named(text::collapse_spaces(s));
}

inline std::optional<LegalReference> try_parse_reference(std::string_view s) {
  try {
    return parse_reference(s);
  } catch (const UnparsableReferenceError&) {
    return std::nullopt;
  }
}

}  // namespace lexstruct

#endif  // LEXSTRUCT_NUMBERING_HPP_
