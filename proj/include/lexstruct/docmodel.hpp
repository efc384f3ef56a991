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

// Document interchange representation.
//
// A legal document is a stream of elements, one JSON object per line:
//
//   {"k": "<kind-tag>", "t": "<text>", "h": <level or null>}
//
// with kind-tag one of "sub", "rsub", "art", "p", "tr" or "" (unclassified,
// resolved by classify_element). Corpus files live at
// <root>/<domain>/<law_num>/<name>_<number>_<YYYY-MM-DD>.jsonl.

#ifndef LEXSTRUCT_DOCMODEL_HPP_
#define LEXSTRUCT_DOCMODEL_HPP_

#include <chrono>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lexstruct/error.hpp"
#include "lexstruct/numbering.hpp"
#include "lexstruct/text.hpp"

namespace lexstruct {

enum class ElementKind { SubdivisionMarker, RentSubdivisionMarker, ArticleStart, Paragraph, TableRow, Empty };

struct DocumentElement {
  ElementKind kind = ElementKind::Paragraph;
  std::string text;
  std::optional<int> level_hint;

  bool operator==(const DocumentElement&) const = default;
};

inline std::string_view element_tag(ElementKind kind) {
  switch (kind) {
    case ElementKind::SubdivisionMarker: return "sub";
    case ElementKind::RentSubdivisionMarker: return "rsub";
    case ElementKind::ArticleStart: return "art";
    case ElementKind::Paragraph: return "p";
    case ElementKind::TableRow: return "tr";
    case ElementKind::Empty: return "";
  }
  return "";
}

// Subdivision ranks from the top of the hierarchy down. The rent ranks sit
// below the general ones.
enum class Rank { Part, Book, Title, Chapter, Section, Paragraph, Locality, RentCategory, HousingType };

inline constexpr Rank kAllRanks[] = {Rank::Part,      Rank::Book,     Rank::Title,
                                     Rank::Chapter,   Rank::Section,  Rank::Paragraph,
                                     Rank::Locality,  Rank::RentCategory, Rank::HousingType};

inline std::string_view rank_name(Rank r) {
  switch (r) {
    case Rank::Part: return "Part";
    case Rank::Book: return "Book";
    case Rank::Title: return "Title";
    case Rank::Chapter: return "Chapter";
    case Rank::Section: return "Section";
    case Rank::Paragraph: return "Paragraph";
    case Rank::Locality: return "Locality";
    case Rank::RentCategory: return "RentCategory";
    case Rank::HousingType: return "HousingType";
  }
  return "";
}

inline std::optional<Rank> rank_from_name(std::string_view name) {
  for (Rank r : kAllRanks) {
    if (rank_name(r) == name) return r;
  }
  return std::nullopt;
}

inline bool is_rent_rank(Rank r) {
  return r == Rank::Locality || r == Rank::RentCategory || r == Rank::HousingType;
}

struct SubdivisionEntry {
  Rank rank = Rank::Title;
  std::string label;
  std::optional<std::string> heading;

  bool operator==(const SubdivisionEntry&) const = default;
};

using SubdivisionPath = std::vector<SubdivisionEntry>;

// Ranks strictly descend along the path; rent ranks only in rent documents.
inline bool is_valid_path(const SubdivisionPath& path, bool is_rent) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!is_rent && is_rent_rank(path[i].rank)) return false;
    if (i > 0 && static_cast<int>(path[i - 1].rank) >= static_cast<int>(path[i].rank)) return false;
  }
  return true;
}

// Drops every entry at or below the new entry's rank, then appends it.
inline void enter_subdivision(SubdivisionPath& path, SubdivisionEntry entry) {
  while (!path.empty() && static_cast<int>(path.back().rank) >= static_cast<int>(entry.rank)) {
    path.pop_back();
  }
  path.push_back(std::move(entry));
}

// Marker keywords. Lookup is ASCII-case-insensitive; accented variants are
// listed explicitly.
struct KeywordTable {
  std::vector<std::pair<std::string, Rank>> subdivisions;
  std::vector<std::pair<std::string, Rank>> rent;

  static KeywordTable french_default() {
    KeywordTable t;
    t.subdivisions = {
        {"PARTIE", Rank::Part},          {"LIVRE", Rank::Book},
        {"TITRE", Rank::Title},          {"CHAPITRE", Rank::Chapter},
        {"SECTION", Rank::Section},      {"SOUS-SECTION", Rank::Paragraph},
        {"PARAGRAPHE", Rank::Paragraph},
    };
    t.rent = {
        {"LOCALIT\xC3\x89", Rank::Locality},  {"Localit\xC3\xA9", Rank::Locality},
        {"LOCALITE", Rank::Locality},         {"COMMUNE", Rank::Locality},
        {"CAT\xC3\x89GORIE", Rank::RentCategory}, {"Cat\xC3\xA9gorie", Rank::RentCategory},
        {"CATEGORIE", Rank::RentCategory},
        {"TYPE DE LOGEMENT", Rank::HousingType}, {"TYPE D'HABITATION", Rank::HousingType},
    };
    return t;
  }

  // {"subdivisions": [{"keyword": "TITRE", "rank": "Title"}, ...],
  //  "rent": [{"keyword": "Localité", "rank": "Locality"}, ...]}
  static KeywordTable from_json(const nlohmann::json& j) {
    KeywordTable t;
    auto load = [](const nlohmann::json& list, bool rent) {
      std::vector<std::pair<std::string, Rank>> out;
      for (const auto& item : list) {
        const auto kw = item.at("keyword").get<std::string>();
        const auto rank = rank_from_name(item.at("rank").get<std::string>());
        if (!rank || kw.empty() || is_rent_rank(*rank) != rent) {
          throw Error(ErrorCode::ConfigError, "bad keyword table entry: " + item.dump());
        }
        out.emplace_back(kw, *rank);
      }
      return out;
    };
    if (j.contains("subdivisions")) t.subdivisions = load(j.at("subdivisions"), false);
    if (j.contains("rent")) t.rent = load(j.at("rent"), true);
    return t;
  }

  static KeywordTable load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open keyword table " + path);
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
  }
};

namespace detail {

inline bool is_separator_at(std::string_view s, std::size_t pos, std::size_t* len) {
  static constexpr std::string_view kSeps[] = {"\xE2\x80\x94", "\xE2\x80\x93", "-", ":", "."};
  for (std::string_view sep : kSeps) {
    if (s.substr(pos, sep.size()) == sep) {
      *len = sep.size();
      return true;
    }
  }
  return false;
}

// Strips a leading run of separators and blanks (dashes, ". " plus dash, ": ").
inline std::string_view strip_leading_separators(std::string_view s) {
  std::size_t pos = 0;
  while (true) {
    pos = skip_blank(s, pos);
    std::size_t len = 0;
    if (pos < s.size() && is_separator_at(s, pos, &len)) {
      pos += len;
      continue;
    }
    break;
  }
  return s.substr(pos);
}

inline bool is_roman(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (std::string_view("IVXLCDM").find(c) == std::string_view::npos) return false;
  }
  return true;
}

inline bool is_subdivision_label(std::string_view label) {
  if (label.empty()) return false;
  if (is_roman(label)) return true;
  if (label.size() == 1 && label[0] >= 'A' && label[0] <= 'Z') return true;
  std::size_t i = 0;
  while (i < label.size() && text::is_digit(label[i])) ++i;
  if (i > 0) {
    const std::string_view rest = label.substr(i);
    return rest.empty() || rest == "er" || rest == "re" || rest == "e";
  }
  for (std::string_view word : {"premier", "premi\xC3\xA8re", "premiere", "PREMI\xC3\x88RE",
                                "unique", "pr\xC3\xA9liminaire", "PR\xC3\x89LIMINAIRE",
                                "preliminaire"}) {
    if (text::iequals(label, word)) return true;
  }
  return false;
}

inline bool all_upper(std::string_view s) {
  for (char c : s) {
    if (c >= 'a' && c <= 'z') return false;
  }
  return true;
}

}  // namespace detail

struct SubdivisionMatch {
  Rank rank;
  std::string label;
  std::optional<std::string> heading;
};

// Recognizes "<KEYWORD> <label>[ <sep> <heading>]". A heading without a
// separator is accepted only when the keyword is written in capitals, which
// keeps sentences such as "Section 3 du présent chapitre..." as paragraphs.
inline std::optional<SubdivisionMatch> match_subdivision(std::string_view raw,
                                                         const KeywordTable& table) {
  const std::string_view s = text::trim(raw);
  for (const auto& [keyword, rank] : table.subdivisions) {
    auto end = detail::match_word(s, 0, keyword);
    if (!end) continue;
    std::size_t pos = detail::skip_blank(s, *end);
    if (pos == *end) continue;  // keyword must be followed by a blank
    std::size_t label_end = pos;
    while (label_end < s.size() && !text::is_space(s[label_end]) && s[label_end] != ':' &&
           s[label_end] != ',' && !(static_cast<unsigned char>(s[label_end]) == 0xC2)) {
      ++label_end;
    }
    std::string_view label = s.substr(pos, label_end - pos);
    while (!label.empty() && (label.back() == '.' || label.back() == '-')) label.remove_suffix(1);
    if (!detail::is_subdivision_label(label)) continue;
    std::string_view rest = text::trim(s.substr(label_end));
    SubdivisionMatch m{rank, std::string(label), std::nullopt};
    if (!rest.empty()) {
      std::size_t len = 0;
      const bool has_sep = detail::is_separator_at(rest, 0, &len);
      if (!has_sep && !detail::all_upper(s.substr(0, *end))) continue;
      std::string_view heading = text::trim(detail::strip_leading_separators(rest));
      if (!heading.empty()) m.heading = std::string(heading);
    }
    return m;
  }
  return std::nullopt;
}

// Recognizes "<rent keyword>[ :] <label>", e.g. "Localité : Dakar-Plateau",
// "Catégorie B".
inline std::optional<SubdivisionMatch> match_rent_subdivision(std::string_view raw,
                                                              const KeywordTable& table) {
  const std::string_view s = text::trim(raw);
  for (const auto& [keyword, rank] : table.rent) {
    auto end = detail::match_word(s, 0, keyword);
    if (!end) continue;
    std::string_view label = text::trim(detail::strip_leading_separators(s.substr(*end)));
    while (!label.empty() && label.back() == '.') label.remove_suffix(1);
    if (label.empty() || label.size() > 80) continue;
    return SubdivisionMatch{rank, std::string(label), std::nullopt};
  }
  return std::nullopt;
}

// "Article" + optional label + (separator | end of line). A following word
// without a separator ("Article 3 du décret ...") is body text.
inline bool is_article_start(std::string_view raw) {
  const std::string_view s = text::trim(raw);
  auto end = detail::match_word(s, 0, "article");
  if (!end) return false;
  std::size_t pos = detail::skip_blank(s, *end);
  if (pos == s.size()) return false;  // bare "Article"
  std::size_t len = 0;
  if (detail::is_separator_at(s, pos, &len)) return true;  // "Article." then a dash
  if (pos == *end) return false;
  auto label = scan_article_label(s.substr(pos));
  if (!label) return false;
  pos = detail::skip_blank(s, pos + label->second);
  return pos == s.size() || detail::is_separator_at(s, pos, &len);
}

inline ElementKind classify_element(std::string_view text_value, std::optional<int> level_hint,
                                    bool is_rent,
                                    const KeywordTable& table = KeywordTable::french_default()) {
  (void)level_hint;  // carried for consumers; markers are recognized by keyword
  if (text::is_blank(text_value)) return ElementKind::Empty;
  if (match_subdivision(text_value, table)) return ElementKind::SubdivisionMarker;
  if (is_article_start(text_value)) return ElementKind::ArticleStart;
  if (is_rent && match_rent_subdivision(text_value, table)) return ElementKind::RentSubdivisionMarker;
  return ElementKind::Paragraph;
}

// ---------------------------------------------------------------------------
// Descriptors

enum class DocumentKind { Law, Decree, MinisterialOrder, Declaration, Code, Other };

inline DocumentKind document_kind(std::string_view name) {
  const std::string n = text::lower(name);
  auto starts = [&](std::string_view p) { return n.rfind(p, 0) == 0; };
  if (starts("loi") || starts("law")) return DocumentKind::Law;
  if (starts("decret") || starts("d\xC3\xA9""cret") || starts("decree")) return DocumentKind::Decree;
  if (starts("arrete") || starts("arr\xC3\xAAt\xC3\xA9") || starts("order")) {
    return DocumentKind::MinisterialOrder;
  }
  if (starts("declaration") || starts("d\xC3\xA9""claration")) return DocumentKind::Declaration;
  if (n.find("code") != std::string::npos) return DocumentKind::Code;
  return DocumentKind::Other;
}

struct DocumentDescriptor {
  std::string dir_path;
  std::string doc_name;
  bool is_rent = false;
  std::string domain;
  std::string law_num;
  std::string name;
  InstrumentNumber number;
  std::string signature_date;  // YYYY-MM-DD

  bool operator==(const DocumentDescriptor&) const = default;

  // "<name>_<number>", unique within a corpus.
  std::string stem() const { return name + "_" + number.raw; }
};

inline std::string validate_iso_date(std::string_view d) {
  auto fail = [&] { throw Error(ErrorCode::BadDate, "'" + std::string(d) + "'"); };
  if (d.size() != 10 || d[4] != '-' || d[7] != '-') fail();
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (!text::is_digit(d[i])) fail();
  }
  const int y = std::stoi(std::string(d.substr(0, 4)));
  const unsigned m = static_cast<unsigned>(std::stoi(std::string(d.substr(5, 2))));
  const unsigned day = static_cast<unsigned>(std::stoi(std::string(d.substr(8, 2))));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{day}};
  if (!ymd.ok()) fail();
  return std::string(d);
}

inline DocumentDescriptor parse_descriptor(std::string_view dir_path, std::string_view doc_name,
                                           bool is_rent) {
  DocumentDescriptor d;
  d.dir_path = std::string(dir_path);
  d.doc_name = std::string(doc_name);
  d.is_rent = is_rent;

  const std::size_t dot = doc_name.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == doc_name.size()) {
    throw Error(ErrorCode::MalformedDocName, "'" + std::string(doc_name) + "' has no extension");
  }
  const std::string_view stem = doc_name.substr(0, dot);
  const std::size_t date_sep = stem.rfind('_');
  if (date_sep == std::string_view::npos) {
    throw Error(ErrorCode::MalformedDocName,
                "'" + std::string(doc_name) + "' is not <name>_<number>_<date>.<ext>");
  }
  const std::size_t num_sep = stem.substr(0, date_sep).rfind('_');
  if (num_sep == std::string_view::npos || num_sep == 0) {
    throw Error(ErrorCode::MalformedDocName,
                "'" + std::string(doc_name) + "' is not <name>_<number>_<date>.<ext>");
  }
  d.name = std::string(stem.substr(0, num_sep));
  try {
    d.number = parse_instrument_number(stem.substr(num_sep + 1, date_sep - num_sep - 1));
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedDocName, "'" + std::string(doc_name) + "': " + e.what());
  }
  d.signature_date = validate_iso_date(stem.substr(date_sep + 1));

  std::vector<std::string_view> parts;
  for (auto part : text::split(dir_path, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  if (parts.size() < 3) {
    throw Error(ErrorCode::MalformedPath,
                "'" + std::string(dir_path) + "' is not <root>/<domain>/<law_num>/");
  }
  d.domain = std::string(parts[parts.size() - 2]);
  d.law_num = std::string(parts.back());
  try {
    parse_instrument_number(d.law_num);
  } catch (const Error&) {
    throw Error(ErrorCode::MalformedPath,
                "'" + std::string(dir_path) + "': '" + d.law_num + "' is not a law number");
  }
  return d;
}

// ---------------------------------------------------------------------------
// Interchange stream

struct StreamOptions {
  bool is_rent = false;
  KeywordTable keywords = KeywordTable::french_default();
};

// Single-pass reader over one element stream.
class ElementReader {
 public:
  explicit ElementReader(std::istream& in, StreamOptions options = {})
      : in_(in), options_(std::move(options)) {}

  // Next element in document order; nullopt at end of stream.
  std::optional<DocumentElement> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (line_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (text::trim(line).empty()) continue;
      return decode(line);
    }
    return std::nullopt;
  }

  std::size_t line() const { return line_; }

 private:
  DocumentElement decode(const std::string& line) const {
    if (!text::valid_utf8(line)) {
      throw RecordError(ErrorCode::EncodingError, line_, "invalid UTF-8");
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(ErrorCode::MalformedRecord, line_, e.what());
    }
    if (!j.is_object() || !j.contains("k") || !j["k"].is_string() || !j.contains("t") ||
        !j["t"].is_string()) {
      throw RecordError(ErrorCode::MalformedRecord, line_, "expected {\"k\": str, \"t\": str}");
    }
    DocumentElement e;
    e.text = j["t"].get<std::string>();
    if (j.contains("h") && !j["h"].is_null()) {
      if (!j["h"].is_number_integer() || j["h"].get<int>() < 0 || j["h"].get<int>() > 9) {
        throw RecordError(ErrorCode::MalformedRecord, line_, "level hint must be 0..9 or null");
      }
      e.level_hint = j["h"].get<int>();
    }
    const auto tag = j["k"].get<std::string>();
    const bool blank = text::is_blank(e.text);
    if (tag.empty()) {
      e.kind = classify_element(e.text, e.level_hint, options_.is_rent, options_.keywords);
      if (e.kind != ElementKind::SubdivisionMarker && e.kind != ElementKind::RentSubdivisionMarker) {
        e.level_hint.reset();
      }
      return e;
    }
    if (tag == "sub") {
      e.kind = ElementKind::SubdivisionMarker;
    } else if (tag == "rsub") {
      e.kind = ElementKind::RentSubdivisionMarker;
    } else if (tag == "art") {
      e.kind = ElementKind::ArticleStart;
    } else if (tag == "p") {
      e.kind = ElementKind::Paragraph;
    } else if (tag == "tr") {
      e.kind = ElementKind::TableRow;
    } else {
      throw RecordError(ErrorCode::MalformedRecord, line_, "unknown kind tag '" + tag + "'");
    }
    if (blank) {
      throw RecordError(ErrorCode::MalformedRecord, line_, "blank text with kind '" + tag + "'");
    }
    if (e.level_hint && e.kind != ElementKind::SubdivisionMarker &&
        e.kind != ElementKind::RentSubdivisionMarker) {
      throw RecordError(ErrorCode::MalformedRecord, line_, "level hint on a non-marker element");
    }
    return e;
  }

  std::istream& in_;
  StreamOptions options_;
  std::size_t line_ = 0;
};

inline std::vector<DocumentElement> read_element_stream(std::istream& in, StreamOptions options = {}) {
  ElementReader reader(in, std::move(options));
  std::vector<DocumentElement> out;
  while (auto e = reader.next()) out.push_back(std::move(*e));
  return out;
}

inline std::string encode_element(const DocumentElement& e) {
  nlohmann::ordered_json j;
  j["k"] = std::string(element_tag(e.kind));
  j["t"] = e.text;
  j["h"] = e.level_hint ? nlohmann::ordered_json(*e.level_hint) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

// Writes explicit kind tags; Empty elements are written unclassified and
// come back as Empty because their text is blank.
inline void write_element_stream(std::ostream& out, const std::vector<DocumentElement>& elements) {
  for (const auto& e : elements) out << encode_element(e) << '\n';
}

}  // namespace lexstruct

#endif  // LEXSTRUCT_DOCMODEL_HPP_
