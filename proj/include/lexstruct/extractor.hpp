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

// Single-pass article extraction over a document element stream.
//
// The extractor is a fold: every element is visited exactly once and the
// state carries two text buffers (general content and rent content), the
// pending article attributes, the active subdivision path and four flags.
// A record is emitted when the next article starts (closing the previous
// one), when buffered rent content is closed by a rent marker, or at the end
// of the stream.

#ifndef LEXSTRUCT_EXTRACTOR_HPP_
#define LEXSTRUCT_EXTRACTOR_HPP_

#include <fnmatch.h>

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lexstruct/docmodel.hpp"
#include "lexstruct/error.hpp"
#include "lexstruct/numbering.hpp"
#include "lexstruct/text.hpp"

namespace lexstruct {

enum class Nature { Legislative, Regulatory, Unmarked };

inline std::string_view nature_name(Nature n) {
  switch (n) {
    case Nature::Legislative: return "Legislative";
    case Nature::Regulatory: return "Regulatory";
    case Nature::Unmarked: return "Unmarked";
  }
  return "";
}

inline Nature nature_of(const ArticleLabel& label) {
  switch (label.prefix) {
    case ArticlePrefix::L: return Nature::Legislative;
    case ArticlePrefix::R: return Nature::Regulatory;
    case ArticlePrefix::None: break;
  }
  return Nature::Unmarked;
}

struct RentAttributes {
  std::string locality;
  std::string rent_category;
  std::optional<std::string> housing_type;
  std::string rent_content;

  bool operator==(const RentAttributes&) const = default;
};

struct ArticleRecord {
  std::string domain;
  std::string law_num;
  std::string name;
  InstrumentNumber number;
  std::string signature_date;
  std::optional<ArticleLabel> art_num;  // absent only for declaration records
  std::optional<std::string> heading;
  Multiplicative multiplicative = Multiplicative::None;
  std::string content;
  SubdivisionPath subdivision;
  Nature nature = Nature::Unmarked;
  bool declaration = false;
  std::optional<RentAttributes> rent;

  bool operator==(const ArticleRecord&) const = default;

  std::string doc_stem() const { return name + "_" + number.raw; }
};

// Stable identity of an article within a corpus: "<name>_<number>/<label>",
// e.g. "loi_64-46/5 bis". Declaration records use "declaration" as label.
inline std::string article_key(const ArticleRecord& r) {
  return r.doc_stem() + "/" + (r.art_num ? format_article_label(*r.art_num) : "declaration");
}

// Main article records are the ones triples and reference extraction run on:
// neither rent splits nor declarations.
inline bool is_main_article(const ArticleRecord& r) {
  return !r.rent && !r.declaration && r.art_num.has_value();
}

struct Diagnostic {
  enum class Kind { OrphanContent, DuplicateArticleNumber };
  Kind kind;
  std::size_t element_index;
  std::string message;
};

struct ExtractionResult {
  std::vector<ArticleRecord> records;
  std::vector<Diagnostic> diagnostics;
  std::size_t elements_visited = 0;
};

struct ArticleHeader {
  ArticleLabel label;
  std::optional<std::string> heading;
  std::string inline_content;
};

// Splits an article marker line into label, optional heading and inline
// content. The heading is the text between the label and a dash separator
// ("Article 3. — Objet. — Le présent ..."); with no second separator the
// remainder is content.
inline ArticleHeader parse_article_header(std::string_view raw) {
  const std::string_view s = text::trim(raw);
  auto end = detail::match_word(s, 0, "article");
  if (!end) throw Error(ErrorCode::BadArticleHeader, "'" + std::string(s) + "'");
  const std::size_t pos = detail::skip_blank(s, *end);
  auto label = scan_article_label(s.substr(pos));
  if (!label) throw Error(ErrorCode::BadArticleHeader, "no article number in '" + std::string(s) + "'");
  ArticleHeader h;
  h.label = label->first;
  std::string_view rest = text::trim(detail::strip_leading_separators(s.substr(pos + label->second)));
  static constexpr std::string_view kDashes[] = {" \xE2\x80\x94 ", " \xE2\x80\x93 ", " - "};
  std::size_t cut = std::string_view::npos;
  std::size_t cut_len = 0;
  for (std::string_view d : kDashes) {
    const std::size_t at = rest.find(d);
    if (at != std::string_view::npos && at < cut) {
      cut = at;
      cut_len = d.size();
    }
  }
  if (cut != std::string_view::npos && cut > 0 && cut <= 120) {
    std::string_view heading = text::trim(rest.substr(0, cut));
    while (!heading.empty() && heading.back() == '.') heading.remove_suffix(1);
    heading = text::trim(heading);
    if (!heading.empty() && heading.find(". ") == std::string_view::npos) {
      h.heading = std::string(heading);
      rest = text::trim(rest.substr(cut + cut_len));
    }
  }
  h.inline_content = std::string(rest);
  return h;
}

struct ExtractorOptions {
  KeywordTable keywords = KeywordTable::french_default();
};

// Mutable state of one extraction pass.
struct ExtractionState {
  std::string content;
  std::string content_r;
  ArticleRecord attribs;       // pending article (valid when in_art)
  SubdivisionPath subdiv_data;
  bool in_r_subs = false;
  bool in_art = false;
  bool in_subdiv = false;
  bool begin_r = false;
  // Text seen before the first article starts.
  std::optional<std::size_t> preamble_start;
  SubdivisionPath preamble_path;
};

class Extractor {
 public:
  Extractor(DocumentDescriptor descriptor, ExtractorOptions options = {})
      : descriptor_(std::move(descriptor)), options_(std::move(options)) {}

  void feed(const DocumentElement& e) {
    const std::size_t index = result_.elements_visited++;
    switch (e.kind) {
      case ElementKind::Empty:
        return;
      case ElementKind::SubdivisionMarker:
        flush_rent();
        handle_subdivision(e);
        return;
      case ElementKind::ArticleStart:
        flush_rent();
        handle_article_start(e, index);
        return;
      default:
        break;
    }
    if (descriptor_.is_rent && state_.in_art &&
        (state_.in_subdiv || e.kind == ElementKind::RentSubdivisionMarker)) {
      handle_rent_subdivision(e);
      return;
    }
    append_text(e.text, index);
  }

  // Updates the subdivision path; entries at or below the new rank go away.
  void handle_subdivision(const DocumentElement& e) {
    auto m = match_subdivision(e.text, options_.keywords);
    if (!m) throw Error(ErrorCode::UnknownRank, "'" + e.text + "'");
    enter_subdivision(state_.subdiv_data, SubdivisionEntry{m->rank, m->label, m->heading});
    state_.in_r_subs = false;
    state_.in_subdiv = true;
  }

  // Rent context: a rent marker closes buffered rent content into its own
  // record and switches locality/category; other text is buffered.
  void handle_rent_subdivision(const DocumentElement& e) {
    if (e.kind == ElementKind::RentSubdivisionMarker) {
      flush_rent();
      auto m = match_rent_subdivision(e.text, options_.keywords);
      if (!m) throw Error(ErrorCode::UnknownRank, "'" + e.text + "'");
      enter_subdivision(state_.subdiv_data, SubdivisionEntry{m->rank, m->label, std::nullopt});
      state_.in_r_subs = true;
      return;
    }
    append_text(e.text, result_.elements_visited - 1);
  }

  void handle_article_start(const DocumentElement& e, std::size_t index) {
    ArticleHeader header = parse_article_header(e.text);
    close_article();
    state_.in_art = true;
    state_.in_subdiv = false;
    state_.in_r_subs = false;
    state_.content.clear();
    if (!header.inline_content.empty()) state_.content = header.inline_content;

    if (!seen_.insert(header.label).second) {
      result_.diagnostics.push_back({Diagnostic::Kind::DuplicateArticleNumber, index,
                                     "article " + format_article_label(header.label) +
                                         " appears more than once"});
    }
    // Rent context is scoped to one article.
    if (descriptor_.is_rent) {
      std::erase_if(state_.subdiv_data, [](const SubdivisionEntry& x) { return is_rent_rank(x.rank); });
    }
    ArticleRecord a = base_record();
    a.art_num = header.label;
    a.multiplicative = header.label.multiplicative;
    a.nature = nature_of(header.label);
    a.heading = std::move(header.heading);
    a.subdivision = state_.subdiv_data;
    state_.attribs = std::move(a);
  }

  ExtractionResult finish() && {
    flush_rent();
    close_article();
    return std::move(result_);
  }

  const ExtractionState& state() const { return state_; }

 private:
  ArticleRecord base_record() const {
    ArticleRecord r;
    r.domain = descriptor_.domain;
    r.law_num = descriptor_.law_num;
    r.name = descriptor_.name;
    r.number = descriptor_.number;
    r.signature_date = descriptor_.signature_date;
    return r;
  }

  void append_text(std::string_view raw, std::size_t index) {
    const std::string_view t = text::trim(raw);
    if (t.empty()) return;
    if (state_.in_r_subs) {
      if (!state_.content_r.empty()) state_.content_r.push_back('\n');
      state_.content_r += t;
      state_.begin_r = true;
      return;
    }
    if (!state_.in_art && !state_.preamble_start) {
      state_.preamble_start = index;
      state_.preamble_path = state_.subdiv_data;
    }
    if (!state_.content.empty()) state_.content.push_back('\n');
    state_.content += t;
  }

  void flush_rent() {
    if (!state_.begin_r) return;
    ArticleRecord r = state_.attribs;
    r.content.clear();
    r.subdivision = state_.subdiv_data;
    RentAttributes rent;
    for (const auto& entry : state_.subdiv_data) {
      if (entry.rank == Rank::Locality) rent.locality = entry.label;
      if (entry.rank == Rank::RentCategory) rent.rent_category = entry.label;
      if (entry.rank == Rank::HousingType) rent.housing_type = entry.label;
    }
    rent.rent_content = std::move(state_.content_r);
    r.rent = std::move(rent);
    result_.records.push_back(std::move(r));
    state_.content_r.clear();
    state_.begin_r = false;
  }

  // Closes the pending article, or resolves leading text when no article
  // has started yet.
  void close_article() {
    if (state_.in_art) {
      ArticleRecord r = std::move(state_.attribs);
      r.content = std::move(state_.content);
      state_.content.clear();
      state_.attribs = ArticleRecord{};
      result_.records.push_back(std::move(r));
      return;
    }
    if (state_.content.empty()) return;
    const std::size_t at = state_.preamble_start.value_or(0);
    if (text::lower(descriptor_.name).find("code") != std::string::npos) {
      result_.diagnostics.push_back({Diagnostic::Kind::OrphanContent, at,
                                     "text before the first article is not attached to any record"});
    } else {
      ArticleRecord r = base_record();
      r.declaration = true;
      r.content = std::move(state_.content);
      r.subdivision = state_.preamble_path;
      result_.records.push_back(std::move(r));
    }
    state_.content.clear();
    state_.preamble_start.reset();
  }

  DocumentDescriptor descriptor_;
  ExtractorOptions options_;
  ExtractionState state_;
  ExtractionResult result_;
  std::set<ArticleLabel> seen_;
};

inline ExtractionResult extract_document(const DocumentDescriptor& descriptor,
                                         const std::vector<DocumentElement>& elements,
                                         const ExtractorOptions& options = {}) {
  Extractor x(descriptor, options);
  for (const auto& e : elements) x.feed(e);
  return std::move(x).finish();
}

// Streams straight from the reader without materializing the elements.
inline ExtractionResult extract_stream(const DocumentDescriptor& descriptor, ElementReader& reader,
                                       const ExtractorOptions& options = {}) {
  Extractor x(descriptor, options);
  while (auto e = reader.next()) x.feed(*e);
  return std::move(x).finish();
}

// ---------------------------------------------------------------------------
// Corpus driver

struct ReportRow {
  std::string document;  // path relative to the corpus root
  std::size_t articles = 0;
  std::size_t laws = 0;
  std::size_t decrees = 0;
  std::size_t orders = 0;
  std::size_t declarations = 0;
  std::size_t rent_records = 0;
  std::size_t warnings = 0;
};

struct CorpusError {
  std::string document;
  std::string message;
};

struct ExtractionReport {
  std::vector<ReportRow> rows;
  std::vector<CorpusError> errors;
};

struct CorpusResult {
  std::vector<ArticleRecord> records;
  ExtractionReport report;
};

struct CorpusOptions {
  std::string rent_glob = "*loyer*";
  KeywordTable keywords = KeywordTable::french_default();
};

inline bool matches_glob(const std::string& pattern, const std::string& value) {
  return !pattern.empty() && fnmatch(pattern.c_str(), value.c_str(), 0) == 0;
}

// Corpus documents in (domain, law_num, doc_name) order, as paths relative
// to root. Files at the wrong depth are returned separately.
inline std::pair<std::vector<std::filesystem::path>, std::vector<std::filesystem::path>>
list_corpus(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<fs::path> docs;
  std::vector<fs::path> misplaced;
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::IoError, "corpus root '" + root.string() + "' is not a directory");
  }
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
    fs::path rel = fs::relative(entry.path(), root);
    if (std::distance(rel.begin(), rel.end()) == 3) {
      docs.push_back(rel);
    } else {
      misplaced.push_back(rel);
    }
  }
  std::sort(docs.begin(), docs.end());
  std::sort(misplaced.begin(), misplaced.end());
  return {docs, misplaced};
}

inline CorpusResult extract_corpus(const std::filesystem::path& root, const CorpusOptions& options = {}) {
  namespace fs = std::filesystem;
  CorpusResult out;
  auto [docs, misplaced] = list_corpus(root);
  for (const auto& rel : misplaced) {
    out.report.errors.push_back({rel.generic_string(), "MalformedPath: not <domain>/<law_num>/<doc>"});
  }
  ExtractorOptions xopts{options.keywords};
  for (const auto& rel : docs) {
    const std::string rel_str = rel.generic_string();
    try {
      const bool is_rent = matches_glob(options.rent_glob, rel_str);
      const std::string dir = (root / rel.parent_path()).generic_string() + "/";
      DocumentDescriptor d = parse_descriptor(dir, rel.filename().string(), is_rent);
      std::ifstream in(root / rel, std::ios::binary);
      if (!in) throw Error(ErrorCode::IoError, "cannot open");
      ElementReader reader(in, StreamOptions{is_rent, options.keywords});
      ExtractionResult r = extract_stream(d, reader, xopts);

      ReportRow row;
      row.document = rel_str;
      const DocumentKind kind = document_kind(d.name);
      row.laws = kind == DocumentKind::Law ? 1 : 0;
      row.decrees = kind == DocumentKind::Decree ? 1 : 0;
      row.orders = kind == DocumentKind::MinisterialOrder ? 1 : 0;
      for (const auto& rec : r.records) {
        if (rec.declaration) {
          ++row.declarations;
        } else if (rec.rent) {
          ++row.rent_records;
        } else {
          ++row.articles;
        }
      }
      row.warnings = r.diagnostics.size();
      out.report.rows.push_back(row);
      for (auto& rec : r.records) out.records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      out.report.errors.push_back({rel_str, e.what()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json subdivision_to_json(const SubdivisionPath& path) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : path) {
    nlohmann::ordered_json j;
    j["rank"] = std::string(rank_name(e.rank));
    j["label"] = e.label;
    j["heading"] = e.heading ? nlohmann::ordered_json(*e.heading) : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr;
}

// Field order is part of the output format.
inline nlohmann::ordered_json record_to_json(const ArticleRecord& r) {
  using oj = nlohmann::ordered_json;
  oj j;
  j["domain"] = r.domain;
  j["law_num"] = r.law_num;
  j["name"] = r.name;
  j["number"] = r.number.raw;
  j["signature_date"] = r.signature_date;
  j["art_num"] = r.art_num ? oj(format_article_label(*r.art_num)) : oj(nullptr);
  j["heading"] = r.heading ? oj(*r.heading) : oj(nullptr);
  j["multiplicative"] =
      r.multiplicative == Multiplicative::None ? oj(nullptr) : oj(std::string(multiplicative_name(r.multiplicative)));
  j["nature"] = std::string(nature_name(r.nature));
  j["declaration"] = r.declaration;
  j["subdivision"] = subdivision_to_json(r.subdivision);
  j["content"] = r.content;
  if (r.rent) {
    oj rent;
    rent["locality"] = r.rent->locality;
    rent["rent_category"] = r.rent->rent_category;
    rent["housing_type"] = r.rent->housing_type ? oj(*r.rent->housing_type) : oj(nullptr);
    rent["rent_content"] = r.rent->rent_content;
    j["rent"] = std::move(rent);
  } else {
    j["rent"] = nullptr;
  }
  return j;
}

inline ArticleRecord record_from_json(const nlohmann::json& j) {
  auto opt_str = [](const nlohmann::json& v) -> std::optional<std::string> {
    if (v.is_null()) return std::nullopt;
    return v.get<std::string>();
  };
  ArticleRecord r;
  try {
    r.domain = j.at("domain").get<std::string>();
    r.law_num = j.at("law_num").get<std::string>();
    r.name = j.at("name").get<std::string>();
    r.number = parse_instrument_number(j.at("number").get<std::string>());
    r.signature_date = j.at("signature_date").get<std::string>();
    if (!j.at("art_num").is_null()) r.art_num = parse_article_label(j.at("art_num").get<std::string>());
    r.heading = opt_str(j.at("heading"));
    r.multiplicative = r.art_num ? r.art_num->multiplicative : Multiplicative::None;
    const auto nature = j.at("nature").get<std::string>();
    r.nature = nature == "Legislative" ? Nature::Legislative
               : nature == "Regulatory" ? Nature::Regulatory
                                        : Nature::Unmarked;
    r.declaration = j.at("declaration").get<bool>();
    for (const auto& e : j.at("subdivision")) {
      auto rank = rank_from_name(e.at("rank").get<std::string>());
      if (!rank) throw Error(ErrorCode::MalformedRecord, "unknown rank " + e.at("rank").dump());
      r.subdivision.push_back({*rank, e.at("label").get<std::string>(), opt_str(e.at("heading"))});
    }
    r.content = j.at("content").get<std::string>();
    if (j.contains("rent") && !j.at("rent").is_null()) {
      const auto& rj = j.at("rent");
      r.rent = RentAttributes{rj.at("locality").get<std::string>(),
                              rj.at("rent_category").get<std::string>(), opt_str(rj.at("housing_type")),
                              rj.at("rent_content").get<std::string>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("article record: ") + e.what());
  }
  return r;
}

inline void write_records_jsonl(std::ostream& out, const std::vector<ArticleRecord>& records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

inline std::vector<ArticleRecord> read_records_jsonl(std::istream& in) {
  std::vector<ArticleRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(ErrorCode::MalformedRecord, n, e.what());
    }
  }
  return out;
}

inline std::string csv_field(std::string_view v) {
  if (v.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string format_subdivision(const SubdivisionPath& path) {
  std::string out;
  for (const auto& e : path) {
    if (!out.empty()) out += " > ";
    out += rank_name(e.rank);
    out += ' ';
    out += e.label;
  }
  return out;
}

inline void write_records_csv(std::ostream& out, const std::vector<ArticleRecord>& records) {
  out << "domain,law_num,name,number,signature_date,art_num,heading,multiplicative,nature,"
         "declaration,subdivision,locality,rent_category,housing_type,content,rent_content\n";
  for (const auto& r : records) {
    out << csv_field(r.domain) << ',' << csv_field(r.law_num) << ',' << csv_field(r.name) << ','
        << csv_field(r.number.raw) << ',' << r.signature_date << ','
        << csv_field(r.art_num ? format_article_label(*r.art_num) : "") << ','
        << csv_field(r.heading.value_or("")) << ',' << multiplicative_name(r.multiplicative) << ','
        << nature_name(r.nature) << ',' << (r.declaration ? "true" : "false") << ','
        << csv_field(format_subdivision(r.subdivision)) << ','
        << csv_field(r.rent ? r.rent->locality : "") << ','
        << csv_field(r.rent ? r.rent->rent_category : "") << ','
        << csv_field(r.rent ? r.rent->housing_type.value_or("") : "") << ','
        << csv_field(r.content) << ',' << csv_field(r.rent ? r.rent->rent_content : "") << '\n';
  }
}

inline void write_report_csv(std::ostream& out, const ExtractionReport& report) {
  out << "document,articles,laws,decrees,orders,declarations,rent_records,warnings\n";
  for (const auto& row : report.rows) {
    out << csv_field(row.document) << ',' << row.articles << ',' << row.laws << ',' << row.decrees
        << ',' << row.orders << ',' << row.declarations << ',' << row.rent_records << ','
        << row.warnings << '\n';
  }
  for (const auto& err : report.errors) {
    out << "# error," << csv_field(err.document) << ',' << csv_field(err.message) << '\n';
  }
}

}  // namespace lexstruct

#endif  // LEXSTRUCT_EXTRACTOR_HPP_
