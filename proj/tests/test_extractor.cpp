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


#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lexstruct/extractor.hpp"
#include "lexstruct/fixtures.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lexstruct;

namespace {

DocumentDescriptor desc(bool rent = false, const std::string& name = "loi") {
  return parse_descriptor("root/foncier/64-46/", name + "_64-46_1964-06-17.jsonl", rent);
}

DocumentElement sub(const std::string& t) { return {ElementKind::SubdivisionMarker, t, 1}; }
DocumentElement rsub(const std::string& t) { return {ElementKind::RentSubdivisionMarker, t, std::nullopt}; }
DocumentElement art(const std::string& t) { return {ElementKind::ArticleStart, t, std::nullopt}; }
DocumentElement p(const std::string& t) { return {ElementKind::Paragraph, t, std::nullopt}; }
DocumentElement tr(const std::string& t) { return {ElementKind::TableRow, t, std::nullopt}; }

std::vector<std::string> labels(const SubdivisionPath& path) {
  std::vector<std::string> out;
  for (const auto& e : path) out.push_back(std::string(rank_name(e.rank)) + " " + e.label);
  return out;
}

}  // namespace

TEST(Header, LabelHeadingAndInlineContent) {
  auto h = parse_article_header("Article 5 bis. — Les baux sont conclus.");
  EXPECT_EQ(h.label, (ArticleLabel{ArticlePrefix::None, 5, Multiplicative::Bis}));
  EXPECT_FALSE(h.heading);
  EXPECT_EQ(h.inline_content, "Les baux sont conclus.");

  auto r = parse_article_header("Article R. 38. —");
  EXPECT_EQ(r.label.prefix, ArticlePrefix::R);
  EXPECT_EQ(r.label.number, 38);
  EXPECT_EQ(r.inline_content, "");

  auto t = parse_article_header("Article 2. — Détention. — L'Etat détient.");
  EXPECT_EQ(t.heading, "Détention");
  EXPECT_EQ(t.inline_content, "L'Etat détient.");

  auto sentence = parse_article_header("Article 3. — Le bail est conclu. Il est renouvelable - sauf refus.");
  EXPECT_FALSE(sentence.heading);

  EXPECT_THROW(parse_article_header("Article — sans numéro"), Error);
}

TEST(Header, AgreesWithReferenceParser) {
  for (const char* line : {"Article premier. — Texte.", "Article 1er — Objet — Texte.", "Article L. 12 - Titre - x",
                           "Article 4 quater: Texte – suite", "ARTICLE 7", "Article 9. — A. B — c",
                           "Article 2 —  Détention  —  L'Etat."}) {
    auto a = parse_article_header(line);
    auto b = oracle::header_of(line);
    EXPECT_EQ(a.label, b.label) << line;
    EXPECT_EQ(a.heading, b.heading) << line;
    EXPECT_EQ(a.inline_content, b.inline_content) << line;
  }
}

TEST(Extract, TwoArticlesUnderOneTitle) {
  auto res = extract_document(desc(), {sub("TITRE I"), art("Article premier. —"), p("Texte A."),
                                       art("Article 2. —"), p("Texte B.")});
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(res.records[0].art_num->number, 1);
  EXPECT_EQ(labels(res.records[0].subdivision), std::vector<std::string>{"Title I"});
  EXPECT_EQ(res.records[0].content, "Texte A.");
  EXPECT_EQ(res.records[1].art_num->number, 2);
  EXPECT_EQ(labels(res.records[1].subdivision), std::vector<std::string>{"Title I"});
  EXPECT_EQ(res.records[1].content, "Texte B.");
  EXPECT_EQ(res.elements_visited, 5u);
}

TEST(Extract, EmptyStream) {
  auto res = extract_document(desc(), {});
  EXPECT_TRUE(res.records.empty());
  EXPECT_EQ(res.elements_visited, 0u);
}

TEST(Extract, TrailingContentFlushed) {
  auto res = extract_document(desc(), {art("Article 1. — a"), p("b")});
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_EQ(res.records[0].content, "a\nb");
}

TEST(Extract, ChapterPrunesSection) {
  auto res = extract_document(desc(), {sub("TITRE I"), sub("CHAPITRE 2"), sub("SECTION 3"), art("Article 1"),
                                       sub("CHAPITRE 4"), art("Article 2")});
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(labels(res.records[0].subdivision), (std::vector<std::string>{"Title I", "Chapter 2", "Section 3"}));
  EXPECT_EQ(labels(res.records[1].subdivision), (std::vector<std::string>{"Title I", "Chapter 4"}));
}

TEST(Extract, NatureAndMultiplicative) {
  auto res = extract_document(desc(false, "code"), {art("Article L. 1 — a"), art("Article R. 2 — b"),
                                                    art("Article 3 ter — c")});
  ASSERT_EQ(res.records.size(), 3u);
  EXPECT_EQ(res.records[0].nature, Nature::Legislative);
  EXPECT_EQ(res.records[1].nature, Nature::Regulatory);
  EXPECT_EQ(res.records[2].nature, Nature::Unmarked);
  EXPECT_EQ(res.records[2].multiplicative, Multiplicative::Ter);
}

TEST(Extract, RentSplitOnCategoryChange) {
  auto res = extract_document(desc(true, "arrete_loyer"),
                              {sub("CHAPITRE I"), art("Article 1. — Barème."), rsub("Localité : Dakar"),
                               rsub("Catégorie A"), tr("500 F"), rsub("Catégorie B"), tr("400 F"),
                               art("Article 2. — Révision.")});
  ASSERT_EQ(res.records.size(), 4u);
  const auto& a = res.records[0];
  ASSERT_TRUE(a.rent);
  EXPECT_EQ(a.rent->locality, "Dakar");
  EXPECT_EQ(a.rent->rent_category, "A");
  EXPECT_EQ(a.rent->rent_content, "500 F");
  EXPECT_EQ(a.art_num->number, 1);
  const auto& b = res.records[1];
  ASSERT_TRUE(b.rent);
  EXPECT_EQ(b.rent->rent_category, "B");
  EXPECT_EQ(b.rent->rent_content, "400 F");
  EXPECT_EQ(labels(b.subdivision), (std::vector<std::string>{"Chapter I", "Locality Dakar", "RentCategory B"}));
  EXPECT_FALSE(res.records[2].rent);
  EXPECT_EQ(res.records[2].content, "Barème.");
  // rent context does not leak into the next article
  EXPECT_EQ(labels(res.records[3].subdivision), std::vector<std::string>{"Chapter I"});
}

TEST(Extract, MarkerWithoutPendingRentContentEmitsNothing) {
  auto res = extract_document(desc(true, "arrete_loyer"),
                              {art("Article 1"), rsub("Localité : Dakar"), rsub("Catégorie A"), rsub("Catégorie B")});
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_FALSE(res.records[0].rent);
}

TEST(Extract, RentMarkerOutsideRentDocumentIsText) {
  auto res = extract_document(desc(false), {art("Article 1"), rsub("Catégorie A"), p("x")});
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_EQ(res.records[0].content, "Catégorie A\nx");
}

TEST(Extract, PreambleBecomesDeclaration) {
  auto res = extract_document(desc(false, "decret"), {p("Vu la Constitution ;"), art("Article 1 — a")});
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_TRUE(res.records[0].declaration);
  EXPECT_FALSE(res.records[0].art_num);
  EXPECT_EQ(res.records[0].content, "Vu la Constitution ;");
  EXPECT_TRUE(res.diagnostics.empty());
}

TEST(Extract, PreambleInCodeIsOrphan) {
  auto res = extract_document(desc(false, "code"), {sub("PARTIE I"), p("Code du domaine"), art("Article L. 1 — a")});
  ASSERT_EQ(res.records.size(), 1u);
  ASSERT_EQ(res.diagnostics.size(), 1u);
  EXPECT_EQ(res.diagnostics[0].kind, Diagnostic::Kind::OrphanContent);
  EXPECT_EQ(res.diagnostics[0].element_index, 1u);
}

TEST(Extract, DuplicateArticleIsWarning) {
  auto res = extract_document(desc(), {art("Article 1 — a"), art("Article 1 — b")});
  EXPECT_EQ(res.records.size(), 2u);
  ASSERT_EQ(res.diagnostics.size(), 1u);
  EXPECT_EQ(res.diagnostics[0].kind, Diagnostic::Kind::DuplicateArticleNumber);
}

TEST(Extract, UnknownRank) {
  try {
    extract_document(desc(), {sub("VOLUME 3")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownRank);
  }
}

TEST(Extract, MatchesReferenceOnRandomStreams) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 300; ++i) {
    const bool rent = i % 2 == 0;
    auto es = oracle::random_stream(rng, {rent, 1 + static_cast<int>(rng() % 120)});
    const auto d = desc(rent, rent ? "arrete_loyer" : "loi");
    auto got = extract_document(d, es);
    auto want = oracle::extract(d, es);
    ASSERT_EQ(got.records, want) << "stream " << i;
    EXPECT_EQ(got.elements_visited, es.size());
  }
}

TEST(Extract, ConservesText) {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 200; ++i) {
    const bool rent = i % 3 == 0;
    auto es = oracle::random_stream(rng, {rent, 60});
    const auto d = desc(rent, rent ? "arrete_loyer" : "decret");
    auto res = extract_document(d, es);
    auto [in, out] = oracle::conservation(d, es, res.records);
    ASSERT_EQ(in, out) << "stream " << i;
  }
}

TEST(Extract, StreamingEqualsBatch) {
  std::mt19937_64 rng(9);
  auto es = oracle::random_stream(rng, {true, 400});
  std::ostringstream w;
  write_element_stream(w, es);
  std::istringstream r(w.str());
  ElementReader reader(r, StreamOptions{true});
  const auto d = desc(true, "arrete_loyer");
  EXPECT_EQ(extract_stream(d, reader).records, extract_document(d, es).records);
}

TEST(Records, JsonRoundTrip) {
  std::mt19937_64 rng(5);
  auto es = oracle::random_stream(rng, {true, 300});
  auto recs = extract_document(desc(true, "arrete_loyer"), es).records;
  std::ostringstream out;
  write_records_jsonl(out, recs);
  std::istringstream in(out.str());
  EXPECT_EQ(read_records_jsonl(in), recs);
}

TEST(Corpus, FixtureGolden) {
  testutil::TempDir dir("golden");
  make_fixtures(dir.path(), 0);
  auto res = extract_corpus(dir / "corpus");
  EXPECT_TRUE(res.report.errors.empty());
  std::ostringstream out;
  write_records_jsonl(out, res.records);
  EXPECT_EQ(out.str(), testutil::slurp(LEXSTRUCT_TEST_DATA "/golden_articles.jsonl"));
}

TEST(Corpus, ReportRows) {
  testutil::TempDir dir("report");
  make_fixtures(dir.path(), 0);
  auto res = extract_corpus(dir / "corpus");
  ASSERT_EQ(res.report.rows.size(), 7u);
  std::map<std::string, ReportRow> by;
  for (const auto& r : res.report.rows) by[r.document] = r;
  const auto& rent = by.at("foncier/2014-03/arrete_loyer_2014-5678_2014-05-02.jsonl");
  EXPECT_EQ(rent.articles, 3u);
  EXPECT_EQ(rent.rent_records, 4u);
  EXPECT_EQ(rent.orders, 1u);
  const auto& code = by.at("domaine/76-66/code_76-66_1976-07-02.jsonl");
  EXPECT_EQ(code.articles, 6u);
  EXPECT_EQ(code.warnings, 1u);
  EXPECT_EQ(by.at("foncier/64-46/decret_64-573_1964-07-30.jsonl").declarations, 1u);
  EXPECT_EQ(by.at("foncier/64-46/loi_64-46_1964-06-17.jsonl").articles, 10u);
}

TEST(Corpus, MisplacedAndBrokenDocumentsAreReported) {
  testutil::TempDir dir("broken");
  testutil::spit(dir / "corpus/foncier/64-46/loi_64-46_1964-06-17.jsonl", "{\"k\":\"art\",\"t\":\"Article 1\"}\n");
  testutil::spit(dir / "corpus/foncier/64-46/loi_64-47_1964-02-31.jsonl", "{\"k\":\"art\",\"t\":\"Article 1\"}\n");
  testutil::spit(dir / "corpus/stray.jsonl", "");
  auto res = extract_corpus(dir / "corpus");
  EXPECT_EQ(res.records.size(), 1u);
  EXPECT_EQ(res.report.errors.size(), 2u);
}
