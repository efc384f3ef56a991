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

// Synthetic corpus, ground-truth triples and the default prompt template.
// The texts are invented; numbering and structure follow Senegalese
// drafting conventions.

#ifndef LEXSTRUCT_FIXTURES_HPP_
#define LEXSTRUCT_FIXTURES_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lexstruct/docmodel.hpp"
#include "lexstruct/error.hpp"
#include "lexstruct/triples.hpp"

namespace lexstruct {

struct FixtureArticle {
  std::string label;                    // as printed in the article key, e.g. "5 bis"
  std::vector<std::string> references;  // canonical
  std::vector<std::string> topics;      // "corresponds to" objects
};

struct FixtureDocument {
  std::string rel_path;  // <domain>/<law_num>/<doc>.jsonl
  std::string stem;      // <name>_<number>
  std::vector<DocumentElement> elements;
  std::vector<FixtureArticle> articles;  // main articles only, in order
};

namespace detail {

class FixtureBuilder {
 public:
  FixtureBuilder(std::string rel_path, std::string stem) {
    doc_.rel_path = std::move(rel_path);
    doc_.stem = std::move(stem);
  }

  FixtureBuilder& sub(std::string t, int level) {
    doc_.elements.push_back({ElementKind::SubdivisionMarker, std::move(t), level});
    return *this;
  }
  FixtureBuilder& rsub(std::string t) {
    doc_.elements.push_back({ElementKind::RentSubdivisionMarker, std::move(t), std::nullopt});
    return *this;
  }
  // Untagged line, classified on read.
  FixtureBuilder& raw(std::string t) {
    doc_.elements.push_back({ElementKind::Empty, std::move(t), std::nullopt});
    return *this;
  }
  FixtureBuilder& p(std::string t) {
    doc_.elements.push_back({ElementKind::Paragraph, std::move(t), std::nullopt});
    return *this;
  }
  FixtureBuilder& tr(std::string t) {
    doc_.elements.push_back({ElementKind::TableRow, std::move(t), std::nullopt});
    return *this;
  }
  FixtureBuilder& blank() {
    doc_.elements.push_back({ElementKind::Empty, "", std::nullopt});
    return *this;
  }
  FixtureBuilder& art(std::string header, std::string label, std::vector<std::string> refs,
                      std::vector<std::string> topics = {}) {
    doc_.elements.push_back({ElementKind::ArticleStart, std::move(header), std::nullopt});
    doc_.articles.push_back({std::move(label), std::move(refs), std::move(topics)});
    return *this;
  }

  FixtureDocument build() {
    return doc_;
  }

 private:
  FixtureDocument doc_;
};

inline const char* pick(std::uint64_t& state, const std::vector<const char*>& options) {
  return options[mix(state) % options.size()];
}

}  // namespace detail

// The documents of the synthetic corpus. The seed only selects among
// equivalent closing sentences; structure and references do not change.
inline std::vector<FixtureDocument> fixture_documents(std::uint64_t seed) {
  std::uint64_t state = seed;
  const std::vector<const char*> closings = {
      "Le présent texte sera exécuté comme loi de l'Etat.",
      "Le présent texte entre en vigueur dès sa publication au Journal officiel.",
      "Le présent texte sera publié au Journal officiel.",
      "Le présent texte sera enregistré et communiqué partout où besoin sera.",
  };
  std::vector<FixtureDocument> docs;

  // Hierarchy A: TITRE > CHAPITRE > Section.
  {
    detail::FixtureBuilder b("foncier/64-46/loi_64-46_1964-06-17.jsonl", "loi_64-46");
    b.sub("TITRE I — Dispositions générales", 1)
        .sub("CHAPITRE I — Objet", 2)
        .art("Article premier. — Constituent de plein droit le domaine national toutes les terres non "
             "classées dans le domaine public, non immatriculées et dont la propriété n'a pas été transcrite.",
             "1", {}, {"the national domain"})
        .art("Article 2. — Détention — L'Etat détient les terres du domaine national en vue d'assurer leur "
             "utilisation et leur mise en valeur rationnelles.",
             "2", {}, {"the holding of national domain land"})
        .p("Cette détention s'exerce conformément aux plans de développement.")
        .sub("CHAPITRE II — Classement", 2)
        .art("Article 3. — Les terres du domaine national sont classées en quatre catégories définies aux "
             "articles 4 à 7 de la présente loi.",
             "3", {"articles 4 ... 7 of law 64-46"})
        .sub("Section 1 — Zones urbaines", 3)
        .art("Article 4. — Les zones urbaines sont constituées par les terres du domaine national situées "
             "sur le territoire des communes.",
             "4", {}, {"urban zones"})
        .art("Article 5. — Les zones classées sont constituées par les zones à vocation forestière, dans les "
             "conditions prévues à l'article précédent.",
             "5", {"the previous article"})
        .art("Article 5 bis. — Les zones de terroir correspondent aux terres exploitées pour l'habitat rural, "
             "la culture ou l'élevage.",
             "5 bis", {"articles 2, 5 ... 8 of law 64-46"})
        .p("Les dispositions des articles 2 et 5 à 8 de la présente loi leur sont applicables.")
        .blank()
        .sub("Section 2 — Zones pionnières", 3)
        .art("Article 5 ter. — Les zones pionnières sont les autres terres régies par la présente loi.", "5 ter",
             {"this law"})
        .art("Article 6. — Des décrets fixent les modalités d'application de la présente loi, notamment de ses "
             "articles 3 et 4.",
             "6", {"articles 3, 4 of law 64-46", "this law"})
        .sub("TITRE II — Gestion", 1)
        .sub("CHAPITRE I — Organes", 2)
        .art("Article 7. — Les terres des zones de terroir sont affectées par le conseil rural, sous réserve "
             "des dispositions de l'article 5 bis.",
             "7", {"article 5 bis of law 64-46"})
        .raw("Article 8. — Dispositions finales")
        .raw(detail::pick(state, closings));
    auto d = b.build();
    d.articles.push_back({"8", {}, {"the final provisions"}});
    // raw("Article 8 ...") is classified as an article start on read.
    docs.push_back(std::move(d));
  }

  // Hierarchy B: CHAPITRE > Section > Paragraphe, with a preamble.
  {
    detail::FixtureBuilder b("foncier/64-46/decret_64-573_1964-07-30.jsonl", "decret_64-573");
    b.p("Vu la Constitution ;")
        .p("Vu la loi 64-46 du 17 juin 1964 relative au domaine national ;")
        .sub("CHAPITRE 1er — Du conseil rural", 1)
        .art("Article premier. — Le présent décret fixe les conditions d'application de la loi 64-46, "
             "notamment de ses articles 8 à 10.",
             "1", {"articles 8 ... 10 of law 64-46"})
        .sub("Section I — Affectation", 2)
        .sub("Paragraphe 1 — Demandes", 3)
        .art("Article 2. — Toute demande d'affectation est adressée au président du conseil rural.", "2", {},
             {"requests for allocation"})
        .art("Article 3. — La délibération prévue à l'article précédent est approuvée par le sous-préfet.", "3",
             {"the previous article"})
        .sub("Paragraphe 2 — Désaffectation", 3)
        .art("Article 4. — La désaffectation peut être prononcée dans les cas prévus aux articles 2 et 3 du "
             "présent décret.",
             "4", {"articles 2, 3 of decree 64-573"})
        .art("Article 4 bis. — La décision de désaffectation est notifiée à l'intéressé.", "4 bis", {},
             {"notification of withdrawal"})
        .sub("CHAPITRE 2 — Dispositions diverses", 1)
        .art("Article 5. — Le ministre de l'Intérieur est chargé de l'exécution du présent décret.", "5",
             {"this decree"})
        .p(detail::pick(state, closings));
    docs.push_back(b.build());
  }

  // Regulatory articles.
  {
    detail::FixtureBuilder b("foncier/64-46/decret_2020-567_2020-03-15.jsonl", "decret_2020-567");
    b.sub("CHAPITRE I — Immatriculation", 1)
        .art("Article R. 36. — La demande d'immatriculation est déposée auprès du conservateur de la "
             "propriété foncière.",
             "R. 36", {}, {"land registration requests"})
        .art("Article R. 37. — Les pièces justificatives prévues à l'article précédent sont jointes à la "
             "demande.",
             "R. 37", {"the previous article"})
        .art("Article R. 38. — Le conservateur procède à la publication de la demande dans un délai de "
             "quinze jours.",
             "R. 38", {}, {"publication of the request"})
        .art("Article R. 39. — Les délais prévus à l'article R. 38 et à l'article précédent courent à compter "
             "du dépôt.",
             "R. 39", {"article R. 38 of decree 2020-567", "the previous article"})
        .art("Article R. 40. — Les dispositions des articles R. 36 à R. 39 sont applicables aux demandes en "
             "cours.",
             "R. 40", {"articles R. 36 ... R. 39 of decree 2020-567"})
        .p(detail::pick(state, closings));
    docs.push_back(b.build());
  }

  // Declarative document: no article markers at all.
  {
    detail::FixtureBuilder b("foncier/64-46/declaration_2020-01_2020-01-15.jsonl", "declaration_2020-01");
    b.p("Déclaration de politique foncière.")
        .p("Le Gouvernement réaffirme son attachement à une gestion transparente du domaine national.")
        .blank()
        .p("Il s'engage à sécuriser les droits des exploitants ruraux.");
    docs.push_back(b.build());
  }

  // Rent order: locality / category / housing type markers and table rows.
  {
    detail::FixtureBuilder b("foncier/2014-03/arrete_loyer_2014-5678_2014-05-02.jsonl",
                             "arrete_loyer_2014-5678");
    b.sub("CHAPITRE I — Barème des loyers", 1)
        .art("Article premier. — Les loyers des locaux à usage d'habitation sont fixés conformément au "
             "barème ci-après.",
             "1", {}, {"the rent scale"})
        .rsub("Localité : Dakar")
        .rsub("Catégorie : A")
        .tr("F2 | 150 000 F")
        .tr("F3 | 200 000 F")
        .rsub("Catégorie : B")
        .tr("F2 | 100 000 F")
        .raw("Localité : Thiès")
        .raw("Catégorie : A")
        .tr("F2 | 90 000 F")
        .rsub("Type de logement : villa")
        .tr("Villa | 300 000 F")
        .art("Article 2. — Les loyers fixés à l'article précédent sont révisables tous les trois ans.", "2",
             {"the previous article"})
        .art("Article 3. — Sont abrogées les dispositions contraires, notamment celles prises en application "
             "de l'article 5 de la loi 2014-03.",
             "3", {"article 5 of law 2014-03"})
        .p(detail::pick(state, closings));
    docs.push_back(b.build());
  }

  // Hierarchy C: PARTIE > LIVRE > TITRE > CHAPITRE, legislative part of a code.
  {
    detail::FixtureBuilder b("domaine/76-66/code_76-66_1976-07-02.jsonl", "code_76-66");
    b.p("Code du domaine de l'Etat")
        .sub("PARTIE I — Partie législative", 1)
        .sub("LIVRE I — Domaine public", 2)
        .sub("TITRE I — Consistance", 3)
        .sub("CHAPITRE I — Domaine public naturel", 4)
        .art("Article L. 1. — Le domaine de l'Etat comprend le domaine public et le domaine privé.", "L. 1", {},
             {"the State domain"})
        .art("Article L. 2. — Le domaine public naturel comprend les biens définis à l'article L. 1 qui ne "
             "résultent pas de l'intervention de l'homme.",
             "L. 2", {"article L. 1 of law 76-66"})
        .sub("CHAPITRE II — Domaine public artificiel", 4)
        .art("Article L. 3. — Le domaine public artificiel comprend les ouvrages affectés à l'usage du public.",
             "L. 3", {}, {"the artificial public domain"})
        .sub("TITRE II — Protection", 3)
        .art("Article L. 4. — Le domaine public est inaliénable dans les conditions des articles L. 1 à L. 3.",
             "L. 4", {"articles L. 1 ... L. 3 of law 76-66"})
        .sub("LIVRE II — Domaine privé", 2)
        .sub("TITRE I — Gestion", 3)
        .art("Article L. 5. — Les sûretés consenties sur le domaine privé obéissent à l'Acte uniforme portant "
             "organisation des sûretés.",
             "L. 5", {"Uniform Act organizing securities"})
        .art("Article L. 6. — Les produits du domaine privé sont soumis au Code général des impôts.", "L. 6",
             {"General Tax Code"});
    docs.push_back(b.build());
  }

  // Amending law without subdivisions.
  {
    detail::FixtureBuilder b("domaine/98-03/loi_98-03_1998-01-08.jsonl", "loi_98-03");
    b.art("Article premier. — Les articles 5 et 6 de la loi 64-46 sont modifiés ainsi qu'il suit.", "1",
          {"articles 5, 6 of law 64-46"})
        .art("Article 2. — L'article L. 4 du Code du domaine de l'Etat est abrogé.", "2",
             {"article L. 4 of law 76-66"})
        .art("Article 3. — La présente loi sera exécutée comme loi de l'Etat.", "3", {"this law"})
        .p(detail::pick(state, closings));
    docs.push_back(b.build());
  }
  return docs;
}

inline std::vector<KnowledgeTriple> fixture_triples(const FixtureArticle& a) {
  std::vector<KnowledgeTriple> out;
  for (const auto& r : a.references) out.push_back({std::string(kCurrentArticle), "refers to", r});
  for (const auto& t : a.topics) out.push_back({std::string(kCurrentArticle), "corresponds to", t});
  return out;
}

inline GroundTruth fixture_ground_truth(std::uint64_t seed = 0) {
  GroundTruth gt;
  for (const auto& d : fixture_documents(seed)) {
    for (const auto& a : d.articles) {
      gt[d.stem + "/" + a.label] = GroundTruthEntry{a.references, fixture_triples(a)};
    }
  }
  return gt;
}

// Ten worked examples, invented, covering ranges, lists, relative
// references, prefixed labels and named codes.
inline PromptTemplate default_template() {
  PromptTemplate tpl;
  tpl.instruction =
      "You extract knowledge triples from Senegalese legal articles. Each example gives the article "
      "content, its metadata and the references it cites, then the triples. Every triple has the form "
      "(subject, predicate, object). The subject is \"the current article\". Use the predicate \"refers to\" "
      "for cited legal entities and \"corresponds to\" for what the article is about. Write \"article\" or "
      "\"articles\" followed by the numbers separated by commas, then \"of law\" plus the law number or "
      "\"of decree\" plus the decree number. Abbreviate three or more consecutive article numbers with an "
      "ellipsis (\"5 ... 8\"). Write \"this law\", \"this decree\" or \"the previous article\" when the text "
      "does. Give one triple per line after \"Output:\".";
  auto ex = [](std::string content, Metadata meta, std::vector<std::string> refs, std::vector<std::string> topics) {
    PromptExample e;
    e.content = std::move(content);
    e.metadata = std::move(meta);
    e.references = refs;
    e.output = fixture_triples(FixtureArticle{"", std::move(refs), std::move(topics)});
    return e;
  };
  auto meta = [](std::string name, std::string number, std::string law, std::string date, std::string art) {
    return Metadata{{"name", name}, {"number", number}, {"law_num", law}, {"signature_date", date}, {"art_num", art}};
  };
  tpl.examples.push_back(ex("Les baux ruraux sont régis par les articles 12 à 15 de la présente loi.",
                            meta("loi", "2011-07", "2011-07", "2011-03-30", "11"),
                            {"articles 12 ... 15 of law 2011-07"}, {}));
  tpl.examples.push_back(ex("Le preneur est tenu des obligations prévues à l'article précédent.",
                            meta("loi", "2011-07", "2011-07", "2011-03-30", "16"), {"the previous article"}, {}));
  tpl.examples.push_back(ex("Les modalités d'application de la présente loi sont fixées par décret.",
                            meta("loi", "2011-07", "2011-07", "2011-03-30", "40"), {"this law"},
                            {"implementing measures"}));
  tpl.examples.push_back(ex("Le titre foncier est définitif et inattaquable.",
                            meta("loi", "2011-07", "2011-07", "2011-03-30", "2"), {}, {"the land title"}));
  tpl.examples.push_back(ex("Les articles 3, 9 et 21 à 24 du décret 2008-1031 sont applicables aux demandes.",
                            meta("decret", "2010-439", "2011-07", "2010-04-06", "5"),
                            {"articles 3, 9, 21 ... 24 of decree 2008-1031"}, {}));
  tpl.examples.push_back(ex("La publicité est assurée dans les formes prévues à l'article R. 12 du présent "
                            "décret.",
                            meta("decret", "2010-439", "2011-07", "2010-04-06", "R. 13"),
                            {"article R. 12 of decree 2010-439"}, {}));
  tpl.examples.push_back(ex("Le conservateur applique les articles L. 45 et L. 46 du Code de la "
                            "construction.",
                            meta("code", "2009-23", "2009-23", "2009-07-08", "L. 47"),
                            {"articles L. 45, L. 46 of law 2009-23"}, {}));
  tpl.examples.push_back(ex("Le présent décret abroge les dispositions de l'article 7 bis du décret 2001-98.",
                            meta("decret", "2012-12", "2011-07", "2012-01-09", "9"),
                            {"article 7 bis of decree 2001-98", "this decree"}, {}));
  tpl.examples.push_back(ex("Les hypothèques sont inscrites selon l'Acte uniforme portant organisation des "
                            "sûretés.",
                            meta("loi", "2011-07", "2011-07", "2011-03-30", "30"),
                            {"Uniform Act organizing securities"}, {"mortgage registration"}));
  tpl.examples.push_back(ex("Les redevances sont recouvrées comme en matière d'impôts directs, conformément au "
                            "Code général des impôts et aux articles 2 et 3 de la loi 2012-31.",
                            meta("loi", "2013-10", "2013-10", "2013-12-28", "4"),
                            {"General Tax Code", "articles 2, 3 of law 2012-31"}, {"collection of fees"}));
  return tpl;
}

struct FixtureSummary {
  std::size_t documents = 0;
  std::size_t rent_documents = 0;
  std::size_t main_articles = 0;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
}

inline std::string encode_fixture_element(const DocumentElement& e, bool unclassified) {
  if (!unclassified) return encode_element(e);
  nlohmann::ordered_json j;
  j["k"] = "";
  j["t"] = e.text;
  j["h"] = nullptr;
  return j.dump();
}

// Writes <out>/corpus/..., <out>/golden.jsonl, <out>/template.txt and a
// pipeline config using the echo mock.
inline FixtureSummary make_fixtures(const std::filesystem::path& out_dir, std::uint64_t seed = 0) {
  namespace fs = std::filesystem;
  FixtureSummary s;
  for (const auto& d : fixture_documents(seed)) {
    std::string body;
    for (const auto& e : d.elements) {
      const bool untagged = e.kind == ElementKind::Empty && !text::is_blank(e.text);
      body += encode_fixture_element(e, untagged) + "\n";
    }
    write_text_file(out_dir / "corpus" / d.rel_path, body);
    ++s.documents;
    if (d.rel_path.find("loyer") != std::string::npos) ++s.rent_documents;
    s.main_articles += d.articles.size();
  }
  std::ostringstream gt;
  write_ground_truth(gt, fixture_ground_truth(seed));
  write_text_file(out_dir / "golden.jsonl", gt.str());
  write_text_file(out_dir / "template.txt", save_template(default_template()));

  nlohmann::ordered_json cfg;
  cfg["corpus_root"] = "corpus";
  cfg["rent_glob"] = "*loyer*";
  cfg["template"] = "template.txt";
  cfg["ground_truth"] = "golden.jsonl";
  cfg["output_dir"] = "out";
  cfg["seed"] = seed;
  cfg["concurrency"] = 4;
  cfg["reference_provider"] = "echo";
  ProviderSpec echo;
  echo.name = "echo";
  echo.max_concurrent = 4;
  cfg["providers"] = nlohmann::ordered_json::array({provider_to_json(echo)});
  write_text_file(out_dir / "config.json", cfg.dump(2) + "\n");
  return s;
}

}  // namespace lexstruct

#endif  // LEXSTRUCT_FIXTURES_HPP_
