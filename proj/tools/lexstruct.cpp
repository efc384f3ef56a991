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

// lexstruct command-line tool.
// Exit codes: 0 ok, 1 stage failure, 2 usage or config error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lexstruct/fixtures.hpp"
#include "lexstruct/pipeline.hpp"

namespace {

using namespace lexstruct;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool quiet = false;
};

void note(const Globals& g, const std::string& s) {
  if (!g.quiet) std::cerr << s << '\n';
}

// Writes to the file, or stdout for "" / "-".
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    if (!std::cout) throw Error(ErrorCode::SinkError, "stdout");
    return;
  }
  write_file_atomic(path, content);
}

// Providers come from --providers (a JSON object or array) or the
// "providers" list of the pipeline config.
std::vector<ProviderSpec> load_providers(const Globals& g, const std::string& providers_file) {
  if (!providers_file.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(providers_file));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ConfigError, std::string("providers: ") + e.what());
    }
    std::vector<ProviderSpec> out;
    if (j.is_array()) {
      for (const auto& p : j) {
        ProviderSpec s = provider_from_json(p);
        detail::read_auth(p, s);
        out.push_back(s);
      }
    } else {
      ProviderSpec s = provider_from_json(j);
      detail::read_auth(j, s);
      out.push_back(s);
    }
    return out;
  }
  if (!g.config.empty()) return load_config(g.config).providers;
  throw Error(ErrorCode::ConfigError, "no provider configuration: pass --providers FILE or --config FILE");
}

ProviderSpec pick_provider(const Globals& g, const std::string& file, const std::string& name) {
  for (auto& p : load_providers(g, file)) {
    if (name.empty() || p.name == name) return g.seed ? seeded(p, *g.seed) : p;
  }
  throw Error(ErrorCode::ConfigError, "provider '" + name + "' is not configured");
}

std::shared_ptr<const GroundTruth> maybe_truth(const std::string& path) {
  if (path.empty()) return std::make_shared<GroundTruth>();
  return std::make_shared<GroundTruth>(load_ground_truth(path));
}

NeighborhoodFilter parse_filter(const std::vector<std::string>& labels, const std::vector<std::string>& edges) {
  NeighborhoodFilter f;
  if (!labels.empty()) {
    f.labels.emplace();
    for (const auto& l : labels) {
      auto v = label_from_name(l);
      if (!v) throw Error(ErrorCode::ConfigError, "unknown node label '" + l + "'");
      f.labels->insert(*v);
    }
  }
  if (!edges.empty()) {
    f.edge_types.emplace();
    for (const auto& e : edges) {
      auto v = edge_type_from_name(e);
      if (!v) throw Error(ErrorCode::ConfigError, "unknown edge type '" + e + "'");
      f.edge_types->insert(*v);
    }
  }
  return f;
}

PropertyGraph load_graph(const std::string& path) {
  const std::string doc = read_file(path);
  const bool xml = doc.find_first_not_of(" \t\r\n") != std::string::npos && doc[doc.find_first_not_of(" \t\r\n")] == '<';
  return import_neutral(doc, xml ? GraphFormat::GraphMl : GraphFormat::GraphJson);
}

std::string stats_text(const GraphStats& s) {
  std::ostringstream out;
  out << "nodes " << s.node_count << "\nedges " << s.edge_count << "\n";
  for (const auto& [l, n] : s.per_label) out << "label " << label_name(l) << " " << n << "\n";
  for (const auto& [t, n] : s.per_type) out << "edge " << edge_type_name(t) << " " << n << "\n";
  return out.str();
}

int run(int argc, char** argv) {
  CLI::App app{"lexstruct: legal corpus structuring, knowledge graphs and triple evaluation"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config, "Pipeline config file (JSON)");
  auto* seed_opt = app.add_option("--seed", seed_value, "Random seed (overrides the config)");
  app.add_flag("--force", g.force, "Rerun stages even when outputs are up to date");
  app.add_flag("--quiet", g.quiet, "No progress output");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "List corpus documents and validate their element streams");
  std::string ingest_root;
  std::string rent_glob = "*loyer*";
  std::string ingest_out;
  ingest->add_option("root", ingest_root, "Corpus root")->required();
  ingest->add_option("--rent-glob", rent_glob, "Pattern selecting rent documents");
  ingest->add_option("--out", ingest_out, "Output JSONL (default stdout)");

  // extract
  auto* extract = app.add_subcommand("extract", "Extract article records from a corpus");
  std::string extract_root, extract_out, extract_report, extract_csv, keywords;
  extract->add_option("root", extract_root, "Corpus root")->required();
  extract->add_option("--out", extract_out, "articles.jsonl (default stdout)");
  extract->add_option("--report", extract_report, "Per-document report CSV");
  extract->add_option("--csv", extract_csv, "Flattened article CSV");
  extract->add_option("--rent-glob", rent_glob, "Pattern selecting rent documents");
  extract->add_option("--keywords", keywords, "Subdivision keyword table (JSON)");

  // graph
  auto* graph = app.add_subcommand("graph", "Build, export and query the legal property graph");
  graph->require_subcommand(1);
  auto* gbuild = graph->add_subcommand("build", "Build graph.json from articles and references");
  std::string g_articles, g_refs, g_out, g_cypher, g_graph = "graph.json", g_format = "cypher", g_start;
  int g_depth = 1;
  std::vector<std::string> g_labels, g_edges;
  gbuild->add_option("--articles", g_articles, "articles.jsonl")->required();
  gbuild->add_option("--refs", g_refs, "refs.jsonl");
  gbuild->add_option("--out", g_out, "graph.json (default stdout)");
  gbuild->add_option("--cypher", g_cypher, "Also write a Cypher script");
  auto* gexport = graph->add_subcommand("export", "Export a graph");
  gexport->add_option("--graph", g_graph, "Graph file (graph-json or graphml)");
  gexport->add_option("--format", g_format, "cypher | graph-json | graphml");
  gexport->add_option("--out", g_out, "Output file (default stdout)");
  auto* gquery = graph->add_subcommand("query", "Depth-k neighbourhood of a node");
  gquery->add_option("--graph", g_graph, "Graph file");
  gquery->add_option("--start", g_start, "Start node selector, e.g. loi:98-03")->required();
  gquery->add_option("--depth", g_depth, "Maximum hops")->check(CLI::NonNegativeNumber);
  gquery->add_option("--labels", g_labels, "Admitted node labels")->delimiter(',');
  gquery->add_option("--edges", g_edges, "Admitted edge types")->delimiter(',');
  gquery->add_option("--format", g_format, "graph-json | graphml | cypher")->default_val("graph-json");
  gquery->add_option("--out", g_out, "Output file (default stdout)");
  auto* gstats = graph->add_subcommand("stats", "Node and edge counts");
  gstats->add_option("--graph", g_graph, "Graph file");
  bool stats_json = false;
  gstats->add_flag("--json", stats_json, "JSON output");

  // triples
  auto* triples = app.add_subcommand("triples", "Reference extraction and triple generation");
  triples->require_subcommand(1);
  std::string t_provider, t_providers, t_template, t_articles, t_refs, t_out, t_truth, t_article, t_timing;
  int t_concurrency = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--provider", t_provider, "Provider name");
    sub->add_option("--providers", t_providers, "Provider config file (JSON object or array)");
    sub->add_option("--articles", t_articles, "articles.jsonl")->required();
    sub->add_option("--out", t_out, "Output JSONL (default stdout)");
    sub->add_option("--ground-truth", t_truth, "Ground truth for mock providers");
  };
  auto* trefs = triples->add_subcommand("refs", "Extract references with a provider");
  add_common(trefs);
  auto* tgen = triples->add_subcommand("generate", "Generate triples for one article");
  add_common(tgen);
  tgen->add_option("--template", t_template, "Prompt template file")->required();
  tgen->add_option("--refs", t_refs, "refs.jsonl");
  tgen->add_option("--article", t_article, "Article key (default: first main article)");
  auto* tbatch = triples->add_subcommand("batch", "Generate triples for every main article");
  add_common(tbatch);
  tbatch->add_option("--template", t_template, "Prompt template file")->required();
  tbatch->add_option("--refs", t_refs, "refs.jsonl");
  tbatch->add_option("--concurrency", t_concurrency, "Concurrent calls")->check(CLI::PositiveNumber);
  tbatch->add_option("--timing", t_timing, "Timing sidecar JSON");

  // eval
  auto* eval = app.add_subcommand("eval", "Score generated triples against ground truth");
  std::vector<std::string> e_gen;
  std::string e_ref, e_out, e_md, e_timing, e_sort = "R-1";
  eval->add_option("--gen", e_gen, "Generated triples JSONL (repeatable)")->required();
  eval->add_option("--ref", e_ref, "Ground truth JSONL")->required();
  eval->add_option("--out", e_out, "report.csv (default stdout)");
  eval->add_option("--markdown", e_md, "report.md");
  eval->add_option("--timing", e_timing, "Timing sidecar JSON");
  eval->add_option("--sort", e_sort, "Sort column: R-1 R-2 R-L R-Lsum EID NPB");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage from the config");

  // fixtures
  auto* fixtures = app.add_subcommand("fixtures", "Write the synthetic corpus, ground truth and template");
  std::string f_out;
  fixtures->add_option("--out", f_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (seed_opt->count()) g.seed = seed_value;

  if (ingest->parsed()) {
    auto [docs, misplaced] = list_corpus(ingest_root);
    std::ostringstream out;
    int failures = 0;
    for (const auto& rel : misplaced) {
      nlohmann::ordered_json j{{"document", rel.generic_string()}, {"error", "MalformedPath: not <domain>/<law_num>/<doc>"}};
      out << j.dump() << '\n';
      ++failures;
    }
    for (const auto& rel : docs) {
      nlohmann::ordered_json j;
      j["document"] = rel.generic_string();
      try {
        const bool is_rent = matches_glob(rent_glob, rel.generic_string());
        auto d = parse_descriptor((fs::path(ingest_root) / rel.parent_path()).generic_string() + "/",
                                  rel.filename().string(), is_rent);
        std::ifstream in(fs::path(ingest_root) / rel, std::ios::binary);
        const auto elements = read_element_stream(in, StreamOptions{is_rent, KeywordTable::french_default()});
        j["domain"] = d.domain;
        j["law_num"] = d.law_num;
        j["name"] = d.name;
        j["number"] = d.number.raw;
        j["signature_date"] = d.signature_date;
        j["is_rent"] = d.is_rent;
        j["elements"] = elements.size();
      } catch (const std::exception& e) {
        j["error"] = e.what();
        ++failures;
      }
      out << j.dump() << '\n';
    }
    emit(ingest_out, out.str());
    note(g, std::to_string(docs.size()) + " documents, " + std::to_string(failures) + " errors");
    return failures ? 1 : 0;
  }

  if (extract->parsed()) {
    CorpusOptions opts;
    opts.rent_glob = rent_glob;
    if (!keywords.empty()) opts.keywords = KeywordTable::load_file(keywords);
    CorpusResult r = extract_corpus(extract_root, opts);
    std::ostringstream a;
    write_records_jsonl(a, r.records);
    emit(extract_out, a.str());
    if (!extract_report.empty()) {
      std::ostringstream rep;
      write_report_csv(rep, r.report);
      emit(extract_report, rep.str());
    }
    if (!extract_csv.empty()) {
      std::ostringstream c;
      write_records_csv(c, r.records);
      emit(extract_csv, c.str());
    }
    for (const auto& e : r.report.errors) note(g, "error: " + e.document + ": " + e.message);
    note(g, std::to_string(r.records.size()) + " records");
    return r.report.errors.empty() ? 0 : 1;
  }

  if (gbuild->parsed()) {
    const auto records = load_articles(g_articles);
    ReferenceTable refs;
    if (!g_refs.empty()) refs = load_refs(g_refs);
    BuildResult b = build_from_articles(records, references_by_index(records, refs));
    emit(g_out, export_neutral(b.graph, GraphFormat::GraphJson));
    if (!g_cypher.empty()) {
      std::ostringstream cy;
      export_cypher(b.graph, cy);
      emit(g_cypher, cy.str());
    }
    for (const auto& u : b.unresolved) note(g, "unresolved: " + u);
    note(g, std::to_string(b.graph.node_count()) + " nodes, " + std::to_string(b.graph.edge_count()) + " edges");
    return 0;
  }
  if (gexport->parsed()) {
    const PropertyGraph pg = load_graph(g_graph);
    if (g_format == "cypher") {
      std::ostringstream cy;
      export_cypher(pg, cy);
      emit(g_out, cy.str());
    } else {
      emit(g_out, export_neutral(pg, parse_graph_format(g_format)));
    }
    return 0;
  }
  if (gquery->parsed()) {
    const PropertyGraph pg = load_graph(g_graph);
    const Subgraph sub = neighborhood(pg, pg.resolve(g_start), g_depth, parse_filter(g_labels, g_edges));
    const PropertyGraph out = induced_graph(pg, sub);
    if (g_format == "cypher") {
      std::ostringstream cy;
      export_cypher(out, cy);
      emit(g_out, cy.str());
    } else {
      emit(g_out, export_neutral(out, parse_graph_format(g_format)));
    }
    note(g, std::to_string(sub.nodes.size()) + " nodes, " + std::to_string(sub.edges.size()) + " edges");
    return 0;
  }
  if (gstats->parsed()) {
    const GraphStats s = stats(load_graph(g_graph));
    if (stats_json) {
      nlohmann::ordered_json j;
      j["nodes"] = s.node_count;
      j["edges"] = s.edge_count;
      for (const auto& [l, n] : s.per_label) j["labels"][std::string(label_name(l))] = n;
      for (const auto& [t, n] : s.per_type) j["edge_types"][std::string(edge_type_name(t))] = n;
      std::cout << j.dump(2) << '\n';
    } else {
      std::cout << stats_text(s);
    }
    return 0;
  }

  if (trefs->parsed() || tgen->parsed() || tbatch->parsed()) {
    const ProviderSpec spec = pick_provider(g, t_providers, t_provider);
    auto provider = make_provider(spec, maybe_truth(t_truth));
    const auto articles = main_articles(load_articles(t_articles));
    if (trefs->parsed()) {
      ReferenceTable table;
      std::map<std::string, std::string> errors;
      std::vector<std::string> order;
      for (const auto& a : articles) {
        const std::string key = article_key(a);
        order.push_back(key);
        try {
          table[key] = extract_references(a, *provider);
        } catch (const Error& e) {
          errors[key] = e.what();
        }
      }
      std::ostringstream out;
      write_refs_jsonl(out, order, table, errors);
      emit(t_out, out.str());
      note(g, std::to_string(order.size()) + " articles, " + std::to_string(errors.size()) + " failures");
      return errors.empty() ? 0 : 1;
    }
    const PromptTemplate tpl = load_template_file(t_template);
    std::map<std::string, std::vector<std::string>> refs;
    if (!t_refs.empty()) {
      for (const auto& [key, list] : load_refs(t_refs)) {
        for (const auto& r : list) refs[key].push_back(r.text);
      }
    }
    if (tgen->parsed()) {
      const ArticleRecord* target = nullptr;
      for (const auto& a : articles) {
        if (t_article.empty() || article_key(a) == t_article) {
          target = &a;
          break;
        }
      }
      if (!target) throw Error(ErrorCode::ConfigError, "article '" + t_article + "' not found");
      const std::string key = article_key(*target);
      GenerationResult r = generate_triples(*target, refs[key], tpl, *provider);
      nlohmann::ordered_json j;
      j["article"] = key;
      j["model"] = spec.name;
      j["triples"] = triples_to_json(r.triples);
      j["raw"] = r.raw;
      j["error"] = nullptr;
      emit(t_out, j.dump() + "\n");
      if (r.empty_output) note(g, "EmptyOutput: no triple found in the response");
      return 0;
    }
    BatchResult batch = run_batch(articles, refs, tpl, *provider, t_concurrency);
    std::ostringstream out;
    write_batch_jsonl(out, spec.name, batch);
    emit(t_out, out.str());
    if (!t_timing.empty()) {
      nlohmann::json timing = read_timing(t_timing);
      timing[spec.name] = {{"total_seconds", batch.total_seconds}, {"eid", format_eid(batch.total_seconds)}};
      write_file_atomic(t_timing, timing.dump(2) + "\n");
    }
    note(g, std::to_string(batch.items.size()) + " articles, " + std::to_string(batch.failures()) +
                " failures, EID " + format_eid(batch.total_seconds));
    return batch.failures() ? 1 : 0;
  }

  if (eval->parsed()) {
    const GroundTruth truth = load_ground_truth(e_ref);
    const nlohmann::json timing = e_timing.empty() ? nlohmann::json::object() : read_timing(e_timing);
    std::map<std::string, ArticleScores> results;
    std::map<std::string, double> eid;
    for (const auto& path : e_gen) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
      GeneratedSet set = read_generated_jsonl(in);
      std::string model = set.model.empty() ? fs::path(path).stem().string() : set.model;
      for (const auto& [key, t] : truth) {
        if (!set.triples.count(key) && !set.errors.count(key)) {
          throw Error(ErrorCode::MismatchedArticleSets, "'" + path + "' has no entry for " + key);
        }
      }
      results[model] = score_generated(set, truth);
      if (timing.contains(model)) eid[model] = timing[model].value("total_seconds", 0.0);
    }
    ComparisonReport report = build_report(results, eid);
    sort_report(report, column_from_name(e_sort));
    std::ostringstream csv;
    write_comparison_csv(csv, report);
    emit(e_out, csv.str());
    if (!e_md.empty()) {
      std::ostringstream md;
      write_comparison_markdown(md, report);
      emit(e_md, md.str());
    }
    return 0;
  }

  if (pipeline->parsed()) {
    if (g.config.empty()) throw Error(ErrorCode::ConfigError, "pipeline needs --config");
    PipelineConfig cfg;
    try {
      cfg = load_config(g.config);
    } catch (const Error& e) {
      std::cerr << e.what() << '\n';
      return 2;
    }
    PipelineOptions opts;
    opts.force = g.force;
    opts.seed = g.seed;
    opts.log = g.quiet ? nullptr : &std::cerr;
    return run_pipeline(cfg, opts).exit_code;
  }

  if (fixtures->parsed()) {
    const FixtureSummary s = make_fixtures(f_out, g.seed.value_or(0));
    note(g, std::to_string(s.documents) + " documents, " + std::to_string(s.main_articles) + " main articles");
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const lexstruct::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == lexstruct::ErrorCode::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
