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

// End-to-end pipeline: extract -> refs -> graph -> triples -> eval, driven
// by one JSON config. Stages are skipped when their outputs are newer than
// their inputs.

#ifndef LEXSTRUCT_PIPELINE_HPP_
#define LEXSTRUCT_PIPELINE_HPP_

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lexstruct/extractor.hpp"
#include "lexstruct/graph.hpp"
#include "lexstruct/graph_io.hpp"
#include "lexstruct/http_provider.hpp"
#include "lexstruct/rouge.hpp"
#include "lexstruct/triples.hpp"

namespace lexstruct {

namespace fs = std::filesystem;

struct PipelineConfig {
  fs::path config_path;
  fs::path corpus_root;
  std::string rent_glob = "*loyer*";
  std::optional<fs::path> keywords;
  fs::path template_path;
  std::optional<fs::path> ground_truth;
  fs::path output_dir;
  int concurrency = 1;
  std::uint64_t seed = 0;
  std::vector<ProviderSpec> providers;
  std::string reference_provider;
};

namespace detail {

inline fs::path resolve_path(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

// "${NAME}" -> NAME; anything else is a literal secret, which is refused.
inline void read_auth(const nlohmann::json& j, ProviderSpec& p) {
  if (!j.contains("auth")) return;
  const std::string v = j["auth"].get<std::string>();
  if (v.size() > 3 && v.rfind("${", 0) == 0 && v.back() == '}') {
    p.auth_env = v.substr(2, v.size() - 3);
    return;
  }
  throw Error(ErrorCode::ConfigError,
              "provider '" + p.name + "': 'auth' must reference an environment variable as ${NAME}");
}

}  // namespace detail

inline PipelineConfig parse_config(const nlohmann::json& j, const fs::path& config_path) {
  PipelineConfig c;
  c.config_path = config_path;
  const fs::path base = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
  try {
    c.corpus_root = detail::resolve_path(base, j.at("corpus_root").get<std::string>());
    c.rent_glob = j.value("rent_glob", "*loyer*");
    if (j.contains("keywords")) c.keywords = detail::resolve_path(base, j["keywords"].get<std::string>());
    c.template_path = detail::resolve_path(base, j.at("template").get<std::string>());
    if (j.contains("ground_truth")) {
      c.ground_truth = detail::resolve_path(base, j["ground_truth"].get<std::string>());
    }
    c.output_dir = detail::resolve_path(base, j.value("output_dir", "out"));
    c.concurrency = j.value("concurrency", 1);
    c.seed = j.value("seed", std::uint64_t{0});
    for (const auto& pj : j.at("providers")) {
      ProviderSpec p = provider_from_json(pj);
      detail::read_auth(pj, p);
      c.providers.push_back(std::move(p));
    }
    c.reference_provider = j.value("reference_provider", "");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
  }
  return c;
}

// Everything referenced must exist before any stage runs.
inline void validate_config(const PipelineConfig& c) {
  auto need = [](const fs::path& p, const std::string& what, bool dir) {
    std::error_code ec;
    if (dir ? !fs::is_directory(p, ec) : !fs::is_regular_file(p, ec)) {
      throw Error(ErrorCode::ConfigError, what + " '" + p.string() + "' does not exist");
    }
  };
  need(c.corpus_root, "corpus root", true);
  need(c.template_path, "template", false);
  if (c.keywords) need(*c.keywords, "keyword table", false);
  if (c.ground_truth) need(*c.ground_truth, "ground truth", false);
  if (c.providers.empty()) throw Error(ErrorCode::ConfigError, "no providers configured");
  if (c.concurrency < 1) throw Error(ErrorCode::ConfigError, "concurrency < 1");
  std::set<std::string> names;
  for (const auto& p : c.providers) {
    if (!names.insert(p.name).second) throw Error(ErrorCode::ConfigError, "duplicate provider '" + p.name + "'");
    for (char ch : p.name) {
      if (!(text::is_alpha(ch) || text::is_digit(ch) || ch == '-' || ch == '_' || ch == '.')) {
        throw Error(ErrorCode::ConfigError, "provider name '" + p.name + "' is not usable in a file name");
      }
    }
    if (p.kind == "mock" && !c.ground_truth) {
      throw Error(ErrorCode::ConfigError, "mock provider '" + p.name + "' needs ground_truth");
    }
  }
  if (!c.reference_provider.empty() && !names.count(c.reference_provider)) {
    throw Error(ErrorCode::ConfigError, "reference_provider '" + c.reference_provider + "' is not configured");
  }
}

inline PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
  }
  return parse_config(j, path);
}

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a sibling temp file, then rename: readers never see half files.
inline void write_file_atomic(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + p.string() + "'");
  }
  fs::rename(tmp, p);
}

inline std::vector<ArticleRecord> load_articles(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + p.string() + "'");
  return read_records_jsonl(in);
}

inline GroundTruth load_ground_truth(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + p.string() + "'");
  return read_ground_truth(in);
}

// refs.jsonl: {"article": key, "references": [{"text", "raw"}], "error": null|msg}
using ReferenceTable = std::map<std::string, std::vector<ExtractedReference>>;

inline void write_refs_jsonl(std::ostream& out, const std::vector<std::string>& order, const ReferenceTable& refs,
                             const std::map<std::string, std::string>& errors) {
  for (const auto& key : order) {
    nlohmann::ordered_json j;
    j["article"] = key;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    if (auto it = refs.find(key); it != refs.end()) {
      for (const auto& r : it->second) arr.push_back({{"text", r.text}, {"raw", r.raw}});
    }
    j["references"] = std::move(arr);
    auto e = errors.find(key);
    j["error"] = e == errors.end() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(e->second);
    out << j.dump() << '\n';
  }
}

inline ReferenceTable read_refs_jsonl(std::istream& in) {
  ReferenceTable t;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::is_blank(line)) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto& v = t[j.at("article").get<std::string>()];
      for (const auto& r : j.at("references")) v.push_back({r.at("text").get<std::string>(), r.value("raw", false)});
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(ErrorCode::MalformedRecord, n, e.what());
    }
  }
  return t;
}

inline ReferenceTable load_refs(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + p.string() + "'");
  return read_refs_jsonl(in);
}

// Parsed references per record index, for the graph builder. Raw entries
// are left out.
inline std::map<std::size_t, std::vector<LegalReference>> references_by_index(
    const std::vector<ArticleRecord>& records, const ReferenceTable& table) {
  std::map<std::size_t, std::vector<LegalReference>> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!is_main_article(records[i])) continue;
    auto it = table.find(article_key(records[i]));
    if (it == table.end()) continue;
    for (const auto& r : it->second) {
      if (r.raw) continue;
      if (auto ref = try_parse_reference(r.text)) out[i].push_back(*ref);
    }
  }
  return out;
}

inline std::vector<ArticleRecord> main_articles(const std::vector<ArticleRecord>& records) {
  std::vector<ArticleRecord> out;
  for (const auto& r : records) {
    if (is_main_article(r)) out.push_back(r);
  }
  return out;
}

// Per-stage freshness: outputs exist and none is older than any input.
inline bool up_to_date(const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs) {
  std::error_code ec;
  fs::file_time_type newest_in = fs::file_time_type::min();
  for (const auto& p : inputs) {
    if (fs::is_directory(p, ec)) {
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        newest_in = std::max(newest_in, e.last_write_time(ec));
      }
      newest_in = std::max(newest_in, fs::last_write_time(p, ec));
    } else if (fs::exists(p, ec)) {
      newest_in = std::max(newest_in, fs::last_write_time(p, ec));
    } else {
      return false;
    }
  }
  for (const auto& p : outputs) {
    if (!fs::exists(p, ec)) return false;
    if (fs::last_write_time(p, ec) < newest_in) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Stages

struct StageOutcome {
  std::string stage;
  enum class Status { Ran, Skipped, Failed } status = Status::Ran;
  std::string message;
};

struct PipelineOptions {
  bool force = false;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::ostream* log = nullptr;
};

struct PipelineResult {
  int exit_code = 0;
  std::vector<StageOutcome> stages;
};

struct PipelinePaths {
  fs::path articles, extraction_report, refs, graph_json, graph_cypher, timing, report_csv, report_md;

  explicit PipelinePaths(const fs::path& out)
      : articles(out / "articles.jsonl"),
        extraction_report(out / "extraction_report.csv"),
        refs(out / "refs.jsonl"),
        graph_json(out / "graph.json"),
        graph_cypher(out / "graph.cypher"),
        timing(out / "timing.json"),
        report_csv(out / "report.csv"),
        report_md(out / "report.md") {}

  static fs::path triples(const fs::path& out, const std::string& provider) {
    return out / ("triples_" + provider + ".jsonl");
  }
};

inline CorpusOptions corpus_options(const PipelineConfig& c) {
  CorpusOptions o;
  o.rent_glob = c.rent_glob;
  if (c.keywords) o.keywords = KeywordTable::load_file(c.keywords->string());
  return o;
}

// Effective mock seed: config seed mixed with the provider's own.
inline ProviderSpec seeded(ProviderSpec p, std::uint64_t seed) {
  p.mock.seed = seed * 1000003ULL + p.mock.seed;
  return p;
}

inline std::string stage_extract(const PipelineConfig& c, const PipelinePaths& paths) {
  CorpusResult r = extract_corpus(c.corpus_root, corpus_options(c));
  std::ostringstream a;
  write_records_jsonl(a, r.records);
  write_file_atomic(paths.articles, a.str());
  std::ostringstream rep;
  write_report_csv(rep, r.report);
  write_file_atomic(paths.extraction_report, rep.str());
  std::string msg = std::to_string(r.records.size()) + " records from " + std::to_string(r.report.rows.size()) +
                    " documents";
  if (!r.report.errors.empty()) msg += ", " + std::to_string(r.report.errors.size()) + " document errors";
  return msg;
}

inline std::string stage_refs(const PipelineConfig& c, const PipelinePaths& paths,
                              std::shared_ptr<const GroundTruth> truth, std::uint64_t seed) {
  const auto articles = main_articles(load_articles(paths.articles));
  const std::string name = c.reference_provider.empty() ? c.providers.front().name : c.reference_provider;
  const ProviderSpec spec =
      seeded(*std::find_if(c.providers.begin(), c.providers.end(), [&](const auto& p) { return p.name == name; }),
             seed);
  auto provider = make_provider(spec, truth);
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
  write_file_atomic(paths.refs, out.str());
  return std::to_string(order.size()) + " articles via '" + name + "', " + std::to_string(errors.size()) +
         " failures";
}

inline std::string stage_graph(const PipelinePaths& paths) {
  const auto records = load_articles(paths.articles);
  const auto refs = load_refs(paths.refs);
  BuildResult b = build_from_articles(records, references_by_index(records, refs));
  write_file_atomic(paths.graph_json, export_neutral(b.graph, GraphFormat::GraphJson));
  std::ostringstream cy;
  export_cypher(b.graph, cy);
  write_file_atomic(paths.graph_cypher, cy.str());
  return std::to_string(b.graph.node_count()) + " nodes, " + std::to_string(b.graph.edge_count()) + " edges, " +
         std::to_string(b.unresolved.size()) + " unresolved references";
}

inline nlohmann::json read_timing(const fs::path& p) {
  std::error_code ec;
  if (!fs::exists(p, ec)) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(read_file(p));
  } catch (const nlohmann::json::exception&) {
    return nlohmann::json::object();
  }
}

inline std::string stage_triples(const PipelineConfig& c, const PipelinePaths& paths, const ProviderSpec& spec,
                                 std::shared_ptr<const GroundTruth> truth, std::uint64_t seed) {
  const auto articles = main_articles(load_articles(paths.articles));
  std::map<std::string, std::vector<std::string>> refs;
  for (const auto& [key, list] : load_refs(paths.refs)) {
    for (const auto& r : list) refs[key].push_back(r.text);
  }
  const PromptTemplate tpl = load_template_file(c.template_path.string());
  auto provider = make_provider(seeded(spec, seed), truth);
  BatchResult batch = run_batch(articles, refs, tpl, *provider, c.concurrency);
  std::ostringstream out;
  write_batch_jsonl(out, spec.name, batch);
  write_file_atomic(PipelinePaths::triples(c.output_dir, spec.name), out.str());

  nlohmann::json timing = read_timing(paths.timing);
  nlohmann::json t;
  t["total_seconds"] = batch.total_seconds;
  t["eid"] = format_eid(batch.total_seconds);
  nlohmann::json per = nlohmann::json::object();
  for (const auto& item : batch.items) per[item.article] = item.seconds;
  t["per_article_seconds"] = per;
  timing[spec.name] = t;
  write_file_atomic(paths.timing, timing.dump(2) + "\n");
  return std::to_string(batch.items.size()) + " articles, " + std::to_string(batch.failures()) +
         " failures, EID " + format_eid(batch.total_seconds);
}

inline std::string stage_eval(const PipelineConfig& c, const PipelinePaths& paths, const GroundTruth& truth) {
  std::map<std::string, ArticleScores> results;
  std::map<std::string, double> eid;
  std::map<std::string, double> npb;
  const nlohmann::json timing = read_timing(paths.timing);
  for (const auto& p : c.providers) {
    std::ifstream in(PipelinePaths::triples(c.output_dir, p.name), std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "missing triples for provider '" + p.name + "'");
    results[p.name] = score_generated(read_generated_jsonl(in), truth);
    if (timing.contains(p.name)) eid[p.name] = timing[p.name].value("total_seconds", 0.0);
    if (p.npb) npb[p.name] = *p.npb;
  }
  ComparisonReport report = build_report(results, eid, npb);
  sort_report(report, Column::R1);
  std::ostringstream csv;
  write_comparison_csv(csv, report);
  write_file_atomic(paths.report_csv, csv.str());
  std::ostringstream md;
  write_comparison_markdown(md, report);
  write_file_atomic(paths.report_md, md.str());
  return std::to_string(report.rows.size()) + " models";
}

inline PipelineResult run_pipeline(const PipelineConfig& c, const PipelineOptions& opts = {}) {
  PipelineResult result;
  auto log = [&](const std::string& s) {
    if (opts.log) *opts.log << s << '\n';
  };
  try {
    validate_config(c);
  } catch (const Error& e) {
    log(std::string("config error: ") + e.what());
    result.exit_code = 2;
    return result;
  }
  const std::uint64_t seed = opts.seed.value_or(c.seed);
  const PipelinePaths paths(c.output_dir);
  fs::create_directories(c.output_dir);

  std::shared_ptr<GroundTruth> truth;
  if (c.ground_truth) {
    try {
      truth = std::make_shared<GroundTruth>(load_ground_truth(*c.ground_truth));
    } catch (const Error& e) {
      log(std::string("config error: ") + e.what());
      result.exit_code = 2;
      return result;
    }
  }

  std::vector<fs::path> cfg_inputs = {c.config_path};
  if (c.keywords) cfg_inputs.push_back(*c.keywords);

  auto stage = [&](const std::string& name, std::vector<fs::path> inputs, std::vector<fs::path> outputs,
                   const std::function<std::string()>& body) {
    if (result.exit_code != 0) return;
    for (const auto& p : cfg_inputs) {
      if (!p.empty()) inputs.push_back(p);
    }
    if (!opts.force && up_to_date(inputs, outputs)) {
      result.stages.push_back({name, StageOutcome::Status::Skipped, "up to date"});
      log(name + ": skipped (up to date)");
      return;
    }
    try {
      const std::string msg = body();
      result.stages.push_back({name, StageOutcome::Status::Ran, msg});
      log(name + ": " + msg);
    } catch (const std::exception& e) {
      result.stages.push_back({name, StageOutcome::Status::Failed, e.what()});
      log(name + ": failed: " + e.what());
      result.exit_code = 1;
    }
  };

  stage("extract", {c.corpus_root}, {paths.articles, paths.extraction_report},
        [&] { return stage_extract(c, paths); });
  stage("refs", {paths.articles}, {paths.refs}, [&] { return stage_refs(c, paths, truth, seed); });
  stage("graph", {paths.articles, paths.refs}, {paths.graph_json, paths.graph_cypher},
        [&] { return stage_graph(paths); });
  std::vector<fs::path> triple_files;
  for (const auto& p : c.providers) {
    const fs::path out = PipelinePaths::triples(c.output_dir, p.name);
    triple_files.push_back(out);
    stage("triples:" + p.name, {paths.articles, paths.refs, c.template_path}, {out},
          [&] { return stage_triples(c, paths, p, truth, seed); });
  }
  if (truth) {
    std::vector<fs::path> inputs = triple_files;
    inputs.push_back(*c.ground_truth);
    stage("eval", inputs, {paths.report_csv, paths.report_md}, [&] { return stage_eval(c, paths, *truth); });
  } else {
    result.stages.push_back({"eval", StageOutcome::Status::Skipped, "no ground_truth configured"});
    log("eval: skipped (no ground_truth configured)");
  }
  return result;
}

}  // namespace lexstruct

#endif  // LEXSTRUCT_PIPELINE_HPP_
