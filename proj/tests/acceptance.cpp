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


// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "lexstruct/fixtures.hpp"
#include "lexstruct/pipeline.hpp"
#include "oracles.hpp"
#include "test_util.hpp"
#include "triple_cases.hpp"

using namespace lexstruct;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(prec);
  s << v;
  return s.str();
}

// Fixture corpus extracted, with echo references, shared by several checks.
struct FixtureWorld {
  testutil::TempDir dir{"accept"};
  CorpusResult corpus;
  std::vector<ArticleRecord> mains;
  std::shared_ptr<const GroundTruth> truth;
  PromptTemplate tpl;

  FixtureWorld() {
    make_fixtures(dir.path());
    corpus = extract_corpus(dir / "corpus");
    mains = main_articles(corpus.records);
    truth = std::make_shared<GroundTruth>(fixture_ground_truth(0));
    tpl = load_template_file((dir / "template.txt").string());
  }

  BuildResult graph() const {
    ProviderSpec echo;
    echo.name = "echo";
    MockProvider p(echo, truth);
    ReferenceTable table;
    for (const auto& a : mains) table[article_key(a)] = extract_references(a, p);
    return build_from_articles(corpus.records, references_by_index(corpus.records, table));
  }
};

// 1 ---------------------------------------------------------------------------

Outcome echo_and_corruption(const FixtureWorld& w) {
  Outcome o;
  const auto t0 = Clock::now();
  {
    testutil::TempDir d("accept_pipe");
    make_fixtures(d.path());
    const auto r = run_pipeline(load_config(d / "config.json"));
    const std::string csv = testutil::slurp(d / "out/report.csv");
    if (r.exit_code != 0) o.fail("pipeline exit " + std::to_string(r.exit_code));
    if (csv.find("\necho,100.00,100.00,100.00,100.00,") == std::string::npos) o.fail("echo row: " + csv);
  }
  if (w.mains.size() < 24) o.fail("only " + std::to_string(w.mains.size()) + " articles");

  const std::vector<double> rates = {0.0, 0.25, 0.5, 0.75, 1.0};
  const int seeds = 100;
  std::vector<double> mean(rates.size(), 0.0);
  for (int seed = 0; seed < seeds; ++seed) {
    for (std::size_t k = 0; k < rates.size(); ++k) {
      ProviderSpec spec;
      spec.name = "noisy";
      spec.mock.mode = "corrupt";
      spec.mock.rate = rates[k];
      spec.mock.seed = static_cast<std::uint64_t>(seed);
      MockProvider p(spec, w.truth);
      double sum = 0;
      for (const auto& a : w.mains) {
        const auto gen = generate_triples(a, {}, w.tpl, p).triples;
        sum += score_article(gen, w.truth->at(article_key(a)).triples).r1.f1;
      }
      mean[k] += sum / static_cast<double>(w.mains.size()) / seeds;
    }
  }
  std::string series;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    series += (k ? " " : "") + fmt(mean[k] * 100, 2);
    if (k > 0 && mean[k] > mean[k - 1]) o.fail("R-1 rises between rates " + fmt(rates[k - 1], 2) + " and " + fmt(rates[k], 2));
  }
  if (std::fabs(mean[0] - 1.0) > 1e-12) o.fail("rate 0 is not perfect");
  const double secs = seconds_since(t0);
  if (secs >= 60) o.fail("took " + fmt(secs, 1) + " s");
  if (o.pass) o.detail = "echo 100.00 x4; mean R-1 by rate: " + series + " (" + fmt(secs, 2) + " s)";
  return o;
}

// 2 ---------------------------------------------------------------------------

Outcome lcs_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  const std::vector<std::string> vocab = {"v0", "v1", "v2", "v3", "v4"};
  for (int i = 0; i < 1000 && o.pass; ++i) {
    TokenSequence a(rng() % 13), b(rng() % 13);
    for (auto& t : a) t = vocab[rng() % 5];
    for (auto& t : b) t = vocab[rng() % 5];
    const std::size_t want = oracle::brute_lcs(a, b);
    if (lcs_length(a, b) != want) o.fail("pair " + std::to_string(i) + ": LCS mismatch");
    const PRF got = rouge_l(a, b);
    double p = 0, r = 0, f = 0;
    if (!a.empty() && !b.empty()) {
      p = double(want) / a.size();
      r = double(want) / b.size();
      f = p + r > 0 ? 2 * p * r / (p + r) : 0;
    }
    if (std::fabs(got.precision - p) > 1e-12 || std::fabs(got.recall - r) > 1e-12 || std::fabs(got.f1 - f) > 1e-12) {
      o.fail("pair " + std::to_string(i) + ": p/r/f1 off");
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 10) o.fail("took " + fmt(secs, 1) + " s");
  if (o.pass) o.detail = "1000 pairs agree with subsequence enumeration (" + fmt(secs, 2) + " s)";
  return o;
}

// 3 ---------------------------------------------------------------------------

Outcome rouge_hand_cases() {
  Outcome o;
  const PRF r1 = rouge_n(tokenize("a b c"), tokenize("a b d"), 1);
  for (double v : {r1.precision, r1.recall, r1.f1}) {
    if (std::fabs(v - 2.0 / 3.0) > 1e-12) o.fail("a b c / a b d gave " + fmt(v, 15));
  }
  const auto x = tokenize("the current article refers to this law");
  for (const PRF& s : {rouge_n(x, x, 1), rouge_n(x, x, 2), rouge_l(x, x), rouge_lsum({x}, {x})}) {
    if (s.f1 != 1.0) o.fail("identity below 1");
  }
  for (const PRF& s : {rouge_n({}, x, 1), rouge_n({}, x, 2), rouge_l({}, x), rouge_lsum({}, {x})}) {
    if (s.f1 != 0.0) o.fail("empty generation above 0");
  }
  if (o.pass) o.detail = "2/3, identity 1, empty 0";
  return o;
}

// 4 ---------------------------------------------------------------------------

LegalReference random_reference(std::mt19937_64& rng) {
  static const std::vector<std::string> names = {"Code général des impôts", "Acte uniforme portant organisation des sûretés",
                                                 "Code de la construction", "Constitution", "Uniform Act on commercial law"};
  switch (rng() % 6) {
    case 0: return LegalReference::relative(ReferenceTarget::CurrentLaw);
    case 1: return LegalReference::relative(ReferenceTarget::CurrentDecree);
    case 2: return LegalReference::relative(ReferenceTarget::PreviousArticle);
    case 3: return LegalReference::named(names[rng() % names.size()]);
    default: break;
  }
  const auto prefix = static_cast<ArticlePrefix>(rng() % 3);
  std::set<ArticleLabel> labels;
  const int count = 1 + static_cast<int>(rng() % 10);
  const int base = 1 + static_cast<int>(rng() % 60);
  for (int i = 0; i < count; ++i) {
    ArticleLabel l;
    l.prefix = prefix;
    // clustered numbers so runs appear often
    l.number = base + static_cast<int>(rng() % 12);
    l.multiplicative = rng() % 5 == 0 ? static_cast<Multiplicative>(1 + rng() % 3) : Multiplicative::None;
    labels.insert(l);
  }
  std::optional<InstrumentRef> inst;
  if (rng() % 4 != 0) {
    const bool four = rng() % 2;
    const std::string year = four ? std::to_string(1960 + rng() % 65) : std::to_string(10 + rng() % 90);
    inst = InstrumentRef{rng() % 2 ? InstrumentKind::Law : InstrumentKind::Decree,
                         parse_instrument_number(year + "-" + std::to_string(1 + rng() % 1500))};
  }
  return LegalReference::absolute(std::move(labels), std::move(inst));
}

Outcome reference_round_trip() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(404);
  for (int i = 0; i < 10000 && o.pass; ++i) {
    const LegalReference r = random_reference(rng);
    if (!is_valid(r)) {
      o.fail("generator produced an invalid reference");
      break;
    }
    const std::string s = format_reference(r);
    try {
      const LegalReference back = parse_reference(s);
      if (!(back == r)) o.fail("'" + s + "' parses to a different reference");
      if (format_reference(back) != s) o.fail("'" + s + "' is not a fixpoint");
    } catch (const std::exception& e) {
      o.fail("'" + s + "': " + e.what());
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 5) o.fail("took " + fmt(secs, 2) + " s");
  const std::string canon = "articles 2, 5 ... 8 of law 64-46";
  const LegalReference c = parse_reference(canon);
  std::set<int> nums;
  for (const auto& l : c.articles) nums.insert(l.number);
  if (nums != std::set<int>{2, 5, 6, 7, 8} || !c.instrument || c.instrument->number.raw != "64-46" ||
      c.instrument->kind != InstrumentKind::Law) {
    o.fail("canonical example parsed wrong");
  }
  if (format_reference(c) != canon) o.fail("canonical example re-serialized as '" + format_reference(c) + "'");
  if (o.pass) o.detail = "10000 references fixpoint (" + fmt(secs, 2) + " s); canonical example ok";
  return o;
}

// 5 ---------------------------------------------------------------------------

Outcome golden_and_conservation(const FixtureWorld& w) {
  Outcome o;
  std::ostringstream got;
  write_records_jsonl(got, w.corpus.records);
  const std::string golden = testutil::slurp(LEXSTRUCT_TEST_DATA "/golden_articles.jsonl");
  if (golden.empty()) o.fail("golden file missing");
  if (got.str() != golden) o.fail("extraction differs from golden file");
  std::mt19937_64 rng(55);
  for (int i = 0; i < 500 && o.pass; ++i) {
    const bool rent = i % 2;
    const auto d = parse_descriptor("root/foncier/64-46/", std::string(rent ? "arrete_loyer" : "loi") + "_64-46_1964-06-17.jsonl", rent);
    const auto es = oracle::random_stream(rng, {rent, 1 + static_cast<int>(rng() % 150)});
    const auto res = extract_document(d, es);
    const auto [in, out] = oracle::conservation(d, es, res.records);
    if (in != out) o.fail("stream " + std::to_string(i) + " loses or invents text");
  }
  if (o.pass) o.detail = std::to_string(w.corpus.records.size()) + " records byte-identical; 500 streams conserve text";
  return o;
}

// 6 ---------------------------------------------------------------------------

Outcome linearity() {
  Outcome o;
  const auto d = parse_descriptor("root/foncier/64-46/", "loi_64-46_1964-06-17.jsonl", false);
  std::mt19937_64 rng(6);
  const auto small = oracle::random_stream(rng, {false, 10000});
  const auto large = oracle::random_stream(rng, {false, 100000});
  auto median_time = [&](const std::vector<DocumentElement>& es) {
    std::vector<double> t;
    for (int i = 0; i < 5; ++i) {
      const auto t0 = Clock::now();
      const auto res = extract_document(d, es);
      t.push_back(seconds_since(t0));
      if (res.elements_visited != es.size()) o.fail("visited " + std::to_string(res.elements_visited) + " of " + std::to_string(es.size()));
    }
    std::sort(t.begin(), t.end());
    return t[2];
  };
  median_time(small);  // warm-up
  const double ts = median_time(small);
  const double tl = median_time(large);
  const double ratio = tl / ts;
  if (ratio > 13.0) o.fail("100k/10k time ratio " + fmt(ratio, 2));
  if (o.pass) o.detail = "visits == length; 10k " + fmt(ts * 1000, 2) + " ms, 100k " + fmt(tl * 1000, 2) + " ms, ratio " + fmt(ratio, 2);
  return o;
}

// 7 ---------------------------------------------------------------------------

Outcome schema_fuzz() {
  using L = NodeLabel;
  using E = EdgeType;
  // written out row by row
  const std::set<std::tuple<E, L, L>> allowed = {
      {E::Publish, L::OfficialJournal, L::Law},
      {E::Publish, L::OfficialJournal, L::Decree},
      {E::Publish, L::OfficialJournal, L::MinisterialOrder},
      {E::Possess, L::Domain, L::Law},
      {E::Possess, L::Domain, L::Decree},
      {E::Possess, L::Domain, L::MinisterialOrder},
      {E::Possess, L::Domain, L::Declaration},
      {E::Possess, L::Domain, L::UniformAct},
      {E::Possess, L::Domain, L::LegalCode},
      {E::Possess, L::Law, L::Article},
      {E::Possess, L::Decree, L::Article},
      {E::Possess, L::MinisterialOrder, L::Article},
      {E::Possess, L::Declaration, L::Article},
      {E::IsAssociated, L::Law, L::Decree},
      {E::Modify, L::Law, L::Law},
      {E::Modify, L::Law, L::Article},
      {E::Repeal, L::Law, L::Law},
      {E::Repeal, L::Law, L::Article},
      {E::Frame, L::Decree, L::Law},
      {E::Execute, L::Decree, L::Law},
      {E::BasedOn, L::Article, L::Domain},
      {E::BasedOn, L::Article, L::Law},
      {E::BasedOn, L::Article, L::Decree},
      {E::BasedOn, L::Article, L::Article},
      {E::BasedOn, L::Article, L::OfficialJournal},
      {E::BasedOn, L::Article, L::MinisterialOrder},
      {E::BasedOn, L::Article, L::Declaration},
      {E::BasedOn, L::Article, L::UniformAct},
      {E::BasedOn, L::Article, L::LegalCode},
      {E::BasedOn, L::Article, L::Person},
      {E::Signed, L::Law, L::Person},
      {E::Signed, L::Decree, L::Person},
      {E::Signed, L::MinisterialOrder, L::Person},
  };
  Outcome o;
  if (allowed.size() != 33) o.fail("table has " + std::to_string(allowed.size()) + " rows");
  int combos = 0, accepted = 0;
  for (E t : kAllEdgeTypes) {
    for (L s : kAllLabels) {
      for (L d : kAllLabels) {
        ++combos;
        PropertyGraph g;
        const NodeId a = g.add_node(s, oracle::minimal_props(s, 0), "a");
        const NodeId b = g.add_node(d, oracle::minimal_props(d, 1), "b");
        const bool want = allowed.count({t, s, d}) > 0;
        const std::string triple = "(" + std::string(edge_type_name(t)) + ", " + std::string(label_name(s)) + ", " +
                                   std::string(label_name(d)) + ")";
        try {
          g.add_edge(t, a, b);
          ++accepted;
          if (!want) o.fail(triple + " accepted");
        } catch (const SchemaViolationError& e) {
          if (want) o.fail(triple + " rejected");
          if (e.type() != t || e.src_label() != s || e.dst_label() != d ||
              std::string(e.what()).find(triple) == std::string::npos) {
            o.fail(triple + " rejection does not name the triple");
          }
        } catch (const std::exception& e) {
          o.fail(triple + " raised " + e.what());
        }
      }
    }
  }
  if (combos != 900) o.fail(std::to_string(combos) + " combinations");
  if (o.pass) o.detail = "900 combinations, " + std::to_string(accepted) + " accepted, rejections name the triple";
  return o;
}

// 8 ---------------------------------------------------------------------------

Outcome neighborhoods() {
  Outcome o;
  std::mt19937_64 rng(808);
  int queries = 0;
  for (int gi = 0; gi < 200 && o.pass; ++gi) {
    const std::size_t n = 1 + rng() % 500;
    const auto g = oracle::random_graph(rng, n, n * (1 + rng() % 4));
    const NodeId start = rng() % n;
    std::vector<NeighborhoodFilter> filters(1);
    NeighborhoodFilter by_type;
    by_type.edge_types = std::set<EdgeType>{};
    for (EdgeType t : kAllEdgeTypes) {
      if (rng() % 2) by_type.edge_types->insert(t);
    }
    NeighborhoodFilter by_label;
    by_label.labels = std::set<NodeLabel>{};
    for (NodeLabel l : kAllLabels) {
      if (rng() % 2) by_label.labels->insert(l);
    }
    NeighborhoodFilter both = by_type;
    both.labels = by_label.labels;
    filters.push_back(by_type);
    filters.push_back(by_label);
    filters.push_back(both);
    for (const auto& f : filters) {
      std::set<NodeId> prev_nodes;
      std::set<EdgeId> prev_edges;
      for (int depth = 0; depth <= 4; ++depth) {
        ++queries;
        const Subgraph got = neighborhood(g, start, depth, f);
        const std::set<NodeId> nodes(got.nodes.begin(), got.nodes.end());
        const std::set<EdgeId> edges(got.edges.begin(), got.edges.end());
        const auto [bn, be] = oracle::brute_neighborhood(g, start, depth, f);
        if (nodes != bn || edges != be) o.fail("graph " + std::to_string(gi) + " depth " + std::to_string(depth));
        if (!std::includes(nodes.begin(), nodes.end(), prev_nodes.begin(), prev_nodes.end()) ||
            !std::includes(edges.begin(), edges.end(), prev_edges.begin(), prev_edges.end())) {
          o.fail("not monotone in depth on graph " + std::to_string(gi));
        }
        prev_nodes = nodes;
        prev_edges = edges;
      }
    }
  }
  if (o.pass) o.detail = std::to_string(queries) + " queries on 200 graphs agree with relaxation; monotone in depth";
  return o;
}

// 9 ---------------------------------------------------------------------------

PropertyGraph shuffled_copy(const PropertyGraph& g, std::mt19937_64& rng) {
  std::vector<NodeId> order(g.node_count());
  for (NodeId i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  PropertyGraph out;
  std::vector<NodeId> remap(g.node_count());
  for (NodeId i : order) remap[i] = out.add_node(g.node(i).label, g.node(i).props, g.node(i).key);
  std::vector<EdgeId> eorder(g.edge_count());
  for (EdgeId i = 0; i < eorder.size(); ++i) eorder[i] = i;
  std::shuffle(eorder.begin(), eorder.end(), rng);
  for (EdgeId i : eorder) {
    const auto& e = g.edge(i);
    out.add_edge(e.type, remap[e.src], remap[e.dst], e.props);
  }
  return out;
}

Outcome export_round_trip(const FixtureWorld& w) {
  Outcome o;
  std::mt19937_64 rng(909);
  std::vector<PropertyGraph> graphs = {w.graph().graph};
  for (int i = 0; i < 30; ++i) graphs.push_back(oracle::random_graph(rng, 1 + rng() % 200, 400));
  for (std::size_t i = 0; i < graphs.size() && o.pass; ++i) {
    const auto& g = graphs[i];
    for (auto fmt_ : {GraphFormat::GraphJson, GraphFormat::GraphMl}) {
      const auto back = import_neutral(export_neutral(g, fmt_), fmt_);
      if (!isomorphic(back, g) || back.node_count() != g.node_count() || back.edge_count() != g.edge_count()) {
        o.fail("graph " + std::to_string(i) + " does not survive " + (fmt_ == GraphFormat::GraphMl ? "graphml" : "graph-json"));
      }
    }
    std::ostringstream a, b, c;
    export_cypher(g, a);
    export_cypher(g, b);
    export_cypher(shuffled_copy(g, rng), c);
    if (a.str() != b.str() || a.str() != c.str()) o.fail("cypher output of graph " + std::to_string(i) + " varies");
  }
  std::ostringstream x, y;
  export_cypher(w.graph().graph, x);
  export_cypher(w.graph().graph, y);
  if (x.str() != y.str()) o.fail("fixture cypher differs between builds");
  if (o.pass) o.detail = std::to_string(graphs.size()) + " graphs round-trip in both formats; cypher stable under rebuild and reordering";
  return o;
}

// 10 --------------------------------------------------------------------------

Outcome fixture_stats(const FixtureWorld& w) {
  Outcome o;
  const GraphStats s = stats(w.graph().graph);
  GraphStats want;
  want.node_count = 48;
  want.edge_count = 77;
  for (NodeLabel l : kAllLabels) want.per_label[l] = 0;
  for (EdgeType t : kAllEdgeTypes) want.per_type[t] = 0;
  want.per_label[NodeLabel::Article] = 38;
  want.per_label[NodeLabel::Law] = 4;
  want.per_label[NodeLabel::Decree] = 2;
  want.per_label[NodeLabel::MinisterialOrder] = 1;
  want.per_label[NodeLabel::Declaration] = 1;
  want.per_label[NodeLabel::UniformAct] = 1;
  want.per_label[NodeLabel::LegalCode] = 1;
  want.per_type[EdgeType::Possess] = 35;
  want.per_type[EdgeType::IsAssociated] = 2;
  want.per_type[EdgeType::BasedOn] = 40;
  if (!(s == want)) {
    std::string got = std::to_string(s.node_count) + " nodes / " + std::to_string(s.edge_count) + " edges";
    o.fail("got " + got);
  }
  if (o.pass) o.detail = "48 nodes, 77 edges, per-label and per-type counts exact";
  return o;
}

// 11 --------------------------------------------------------------------------

Outcome triple_fixtures() {
  Outcome o;
  const auto all = cases::load(LEXSTRUCT_TEST_DATA "/triple_cases.txt");
  if (all.size() < 20) o.fail("only " + std::to_string(all.size()) + " cases");
  std::map<std::string, int> kinds;
  for (const auto& c : all) {
    const std::string err = cases::check(c);
    if (!err.empty()) o.fail("'" + c.name + "': " + err);
    ++kinds[c.expect == "rejected" ? "rejected" : c.expect.substr(0, c.expect.find(' '))];
  }
  if (o.pass) {
    o.detail = std::to_string(all.size()) + " cases (";
    bool first = true;
    for (const auto& [k, n] : kinds) {
      o.detail += (first ? "" : ", ") + std::to_string(n) + " " + k;
      first = false;
    }
    o.detail += ")";
  }
  return o;
}

}  // namespace

int main() {
  const FixtureWorld world;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"echo pipeline scores 100.00; mean R-1 non-increasing in corruption rate", [&] { return echo_and_corruption(world); }},
      {"ROUGE-L matches brute-force LCS", lcs_oracle},
      {"hand-computed ROUGE cases", rouge_hand_cases},
      {"reference grammar round-trip", reference_round_trip},
      {"extractor golden file and text conservation", [&] { return golden_and_conservation(world); }},
      {"extractor linearity", linearity},
      {"graph schema fuzz", schema_fuzz},
      {"neighborhood queries match brute force", neighborhoods},
      {"graph export round-trip and deterministic Cypher", [&] { return export_round_trip(world); }},
      {"fixture graph statistics", [&] { return fixture_stats(world); }},
      {"triple parser fixture file", triple_fixtures},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  return failed ? 1 : 0;
}
