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

#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "lexstruct/graph_io.hpp"
#include "oracles.hpp"

using namespace lexstruct;

namespace {

// adds awkward property values so the serializers get exercised
PropertyGraph decorated_graph(std::mt19937_64& rng, std::size_t n) {
  auto base = oracle::random_graph(rng, n, n * 3);
  PropertyGraph g;
  static const std::vector<std::string> odd = {"a \"quoted\" <b> & c", "ligne\nsuivante", "tab\there",
                                                "accentué é à", "back\\slash", "", "'single'"};
  for (const auto& node : base.nodes()) {
    Props p = node.props;
    p["s"] = odd[rng() % odd.size()];
    p["i"] = static_cast<std::int64_t>(rng() % 2000) - 1000;
    p["d"] = static_cast<double>(rng() % 1000) / 7.0;
    p["b"] = (rng() % 2) == 0;
    g.add_node(node.label, std::move(p), node.key);
  }
  for (const auto& e : base.edges()) {
    Props p;
    if (rng() % 2) p["pages"] = odd[rng() % odd.size()];
    g.add_edge(e.type, e.src, e.dst, std::move(p));
  }
  return g;
}

using NodeView = std::tuple<NodeLabel, std::string, Props>;
using EdgeView = std::tuple<EdgeType, NodeLabel, std::string, NodeLabel, std::string, Props>;

std::pair<std::multiset<NodeView>, std::multiset<EdgeView>> view(const PropertyGraph& g) {
  std::multiset<NodeView> nodes;
  std::multiset<EdgeView> edges;
  for (const auto& n : g.nodes()) nodes.emplace(n.label, n.key, n.props);
  for (const auto& e : g.edges()) {
    edges.emplace(e.type, g.node(e.src).label, g.node(e.src).key, g.node(e.dst).label, g.node(e.dst).key, e.props);
  }
  return {nodes, edges};
}

}  // namespace

TEST(GraphIo, RoundTripBothFormats) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 25; ++i) {
    const auto g = decorated_graph(rng, 1 + rng() % 60);
    for (auto fmt : {GraphFormat::GraphJson, GraphFormat::GraphMl}) {
      const std::string doc = export_neutral(g, fmt);
      const auto back = import_neutral(doc, fmt);
      EXPECT_EQ(view(back), view(g));
      EXPECT_TRUE(isomorphic(back, g));
      EXPECT_EQ(export_neutral(back, fmt), doc);
    }
  }
}

TEST(GraphIo, IsomorphicIgnoresInsertionOrder) {
  std::mt19937_64 rng(5);
  const auto g = decorated_graph(rng, 40);
  PropertyGraph r;
  std::vector<NodeId> remap(g.node_count());
  for (std::size_t i = g.node_count(); i-- > 0;) remap[i] = r.add_node(g.node(i).label, g.node(i).props, g.node(i).key);
  for (std::size_t i = g.edge_count(); i-- > 0;) {
    const auto& e = g.edge(i);
    r.add_edge(e.type, remap[e.src], remap[e.dst], e.props);
  }
  EXPECT_TRUE(isomorphic(g, r));
  std::ostringstream a, b;
  export_cypher(g, a);
  export_cypher(r, b);
  EXPECT_EQ(a.str(), b.str());
  if (g.edge_count() > 0) {
    PropertyGraph fewer;
    for (const auto& n : g.nodes()) fewer.add_node(n.label, n.props, n.key);
    EXPECT_FALSE(isomorphic(g, fewer));
  }
}

TEST(GraphIo, CypherUsesFrenchNames) {
  PropertyGraph g;
  const auto j = g.add_node(NodeLabel::OfficialJournal, {{"number", std::string("6-1964")},
                                                         {"signature_date", std::string("1964-07-11")}});
  const auto l = g.add_node(NodeLabel::Law, {{"number", std::string("64-46")}, {"object", std::string("le \"domaine\"")}});
  const auto d = g.add_node(NodeLabel::Decree, {{"number", std::string("64-573")}, {"object", std::string("x")}});
  g.add_edge(EdgeType::Publish, j, l, {{"pages", std::string("1-3")}});
  g.add_edge(EdgeType::Frame, d, l);
  std::ostringstream out;
  EXPECT_EQ(export_cypher(g, out), 5u);
  const std::string s = out.str();
  EXPECT_NE(s.find("CREATE (:Loi {"), std::string::npos);
  EXPECT_NE(s.find("CREATE (:JournalOfficiel {"), std::string::npos);
  EXPECT_NE(s.find("[:publie {"), std::string::npos);
  EXPECT_NE(s.find("[:encadre"), std::string::npos);
  EXPECT_NE(s.find("le \\\"domaine\\\""), std::string::npos);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
}

TEST(GraphIo, SinkAndFormatErrors) {
  PropertyGraph g;
  g.add_node(NodeLabel::Domain, {{"name", std::string("foncier")}});
  std::ofstream bad;  // never opened
  try {
    export_cypher(g, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SinkError);
  }
  try {
    parse_graph_format("neo4j-dump");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
  EXPECT_EQ(parse_graph_format("graphml"), GraphFormat::GraphMl);
  EXPECT_EQ(parse_graph_format("graph-json"), GraphFormat::GraphJson);
  EXPECT_THROW(import_neutral("{\"format\":\"other\"}", GraphFormat::GraphJson), Error);
  EXPECT_THROW(import_neutral("<graphml><graph>", GraphFormat::GraphMl), Error);
}
