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

// Typed property graph for legal entities.
//
// Ten node labels and nine edge types; every edge must match a row of the
// allowed-endpoint table (edge_allowed). Nodes carry a natural key, unique
// per label, that identifies them across builds and exports. Selectors
// address nodes as "<prefix>:<key>", e.g. "loi:98-03" or "law:98-03".

#ifndef LEXSTRUCT_GRAPH_HPP_
#define LEXSTRUCT_GRAPH_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lexstruct/docmodel.hpp"
#include "lexstruct/error.hpp"
#include "lexstruct/extractor.hpp"
#include "lexstruct/numbering.hpp"

namespace lexstruct {

enum class NodeLabel {
  Domain,
  Law,
  Decree,
  Article,
  OfficialJournal,
  MinisterialOrder,
  Declaration,
  UniformAct,
  LegalCode,
  Person,
};

enum class EdgeType { Publish, Possess, IsAssociated, Modify, Repeal, Frame, Execute, BasedOn, Signed };

inline constexpr NodeLabel kAllLabels[] = {
    NodeLabel::Domain,           NodeLabel::Law,         NodeLabel::Decree,     NodeLabel::Article,
    NodeLabel::OfficialJournal,  NodeLabel::MinisterialOrder, NodeLabel::Declaration,
    NodeLabel::UniformAct,       NodeLabel::LegalCode,   NodeLabel::Person};

inline constexpr EdgeType kAllEdgeTypes[] = {EdgeType::Publish, EdgeType::Possess, EdgeType::IsAssociated,
                                             EdgeType::Modify,  EdgeType::Repeal,  EdgeType::Frame,
                                             EdgeType::Execute, EdgeType::BasedOn, EdgeType::Signed};

// Internal English names and the French names used in exported scripts.
struct LabelNames {
  NodeLabel label;
  std::string_view english;
  std::string_view french;    // Cypher label
  std::string_view selector;  // lowercase selector prefix
};

inline constexpr LabelNames kLabelNames[] = {
    {NodeLabel::Domain, "Domain", "Domaine", "domaine"},
    {NodeLabel::Law, "Law", "Loi", "loi"},
    {NodeLabel::Decree, "Decree", "Decret", "decret"},
    {NodeLabel::Article, "Article", "Article", "article"},
    {NodeLabel::OfficialJournal, "OfficialJournal", "JournalOfficiel", "journal_officiel"},
    {NodeLabel::MinisterialOrder, "MinisterialOrder", "ArreteMinisteriel", "arrete_ministeriel"},
    {NodeLabel::Declaration, "Declaration", "Declaration", "declaration"},
    {NodeLabel::UniformAct, "UniformAct", "ActeUniforme", "acte_uniforme"},
    {NodeLabel::LegalCode, "LegalCode", "CodeJuridique", "code_juridique"},
    {NodeLabel::Person, "Person", "Personne", "personne"},
};

struct EdgeNames {
  EdgeType type;
  std::string_view english;
  std::string_view french;
};

inline constexpr EdgeNames kEdgeNames[] = {
    {EdgeType::Publish, "Publish", "publie"},
    {EdgeType::Possess, "Possess", "possede"},
    {EdgeType::IsAssociated, "IsAssociated", "est_associe"},
    {EdgeType::Modify, "Modify", "modifie"},
    {EdgeType::Repeal, "Repeal", "abroge"},
    {EdgeType::Frame, "Frame", "encadre"},
    {EdgeType::Execute, "Execute", "execute"},
    {EdgeType::BasedOn, "BasedOn", "base_sur"},
    {EdgeType::Signed, "Signed", "signe"},
};

inline const LabelNames& names_of(NodeLabel l) { return kLabelNames[static_cast<int>(l)]; }
inline const EdgeNames& names_of(EdgeType t) { return kEdgeNames[static_cast<int>(t)]; }
inline std::string_view label_name(NodeLabel l) { return names_of(l).english; }
inline std::string_view edge_type_name(EdgeType t) { return names_of(t).english; }

inline std::optional<NodeLabel> label_from_name(std::string_view s) {
  for (const auto& n : kLabelNames) {
    if (text::iequals(s, n.english) || text::iequals(s, n.french) || text::iequals(s, n.selector)) {
      return n.label;
    }
  }
  return std::nullopt;
}

inline std::optional<EdgeType> edge_type_from_name(std::string_view s) {
  for (const auto& n : kEdgeNames) {
    if (text::iequals(s, n.english) || text::iequals(s, n.french)) return n.type;
  }
  return std::nullopt;
}

// The allowed-endpoint table.
inline bool edge_allowed(EdgeType type, NodeLabel src, NodeLabel dst) {
  using L = NodeLabel;
  auto instrument = [](L l) { return l == L::Law || l == L::Decree || l == L::MinisterialOrder; };
  switch (type) {
    case EdgeType::Publish:
      return src == L::OfficialJournal && instrument(dst);
    case EdgeType::Possess:
      if (src == L::Domain) {
        return instrument(dst) || dst == L::Declaration || dst == L::UniformAct || dst == L::LegalCode;
      }
      return (instrument(src) || src == L::Declaration) && dst == L::Article;
    case EdgeType::IsAssociated:
      return src == L::Law && dst == L::Decree;
    case EdgeType::Modify:
    case EdgeType::Repeal:
      return src == L::Law && (dst == L::Law || dst == L::Article);
    case EdgeType::Frame:
    case EdgeType::Execute:
      return src == L::Decree && dst == L::Law;
    case EdgeType::BasedOn:
      return src == L::Article;
    case EdgeType::Signed:
      return instrument(src) && dst == L::Person;
  }
  return false;
}

class SchemaViolationError : public Error {
 public:
  SchemaViolationError(EdgeType type, NodeLabel src, NodeLabel dst)
      : Error(ErrorCode::SchemaViolation, "(" + std::string(edge_type_name(type)) + ", " +
                                              std::string(label_name(src)) + ", " +
                                              std::string(label_name(dst)) + ") is not allowed"),
        type_(type),
        src_(src),
        dst_(dst) {}

  EdgeType type() const { return type_; }
  NodeLabel src_label() const { return src_; }
  NodeLabel dst_label() const { return dst_; }

 private:
  EdgeType type_;
  NodeLabel src_;
  NodeLabel dst_;
};

using PropValue = std::variant<std::string, std::int64_t, double, bool>;
using Props = std::map<std::string, PropValue>;
using NodeId = std::size_t;
using EdgeId = std::size_t;

struct GraphNode {
  NodeId id = 0;
  NodeLabel label = NodeLabel::Article;
  std::string key;
  Props props;
};

struct GraphEdge {
  EdgeId id = 0;
  EdgeType type = EdgeType::BasedOn;
  NodeId src = 0;
  NodeId dst = 0;
  Props props;
};

inline std::vector<std::string_view> required_props(NodeLabel label) {
  switch (label) {
    case NodeLabel::Person: return {"title", "name"};
    case NodeLabel::Law:
    case NodeLabel::Decree:
    case NodeLabel::MinisterialOrder: return {"object"};
    case NodeLabel::OfficialJournal: return {"signature_date"};
    case NodeLabel::Article: return {"art_num"};
    default: return {};
  }
}

inline const std::string* string_prop(const Props& props, std::string_view name) {
  auto it = props.find(std::string(name));
  if (it == props.end()) return nullptr;
  return std::get_if<std::string>(&it->second);
}

class PropertyGraph {
 public:
  // Adds a node. The natural key defaults to the label's identifying
  // property (number for instruments, name for persons/codes/domains)
  // and falls back to "#<id>".
  NodeId add_node(NodeLabel label, Props props, std::optional<std::string> key = std::nullopt) {
    for (std::string_view req : required_props(label)) {
      if (!props.count(std::string(req))) {
        throw Error(ErrorCode::MissingRequiredProp,
                    std::string(label_name(label)) + " requires '" + std::string(req) + "'");
      }
    }
    const NodeId id = nodes_.size();
    std::string k = key ? *key : default_key(label, props, id);
    if (k.empty()) throw Error(ErrorCode::DuplicateNode, "empty natural key");
    if (!by_key_.emplace(std::make_pair(label, k), id).second) {
      throw Error(ErrorCode::DuplicateNode, std::string(label_name(label)) + " '" + k + "' already exists");
    }
    nodes_.push_back(GraphNode{id, label, std::move(k), std::move(props)});
    out_.emplace_back();
    in_.emplace_back();
    return id;
  }

  EdgeId add_edge(EdgeType type, NodeId src, NodeId dst, Props props = {}) {
    if (src >= nodes_.size() || dst >= nodes_.size()) {
      throw Error(ErrorCode::UnknownNode, "edge endpoint " + std::to_string(std::max(src, dst)));
    }
    if (!edge_allowed(type, nodes_[src].label, nodes_[dst].label)) {
      throw SchemaViolationError(type, nodes_[src].label, nodes_[dst].label);
    }
    const EdgeId id = edges_.size();
    edges_.push_back(GraphEdge{id, type, src, dst, std::move(props)});
    out_[src].push_back(id);
    in_[dst].push_back(id);
    return id;
  }

  // Replaces a node's properties, keeping its key.
  void set_props(NodeId id, Props props) {
    const GraphNode& n = node(id);
    for (std::string_view req : required_props(n.label)) {
      if (!props.count(std::string(req))) {
        throw Error(ErrorCode::MissingRequiredProp,
                    std::string(label_name(n.label)) + " requires '" + std::string(req) + "'");
      }
    }
    nodes_[id].props = std::move(props);
  }

  std::optional<EdgeId> find_edge(EdgeType type, NodeId src, NodeId dst) const {
    if (src >= nodes_.size()) return std::nullopt;
    for (EdgeId e : out_[src]) {
      if (edges_[e].type == type && edges_[e].dst == dst) return e;
    }
    return std::nullopt;
  }

  std::optional<NodeId> find(NodeLabel label, const std::string& key) const {
    auto it = by_key_.find({label, key});
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
  }

  // "<prefix>:<key>" with prefix a selector, English or French label name.
  std::optional<NodeId> find_selector(std::string_view selector) const {
    const std::size_t colon = selector.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    auto label = label_from_name(selector.substr(0, colon));
    if (!label) return std::nullopt;
    return find(*label, std::string(selector.substr(colon + 1)));
  }

  NodeId resolve(std::string_view selector) const {
    auto id = find_selector(selector);
    if (!id) throw Error(ErrorCode::NoSuchNode, "'" + std::string(selector) + "'");
    return *id;
  }

  std::string selector(NodeId id) const {
    const GraphNode& n = node(id);
    return std::string(names_of(n.label).selector) + ":" + n.key;
  }

  const GraphNode& node(NodeId id) const {
    if (id >= nodes_.size()) throw Error(ErrorCode::UnknownNode, std::to_string(id));
    return nodes_[id];
  }
  const GraphEdge& edge(EdgeId id) const { return edges_.at(id); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const std::vector<EdgeId>& out_edges(NodeId id) const { return out_.at(id); }
  const std::vector<EdgeId>& in_edges(NodeId id) const { return in_.at(id); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

 private:
  static std::string default_key(NodeLabel label, const Props& props, NodeId id) {
    const std::string* v = nullptr;
    switch (label) {
      case NodeLabel::Law:
      case NodeLabel::Decree:
      case NodeLabel::MinisterialOrder:
        v = string_prop(props, "number");
        break;
      case NodeLabel::OfficialJournal:
        v = string_prop(props, "number");
        if (!v) v = string_prop(props, "signature_date");
        break;
      case NodeLabel::Person:
      case NodeLabel::Domain:
      case NodeLabel::LegalCode:
      case NodeLabel::UniformAct:
      case NodeLabel::Declaration:
        v = string_prop(props, "name");
        break;
      case NodeLabel::Article:
        break;
    }
    return v ? *v : "#" + std::to_string(id);
  }

  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::vector<EdgeId>> in_;
  std::map<std::pair<NodeLabel, std::string>, NodeId> by_key_;
};

// ---------------------------------------------------------------------------
// Queries

struct Subgraph {
  std::vector<NodeId> nodes;  // ascending
  std::vector<EdgeId> edges;  // ascending
};

struct NeighborhoodFilter {
  std::optional<std::set<EdgeType>> edge_types;
  std::optional<std::set<NodeLabel>> labels;
};

// Nodes within `depth` hops of start, walking edges in both directions and
// only through edges/nodes the filter admits; start is always included. The
// result is the induced subgraph over admitted edge types.
inline Subgraph neighborhood(const PropertyGraph& g, NodeId start, int depth,
                             const NeighborhoodFilter& filter = {}) {
  if (start >= g.node_count()) throw Error(ErrorCode::NoSuchNode, std::to_string(start));
  if (depth < 0) throw Error(ErrorCode::ConfigError, "negative depth");
  auto edge_ok = [&](EdgeType t) { return !filter.edge_types || filter.edge_types->count(t); };
  auto label_ok = [&](NodeLabel l) { return !filter.labels || filter.labels->count(l); };

  std::vector<int> dist(g.node_count(), -1);
  std::deque<NodeId> queue{start};
  dist[start] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    if (dist[u] == depth) continue;
    auto visit = [&](EdgeId eid, NodeId v) {
      if (!edge_ok(g.edge(eid).type) || dist[v] >= 0 || !label_ok(g.node(v).label)) return;
      dist[v] = dist[u] + 1;
      queue.push_back(v);
    };
    for (EdgeId e : g.out_edges(u)) visit(e, g.edge(e).dst);
    for (EdgeId e : g.in_edges(u)) visit(e, g.edge(e).src);
  }
  Subgraph sub;
  for (NodeId n = 0; n < g.node_count(); ++n) {
    if (dist[n] >= 0) sub.nodes.push_back(n);
  }
  for (const auto& e : g.edges()) {
    if (dist[e.src] >= 0 && dist[e.dst] >= 0 && edge_ok(e.type)) sub.edges.push_back(e.id);
  }
  return sub;
}

// Copies a subgraph into a standalone graph (keys and props preserved).
inline PropertyGraph induced_graph(const PropertyGraph& g, const Subgraph& sub) {
  PropertyGraph out;
  std::map<NodeId, NodeId> remap;
  for (NodeId n : sub.nodes) {
    const GraphNode& node = g.node(n);
    remap[n] = out.add_node(node.label, node.props, node.key);
  }
  for (EdgeId e : sub.edges) {
    const GraphEdge& edge = g.edge(e);
    out.add_edge(edge.type, remap.at(edge.src), remap.at(edge.dst), edge.props);
  }
  return out;
}

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::map<NodeLabel, std::size_t> per_label;
  std::map<EdgeType, std::size_t> per_type;

  bool operator==(const GraphStats&) const = default;
};

inline GraphStats stats(const PropertyGraph& g) {
  GraphStats s;
  s.node_count = g.node_count();
  s.edge_count = g.edge_count();
  for (NodeLabel l : kAllLabels) s.per_label[l] = 0;
  for (EdgeType t : kAllEdgeTypes) s.per_type[t] = 0;
  for (const auto& n : g.nodes()) ++s.per_label[n.label];
  for (const auto& e : g.edges()) ++s.per_type[e.type];
  return s;
}

// ---------------------------------------------------------------------------
// Building from extracted articles

// 64-bit FNV-1a, hex. Article nodes store a digest instead of full text.
inline std::string content_digest(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

struct BuildResult {
  PropertyGraph graph;
  std::vector<std::string> unresolved;  // UnresolvedReference messages
};

namespace detail {

class GraphBuilder {
 public:
  NodeId instrument(NodeLabel label, const std::string& number, const std::string& object,
                    const std::string& domain, bool mentioned) {
    if (auto id = g_.find(label, number)) {
      const GraphNode& n = g_.node(*id);
      if (!mentioned && n.props.count("mentioned")) {
        g_.set_props(*id, instrument_props(number, object, domain, false));
      }
      return *id;
    }
    return g_.add_node(label, instrument_props(number, object, domain, mentioned), number);
  }

  NodeId named(NodeLabel label, const std::string& name, Props extra = {}) {
    if (auto id = g_.find(label, name)) return *id;
    extra["name"] = name;
    return g_.add_node(label, std::move(extra), name);
  }

  NodeId article(NodeId owner, const std::string& label_text, Props props, bool mentioned) {
    const std::string key = g_.selector(owner) + "/" + label_text;
    if (auto id = g_.find(NodeLabel::Article, key)) {
      if (!mentioned && g_.node(*id).props.count("mentioned")) g_.set_props(*id, std::move(props));
      return *id;
    }
    return g_.add_node(NodeLabel::Article, std::move(props), key);
  }

  void edge(EdgeType type, NodeId src, NodeId dst) {
    if (!g_.find_edge(type, src, dst)) g_.add_edge(type, src, dst);
  }

  PropertyGraph& graph() { return g_; }

 private:
  static Props instrument_props(const std::string& number, const std::string& object,
                                const std::string& domain, bool mentioned) {
    Props p{{"number", number}, {"object", object}};
    if (!domain.empty()) p["domain"] = domain;
    if (mentioned) p["mentioned"] = true;
    return p;
  }

  PropertyGraph g_;
};

}  // namespace detail

// One Article node per record (rent splits excluded: they are table rows of
// an article already present), Possess edges from the owning instrument,
// BasedOn edges for every reference. references is keyed by record index.
inline BuildResult build_from_articles(const std::vector<ArticleRecord>& records,
                                       const std::map<std::size_t, std::vector<LegalReference>>& references) {
  detail::GraphBuilder b;
  BuildResult out;
  std::vector<std::optional<NodeId>> article_node(records.size());
  std::vector<std::optional<NodeId>> owner_node(records.size());
  std::vector<std::optional<std::size_t>> previous(records.size());

  auto owner_of = [&](const ArticleRecord& r) -> NodeId {
    const std::string object = r.name + " " + r.number.raw;
    switch (document_kind(r.name)) {
      case DocumentKind::Law:
        return b.instrument(NodeLabel::Law, r.number.raw, object, r.domain, false);
      case DocumentKind::Decree: {
        const NodeId decree = b.instrument(NodeLabel::Decree, r.number.raw, object, r.domain, false);
        if (r.law_num != r.number.raw) {
          const NodeId law = b.instrument(NodeLabel::Law, r.law_num, "law " + r.law_num, r.domain, true);
          b.edge(EdgeType::IsAssociated, law, decree);
        }
        return decree;
      }
      case DocumentKind::MinisterialOrder:
        return b.instrument(NodeLabel::MinisterialOrder, r.number.raw, object, r.domain, false);
      case DocumentKind::Declaration:
        return b.named(NodeLabel::Declaration, r.doc_stem(), Props{{"domain", r.domain}});
      case DocumentKind::Code:
      case DocumentKind::Other:
        break;
    }
    // Codes and other compilations belong to their enacting law.
    return b.instrument(NodeLabel::Law, r.law_num, "law " + r.law_num, r.domain, true);
  };

  std::map<std::string, std::size_t> last_in_doc;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ArticleRecord& r = records[i];
    if (r.rent) continue;
    const NodeId owner = owner_of(r);
    Props props;
    props["art_num"] = r.art_num ? format_article_label(*r.art_num) : std::string();
    props["nature"] = std::string(nature_name(r.nature));
    props["content_digest"] = content_digest(r.content);
    if (r.heading) props["heading"] = *r.heading;
    if (r.declaration) props["declaration"] = true;
    const std::string label_text = r.art_num ? format_article_label(*r.art_num) : "declaration";
    const NodeId art = b.article(owner, label_text, std::move(props), false);
    b.edge(EdgeType::Possess, owner, art);
    article_node[i] = art;
    owner_node[i] = owner;
    const std::string doc = r.domain + "/" + r.law_num + "/" + r.doc_stem();
    if (is_main_article(r)) {
      if (auto it = last_in_doc.find(doc); it != last_in_doc.end()) previous[i] = it->second;
      last_in_doc[doc] = i;
    }
  }

  for (const auto& [index, refs] : references) {
    if (index >= records.size() || !article_node[index]) continue;
    const ArticleRecord& r = records[index];
    const NodeId src = *article_node[index];
    const NodeId owner = *owner_node[index];
    auto unresolved = [&](const LegalReference& ref) {
      const std::string text = format_reference(ref);
      out.unresolved.push_back(article_key(r) + ": " + text);
      Props p{{"art_num", std::string()}, {"unresolved", true}, {"reference", text}};
      const NodeId ph = b.article(owner, "unresolved:" + text, std::move(p), false);
      b.edge(EdgeType::BasedOn, src, ph);
    };
    for (const auto& ref : refs) {
      switch (ref.target) {
        case ReferenceTarget::Absolute: {
          NodeId target_owner = owner;
          if (ref.instrument) {
            const bool law = ref.instrument->kind == InstrumentKind::Law;
            const std::string& num = ref.instrument->number.raw;
            target_owner = b.instrument(law ? NodeLabel::Law : NodeLabel::Decree, num,
                                        (law ? "law " : "decree ") + num, "", true);
          }
          for (const auto& label : ref.articles) {
            const std::string lt = format_article_label(label);
            Props p{{"art_num", lt}, {"mentioned", true}};
            b.edge(EdgeType::BasedOn, src, b.article(target_owner, lt, std::move(p), true));
          }
          break;
        }
        case ReferenceTarget::CurrentLaw: {
          const NodeLabel ol = b.graph().node(owner).label;
          const NodeId law = ol == NodeLabel::Law
                                 ? owner
                                 : b.instrument(NodeLabel::Law, r.law_num, "law " + r.law_num, r.domain, true);
          b.edge(EdgeType::BasedOn, src, law);
          break;
        }
        case ReferenceTarget::CurrentDecree:
          if (b.graph().node(owner).label == NodeLabel::Decree) {
            b.edge(EdgeType::BasedOn, src, owner);
          } else {
            unresolved(ref);
          }
          break;
        case ReferenceTarget::PreviousArticle:
          if (previous[index]) {
            b.edge(EdgeType::BasedOn, src, *article_node[*previous[index]]);
          } else {
            unresolved(ref);
          }
          break;
        case ReferenceTarget::NamedEntity: {
          const std::string lower = text::lower(ref.entity_name);
          const bool uniform = lower.find("acte uniforme") != std::string::npos ||
                               lower.find("uniform act") != std::string::npos;
          b.edge(EdgeType::BasedOn, src,
                 b.named(uniform ? NodeLabel::UniformAct : NodeLabel::LegalCode, ref.entity_name));
          break;
        }
      }
    }
  }
  out.graph = std::move(b.graph());
  return out;
}

}  // namespace lexstruct

#endif  // LEXSTRUCT_GRAPH_HPP_
