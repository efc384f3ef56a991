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

// Graph exporters: Cypher import scripts (French label and relationship
// names), a neutral JSON document and a GraphML-style XML document. Both
// neutral formats import back losslessly; all outputs are ordered by natural
// key so equal graphs serialize to identical bytes.

#ifndef LEXSTRUCT_GRAPH_IO_HPP_
#define LEXSTRUCT_GRAPH_IO_HPP_

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "lexstruct/error.hpp"
#include "lexstruct/graph.hpp"

namespace lexstruct {

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

inline std::vector<NodeId> node_order(const PropertyGraph& g) {
  std::vector<NodeId> order(g.node_count());
  for (NodeId i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    const auto& x = g.node(a);
    const auto& y = g.node(b);
    return std::tie(x.label, x.key) < std::tie(y.label, y.key);
  });
  return order;
}

inline std::vector<EdgeId> edge_order(const PropertyGraph& g) {
  std::vector<EdgeId> order(g.edge_count());
  for (EdgeId i = 0; i < order.size(); ++i) order[i] = i;
  auto key = [&](EdgeId e) {
    const auto& edge = g.edge(e);
    const auto& s = g.node(edge.src);
    const auto& d = g.node(edge.dst);
    return std::make_tuple(edge.type, s.label, std::cref(s.key), d.label, std::cref(d.key));
  };
  std::stable_sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) {
    if (key(a) != key(b)) return key(a) < key(b);
    // Parallel edges: order by props so output stays canonical.
    return nlohmann::json(g.edge(a).props.size()) < nlohmann::json(g.edge(b).props.size());
  });
  return order;
}

inline std::string cypher_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

inline std::string cypher_value(const PropValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return cypher_string(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(x);
        } else {
          return std::to_string(x);
        }
      },
      v);
}

inline std::string cypher_map(const Props& props, const std::string* key) {
  if (props.empty() && !key) return "";
  std::string out = " {";
  bool first = true;
  if (key) {
    out += "_key: " + cypher_string(*key);
    first = false;
  }
  for (const auto& [name, value] : props) {
    if (!first) out += ", ";
    first = false;
    out += "`" + name + "`: " + cypher_value(value);
  }
  out += "}";
  return out;
}

inline nlohmann::ordered_json props_to_json(const Props& props) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, value] : props) {
    std::visit([&](const auto& x) { j[name] = x; }, value);
  }
  return j;
}

inline Props props_from_json(const nlohmann::json& j) {
  Props p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& v = it.value();
    if (v.is_string()) {
      p[it.key()] = v.get<std::string>();
    } else if (v.is_boolean()) {
      p[it.key()] = v.get<bool>();
    } else if (v.is_number_integer()) {
      p[it.key()] = v.get<std::int64_t>();
    } else if (v.is_number_float()) {
      p[it.key()] = v.get<double>();
    } else {
      throw Error(ErrorCode::MalformedRecord, "property '" + it.key() + "' is not a scalar");
    }
  }
  return p;
}

inline void check_sink(const std::ostream& out) {
  if (!out) throw Error(ErrorCode::SinkError, "write failed");
}

}  // namespace detail

// One statement per line: node CREATEs ordered by (label, key), then edge
// MATCH ... CREATE statements ordered by (type, src, dst). Returns the
// number of statements.
inline std::size_t export_cypher(const PropertyGraph& g, std::ostream& out) {
  std::size_t count = 0;
  for (NodeId id : detail::node_order(g)) {
    const GraphNode& n = g.node(id);
    out << "CREATE (:" << names_of(n.label).french << detail::cypher_map(n.props, &n.key) << ");\n";
    ++count;
  }
  for (EdgeId id : detail::edge_order(g)) {
    const GraphEdge& e = g.edge(id);
    const GraphNode& s = g.node(e.src);
    const GraphNode& d = g.node(e.dst);
    out << "MATCH (a:" << names_of(s.label).french << " {_key: " << detail::cypher_string(s.key)
        << "}), (b:" << names_of(d.label).french << " {_key: " << detail::cypher_string(d.key)
        << "}) CREATE (a)-[:" << names_of(e.type).french << detail::cypher_map(e.props, nullptr)
        << "]->(b);\n";
    ++count;
  }
  detail::check_sink(out);
  return count;
}

enum class GraphFormat { GraphJson, GraphMl };

inline GraphFormat parse_graph_format(std::string_view tag) {
  if (tag == "graph-json" || tag == "json") return GraphFormat::GraphJson;
  if (tag == "graphml" || tag == "xml") return GraphFormat::GraphMl;
  throw Error(ErrorCode::ConfigError, "unknown graph format '" + std::string(tag) + "'");
}

inline nlohmann::ordered_json graph_to_json(const PropertyGraph& g) {
  using oj = nlohmann::ordered_json;
  oj doc;
  doc["format"] = "lexstruct-graph";
  doc["version"] = 1;
  oj nodes = oj::array();
  for (NodeId id : detail::node_order(g)) {
    const GraphNode& n = g.node(id);
    oj j;
    j["label"] = std::string(label_name(n.label));
    j["key"] = n.key;
    j["props"] = detail::props_to_json(n.props);
    nodes.push_back(std::move(j));
  }
  oj edges = oj::array();
  for (EdgeId id : detail::edge_order(g)) {
    const GraphEdge& e = g.edge(id);
    oj j;
    j["type"] = std::string(edge_type_name(e.type));
    j["src"] = g.selector(e.src);
    j["dst"] = g.selector(e.dst);
    j["props"] = detail::props_to_json(e.props);
    edges.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc;
}

inline PropertyGraph graph_from_json(const nlohmann::json& doc) {
  PropertyGraph g;
  try {
    if (doc.value("format", "") != "lexstruct-graph") {
      throw Error(ErrorCode::MalformedRecord, "not a lexstruct graph document");
    }
    for (const auto& n : doc.at("nodes")) {
      auto label = label_from_name(n.at("label").get<std::string>());
      if (!label) throw Error(ErrorCode::MalformedRecord, "unknown label " + n.at("label").dump());
      g.add_node(*label, detail::props_from_json(n.at("props")), n.at("key").get<std::string>());
    }
    for (const auto& e : doc.at("edges")) {
      auto type = edge_type_from_name(e.at("type").get<std::string>());
      if (!type) throw Error(ErrorCode::MalformedRecord, "unknown edge type " + e.at("type").dump());
      g.add_edge(*type, g.resolve(e.at("src").get<std::string>()), g.resolve(e.at("dst").get<std::string>()),
                 detail::props_from_json(e.at("props")));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("graph document: ") + e.what());
  }
  return g;
}

// ---------------------------------------------------------------------------
// GraphML-style XML

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline void xml_props(std::ostream& out, const Props& props, std::string_view indent) {
  for (const auto& [name, value] : props) {
    std::string type;
    std::string text;
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, std::string>) {
            type = "string";
            text = x;
          } else if constexpr (std::is_same_v<T, bool>) {
            type = "boolean";
            text = x ? "true" : "false";
          } else if constexpr (std::is_same_v<T, double>) {
            type = "double";
            text = format_double(x);
          } else {
            type = "long";
            text = std::to_string(x);
          }
        },
        value);
    out << indent << "<data key=\"" << xml_escape(name) << "\" type=\"" << type << "\">"
        << xml_escape(text) << "</data>\n";
  }
}

// Minimal DOM for the subset written by export_graphml: elements,
// double-quoted attributes, character data and the five named entities plus
// numeric references.
struct XmlElement {
  std::string name;
  std::map<std::string, std::string> attrs;
  std::string text;
  std::vector<XmlElement> children;
};

class XmlParser {
 public:
  explicit XmlParser(std::string_view s) : s_(s) {}

  XmlElement parse_document() {
    skip_misc();
    XmlElement root = element();
    skip_misc();
    if (pos_ != s_.size()) fail("trailing content");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::MalformedRecord, "graphml: " + why + " at byte " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && text::is_space(s_[pos_])) ++pos_;
  }

  void skip_misc() {
    while (true) {
      skip_ws();
      if (s_.substr(pos_, 2) == "<?") {
        const auto end = s_.find("?>", pos_);
        if (end == std::string_view::npos) fail("unterminated declaration");
        pos_ = end + 2;
      } else if (s_.substr(pos_, 4) == "<!--") {
        const auto end = s_.find("-->", pos_);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
      } else {
        return;
      }
    }
  }

  std::string name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (text::is_alpha(s_[pos_]) || text::is_digit(s_[pos_]) ||
                                s_[pos_] == '_' || s_[pos_] == ':' || s_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string decode(std::string_view raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      const auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity");
      const std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out.push_back('&');
      else if (ent == "lt") out.push_back('<');
      else if (ent == "gt") out.push_back('>');
      else if (ent == "quot") out.push_back('"');
      else if (ent == "apos") out.push_back('\'');
      else if (!ent.empty() && ent[0] == '#') {
        const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
        const std::string digits(ent.substr(hex ? 2 : 1));
        char* end = nullptr;
        const unsigned long cp = std::strtoul(digits.c_str(), &end, hex ? 16 : 10);
        if (digits.empty() || *end != '\0') fail("bad character reference");
        append_utf8(out, cp);
      } else {
        fail("unknown entity");
      }
      i = semi;
    }
    return out;
  }

  static void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  XmlElement element() {
    if (pos_ >= s_.size() || s_[pos_] != '<') fail("expected '<'");
    ++pos_;
    XmlElement el;
    el.name = name();
    while (true) {
      skip_ws();
      if (pos_ >= s_.size()) fail("unterminated tag");
      if (s_.substr(pos_, 2) == "/>") {
        pos_ += 2;
        return el;
      }
      if (s_[pos_] == '>') {
        ++pos_;
        break;
      }
      std::string attr = name();
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != '=') fail("expected '='");
      ++pos_;
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != '"') fail("expected '\"'");
      const auto end = s_.find('"', pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated attribute");
      el.attrs[attr] = decode(s_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
    }
    std::string raw_text;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated element <" + el.name + ">");
      if (s_.substr(pos_, 2) == "</") {
        pos_ += 2;
        if (name() != el.name) fail("mismatched end tag for <" + el.name + ">");
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != '>') fail("expected '>'");
        ++pos_;
        break;
      }
      if (s_.substr(pos_, 4) == "<!--") {
        skip_misc();
        continue;
      }
      if (s_[pos_] == '<') {
        el.children.push_back(element());
        continue;
      }
      const auto next = s_.find('<', pos_);
      raw_text += s_.substr(pos_, next - pos_);
      pos_ = next == std::string_view::npos ? s_.size() : next;
    }
    el.text = decode(raw_text);
    return el;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

inline Props xml_props_from(const XmlElement& el) {
  Props p;
  for (const auto& d : el.children) {
    if (d.name != "data") continue;
    const std::string& key = d.attrs.count("key") ? d.attrs.at("key") : throw Error(ErrorCode::MalformedRecord, "data without key");
    const std::string type = d.attrs.count("type") ? d.attrs.at("type") : "string";
    if (type == "string") {
      p[key] = d.text;
    } else if (type == "boolean") {
      p[key] = d.text == "true";
    } else if (type == "long") {
      p[key] = static_cast<std::int64_t>(std::stoll(d.text));
    } else if (type == "double") {
      p[key] = std::strtod(d.text.c_str(), nullptr);
    } else {
      throw Error(ErrorCode::MalformedRecord, "unknown data type '" + type + "'");
    }
  }
  return p;
}

}  // namespace detail

inline void export_graphml(const PropertyGraph& g, std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <graph id=\"lexstruct\" edgedefault=\"directed\">\n";
  for (NodeId id : detail::node_order(g)) {
    const GraphNode& n = g.node(id);
    out << "    <node id=\"" << detail::xml_escape(g.selector(id)) << "\" label=\"" << label_name(n.label)
        << "\" key=\"" << detail::xml_escape(n.key) << "\">\n";
    detail::xml_props(out, n.props, "      ");
    out << "    </node>\n";
  }
  for (EdgeId id : detail::edge_order(g)) {
    const GraphEdge& e = g.edge(id);
    out << "    <edge source=\"" << detail::xml_escape(g.selector(e.src)) << "\" target=\""
        << detail::xml_escape(g.selector(e.dst)) << "\" type=\"" << edge_type_name(e.type) << "\">\n";
    detail::xml_props(out, e.props, "      ");
    out << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
  detail::check_sink(out);
}

inline PropertyGraph import_graphml(std::string_view doc) {
  const detail::XmlElement root = detail::XmlParser(doc).parse_document();
  if (root.name != "graphml") throw Error(ErrorCode::MalformedRecord, "graphml: root is <" + root.name + ">");
  PropertyGraph g;
  for (const auto& graph : root.children) {
    if (graph.name != "graph") continue;
    for (const auto& n : graph.children) {
      if (n.name != "node") continue;
      auto label = label_from_name(n.attrs.count("label") ? n.attrs.at("label") : "");
      if (!label || !n.attrs.count("key")) throw Error(ErrorCode::MalformedRecord, "graphml: bad node");
      g.add_node(*label, detail::xml_props_from(n), n.attrs.at("key"));
    }
    for (const auto& e : graph.children) {
      if (e.name != "edge") continue;
      auto type = edge_type_from_name(e.attrs.count("type") ? e.attrs.at("type") : "");
      if (!type || !e.attrs.count("source") || !e.attrs.count("target")) {
        throw Error(ErrorCode::MalformedRecord, "graphml: bad edge");
      }
      g.add_edge(*type, g.resolve(e.attrs.at("source")), g.resolve(e.attrs.at("target")),
                 detail::xml_props_from(e));
    }
  }
  return g;
}

inline std::string export_neutral(const PropertyGraph& g, GraphFormat format) {
  std::ostringstream out;
  if (format == GraphFormat::GraphJson) {
    out << graph_to_json(g).dump(2) << '\n';
  } else {
    export_graphml(g, out);
  }
  return out.str();
}

inline PropertyGraph import_neutral(std::string_view doc, GraphFormat format) {
  if (format == GraphFormat::GraphMl) return import_graphml(doc);
  try {
    return graph_from_json(nlohmann::json::parse(doc));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("graph document: ") + e.what());
  }
}

// Equality up to node/edge ids: same labelled nodes by natural key, same
// props, same multiset of edges between the same keys.
inline bool isomorphic(const PropertyGraph& a, const PropertyGraph& b) {
  return graph_to_json(a) == graph_to_json(b);
}

}  // namespace lexstruct

#endif  // LEXSTRUCT_GRAPH_IO_HPP_
