#include "genotype/genotype.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "common/error.hpp"

BNAS_NS_BEGIN

using ordered_json = nlohmann::ordered_json;

LayerType select_op(std::span<const double> probs, std::span<const LayerType> ops, double gamma, double* strength) {
  BNAS_EXPECT(gamma > 0, InvalidArgument, "select_op: gamma must be > 0, got " + std::to_string(gamma));
  BNAS_EXPECT(!ops.empty() && probs.size() == ops.size(), ContractViolation,
              "select_op: " + std::to_string(probs.size()) + " probabilities for " + std::to_string(ops.size()) + " ops");
  int best = -1;
  int zeroise = -1;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i] == LayerType::Zeroise) {
      zeroise = static_cast<int>(i);
      continue;
    }
    if (best < 0 || probs[i] > probs[best]) best = static_cast<int>(i);
  }
  if (zeroise >= 0) {
    const double pz = probs[zeroise] / gamma;
    if (best < 0 || pz > probs[best]) {
      if (strength) *strength = pz;
      return LayerType::Zeroise;
    }
  }
  if (strength) *strength = probs[best];
  return ops[best];
}

Genotype derive(const ArchParams& arch, double gamma, std::uint64_t seed, const std::string& config_hash) {
  BNAS_EXPECT(gamma > 0, InvalidArgument, "derive: gamma must be > 0, got " + std::to_string(gamma));
  int nodes = 0;
  while (CellTemplate::edge_count(nodes) < arch.edges) ++nodes;
  BNAS_EXPECT(CellTemplate::edge_count(nodes) == arch.edges, ContractViolation,
              "derive: " + std::to_string(arch.edges) + " edges do not form a cell");

  Genotype g;
  g.version = std::any_of(arch.ops.begin(), arch.ops.end(), is_separable) ? kGenotypeVersionSepConv : kGenotypeVersion;
  g.gamma = gamma;
  g.seed = seed;
  g.config_hash = config_hash;
  for (bool red : {false, true}) {
    auto& cell = red ? g.reduce : g.normal;
    for (int i = 0; i < nodes; ++i) {
      struct Candidate {
        int from;
        LayerType op;
        double strength;
      };
      std::vector<Candidate> cands;
      for (int j = 0; j < i + 2; ++j) {
        const auto p = arch.probs(red, CellTemplate::edge_index(i, j));
        double strength = 0;
        const LayerType op = select_op(p, arch.ops, gamma, &strength);
        cands.push_back({j, op, strength});
      }
      BNAS_EXPECT(cands.size() >= 2, ContractViolation, "derive: node with fewer than 2 candidate edges");
      // Stable sort keeps lower sources first among equal strengths.
      std::stable_sort(cands.begin(), cands.end(),
                       [](const Candidate& a, const Candidate& b) { return a.strength > b.strength; });
      GenotypeNode node{i + 2, {}};
      for (int k = 0; k < 2; ++k) node.edges.push_back({cands[k].from, cands[k].op});
      std::sort(node.edges.begin(), node.edges.end(),
                [](const GenotypeEdge& a, const GenotypeEdge& b) { return a.from < b.from; });
      cell.push_back(node);
    }
  }
  return g;
}

namespace {

void validate_cell(const std::vector<GenotypeNode>& cell, const std::string& field, int version) {
  if (cell.empty()) throw ParseError(field + ": needs at least one node");
  for (std::size_t i = 0; i < cell.size(); ++i) {
    const GenotypeNode& n = cell[i];
    const std::string at = field + "[" + std::to_string(i) + "]";
    if (n.node != static_cast<int>(i) + 2)
      throw ParseError(at + ".node: expected " + std::to_string(i + 2) + ", got " + std::to_string(n.node));
    if (n.edges.size() != 2)
      throw ParseError(at + ".edges: expected exactly 2 edges, got " + std::to_string(n.edges.size()));
    for (std::size_t e = 0; e < n.edges.size(); ++e) {
      const GenotypeEdge& edge = n.edges[e];
      const std::string eat = at + ".edges[" + std::to_string(e) + "]";
      if (edge.from < 0 || edge.from >= n.node)
        throw ParseError(eat + ".from: source " + std::to_string(edge.from) + " is not an earlier node of node " +
                         std::to_string(n.node));
      if (is_separable(edge.op) && version < kGenotypeVersionSepConv)
        throw ParseError(eat + ".op: '" + std::string(layer_name(edge.op)) + "' requires version " +
                         std::to_string(kGenotypeVersionSepConv) + ", genotype is version " + std::to_string(version));
    }
  }
}

const ordered_json& member(const ordered_json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + (path.empty() ? "" : ".") + key + ": missing field");
  return *it;
}

void only_fields(const ordered_json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!obj.is_object()) throw ParseError((path.empty() ? "genotype" : path) + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }) == allowed.end())
      throw ParseError((path.empty() ? "" : path + ".") + it.key() + ": unknown field");
}

int as_int(const ordered_json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ParseError(path + ": expected an integer");
  return v.get<int>();
}

std::vector<GenotypeNode> parse_cell(const ordered_json& arr, const std::string& path) {
  if (!arr.is_array()) throw ParseError(path + ": expected an array");
  std::vector<GenotypeNode> cell;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    only_fields(arr[i], {"node", "edges"}, at);
    GenotypeNode n;
    n.node = as_int(member(arr[i], "node", at), at + ".node");
    const auto& edges = member(arr[i], "edges", at);
    if (!edges.is_array()) throw ParseError(at + ".edges: expected an array");
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const std::string eat = at + ".edges[" + std::to_string(e) + "]";
      only_fields(edges[e], {"from", "op"}, eat);
      GenotypeEdge edge;
      edge.from = as_int(member(edges[e], "from", eat), eat + ".from");
      const auto& op = member(edges[e], "op", eat);
      if (!op.is_string()) throw ParseError(eat + ".op: expected a string");
      try {
        edge.op = parse_layer(op.get<std::string>());
      } catch (const ParseError& err) {
        throw ParseError(eat + ".op: " + err.what());
      }
      n.edges.push_back(edge);
    }
    cell.push_back(std::move(n));
  }
  return cell;
}

ordered_json cell_json(const std::vector<GenotypeNode>& cell) {
  ordered_json arr = ordered_json::array();
  for (const auto& n : cell) {
    ordered_json edges = ordered_json::array();
    for (const auto& e : n.edges) edges.push_back({{"from", e.from}, {"op", layer_name(e.op)}});
    arr.push_back({{"node", n.node}, {"edges", edges}});
  }
  return arr;
}

}  // namespace

void validate(const Genotype& g) {
  if (g.version != kGenotypeVersion && g.version != kGenotypeVersionSepConv)
    throw ParseError("version: unsupported genotype version " + std::to_string(g.version));
  if (!(g.gamma > 0) || !std::isfinite(g.gamma)) throw ParseError("gamma: must be a positive finite number");
  validate_cell(g.normal, "normal", g.version);
  validate_cell(g.reduce, "reduce", g.version);
}

std::string serialize(const Genotype& g) {
  validate(g);
  ordered_json j;
  j["version"] = g.version;
  j["gamma"] = g.gamma;
  j["normal"] = cell_json(g.normal);
  j["reduce"] = cell_json(g.reduce);
  j["provenance"] = {{"seed", g.seed}, {"config_hash", g.config_hash}};
  return j.dump(2) + "\n";
}

Genotype deserialize(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("genotype: malformed JSON: ") + e.what());
  }
  only_fields(j, {"version", "gamma", "normal", "reduce", "provenance"}, "");
  Genotype g;
  g.version = as_int(member(j, "version", ""), "version");
  const auto& gamma = member(j, "gamma", "");
  if (!gamma.is_number()) throw ParseError("gamma: expected a number");
  g.gamma = gamma.get<double>();
  g.normal = parse_cell(member(j, "normal", ""), "normal");
  g.reduce = parse_cell(member(j, "reduce", ""), "reduce");
  const auto& prov = member(j, "provenance", "");
  only_fields(prov, {"seed", "config_hash"}, "provenance");
  const auto& seed = member(prov, "seed", "provenance");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
    throw ParseError("provenance.seed: expected a non-negative integer");
  g.seed = seed.get<std::uint64_t>();
  const auto& hash = member(prov, "config_hash", "provenance");
  if (!hash.is_string()) throw ParseError("provenance.config_hash: expected a string");
  g.config_hash = hash.get<std::string>();
  validate(g);
  return g;
}

Genotype load_genotype(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return deserialize(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_genotype(const std::string& path, const Genotype& g) {
  const std::string text = serialize(g);
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
}

double op_proportion(const Genotype& g, LayerType t) {
  std::size_t total = 0, hits = 0;
  for (bool red : {false, true})
    for (const auto& n : g.cell(red))
      for (const auto& e : n.edges) {
        ++total;
        hits += e.op == t;
      }
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

bool uses_op(const Genotype& g, LayerType t) { return op_proportion(g, t) > 0; }

BNAS_NS_END
