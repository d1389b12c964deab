#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "space/cell.hpp"

BNAS_NS_BEGIN

struct GenotypeEdge {
  int from = 0;  // 0 = c(k-2), 1 = c(k-1), 2.. = earlier intermediate nodes
  LayerType op = LayerType::BinConv3x3;
  bool operator==(const GenotypeEdge&) const = default;
};

struct GenotypeNode {
  int node = 2;  // numbered after the two cell inputs
  std::vector<GenotypeEdge> edges;
  bool operator==(const GenotypeNode&) const = default;
};

/// Discrete architecture: two chosen input edges per intermediate node.
/// Version 1 admits the seven base ops; version 2 adds the separable convs.
struct Genotype {
  int version = 1;
  double gamma = 1.0;
  std::vector<GenotypeNode> normal;
  std::vector<GenotypeNode> reduce;
  std::uint64_t seed = 0;
  std::string config_hash;

  bool operator==(const Genotype&) const = default;
  const std::vector<GenotypeNode>& cell(bool reduction) const { return reduction ? reduce : normal; }
};

inline constexpr int kGenotypeVersion = 1;
inline constexpr int kGenotypeVersionSepConv = 2;

/// Generalised selection: zeroise wins only if p_z / gamma strictly exceeds
/// every other op's probability; otherwise the argmax of the rest, ties to the
/// lowest op index. `strength` receives the compared quantity of the winner.
LayerType select_op(std::span<const double> probs, std::span<const LayerType> ops, double gamma,
                    double* strength = nullptr);

/// Applies select_op per edge and keeps the two strongest incoming edges of
/// every node (ties to the lowest source). Zeroise edges are kept as ops.
/// The node count follows from the edge count of the tables.
Genotype derive(const ArchParams& arch, double gamma, std::uint64_t seed = 0, const std::string& config_hash = "");

/// Throws ParseError describing the first structural problem.
void validate(const Genotype& g);

/// Canonical JSON text.
std::string serialize(const Genotype& g);
/// Strict parse: unknown fields, bad op names and broken wiring are errors
/// that name the offending field path.
Genotype deserialize(const std::string& text);

Genotype load_genotype(const std::string& path);
void save_genotype(const std::string& path, const Genotype& g);

/// Fraction of edges across both cells whose op is t.
double op_proportion(const Genotype& g, LayerType t);

bool uses_op(const Genotype& g, LayerType t);

BNAS_NS_END
