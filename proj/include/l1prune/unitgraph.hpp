#pragma once

// Pruning units: small DAGs of linear operators pruned in topological order.
//
// With error correction on, each operator is fitted against the input it will
// actually receive from its already-pruned predecessors while still matching
// the dense operator's output.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "l1prune/errors.hpp"
#include "l1prune/linalg.hpp"
#include "l1prune/sparsity.hpp"
#include "l1prune/tuner.hpp"

namespace l1prune {

/// Input reference naming the unit's own input rather than another node.
inline constexpr std::string_view kUnitInput = "@input";

enum class Activation { none, relu };
enum class WarmStartKind { magnitude, wanda };

std::string_view to_string(Activation a);
std::string_view to_string(WarmStartKind k);
Activation parse_activation(std::string_view text);
WarmStartKind parse_warm_start(std::string_view text);

struct OperatorNode {
  std::string id;
  MatrixD weight;
  // kUnitInput or the id of an earlier node.
  std::string input{kUnitInput};
  Activation activation = Activation::none;
};

struct PruneUnit {
  std::string name;
  Eigen::Index input_dim = 0;
  // Topologically ordered: every input refers to the unit input or an earlier node.
  std::vector<OperatorNode> nodes;
};

/// Wraps a failure inside one node with the unit and node it came from.
class NodeError : public Error {
 public:
  NodeError(std::string node_id, const std::string& what)
      : Error("node '" + node_id + "': " + what), node_id_(std::move(node_id)) {}
  const std::string& node_id() const noexcept { return node_id_; }

 private:
  std::string node_id_;
};

/// Throws GraphError on duplicate ids, forward/unknown references, a unit
/// with no node reading the unit input, or weight/producer shape mismatches.
void validate(const PruneUnit& unit);

/// Ids of nodes whose outputs feed no other node, in unit order.
std::vector<std::string> sink_ids(const PruneUnit& unit);

MatrixD apply_activation(MatrixD m, Activation a);

/// Output of every node (activation applied) for unit input `x`.
std::map<std::string, MatrixD> dense_forward(const PruneUnit& unit, const MatrixD& x);

/// Frobenius distance between two units' sink outputs on the same input,
/// accumulated over all sinks. The units must share wiring.
double unit_output_error(const PruneUnit& dense, const PruneUnit& pruned, const MatrixD& x);

/// magnitude: round_to_pattern(w). wanda: scores |W_ij| * ||X*_j,:||_2 and the
/// lowest scores are removed within the same comparison groups the rounding
/// step uses.
MatrixD warm_start(WarmStartKind kind, const MatrixD& w, const MatrixD& xstar,
                   const SparsityPattern& pattern);

struct NodePruneResult {
  std::string id;
  OperatorPruneResult<double> result;
  // The X* the solver was given for this node.
  MatrixD solver_input;
  double wall_time_s = 0;
};

struct UnitPruneResult {
  std::string unit;
  std::vector<NodePruneResult> nodes;
  double unit_output_error = 0;
  double wall_time_s = 0;
};

/// Copy of `unit` with each node's weight replaced by its pruned counterpart.
PruneUnit with_pruned_weights(const PruneUnit& unit, const UnitPruneResult& result);

/// Sequentially prunes every node, feeding each the propagated output of its
/// pruned predecessors while targeting the dense output.
UnitPruneResult prune_unit(const PruneUnit& unit, const MatrixD& x, const SparsityPattern& pattern,
                           WarmStartKind warm, const TunerConfig& cfg);

/// Ablation variant: every node is fitted against its dense input.
UnitPruneResult prune_unit_uncorrected(const PruneUnit& unit, const MatrixD& x,
                                       const SparsityPattern& pattern, WarmStartKind warm,
                                       const TunerConfig& cfg);

}  // namespace l1prune
