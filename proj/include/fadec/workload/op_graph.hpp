#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fadec/core/tensor.hpp"
#include "fadec/ops/conv.hpp"

namespace fadec {

/// The sixteen operator rows of the census; convolutions are split by
/// (kernel, stride).
enum class OpKind {
  kConv11,
  kConv31,
  kConv32,
  kConv51,
  kConv52,
  kRelu,
  kSigmoid,
  kElu,
  kAdd,
  kMul,
  kConcat,
  kSlice,
  kLayerNorm,
  kUpsampleNearest,
  kUpsampleBilinear,
  kGridSample,
};
inline constexpr std::size_t kOpKindCount = 16;
inline constexpr std::array<OpKind, kOpKindCount> kAllOpKinds = {
    OpKind::kConv11,  OpKind::kConv31,    OpKind::kConv32,          OpKind::kConv51,
    OpKind::kConv52,  OpKind::kRelu,      OpKind::kSigmoid,         OpKind::kElu,
    OpKind::kAdd,     OpKind::kMul,       OpKind::kConcat,          OpKind::kSlice,
    OpKind::kLayerNorm, OpKind::kUpsampleNearest, OpKind::kUpsampleBilinear, OpKind::kGridSample};

/// Machine name ("conv(3,1)", "relu", "grid_sample", ...).
std::string_view to_string(OpKind kind);
/// Row label as printed in the census table ("Conv (3, 1)", "Activation (ReLU)", ...).
std::string_view row_label(OpKind kind);
/// Throws AnalysisError for an unknown name.
OpKind parse_op_kind(std::string_view name);
bool is_conv(OpKind kind);
/// Conv row for a supported (kernel, stride); ConfigError otherwise.
OpKind conv_kind(int kernel, int stride);

enum class Process { kFE, kFS, kCVF, kCVE, kCL, kCVD, kOther };
inline constexpr std::size_t kProcessCount = 7;
/// The six processes that appear in the census and in multiplication shares.
inline constexpr std::array<Process, 6> kMainProcesses = {Process::kFE,  Process::kFS,
                                                          Process::kCVF, Process::kCVE,
                                                          Process::kCL,  Process::kCVD};
std::string_view to_string(Process p);
/// Throws AnalysisError for an unknown name.
Process parse_process(std::string_view name);

struct OpDescriptor {
  int id = 0;
  OpKind kind = OpKind::kAdd;
  /// Empty for an unlabeled node, which the analyzer rejects.
  std::optional<Process> process;
  std::vector<Shape> inputs;
  Shape output;
  /// Present exactly when kind is a conv row.
  std::optional<ConvSpec> spec;
  /// Free-form label, e.g. the parameter name of a conv.
  std::string name;
};

/// Operator-instance graph. Node ids are dense indices in insertion order.
class OpGraph {
 public:
  /// Assigns the id and returns it. Throws AnalysisError if kind and spec
  /// disagree.
  int add_node(OpDescriptor node);
  /// Throws AnalysisError for an unknown endpoint.
  void add_edge(int from, int to);

  const std::vector<OpDescriptor>& nodes() const noexcept { return nodes_; }
  const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  /// {"nodes":[{id,kind,process,shapes:{inputs,output},spec}],"edges":[{from,to}]}
  std::string to_json(int indent = 2) const;
  /// Throws ParseError for malformed JSON and AnalysisError for bad kinds
  /// or kind/spec disagreement. A missing or null process leaves the node
  /// unlabeled.
  static OpGraph from_json(std::string_view text);

 private:
  std::vector<OpDescriptor> nodes_;
  std::vector<std::pair<int, int>> edges_;
};

}  // namespace fadec
