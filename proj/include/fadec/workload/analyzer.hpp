#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fadec/workload/op_graph.hpp"

namespace fadec {

/// Instance counts indexed [process][kind].
using InstanceMatrix = std::array<std::array<std::uint64_t, kOpKindCount>, kProcessCount>;

/// Throws AnalysisError for an unlabeled node.
InstanceMatrix count_operator_instances(const OpGraph& g);

/// Multiplications one operator instance performs:
///   conv: out_elems * in_ch * k^2; mul: elems; grid sampling and bilinear
///   upsampling: 8 per output element; layer norm: 2 per element; others 0.
/// Throws AnalysisError when a needed shape is missing.
std::uint64_t multiplications(const OpDescriptor& node);

struct WorkloadReport {
  InstanceMatrix instances{};
  std::array<std::uint64_t, kProcessCount> mults{};
  std::array<std::uint64_t, kProcessCount> conv_mults{};
  /// Share of the six main processes' multiplications; "other" is 0.
  std::array<double, kProcessCount> mult_share{};
  /// Fraction of each process's multiplications due to conv (0 if none).
  std::array<double, kProcessCount> conv_share_within{};
  /// Combined CVE + CVD figures.
  double cve_cvd_share = 0;
  double cve_cvd_conv_share = 0;
};

/// Throws AnalysisError for unlabeled nodes or unresolved shapes.
WorkloadReport analyze_workload(const OpGraph& g);

enum class MemoryPattern { kSlidingWindow, kElementwise, kSequential, kTwoPass, kIrregular, kFolded };
std::string_view to_string(MemoryPattern p);
MemoryPattern classify_memory_pattern(OpKind kind);
/// Throws AnalysisError for an unknown kind name.
MemoryPattern classify_memory_pattern(std::string_view kind);

enum class Placement { kHW, kSW };
enum class Reason { kComputeBound, kBandwidthBound, kIrregularAccess, kPrecisionCritical, kLowCount };
std::string_view to_string(Placement p);
std::string_view to_string(Reason r);

struct PlacementDecision {
  int node = 0;
  OpKind kind = OpKind::kAdd;
  Process process = Process::kOther;
  Placement placement = Placement::kHW;
  Reason reason = Reason::kComputeBound;
};

struct PartitionPlan {
  std::vector<PlacementDecision> decisions;  ///< one per node, in node order
  /// Tensors crossing the HW/SW boundary inside CVF per frame, against the
  /// count if every grid-sampled tensor were handed back to hardware.
  std::uint64_t cvf_crossings = 0;
  std::uint64_t cvf_crossings_unsplit = 0;
};

/// Rule-based placement, in priority order:
///   layer norm, bilinear upsampling -> SW precision-critical
///   grid sampling -> SW irregular-access
///   CVF add / mul -> SW bandwidth-bound (kept beside grid sampling so only
///     the current feature enters and the cost volume leaves)
///   any op of the "other" process -> SW low-count
///   conv, ReLU, sigmoid, ELU -> HW compute-bound
///   add, mul, concat, slice, nearest upsampling -> HW bandwidth-bound
/// Throws AnalysisError for an unlabeled node.
PartitionPlan partition_hw_sw(const OpGraph& g);

/// Placement summary per (process, kind): {"process","kind","count",
/// "placement","reason"} rows in census order, plus the CVF crossing counts.
std::string partition_to_json(const PartitionPlan& plan);
std::string report_to_json(const WorkloadReport& r);

/// Aligned table with one row per operator kind and one column per main
/// process, laid out like the published census.
std::string census_table(const InstanceMatrix& m);

/// The published census, [process][kind] over the six main processes.
const InstanceMatrix& reference_census();

/// Cells where `m` differs from the published census, as readable lines.
std::vector<std::string> census_mismatches(const InstanceMatrix& m);

}  // namespace fadec
