#include "fadec/workload/analyzer.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "fadec/core/error.hpp"

namespace fadec {

using nlohmann::json;

namespace {

Process label_of(const OpDescriptor& n) {
  if (!n.process) throw AnalysisError("node " + std::to_string(n.id) + " has no process label");
  return *n.process;
}

std::size_t pi(Process p) { return static_cast<std::size_t>(p); }
std::size_t ki(OpKind k) { return static_cast<std::size_t>(k); }

std::uint64_t elems(const Shape& s, const OpDescriptor& n, const char* what) {
  if (s.empty()) {
    throw AnalysisError("node " + std::to_string(n.id) + " (" + std::string(to_string(n.kind)) +
                        ") has no " + what + " shape");
  }
  return element_count(s);
}

}  // namespace

InstanceMatrix count_operator_instances(const OpGraph& g) {
  InstanceMatrix m{};
  for (const auto& n : g.nodes()) ++m[pi(label_of(n))][ki(n.kind)];
  return m;
}

std::uint64_t multiplications(const OpDescriptor& n) {
  switch (n.kind) {
    case OpKind::kConv11:
    case OpKind::kConv31:
    case OpKind::kConv32:
    case OpKind::kConv51:
    case OpKind::kConv52: {
      const auto k = static_cast<std::uint64_t>(n.spec->kernel);
      return elems(n.output, n, "output") * n.spec->in_ch * k * k;
    }
    case OpKind::kMul:
      return elems(n.output, n, "output");
    case OpKind::kGridSample:
    case OpKind::kUpsampleBilinear:
      return 8 * elems(n.output, n, "output");
    case OpKind::kLayerNorm:
      return 2 * elems(n.output, n, "output");
    default:
      return 0;
  }
}

WorkloadReport analyze_workload(const OpGraph& g) {
  WorkloadReport r;
  r.instances = count_operator_instances(g);
  for (const auto& n : g.nodes()) {
    const std::uint64_t m = multiplications(n);
    r.mults[pi(*n.process)] += m;
    if (is_conv(n.kind)) r.conv_mults[pi(*n.process)] += m;
  }
  std::uint64_t total = 0;
  for (Process p : kMainProcesses) total += r.mults[pi(p)];
  for (std::size_t p = 0; p < kProcessCount; ++p) {
    const bool main = static_cast<Process>(p) != Process::kOther;
    r.mult_share[p] = main && total > 0 ? static_cast<double>(r.mults[p]) / static_cast<double>(total) : 0.0;
    r.conv_share_within[p] =
        r.mults[p] > 0 ? static_cast<double>(r.conv_mults[p]) / static_cast<double>(r.mults[p]) : 0.0;
  }
  const std::uint64_t cc = r.mults[pi(Process::kCVE)] + r.mults[pi(Process::kCVD)];
  const std::uint64_t cc_conv = r.conv_mults[pi(Process::kCVE)] + r.conv_mults[pi(Process::kCVD)];
  r.cve_cvd_share = total > 0 ? static_cast<double>(cc) / static_cast<double>(total) : 0.0;
  r.cve_cvd_conv_share = cc > 0 ? static_cast<double>(cc_conv) / static_cast<double>(cc) : 0.0;
  return r;
}

std::string_view to_string(MemoryPattern p) {
  switch (p) {
    case MemoryPattern::kSlidingWindow: return "sliding-window";
    case MemoryPattern::kElementwise: return "elementwise";
    case MemoryPattern::kSequential: return "sequential";
    case MemoryPattern::kTwoPass: return "two-pass";
    case MemoryPattern::kIrregular: return "irregular";
    case MemoryPattern::kFolded: return "folded";
  }
  return "?";
}

MemoryPattern classify_memory_pattern(OpKind kind) {
  if (is_conv(kind)) return MemoryPattern::kSlidingWindow;
  switch (kind) {
    case OpKind::kUpsampleNearest:
    case OpKind::kUpsampleBilinear: return MemoryPattern::kSlidingWindow;
    case OpKind::kRelu:
    case OpKind::kSigmoid:
    case OpKind::kElu: return MemoryPattern::kFolded;
    case OpKind::kAdd:
    case OpKind::kMul: return MemoryPattern::kElementwise;
    case OpKind::kConcat:
    case OpKind::kSlice: return MemoryPattern::kSequential;
    case OpKind::kLayerNorm: return MemoryPattern::kTwoPass;
    case OpKind::kGridSample: return MemoryPattern::kIrregular;
    default: return MemoryPattern::kSlidingWindow;
  }
}

MemoryPattern classify_memory_pattern(std::string_view kind) {
  return classify_memory_pattern(parse_op_kind(kind));
}

std::string_view to_string(Placement p) { return p == Placement::kHW ? "HW" : "SW"; }

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::kComputeBound: return "compute-bound";
    case Reason::kBandwidthBound: return "bandwidth-bound";
    case Reason::kIrregularAccess: return "irregular-access";
    case Reason::kPrecisionCritical: return "precision-critical";
    case Reason::kLowCount: return "low-count";
  }
  return "?";
}

namespace {

std::pair<Placement, Reason> place(OpKind kind, Process process) {
  switch (kind) {
    case OpKind::kLayerNorm:
    case OpKind::kUpsampleBilinear: return {Placement::kSW, Reason::kPrecisionCritical};
    case OpKind::kGridSample: return {Placement::kSW, Reason::kIrregularAccess};
    default: break;
  }
  if (process == Process::kCVF && (kind == OpKind::kAdd || kind == OpKind::kMul)) {
    return {Placement::kSW, Reason::kBandwidthBound};
  }
  if (process == Process::kOther) return {Placement::kSW, Reason::kLowCount};
  if (is_conv(kind) || kind == OpKind::kRelu || kind == OpKind::kSigmoid || kind == OpKind::kElu) {
    return {Placement::kHW, Reason::kComputeBound};
  }
  return {Placement::kHW, Reason::kBandwidthBound};
}

}  // namespace

PartitionPlan partition_hw_sw(const OpGraph& g) {
  PartitionPlan plan;
  for (const auto& n : g.nodes()) {
    const Process p = label_of(n);
    const auto [placement, reason] = place(n.kind, p);
    plan.decisions.push_back({n.id, n.kind, p, placement, reason});
  }
  // Distinct tensors entering and leaving the software part of CVF.
  std::set<int> inbound_sources;
  std::set<int> outbound_targets;
  const auto& d = plan.decisions;
  const auto cvf_sw = [&](int id) {
    return d[id].process == Process::kCVF && d[id].placement == Placement::kSW;
  };
  for (const auto& [from, to] : g.edges()) {
    if (!cvf_sw(from) && cvf_sw(to) && d[from].placement == Placement::kHW) inbound_sources.insert(from);
    if (cvf_sw(from) && !cvf_sw(to) && d[to].placement == Placement::kHW) outbound_targets.insert(to);
  }
  plan.cvf_crossings = inbound_sources.size() + outbound_targets.size();
  for (const auto& n : g.nodes()) {
    if (n.process == Process::kCVF && n.kind == OpKind::kMul) ++plan.cvf_crossings_unsplit;
  }
  return plan;
}

std::string partition_to_json(const PartitionPlan& plan) {
  struct Row {
    std::uint64_t count = 0;
    Placement placement = Placement::kHW;
    Reason reason = Reason::kComputeBound;
  };
  std::map<std::pair<std::size_t, std::size_t>, Row> rows;
  for (const auto& dcs : plan.decisions) {
    auto& row = rows[{pi(dcs.process), ki(dcs.kind)}];
    if (row.count > 0 && (row.placement != dcs.placement || row.reason != dcs.reason)) {
      throw InternalError("operators of one process and kind placed differently");
    }
    ++row.count;
    row.placement = dcs.placement;
    row.reason = dcs.reason;
  }
  json out = json::array();
  for (const auto& [key, row] : rows) {
    out.push_back({{"process", to_string(static_cast<Process>(key.first))},
                   {"kind", to_string(static_cast<OpKind>(key.second))},
                   {"count", row.count},
                   {"placement", to_string(row.placement)},
                   {"reason", to_string(row.reason)}});
  }
  const json doc = {{"placements", out},
                    {"cvf_crossings", plan.cvf_crossings},
                    {"cvf_crossings_unsplit", plan.cvf_crossings_unsplit}};
  return doc.dump(2) + "\n";
}

std::string report_to_json(const WorkloadReport& r) {
  json processes = json::object();
  for (std::size_t p = 0; p < kProcessCount; ++p) {
    json counts = json::object();
    for (OpKind k : kAllOpKinds) {
      if (r.instances[p][ki(k)] > 0) counts[std::string(to_string(k))] = r.instances[p][ki(k)];
    }
    processes[std::string(to_string(static_cast<Process>(p)))] = {
        {"instances", counts},
        {"mults", r.mults[p]},
        {"conv_mults", r.conv_mults[p]},
        {"mult_share", r.mult_share[p]},
        {"conv_share_within", r.conv_share_within[p]}};
  }
  json patterns = json::object();
  for (OpKind k : kAllOpKinds) {
    patterns[std::string(to_string(k))] = to_string(classify_memory_pattern(k));
  }
  const json doc = {{"processes", processes},
                    {"cve_cvd_share", r.cve_cvd_share},
                    {"cve_cvd_conv_share", r.cve_cvd_conv_share},
                    {"memory_patterns", patterns}};
  return doc.dump(2) + "\n";
}

std::string census_table(const InstanceMatrix& m) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s", "Operation");
  out += line;
  for (Process p : kMainProcesses) {
    std::snprintf(line, sizeof line, "%6s", std::string(to_string(p)).c_str());
    out += line;
  }
  out += "\n" + std::string(24 + 6 * kMainProcesses.size(), '-') + "\n";
  for (OpKind k : kAllOpKinds) {
    std::snprintf(line, sizeof line, "%-24s", std::string(row_label(k)).c_str());
    out += line;
    for (Process p : kMainProcesses) {
      std::snprintf(line, sizeof line, "%6llu", static_cast<unsigned long long>(m[pi(p)][ki(k)]));
      out += line;
    }
    out += "\n";
  }
  return out;
}

const InstanceMatrix& reference_census() {
  static const InstanceMatrix m = [] {
    InstanceMatrix r{};
    // Rows in OpKind order; columns FE FS CVF CVE CL CVD.
    constexpr std::uint64_t table[kOpKindCount][6] = {
        {33, 5, 0, 0, 0, 0},   {6, 4, 0, 9, 1, 14}, {2, 0, 0, 3, 0, 0},   {7, 0, 0, 3, 0, 5},
        {3, 0, 0, 1, 0, 0},    {34, 0, 0, 16, 0, 14}, {0, 0, 0, 0, 3, 5}, {0, 0, 0, 0, 2, 0},
        {10, 4, 128, 0, 1, 0}, {0, 0, 64, 0, 3, 0}, {0, 0, 0, 4, 1, 5},   {0, 0, 0, 0, 4, 0},
        {0, 0, 0, 0, 2, 9},    {0, 4, 0, 0, 0, 0},  {0, 0, 0, 0, 0, 9},   {0, 0, 128, 0, 0, 0},
    };
    for (std::size_t k = 0; k < kOpKindCount; ++k) {
      for (std::size_t p = 0; p < 6; ++p) r[pi(kMainProcesses[p])][k] = table[k][p];
    }
    return r;
  }();
  return m;
}

std::vector<std::string> census_mismatches(const InstanceMatrix& m) {
  std::vector<std::string> out;
  const auto& ref = reference_census();
  for (Process p : kMainProcesses) {
    for (OpKind k : kAllOpKinds) {
      if (m[pi(p)][ki(k)] != ref[pi(p)][ki(k)]) {
        out.push_back(std::string(to_string(p)) + " " + std::string(row_label(k)) + ": got " +
                      std::to_string(m[pi(p)][ki(k)]) + ", expected " +
                      std::to_string(ref[pi(p)][ki(k)]));
      }
    }
  }
  return out;
}

}  // namespace fadec
