#include "fadec/workload/op_graph.hpp"

#include <nlohmann/json.hpp>

#include "fadec/core/error.hpp"

namespace fadec {

using nlohmann::json;

namespace {

struct KindName {
  OpKind kind;
  std::string_view name;
  std::string_view label;
};

constexpr std::array<KindName, kOpKindCount> kKindNames = {{
    {OpKind::kConv11, "conv(1,1)", "Conv (1, 1)"},
    {OpKind::kConv31, "conv(3,1)", "Conv (3, 1)"},
    {OpKind::kConv32, "conv(3,2)", "Conv (3, 2)"},
    {OpKind::kConv51, "conv(5,1)", "Conv (5, 1)"},
    {OpKind::kConv52, "conv(5,2)", "Conv (5, 2)"},
    {OpKind::kRelu, "relu", "Activation (ReLU)"},
    {OpKind::kSigmoid, "sigmoid", "Activation (sigmoid)"},
    {OpKind::kElu, "elu", "Activation (ELU)"},
    {OpKind::kAdd, "add", "Addition"},
    {OpKind::kMul, "mul", "Multiplication"},
    {OpKind::kConcat, "concat", "Concatenation"},
    {OpKind::kSlice, "slice", "Slice"},
    {OpKind::kLayerNorm, "layer_norm", "Layer Normalization"},
    {OpKind::kUpsampleNearest, "upsample_nearest", "Upsampling (nearest)"},
    {OpKind::kUpsampleBilinear, "upsample_bilinear", "Upsampling (bilinear)"},
    {OpKind::kGridSample, "grid_sample", "Grid Sampling"},
}};

constexpr std::array<std::string_view, kProcessCount> kProcessNames = {"FE",  "FS", "CVF", "CVE",
                                                                       "CL", "CVD", "other"};

void check_spec(const OpDescriptor& n) {
  if (is_conv(n.kind) != n.spec.has_value()) {
    throw AnalysisError("node " + std::to_string(n.id) + " (" + std::string(to_string(n.kind)) +
                        ") " + (n.spec ? "carries" : "lacks") + " a conv spec");
  }
  if (n.spec && conv_kind(n.spec->kernel, n.spec->stride) != n.kind) {
    throw AnalysisError("node " + std::to_string(n.id) + " spec (" +
                        std::to_string(n.spec->kernel) + "," + std::to_string(n.spec->stride) +
                        ") does not match kind " + std::string(to_string(n.kind)));
  }
}

json shape_json(const Shape& s) { return json(s); }

Shape parse_shape(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + " must be an array of extents");
  Shape s;
  for (const auto& e : j) {
    if (!e.is_number_unsigned() || e.get<std::size_t>() == 0) {
      throw ParseError(where + " must hold positive integers");
    }
    s.push_back(e.get<std::size_t>());
  }
  return s;
}

}  // namespace

std::string_view to_string(OpKind kind) { return kKindNames[static_cast<std::size_t>(kind)].name; }

std::string_view row_label(OpKind kind) { return kKindNames[static_cast<std::size_t>(kind)].label; }

OpKind parse_op_kind(std::string_view name) {
  for (const auto& k : kKindNames) {
    if (k.name == name) return k.kind;
  }
  throw AnalysisError("unknown operator kind '" + std::string(name) + "'");
}

bool is_conv(OpKind kind) { return static_cast<int>(kind) <= static_cast<int>(OpKind::kConv52); }

OpKind conv_kind(int kernel, int stride) {
  if (kernel == 1 && stride == 1) return OpKind::kConv11;
  if (kernel == 3 && stride == 1) return OpKind::kConv31;
  if (kernel == 3 && stride == 2) return OpKind::kConv32;
  if (kernel == 5 && stride == 1) return OpKind::kConv51;
  if (kernel == 5 && stride == 2) return OpKind::kConv52;
  throw ConfigError("unsupported conv (" + std::to_string(kernel) + "," + std::to_string(stride) +
                    ")");
}

std::string_view to_string(Process p) { return kProcessNames[static_cast<std::size_t>(p)]; }

Process parse_process(std::string_view name) {
  for (std::size_t i = 0; i < kProcessNames.size(); ++i) {
    if (kProcessNames[i] == name) return static_cast<Process>(i);
  }
  throw AnalysisError("unknown process '" + std::string(name) + "'");
}

int OpGraph::add_node(OpDescriptor node) {
  node.id = static_cast<int>(nodes_.size());
  check_spec(node);
  nodes_.push_back(std::move(node));
  return nodes_.back().id;
}

void OpGraph::add_edge(int from, int to) {
  const int n = static_cast<int>(nodes_.size());
  if (from < 0 || from >= n || to < 0 || to >= n) {
    throw AnalysisError("edge " + std::to_string(from) + "->" + std::to_string(to) +
                        " references an unknown node");
  }
  edges_.emplace_back(from, to);
}

std::string OpGraph::to_json(int indent) const {
  json nodes = json::array();
  for (const auto& n : nodes_) {
    json shapes_in = json::array();
    for (const auto& s : n.inputs) shapes_in.push_back(shape_json(s));
    json j = {{"id", n.id},
              {"kind", to_string(n.kind)},
              {"process", n.process ? json(to_string(*n.process)) : json(nullptr)},
              {"shapes", {{"inputs", shapes_in}, {"output", shape_json(n.output)}}}};
    if (n.spec) {
      j["spec"] = {{"kernel", n.spec->kernel},
                   {"stride", n.spec->stride},
                   {"in_ch", n.spec->in_ch},
                   {"out_ch", n.spec->out_ch},
                   {"padding", n.spec->padding}};
    } else {
      j["spec"] = nullptr;
    }
    if (!n.name.empty()) j["name"] = n.name;
    nodes.push_back(std::move(j));
  }
  json edges = json::array();
  for (const auto& [from, to] : edges_) edges.push_back({{"from", from}, {"to", to}});
  return json{{"nodes", nodes}, {"edges", edges}}.dump(indent);
}

OpGraph OpGraph::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("graph JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("graph JSON must be an object");
  OpGraph g;
  try {
    const auto& nodes = doc.value("nodes", json::array());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& jn = nodes[i];
      const std::string where = "nodes[" + std::to_string(i) + "]";
      if (jn.contains("id") && jn.at("id").get<int>() != static_cast<int>(i)) {
        throw ParseError(where + ".id must equal its position");
      }
      OpDescriptor n;
      n.kind = parse_op_kind(jn.at("kind").get<std::string>());
      if (jn.contains("process") && !jn.at("process").is_null()) {
        n.process = parse_process(jn.at("process").get<std::string>());
      }
      if (jn.contains("shapes")) {
        const auto& sh = jn.at("shapes");
        if (sh.contains("inputs")) {
          for (const auto& s : sh.at("inputs")) n.inputs.push_back(parse_shape(s, where + ".shapes.inputs"));
        }
        if (sh.contains("output") && !sh.at("output").is_null()) {
          n.output = parse_shape(sh.at("output"), where + ".shapes.output");
        }
      }
      if (jn.contains("spec") && !jn.at("spec").is_null()) {
        const auto& js = jn.at("spec");
        ConvSpec s;
        s.kernel = js.at("kernel").get<int>();
        s.stride = js.at("stride").get<int>();
        s.in_ch = js.at("in_ch").get<std::size_t>();
        s.out_ch = js.at("out_ch").get<std::size_t>();
        s.padding = js.value("padding", (s.kernel - 1) / 2);
        n.spec = s;
      }
      n.name = jn.value("name", "");
      g.add_node(std::move(n));
    }
    for (const auto& e : doc.value("edges", json::array())) {
      g.add_edge(e.at("from").get<int>(), e.at("to").get<int>());
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("graph JSON: ") + e.what());
  }
  return g;
}

}  // namespace fadec
