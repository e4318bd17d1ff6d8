// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "fadec/core/rng.hpp"
#include "fadec/core/tensor_io.hpp"
#include "fadec/numerics/batchnorm.hpp"
#include "fadec/numerics/fixed_point.hpp"
#include "fadec/numerics/quantize.hpp"
#include "fadec/ops/activation.hpp"
#include "fadec/ops/conv.hpp"
#include "fadec/ops/resample.hpp"
#include "fadec/sched/schedule.hpp"
#include "fadec/workload/analyzer.hpp"
#include "oracles.hpp"

using namespace fadec;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void expect(bool cond, const std::string& what) {
  if (!cond) throw Failure(what);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const fs::path& work_root() {
  static const fs::path root = [] {
    const fs::path p = fs::temp_directory_path() / "fadec_acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "fadec");
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "  fadec %s -> %d: %s", args[1].c_str(), code, e.str().c_str());
  return code;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

// Published census, rows in OpKind order, columns FE FS CVF CVE CL CVD.
constexpr std::uint64_t kTableI[kOpKindCount][6] = {
    {33, 5, 0, 0, 0, 0},   {6, 4, 0, 9, 1, 14},  {2, 0, 0, 3, 0, 0},  {7, 0, 0, 3, 0, 5},
    {3, 0, 0, 1, 0, 0},    {34, 0, 0, 16, 0, 14}, {0, 0, 0, 0, 3, 5}, {0, 0, 0, 0, 2, 0},
    {10, 4, 128, 0, 1, 0}, {0, 0, 64, 0, 3, 0},  {0, 0, 0, 4, 1, 5},  {0, 0, 0, 0, 4, 0},
    {0, 0, 0, 0, 2, 9},    {0, 4, 0, 0, 0, 0},   {0, 0, 0, 0, 0, 9},  {0, 0, 128, 0, 0, 0},
};

Outcome census() {
  const fs::path dir = work_root() / "c1";
  const auto t0 = Clock::now();
  const int code = cli({"analyze", "--reference", "--out", dir.string()});
  const double secs = seconds_since(t0);
  expect(code == 0, "analyze --reference exited " + std::to_string(code));
  const OpGraph g = OpGraph::from_json(io::read_text(dir / "graph.json"));
  const InstanceMatrix m = count_operator_instances(g);
  std::size_t cells = 0;
  for (std::size_t k = 0; k < kOpKindCount; ++k) {
    for (std::size_t p = 0; p < 6; ++p) {
      const auto got = m[static_cast<std::size_t>(kMainProcesses[p])][k];
      expect(got == kTableI[k][p], std::string(to_string(kMainProcesses[p])) + " " +
                                       std::string(row_label(kAllOpKinds[k])) + " = " +
                                       std::to_string(got) + ", expected " + std::to_string(kTableI[k][p]));
      ++cells;
    }
  }
  expect(secs < 1.0, "runtime " + fixed(secs, 3) + " s");
  return {true, std::to_string(cells) + " cells exact, " + fixed(secs, 3) + " s"};
}

Outcome partition() {
  const fs::path dir = work_root() / "c2";
  expect(cli({"analyze", "--reference", "--out", dir.string()}) == 0, "analyze failed");
  const json got = json::parse(io::read_text(dir / "partition.json"));
  const json golden =
      json::parse(io::read_text(fs::path(FADEC_SOURCE_DIR) / "tests/golden/partition_reference.json"));
  expect(got == golden, "partition.json differs from the golden plan");
  std::size_t rows = 0;
  for (const auto& r : got["placements"]) {
    const OpKind k = parse_op_kind(r["kind"].get<std::string>());
    const bool sw = k == OpKind::kLayerNorm || k == OpKind::kUpsampleBilinear || k == OpKind::kGridSample ||
                    (r["process"] == "CVF");
    expect((r["placement"] == "SW") == sw, "rule violated for " + r["process"].get<std::string>() + " " +
                                               r["kind"].get<std::string>());
    ++rows;
  }
  expect(got["cvf_crossings"] == 2, "CVF is not split at the feature boundary");
  return {true, std::to_string(rows) + " placement rows match golden, CVF crossings " +
                    std::to_string(got["cvf_crossings"].get<int>()) + " (vs " +
                    std::to_string(got["cvf_crossings_unsplit"].get<int>()) + " unsplit)"};
}

Outcome quant_fidelity() {
  const auto t0 = Clock::now();
  double worst = -1e9, sum = 0;
  const int scenes = 8;
  for (int i = 1; i <= scenes; ++i) {
    const fs::path dir = work_root() / ("c3_" + std::to_string(i));
    expect(cli({"infer", "--mode", "quant", "--seed", std::to_string(i), "--frames", "4", "--alpha", "0.95",
                "--out", dir.string()}) == 0,
           "infer failed on scene " + std::to_string(i));
    const json m = json::parse(io::read_text(dir / "metrics.json"));
    const double d = m["degradation"].get<double>();
    std::printf("  scene %d: float MSE %.5f, quant MSE %.5f, degradation %+.4f, quant-vs-float rel. MSE %.2e\n", i,
                m["mean_mse_float_gt"].get<double>(), m["mean_mse_gt"].get<double>(), d,
                m["relative_mse_vs_float"].get<double>());
    expect(d < 0.10, "scene " + std::to_string(i) + " degradation " + fixed(d, 4));
    worst = std::max(worst, d);
    sum += d;
  }
  const double secs = seconds_since(t0);
  expect(secs < 120.0, "runtime " + fixed(secs, 1) + " s");
  return {true, std::to_string(scenes) + " scenes, worst degradation " + fixed(worst, 4) + ", mean " +
                    fixed(sum / scenes, 4) + ", " + fixed(secs, 1) + " s"};
}

Outcome lut_accuracy() {
  std::string detail;
  LutOptions elu_opts;
  elu_opts.out_exp = 12;
  for (ActKind kind : {ActKind::kSigmoid, ActKind::kElu}) {
    const ActLut lut = lut_build(kind, 256, 8.0, kind == ActKind::kElu ? elu_opts : LutOptions{});
    const double slope = kind == ActKind::kSigmoid ? 0.25 : 1.0;
    const double bound = slope * (16.0 / 256.0) / 2.0 + std::ldexp(1.0, -lut.out_exp());
    double worst = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const double x = -8.0 + 16.0 * i / (n - 1);
      const auto v = static_cast<std::int32_t>(std::clamp<double>(std::round(std::ldexp(x, lut.in_exp())), -32768, 32767));
      const double xq = std::ldexp(static_cast<double>(v), -lut.in_exp());
      const double exact = kind == ActKind::kSigmoid ? 1.0 / (1.0 + std::exp(-xq)) : (xq >= 0 ? xq : std::expm1(xq));
      worst = std::max(worst, std::abs(std::ldexp(static_cast<double>(lut.apply(v)), -lut.out_exp()) - exact));
    }
    const char* name = kind == ActKind::kSigmoid ? "sigmoid" : "ELU";
    expect(worst <= bound, std::string(name) + " error " + std::to_string(worst) + " > bound " + std::to_string(bound));
    detail += std::string(name) + " max err " + fixed(worst, 5) + " <= " + fixed(bound, 5) + "; ";
  }
  LutOptions half_opts;
  half_opts.sigmoid_half = true;
  const ActLut full = lut_build(ActKind::kSigmoid), half = lut_build(ActKind::kSigmoid, 256, 8.0, half_opts);
  for (std::int32_t v = -32768; v <= 32767; ++v) {
    expect(full.apply(v) == half.apply(v), "half table differs at " + std::to_string(v));
  }
  return {true, detail + "half table identical on all 65536 inputs"};
}

Outcome grid_sampling() {
  Rng rng(5005);
  for (int n = 0; n < 1000; ++n) {
    const std::size_t c = std::size_t(rng.integer(1, 4));
    const std::size_t h = std::size_t(rng.integer(1, 16)), w = std::size_t(rng.integer(1, 16));
    const FTensor src = oracle::random_tensor(rng, {c, h, w}, -5, 5);
    const std::size_t gh = std::size_t(rng.integer(1, 10)), gw = std::size_t(rng.integer(1, 10));
    std::vector<float> g(gh * gw * 2);
    for (std::size_t i = 0; i < g.size(); i += 2) {
      g[i] = static_cast<float>(rng.uniform(-2.0, double(h) + 1.0));
      g[i + 1] = static_cast<float>(rng.uniform(-2.0, double(w) + 1.0));
    }
    const Grid grid(gh, gw, g);
    const FTensor y = grid_sample(src, grid);
    const auto ref = oracle::grid_sample(src, grid);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      expect(y[i] == ref[i], "instance " + std::to_string(n) + " element " + std::to_string(i) + " differs");
    }
    expect(grid_sample(src, Grid::identity(h, w)) == src, "identity grid changed instance " + std::to_string(n));
  }
  return {true, "1000 random instances exact, identity bit-exact"};
}

Outcome conv_oracles() {
  // Hand cases: m1 = 3*2+1 = 7, m2 = 35, 35/4 rounds to 9 at exponent -2.
  const ConvSpec one = ConvSpec::make(1, 1, 1, 1);
  const QTensor h = conv2d_quant(QTensor({1, 1, 1}, {2}, 16, 0), one, QTensor({1, 1, 1, 1}, {3}, 8, 0),
                                 QTensor({1}, {1}, 32, 0), QTensor({1}, {5}, 8, 0), 2);
  expect(h[0] == 9 && h.exp() == -2, "hand case 1");
  // 3x3 ones over a 3x3 field of 2 with zero padding: centre 18, corners 8.
  const QTensor ones = conv2d_quant(QTensor({1, 3, 3}, std::vector<std::int32_t>(9, 2), 16, 0),
                                    ConvSpec::make(3, 1, 1, 1), QTensor({1, 1, 3, 3}, std::vector<std::int32_t>(9, 1), 8, 0),
                                    QTensor({1}, {0}, 32, 0), QTensor({1}, {1}, 8, 0), 0);
  expect(ones[4] == 18 && ones[0] == 8 && ones[1] == 12, "hand case 2");
  // Rounding half away from zero: m2 = -6, r = 2 -> -1.5 -> -2.
  const QTensor neg = conv2d_quant(QTensor({1, 1, 1}, {-3}, 16, 0), one, QTensor({1, 1, 1, 1}, {2}, 8, 0),
                                   QTensor({1}, {0}, 32, 0), QTensor({1}, {1}, 8, 0), 2);
  expect(neg[0] == -2, "hand case 3");

  Rng rng(6006);
  const std::pair<int, int> pairs[] = {{1, 1}, {3, 1}, {3, 2}, {5, 1}, {5, 2}};
  double worst_ratio = 0;
  for (auto [k, st] : pairs) {
    for (int n = 0; n < 50; ++n) {
      const std::size_t cin = std::size_t(rng.integer(1, 6)), cout = std::size_t(rng.integer(1, 4));
      const std::size_t H = std::size_t(rng.integer(3, 12)), W = std::size_t(rng.integer(3, 12));
      const ConvSpec spec = ConvSpec::make(k, st, cin, cout);
      const FTensor x = oracle::random_tensor(rng, {cin, H, W}, -2, 2);
      const FTensor w = oracle::random_tensor(rng, {cout, cin, std::size_t(k), std::size_t(k)}, -0.5, 0.5);
      const FTensor b = oracle::random_tensor(rng, {cout}, -1, 1);
      const FTensor s = oracle::random_tensor(rng, {cout}, 0.5, 1.5);
      const int ex = max_fit_exponent(x, 16), ew = max_fit_exponent(w, 8), es = max_fit_exponent(s, 8);
      const QTensor qx = quantize_tensor(x, ex, 16), qw = quantize_tensor(w, ew, 8);
      const QTensor qb = quantize_tensor(b, ex + ew, 32), qs = quantize_tensor(s, es, 8);

      // Shift so the largest |m2| lands just inside 16 bits.
      std::int64_t peak = 1;
      for (std::int64_t v : oracle::conv_m2(qx, spec, qw, qb, qs)) peak = std::max(peak, v < 0 ? -v : v);
      int r = 0;
      while (rshift_round(peak, r) > 32767) ++r;
      const QTensor y = conv2d_quant(qx, spec, qw, qb, qs, r);

      const std::vector<double> ref = oracle::conv(x, spec, w, b, s);
      const FTensor xd = dequantize_tensor(qx);
      const double dx = std::ldexp(0.5, -ex), dw = std::ldexp(0.5, -ew), db = std::ldexp(0.5, -(ex + ew));
      const double ds = std::ldexp(0.5, -es), dy = std::ldexp(0.5, -y.exp());
      const std::size_t oh = y.dim(1), ow = y.dim(2), kk = std::size_t(k);
      for (std::size_t o = 0; o < cout; ++o) {
        for (std::size_t i = 0; i < oh; ++i) {
          for (std::size_t j = 0; j < ow; ++j) {
            // Propagate the half-step errors of x, W, b and s, then add the
            // output rounding.
            double ea = db, aq = 0;
            for (std::size_t c = 0; c < cin; ++c) {
              for (std::size_t u = 0; u < kk; ++u) {
                for (std::size_t v = 0; v < kk; ++v) {
                  const long long rr = static_cast<long long>(i * st + u) - spec.padding;
                  const long long qq = static_cast<long long>(j * st + v) - spec.padding;
                  if (rr < 0 || qq < 0 || rr >= static_cast<long long>(H) || qq >= static_cast<long long>(W)) continue;
                  const double wv = w[((o * cin + c) * kk + u) * kk + v];
                  const double xq = xd.at(c, std::size_t(rr), std::size_t(qq));
                  ea += std::abs(wv) * dx + std::abs(xq) * dw;
                  aq += std::abs(xq) * (std::abs(wv) + dw);
                }
              }
            }
            aq += std::abs(b[o]) + db;
            const double bound = ea * std::abs(s[o]) + aq * ds + dy + 1e-9;
            const double got = std::ldexp(static_cast<double>(y[(o * oh + i) * ow + j]), -y.exp());
            const double err = std::abs(got - ref[(o * oh + i) * ow + j]);
            expect(err <= bound, "conv(" + std::to_string(k) + "," + std::to_string(st) + ") error " +
                                     std::to_string(err) + " > bound " + std::to_string(bound));
            worst_ratio = std::max(worst_ratio, err / bound);
          }
        }
      }
    }
  }
  return {true, "3 hand cases exact; 250 random instances within bound (worst error/bound " +
                    fixed(worst_ratio, 3) + ")"};
}

Outcome bn_folding() {
  Rng rng(7007);
  const std::pair<int, int> pairs[] = {{1, 1}, {3, 1}, {3, 2}, {5, 1}, {5, 2}};
  double worst = 0;
  const FTensor unit = FTensor::filled({1}, 1.0f);
  for (int n = 0; n < 100; ++n) {
    const auto [k, st] = pairs[n % 5];
    const std::size_t cin = std::size_t(rng.integer(1, 5)), cout = std::size_t(rng.integer(1, 5));
    const ConvSpec spec = ConvSpec::make(k, st, cin, cout);
    const FTensor x = oracle::random_tensor(rng, {cin, 9, 8});
    const FTensor w = oracle::random_tensor(rng, {cout, cin, std::size_t(k), std::size_t(k)});
    const FTensor b = oracle::random_tensor(rng, {cout});
    const FTensor gamma = oracle::random_tensor(rng, {cout}, 0.5, 2.0), beta = oracle::random_tensor(rng, {cout});
    const FTensor mean = oracle::random_tensor(rng, {cout}), var = oracle::random_tensor(rng, {cout}, 0.1, 2.0);
    std::vector<double> ref = oracle::conv(x, spec, w, b, unit);
    const std::size_t plane = ref.size() / cout;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const std::size_t c = i / plane;
      ref[i] = (ref[i] - mean[c]) / std::sqrt(static_cast<double>(var[c]) + 1e-5) * gamma[c] + beta[c];
    }
    const auto [wf, bf] = fold_batchnorm(w, b, gamma, beta, mean, var, 1e-5);
    const double e = oracle::max_rel_error(ref, conv2d_float(x, spec, wf, bf, unit).data());
    expect(e <= 1e-5, "instance " + std::to_string(n) + " relative error " + std::to_string(e));
    worst = std::max(worst, e);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", worst);
  return {true, std::string("100 instances, worst relative error ") + buf};
}

std::int64_t oracle_makespan(const ScheduleGraph& g, const Timeline& t, std::size_t frames) {
  // Longest path over dependency edges plus the per-resource order of the
  // timeline, evaluated in start order.
  std::vector<const Event*> order;
  for (const auto& e : t.events) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](auto a, auto b) { return a->start < b->start; });
  std::map<std::pair<std::size_t, std::size_t>, std::int64_t> end;
  std::map<Resource, std::int64_t> lane;
  std::int64_t span = 0;
  for (const Event* e : order) {
    std::int64_t s = lane.count(e->resource) ? lane[e->resource] : 0;
    for (const auto& edge : g.edges) {
      if (edge.to != e->stage_index || e->frame < std::size_t(edge.offset)) continue;
      s = std::max(s, end.at({e->frame - std::size_t(edge.offset), edge.from}) + (edge.handoff ? g.overhead_us : 0));
    }
    const std::int64_t fin = s + g.stages[e->stage_index].latency_us;
    end[{e->frame, e->stage_index}] = fin;
    lane[e->resource] = fin;
    span = std::max(span, fin);
  }
  (void)frames;
  return span;
}

Outcome schedule() {
  const Profile ref = reference_profile();
  const ScheduleGraph g = build_dependency_graph(ref.stages, ref.extern_model);
  const Timeline t = simulate_schedule(g, ref.frames);
  const double hidden = overlap_hidden_fraction(t, "CVF");
  const double share = extern_overhead_share(t);
  expect(std::abs(hidden - 0.93) < 1e-9, "CVF hidden fraction " + std::to_string(hidden));
  expect(std::abs(share - 0.0169) < 5e-5, "extern overhead share " + std::to_string(share));
  const TimelineCheck rc = check_timeline(g, t);
  expect(rc.exclusive && rc.deps_safe, "reference timeline violates invariants");

  Rng rng(8008);
  for (int n = 0; n < 200; ++n) {
    Profile p;
    const std::size_t stages = std::size_t(rng.integer(2, 9));
    for (std::size_t i = 0; i < stages; ++i) {
      StageProfile s{"S" + std::to_string(i), rng.chance(0.5) ? Resource::kPL : Resource::kCPU, rng.integer(1, 100), {}};
      for (std::size_t j = 0; j < i; ++j) {
        if (rng.chance(0.4)) s.deps.push_back({"S" + std::to_string(j), 0});
      }
      for (std::size_t j = 0; j < stages; ++j) {
        if (rng.chance(0.1)) s.deps.push_back({"S" + std::to_string(j), 1});
      }
      p.stages.push_back(std::move(s));
    }
    p.extern_model.overhead_us = rng.integer(0, 20);
    for (const auto& s : p.stages) {
      for (const auto& d : s.deps) {
        const auto& from = p.stages[std::stoul(d.stage.substr(1))];
        const bool dup = std::any_of(p.extern_model.handoffs.begin(), p.extern_model.handoffs.end(),
                                     [&](const Handoff& h) { return h.from == d.stage && h.to == s.name; });
        if (from.placement != s.placement && !dup && rng.chance(0.5)) p.extern_model.handoffs.push_back({d.stage, s.name});
      }
    }
    const ScheduleGraph rg = build_dependency_graph(p.stages, p.extern_model);
    const std::size_t frames = std::size_t(rng.integer(1, 4));
    const Timeline rt = simulate_schedule(rg, frames);
    expect(rt.makespan() == oracle_makespan(rg, rt, frames), "random profile " + std::to_string(n) + " makespan");
    const TimelineCheck c = check_timeline(rg, rt);
    expect(c.exclusive && c.deps_safe, "random profile " + std::to_string(n) + " invariants");
  }
  return {true, "CVF hidden " + fixed(hidden, 4) + ", overhead share " + fixed(share, 4) + " (" +
                    std::to_string(t.overhead_total() / std::int64_t(t.frames)) + " us / " +
                    std::to_string(t.frame_span(t.steady_frame())) +
                    " us), 200 random profiles match the longest-path oracle, invariants hold"};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = io::read_text(e.path());
  }
  return files;
}

Outcome determinism() {
  const fs::path base = work_root() / "c9";
  const std::string cfg = (base / "config.json").string();
  fs::create_directories(base);
  io::write_text(cfg, R"({"pipeline": {"height": 32, "width": 64, "hypotheses": 16}})");
  for (const char* run : {"a", "b"}) {
    const fs::path d = base / run;
    const auto o = [&](const char* leaf) { return (d / leaf).string(); };
    expect(cli({"make-model", "--config", cfg, "--seed", "3", "--out", o("model")}) == 0, "make-model");
    expect(cli({"make-scene", "--config", cfg, "--seed", "3", "--frames", "4", "--out", o("scene")}) == 0, "make-scene");
    expect(cli({"make-scene", "--config", cfg, "--seed", "3", "--frames", "4", "--noise", "--out", o("noise")}) == 0,
           "make-scene --noise");
    expect(cli({"calibrate", "--config", cfg, "--model", o("model"), "--scene", o("noise"), "--out", o("calib")}) == 0,
           "calibrate");
    expect(cli({"infer", "--config", cfg, "--model", o("model"), "--scene", o("scene"), "--mode", "float", "--out",
                o("infer_float")}) == 0,
           "infer float");
    expect(cli({"infer", "--config", cfg, "--model", o("model"), "--scene", o("scene"), "--mode", "quant", "--quant",
                o("calib/quant.json"), "--out", o("infer_quant")}) == 0,
           "infer quant");
    expect(cli({"infer", "--config", cfg, "--seed", "3", "--mode", "quant", "--out", o("infer_fly")}) == 0,
           "infer quant on the fly");
    expect(cli({"analyze", "--reference", "--out", o("analyze")}) == 0, "analyze");
    expect(cli({"schedule", "--reference", "--out", o("schedule")}) == 0, "schedule");
  }
  const auto a = snapshot(base / "a"), b = snapshot(base / "b");
  expect(a.size() == b.size(), "different file sets");
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    expect(it != b.end() && it->second == bytes, name + " differs between runs");
  }
  return {true, "7 commands (9 invocations) twice, " + std::to_string(a.size()) + " files bit-identical"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"census of the reference frame", census},
      {"hardware/software partition plan", partition},
      {"quantization fidelity", quant_fidelity},
      {"activation lookup tables", lut_accuracy},
      {"grid sampling oracle", grid_sampling},
      {"convolution oracles", conv_oracles},
      {"batch-norm folding", bn_folding},
      {"schedule reproduction", schedule},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, e.what()};
    }
    std::printf("[%s] criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  fs::remove_all(work_root());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
