#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fadec/core/error.hpp"
#include "fadec/core/tensor_io.hpp"
#include "fadec/mvs/backend.hpp"
#include "fadec/mvs/calibration.hpp"
#include "fadec/mvs/model.hpp"
#include "fadec/mvs/pipeline.hpp"
#include "fadec/mvs/scene.hpp"
#include "fadec/sched/schedule.hpp"
#include "fadec/workload/analyzer.hpp"

namespace fadec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  bool reference = false;
  bool json_out = false;
  std::optional<std::string> out;
  std::optional<std::string> model;
  std::optional<std::string> scene;
  std::optional<std::string> quant;
  std::optional<std::string> graph;
  std::optional<std::string> profile;
  std::optional<std::string> baseline;
  std::optional<std::size_t> frames;
  std::optional<double> alpha;
  std::optional<double> mean;
  std::optional<double> stddev;
  std::optional<std::size_t> count;
  std::optional<double> budget;
  bool noise = false;
};

// Flag values take precedence over the --config file, which takes
// precedence over built-in defaults.
class Settings {
 public:
  Settings(const Flags& f, std::string command) : flags_(f), command_(std::move(command)) {
    if (f.config) {
      const std::string text = io::read_text(*f.config);
      try {
        file_ = json::parse(text);
      } catch (const json::parse_error& e) {
        throw ParseError(*f.config + ": " + e.what());
      }
      if (!file_.is_object()) throw ParseError(*f.config + ": expected an object");
      config_path_ = *f.config;
    }
  }

  template <typename T>
  T get(const std::optional<T>& flag, const char* key, T fallback) const {
    if (flag) return *flag;
    auto it = file_.find(key);
    if (it == file_.end()) return fallback;
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      throw ParseError(config_path_ + ": field '" + key + "' has the wrong type");
    }
  }

  std::optional<std::string> path(const std::optional<std::string>& flag, const char* key) const {
    if (flag) return flag;
    auto it = file_.find(key);
    if (it == file_.end()) return std::nullopt;
    if (!it->is_string()) throw ParseError(config_path_ + ": field '" + key + "' must be a string");
    return it->get<std::string>();
  }

  PipelineConfig pipeline() const {
    auto it = file_.find("pipeline");
    if (it == file_.end()) return PipelineConfig{};
    return PipelineConfig::from_json(it->dump());
  }

  std::uint64_t seed() const { return get<std::uint64_t>(flags_.seed, "seed", 1); }
  bool reference() const { return flags_.reference || file_.value("reference", false); }
  bool json_out() const { return flags_.json_out; }

  fs::path out_dir() const {
    if (auto p = path(flags_.out, "out")) return *p;
    const char* root = std::getenv("FADEC_OUT_DIR");
    return fs::path(root && *root ? root : "out") / command_;
  }

 private:
  const Flags& flags_;
  std::string command_;
  json file_ = json::object();
  std::string config_path_ = "config";
};

void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p)) throw IoError(std::string(what) + " directory not found: " + p.string());
}

Model load_or_make_model(const Settings& s, const Flags& f) {
  if (auto dir = s.path(f.model, "model")) {
    require_dir(*dir, "model");
    return Model::load(*dir);
  }
  return Model::random(s.pipeline(), s.seed());
}

Scene load_or_make_scene(const Settings& s, const Flags& f, const PipelineConfig& cfg) {
  if (auto dir = s.path(f.scene, "scene")) {
    require_dir(*dir, "scene");
    return load_scene(*dir);
  }
  return make_synthetic_scene(cfg, s.get(f.frames, "frames", std::size_t{4}), s.seed());
}

double mse(const FTensor& a, const FTensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return a.size() ? acc / static_cast<double>(a.size()) : 0.0;
}

std::pair<double, double> image_stats(const Scene& scene) {
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& fr : scene.frames) {
    for (float v : fr.image.data()) {
      sum += v;
      sq += static_cast<double>(v) * v;
      ++n;
    }
  }
  if (n == 0) return {0.0, 0.0};
  const double m = sum / static_cast<double>(n);
  return {m, std::sqrt(std::max(0.0, sq / static_cast<double>(n) - m * m))};
}

QuantParams base_params(const Settings& s, const Flags& f) {
  QuantParams q;
  q.clip_rate = s.get(f.alpha, "alpha", 0.95);
  q.validate();
  return q;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void emit(std::ostream& out, bool as_json, const json& summary, const std::string& text) {
  if (as_json) {
    out << summary.dump(2) << "\n";
  } else {
    out << text;
  }
}

// ---------------------------------------------------------------------------

int cmd_make_model(const Settings& s, std::ostream& out) {
  const PipelineConfig cfg = s.pipeline();
  const Model m = Model::random(cfg, s.seed());
  const fs::path dir = s.out_dir();
  m.save(dir);
  json j{{"command", "make-model"},
         {"out", dir.generic_string()},
         {"convs", m.convs().size()},
         {"norms", m.norms().size()}};
  emit(out, s.json_out(), j,
       "model with " + std::to_string(m.convs().size()) + " convolutions and " +
           std::to_string(m.norms().size()) + " layer norms written to " + dir.generic_string() + "\n");
  return 0;
}

int cmd_make_scene(const Settings& s, const Flags& f, std::ostream& out) {
  const PipelineConfig cfg = s.pipeline();
  const std::size_t frames = s.get(f.frames, "frames", std::size_t{4});
  const bool noise = f.noise || s.get<bool>(std::nullopt, "noise", false);
  const Scene scene = noise ? make_noise_scene(cfg, frames, s.get(f.mean, "mean", 0.5),
                                               s.get(f.stddev, "stddev", 0.2), s.seed())
                            : make_synthetic_scene(cfg, frames, s.seed());
  const fs::path dir = s.out_dir();
  save_scene(scene, dir);
  json j{{"command", "make-scene"},
         {"out", dir.generic_string()},
         {"frames", frames},
         {"ground_truth", scene.has_depth()}};
  emit(out, s.json_out(), j,
       std::to_string(frames) + " frames written to " + dir.generic_string() + "\n");
  return 0;
}

int cmd_calibrate(const Settings& s, const Flags& f, std::ostream& out, std::ostream& err) {
  const Model model = load_or_make_model(s, f);
  const PipelineConfig& cfg = model.config();
  std::vector<Scene> samples;
  if (auto dir = s.path(f.scene, "scene")) {
    require_dir(*dir, "scene");
    samples.push_back(load_scene(*dir));
  } else {
    const std::size_t count = s.get(f.count, "count", std::size_t{4});
    if (count > 0) {
      samples.push_back(make_noise_scene(cfg, count, s.get(f.mean, "mean", 0.5),
                                         s.get(f.stddev, "stddev", 0.2), s.seed()));
    }
  }
  const CalibrationResult r = calibrate_model(model, samples, base_params(s, f));
  const fs::path dir = s.out_dir();
  io::write_text(dir / "quant.json", quant_params_to_json(r.params));
  std::size_t longest = 0;
  for (const auto& sc : samples) longest = std::max(longest, sc.frames.size());
  if (longest > 0 && longest < cfg.measurement_frames + 1) {
    err << "warning: calibration sequences of " << longest << " frames never fuse "
        << cfg.measurement_frames << " measurement frames; those sites stay uncalibrated\n";
  }
  if (!r.zero_sites.empty()) {
    err << "warning: " << r.zero_sites.size()
        << " activation sites saw only zeros and received the default exponent\n";
  }
  json j{{"command", "calibrate"},
         {"out", (dir / "quant.json").generic_string()},
         {"frames", r.frames},
         {"exponents", r.params.exps.size()},
         {"zero_sites", r.zero_sites}};
  emit(out, s.json_out(), j,
       "calibrated " + std::to_string(r.params.exps.size()) + " exponents over " +
           std::to_string(r.frames) + " frames; wrote " + (dir / "quant.json").generic_string() + "\n");
  return 0;
}

int cmd_infer(const Settings& s, const Flags& f, std::ostream& out) {
  const Model model = load_or_make_model(s, f);
  const PipelineConfig& cfg = model.config();
  const Scene scene = load_or_make_scene(s, f, cfg);
  const std::string mode = s.get(f.mode, "mode", std::string("float"));
  if (mode != "float" && mode != "quant") throw UsageError("--mode must be float or quant, got '" + mode + "'");

  FloatBackend fb(&model);
  const SequenceOutput fo = run_sequence(fb, cfg, scene.frames);
  std::optional<SequenceOutput> qo;
  bool calibrated_here = false;
  if (mode == "quant") {
    QuantParams qp;
    if (auto qpath = s.path(f.quant, "quant")) {
      qp = quant_params_from_json(io::read_text(*qpath));
    } else {
      // Calibration images share the mean and spread of the scene images.
      const auto [m, sd] = image_stats(scene);
      const Scene cal = make_noise_scene(cfg, s.get(f.count, "count", std::size_t{4}), m, sd, s.seed() + 1);
      qp = calibrate_model(model, std::span<const Scene>(&cal, 1), base_params(s, f)).params;
      calibrated_here = true;
    }
    QuantBackend qb(&model, qp);
    qo = run_sequence(qb, cfg, scene.frames);
  }
  const SequenceOutput& result = qo ? *qo : fo;

  const fs::path dir = s.out_dir();
  json frames = json::array();
  double sum_gt = 0.0, sum_float_gt = 0.0, sum_vs_float = 0.0, sum_float_energy = 0.0;
  for (std::size_t i = 0; i < result.depths.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "depth_%03zu.ftz", i);
    io::write_ftz(dir / name, result.depths[i]);
    json fr{{"index", i}, {"fused", static_cast<bool>(result.fused[i])}};
    if (scene.has_depth()) {
      const double e = mse(result.depths[i], scene.depths[i]);
      fr["mse_gt"] = e;
      sum_gt += e;
      if (qo) {
        const double ef = mse(fo.depths[i], scene.depths[i]);
        fr["mse_float_gt"] = ef;
        sum_float_gt += ef;
      }
    }
    if (qo) {
      const double e = mse(qo->depths[i], fo.depths[i]);
      fr["mse_vs_float"] = e;
      sum_vs_float += e;
      sum_float_energy += mse(fo.depths[i], FTensor::zeros(fo.depths[i].shape()));
    }
    frames.push_back(fr);
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, result.depths.size()));
  json metrics{{"mode", mode}, {"frames", frames}};
  std::ostringstream text;
  text << mode << " inference over " << result.depths.size() << " frames; depth maps in "
       << dir.generic_string() << "\n";
  if (scene.has_depth()) {
    metrics["mean_mse_gt"] = sum_gt / n;
    text << "mean MSE vs ground truth: " << fmt(sum_gt / n, 6) << "\n";
  }
  if (qo) {
    const double budget = s.get(f.budget, "budget", 0.10);
    metrics["calibrated_on_the_fly"] = calibrated_here;
    metrics["relative_mse_vs_float"] = sum_float_energy > 0 ? sum_vs_float / sum_float_energy : 0.0;
    metrics["budget"] = budget;
    double degradation = metrics["relative_mse_vs_float"].get<double>();
    if (scene.has_depth() && sum_float_gt > 0) {
      metrics["mean_mse_float_gt"] = sum_float_gt / n;
      degradation = (sum_gt - sum_float_gt) / sum_float_gt;
    }
    metrics["degradation"] = degradation;
    metrics["within_budget"] = degradation < budget;
    text << "quantized vs float degradation: " << fmt(degradation, 4) << " (budget " << fmt(budget, 2)
         << ")\n";
  }
  io::write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  metrics["command"] = "infer";
  metrics["out"] = dir.generic_string();
  emit(out, s.json_out(), metrics, text.str());
  return 0;
}

int cmd_analyze(const Settings& s, const Flags& f, std::ostream& out) {
  OpGraph g;
  const bool reference = s.reference();
  if (reference) {
    g = trace_reference_frame(s.pipeline());
  } else if (auto path = s.path(f.graph, "graph")) {
    g = OpGraph::from_json(io::read_text(*path));
  } else {
    throw UsageError("analyze needs --reference or --graph <file>");
  }
  const WorkloadReport report = analyze_workload(g);
  const PartitionPlan plan = partition_hw_sw(g);
  const std::string table = census_table(report.instances);
  const fs::path dir = s.out_dir();
  io::write_text(dir / "report.json", report_to_json(report));
  io::write_text(dir / "partition.json", partition_to_json(plan));
  io::write_text(dir / "census.txt", table);
  if (reference) io::write_text(dir / "graph.json", g.to_json());

  std::vector<std::string> mismatches;
  if (reference) mismatches = census_mismatches(report.instances);
  json j{{"command", "analyze"},
         {"out", dir.generic_string()},
         {"nodes", g.size()},
         {"reference", reference},
         {"census_matches", mismatches.empty()},
         {"mismatches", mismatches},
         {"cvf_crossings", plan.cvf_crossings},
         {"cvf_crossings_unsplit", plan.cvf_crossings_unsplit},
         {"cve_cvd_share", report.cve_cvd_share}};
  std::string text = table;
  if (reference) {
    text += mismatches.empty() ? "census matches the published table\n" : "census differs:\n";
    for (const auto& m : mismatches) text += "  " + m + "\n";
  }
  emit(out, s.json_out(), j, text);
  return mismatches.empty() ? 0 : 1;
}

struct ScheduleRun {
  ScheduleGraph graph;
  Timeline timeline;
};

ScheduleRun simulate(const Profile& p) {
  ScheduleRun r{build_dependency_graph(p.stages, p.extern_model), {}};
  r.timeline = simulate_schedule(r.graph, p.frames);
  const TimelineCheck c = check_timeline(r.graph, r.timeline);
  if (!c.exclusive || !c.deps_safe) {
    throw InternalError("simulated timeline violates its invariants: " + c.violations.front());
  }
  return r;
}

int cmd_schedule(const Settings& s, const Flags& f, std::ostream& out) {
  Profile profile;
  std::optional<Profile> baseline;
  if (s.reference()) {
    profile = reference_profile();
    baseline = cpu_only_profile();
  } else if (auto path = s.path(f.profile, "profile")) {
    profile = profile_from_json(io::read_text(*path));
  } else {
    throw UsageError("schedule needs --reference or --profile <file>");
  }
  if (auto path = s.path(f.baseline, "baseline")) baseline = profile_from_json(io::read_text(*path));
  if (f.frames) profile.frames = *f.frames;
  if (profile.frames == 0) throw UsageError("--frames must be at least 1");

  const ScheduleRun run = simulate(profile);
  const Timeline& t = run.timeline;
  const std::size_t steady = t.steady_frame();
  const std::int64_t span = t.frame_span(steady);

  Profile serial = profile;
  serial.stages = serial_placement(profile.stages);
  serial.extern_model = {};
  const std::int64_t serial_span = simulate(serial).timeline.frame_span(steady);

  json hidden = json::object();
  bool has_cvf = false;
  for (const auto& st : profile.stages) {
    if (st.name.rfind("CVF", 0) == 0) has_cvf = true;
    hidden[st.name] = overlap_hidden_fraction(t, st.name);
  }
  if (has_cvf) hidden["CVF"] = overlap_hidden_fraction(t, "CVF");
  const double share = extern_overhead_share(t);
  const double speedup_serial = span > 0 ? static_cast<double>(serial_span) / static_cast<double>(span) : 1.0;

  json summary{{"frames", t.frames},
               {"steady_frame", steady},
               {"makespan_us", span},
               {"serial_makespan_us", serial_span},
               {"speedup_vs_serial", speedup_serial},
               {"overhead_share", share},
               {"overhead_per_frame_us", t.overhead_per_handoff * static_cast<std::int64_t>(t.handoffs_per_frame)},
               {"hidden_fraction", hidden}};
  std::ostringstream text;
  text << "steady-state frame " << steady << " makespan: " << span << " us\n";
  if (has_cvf) text << "CVF hidden fraction: " << fmt(hidden["CVF"].get<double>()) << "\n";
  for (const auto& st : profile.stages) {
    text << "  " << st.name << " (" << to_string(st.placement) << ") hidden " << fmt(hidden[st.name].get<double>())
         << "\n";
  }
  text << "extern overhead share: " << fmt(share) << "\n";
  text << "speedup vs serial placement: " << fmt(speedup_serial, 2) << "x\n";
  if (baseline) {
    const ScheduleRun b = simulate(*baseline);
    const std::int64_t bspan = b.timeline.frame_span(b.timeline.steady_frame());
    const double sp = span > 0 ? static_cast<double>(bspan) / static_cast<double>(span) : 1.0;
    summary["baseline_makespan_us"] = bspan;
    summary["speedup_vs_baseline"] = sp;
    text << "speedup vs baseline profile: " << fmt(sp, 1) << "x\n";
  }

  const fs::path dir = s.out_dir();
  io::write_text(dir / "timeline.json", timeline_to_json(t));
  io::write_text(dir / "gantt.svg", timeline_to_svg(t));
  io::write_text(dir / "summary.json", summary.dump(2) + "\n");
  summary["command"] = "schedule";
  summary["out"] = dir.generic_string();
  emit(out, s.json_out(), summary, text.str());
  return 0;
}

void add_common(CLI::App* c, Flags& f) {
  c->add_option("--config", f.config, "JSON file with default settings for this command");
  c->add_option("--seed", f.seed, "Seed for synthetic models and data");
  c->add_flag("--json", f.json_out, "Machine-readable summary on stdout");
  c->add_option("--out", f.out, "Output directory (default $FADEC_OUT_DIR/<command>)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FPGA co-design depth estimation toolkit", args.empty() ? "fadec" : args[0]};
  app.require_subcommand(1);
  Flags f;

  auto* mm = app.add_subcommand("make-model", "Write a seeded random model");
  add_common(mm, f);

  auto* ms = app.add_subcommand("make-scene", "Write a synthetic scene");
  add_common(ms, f);
  ms->add_option("--frames", f.frames, "Number of frames");
  ms->add_flag("--noise", f.noise, "Noise images instead of a textured plane");
  ms->add_option("--mean", f.mean, "Noise mean");
  ms->add_option("--stddev", f.stddev, "Noise standard deviation");

  auto* cal = app.add_subcommand("calibrate", "Calibrate activation exponents");
  add_common(cal, f);
  cal->add_option("--model", f.model, "Model directory (default: seeded random model)");
  cal->add_option("--scene", f.scene, "Scene directory with calibration frames");
  cal->add_option("--count", f.count, "Number of synthetic noise images");
  cal->add_option("--mean", f.mean, "Synthetic image mean");
  cal->add_option("--stddev", f.stddev, "Synthetic image standard deviation");
  cal->add_option("--alpha", f.alpha, "Clip rate");

  auto* inf = app.add_subcommand("infer", "Run depth inference on a scene");
  add_common(inf, f);
  inf->add_option("--model", f.model, "Model directory (default: seeded random model)");
  inf->add_option("--scene", f.scene, "Scene directory (default: synthetic scene)");
  inf->add_option("--frames", f.frames, "Frames of the default synthetic scene");
  inf->add_option("--mode", f.mode, "float or quant");
  inf->add_option("--quant", f.quant, "Quantization manifest (default: calibrate on matching noise)");
  inf->add_option("--count", f.count, "Noise images for on-the-fly calibration");
  inf->add_option("--alpha", f.alpha, "Clip rate for on-the-fly calibration");
  inf->add_option("--budget", f.budget, "Allowed relative degradation");

  auto* an = app.add_subcommand("analyze", "Operator census and HW/SW partition");
  add_common(an, f);
  an->add_flag("--reference", f.reference, "Trace the built-in reference pipeline");
  an->add_option("--graph", f.graph, "Operator graph JSON");

  auto* sc = app.add_subcommand("schedule", "Simulate the PL/CPU schedule");
  add_common(sc, f);
  sc->add_flag("--reference", f.reference, "Use the built-in reference profile");
  sc->add_option("--profile", f.profile, "Profile JSON");
  sc->add_option("--baseline", f.baseline, "Profile to compare against");
  sc->add_option("--frames", f.frames, "Frames to simulate");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kValidation);
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    const Settings s(f, cmd->get_name());
    if (cmd == mm) return cmd_make_model(s, out);
    if (cmd == ms) return cmd_make_scene(s, f, out);
    if (cmd == cal) return cmd_calibrate(s, f, out, err);
    if (cmd == inf) return cmd_infer(s, f, out);
    if (cmd == an) return cmd_analyze(s, f, out);
    return cmd_schedule(s, f, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kIo);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kInternal);
  }
}

}  // namespace fadec::cli
