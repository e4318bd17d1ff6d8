#include "fadec/sched/schedule.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "fadec/core/error.hpp"

namespace fadec {

using nlohmann::json;

std::string_view to_string(Resource r) { return r == Resource::kPL ? "PL" : "CPU"; }

Resource parse_resource(std::string_view s) {
  if (s == "PL") return Resource::kPL;
  if (s == "CPU") return Resource::kCPU;
  throw ConfigError("unknown placement '" + std::string(s) + "' (expected PL or CPU)");
}

namespace {

const json& field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

template <typename T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": wrong type");
  }
}

std::int64_t get_us(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where + ": expected an integer number of microseconds");
  return j.get<std::int64_t>();
}

}  // namespace

Profile profile_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("profile: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("profile: expected an object");
  Profile p;
  if (auto it = j.find("frames"); it != j.end()) {
    const auto f = get_as<std::int64_t>(*it, "field 'frames'");
    if (f < 1) throw ParseError("field 'frames': must be at least 1");
    p.frames = static_cast<std::size_t>(f);
  }
  const json& stages = field(j, "stages", "profile");
  if (!stages.is_array()) throw ParseError("field 'stages': expected an array");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const std::string where = "field 'stages[" + std::to_string(i) + "]'";
    const json& s = stages[i];
    if (!s.is_object()) throw ParseError(where + ": expected an object");
    StageProfile sp;
    sp.name = get_as<std::string>(field(s, "name", where), where + ".name");
    try {
      sp.placement = parse_resource(get_as<std::string>(field(s, "placement", where), where + ".placement"));
    } catch (const ConfigError& e) {
      throw ParseError(where + ".placement: " + e.what());
    }
    sp.latency_us = get_us(field(s, "latency_us", where), where + ".latency_us");
    if (auto it = s.find("deps"); it != s.end()) {
      if (!it->is_array()) throw ParseError(where + ".deps: expected an array");
      for (const json& d : *it) {
        if (d.is_string()) {
          sp.deps.push_back({d.get<std::string>(), 0});
        } else if (d.is_object()) {
          StageDep dep;
          dep.stage = get_as<std::string>(field(d, "stage", where + ".deps"), where + ".deps.stage");
          if (auto o = d.find("offset"); o != d.end()) dep.offset = get_as<int>(*o, where + ".deps.offset");
          sp.deps.push_back(dep);
        } else {
          throw ParseError(where + ".deps: expected a stage name or {stage, offset}");
        }
      }
    }
    p.stages.push_back(std::move(sp));
  }
  if (auto it = j.find("extern"); it != j.end()) {
    if (!it->is_object()) throw ParseError("field 'extern': expected an object");
    p.extern_model.overhead_us = get_us(field(*it, "overhead_us", "field 'extern'"), "field 'extern.overhead_us'");
    if (auto h = it->find("handoffs"); h != it->end()) {
      if (!h->is_array()) throw ParseError("field 'extern.handoffs': expected an array");
      for (const json& e : *h) {
        const std::string where = "field 'extern.handoffs'";
        if (e.is_array() && e.size() == 2 && e[0].is_string() && e[1].is_string()) {
          p.extern_model.handoffs.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
        } else if (e.is_object()) {
          p.extern_model.handoffs.push_back({get_as<std::string>(field(e, "from", where), where + ".from"),
                                             get_as<std::string>(field(e, "to", where), where + ".to")});
        } else {
          throw ParseError(where + ": expected {from, to}");
        }
      }
    }
  }
  return p;
}

std::string profile_to_json(const Profile& p) {
  json stages = json::array();
  for (const auto& s : p.stages) {
    json deps = json::array();
    for (const auto& d : s.deps) deps.push_back({{"stage", d.stage}, {"offset", d.offset}});
    stages.push_back({{"name", s.name},
                      {"placement", std::string(to_string(s.placement))},
                      {"latency_us", s.latency_us},
                      {"deps", deps}});
  }
  json hs = json::array();
  for (const auto& h : p.extern_model.handoffs) hs.push_back({{"from", h.from}, {"to", h.to}});
  json j{{"frames", p.frames},
         {"stages", stages},
         {"extern", {{"overhead_us", p.extern_model.overhead_us}, {"handoffs", hs}}}};
  return j.dump(2) + "\n";
}

std::optional<std::size_t> ScheduleGraph::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].name == name) return i;
  }
  return std::nullopt;
}

namespace {

// Same-frame adjacency: preds[i] lists producers of stage i.
std::vector<std::vector<std::size_t>> same_frame_preds(const ScheduleGraph& g) {
  std::vector<std::vector<std::size_t>> preds(g.stages.size());
  for (const auto& e : g.edges) {
    if (e.offset == 0) preds[e.to].push_back(e.from);
  }
  return preds;
}

void check_acyclic(const ScheduleGraph& g) {
  const std::size_t n = g.stages.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& e : g.edges) {
    if (e.offset == 0) succ[e.from].push_back(e.to);
  }
  std::vector<int> color(n, 0);
  std::vector<std::size_t> stack;
  std::function<void(std::size_t)> visit = [&](std::size_t u) {
    color[u] = 1;
    stack.push_back(u);
    for (std::size_t v : succ[u]) {
      if (color[v] == 1) {
        auto it = std::find(stack.begin(), stack.end(), v);
        std::string cyc;
        for (; it != stack.end(); ++it) cyc += g.stages[*it].name + " -> ";
        throw ConfigError("dependency cycle: " + cyc + g.stages[v].name);
      }
      if (color[v] == 0) visit(v);
    }
    stack.pop_back();
    color[u] = 2;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (color[i] == 0) visit(i);
  }
}

bool has_edge(const ScheduleGraph& g, std::size_t from, std::size_t to, int offset) {
  return std::any_of(g.edges.begin(), g.edges.end(), [&](const ScheduleGraph::Edge& e) {
    return e.from == from && e.to == to && e.offset == offset;
  });
}

bool reaches(const std::vector<std::vector<std::size_t>>& preds, std::size_t target, std::size_t from) {
  // Is `from` an ancestor of `target`?
  std::vector<bool> seen(preds.size(), false);
  std::vector<std::size_t> work{target};
  while (!work.empty()) {
    const std::size_t u = work.back();
    work.pop_back();
    for (std::size_t p : preds[u]) {
      if (p == from) return true;
      if (!seen[p]) {
        seen[p] = true;
        work.push_back(p);
      }
    }
  }
  return false;
}

}  // namespace

ScheduleGraph build_dependency_graph(const std::vector<StageProfile>& stages, const ExternModel& ext) {
  ScheduleGraph g;
  g.stages = stages;
  if (ext.overhead_us < 0) throw ConfigError("extern overhead must be non-negative");
  g.overhead_us = ext.overhead_us;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    if (s.name.empty()) throw ConfigError("stage " + std::to_string(i) + " has an empty name");
    if (!index.emplace(s.name, i).second) throw ConfigError("duplicate stage name '" + s.name + "'");
    if (s.latency_us < 0) throw ConfigError("stage '" + s.name + "' has a negative latency");
  }
  for (std::size_t i = 0; i < stages.size(); ++i) {
    for (const auto& d : stages[i].deps) {
      auto it = index.find(d.stage);
      if (it == index.end()) {
        throw ConfigError("stage '" + stages[i].name + "' depends on unknown stage '" + d.stage + "'");
      }
      if (d.offset != 0 && d.offset != 1) {
        throw ConfigError("stage '" + stages[i].name + "' has frame offset " + std::to_string(d.offset) +
                          " on '" + d.stage + "' (expected 0 or 1)");
      }
      if (has_edge(g, it->second, i, d.offset)) {
        throw ConfigError("stage '" + stages[i].name + "' lists '" + d.stage + "' twice");
      }
      g.edges.push_back({it->second, i, d.offset, false});
    }
  }
  check_acyclic(g);

  for (const auto& h : ext.handoffs) {
    auto f = index.find(h.from);
    auto t = index.find(h.to);
    if (f == index.end() || t == index.end()) {
      throw ConfigError("handoff " + h.from + " -> " + h.to + " names an unknown stage");
    }
    if (stages[f->second].placement == stages[t->second].placement) {
      throw ConfigError("handoff " + h.from + " -> " + h.to + " does not cross between PL and CPU");
    }
    bool found = false;
    for (auto& e : g.edges) {
      if (e.from == f->second && e.to == t->second) {
        if (e.handoff) throw ConfigError("handoff " + h.from + " -> " + h.to + " listed twice");
        e.handoff = true;
        found = true;
      }
    }
    if (!found) throw ConfigError("handoff " + h.from + " -> " + h.to + " has no matching dependency");
  }

  const auto require = [&](const char* to, const char* from) {
    auto t = index.find(to);
    auto f = index.find(from);
    if (t == index.end() || f == index.end()) return;
    if (!has_edge(g, f->second, t->second, 0)) {
      throw ConfigError(std::string("missing mandatory edge ") + to + " <- " + from + " (same frame)");
    }
  };
  require("CVF-final", "FS");
  require("CL", "hidden-correction");
  auto prep = index.find("CVF-prep");
  auto fs = index.find("FS");
  if (prep != index.end() && fs != index.end() && reaches(same_frame_preds(g), prep->second, fs->second)) {
    throw ConfigError("CVF-prep must not wait for FS of the same frame");
  }
  return g;
}

std::size_t Timeline::steady_frame() const {
  if (frames == 0) throw QueryError("empty timeline");
  return frames >= 3 ? 2 : frames - 1;
}

std::int64_t Timeline::frame_span(std::size_t frame) const {
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto& e : events) {
    if (e.frame != frame) continue;
    lo = std::min(lo, e.start);
    hi = std::max(hi, e.end);
  }
  return hi >= lo ? hi - lo : 0;
}

std::int64_t Timeline::makespan() const {
  std::int64_t hi = 0;
  for (const auto& e : events) hi = std::max(hi, e.end);
  return hi;
}

std::int64_t Timeline::overhead_total() const {
  // Handoffs on previous-frame edges do not apply to frame 0; they are
  // counted per frame regardless, which matches steady-state accounting.
  return overhead_per_handoff * static_cast<std::int64_t>(handoffs_per_frame * frames);
}

Timeline simulate_schedule(const ScheduleGraph& g, std::size_t frames) {
  const std::size_t n = g.stages.size();
  Timeline t;
  t.frames = frames;
  t.overhead_per_handoff = g.overhead_us;
  for (const auto& e : g.edges) t.handoffs_per_frame += e.handoff ? 1 : 0;

  std::vector<std::vector<const ScheduleGraph::Edge*>> preds(n);
  for (const auto& e : g.edges) preds[e.to].push_back(&e);

  constexpr std::int64_t kUnscheduled = -1;
  std::vector<std::int64_t> end(n * frames, kUnscheduled);
  std::int64_t free_at[2] = {0, 0};
  const std::size_t total = n * frames;
  t.events.reserve(total);

  for (std::size_t step = 0; step < total; ++step) {
    std::size_t best = total;
    std::int64_t best_start = 0;
    for (std::size_t job = 0; job < total; ++job) {
      if (end[job] != kUnscheduled) continue;
      const std::size_t f = job / n;
      const std::size_t s = job % n;
      std::int64_t ready = 0;
      bool ok = true;
      for (const auto* e : preds[s]) {
        if (e->offset == 1 && f == 0) continue;
        const std::size_t dj = (f - static_cast<std::size_t>(e->offset)) * n + e->from;
        if (end[dj] == kUnscheduled) {
          ok = false;
          break;
        }
        ready = std::max(ready, end[dj] + (e->handoff ? g.overhead_us : 0));
      }
      if (!ok) continue;
      const std::int64_t start = std::max(ready, free_at[static_cast<int>(g.stages[s].placement)]);
      // Jobs are visited in (frame, declared order), so strict < keeps ties stable.
      if (best == total || start < best_start) {
        best = job;
        best_start = start;
      }
    }
    if (best == total) throw Error("schedule deadlock", ExitCode::kInternal);
    const std::size_t s = best % n;
    Event ev;
    ev.stage = g.stages[s].name;
    ev.stage_index = s;
    ev.frame = best / n;
    ev.resource = g.stages[s].placement;
    ev.start = best_start;
    ev.end = best_start + g.stages[s].latency_us;
    end[best] = ev.end;
    free_at[static_cast<int>(ev.resource)] = ev.end;
    t.events.push_back(std::move(ev));
  }
  return t;
}

namespace {

bool in_group(std::string_view stage, std::string_view group) {
  if (stage == group) return true;
  return stage.size() > group.size() && stage.substr(0, group.size()) == group && stage[group.size()] == '-';
}

std::int64_t overlap(std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
  return std::max<std::int64_t>(0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

double overlap_hidden_fraction(const Timeline& t, std::string_view stage, std::optional<std::size_t> frame) {
  const std::size_t f = frame.value_or(t.steady_frame());
  if (f >= t.frames) throw QueryError("frame " + std::to_string(f) + " was not simulated");
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto& e : t.events) {
    if (e.frame != f) continue;
    lo = std::min(lo, e.start);
    hi = std::max(hi, e.end);
  }
  std::int64_t busy = 0;
  std::int64_t hidden = 0;
  bool found = false;
  for (const auto& e : t.events) {
    if (e.frame != f || !in_group(e.stage, stage)) continue;
    found = true;
    busy += e.end - e.start;
    const std::int64_t s0 = std::max(e.start, lo);
    const std::int64_t s1 = std::min(e.end, hi);
    // Events on one resource never overlap, so the sum over them is the
    // measure of the union.
    for (const auto& o : t.events) {
      if (o.resource == e.resource) continue;
      hidden += overlap(s0, s1, o.start, o.end);
    }
  }
  if (!found) throw QueryError("no stage named '" + std::string(stage) + "' in the timeline");
  return busy > 0 ? static_cast<double>(hidden) / static_cast<double>(busy) : 0.0;
}

double extern_overhead_share(const Timeline& t) {
  const std::int64_t span = t.frame_span(t.steady_frame());
  if (span <= 0) return 0.0;
  return static_cast<double>(t.overhead_per_handoff * static_cast<std::int64_t>(t.handoffs_per_frame)) /
         static_cast<double>(span);
}

std::vector<StageProfile> serial_placement(const std::vector<StageProfile>& stages) {
  std::vector<StageProfile> out = stages;
  for (auto& s : out) s.placement = Resource::kCPU;
  return out;
}

TimelineCheck check_timeline(const ScheduleGraph& g, const Timeline& t) {
  TimelineCheck c;
  for (int r = 0; r < 2; ++r) {
    std::vector<const Event*> lane;
    for (const auto& e : t.events) {
      if (static_cast<int>(e.resource) == r) lane.push_back(&e);
    }
    // Zero-length events sort before a longer one sharing their start.
    std::sort(lane.begin(), lane.end(), [](const Event* a, const Event* b) {
      return std::tie(a->start, a->end) < std::tie(b->start, b->end);
    });
    for (std::size_t i = 1; i < lane.size(); ++i) {
      if (lane[i]->start < lane[i - 1]->end) {
        c.exclusive = false;
        c.violations.push_back(lane[i - 1]->stage + "#" + std::to_string(lane[i - 1]->frame) + " overlaps " +
                               lane[i]->stage + "#" + std::to_string(lane[i]->frame));
      }
    }
  }
  std::map<std::pair<std::size_t, std::size_t>, const Event*> by_job;
  for (const auto& e : t.events) by_job[{e.frame, e.stage_index}] = &e;
  for (const auto& e : t.events) {
    for (const auto& edge : g.edges) {
      if (edge.to != e.stage_index || (edge.offset == 1 && e.frame == 0)) continue;
      auto it = by_job.find({e.frame - static_cast<std::size_t>(edge.offset), edge.from});
      const std::int64_t need =
          it == by_job.end() ? std::numeric_limits<std::int64_t>::max()
                             : it->second->end + (edge.handoff ? g.overhead_us : 0);
      if (e.start < need) {
        c.deps_safe = false;
        c.violations.push_back(e.stage + "#" + std::to_string(e.frame) + " starts before " +
                               g.stages[edge.from].name + " is available");
      }
    }
  }
  return c;
}

std::string timeline_to_json(const Timeline& t) {
  json events = json::array();
  for (const auto& e : t.events) {
    events.push_back({{"stage", e.stage},
                      {"frame", e.frame},
                      {"resource", std::string(to_string(e.resource))},
                      {"start_us", e.start},
                      {"end_us", e.end}});
  }
  json spans = json::array();
  for (std::size_t f = 0; f < t.frames; ++f) spans.push_back(t.frame_span(f));
  json j{{"frames", t.frames},
         {"steady_frame", t.frames > 0 ? t.steady_frame() : 0},
         {"makespan_us", t.makespan()},
         {"frame_span_us", spans},
         {"overhead_per_handoff_us", t.overhead_per_handoff},
         {"handoffs_per_frame", t.handoffs_per_frame},
         {"overhead_total_us", t.overhead_total()},
         {"events", events}};
  return j.dump(2) + "\n";
}

std::string timeline_to_svg(const Timeline& t) {
  static const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"};
  constexpr int kLeft = 60, kLaneH = 40, kTop = 20, kWidth = 1200;
  const std::int64_t span = std::max<std::int64_t>(1, t.makespan());
  const double scale = static_cast<double>(kWidth - kLeft - 10) / static_cast<double>(span);
  std::ostringstream os;
  char buf[512];
  const int height = kTop + 2 * kLaneH + 40;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" font-family=\"sans-serif\" "
                "font-size=\"10\">\n",
                kWidth, height);
  os << buf;
  for (int r = 0; r < 2; ++r) {
    const int y = kTop + r * kLaneH;
    std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"%d\">%s</text>\n", y + kLaneH / 2 + 4,
                  r == 0 ? "PL" : "CPU");
    os << buf;
    std::snprintf(buf, sizeof buf, "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"#ccc\"/>\n", kLeft,
                  y + kLaneH, kWidth - 10, y + kLaneH);
    os << buf;
  }
  for (const auto& e : t.events) {
    const int r = static_cast<int>(e.resource);
    const double x = kLeft + static_cast<double>(e.start) * scale;
    const double w = static_cast<double>(e.end - e.start) * scale;
    const int y = kTop + r * kLaneH + 4;
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.2f\" y=\"%d\" width=\"%.2f\" height=\"%d\" fill=\"%s\" stroke=\"#222\" "
                  "stroke-width=\"0.5\"><title>%s frame %zu: %lld-%lld us</title></rect>\n",
                  x, y, w, kLaneH - 8, kPalette[e.frame % 6], e.stage.c_str(), e.frame,
                  static_cast<long long>(e.start), static_cast<long long>(e.end));
    os << buf;
    if (w > 6.0 * static_cast<double>(e.stage.size())) {
      std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%d\" fill=\"#fff\">%s</text>\n", x + 2,
                    y + kLaneH / 2, e.stage.c_str());
      os << buf;
    }
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\">0 us</text>\n", kLeft, height - 8);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" text-anchor=\"end\">%lld us</text>\n", kWidth - 10,
                height - 8, static_cast<long long>(span));
  os << buf << "</svg>\n";
  return os.str();
}

}  // namespace fadec
