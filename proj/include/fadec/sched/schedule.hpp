#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fadec {

enum class Resource { kPL, kCPU };
std::string_view to_string(Resource r);
/// Throws ConfigError for anything but "PL" or "CPU".
Resource parse_resource(std::string_view s);

/// Dependency on `stage` of the same frame (offset 0) or the previous
/// frame (offset 1).
struct StageDep {
  std::string stage;
  int offset = 0;
};

struct StageProfile {
  std::string name;
  Resource placement = Resource::kPL;
  std::int64_t latency_us = 0;
  std::vector<StageDep> deps;
};

struct Handoff {
  std::string from;
  std::string to;
};

/// PL<->CPU communication: every listed dependency edge costs overhead_us
/// of delay between the producer's end and the consumer's start.
struct ExternModel {
  std::int64_t overhead_us = 0;
  std::vector<Handoff> handoffs;
};

struct Profile {
  std::vector<StageProfile> stages;
  ExternModel extern_model;
  std::size_t frames = 4;
};

/// {"frames", "stages":[{"name","placement","latency_us","deps":[{"stage","offset"}]}],
///  "extern":{"overhead_us","handoffs":[{"from","to"}]}}. A dep may also be
/// a bare stage name (offset 0). Throws ParseError naming the field.
Profile profile_from_json(std::string_view text);
std::string profile_to_json(const Profile& p);

/// Co-design pipeline: 278 ms frames, 4.7 ms of handoff overhead per frame,
/// CVF-prep covering 93% of CVF latency under FE and FS.
Profile reference_profile();
/// The same stages executed on the CPU alone (16.744 s per frame).
Profile cpu_only_profile();

/// Validated stage graph with dependencies resolved to stage indices.
struct ScheduleGraph {
  struct Edge {
    std::size_t from = 0;
    std::size_t to = 0;
    int offset = 0;
    bool handoff = false;
  };
  std::vector<StageProfile> stages;
  std::vector<Edge> edges;
  std::int64_t overhead_us = 0;

  std::optional<std::size_t> index_of(std::string_view name) const;
};

/// Checks unique names, known dependency targets, offsets in {0, 1},
/// non-negative latencies and overhead, and an acyclic same-frame graph.
/// When both endpoint stages exist the following are enforced:
/// CVF-final depends on FS, CL depends on hidden-correction, and CVF-prep
/// does not reach FS through same-frame dependencies. Each handoff must
/// name an existing dependency edge between stages on different resources.
/// Throws ConfigError; a cycle is reported as "a -> b -> ... -> a".
ScheduleGraph build_dependency_graph(const std::vector<StageProfile>& stages,
                                     const ExternModel& extern_model = {});

struct Event {
  std::string stage;
  std::size_t stage_index = 0;
  std::size_t frame = 0;
  Resource resource = Resource::kPL;
  std::int64_t start = 0;
  std::int64_t end = 0;
};

struct Timeline {
  std::vector<Event> events;  ///< in scheduling order
  std::size_t frames = 0;
  std::int64_t overhead_per_handoff = 0;
  std::size_t handoffs_per_frame = 0;

  /// Frame 2 when at least three frames were simulated, else the last one.
  std::size_t steady_frame() const;
  /// max end - min start over the frame's events.
  std::int64_t frame_span(std::size_t frame) const;
  std::int64_t makespan() const;
  std::int64_t overhead_total() const;
};

/// Two-resource list scheduling. Repeatedly starts the job (frame, stage)
/// whose dependencies are all scheduled and whose earliest start
/// max(dependency end [+ overhead on a handoff edge], resource free time)
/// is smallest; ties go to the lower frame, then the earlier declared stage.
Timeline simulate_schedule(const ScheduleGraph& g, std::size_t frames);

/// Fraction of the busy time of `stage` in `frame` during which the other
/// resource is also busy, counted within that frame's span. `stage` may
/// name a group: "CVF" covers every stage called "CVF-..." too. Throws
/// QueryError when no stage matches. Defaults to the steady-state frame.
double overlap_hidden_fraction(const Timeline& t, std::string_view stage,
                               std::optional<std::size_t> frame = std::nullopt);

/// Handoff overhead of one frame divided by the steady-state frame span.
double extern_overhead_share(const Timeline& t);

/// Every stage on the CPU, no handoff overhead.
std::vector<StageProfile> serial_placement(const std::vector<StageProfile>& stages);

struct TimelineCheck {
  bool exclusive = true;    ///< no overlap on a resource
  bool deps_safe = true;    ///< every start after its dependencies (+ overhead)
  std::vector<std::string> violations;
};
TimelineCheck check_timeline(const ScheduleGraph& g, const Timeline& t);

std::string timeline_to_json(const Timeline& t);
/// Two-lane Gantt chart (PL above CPU), one box per event.
std::string timeline_to_svg(const Timeline& t);

}  // namespace fadec
