#include "fadec/sched/schedule.hpp"

namespace fadec {

// Same content as profiles/reference.json and profiles/cpu_only.json.
namespace {

constexpr const char* kReference =
    R"({"frames":4,"stages":[{"name":"FE","placement":"PL","latency_us":60000,"deps":[{"stage":"depth-out","offset":1}]},{"name":"FS","placement":"PL","latency_us":20000,"deps":[{"stage":"FE","offset":0}]},{"name":"CVF-prep","placement":"CPU","latency_us":55800,"deps":[{"stage":"KB-store","offset":1},{"stage":"depth-out","offset":1}]},{"name":"hidden-correction","placement":"CPU","latency_us":3000,"deps":[{"stage":"CL","offset":1},{"stage":"depth-out","offset":1}]},{"name":"CVF-final","placement":"CPU","latency_us":4200,"deps":[{"stage":"FS","offset":0},{"stage":"CVF-prep","offset":0}]},{"name":"KB-store","placement":"CPU","latency_us":400,"deps":[{"stage":"CVF-final","offset":0}]},{"name":"CVE","placement":"PL","latency_us":60000,"deps":[{"stage":"CVF-final","offset":0}]},{"name":"CL","placement":"PL","latency_us":8000,"deps":[{"stage":"CVE","offset":0},{"stage":"hidden-correction","offset":0}]},{"name":"layer-norms","placement":"CPU","latency_us":6000,"deps":[{"stage":"CL","offset":0}]},{"name":"CVD","placement":"PL","latency_us":95100,"deps":[{"stage":"layer-norms","offset":0}]},{"name":"bilinear-ups","placement":"CPU","latency_us":15000,"deps":[{"stage":"CVD","offset":0}]},{"name":"depth-out","placement":"CPU","latency_us":5000,"deps":[{"stage":"bilinear-ups","offset":0}]}],"extern":{"overhead_us":940,"handoffs":[{"from":"FS","to":"CVF-final"},{"from":"CVF-final","to":"CVE"},{"from":"CL","to":"layer-norms"},{"from":"layer-norms","to":"CVD"},{"from":"CVD","to":"bilinear-ups"}]}})";

constexpr const char* kCpuOnly =
    R"({"frames":4,"stages":[{"name":"FE","placement":"CPU","latency_us":4600000,"deps":[{"stage":"depth-out","offset":1}]},{"name":"FS","placement":"CPU","latency_us":1300000,"deps":[{"stage":"FE","offset":0}]},{"name":"CVF-prep","placement":"CPU","latency_us":640000,"deps":[{"stage":"KB-store","offset":1},{"stage":"depth-out","offset":1}]},{"name":"hidden-correction","placement":"CPU","latency_us":3000,"deps":[{"stage":"CL","offset":1},{"stage":"depth-out","offset":1}]},{"name":"CVF-final","placement":"CPU","latency_us":48000,"deps":[{"stage":"FS","offset":0},{"stage":"CVF-prep","offset":0}]},{"name":"KB-store","placement":"CPU","latency_us":400,"deps":[{"stage":"CVF-final","offset":0}]},{"name":"CVE","placement":"CPU","latency_us":4100000,"deps":[{"stage":"CVF-final","offset":0}]},{"name":"CL","placement":"CPU","latency_us":900000,"deps":[{"stage":"CVE","offset":0},{"stage":"hidden-correction","offset":0}]},{"name":"layer-norms","placement":"CPU","latency_us":6000,"deps":[{"stage":"CL","offset":0}]},{"name":"CVD","placement":"CPU","latency_us":5126600,"deps":[{"stage":"layer-norms","offset":0}]},{"name":"bilinear-ups","placement":"CPU","latency_us":15000,"deps":[{"stage":"CVD","offset":0}]},{"name":"depth-out","placement":"CPU","latency_us":5000,"deps":[{"stage":"bilinear-ups","offset":0}]}],"extern":{"overhead_us":0,"handoffs":[]}})";

}  // namespace

Profile reference_profile() { return profile_from_json(kReference); }
Profile cpu_only_profile() { return profile_from_json(kCpuOnly); }

}  // namespace fadec
