#include <cstdlib>
#include <string>

#include "fadec/core/error.hpp"
#include "kernels_internal.hpp"

namespace fadec::kernels {
namespace {

thread_local const KernelTable* tls_override = nullptr;

const KernelTable& detect() {
  const char* env = std::getenv("FADEC_ISA");
  if (env != nullptr && *env != '\0' && std::string_view(env) != "auto") {
    auto isa = parse_isa(env);
    if (!isa) throw ConfigError(std::string("FADEC_ISA=") + env + " is not scalar|avx2|auto");
    if (*isa == Isa::kScalar) return scalar_table();
    if (const auto* t = avx2_table()) return *t;
    throw ConfigError("FADEC_ISA=avx2 but AVX2 is unavailable");
  }
  if (const auto* t = avx2_table()) return *t;
  return scalar_table();
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  return std::nullopt;
}

const KernelTable& scalar_table() { return scalar::kTable; }

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool has = __builtin_cpu_supports("avx2");
  return has;
#else
  return false;
#endif
}

const KernelTable* avx2_table() {
#if defined(FADEC_HAVE_AVX2)
  return cpu_supports_avx2() ? &avx2::kTable : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  if (tls_override != nullptr) return *tls_override;
  static const KernelTable& chosen = detect();
  return chosen;
}

ScopedIsa::ScopedIsa(Isa isa) : previous_(tls_override) {
  if (isa == Isa::kScalar) {
    tls_override = &scalar_table();
  } else {
    const auto* t = avx2_table();
    if (t == nullptr) throw ConfigError("AVX2 kernels unavailable on this build or CPU");
    tls_override = t;
  }
}

ScopedIsa::~ScopedIsa() { tls_override = previous_; }

}  // namespace fadec::kernels
