#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

// Inner loops of the data-parallel operators. Every entry has a portable
// scalar reference and, where the build and CPU allow, an AVX2 variant.
// Variants are bit-exact with the reference: float kernels vectorize across
// independent outputs and keep each output's accumulation order, and the
// build disables FMA contraction so mul+add rounds identically everywhere.

namespace fadec::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

struct KernelTable {
  Isa isa;

  /// y[i] += a * x[i * x_stride] for i in [0, n).
  void (*axpy_f32)(float a, const float* x, std::size_t x_stride, float* y, std::size_t n);

  /// y[i] += int64(a) * x[i * x_stride], exact 64-bit products.
  void (*axpy_i64)(std::int32_t a, const std::int32_t* x, std::size_t x_stride, std::int64_t* y,
                   std::size_t n);

  /// acc[i] += a[i] * b[i].
  void (*mul_acc_f32)(const float* a, const float* b, float* acc, std::size_t n);

  /// Bilinear four-tap gather of one h x w plane at `n` (row, col) grid
  /// points stored interleaved in `grid`. Taps outside the plane read 0.
  void (*grid_sample_plane)(const float* src, std::size_t h, std::size_t w, const float* grid,
                            float* dst, std::size_t n);
};

const KernelTable& scalar_table();

/// Null when the AVX2 variants were not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();

bool cpu_supports_avx2();

/// Table used by the operators: a ScopedIsa override on this thread if any,
/// else the FADEC_ISA environment variable (scalar|avx2|auto), else the best
/// table the CPU supports.
const KernelTable& active();

/// Pins the kernel table for the current thread, e.g. to compare variants.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa);
  ~ScopedIsa();
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  const KernelTable* previous_;
};

}  // namespace fadec::kernels
