#include <doctest.h>

#include <cstring>

#include "fadec/kernels/kernels.hpp"
#include "fadec/mvs/cost_volume.hpp"
#include "fadec/ops/conv.hpp"
#include "fadec/ops/resample.hpp"
#include "oracles.hpp"

using namespace fadec;
using kernels::Isa;

namespace {

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

std::vector<float> random_floats(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

}  // namespace

TEST_CASE("ISA names") {
  CHECK(kernels::isa_name(Isa::kScalar) == "scalar");
  CHECK(kernels::parse_isa("avx2") == Isa::kAvx2);
  CHECK_FALSE(kernels::parse_isa("neon").has_value());
  CHECK(kernels::scalar_table().isa == Isa::kScalar);
  {
    kernels::ScopedIsa pin(Isa::kScalar);
    CHECK(kernels::active().isa == Isa::kScalar);
  }
}

TEST_CASE("AVX2 kernels are bit-exact with the scalar reference") {
  const kernels::KernelTable* avx = kernels::avx2_table();
  if (avx == nullptr) {
    MESSAGE("AVX2 variants unavailable on this build or CPU; equivalence not exercised");
    return;
  }
  const auto& ref = kernels::scalar_table();
  Rng rng(21);

  SUBCASE("axpy_f32") {
    for (int n = 0; n < 300; ++n) {
      const std::size_t len = std::size_t(rng.integer(0, 70));
      const std::size_t stride = std::size_t(rng.integer(1, 3));
      const auto x = random_floats(rng, len * stride + 1);
      auto y1 = random_floats(rng, len), y2 = y1;
      const float a = static_cast<float>(rng.uniform(-3, 3));
      ref.axpy_f32(a, x.data(), stride, y1.data(), len);
      avx->axpy_f32(a, x.data(), stride, y2.data(), len);
      REQUIRE(same_bits(y1, y2));
    }
  }
  SUBCASE("axpy_i64") {
    for (int n = 0; n < 300; ++n) {
      const std::size_t len = std::size_t(rng.integer(0, 70));
      const std::size_t stride = std::size_t(rng.integer(1, 3));
      std::vector<std::int32_t> x(len * stride + 1);
      for (auto& v : x) v = static_cast<std::int32_t>(rng.integer(INT32_MIN, INT32_MAX));
      std::vector<std::int64_t> y1(len);
      for (auto& v : y1) v = rng.integer(-(1LL << 60), 1LL << 60);
      auto y2 = y1;
      const auto a = static_cast<std::int32_t>(rng.integer(-128, 127));
      ref.axpy_i64(a, x.data(), stride, y1.data(), len);
      avx->axpy_i64(a, x.data(), stride, y2.data(), len);
      REQUIRE(y1 == y2);
    }
  }
  SUBCASE("mul_acc_f32") {
    for (int n = 0; n < 300; ++n) {
      const std::size_t len = std::size_t(rng.integer(0, 70));
      const auto a = random_floats(rng, len), b = random_floats(rng, len);
      auto y1 = random_floats(rng, len), y2 = y1;
      ref.mul_acc_f32(a.data(), b.data(), y1.data(), len);
      avx->mul_acc_f32(a.data(), b.data(), y2.data(), len);
      REQUIRE(same_bits(y1, y2));
    }
  }
  SUBCASE("grid_sample_plane") {
    for (int n = 0; n < 300; ++n) {
      const std::size_t h = std::size_t(rng.integer(1, 12)), w = std::size_t(rng.integer(1, 12));
      const auto src = random_floats(rng, h * w);
      const std::size_t pts = std::size_t(rng.integer(0, 40));
      std::vector<float> g(2 * pts);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double extent = static_cast<double>(i % 2 == 0 ? h : w);
        g[i] = rng.chance(0.05) ? (rng.chance(0.5) ? -1e6f : 1e6f)
                                : static_cast<float>(rng.uniform(-3.0, extent + 2.0));
      }
      std::vector<float> y1(pts), y2(pts);
      ref.grid_sample_plane(src.data(), h, w, g.data(), y1.data(), pts);
      avx->grid_sample_plane(src.data(), h, w, g.data(), y2.data(), pts);
      REQUIRE(same_bits(y1, y2));
    }
  }
}

TEST_CASE("operators agree across kernel tables") {
  if (kernels::avx2_table() == nullptr) return;
  Rng rng(22);
  const std::pair<int, int> pairs[] = {{1, 1}, {3, 1}, {3, 2}, {5, 1}, {5, 2}};
  for (int n = 0; n < 25; ++n) {
    const auto [k, st] = pairs[n % 5];
    const ConvSpec spec = ConvSpec::make(k, st, 4, 3);
    const FTensor x = oracle::random_tensor(rng, {4, 11, 13});
    const FTensor w = oracle::random_tensor(rng, {3, 4, std::size_t(k), std::size_t(k)});
    const FTensor b = oracle::random_tensor(rng, {3});
    const FTensor s = oracle::random_tensor(rng, {3}, 0.5, 1.5);
    const QTensor qx = oracle::random_qtensor(rng, {4, 11, 13}, 16, 8, 32767);
    const QTensor qw = oracle::random_qtensor(rng, {3, 4, std::size_t(k), std::size_t(k)}, 8, 6, 127);
    const QTensor qb = oracle::random_qtensor(rng, {3}, 32, 14, 100000);
    const QTensor qs = oracle::random_qtensor(rng, {3}, 8, 7, 127);
    std::vector<float> g;
    for (int i = 0; i < 11 * 13; ++i) {
      g.push_back(static_cast<float>(rng.uniform(-2, 12)));
      g.push_back(static_cast<float>(rng.uniform(-2, 14)));
    }
    const Grid grid(11, 13, g);
    const FTensor other = oracle::random_tensor(rng, {4, 11, 13});

    FTensor f1, f2, g1, g2, c1, c2;
    QTensor q1, q2;
    {
      kernels::ScopedIsa pin(Isa::kScalar);
      f1 = conv2d_float(x, spec, w, b, s);
      q1 = conv2d_quant(qx, spec, qw, qb, qs, 20);
      g1 = grid_sample(x, grid);
      c1 = correlate(x, other);
    }
    {
      kernels::ScopedIsa pin(Isa::kAvx2);
      f2 = conv2d_float(x, spec, w, b, s);
      q2 = conv2d_quant(qx, spec, qw, qb, qs, 20);
      g2 = grid_sample(x, grid);
      c2 = correlate(x, other);
    }
    CHECK(f1 == f2);
    CHECK(q1 == q2);
    CHECK(g1 == g2);
    CHECK(c1 == c2);
  }
}
