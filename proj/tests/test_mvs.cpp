#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>

#include <Eigen/Geometry>

#include "fadec/core/error.hpp"
#include "fadec/core/tensor_io.hpp"
#include "fadec/mvs/calibration.hpp"
#include "fadec/mvs/cost_volume.hpp"
#include "fadec/mvs/geometry.hpp"
#include "fadec/mvs/keyframe.hpp"
#include "fadec/mvs/pipeline.hpp"
#include "fadec/mvs/scene.hpp"
#include "fadec/ops/activation.hpp"
#include "fadec/ops/norm.hpp"
#include "fadec/workload/analyzer.hpp"
#include "oracles.hpp"

using namespace fadec;
namespace fs = std::filesystem;

namespace {

Pose translated(double x, double y, double z) { return Pose::from_rt(Eigen::Matrix3d::Identity(), {x, y, z}); }

Pose rotated_z(double angle) {
  return Pose::from_rt(Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix(),
                       Eigen::Vector3d::Zero());
}

PipelineConfig small_config() {
  PipelineConfig c;
  c.height = 32;
  c.width = 64;
  c.hypotheses = 8;
  return c;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fadec_mvs_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("Pose validation") {
  CHECK_NOTHROW(Pose(Eigen::Matrix4d::Identity()));
  Eigen::Matrix4d scaled = Eigen::Matrix4d::Identity();
  scaled(0, 0) = 2.0;
  CHECK_THROWS_AS(Pose{scaled}, InvalidData);
  Eigen::Matrix4d bottom = Eigen::Matrix4d::Identity();
  bottom(3, 0) = 0.5;
  CHECK_THROWS_AS(Pose{bottom}, InvalidData);
  Eigen::Matrix4d mirror = Eigen::Matrix4d::Identity();
  mirror(2, 2) = -1.0;
  CHECK_THROWS_AS(Pose{mirror}, InvalidData);

  const Pose p = Pose::from_rt(Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitY()).toRotationMatrix(), {1, 2, 3});
  CHECK((p.matrix() * p.inverse().matrix()).isApprox(Eigen::Matrix4d::Identity(), 1e-12));
  const auto rm = p.row_major();
  CHECK(Pose::from_row_major(rm).matrix() == p.matrix());
}

TEST_CASE("pose_distance") {
  CHECK(pose_distance(Pose(), translated(3, 4, 0), 1.0) == doctest::Approx(5.0));
  CHECK(pose_distance(Pose(), rotated_z(std::numbers::pi / 2), 2.0) == doctest::Approx(std::numbers::pi));
  CHECK(pose_distance(translated(1, 0, 0), translated(1, 0, 0), 1.0) == 0.0);
}

TEST_CASE("warp grid") {
  const Intrinsics k = Intrinsics::simple(40.0, 31.5, 15.5);
  const std::size_t h = 32, w = 64;

  SUBCASE("identical cameras map every pixel to itself") {
    const Pose p = translated(0.2, -0.1, 0.4);
    const Grid g = build_warp_grid(p, p, k, 2.0, h, w);
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        REQUIRE(g.row(r, c) == doctest::Approx(double(r)).epsilon(1e-5));
        REQUIRE(g.col(r, c) == doctest::Approx(double(c)).epsilon(1e-5));
      }
    }
  }
  SUBCASE("moving the source forward scales about the principal point") {
    const double d = 4.0, tz = 1.0;
    const Grid g = build_warp_grid(translated(0, 0, tz), Pose(), k, d, h, w);
    const double scale = d / (d - tz);
    for (std::size_t r = 0; r < h; r += 5) {
      for (std::size_t c = 0; c < w; c += 7) {
        CHECK(g.row(r, c) == doctest::Approx(15.5 + (double(r) - 15.5) * scale).epsilon(1e-5));
        CHECK(g.col(r, c) == doctest::Approx(31.5 + (double(c) - 31.5) * scale).epsilon(1e-5));
      }
    }
  }
  SUBCASE("forward then backward projection returns to the pixel") {
    Rng rng(31);
    for (int n = 0; n < 200; ++n) {
      const Pose a = Pose::from_rt(
          Eigen::AngleAxisd(rng.uniform(-0.2, 0.2), Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), 1).normalized())
              .toRotationMatrix(),
          {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)});
      const Pose b = translated(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
      const double r = rng.uniform(0, 31), c = rng.uniform(0, 63), d = rng.uniform(1.0, 8.0);
      const Projection fwd = project_pixel(a, b, k, r, c, d);
      REQUIRE(fwd.depth > 0);
      const Projection back = project_pixel(b, a, k, fwd.row, fwd.col, fwd.depth);
      REQUIRE(std::abs(back.row - r) <= 1e-3);
      REQUIRE(std::abs(back.col - c) <= 1e-3);
      REQUIRE(std::abs(back.depth - d) <= 1e-3);
    }
  }
  SUBCASE("points behind the source camera read zero") {
    const Grid g = build_warp_grid(translated(0, 0, 5.0), Pose(), k, 2.0, h, w);
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) REQUIRE(g.row(r, c) == kBehindCamera);
    }
    const FTensor warped = grid_sample(FTensor::filled({2, h, w}, 1.0f), g);
    for (float v : warped.data()) REQUIRE(v == 0.0f);
  }
}

TEST_CASE("intrinsics scaling keeps pixel centers aligned") {
  const Intrinsics k = Intrinsics::simple(40.0, 31.5, 15.5);
  const Intrinsics half = scale_intrinsics(k, 2.0);
  CHECK(half.matrix()(0, 0) == 20.0);
  CHECK(half.matrix()(0, 2) == 15.5);
  CHECK(half.matrix()(1, 2) == 7.5);
  Eigen::Matrix3d bad = k.matrix();
  bad(0, 0) = -1.0;
  CHECK_THROWS(Intrinsics{bad});
}

TEST_CASE("depth hypotheses and sigmoid decoding") {
  const DepthHypotheses h = DepthHypotheses::uniform_inverse(3, 1.0, 4.0);
  REQUIRE(h.count() == 3);
  CHECK(h.values[0] == doctest::Approx(1.0));
  CHECK(h.values[1] == doctest::Approx(1.6));
  CHECK(h.values[2] == doctest::Approx(4.0));
  const DepthHypotheses many = DepthHypotheses::uniform_inverse(64, 0.5, 8.0);
  for (std::size_t i = 1; i < many.count(); ++i) {
    CHECK(many.values[i] > many.values[i - 1]);
    if (i >= 2) {
      const double d1 = 1 / many.values[i - 2] - 1 / many.values[i - 1];
      const double d2 = 1 / many.values[i - 1] - 1 / many.values[i];
      CHECK(d1 == doctest::Approx(d2));
    }
  }
  CHECK_THROWS_AS(DepthHypotheses::uniform_inverse(0, 1, 2), ConfigError);
  CHECK_THROWS_AS(DepthHypotheses::uniform_inverse(4, 2, 1), ConfigError);
  CHECK_THROWS_AS(DepthHypotheses::uniform_inverse(4, 0, 1), ConfigError);

  const FTensor d = depth_from_sigmoid(FTensor({3}, {0.0f, 1.0f, 0.5f}), 0.5, 8.0);
  CHECK(d[0] == doctest::Approx(8.0));
  CHECK(d[1] == doctest::Approx(0.5));
  CHECK(d[2] == doctest::Approx(1.0 / (0.5 * (2.0 - 0.125) + 0.125)));
}

TEST_CASE("keyframe buffer") {
  KeyframeOptions o;
  o.capacity = 2;
  KeyframeBuffer kb(o, {1, 2, 2});
  CHECK(kb.empty());
  CHECK_FALSE(kb.select(Pose()).has_value());
  CHECK(kb.latest() == nullptr);

  const FTensor f1 = FTensor::filled({1, 2, 2}, 1.0f), f2 = FTensor::filled({1, 2, 2}, 2.0f);
  kb.store(translated(0.1, 0, 0), f1);
  kb.store(translated(0.3, 0, 0), f2);
  auto s = kb.select(Pose());
  REQUIRE(s.has_value());
  CHECK(s->feature == f1);
  s = kb.select(translated(0.3, 0, 0));
  REQUIRE(s.has_value());
  CHECK(s->feature == f2);
  CHECK_FALSE(kb.select(translated(5, 0, 0)).has_value());

  SUBCASE("FIFO eviction") {
    kb.store(translated(0.5, 0, 0), FTensor::filled({1, 2, 2}, 3.0f));
    CHECK(kb.size() == 2);
    CHECK(kb.entries().front().feature == f2);
    CHECK(kb.latest()->feature[0] == 3.0f);
  }
  SUBCASE("ties go to the most recent entry") {
    KeyframeBuffer t(o);
    t.store(translated(0.1, 0, 0), f1);
    t.store(translated(-0.1, 0, 0), f2);
    CHECK(t.select(Pose())->feature == f2);
    const auto two = t.select_n(Pose(), 5);
    REQUIRE(two.size() == 2);
    CHECK(two[0].feature == f2);
  }
  SUBCASE("beyond the threshold nothing is admissible") {
    KeyframeBuffer t(o);
    t.store(translated(0.5, 0, 0), f1);
    CHECK_FALSE(t.select(Pose()).has_value());
    CHECK(t.select_n(Pose(), 3).empty());
  }
  CHECK_THROWS_AS(kb.store(Pose(), FTensor::zeros({2, 2, 2})), ShapeError);
}

TEST_CASE("cost volume fusion") {
  Rng rng(32);
  const FTensor a = oracle::random_tensor(rng, {4, 3, 5});

  SUBCASE("self-correlation is the channel mean of squares") {
    const FTensor c = correlate(a, a);
    REQUIRE(c.shape() == Shape{1, 3, 5});
    for (std::size_t p = 0; p < 15; ++p) {
      double m = 0;
      for (std::size_t ch = 0; ch < 4; ++ch) m += double(a[ch * 15 + p]) * a[ch * 15 + p];
      CHECK(c[p] == doctest::Approx(m / 4).epsilon(1e-6));
    }
  }
  SUBCASE("orthogonal features correlate to zero") {
    const FTensor x({2, 1, 3}, {1, 1, 1, 0, 0, 0}), y({2, 1, 3}, {0, 0, 0, 1, 1, 1});
    const FTensor c = correlate(x, y);
    for (float v : c.data()) CHECK(v == 0.0f);
  }
  SUBCASE("stacked volume matches the triple loop") {
    for (int n = 0; n < 20; ++n) {
      const std::size_t d = std::size_t(rng.integer(1, 6));
      std::vector<FTensor> warped;
      for (std::size_t i = 0; i < d; ++i) warped.push_back(oracle::random_tensor(rng, {4, 3, 5}));
      const FTensor vol = cost_volume_fusion(a, warped, DepthHypotheses::uniform_inverse(d, 0.5, 8.0));
      REQUIRE(vol.shape() == Shape{d, 3, 5});
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t p = 0; p < 15; ++p) {
          double m = 0;
          for (std::size_t ch = 0; ch < 4; ++ch) m += double(a[ch * 15 + p]) * warped[i][ch * 15 + p];
          REQUIRE(vol[i * 15 + p] == doctest::Approx(m / 4).epsilon(1e-5));
        }
      }
    }
  }
  SUBCASE("multiple measurement frames are summed before correlation") {
    std::vector<std::vector<FTensor>> warps(2);
    for (auto& m : warps) {
      for (int i = 0; i < 3; ++i) m.push_back(oracle::random_tensor(rng, {4, 3, 5}));
    }
    const FTensor vol = cost_volume_fusion(a, std::span<const std::vector<FTensor>>(warps),
                                           DepthHypotheses::uniform_inverse(3, 0.5, 8.0));
    for (std::size_t i = 0; i < 3; ++i) {
      const FTensor lin = correlate(a, warps[0][i]);
      const FTensor lin2 = correlate(a, warps[1][i]);
      for (std::size_t p = 0; p < 15; ++p) {
        CHECK(vol[i * 15 + p] == doctest::Approx(double(lin[p]) + lin2[p]).epsilon(1e-5));
      }
    }
  }
  SUBCASE("correlation is linear in the warped feature") {
    const FTensor u = oracle::random_tensor(rng, {4, 3, 5}), v = oracle::random_tensor(rng, {4, 3, 5});
    std::vector<float> sum(u.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = u[i] + v[i];
    const FTensor cu = correlate(a, u), cv = correlate(a, v), cs = correlate(a, FTensor(u.shape(), sum));
    for (std::size_t p = 0; p < 15; ++p) CHECK(cs[p] == doctest::Approx(double(cu[p]) + cv[p]).epsilon(1e-5));
  }
  const std::vector<FTensor> two{a, a};
  CHECK_THROWS_AS(cost_volume_fusion(a, two, DepthHypotheses::uniform_inverse(3, 0.5, 8.0)), ShapeError);
  CHECK_THROWS_AS(correlate(a, FTensor::zeros({4, 3, 4})), ShapeError);
}

TEST_CASE("hidden-state warp") {
  Rng rng(33);
  const LSTMState s{oracle::random_tensor(rng, {3, 4, 6}), oracle::random_tensor(rng, {3, 4, 6})};
  const LSTMState same = hidden_state_warp(s, Grid::identity(4, 6));
  CHECK(same.hidden == s.hidden);
  CHECK(same.cell == s.cell);
  const Grid away(4, 6, std::vector<float>(48, kBehindCamera));
  const LSTMState gone = hidden_state_warp(s, away);
  for (float v : gone.hidden.data()) CHECK(v == 0.0f);
  CHECK(gone.cell == s.cell);
  std::vector<float> g;
  for (int i = 0; i < 24; ++i) {
    g.push_back(float(rng.uniform(-1, 4)));
    g.push_back(float(rng.uniform(-1, 6)));
  }
  const Grid rnd(4, 6, g);
  CHECK(hidden_state_warp(s, rnd).hidden == grid_sample(s.hidden, rnd));
}

TEST_CASE("ConvLSTM step") {
  const std::size_t hid = 2, cin = 3, h = 4, w = 5;
  const auto weights = [&](Rng& rng, bool zero) {
    ConvLstmWeights cw;
    cw.gates.spec = ConvSpec::make(3, 1, cin + hid, 4 * hid);
    cw.gates.w = zero ? FTensor::zeros({4 * hid, cin + hid, 3, 3})
                      : oracle::random_tensor(rng, {4 * hid, cin + hid, 3, 3}, -0.3, 0.3);
    cw.gates.b = zero ? FTensor::zeros({4 * hid}) : oracle::random_tensor(rng, {4 * hid});
    cw.gates.s = zero ? FTensor::filled({4 * hid}, 1.0f) : oracle::random_tensor(rng, {4 * hid}, 0.5, 1.5);
    cw.ln_gates.gamma = zero ? FTensor::filled({4 * hid}, 1.0f) : oracle::random_tensor(rng, {4 * hid}, 0.5, 1.5);
    cw.ln_gates.beta = zero ? FTensor::zeros({4 * hid}) : oracle::random_tensor(rng, {4 * hid}, -0.2, 0.2);
    cw.ln_cell.gamma = zero ? FTensor::filled({hid}, 1.0f) : oracle::random_tensor(rng, {hid}, 0.5, 1.5);
    cw.ln_cell.beta = zero ? FTensor::zeros({hid}) : oracle::random_tensor(rng, {hid}, -0.2, 0.2);
    return cw;
  };
  Rng rng(34);

  SUBCASE("zero weights halve the cell") {
    const ConvLstmWeights cw = weights(rng, true);
    const FTensor x = oracle::random_tensor(rng, {cin, h, w});
    const auto [fresh, h0] = convlstm_step({}, x, cw);
    for (float v : fresh.cell.data()) CHECK(v == 0.0f);
    for (float v : h0.data()) CHECK(v == 0.0f);
    const LSTMState st{oracle::random_tensor(rng, {hid, h, w}), oracle::random_tensor(rng, {hid, h, w})};
    const auto [next, h1] = convlstm_step(st, x, cw);
    for (std::size_t i = 0; i < st.cell.size(); ++i) CHECK(next.cell[i] == 0.5f * st.cell[i]);
    const FTensor ln = layer_norm(next.cell, cw.ln_cell.gamma, cw.ln_cell.beta, cw.ln_cell.eps);
    for (std::size_t i = 0; i < h1.size(); ++i) CHECK(h1[i] == doctest::Approx(0.5 * elu(ln[i])).epsilon(1e-6));
  }
  SUBCASE("matches a straight-line evaluation") {
    for (int n = 0; n < 10; ++n) {
      const ConvLstmWeights cw = weights(rng, false);
      const FTensor x = oracle::random_tensor(rng, {cin, h, w});
      const LSTMState st{oracle::random_tensor(rng, {hid, h, w}), oracle::random_tensor(rng, {hid, h, w})};
      const auto [next, hout] = convlstm_step(st, x, cw);

      std::vector<float> stacked(x.data().begin(), x.data().end());
      stacked.insert(stacked.end(), st.hidden.data().begin(), st.hidden.data().end());
      const std::vector<double> z = oracle::conv(FTensor({cin + hid, h, w}, stacked), cw.gates.spec,
                                                 cw.gates.w, cw.gates.b, cw.gates.s);
      const auto norm = [](const std::vector<double>& v, const FTensor& g, const FTensor& b, double eps) {
        double m = 0, q = 0;
        for (double e : v) m += e;
        m /= double(v.size());
        for (double e : v) q += (e - m) * (e - m);
        const double sd = std::sqrt(q / double(v.size()) + eps);
        const std::size_t per = v.size() / g.size();
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - m) / sd * g[i / per] + b[i / per];
        return out;
      };
      const std::vector<double> zn = norm(z, cw.ln_gates.gamma, cw.ln_gates.beta, cw.ln_gates.eps);
      const std::size_t plane = hid * h * w;
      std::vector<double> c(plane), hh(plane);
      for (std::size_t i = 0; i < plane; ++i) {
        const double ig = sigmoid(zn[i]), fg = sigmoid(zn[plane + i]), gg = elu(zn[3 * plane + i]);
        c[i] = fg * st.cell[i] + ig * gg;
      }
      const std::vector<double> cn = norm(c, cw.ln_cell.gamma, cw.ln_cell.beta, cw.ln_cell.eps);
      for (std::size_t i = 0; i < plane; ++i) hh[i] = sigmoid(zn[2 * plane + i]) * elu(cn[i]);
      for (std::size_t i = 0; i < plane; ++i) {
        REQUIRE(std::abs(next.cell[i] - c[i]) <= 1e-5);
        REQUIRE(std::abs(hout[i] - hh[i]) <= 1e-5);
      }
      CHECK(next.hidden == hout);
    }
  }
  SUBCASE("one cell step records the CL operator mix") {
    ShapeBackend b;
    OpGraph g;
    b.set_trace(&g);
    b.set_process(Process::kCL);
    convlstm_cell(b, b.input(FTensor::zeros({cin, h, w}), "x"), b.input(FTensor::zeros({hid, h, w}), "h"),
                  b.input(FTensor::zeros({hid, h, w}), "c"));
    const InstanceMatrix m = count_operator_instances(g);
    const auto& row = m[std::size_t(Process::kCL)];
    CHECK(row[std::size_t(OpKind::kConv31)] == 1);
    CHECK(row[std::size_t(OpKind::kSigmoid)] == 3);
    CHECK(row[std::size_t(OpKind::kElu)] == 2);
    CHECK(row[std::size_t(OpKind::kAdd)] == 1);
    CHECK(row[std::size_t(OpKind::kMul)] == 3);
    CHECK(row[std::size_t(OpKind::kConcat)] == 1);
    CHECK(row[std::size_t(OpKind::kSlice)] == 4);
    CHECK(row[std::size_t(OpKind::kLayerNorm)] == 2);
    CHECK(g.size() == 17);
  }
  CHECK_THROWS_AS(convlstm_step({FTensor::zeros({1, h, w}), FTensor::zeros({1, h, w})},
                                FTensor::zeros({cin, h, w}), weights(rng, true)),
                  ShapeError);
}

TEST_CASE("pipeline") {
  const PipelineConfig cfg = small_config();
  const Model model = Model::random(cfg, 3);
  const Scene scene = make_synthetic_scene(cfg, 3, 5);

  FloatBackend b1(&model), b2(&model);
  const SequenceOutput r1 = run_sequence(b1, cfg, scene.frames);
  const SequenceOutput r2 = run_sequence(b2, cfg, scene.frames);
  REQUIRE(r1.depths.size() == 3);
  CHECK(r1.depths == r2.depths);
  CHECK_FALSE(r1.fused[0]);
  CHECK(r1.fused[1]);
  CHECK(r1.fused[2]);
  for (const FTensor& d : r1.depths) {
    CHECK(d.shape() == Shape{1, cfg.height, cfg.width});
    for (float v : d.data()) {
      REQUIRE(v >= cfg.depth_min - 1e-4);
      REQUIRE(v <= cfg.depth_max + 1e-3);
    }
  }

  SUBCASE("golden depth") {
    const fs::path golden = fs::path(FADEC_SOURCE_DIR) / "tests/golden/depth_small.ftz";
    if (std::getenv("FADEC_REGEN_GOLDEN") != nullptr) io::write_ftz(golden, r1.depths.back());
    const FTensor ref = io::read_ftz(golden);
    REQUIRE(ref.shape() == r1.depths.back().shape());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      REQUIRE(std::abs(ref[i] - r1.depths.back()[i]) <= 1e-4 * (1 + std::abs(ref[i])));
    }
  }
  SUBCASE("frame shape mismatch") {
    Frame bad = scene.frames[0];
    bad.image = FTensor::zeros({3, 32, 32});
    FloatBackend b(&model);
    CHECK_THROWS_AS(forward_frame(b, cfg, bad, make_keyframe_buffer(cfg), {}, {}), ShapeError);
  }
  SUBCASE("quantized execution tracks the float result") {
    const std::vector<Scene> calib{make_noise_scene(cfg, 3, 0.5, 0.2, 9)};
    const CalibrationResult cal = calibrate_model(model, calib);
    QuantBackend q(&model, cal.params);
    const SequenceOutput rq = run_sequence(q, cfg, scene.frames);
    double err = 0, ref = 0;
    for (std::size_t i = 0; i < rq.depths.back().size(); ++i) {
      const double d = rq.depths.back()[i] - r1.depths.back()[i];
      err += d * d;
      ref += double(r1.depths.back()[i]) * r1.depths.back()[i];
    }
    CHECK(err / ref < 0.01);
  }
}

TEST_CASE("traced reference frame reproduces the published census") {
  const OpGraph g = trace_reference_frame(PipelineConfig{});
  CHECK(g.size() == 547);
  const auto mism = census_mismatches(count_operator_instances(g));
  for (const auto& m : mism) MESSAGE(m);
  CHECK(mism.empty());
}

TEST_CASE("model persistence") {
  const PipelineConfig cfg = small_config();
  const Model m = Model::random(cfg, 11);
  CHECK(m.convs().size() == plan_layers(cfg).convs.size());
  const fs::path dir = temp_dir("model");
  m.save(dir);
  const Model back = Model::load(dir);
  CHECK(back.config().to_json() == cfg.to_json());
  REQUIRE(back.convs().size() == m.convs().size());
  for (const auto& [name, layer] : m.convs()) {
    CHECK(back.conv(name).w == layer.w);
    CHECK(back.conv(name).b == layer.b);
    CHECK(back.conv(name).s == layer.s);
    CHECK(back.conv(name).spec == layer.spec);
  }
  for (const auto& [name, layer] : m.norms()) CHECK(back.norm(name).gamma == layer.gamma);
  CHECK_THROWS_AS(m.conv("nope"), ConfigError);
  CHECK(Model::random(cfg, 11).conv("CL.gates").w == m.conv("CL.gates").w);
  fs::remove(dir / "manifest.json");
  CHECK_THROWS_AS(Model::load(dir), IoError);
  fs::remove_all(dir);
}

TEST_CASE("pipeline config JSON") {
  PipelineConfig c = small_config();
  c.keyframes.threshold = 0.5;
  const PipelineConfig back = PipelineConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(PipelineConfig::from_json("{}").to_json() == PipelineConfig{}.to_json());
  CHECK_THROWS_AS(PipelineConfig::from_json(R"({"height": 33})"), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json(R"({"height": "tall"})"), ParseError);
  CHECK_THROWS_AS(PipelineConfig::from_json("{"), ParseError);
}

TEST_CASE("scene persistence") {
  const PipelineConfig cfg = small_config();
  const Scene s = make_synthetic_scene(cfg, 2, 4);
  CHECK(s.has_depth());
  const fs::path dir = temp_dir("scene");
  save_scene(s, dir);
  const Scene back = load_scene(dir);
  REQUIRE(back.frames.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.frames[i].image == s.frames[i].image);
    CHECK(back.frames[i].pose.matrix() == s.frames[i].pose.matrix());
    CHECK(back.frames[i].intrinsics.matrix() == s.frames[i].intrinsics.matrix());
    CHECK(back.depths[i] == s.depths[i]);
  }
  io::write_text(dir / "frame_001.json", R"({"pose": [1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1], "intrinsics": [1,2]})");
  try {
    load_scene(dir);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("intrinsics") != std::string::npos);
  }
  CHECK_THROWS_AS(load_scene(dir / "missing"), IoError);
  fs::remove_all(dir);

  const Scene noise = make_noise_scene(cfg, 2, 0.5, 0.2, 1);
  CHECK_FALSE(noise.has_depth());
  double m = 0;
  for (float v : noise.frames[0].image.data()) m += v;
  CHECK(m / double(noise.frames[0].image.size()) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("calibration") {
  const PipelineConfig cfg = small_config();
  const Model model = Model::random(cfg, 12);
  const std::vector<Scene> scenes{make_noise_scene(cfg, 2, 0.5, 0.2, 2)};
  const CalibrationResult r = calibrate_model(model, scenes);
  CHECK(r.frames == 2);
  CHECK(r.params.exps.count("param/CL.gates/w") == 1);
  CHECK(r.params.exps.count("input/image") == 1);
  const QuantParams back = quant_params_from_json(quant_params_to_json(r.params));
  CHECK(back.exps == r.params.exps);
  CHECK(back.clip_rate == r.params.clip_rate);
  CHECK(back.act_bits == r.params.act_bits);
  CHECK_THROWS_AS(calibrate_model(model, std::vector<Scene>{}), UsageError);
  CHECK_THROWS_AS(quant_params_from_json("[1"), ParseError);

  QuantParams wide;
  wide.clip_rate = 1.0;
  const CalibrationResult full = calibrate_model(model, scenes, wide);
  for (const auto& [site, e] : full.params.exps) {
    if (site.rfind("param/", 0) == 0) continue;
    CHECK(e <= r.params.exps.at(site));
  }
}
