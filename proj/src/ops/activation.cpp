#include "fadec/ops/activation.hpp"

#include <algorithm>
#include <cmath>

#include "fadec/core/error.hpp"
#include "fadec/numerics/fixed_point.hpp"
#include <nlohmann/json.hpp>

namespace fadec {

FTensor relu(const FTensor& x) {
  std::vector<float> y(x.data().begin(), x.data().end());
  for (auto& v : y) v = std::max(v, 0.0f);
  return FTensor(x.shape(), std::move(y));
}

QTensor relu(const QTensor& x) {
  std::vector<std::int32_t> y(x.data().begin(), x.data().end());
  for (auto& v : y) v = std::max(v, 0);
  return QTensor(x.shape(), std::move(y), x.bits(), x.exp());
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }

namespace {

template <typename F>
FTensor map(const FTensor& x, F f) {
  std::vector<float> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = static_cast<float>(f(x[i]));
  return FTensor(x.shape(), std::move(y));
}

}  // namespace

FTensor sigmoid(const FTensor& x) { return map(x, [](double v) { return sigmoid(v); }); }
FTensor elu(const FTensor& x) { return map(x, [](double v) { return elu(v); }); }

std::string_view to_string(ActKind kind) { return kind == ActKind::kSigmoid ? "sigmoid" : "elu"; }

ActKind parse_act_kind(std::string_view name) {
  if (name == "sigmoid") return ActKind::kSigmoid;
  if (name == "elu") return ActKind::kElu;
  throw ParseError("unknown activation kind '" + std::string(name) + "'");
}

ActLut::ActLut(ActKind kind, std::size_t entries, double t, LutOptions opts)
    : kind_(kind), entries_(entries), t_(t), opts_(opts) {
  if (entries_ < 2) throw ConfigError("a lookup table needs at least 2 entries");
  if (!(t_ > 0.0)) throw ConfigError("lookup-table range must be positive");
  if (opts_.sigmoid_half && (kind_ != ActKind::kSigmoid || entries_ % 2 != 0)) {
    throw ConfigError("half tables need a sigmoid with an even entry count");
  }
  const double width = 2.0 * t_ / static_cast<double>(entries_);
  samples_.resize(entries_);
  for (std::size_t i = 0; i < entries_; ++i) {
    const double mid = -t_ + (static_cast<double>(i) + 0.5) * width;
    samples_[i] = kind_ == ActKind::kSigmoid ? sigmoid(mid) : elu(mid);
  }
  const auto quantize = [&](double v) {
    return static_cast<std::int32_t>(
        clip(static_cast<std::int64_t>(std::round(std::ldexp(v, opts_.out_exp))), opts_.out_bits));
  };
  const std::size_t first = opts_.sigmoid_half ? entries_ / 2 : 0;
  for (std::size_t i = first; i < entries_; ++i) stored_.push_back(quantize(samples_[i]));
}

std::int32_t ActLut::entry(std::size_t i) const {
  if (!opts_.sigmoid_half) return stored_[i];
  const std::size_t mid = entries_ / 2;
  if (i >= mid) return stored_[i - mid];
  // sigmoid(-x) = 1 - sigmoid(x): bucket i mirrors bucket entries-1-i.
  const std::int64_t one = std::int64_t{1} << opts_.out_exp;
  return static_cast<std::int32_t>(clip(one - stored_[mid - 1 - i], opts_.out_bits));
}

std::size_t ActLut::bucket(double x) const {
  const double clamped = std::clamp(x, -t_, t_);
  const double pos = std::floor((clamped + t_) * static_cast<double>(entries_) / (2.0 * t_));
  return std::min(static_cast<std::size_t>(std::max(pos, 0.0)), entries_ - 1);
}

std::int32_t ActLut::apply_real(double x) const {
  const double clamped = std::clamp(x, -t_, t_);
  if (kind_ == ActKind::kElu && clamped >= 0.0) {
    return static_cast<std::int32_t>(clip(
        static_cast<std::int64_t>(std::round(std::ldexp(clamped, opts_.out_exp))), opts_.out_bits));
  }
  return entry(bucket(clamped));
}

double ActLut::lookup(double x) const { return std::ldexp(apply_real(x), -opts_.out_exp); }

std::int32_t ActLut::apply(std::int32_t v) const {
  if (kind_ == ActKind::kElu && v >= 0) {
    // Identity branch in pure integer arithmetic.
    const double bound = std::floor(std::ldexp(t_, opts_.in_exp));
    const auto limit = static_cast<std::int64_t>(std::min(bound, 9.0e18));
    const std::int64_t c = std::min<std::int64_t>(v, limit);
    return static_cast<std::int32_t>(clip(rescale(c, opts_.in_exp, opts_.out_exp), opts_.out_bits));
  }
  return apply_real(std::ldexp(static_cast<double>(v), -opts_.in_exp));
}

double ActLut::error_bound() const {
  const double max_slope = kind_ == ActKind::kSigmoid ? 0.25 : 1.0;
  const double width = 2.0 * t_ / static_cast<double>(entries_);
  return max_slope * width / 2.0 + std::ldexp(1.0, -opts_.out_exp);
}

ActLut lut_build(ActKind kind, std::size_t entries, double t, LutOptions opts) {
  return ActLut(kind, entries, t, opts);
}

QTensor lut_apply(const ActLut& lut, const QTensor& x) {
  if (x.exp() != lut.in_exp()) {
    throw ConfigError("lookup table expects input exponent " + std::to_string(lut.in_exp()) +
                      ", got " + std::to_string(x.exp()));
  }
  std::vector<std::int32_t> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = lut.apply(x[i]);
  return QTensor(x.shape(), std::move(y), lut.out_bits(), lut.out_exp());
}

std::string lut_header_json(const ActLut& lut) {
  nlohmann::json j{{"kind", to_string(lut.kind())},
                   {"entries", lut.entries()},
                   {"t", lut.range()},
                   {"in_exp", lut.in_exp()},
                   {"out_exp", lut.out_exp()},
                   {"out_bits", lut.out_bits()},
                   {"half", lut.half()}};
  return j.dump();
}

QTensor lut_table_tensor(const ActLut& lut) {
  return QTensor({lut.stored().size()}, lut.stored(), lut.out_bits(), lut.out_exp());
}

ActLut lut_from_parts(std::string_view header_json, const QTensor& table) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header_json);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("lookup-table header: ") + e.what());
  }
  try {
    LutOptions opts{j.at("in_exp").get<int>(), j.at("out_exp").get<int>(),
                    j.at("out_bits").get<int>(), j.at("half").get<bool>()};
    ActLut lut(parse_act_kind(j.at("kind").get<std::string>()), j.at("entries").get<std::size_t>(),
               j.at("t").get<double>(), opts);
    if (lut_table_tensor(lut) != table) {
      throw ParseError("lookup-table entries do not match the header");
    }
    return lut;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("lookup-table header: ") + e.what());
  }
}

}  // namespace fadec
