#include "fadec/core/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

#include "fadec/core/error.hpp"

namespace fadec::io {
namespace {

class Writer {
 public:
  void magic(std::string_view m) { out_.insert(out_.end(), m.begin(), m.end()); }
  void u32(std::uint32_t v) { put(v, 4); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void i16(std::int16_t v) { put(static_cast<std::uint16_t>(v), 2); }
  void i8(std::int8_t v) { out_.push_back(static_cast<std::uint8_t>(v)); }
  void f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  void expect_magic(std::string_view m) {
    need(m.size());
    if (std::memcmp(in_.data() + pos_, m.data(), m.size()) != 0) {
      throw ParseError("bad magic, expected " + std::string(m));
    }
    pos_ += m.size();
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
  std::int16_t i16() { return static_cast<std::int16_t>(static_cast<std::uint16_t>(get(2))); }
  std::int8_t i8() { return static_cast<std::int8_t>(get(1)); }
  float f32() { return std::bit_cast<float>(u32()); }
  void expect_end() const {
    if (pos_ != in_.size()) throw ParseError("trailing bytes after tensor payload");
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw ParseError("truncated tensor file");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

void put_shape(Writer& w, const Shape& s) {
  w.u32(static_cast<std::uint32_t>(s.size()));
  for (auto e : s) w.u32(static_cast<std::uint32_t>(e));
}

Shape get_shape(Reader& r, std::size_t elem_bytes) {
  Shape s(r.u32());
  std::size_t n = 1;
  for (auto& e : s) {
    e = r.u32();
    n *= e;
  }
  // Reject absurd headers before allocating.
  if (s.empty() || n > r.remaining() / elem_bytes + 1) throw ParseError("inconsistent tensor header");
  return s;
}

}  // namespace

std::vector<std::uint8_t> encode_ftz(const FTensor& t) {
  Writer w;
  w.magic("FTZ1");
  put_shape(w, t.shape());
  for (float v : t.data()) w.f32(v);
  return w.take();
}

std::vector<std::uint8_t> encode_qtz(const QTensor& t) {
  Writer w;
  w.magic("QTZ1");
  put_shape(w, t.shape());
  w.i8(static_cast<std::int8_t>(t.bits()));
  w.i16(static_cast<std::int16_t>(t.exp()));
  for (auto v : t.data()) w.i32(v);
  return w.take();
}

FTensor decode_ftz(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.expect_magic("FTZ1");
  Shape shape = get_shape(r, 4);
  std::vector<float> data(element_count(shape));
  for (auto& v : data) v = r.f32();
  r.expect_end();
  return FTensor(std::move(shape), std::move(data));
}

QTensor decode_qtz(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.expect_magic("QTZ1");
  Shape shape = get_shape(r, 4);
  const int bits = r.i8();
  const int exp = r.i16();
  std::vector<std::int32_t> data(element_count(shape));
  for (auto& v : data) v = r.i32();
  r.expect_end();
  return QTensor(std::move(shape), std::move(data), bits, exp);
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

void write_ftz(const std::filesystem::path& path, const FTensor& t) { write_bytes(path, encode_ftz(t)); }
void write_qtz(const std::filesystem::path& path, const QTensor& t) { write_bytes(path, encode_qtz(t)); }

FTensor read_ftz(const std::filesystem::path& path) {
  try {
    return decode_ftz(read_bytes(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

QTensor read_qtz(const std::filesystem::path& path) {
  try {
    return decode_qtz(read_bytes(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace fadec::io
