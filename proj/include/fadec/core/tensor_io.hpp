#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fadec/core/tensor.hpp"

namespace fadec::io {

// Binary layout, all little-endian:
//   FTZ: "FTZ1" | u32 rank | u32 extents[rank] | f32 payload
//   QTZ: "QTZ1" | u32 rank | u32 extents[rank] | i8 bits | i16 exp | i32 payload

std::vector<std::uint8_t> encode_ftz(const FTensor& t);
std::vector<std::uint8_t> encode_qtz(const QTensor& t);
FTensor decode_ftz(const std::vector<std::uint8_t>& bytes);
QTensor decode_qtz(const std::vector<std::uint8_t>& bytes);

void write_ftz(const std::filesystem::path& path, const FTensor& t);
void write_qtz(const std::filesystem::path& path, const QTensor& t);
FTensor read_ftz(const std::filesystem::path& path);
QTensor read_qtz(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

/// Whole-file text helpers; parent directories are created on write.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace fadec::io
