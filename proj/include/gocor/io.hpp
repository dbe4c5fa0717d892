#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gocor/feature_map.hpp"
#include "gocor/metrics.hpp"

namespace gocor {

// Little-endian binary containers.
//   FMAP: "FMAP" u32 version=1, u32 H, u32 W, u32 D, u8 dtype, values (i,j,d)
//   FLOW: "FLOW" u32 H, u32 W, f32 (u,v) pairs, then optionally H*W u8 mask
//   CVOL: "CVOL" u32 version=1, u8 kind, u32 H, u32 W, u32 R, u8 dtype,
//         values (i,j,a,b)
// dtype 0 = f32, 1 = f64. Decoders throw FormatError with the byte offset of
// the first bad field.

enum class Precision : std::uint8_t { F32 = 0, F64 = 1 };

using Bytes = std::vector<std::uint8_t>;

Bytes encode_fmap(const FeatureMap& f, Precision precision = Precision::F64);
FeatureMap decode_fmap(std::span<const std::uint8_t> bytes);

Bytes encode_flow(const FlowField& flow);
FlowField decode_flow(std::span<const std::uint8_t> bytes);

Bytes encode_cvol(const CorrespondenceVolume& v, Precision precision = Precision::F64);
CorrespondenceVolume decode_cvol(std::span<const std::uint8_t> bytes);

/// Binary P5 image of the (i, j) slice, min-max scaled to 0..255. A constant
/// slice renders as all zeros.
Bytes encode_heatmap_pgm(const CorrespondenceVolume& v, int i, int j);

/// The (i, j) slice as CSV, one row per slice row, values printed with 17
/// significant digits.
std::string slice_csv(const CorrespondenceVolume& v, int i, int j);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

FeatureMap load_fmap(const std::filesystem::path& path);
void save_fmap(const std::filesystem::path& path, const FeatureMap& f, Precision precision = Precision::F64);
FlowField load_flow(const std::filesystem::path& path);
void save_flow(const std::filesystem::path& path, const FlowField& flow);
CorrespondenceVolume load_cvol(const std::filesystem::path& path);
void save_cvol(const std::filesystem::path& path, const CorrespondenceVolume& v,
               Precision precision = Precision::F64);

}  // namespace gocor
