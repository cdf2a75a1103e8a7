#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "m4pipe/tensor.hpp"

namespace m4 {

// Lossless sparsity-aware tensor codec (M4SP, docs/formats.md): a 64-byte
// header followed by one 10-byte record (3x u16 voxel index + f32 intensity)
// per nonzero voxel, sorted by linear index. Canonical: encoding the same
// tensor always yields the same bytes.

constexpr std::size_t kM4spHeaderSize = 64;
constexpr std::size_t kM4spRecordSize = 10;

std::vector<std::uint8_t> encode(const RadarTensor& t);

/// Exact inverse of encode. Throws CorruptData (naming the byte offset) on
/// bad magic, checksum mismatch, out-of-range indices, non-monotone records,
/// truncation, or invalid intensities.
RadarTensor decode(std::span<const std::uint8_t> bytes);

/// Dense f32 byte size divided by encoded byte size. Below 1 on dense data.
double compression_ratio(const RadarTensor& t);

/// Encoded size in bytes without materializing the encoding.
std::size_t encoded_size(const RadarTensor& t);

}  // namespace m4
