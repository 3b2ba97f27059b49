#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ncdkit {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Compression backends used as complexity estimators.
///
/// Every backend runs at fixed parameters so that a given input always maps
/// to the same compressed length:
///   deflate  zlib container, level 9, 32 KiB window
///   bwt      block-sorting compressor, 900 000 byte blocks
///   rle      (value, count) pairs, counts in [1, 255]
enum class CompressorKind { deflate, bwt, rle };

/// Parses "deflate", "bwt" or "rle". Throws ConfigError otherwise.
CompressorKind parse_compressor(std::string_view token);
std::string_view to_string(CompressorKind kind);

/// Approximate history the backend can exploit, in bytes. RLE has no
/// history beyond the current run and reports 0.
std::size_t window_hint(CompressorKind kind);

/// Parameter string recorded next to results so artifacts stay comparable.
std::string compressor_parameters(CompressorKind kind);

/// Inputs above this size are truncated before estimation (see cap_input).
inline constexpr std::size_t kMaxInputBytes = 1u << 20;

/// Length in bytes of the full compressed container for `data`.
/// Safe to call concurrently; backends keep no shared state.
std::size_t complexity(ByteView data, CompressorKind kind);

/// Truncates to kMaxInputBytes. Returns true when bytes were dropped.
bool cap_input(Bytes& data);

Bytes deflate_compress(ByteView data);
Bytes bwt_compress(ByteView data);

/// Run-length coding as (byte, count) pairs; runs longer than 255 split greedily.
Bytes rle_encode(ByteView data);
/// Inverse of rle_encode. Throws FormatError on odd length or zero counts.
Bytes rle_decode(ByteView encoded);

namespace detail {

/// Burrows-Wheeler transform of one block over cyclic rotations.
/// Returns the last column; `primary` receives the sorted position of the
/// unrotated input.
Bytes bwt_forward(ByteView block, std::uint32_t& primary);

} // namespace detail

inline ByteView as_bytes(std::string_view s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

} // namespace ncdkit
