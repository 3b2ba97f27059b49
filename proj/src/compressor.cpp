#include "ncdkit/compressor.hpp"

#include "ncdkit/error.hpp"

#include <zlib.h>

namespace ncdkit {

CompressorKind parse_compressor(std::string_view token)
{
    if (token == "deflate" || token == "zlib")
        return CompressorKind::deflate;
    if (token == "bwt" || token == "bzip2")
        return CompressorKind::bwt;
    if (token == "rle")
        return CompressorKind::rle;
    throw ConfigError("unknown compressor '" + std::string(token) +
                      "' (expected deflate, bwt or rle)");
}

std::string_view to_string(CompressorKind kind)
{
    switch (kind) {
    case CompressorKind::deflate: return "deflate";
    case CompressorKind::bwt: return "bwt";
    case CompressorKind::rle: return "rle";
    }
    throw ConfigError("invalid compressor kind");
}

std::size_t window_hint(CompressorKind kind)
{
    switch (kind) {
    case CompressorKind::deflate: return 32u * 1024u;
    case CompressorKind::bwt: return 900000u;
    case CompressorKind::rle: return 0;
    }
    throw ConfigError("invalid compressor kind");
}

std::string compressor_parameters(CompressorKind kind)
{
    switch (kind) {
    case CompressorKind::deflate: return "zlib level=9 window=32768";
    case CompressorKind::bwt: return "block-sort block=900000 mtf+zrle+range";
    case CompressorKind::rle: return "pairs max_run=255";
    }
    throw ConfigError("invalid compressor kind");
}

bool cap_input(Bytes& data)
{
    if (data.size() <= kMaxInputBytes)
        return false;
    data.resize(kMaxInputBytes);
    return true;
}

Bytes deflate_compress(ByteView data)
{
    uLongf out_len = compressBound(static_cast<uLong>(data.size()));
    Bytes out(out_len);
    int rc = compress2(out.data(), &out_len, data.data(), static_cast<uLong>(data.size()),
                       Z_BEST_COMPRESSION);
    if (rc != Z_OK)
        throw Error("zlib compress2 failed with code " + std::to_string(rc));
    out.resize(out_len);
    return out;
}

Bytes rle_encode(ByteView data)
{
    Bytes out;
    out.reserve(data.size() / 4 + 2);
    std::size_t i = 0;
    while (i < data.size()) {
        std::uint8_t value = data[i];
        std::size_t run = 1;
        while (i + run < data.size() && data[i + run] == value && run < 255)
            ++run;
        out.push_back(value);
        out.push_back(static_cast<std::uint8_t>(run));
        i += run;
    }
    return out;
}

Bytes rle_decode(ByteView encoded)
{
    if (encoded.size() % 2 != 0)
        throw FormatError("rle stream has odd length");
    Bytes out;
    for (std::size_t i = 0; i < encoded.size(); i += 2) {
        if (encoded[i + 1] == 0)
            throw FormatError("rle run of length zero at offset " + std::to_string(i));
        out.insert(out.end(), encoded[i + 1], encoded[i]);
    }
    return out;
}

std::size_t complexity(ByteView data, CompressorKind kind)
{
    switch (kind) {
    case CompressorKind::deflate:
        return deflate_compress(data).size();
    case CompressorKind::bwt:
        return bwt_compress(data).size();
    case CompressorKind::rle: {
        // Length law: two bytes per emitted run; no need to materialize.
        std::size_t runs = 0;
        std::size_t i = 0;
        while (i < data.size()) {
            std::size_t run = 1;
            while (i + run < data.size() && data[i + run] == data[i] && run < 255)
                ++run;
            ++runs;
            i += run;
        }
        return 2 * runs;
    }
    }
    throw ConfigError("invalid compressor kind");
}

} // namespace ncdkit
