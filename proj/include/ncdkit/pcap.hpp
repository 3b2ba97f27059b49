#pragma once

#include "ncdkit/compressor.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace ncdkit {

// Classic libpcap capture files. Both byte orders and both timestamp
// resolutions (microsecond 0xa1b2c3d4, nanosecond 0xa1b23c4d) are accepted.

inline constexpr std::uint32_t kLinkEthernet = 1;
inline constexpr std::uint32_t kLinkRaw = 101;

struct PcapPacket {
    std::size_t index = 0;     // 0-based record number
    std::int64_t ts_ns = 0;    // capture timestamp, nanoseconds since the epoch
    std::uint32_t orig_len = 0;
    ByteView data;             // captured bytes (incl_len)
};

struct PcapInfo {
    std::uint32_t link_type = 0;
    std::uint32_t snaplen = 0;
    bool swapped = false;
    bool nanosecond = false;
};

/// Walks every record of an in-memory capture. Throws FormatError when the
/// global header is malformed. A final record cut short by end-of-file is
/// reported through the return value (number of truncated records: 0 or 1).
std::size_t for_each_packet(ByteView capture, PcapInfo& info,
                            const std::function<void(const PcapPacket&)>& visit);

/// Writes little-endian microsecond captures; used for fixtures and tooling.
class PcapWriter {
public:
    explicit PcapWriter(std::uint32_t link_type = kLinkEthernet, std::uint32_t snaplen = 262144);

    void add(std::int64_t ts_ns, ByteView frame);
    void add_truncated(std::int64_t ts_ns, ByteView frame, std::uint32_t captured);
    const Bytes& bytes() const { return out_; }

private:
    Bytes out_;
};

/// Minimal IPv4/TCP segment description for building Ethernet frames.
struct TcpSegmentSpec {
    std::uint32_t src_ip = 0;
    std::uint16_t src_port = 0;
    std::uint32_t dst_ip = 0;
    std::uint16_t dst_port = 0;
    std::uint32_t seq = 0;
    std::uint32_t ack = 0;
    std::uint8_t flags = 0;
    Bytes payload;
};

namespace tcp_flags {
inline constexpr std::uint8_t fin = 0x01;
inline constexpr std::uint8_t syn = 0x02;
inline constexpr std::uint8_t rst = 0x04;
inline constexpr std::uint8_t psh = 0x08;
inline constexpr std::uint8_t ack = 0x10;
} // namespace tcp_flags

/// Ethernet + IPv4 + TCP frame with valid lengths (checksums left zero).
Bytes build_tcp_frame(const TcpSegmentSpec& seg);

/// Dotted-quad IPv4 address to host-order integer. Throws ConfigError.
std::uint32_t parse_ipv4(const std::string& text);
std::string format_ipv4(std::uint32_t addr);

Bytes read_file(const std::string& path);

} // namespace ncdkit
