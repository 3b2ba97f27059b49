#include "ncdkit/pcap.hpp"

#include "ncdkit/error.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace ncdkit {

namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4u;
constexpr std::uint32_t kMagicNano = 0xa1b23c4du;
constexpr std::size_t kGlobalHeader = 24;
constexpr std::size_t kRecordHeader = 16;

std::uint32_t load_le32(const std::uint8_t* p)
{
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint32_t byteswap32(std::uint32_t v)
{
    return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

void put_le16(Bytes& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_le32(Bytes& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_be16(Bytes& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_be32(Bytes& out, std::uint32_t v)
{
    for (int i = 3; i >= 0; --i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

} // namespace

std::size_t for_each_packet(ByteView capture, PcapInfo& info,
                            const std::function<void(const PcapPacket&)>& visit)
{
    if (capture.size() < kGlobalHeader)
        throw FormatError("capture too short for a pcap global header (" +
                          std::to_string(capture.size()) + " bytes)");
    const std::uint32_t raw_magic = load_le32(capture.data());
    switch (raw_magic) {
    case kMagicMicro: info = {0, 0, false, false}; break;
    case kMagicNano: info = {0, 0, false, true}; break;
    default:
        if (byteswap32(raw_magic) == kMagicMicro)
            info = {0, 0, true, false};
        else if (byteswap32(raw_magic) == kMagicNano)
            info = {0, 0, true, true};
        else {
            char buf[16];
            std::snprintf(buf, sizeof buf, "0x%08x", raw_magic);
            throw FormatError(std::string("not a pcap capture: bad magic ") + buf);
        }
    }
    auto u32 = [&](std::size_t off) {
        std::uint32_t v = load_le32(capture.data() + off);
        return info.swapped ? byteswap32(v) : v;
    };
    const std::uint32_t major = info.swapped
                                    ? static_cast<std::uint32_t>(capture[4]) << 8 | capture[5]
                                    : static_cast<std::uint32_t>(capture[5]) << 8 | capture[4];
    if (major != 2)
        throw FormatError("unsupported pcap major version " + std::to_string(major));
    info.snaplen = u32(16);
    info.link_type = u32(20) & 0x0fffffffu;

    std::size_t off = kGlobalHeader;
    std::size_t index = 0;
    while (off < capture.size()) {
        if (capture.size() - off < kRecordHeader)
            return 1;
        const std::uint32_t ts_sec = u32(off);
        const std::uint32_t ts_frac = u32(off + 4);
        const std::uint32_t incl = u32(off + 8);
        const std::uint32_t orig = u32(off + 12);
        off += kRecordHeader;
        if (incl > capture.size() - off)
            return 1;
        PcapPacket pkt;
        pkt.index = index++;
        pkt.ts_ns = static_cast<std::int64_t>(ts_sec) * 1000000000 +
                    static_cast<std::int64_t>(ts_frac) * (info.nanosecond ? 1 : 1000);
        pkt.orig_len = orig;
        pkt.data = capture.subspan(off, incl);
        visit(pkt);
        off += incl;
    }
    return 0;
}

PcapWriter::PcapWriter(std::uint32_t link_type, std::uint32_t snaplen)
{
    put_le32(out_, kMagicMicro);
    put_le16(out_, 2);
    put_le16(out_, 4);
    put_le32(out_, 0);
    put_le32(out_, 0);
    put_le32(out_, snaplen);
    put_le32(out_, link_type);
}

void PcapWriter::add(std::int64_t ts_ns, ByteView frame)
{
    add_truncated(ts_ns, frame, static_cast<std::uint32_t>(frame.size()));
}

void PcapWriter::add_truncated(std::int64_t ts_ns, ByteView frame, std::uint32_t captured)
{
    put_le32(out_, static_cast<std::uint32_t>(ts_ns / 1000000000));
    put_le32(out_, static_cast<std::uint32_t>((ts_ns % 1000000000) / 1000));
    put_le32(out_, captured);
    put_le32(out_, static_cast<std::uint32_t>(frame.size()));
    out_.insert(out_.end(), frame.begin(), frame.begin() + captured);
}

Bytes build_tcp_frame(const TcpSegmentSpec& seg)
{
    Bytes f;
    f.reserve(54 + seg.payload.size());
    const std::uint8_t dst_mac[6] = {0x02, 0, 0, 0, 0, 0x02};
    const std::uint8_t src_mac[6] = {0x02, 0, 0, 0, 0, 0x01};
    f.insert(f.end(), std::begin(dst_mac), std::end(dst_mac));
    f.insert(f.end(), std::begin(src_mac), std::end(src_mac));
    put_be16(f, 0x0800);

    const auto total = static_cast<std::uint16_t>(20 + 20 + seg.payload.size());
    f.push_back(0x45);
    f.push_back(0);
    put_be16(f, total);
    put_be16(f, 0);      // id
    put_be16(f, 0x4000); // DF
    f.push_back(64);
    f.push_back(6);
    put_be16(f, 0);
    put_be32(f, seg.src_ip);
    put_be32(f, seg.dst_ip);

    put_be16(f, seg.src_port);
    put_be16(f, seg.dst_port);
    put_be32(f, seg.seq);
    put_be32(f, seg.ack);
    f.push_back(5 << 4);
    f.push_back(seg.flags);
    put_be16(f, 65535);
    put_be16(f, 0);
    put_be16(f, 0);
    f.insert(f.end(), seg.payload.begin(), seg.payload.end());
    return f;
}

std::uint32_t parse_ipv4(const std::string& text)
{
    unsigned a, b, c, d;
    char tail;
    if (std::sscanf(text.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &tail) != 4 || a > 255 ||
        b > 255 || c > 255 || d > 255)
        throw ConfigError("invalid IPv4 address '" + text + "'");
    return a << 24 | b << 16 | c << 8 | d;
}

std::string format_ipv4(std::uint32_t addr)
{
    return std::to_string(addr >> 24) + "." + std::to_string((addr >> 16) & 0xff) + "." +
           std::to_string((addr >> 8) & 0xff) + "." + std::to_string(addr & 0xff);
}

Bytes read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot read '" + path + "'");
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace ncdkit
