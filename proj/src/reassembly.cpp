#include "ncdkit/error.hpp"
#include "ncdkit/traffic.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace ncdkit {

namespace {

constexpr std::size_t kMaxStreamExtent = 64u << 20;

struct Endpoint {
    std::uint32_t addr = 0;
    std::uint16_t port = 0;
    auto operator<=>(const Endpoint&) const = default;
};

using ConnKey = std::pair<Endpoint, Endpoint>; // ordered: first <= second

ConnKey canonical(Endpoint a, Endpoint b)
{
    return a <= b ? ConnKey{a, b} : ConnKey{b, a};
}

struct Segment {
    std::uint32_t seq = 0;
    Bytes data;
    std::size_t arrival = 0; // capture index
};

struct Stream {
    bool syn_seen = false;
    std::uint32_t isn = 0;
    bool fin_seen = false;
    std::vector<Segment> segments;
};

struct Conversation {
    FlowKey key;
    Stream to_server;
    Stream to_client;
    std::int64_t first_ts = 0;
    std::int64_t last_ts = 0;
    bool reset = false;
};

struct Chunk {
    std::size_t arrival;
    Bytes bytes;
};

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] << 8 | p[1]); }

std::uint32_t be32(const std::uint8_t* p)
{
    return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
           static_cast<std::uint32_t>(p[2]) << 8 | p[3];
}

// Orders one direction by sequence number. Bytes already placed win over
// later copies; each segment carrying different bytes for a placed position
// counts one conflict.
std::vector<Chunk> assemble(const Stream& stream, CaptureStats& stats)
{
    if (stream.segments.empty())
        return {};
    std::uint32_t base;
    if (stream.syn_seen) {
        base = stream.isn + 1;
    } else {
        base = stream.segments.front().seq;
        for (const auto& s : stream.segments)
            if (static_cast<std::int32_t>(s.seq - base) < 0)
                base = s.seq;
    }

    std::size_t extent = 0;
    for (const auto& s : stream.segments) {
        const std::int64_t off = static_cast<std::int32_t>(s.seq - base);
        const std::int64_t end = off + static_cast<std::int64_t>(s.data.size());
        if (end > 0)
            extent = std::max(extent, static_cast<std::size_t>(end));
    }
    extent = std::min(extent, kMaxStreamExtent);

    Bytes buffer(extent);
    std::vector<std::size_t> owner(extent, SIZE_MAX);
    for (const auto& s : stream.segments) {
        const std::int64_t off = static_cast<std::int32_t>(s.seq - base);
        bool conflict = false;
        for (std::size_t k = 0; k < s.data.size(); ++k) {
            const std::int64_t pos = off + static_cast<std::int64_t>(k);
            if (pos < 0 || pos >= static_cast<std::int64_t>(extent))
                continue;
            if (owner[pos] == SIZE_MAX) {
                owner[pos] = s.arrival;
                buffer[pos] = s.data[k];
            } else if (buffer[pos] != s.data[k]) {
                conflict = true;
            }
        }
        if (conflict)
            ++stats.retransmit_conflicts;
    }

    std::vector<Chunk> chunks;
    bool in_gap = false;
    for (std::size_t pos = 0; pos < extent; ++pos) {
        if (owner[pos] == SIZE_MAX) {
            if (!in_gap)
                ++stats.gaps;
            in_gap = true;
            continue;
        }
        if (in_gap || chunks.empty() || chunks.back().arrival != owner[pos])
            chunks.push_back({owner[pos], {}});
        in_gap = false;
        chunks.back().bytes.push_back(buffer[pos]);
    }
    return chunks;
}

Session finish(Conversation& c, CaptureStats& stats)
{
    Session s;
    s.key = c.key;
    s.first_ts_ns = c.first_ts;
    s.last_ts_ns = c.last_ts;
    s.complete = c.to_server.fin_seen && c.to_client.fin_seen && !c.reset;

    auto up = assemble(c.to_server, stats);
    auto down = assemble(c.to_client, stats);
    for (const auto& ch : up)
        s.client_payload.insert(s.client_payload.end(), ch.bytes.begin(), ch.bytes.end());
    for (const auto& ch : down)
        s.server_payload.insert(s.server_payload.end(), ch.bytes.begin(), ch.bytes.end());

    // Merge keeps each direction in sequence order and otherwise follows
    // the capture index of the packet that contributed each chunk.
    s.combined_payload.reserve(s.client_payload.size() + s.server_payload.size());
    std::size_t i = 0, j = 0;
    while (i < up.size() || j < down.size()) {
        const bool take_up = j == down.size() || (i < up.size() && up[i].arrival < down[j].arrival);
        const auto& ch = take_up ? up[i++] : down[j++];
        s.combined_payload.insert(s.combined_payload.end(), ch.bytes.begin(), ch.bytes.end());
    }
    return s;
}

class Reassembler {
public:
    explicit Reassembler(CaptureStats& stats) : stats_(stats) {}

    void packet(const PcapPacket& pkt, std::uint32_t link_type)
    {
        ++stats_.packets;
        ByteView frame = pkt.data;
        if (pkt.orig_len > frame.size()) {
            ++stats_.truncated;
            return;
        }
        ByteView ip;
        if (link_type == kLinkEthernet) {
            if (frame.size() < 14) {
                ++stats_.truncated;
                return;
            }
            std::size_t off = 12;
            std::uint16_t ethertype = be16(frame.data() + off);
            off += 2;
            while (ethertype == 0x8100 || ethertype == 0x88a8) {
                if (frame.size() < off + 4) {
                    ++stats_.truncated;
                    return;
                }
                ethertype = be16(frame.data() + off + 2);
                off += 4;
            }
            if (ethertype != 0x0800) {
                ++stats_.non_ipv4;
                return;
            }
            ip = frame.subspan(off);
        } else if (link_type == kLinkRaw) {
            ip = frame;
        } else {
            ++stats_.unsupported_link;
            return;
        }
        ipv4(pkt, ip);
    }

    std::vector<Session> finish_all()
    {
        // Remaining conversations flush in order of their first packet.
        std::vector<std::pair<std::size_t, ConnKey>> open;
        for (const auto& [key, slot] : open_)
            open.emplace_back(slot.first_index, key);
        std::sort(open.begin(), open.end());
        for (const auto& [first, key] : open)
            close(key);
        return std::move(done_);
    }

private:
    struct Slot {
        Conversation conv;
        std::size_t first_index = 0;
    };

    void ipv4(const PcapPacket& pkt, ByteView ip)
    {
        if (ip.size() < 20) {
            ++stats_.truncated;
            return;
        }
        if ((ip[0] >> 4) != 4) {
            ++stats_.non_ipv4;
            return;
        }
        const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
        const std::size_t total = be16(ip.data() + 2);
        if (ihl < 20 || total < ihl) {
            ++stats_.malformed;
            return;
        }
        if (total > ip.size()) {
            ++stats_.truncated;
            return;
        }
        const std::uint16_t frag = be16(ip.data() + 6);
        if ((frag & 0x2000) || (frag & 0x1fff)) {
            ++stats_.fragments;
            return;
        }
        if (ip[9] != 6) {
            ++stats_.non_tcp;
            return;
        }
        ByteView tcp = ip.subspan(ihl, total - ihl);
        if (tcp.size() < 20) {
            ++stats_.truncated;
            return;
        }
        const std::size_t doff = static_cast<std::size_t>(tcp[12] >> 4) * 4;
        if (doff < 20 || doff > tcp.size()) {
            ++stats_.malformed;
            return;
        }
        ++stats_.tcp_packets;
        const Endpoint src{be32(ip.data() + 12), be16(tcp.data())};
        const Endpoint dst{be32(ip.data() + 16), be16(tcp.data() + 2)};
        const std::uint32_t seq = be32(tcp.data() + 4);
        const std::uint8_t flags = tcp[13];
        segment(pkt, src, dst, seq, flags, tcp.subspan(doff));
    }

    void segment(const PcapPacket& pkt, Endpoint src, Endpoint dst, std::uint32_t seq,
                 std::uint8_t flags, ByteView payload)
    {
        using namespace tcp_flags;
        const ConnKey key = canonical(src, dst);
        const bool opening_syn = (flags & syn) && !(flags & ack);
        auto it = open_.find(key);
        if (it == open_.end()) {
            if (closed_.count(key) && !opening_syn) {
                ++stats_.late_packets;
                return;
            }
            Slot slot;
            // A SYN+ACK as first packet means the client's SYN was missed.
            const bool reversed = (flags & syn) && (flags & ack);
            const Endpoint client = reversed ? dst : src;
            const Endpoint server = reversed ? src : dst;
            slot.conv.key = {client.addr, client.port, server.addr, server.port, 6};
            slot.conv.first_ts = pkt.ts_ns;
            slot.first_index = pkt.index;
            closed_.erase(key);
            it = open_.emplace(key, std::move(slot)).first;
        }
        Conversation& conv = it->second.conv;
        conv.last_ts = pkt.ts_ns;
        const bool from_client = src.addr == conv.key.client_addr && src.port == conv.key.client_port;
        Stream& stream = from_client ? conv.to_server : conv.to_client;

        std::uint32_t data_seq = seq;
        if (flags & syn) {
            if (!stream.syn_seen) {
                stream.syn_seen = true;
                stream.isn = seq;
            }
            data_seq = seq + 1;
        }
        if (!payload.empty())
            stream.segments.push_back({data_seq, Bytes(payload.begin(), payload.end()), pkt.index});
        if (flags & fin)
            stream.fin_seen = true;
        if (flags & rst)
            conv.reset = true;

        if (conv.reset || (conv.to_server.fin_seen && conv.to_client.fin_seen))
            close(key);
    }

    void close(const ConnKey& key)
    {
        auto node = open_.extract(key);
        Session s = finish(node.mapped().conv, stats_);
        closed_.insert(key);
        if (s.combined_payload.empty()) {
            ++stats_.empty_sessions;
            return;
        }
        ++stats_.sessions;
        done_.push_back(std::move(s));
    }

    CaptureStats& stats_;
    std::map<ConnKey, Slot> open_;
    std::set<ConnKey> closed_;
    std::vector<Session> done_;
};

} // namespace

std::string FlowKey::client() const
{
    return format_ipv4(client_addr) + ":" + std::to_string(client_port);
}

std::string FlowKey::server() const
{
    return format_ipv4(server_addr) + ":" + std::to_string(server_port);
}

std::vector<Session> reassemble(ByteView capture, CaptureStats* stats)
{
    CaptureStats local;
    CaptureStats& st = stats ? *stats : local;
    Reassembler r(st);
    PcapInfo info;
    st.truncated += for_each_packet(capture, info,
                                    [&](const PcapPacket& pkt) { r.packet(pkt, info.link_type); });
    return r.finish_all();
}

} // namespace ncdkit
