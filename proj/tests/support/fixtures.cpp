#include "fixtures.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string_view>

namespace ncdkit::fixtures {

namespace {

constexpr std::array<std::string_view, 96> kWords = {
    "the",     "of",      "and",     "to",       "in",      "a",        "is",       "that",
    "for",     "it",      "as",      "was",      "with",    "be",       "by",       "on",
    "not",     "he",      "this",    "are",      "or",      "his",      "from",     "at",
    "which",   "but",     "have",    "an",       "had",     "they",     "you",      "were",
    "their",   "one",     "all",     "we",       "can",     "her",      "has",      "there",
    "been",    "if",      "more",    "when",     "will",    "would",    "who",      "so",
    "no",      "network", "traffic", "session",  "server",  "client",   "packet",   "worm",
    "family",  "version", "program", "distance", "between", "objects",  "cluster",  "tree",
    "similar", "compress","length",  "string",   "window",  "protocol", "message",  "machine",
    "author",  "spread",  "mail",    "attach",   "random",  "complex",  "measure",  "detect",
    "through", "because", "before",  "another",  "should",  "however",  "example",  "system",
    "known",   "change",  "small",   "large",    "number",  "people",   "during",   "without"};

std::uint8_t byte_of(std::mt19937_64& rng) { return static_cast<std::uint8_t>(rng() >> 56); }

std::size_t below(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

void append(Bytes& out, std::string_view s) { out.insert(out.end(), s.begin(), s.end()); }

} // namespace

Bytes random_bytes(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Bytes out(n);
    for (auto& b : out)
        b = byte_of(rng);
    return out;
}

Bytes english_text(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Bytes out;
    out.reserve(n + 16);
    bool sentence_start = true;
    while (out.size() < n) {
        std::string word(kWords[below(rng, kWords.size())]);
        if (sentence_start)
            word[0] = static_cast<char>(word[0] - 'a' + 'A');
        append(out, word);
        sentence_start = false;
        auto r = below(rng, 20);
        if (r == 0) {
            append(out, ".\n");
            sentence_start = true;
        } else if (r < 3) {
            append(out, ". ");
            sentence_start = true;
        } else if (r == 3) {
            append(out, ", ");
        } else {
            append(out, " ");
        }
    }
    out.resize(n);
    return out;
}

Bytes family_base(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed ^ 0x5eedfa11ull);
    std::vector<std::string> vocab(256);
    for (auto& w : vocab) {
        std::size_t len = 3 + below(rng, 8);
        for (std::size_t k = 0; k < len; ++k)
            w += static_cast<char>('a' + below(rng, 26));
    }
    Bytes out;
    out.reserve(n + 16);
    while (out.size() < n) {
        append(out, vocab[below(rng, vocab.size())]);
        // Sprinkle binary-looking bytes so bases are not plain text.
        if (below(rng, 6) == 0)
            out.push_back(byte_of(rng));
        out.push_back(below(rng, 12) == 0 ? '\n' : ' ');
    }
    out.resize(n);
    return out;
}

Bytes mutate(const Bytes& base, double fraction, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Bytes out = base;
    const auto count = static_cast<std::size_t>(fraction * static_cast<double>(base.size()) + 0.5);
    std::vector<std::size_t> positions(base.size());
    std::iota(positions.begin(), positions.end(), 0);
    for (std::size_t k = 0; k < count && k < positions.size(); ++k) {
        std::size_t pick = k + below(rng, positions.size() - k);
        std::swap(positions[k], positions[pick]);
        out[positions[k]] = byte_of(rng);
    }
    return out;
}

std::vector<Sample> family_corpus(int families, int variants, std::size_t base_size, double mutation,
                                  std::uint64_t seed)
{
    std::vector<Sample> corpus;
    for (int f = 0; f < families; ++f) {
        const std::string family(1, static_cast<char>('A' + f));
        Bytes base = family_base(base_size, seed * 1000003ull + static_cast<std::uint64_t>(f));
        for (int v = 0; v < variants; ++v) {
            Bytes data = mutate(base, mutation, seed * 7919ull + static_cast<std::uint64_t>(f * 97 + v));
            corpus.push_back(make_sample(family + std::to_string(v + 1), std::move(data), family,
                                         "synthetic"));
        }
    }
    return corpus;
}

std::int64_t append_session(PcapWriter& writer, const SessionScript& s, std::int64_t ts)
{
    using namespace tcp_flags;
    std::uint32_t cseq = 1000;
    std::uint32_t sseq = 500000;
    auto up = [&](std::uint8_t flags, ByteView payload) {
        TcpSegmentSpec seg{s.client_ip, s.client_port, s.server_ip, s.server_port, cseq, sseq, flags,
                           Bytes(payload.begin(), payload.end())};
        writer.add(ts, build_tcp_frame(seg));
        ts += 1000;
        cseq += static_cast<std::uint32_t>(payload.size()) + ((flags & (syn | fin)) ? 1 : 0);
    };
    auto down = [&](std::uint8_t flags, ByteView payload) {
        TcpSegmentSpec seg{s.server_ip, s.server_port, s.client_ip, s.client_port, sseq, cseq, flags,
                           Bytes(payload.begin(), payload.end())};
        writer.add(ts, build_tcp_frame(seg));
        ts += 1000;
        sseq += static_cast<std::uint32_t>(payload.size()) + ((flags & (syn | fin)) ? 1 : 0);
    };
    if (s.handshake) {
        up(syn, {});
        down(syn | ack, {});
        up(ack, {});
    }
    for (std::size_t off = 0; off < s.request.size(); off += s.mss)
        up(ack | psh, ByteView(s.request).subspan(off, std::min(s.mss, s.request.size() - off)));
    for (std::size_t off = 0; off < s.response.size(); off += s.mss)
        down(ack | psh, ByteView(s.response).subspan(off, std::min(s.mss, s.response.size() - off)));
    if (s.close) {
        up(fin | ack, {});
        down(fin | ack, {});
        up(ack, {});
    }
    return ts;
}

Bytes render_capture(const std::vector<SessionScript>& sessions, std::int64_t start_ts_ns)
{
    PcapWriter writer;
    std::int64_t ts = start_ts_ns;
    for (const auto& s : sessions)
        ts = append_session(writer, s, ts) + 1'000'000;
    return writer.bytes();
}

SessionScript attack_session(int variant, std::uint16_t client_port)
{
    SessionScript s;
    s.client_ip = 0xc0a80164; // 192.168.1.100
    s.client_port = client_port;
    s.server_ip = 0xc0a80102;
    s.server_port = 80;

    const bool bind_shell = variant % 2 == 0;
    Bytes body;
    append(body, "-----------------------------7d3a1f2b0c\r\n"
                 "Content-Disposition: form-data; name=\"userfile\"; filename=\"x.php\"\r\n"
                 "Content-Type: application/octet-stream\r\n\r\n");
    body.insert(body.end(), 160, 0x90); // sled
    // Shared exploit core plus a tail that depends on the shell option.
    Bytes core = random_bytes(1600, 0x5be11c0de);
    Bytes tail = random_bytes(700, bind_shell ? 0xb1d : 0xe8ec);
    body.insert(body.end(), core.begin(), core.end());
    body.insert(body.end(), tail.begin(), tail.end());
    append(body, bind_shell ? "\r\nmode=bind&port=" : "\r\nmode=exec&cmd=/bin/sh%20-i&port=");
    append(body, std::to_string(30464 + variant * 17));
    Bytes option_blob = random_bytes(96, 0x0b7 + static_cast<std::uint64_t>(variant));
    body.insert(body.end(), option_blob.begin(), option_blob.end());
    append(body, "\r\n-----------------------------7d3a1f2b0c--\r\n");

    append(s.request, "POST /upload.php HTTP/1.0\r\nHost: webserver\r\n"
                      "User-Agent: Mozilla/4.0 (compatible; MSIE 5.5)\r\n"
                      "Content-Type: multipart/form-data; boundary=---------------------------7d3a1f2b0c\r\n"
                      "Content-Length: ");
    append(s.request, std::to_string(body.size()));
    append(s.request, "\r\n\r\n");
    s.request.insert(s.request.end(), body.begin(), body.end());
    s.response = to_bytes("HTTP/1.1 200 OK\r\nServer: Apache/1.3.12 (Unix) PHP/3.0.15\r\n"
                          "Content-Type: text/html\r\n\r\n<html><body>upload complete</body></html>\r\n");
    return s;
}

SessionScript web_session(std::uint64_t seed, std::uint16_t client_port, std::size_t response_size)
{
    SessionScript s;
    s.client_ip = 0xc0a80132;
    s.client_port = client_port;
    s.server_ip = 0xc0a80102;
    s.server_port = 80;
    std::mt19937_64 rng(seed);
    const std::string page = "/docs/page" + std::to_string(rng() % 10000) + ".html";
    append(s.request, "GET " + page + " HTTP/1.0\r\nHost: webserver\r\nUser-Agent: Wget/1.9\r\n"
                      "Accept: */*\r\nConnection: Keep-Alive\r\n\r\n");
    append(s.response, "HTTP/1.1 200 OK\r\nServer: Apache/1.3.12 (Unix)\r\nContent-Type: text/html\r\n\r\n"
                       "<html><head><title>Documentation</title></head><body>\n<p>");
    Bytes text = english_text(response_size, seed * 31 + 7);
    s.response.insert(s.response.end(), text.begin(), text.end());
    append(s.response, "</p>\n</body></html>\n");
    return s;
}

} // namespace ncdkit::fixtures
