#pragma once

// Deterministic synthetic data for tests, the acceptance suite and benchmarks.

#include "ncdkit/compressor.hpp"
#include "ncdkit/pcap.hpp"
#include "ncdkit/similarity.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace ncdkit::fixtures {

Bytes random_bytes(std::size_t n, std::uint64_t seed);

/// Pseudo-English prose from a fixed vocabulary.
Bytes english_text(std::size_t n, std::uint64_t seed);

/// Text over a vocabulary of random words drawn from `seed`; bases from
/// different seeds share almost no substrings.
Bytes family_base(std::size_t n, std::uint64_t seed);

/// Overwrites round(fraction * size) distinct random positions with random bytes.
Bytes mutate(const Bytes& base, double fraction, std::uint64_t seed);

/// `families` x `variants` samples; each variant mutates its family base.
std::vector<Sample> family_corpus(int families, int variants, std::size_t base_size,
                                  double mutation, std::uint64_t seed);

/// One TCP conversation to be rendered into a capture.
struct SessionScript {
    std::uint32_t client_ip = 0x0a000001;
    std::uint16_t client_port = 40000;
    std::uint32_t server_ip = 0x0a000002;
    std::uint16_t server_port = 80;
    Bytes request;  // client -> server
    Bytes response; // server -> client
    std::size_t mss = 1400;
    bool handshake = true;
    bool close = true;
};

/// Renders sessions one after another (handshake, request segments, response
/// segments, FIN exchange) into an Ethernet pcap.
Bytes render_capture(const std::vector<SessionScript>& sessions, std::int64_t start_ts_ns = 1'000'000'000'000'000'000);

/// Appends the frames of one session to `writer`; returns the next timestamp.
std::int64_t append_session(PcapWriter& writer, const SessionScript& s, std::int64_t ts_ns);

/// Synthetic "exploit" conversation: an HTTP request carrying a PHP-style
/// payload plus an encoded shellcode blob; `variant` changes options in it.
SessionScript attack_session(int variant, std::uint16_t client_port);

/// Ordinary web-mirroring style traffic: GET for a page, HTML response.
SessionScript web_session(std::uint64_t seed, std::uint16_t client_port, std::size_t response_size);

} // namespace ncdkit::fixtures
