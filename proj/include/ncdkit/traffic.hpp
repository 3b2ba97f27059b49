#pragma once

#include "ncdkit/compressor.hpp"
#include "ncdkit/pcap.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ncdkit {

// ---------------------------------------------------------------------------
// Sessions

/// TCP conversation key in client/server orientation. The client is the
/// endpoint that sent the first SYN seen, or the sender of the first packet
/// when no handshake was captured.
struct FlowKey {
    std::uint32_t client_addr = 0;
    std::uint16_t client_port = 0;
    std::uint32_t server_addr = 0;
    std::uint16_t server_port = 0;
    std::uint8_t protocol = 6;

    std::string client() const;
    std::string server() const;
    auto operator<=>(const FlowKey&) const = default;
};

struct Session {
    FlowKey key;
    Bytes client_payload;   // client -> server, sequence order
    Bytes server_payload;   // server -> client, sequence order
    Bytes combined_payload; // both directions interleaved in capture order
    std::int64_t first_ts_ns = 0;
    std::int64_t last_ts_ns = 0;
    bool complete = false;  // FIN seen in both directions
};

struct CaptureStats {
    std::size_t packets = 0;
    std::size_t tcp_packets = 0;
    std::size_t truncated = 0;
    std::size_t unsupported_link = 0;
    std::size_t non_ipv4 = 0;
    std::size_t non_tcp = 0;
    std::size_t fragments = 0;
    std::size_t malformed = 0;
    std::size_t late_packets = 0;      // after close, not opening a new session
    std::size_t retransmit_conflicts = 0; // overlapping segments with different bytes
    std::size_t gaps = 0;              // holes left in a reassembled stream
    std::size_t sessions = 0;
    std::size_t empty_sessions = 0;    // dropped for carrying no payload
};

/// Reassembles every TCP conversation of a capture. Sessions are returned in
/// completion order: closed sessions as they close (FIN both ways or RST),
/// then still-open ones by first packet. Overlapping bytes keep the first
/// copy seen. Throws FormatError for a malformed capture header.
std::vector<Session> reassemble(ByteView capture, CaptureStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Rules

enum class Direction { to_server, to_client, both };

std::string_view to_string(Direction d);

inline constexpr double kDefaultLessThan = 2.0;
inline constexpr std::size_t kDefaultMinPayload = 64;

/// Alert when the compression ratio leaves (more_than, less_than).
struct RatioWindow {
    std::optional<double> more_than;
    double less_than = kDefaultLessThan;
    CompressorKind compressor = CompressorKind::deflate;
};

/// Alert when the NCD to a recorded reference payload drops below dist.
struct NcdProximity {
    Bytes reference;
    std::string reference_path;
    double dist = 0.0;
    CompressorKind compressor = CompressorKind::deflate;
};

struct DetectionRule {
    std::string id;
    std::vector<std::uint16_t> ports; // empty = any port
    Direction direction = Direction::both;
    std::variant<RatioWindow, NcdProximity> detector;
    std::string message;

    bool selects(const Session& s) const;
};

/// Throws RuleError unless the rule satisfies its invariants.
void validate_rule(const DetectionRule& rule);

/// Parses the line-based rule format. Relative reference paths resolve
/// against `base_dir`. Throws RuleError with the line number on any problem.
std::vector<DetectionRule> parse_rules(std::istream& in, const std::filesystem::path& base_dir,
                                       const std::string& origin = "<rules>");
std::vector<DetectionRule> load_rules(const std::string& path);

// ---------------------------------------------------------------------------
// Detection

struct Alert {
    std::string rule_id;
    FlowKey flow;
    std::string detector; // "ratio" or "ncd"
    double measured_value = 0.0;
    std::optional<double> more_than;
    std::optional<double> less_than;
    std::optional<double> dist;
    std::string message;
    std::int64_t ts_ns = 0;
};

struct DetectionConfig {
    std::size_t min_payload = kDefaultMinPayload;
    int workers = 0;
};

struct DetectionStats {
    std::size_t sessions = 0;
    std::size_t evaluations = 0;
    std::size_t skipped_small = 0;
    std::size_t truncated_payloads = 0;
    std::size_t alerts = 0;
};

/// Bytes a rule looks at for the given direction filter.
ByteView select_payload(const Session& s, Direction d);

/// Ratio detector on the direction-filtered payload. Returns nullopt and bumps
/// stats->skipped_small when the payload is below min_payload.
std::optional<Alert> evaluate_ratio_rule(const Session& s, const DetectionRule& rule,
                                         std::size_t min_payload, DetectionStats* stats = nullptr);
std::optional<Alert> evaluate_ncd_rule(const Session& s, const DetectionRule& rule,
                                       std::size_t min_payload, DetectionStats* stats = nullptr);
std::optional<Alert> evaluate_rule(const Session& s, const DetectionRule& rule,
                                   std::size_t min_payload, DetectionStats* stats = nullptr);

struct DetectionResult {
    std::vector<Alert> alerts;
    CaptureStats capture;
    DetectionStats detection;
};

/// Applies every selecting rule to every session; sessions evaluated in
/// parallel, alerts ordered by session completion then rule-file order.
DetectionResult run_detection(const std::vector<Session>& sessions,
                              const std::vector<DetectionRule>& rules,
                              const DetectionConfig& config = {});
DetectionResult run_detection_serial(const std::vector<Session>& sessions,
                                     const std::vector<DetectionRule>& rules,
                                     const DetectionConfig& config = {});
/// Reassembles `capture` then runs run_detection.
DetectionResult run_detection(ByteView capture, const std::vector<DetectionRule>& rules,
                              const DetectionConfig& config = {});

nlohmann::ordered_json alert_to_json(const Alert& alert);
/// One JSON object per line.
void write_alerts(std::ostream& out, const std::vector<Alert>& alerts);
nlohmann::ordered_json summary_to_json(const DetectionResult& result);

// ---------------------------------------------------------------------------
// Profiling

struct ProtocolProfile {
    std::string label; // "tcp/<server port>"
    std::uint16_t port = 0;
    std::size_t session_count = 0;
    double mean_ratio = 0.0;
    double stddev_ratio = 0.0; // population standard deviation
    CompressorKind compressor = CompressorKind::deflate;
};

struct ProfileResult {
    std::vector<ProtocolProfile> profiles; // ascending port
    std::size_t excluded_small = 0;
    std::vector<std::string> warnings;
};

/// Per-server-port compression-ratio statistics over combined payloads.
/// Sessions below min_payload are excluded; groups left empty are omitted
/// with a warning.
ProfileResult profile(const std::vector<Session>& sessions, CompressorKind kind,
                      std::size_t min_payload = kDefaultMinPayload);

std::string format_profile_table(const ProfileResult& result);
nlohmann::ordered_json profile_to_json(const ProfileResult& result);

} // namespace ncdkit
