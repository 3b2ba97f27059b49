#include "ncdkit/error.hpp"
#include "ncdkit/similarity.hpp"
#include "ncdkit/traffic.hpp"

#include <omp.h>

#include <ostream>

namespace ncdkit {

namespace {

// Payload a rule measures, capped like every other complexity input.
ByteView rule_payload(const Session& s, Direction d, std::size_t min_payload, DetectionStats* stats,
                      bool& skip)
{
    ByteView payload = select_payload(s, d);
    skip = payload.size() < min_payload || payload.empty();
    if (skip) {
        if (stats)
            ++stats->skipped_small;
        return {};
    }
    if (payload.size() > kMaxInputBytes) {
        if (stats)
            ++stats->truncated_payloads;
        payload = payload.first(kMaxInputBytes);
    }
    if (stats)
        ++stats->evaluations;
    return payload;
}

Alert base_alert(const Session& s, const DetectionRule& rule, const char* detector, double value)
{
    Alert a;
    a.rule_id = rule.id;
    a.flow = s.key;
    a.detector = detector;
    a.measured_value = value;
    a.message = rule.message;
    a.ts_ns = s.last_ts_ns;
    return a;
}

void merge(DetectionStats& into, const DetectionStats& from)
{
    into.evaluations += from.evaluations;
    into.skipped_small += from.skipped_small;
    into.truncated_payloads += from.truncated_payloads;
}

} // namespace

ByteView select_payload(const Session& s, Direction d)
{
    switch (d) {
    case Direction::to_server: return s.client_payload;
    case Direction::to_client: return s.server_payload;
    case Direction::both: return s.combined_payload;
    }
    return s.combined_payload;
}

std::optional<Alert> evaluate_ratio_rule(const Session& s, const DetectionRule& rule,
                                         std::size_t min_payload, DetectionStats* stats)
{
    const auto* w = std::get_if<RatioWindow>(&rule.detector);
    if (!w)
        throw RuleError("rule " + rule.id + " is not a ratio rule");
    bool skip = false;
    ByteView payload = rule_payload(s, rule.direction, min_payload, stats, skip);
    if (skip)
        return std::nullopt;
    const double r = compression_ratio(payload, w->compressor);
    const bool fire = (w->more_than && r < *w->more_than) || r > w->less_than;
    if (!fire)
        return std::nullopt;
    Alert a = base_alert(s, rule, "ratio", r);
    a.more_than = w->more_than;
    a.less_than = w->less_than;
    return a;
}

std::optional<Alert> evaluate_ncd_rule(const Session& s, const DetectionRule& rule,
                                       std::size_t min_payload, DetectionStats* stats)
{
    const auto* p = std::get_if<NcdProximity>(&rule.detector);
    if (!p)
        throw RuleError("rule " + rule.id + " is not an ncd rule");
    bool skip = false;
    ByteView payload = rule_payload(s, rule.direction, min_payload, stats, skip);
    if (skip)
        return std::nullopt;
    const double d = ncd(payload, ByteView(p->reference), p->compressor);
    if (!(d < p->dist))
        return std::nullopt;
    Alert a = base_alert(s, rule, "ncd", d);
    a.dist = p->dist;
    return a;
}

std::optional<Alert> evaluate_rule(const Session& s, const DetectionRule& rule,
                                   std::size_t min_payload, DetectionStats* stats)
{
    if (std::holds_alternative<RatioWindow>(rule.detector))
        return evaluate_ratio_rule(s, rule, min_payload, stats);
    return evaluate_ncd_rule(s, rule, min_payload, stats);
}

DetectionResult run_detection_serial(const std::vector<Session>& sessions,
                                     const std::vector<DetectionRule>& rules,
                                     const DetectionConfig& config)
{
    DetectionResult result;
    result.detection.sessions = sessions.size();
    for (const auto& s : sessions)
        for (const auto& rule : rules)
            if (rule.selects(s))
                if (auto a = evaluate_rule(s, rule, config.min_payload, &result.detection))
                    result.alerts.push_back(std::move(*a));
    result.detection.alerts = result.alerts.size();
    return result;
}

DetectionResult run_detection(const std::vector<Session>& sessions,
                              const std::vector<DetectionRule>& rules, const DetectionConfig& config)
{
    const auto n = static_cast<std::int64_t>(sessions.size());
    std::vector<std::vector<std::optional<Alert>>> slots(sessions.size());
    std::vector<DetectionStats> per_session(sessions.size());
    const int threads = config.workers > 0 ? config.workers : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
        auto& out = slots[i];
        out.resize(rules.size());
        for (std::size_t r = 0; r < rules.size(); ++r)
            if (rules[r].selects(sessions[i]))
                out[r] = evaluate_rule(sessions[i], rules[r], config.min_payload, &per_session[i]);
    }

    DetectionResult result;
    result.detection.sessions = sessions.size();
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        merge(result.detection, per_session[i]);
        for (auto& a : slots[i])
            if (a)
                result.alerts.push_back(std::move(*a));
    }
    result.detection.alerts = result.alerts.size();
    return result;
}

DetectionResult run_detection(ByteView capture, const std::vector<DetectionRule>& rules,
                              const DetectionConfig& config)
{
    CaptureStats capture_stats;
    auto sessions = reassemble(capture, &capture_stats);
    DetectionResult result = run_detection(sessions, rules, config);
    result.capture = capture_stats;
    return result;
}

nlohmann::ordered_json alert_to_json(const Alert& a)
{
    nlohmann::ordered_json j;
    j["rule"] = a.rule_id;
    j["detector"] = a.detector;
    j["proto"] = "tcp";
    j["client"] = a.flow.client();
    j["server"] = a.flow.server();
    j["value"] = a.measured_value;
    if (a.more_than)
        j["more_than"] = *a.more_than;
    if (a.less_than)
        j["less_than"] = *a.less_than;
    if (a.dist)
        j["dist"] = *a.dist;
    j["msg"] = a.message;
    j["ts_us"] = a.ts_ns / 1000;
    return j;
}

void write_alerts(std::ostream& out, const std::vector<Alert>& alerts)
{
    for (const auto& a : alerts)
        out << alert_to_json(a).dump() << '\n';
}

nlohmann::ordered_json summary_to_json(const DetectionResult& r)
{
    const auto& c = r.capture;
    const auto& d = r.detection;
    nlohmann::ordered_json j;
    j["summary"] = {{"packets", c.packets},
                    {"tcp_packets", c.tcp_packets},
                    {"sessions", d.sessions},
                    {"evaluations", d.evaluations},
                    {"skipped", d.skipped_small},
                    {"alerts", d.alerts},
                    {"truncated_packets", c.truncated},
                    {"parse_errors", c.malformed},
                    {"unsupported_link", c.unsupported_link},
                    {"non_ipv4", c.non_ipv4},
                    {"non_tcp", c.non_tcp},
                    {"fragments", c.fragments},
                    {"retransmit_conflicts", c.retransmit_conflicts},
                    {"gaps", c.gaps},
                    {"empty_sessions", c.empty_sessions},
                    {"truncated_payloads", d.truncated_payloads}};
    return j;
}

} // namespace ncdkit
