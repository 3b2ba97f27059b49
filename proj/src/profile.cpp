#include "ncdkit/similarity.hpp"
#include "ncdkit/traffic.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace ncdkit {

ProfileResult profile(const std::vector<Session>& sessions, CompressorKind kind, std::size_t min_payload)
{
    ProfileResult result;
    std::map<std::uint16_t, std::vector<double>> groups;
    std::map<std::uint16_t, std::size_t> seen;
    for (const auto& s : sessions) {
        ++seen[s.key.server_port];
        auto& ratios = groups[s.key.server_port];
        if (s.combined_payload.size() < min_payload || s.combined_payload.empty()) {
            ++result.excluded_small;
            continue;
        }
        ByteView payload = s.combined_payload;
        if (payload.size() > kMaxInputBytes)
            payload = payload.first(kMaxInputBytes);
        ratios.push_back(compression_ratio(payload, kind));
    }

    for (const auto& [port, ratios] : groups) {
        if (ratios.empty()) {
            result.warnings.push_back("port " + std::to_string(port) + ": all " +
                                      std::to_string(seen[port]) + " sessions below " +
                                      std::to_string(min_payload) + " bytes; group omitted");
            continue;
        }
        double mean = 0.0;
        for (double r : ratios)
            mean += r;
        mean /= static_cast<double>(ratios.size());
        double var = 0.0;
        for (double r : ratios)
            var += (r - mean) * (r - mean);
        var /= static_cast<double>(ratios.size());
        result.profiles.push_back(
            {"tcp/" + std::to_string(port), port, ratios.size(), mean, std::sqrt(var), kind});
    }
    return result;
}

std::string format_profile_table(const ProfileResult& result)
{
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %9s %12s %12s %10s\n", "protocol", "sessions", "mean ratio",
                  "stddev", "compressor");
    out << line;
    for (const auto& p : result.profiles) {
        std::snprintf(line, sizeof line, "%-10s %9zu %12.6f %12.6f %10s\n", p.label.c_str(),
                      p.session_count, p.mean_ratio, p.stddev_ratio,
                      std::string(to_string(p.compressor)).c_str());
        out << line;
    }
    for (const auto& w : result.warnings)
        out << "warning: " << w << '\n';
    return out.str();
}

nlohmann::ordered_json profile_to_json(const ProfileResult& result)
{
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& p : result.profiles) {
        nlohmann::ordered_json j;
        j["label"] = p.label;
        j["port"] = p.port;
        j["sessions"] = p.session_count;
        j["mean_ratio"] = p.mean_ratio;
        j["stddev_ratio"] = p.stddev_ratio;
        j["compressor"] = to_string(p.compressor);
        rows.push_back(std::move(j));
    }
    nlohmann::ordered_json j;
    j["profiles"] = std::move(rows);
    j["excluded_small"] = result.excluded_small;
    j["warnings"] = result.warnings;
    return j;
}

} // namespace ncdkit
