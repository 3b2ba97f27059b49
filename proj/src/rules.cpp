#include "ncdkit/error.hpp"
#include "ncdkit/traffic.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace ncdkit {

namespace {

class LineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Splits `rule <id> key=value ...`; values may be double-quoted with \" and
// \\ escapes.
std::vector<std::string> tokenize(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i >= line.size())
            break;
        std::string tok;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
            if (line[i] == '"') {
                ++i;
                bool closed = false;
                while (i < line.size()) {
                    char c = line[i++];
                    if (c == '\\' && i < line.size()) {
                        tok += line[i++];
                    } else if (c == '"') {
                        closed = true;
                        break;
                    } else {
                        tok += c;
                    }
                }
                if (!closed)
                    throw LineError("unterminated quoted value");
            } else {
                tok += line[i++];
            }
        }
        out.push_back(std::move(tok));
    }
    return out;
}

double parse_number(const std::string& key, const std::string& text)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
        throw LineError("invalid number for " + key + ": '" + text + "'");
    return v;
}

std::vector<std::uint16_t> parse_ports(const std::string& text)
{
    if (text == "any")
        return {};
    std::vector<std::uint16_t> ports;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        unsigned long v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size() || v > 65535)
            throw LineError("invalid port '" + part + "'");
        ports.push_back(static_cast<std::uint16_t>(v));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return ports;
}

Direction parse_direction(const std::string& text)
{
    if (text == "to_server")
        return Direction::to_server;
    if (text == "to_client")
        return Direction::to_client;
    if (text == "both")
        return Direction::both;
    throw LineError("invalid dir '" + text + "' (expected to_server, to_client or both)");
}

DetectionRule parse_line(const std::vector<std::string>& tokens, const std::filesystem::path& base_dir)
{
    if (tokens[0] != "rule")
        throw LineError("expected 'rule', got '" + tokens[0] + "'");
    if (tokens.size() < 2 || tokens[1].find('=') != std::string::npos)
        throw LineError("missing rule id");

    static const std::set<std::string> known = {"ports", "dir", "detector", "more_than", "less_than",
                                                "compressor", "msg", "file", "dist"};
    std::map<std::string, std::string> kv;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
        auto eq = tokens[i].find('=');
        if (eq == std::string::npos || eq == 0)
            throw LineError("expected key=value, got '" + tokens[i] + "'");
        std::string key = tokens[i].substr(0, eq);
        if (!known.count(key))
            throw LineError("unknown option '" + key + "'");
        if (!kv.emplace(key, tokens[i].substr(eq + 1)).second)
            throw LineError("option '" + key + "' given twice");
    }
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end())
            return std::nullopt;
        return it->second;
    };

    DetectionRule rule;
    rule.id = tokens[1];
    auto ports = take("ports");
    if (!ports)
        throw LineError("missing ports=");
    rule.ports = parse_ports(*ports);
    if (auto dir = take("dir"))
        rule.direction = parse_direction(*dir);
    rule.message = take("msg").value_or(rule.id);

    CompressorKind kind = CompressorKind::deflate;
    if (auto c = take("compressor")) {
        try {
            kind = parse_compressor(*c);
        } catch (const ConfigError& e) {
            throw LineError(e.what());
        }
    }

    auto detector = take("detector");
    if (!detector)
        throw LineError("missing detector=");
    if (*detector == "ratio") {
        if (kv.count("file") || kv.count("dist"))
            throw LineError("file/dist are not valid for detector=ratio");
        RatioWindow w;
        w.compressor = kind;
        if (auto v = take("more_than"))
            w.more_than = parse_number("more_than", *v);
        if (auto v = take("less_than"))
            w.less_than = parse_number("less_than", *v);
        rule.detector = w;
    } else if (*detector == "ncd") {
        if (kv.count("more_than") || kv.count("less_than"))
            throw LineError("more_than/less_than are not valid for detector=ncd");
        NcdProximity p;
        p.compressor = kind;
        auto dist = take("dist");
        if (!dist)
            throw LineError("missing dist=");
        p.dist = parse_number("dist", *dist);
        auto file = take("file");
        if (!file || file->empty())
            throw LineError("missing file=");
        std::filesystem::path ref = *file;
        if (ref.is_relative())
            ref = base_dir / ref;
        p.reference_path = ref.string();
        std::error_code ec;
        if (!std::filesystem::is_regular_file(ref, ec))
            throw LineError("cannot read reference file '" + p.reference_path + "'");
        try {
            p.reference = read_file(p.reference_path);
        } catch (const FormatError&) {
            throw LineError("cannot read reference file '" + p.reference_path + "'");
        }
        cap_input(p.reference);
        rule.detector = std::move(p);
    } else {
        throw LineError("unknown detector '" + *detector + "' (expected ratio or ncd)");
    }
    validate_rule(rule);
    return rule;
}

} // namespace

std::string_view to_string(Direction d)
{
    switch (d) {
    case Direction::to_server: return "to_server";
    case Direction::to_client: return "to_client";
    case Direction::both: return "both";
    }
    return "both";
}

bool DetectionRule::selects(const Session& s) const
{
    if (ports.empty())
        return true;
    return std::find(ports.begin(), ports.end(), s.key.server_port) != ports.end();
}

void validate_rule(const DetectionRule& rule)
{
    if (rule.id.empty())
        throw RuleError("rule id is empty");
    if (const auto* w = std::get_if<RatioWindow>(&rule.detector)) {
        if (!(w->less_than > 0.0))
            throw RuleError("rule " + rule.id + ": less_than must be positive");
        if (w->more_than) {
            if (*w->more_than < 0.0)
                throw RuleError("rule " + rule.id + ": more_than must be non-negative");
            if (!(*w->more_than < w->less_than))
                throw RuleError("rule " + rule.id + ": more_than must be below less_than");
        }
    } else {
        const auto& p = std::get<NcdProximity>(rule.detector);
        if (!(p.dist > 0.0 && p.dist <= 1.5))
            throw RuleError("rule " + rule.id + ": dist must be in (0, 1.5]");
        if (p.reference.empty())
            throw RuleError("rule " + rule.id + ": reference '" + p.reference_path + "' is empty");
    }
}

std::vector<DetectionRule> parse_rules(std::istream& in, const std::filesystem::path& base_dir,
                                       const std::string& origin)
{
    std::vector<DetectionRule> rules;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;
        try {
            auto tokens = tokenize(line);
            DetectionRule rule = parse_line(tokens, base_dir);
            if (!ids.insert(rule.id).second)
                throw LineError("duplicate rule id '" + rule.id + "'");
            rules.push_back(std::move(rule));
        } catch (const LineError& e) {
            throw RuleError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const RuleError& e) {
            throw RuleError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rules;
}

std::vector<DetectionRule> load_rules(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw RuleError("cannot open rule file '" + path + "'");
    return parse_rules(in, std::filesystem::path(path).parent_path(), path);
}

} // namespace ncdkit
