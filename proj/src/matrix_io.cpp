#include "ncdkit/matrix_io.hpp"

#include "ncdkit/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace ncdkit {

namespace {

constexpr std::string_view kMagic = "ncd-matrix";

std::vector<std::string> split_ws(const std::string& line)
{
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;)
        out.push_back(tok);
    return out;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what)
{
    throw FormatError("matrix line " + std::to_string(line_no) + ": " + what);
}

void check_matrix(const DistanceMatrix& m)
{
    const std::size_t n = m.size();
    if (m.values.size() != n * n)
        throw FormatError("matrix value count does not match label count");
    std::set<std::string_view> seen;
    for (const auto& id : m.labels)
        if (!seen.insert(id).second)
            throw FormatError("duplicate matrix label '" + id + "'");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (m.at(i, j) != m.at(j, i))
                throw FormatError("matrix is not symmetric at (" + m.labels[i] + ", " +
                                  m.labels[j] + ")");
}

} // namespace

void write_matrix_text(std::ostream& out, const DistanceMatrix& m)
{
    out << kMagic << ' ' << to_string(m.compressor) << ' ' << m.size();
    for (const auto& id : m.labels) {
        if (id.empty() || id.find_first_of(" \t\r\n") != std::string::npos)
            throw FormatError("matrix id '" + id + "' is empty or contains whitespace");
        out << ' ' << id;
    }
    out << '\n';
    out << "# params " << compressor_parameters(m.compressor) << '\n';
    bool any_truncated = false;
    for (bool t : m.truncated)
        any_truncated = any_truncated || t;
    if (any_truncated) {
        out << "# truncated";
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.truncated[i])
                out << ' ' << m.labels[i];
        out << '\n';
    }
    const auto old_precision = out.precision();
    out << std::setprecision(17);
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (j)
                out << ' ';
            out << m.at(i, j);
        }
        out << '\n';
    }
    out.precision(old_precision);
}

DistanceMatrix read_matrix_text(std::istream& in)
{
    DistanceMatrix m;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::set<std::string> truncated;
    std::size_t n = 0;
    std::size_t rows = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        auto tokens = split_ws(line);
        if (tokens.empty())
            continue;
        if (tokens[0][0] == '#') {
            if (tokens[0] == "#" && tokens.size() > 1 && tokens[1] == "truncated")
                truncated.insert(tokens.begin() + 2, tokens.end());
            continue;
        }
        if (!have_header) {
            if (tokens[0] != kMagic)
                fail(line_no, "expected header starting with '" + std::string(kMagic) + "'");
            if (tokens.size() < 3)
                fail(line_no, "header needs compressor and size");
            try {
                m.compressor = parse_compressor(tokens[1]);
            } catch (const ConfigError& e) {
                fail(line_no, e.what());
            }
            auto [ptr, ec] = std::from_chars(tokens[2].data(), tokens[2].data() + tokens[2].size(), n);
            if (ec != std::errc{} || ptr != tokens[2].data() + tokens[2].size())
                fail(line_no, "invalid matrix size '" + tokens[2] + "'");
            if (tokens.size() != 3 + n)
                fail(line_no, "header declares " + std::to_string(n) + " ids but lists " +
                                  std::to_string(tokens.size() - 3));
            m.labels.assign(tokens.begin() + 3, tokens.end());
            m.values.reserve(n * n);
            have_header = true;
            continue;
        }
        if (rows == n)
            fail(line_no, "extra row beyond the declared " + std::to_string(n));
        if (tokens.size() != n)
            fail(line_no, "row has " + std::to_string(tokens.size()) + " values, expected " +
                              std::to_string(n));
        for (const auto& tok : tokens) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
                fail(line_no, "invalid value '" + tok + "'");
            m.values.push_back(v);
        }
        ++rows;
    }
    if (!have_header)
        fail(line_no, "missing header");
    if (rows != n)
        fail(line_no, "expected " + std::to_string(n) + " rows, found " + std::to_string(rows));
    m.truncated.resize(n, false);
    for (std::size_t i = 0; i < n; ++i)
        m.truncated[i] = truncated.count(m.labels[i]) > 0;
    check_matrix(m);
    return m;
}

nlohmann::json matrix_to_json(const DistanceMatrix& m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.size(); ++j)
            row.push_back(m.at(i, j));
        rows.push_back(std::move(row));
    }
    std::vector<bool> truncated = m.truncated;
    truncated.resize(m.size(), false);
    return {{"format", kMagic},
            {"version", 1},
            {"compressor", to_string(m.compressor)},
            {"compressor_params", compressor_parameters(m.compressor)},
            {"n", m.size()},
            {"labels", m.labels},
            {"truncated", truncated},
            {"values", std::move(rows)}};
}

DistanceMatrix matrix_from_json(const nlohmann::json& j)
{
    try {
        if (j.at("format").get<std::string>() != kMagic)
            throw FormatError("not an ncd-matrix object");
        DistanceMatrix m;
        m.compressor = parse_compressor(j.at("compressor").get<std::string>());
        m.labels = j.at("labels").get<std::vector<std::string>>();
        const std::size_t n = m.labels.size();
        if (j.contains("truncated"))
            m.truncated = j.at("truncated").get<std::vector<bool>>();
        m.truncated.resize(n, false);
        const auto& rows = j.at("values");
        if (rows.size() != n)
            throw FormatError("matrix has " + std::to_string(rows.size()) + " rows, expected " +
                              std::to_string(n));
        for (const auto& row : rows) {
            if (row.size() != n)
                throw FormatError("matrix row length mismatch");
            for (const auto& v : row)
                m.values.push_back(v.get<double>());
        }
        check_matrix(m);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("matrix json: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("matrix json: ") + e.what());
    }
}

DistanceMatrix load_matrix(const std::string& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw FormatError("cannot open matrix file '" + path + "'");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    const std::string text = buffer.str();
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return matrix_from_json(nlohmann::json::parse(text));
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError("matrix json '" + path + "': " + e.what());
        }
    }
    std::istringstream in(text);
    return read_matrix_text(in);
}

} // namespace ncdkit
