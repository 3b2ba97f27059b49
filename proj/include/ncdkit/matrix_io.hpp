#pragma once

#include "ncdkit/similarity.hpp"

#include <iosfwd>
#include <string>

#include <json.hpp>

namespace ncdkit {

// Text matrix format:
//
//   ncd-matrix <compressor> <n> <id_1> ... <id_n>
//   # truncated <id> ...          (optional metadata/comment lines)
//   <v_11> ... <v_1n>
//   ...
//   <v_n1> ... <v_nn>
//
// Values are written with 17 significant digits, enough to round-trip doubles.
// Ids must be non-empty and free of whitespace.

void write_matrix_text(std::ostream& out, const DistanceMatrix& m);
/// Throws FormatError naming the offending line.
DistanceMatrix read_matrix_text(std::istream& in);

nlohmann::json matrix_to_json(const DistanceMatrix& m);
DistanceMatrix matrix_from_json(const nlohmann::json& j);

/// Reads either format, sniffing a leading '{' for JSON.
DistanceMatrix load_matrix(const std::string& path);

} // namespace ncdkit
