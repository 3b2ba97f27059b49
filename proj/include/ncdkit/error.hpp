#pragma once

#include <stdexcept>
#include <string>

namespace ncdkit {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown compressor token, invalid thresholds, bad CLI values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A sample that cannot take part in a distance computation (empty data).
class InvalidSampleError : public Error {
public:
    using Error::Error;
};

/// Duplicate ids, too few samples, empty corpora.
class CorpusError : public Error {
public:
    using Error::Error;
};

/// Compression ratio of an empty payload.
class UndefinedRatioError : public Error {
public:
    using Error::Error;
};

/// Tree/label mismatch or too few leaves for quartet fitting.
class TopologyError : public Error {
public:
    using Error::Error;
};

/// Malformed input files: matrices, captures, manifests.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Rule file problems, reported at load time with the offending line.
class RuleError : public Error {
public:
    using Error::Error;
};

} // namespace ncdkit
