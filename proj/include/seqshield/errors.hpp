#pragma once

#include <stdexcept>
#include <string>

namespace seqshield {

/// Base class for every error the library throws on its own behalf.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input bytes (bad JSON, bad CSV). Message names the byte offset
/// when one is known.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structurally valid input that does not match the expected document shape.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A behavior report that contains no API calls at all.
class EmptyTraceError : public Error {
public:
    using Error::Error;
};

/// Manifest-level problems: duplicate sample ids, unknown label tokens.
class ManifestError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Precondition violations on operation inputs (empty label multisets,
/// mismatched vocabularies, empty selections).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Dimension mismatches between models and matrices.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Operation called on an object in the wrong state (predict before fit).
class StateError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failures.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace seqshield
