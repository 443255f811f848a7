#pragma once

#include <stdexcept>
#include <string>

namespace endor {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Dimension arithmetic would overflow the addressable element count.
class SizeError : public Error {
public:
    explicit SizeError(const std::string& what) : Error(what) {}
};

// Structural inconsistency in a compressed tensor or index
// (value count vs bitmap popcount, prefix/chunk mismatch, ...).
class CorruptionError : public Error {
public:
    explicit CorruptionError(const std::string& what) : Error(what) {}
};

// Index outside the tensor extent.
class BoundsError : public Error {
public:
    explicit BoundsError(const std::string& what) : Error(what) {}
};

// Invalid simulator / profile configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// A byte compressor failed to reproduce its input.
class CodecFault : public Error {
public:
    explicit CodecFault(const std::string& what) : Error(what) {}
};

// Container-level failure when reading an .endor / .dense file.
// The kind distinguishes the rejection cause so callers can report it.
class FormatError : public Error {
public:
    enum class Kind {
        Truncated,      // file shorter than the declared layout
        BadMagic,       // unknown leading magic bytes
        BadVersion,     // unsupported container version
        BadCrc,         // checksum mismatch
        CountMismatch,  // nnz field disagrees with bitmap popcount
        Malformed,      // any other structural violation
    };

    FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

} // namespace endor
