#pragma once

#include <stdexcept>
#include <string>

namespace udt {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class EncodingError : public Error {
public:
    using Error::Error;
};

class TierRegressionError : public Error {
public:
    using Error::Error;
};

class ShardTierError : public Error {
public:
    using Error::Error;
};

class BrokenLineageError : public Error {
public:
    explicit BrokenLineageError(const std::string& missing_id)
        : Error("broken lineage: missing record " + missing_id), missing_id_(missing_id) {}

    const std::string& missing_id() const { return missing_id_; }

private:
    std::string missing_id_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace udt
