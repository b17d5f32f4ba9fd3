#pragma once

#include <stdexcept>
#include <string>

namespace empaudit {

// Base class for all harness errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem problems (missing file, unreadable path).
class IoError : public Error {
public:
    using Error::Error;
};

// A row/line could not be decoded; message names the offending line.
class ParseError : public Error {
public:
    using Error::Error;
};

// Decoded fine but violates a documented constraint.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Caller passed an argument outside the operation's precondition.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// A chat / embedding / scorer backend failed. `fatal` distinguishes
// auth/quota style failures (abort the run) from transient ones (retry).
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool fatal = false)
        : Error(what), fatal_(fatal) {}
    bool fatal() const { return fatal_; }

private:
    bool fatal_ = false;
};

// Model output did not match the required output format.
class FormatError : public Error {
public:
    using Error::Error;
};

// Word missing from the intensity lexicon and no fallback configured.
class OovError : public Error {
public:
    explicit OovError(const std::string& word)
        : Error("word not covered by the intensity lexicon: '" + word + "'"),
          word_(word) {}
    const std::string& word() const { return word_; }

private:
    std::string word_;
};

// No usable pairs (or cells) for a treatment-effect estimate.
class EstimationError : public Error {
public:
    using Error::Error;
};

// Regressor training diverged (non-finite loss).
class TrainingError : public Error {
public:
    using Error::Error;
};

// A statistic is undefined for the given inputs (zero prior mass,
// degenerate variance, ...).
class ComputationError : public Error {
public:
    using Error::Error;
};

}  // namespace empaudit
