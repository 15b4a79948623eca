/**
 * @file errors.h
 * @brief Exception types shared by all scorex modules.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scorex {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed Standard MIDI File. `offset` is the byte position of the fault.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& reason)
      : Error("MIDI parse error at byte " + std::to_string(offset) + ": " + reason),
        offset_(offset),
        reason_(reason) {}

  std::size_t offset() const { return offset_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t offset_;
  std::string reason_;
};

/// A time signature other than 4/4 was found.
class MeterError : public Error {
 public:
  using Error::Error;
};

/// Token stream that violates the Bar (Position Pitch Duration Velocity)* grammar.
class GrammarError : public Error {
 public:
  GrammarError(std::size_t index, const std::string& expected, const std::string& found)
      : Error("token grammar error at index " + std::to_string(index) + ": expected " + expected +
              ", found " + found),
        index_(index),
        expected_(expected),
        found_(found) {}

  std::size_t index() const { return index_; }
  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  std::size_t index_;
  std::string expected_;
  std::string found_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class InfillError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("cannot train on an empty corpus") {}
};

/// Invalid numeric domain, e.g. a non-positive histogram bin passed to log2.
class DomainError : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

/// Annotation, config or model file does not follow its schema.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& key, const std::string& reason)
      : Error("schema error at '" + key + "': " + reason), key_(key) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class EmptyAnnotations : public Error {
 public:
  EmptyAnnotations() : Error("annotation list is empty") {}
};

}  // namespace scorex
