#pragma once

#include <stdexcept>
#include <string>

namespace ctxnav {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document; the message names the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Relation or attribute name outside the supported vocabulary.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

/// Relation endpoint that does not resolve to an allowed term.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

class CardinalityError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctxnav
