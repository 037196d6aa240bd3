#pragma once

#include <stdexcept>
#include <string>

namespace coagent {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Transport/API failure against a remote backend.
class BackendError : public Error {
 public:
  enum class Kind { transport, auth, http_status, timeout };

  BackendError(Kind kind, const std::string& message)
      : Error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class GenerationTimeout : public Error {
 public:
  using Error::Error;
};

class DuplicateEntity : public Error {
 public:
  using Error::Error;
};

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

class SnapshotParseError : public Error {
 public:
  using Error::Error;
};

class UnknownEntity : public Error {
 public:
  using Error::Error;
};

class MissingAnchor : public Error {
 public:
  using Error::Error;
};

class VerdictParseError : public Error {
 public:
  using Error::Error;
};

class TemplateBindError : public Error {
 public:
  using Error::Error;
};

// A caller violated a documented operation precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace coagent
