#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace pambench {

// Every failure raised by the library derives from Error. Subclasses exist so
// callers (and the CLI) can tell recoverable classes apart without parsing
// message text.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// task-core
class InvalidGraph : public Error { using Error::Error; };
class UnresolvedSelect : public Error { using Error::Error; };
class MissingFrame : public Error { using Error::Error; };
class IdentityRoot : public Error { using Error::Error; };

// stimuli
class MissingObject : public Error { using Error::Error; };
class DecodeError : public Error { using Error::Error; };
class UnknownStimulus : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

// taskgen
class KindMismatch : public Error { using Error::Error; };
class GenerationFailure : public Error { using Error::Error; };
class InvalidParams : public Error { using Error::Error; };

// dataset
class MissingFile : public Error { using Error::Error; };

class SchemaError : public Error {
 public:
  SchemaError(std::string file, std::string key, const std::string& detail)
      : Error(file + ": " + (key.empty() ? std::string("document") : "key '" + key + "'") + ": " + detail),
        file_(std::move(file)),
        key_(std::move(key)) {}

  const std::string& file() const noexcept { return file_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::string file_;
  std::string key_;
};

// harness
class MissingCaptions : public Error { using Error::Error; };
class CaptionCountMismatch : public Error { using Error::Error; };
class EmptyCaption : public Error { using Error::Error; };

class EndpointError : public Error {
 public:
  EndpointError(const std::string& what, int status, bool retryable,
                std::optional<std::chrono::milliseconds> retry_after = std::nullopt)
      : Error(what), status_(status), retryable_(retryable), retry_after_(retry_after) {}

  // HTTP status, or 0 for transport failures.
  int status() const noexcept { return status_; }
  bool retryable() const noexcept { return retryable_; }
  std::optional<std::chrono::milliseconds> retry_after() const noexcept { return retry_after_; }

 private:
  int status_;
  bool retryable_;
  std::optional<std::chrono::milliseconds> retry_after_;
};

// analysis
class EmptyResults : public Error { using Error::Error; };
class DegenerateInput : public Error { using Error::Error; };

// service
class UnknownSession : public Error { using Error::Error; };
class SessionComplete : public Error { using Error::Error; };
class InvalidAnswer : public Error { using Error::Error; };
class StaleTrial : public Error { using Error::Error; };
class NoData : public Error { using Error::Error; };

}  // namespace pambench
