#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crea {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (shape mismatch, NaN, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An input file or text does not follow its documented format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A lookup referenced an identifier that does not exist.
class UnknownId : public Error {
 public:
  explicit UnknownId(std::string id, const std::string& what_kind = "id")
      : Error("unknown " + what_kind + ": " + id), id_(std::move(id)) {}

  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

/// No feature sidecar exists for one or more asset digests.
class MissingFeatures : public Error {
 public:
  explicit MissingFeatures(std::vector<std::string> digests)
      : Error(make_message(digests)), digests_(std::move(digests)) {}
  MissingFeatures(std::vector<std::string> digests, const std::string& message)
      : Error(message), digests_(std::move(digests)) {}

  const std::vector<std::string>& digests() const noexcept { return digests_; }

 private:
  static std::string make_message(const std::vector<std::string>& digests) {
    std::string msg = "missing features for";
    for (const auto& d : digests) {
      msg += ' ';
      msg += d;
    }
    return msg;
  }

  std::vector<std::string> digests_;
};

}  // namespace crea
