#pragma once

#include <stdexcept>
#include <string>

namespace grounding {

/// Base class for every error raised by the grounding library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IngestionError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpusError : public IngestionError {
 public:
  using IngestionError::IngestionError;
};

class SnapshotError : public Error {
 public:
  using Error::Error;
};

class InvalidIntentError : public Error {
 public:
  using Error::Error;
};

/// A predictor, detector or labeler failed.  `provider()` names the remote
/// endpoint or fixture file that was being consulted.
class ProviderError : public Error {
 public:
  ProviderError(std::string provider, const std::string& what)
      : Error(provider + ": " + what), provider_(std::move(provider)) {}

  const std::string& provider() const noexcept { return provider_; }

 private:
  std::string provider_;
};

class FixtureMissError : public ProviderError {
 public:
  FixtureMissError(std::string provider, std::string key)
      : ProviderError(std::move(provider), "no fixture entry for \"" + key + "\""),
        key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Annotation document failed schema validation.  The message starts with the
/// offending field path, e.g. `graphics[2].bbox`.
class ScreenParseError : public Error {
 public:
  ScreenParseError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

/// Wraps an error raised inside one stage of the grounding pipeline.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace grounding
