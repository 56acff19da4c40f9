#pragma once

#include <stdexcept>
#include <string>

namespace driftline {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// config
struct MissingFileError : Error {
  explicit MissingFileError(const std::string& path) : Error("missing file: " + path) {}
};
struct ParseError : Error {
  int line = 0;
  ParseError(const std::string& what, int line_no)
      : Error(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
};
struct RangeError : Error {
  std::string key;
  RangeError(const std::string& key_name, const std::string& value)
      : Error("value out of range for " + key_name + ": " + value), key(key_name) {}
};

// vectors / metrics
struct DimensionMismatchError : Error {
  using Error::Error;
  DimensionMismatchError() : Error("vector dimensions differ") {}
};
struct ZeroVectorError : Error {
  ZeroVectorError() : Error("zero vector has no direction") {}
};
struct EmptyTextError : Error {
  EmptyTextError() : Error("text is empty") {}
};
struct FewerThanTwoClustersError : Error {
  FewerThanTwoClustersError() : Error("metric needs at least two non-noise clusters") {}
};
struct CoincidentCentroidsError : Error {
  CoincidentCentroidsError() : Error("two clusters share a centroid") {}
};
struct EmptyClusterError : Error {
  EmptyClusterError() : Error("cluster has no members") {}
};

// reduce / cluster
struct TooFewPointsError : Error {
  using Error::Error;
  TooFewPointsError() : Error("not enough points") {}
};
struct DegenerateVarianceError : Error {
  DegenerateVarianceError() : Error("all points identical, nothing to project") {}
};
struct NonFiniteInputError : Error {
  NonFiniteInputError() : Error("input contains NaN or infinity") {}
};

// embed / dedupe
struct MixedChatsError : Error {
  MixedChatsError() : Error("dedupe input spans more than one chat") {}
};
struct MissingEmbeddingError : Error {
  explicit MissingEmbeddingError(const std::string& id)
      : Error("concern has no embedding: " + id) {}
};
struct ProviderUnavailableError : Error {
  using Error::Error;
};

// oracle
struct OracleFailure : Error {
  using Error::Error;
};
struct MalformedChatError : Error {
  using Error::Error;
};
struct ChoiceNotInShortlistError : Error {
  explicit ChoiceNotInShortlistError(const std::string& id)
      : Error("oracle chose a cluster outside the shortlist: " + id) {}
};
struct SplitRefusedError : Error {
  using Error::Error;
};

// store
struct StorageError : Error {
  using Error::Error;
};
struct IdGapError : Error {
  using Error::Error;
};
struct VersionMismatchError : Error {
  using Error::Error;
};
struct EventFormatError : Error {
  using Error::Error;
};

// sim
struct SpecInvalidError : Error {
  using Error::Error;
};
struct TruthMismatchError : Error {
  using Error::Error;
};

}  // namespace driftline
