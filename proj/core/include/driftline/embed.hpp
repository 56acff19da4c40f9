#pragma once

// Embedding provider abstraction, cosine similarity, and the greedy
// intra-chat de-duplication scan.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "driftline/types.hpp"

namespace driftline {

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual bool deterministic() const = 0;
  // Returns a unit-norm vector of exactly dim(). Throws EmptyTextError on
  // whitespace-only input, ProviderUnavailableError on transport failure.
  virtual Vec embed(const std::string& text) const = 0;
  // Batch form; the default loops over embed().
  virtual std::vector<Vec> embed_batch(const std::vector<std::string>& texts) const;
};

// Reference provider: each lowercased token hashes (with the seed) to an
// index and a sign in a dim-sized accumulator; the accumulator is normalized.
// Same text always yields the same vector.
class HashingEmbedder final : public EmbeddingProvider {
 public:
  HashingEmbedder(int dim, std::uint64_t seed);
  std::string name() const override { return "token-hash"; }
  int dim() const override { return dim_; }
  bool deterministic() const override { return true; }
  Vec embed(const std::string& text) const override;

 private:
  int dim_;
  std::uint64_t seed_;
};

// Splits on non-alphanumeric bytes and lowercases; shared by the embedder
// and the oracle mocks so both sides agree on what a token is.
std::vector<std::string> tokenize(const std::string& text);

double cosine_similarity(const Vec& u, const Vec& v);
double euclidean_distance(const Vec& u, const Vec& v);
double norm(const Vec& v);
// Normalizes in place; throws ZeroVectorError when the norm underflows.
void normalize(Vec& v);

struct DedupReport {
  std::vector<std::string> retained;
  struct Drop {
    std::string dropped_id;
    std::string kept_id;
    double similarity;
  };
  std::vector<Drop> dropped;
};

// Greedy scan in arrival order over the concerns of a single chat: a concern
// is dropped iff its similarity to some already-retained concern reaches the
// threshold. The first occurrence is always the representative kept.
DedupReport dedupe_concerns(const std::vector<Concern>& chat_concerns, double threshold);

// Remote provider speaking the batch-embedding endpoint (one POST route,
// list of strings in, same-length list of float vectors out).
struct RemoteEndpoint {
  std::string url;        // e.g. http://127.0.0.1:8089/embed
  std::string auth_token; // sent as a bearer header when non-empty
  int timeout_ms = 30000;
  int max_retries = 2;
};

std::unique_ptr<EmbeddingProvider> make_remote_embedder(RemoteEndpoint endpoint, int dim);

}  // namespace driftline
