#include "driftline/embed.hpp"

#include <cctype>
#include <cmath>

#include "driftline/errors.hpp"
#include "driftline/rng.hpp"

namespace driftline {

std::vector<Vec> EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) const {
  std::vector<Vec> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

HashingEmbedder::HashingEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}

Vec HashingEmbedder::embed(const std::string& text) const {
  const std::vector<std::string> tokens = tokenize(text);
  if (tokens.empty()) throw EmptyTextError();

  Vec acc(static_cast<std::size_t>(dim_), 0.0);
  for (const auto& tok : tokens) {
    std::uint64_t h = mix_seed(fnv1a64(tok.data(), tok.size()), seed_);
    const std::size_t idx = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim_));
    acc[idx] += (h >> 63) ? -1.0 : 1.0;
  }

  double n = norm(acc);
  if (n < 1e-12) {
    // Opposite-sign collisions cancelled everything; fall back to a single
    // deterministic coordinate derived from the whole text.
    const std::uint64_t h = mix_seed(fnv1a64(text.data(), text.size()), seed_ ^ 0x5851F42D4C957F2Dull);
    acc[h % static_cast<std::uint64_t>(dim_)] = 1.0;
    n = 1.0;
  }
  for (double& x : acc) x /= n;
  return acc;
}

double norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void normalize(Vec& v) {
  const double n = norm(v);
  if (n < 1e-12) throw ZeroVectorError();
  for (double& x : v) x /= n;
}

double cosine_similarity(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw DimensionMismatchError();
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu < 1e-24 || nv < 1e-24) throw ZeroVectorError();
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double euclidean_distance(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw DimensionMismatchError();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  return std::sqrt(s);
}

DedupReport dedupe_concerns(const std::vector<Concern>& chat_concerns, double threshold) {
  DedupReport report;
  if (chat_concerns.empty()) return report;

  const std::string& chat = chat_concerns.front().chat_id;
  for (const auto& c : chat_concerns) {
    if (c.chat_id != chat) throw MixedChatsError();
    if (c.embedding.empty()) throw MissingEmbeddingError(c.concern_id);
  }

  std::vector<const Concern*> kept;
  for (const auto& c : chat_concerns) {
    const Concern* duplicate_of = nullptr;
    double sim = 0.0;
    for (const Concern* k : kept) {
      const double s = cosine_similarity(c.embedding, k->embedding);
      if (s >= threshold) {
        duplicate_of = k;
        sim = s;
        break;
      }
    }
    if (duplicate_of != nullptr) {
      report.dropped.push_back({c.concern_id, duplicate_of->concern_id, sim});
    } else {
      kept.push_back(&c);
      report.retained.push_back(c.concern_id);
    }
  }
  return report;
}

}  // namespace driftline
