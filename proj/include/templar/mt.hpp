#ifndef TEMPLAR_MT_HPP
#define TEMPLAR_MT_HPP

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "templar/errors.hpp"

namespace templar {

struct TranslationRequest {
  std::vector<std::string> texts;
  std::string source_lang;
  std::string target_lang;
};

class Provider {
 public:
  virtual ~Provider() = default;
  // Output aligned 1:1 with input order. Throws ProviderUnavailable /
  // AuthError; never returns partial results.
  virtual std::vector<std::string> translate_batch(
      const std::vector<std::string>& texts, const std::string& source_lang,
      const std::string& target_lang) = 0;
  virtual std::string name() const = 0;
};

// Deterministic rule-based translator for tests and fixtures. Pipeline per
// text: map tokens through word_map (empty replacement deletes the token),
// inflect tokens listed in agreement_splits by the class of the nearest
// classed token (looking forward first, then backward), apply the reorder
// permutation registered for the token count, then with probability
// noise_rate (decided by a per-text hash) inject one corruption - a token
// duplication or an adjacent swap.
struct MockRuleSet {
  std::map<std::string, std::string> word_map;
  std::map<std::size_t, std::vector<std::size_t>> reorder;
  std::map<std::string, std::string> noun_classes;
  // token -> class -> inflected form
  std::map<std::string, std::map<std::string, std::string>> agreement_splits;
  double noise_rate = 0.0;
  std::uint64_t seed = 0;

  static MockRuleSet from_json_text(const std::string& text);
  static MockRuleSet load(const std::filesystem::path& path);
};

std::string mock_translate(const MockRuleSet& rules, std::string_view text);

class MockProvider final : public Provider {
 public:
  explicit MockProvider(MockRuleSet rules) : rules_(std::move(rules)) {}
  std::vector<std::string> translate_batch(const std::vector<std::string>&,
                                           const std::string&,
                                           const std::string&) override;
  std::string name() const override { return "mock"; }

 private:
  MockRuleSet rules_;
};

// Persistent exact-match cache, stored as JSON lines
// {"src", "tgt", "text", "translation"}. Safe for concurrent readers;
// writes are serialized and appended immediately.
class TranslationCache {
 public:
  // In-memory only.
  TranslationCache() = default;
  // Loads existing entries; subsequent inserts append to the file.
  explicit TranslationCache(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& src,
                                    const std::string& tgt,
                                    const std::string& text) const;
  void insert(const std::string& src, const std::string& tgt,
              const std::string& text, const std::string& translation);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::string> entries_;
  std::filesystem::path path_;
  bool persistent_ = false;
};

// Front door for translation: consults the cache first, forwards misses to
// the provider (batch-deduplicated; concurrent requests for one key perform
// a single provider call), and persists fresh results. A null provider
// means cache-only mode: a miss raises CacheMiss.
class TranslationService {
 public:
  TranslationService(TranslationCache* cache, Provider* provider);

  std::vector<std::string> translate(const TranslationRequest& request);

  std::size_t provider_calls() const { return provider_calls_; }

 private:
  TranslationCache* cache_;
  Provider* provider_;
  std::atomic<std::size_t> provider_calls_{0};

  std::mutex pending_mutex_;
  std::condition_variable pending_cv_;
  std::set<std::string> pending_;
};

struct HttpProviderConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8089/translate
  std::string api_key;
  std::string api_key_header;  // empty: no auth header sent
  std::size_t max_batch = 100;
  int max_attempts = 3;
  int initial_backoff_ms = 250;
  std::size_t max_concurrency = 4;
  // Request body: {texts_key: [...], source_key: str, target_key: str}.
  std::string texts_key = "texts";
  std::string source_key = "source";
  std::string target_key = "target";
  // Where the translations live in the response: response_list_pointer is a
  // JSON pointer to an array aligned with the inputs ("" = whole body);
  // response_item_pointer is applied to each element ("" = element itself).
  std::string response_list_pointer = "/translations";
  std::string response_item_pointer = "";

  // Reads MT_ENDPOINT, MT_API_KEY, MT_API_KEY_HEADER.
  static HttpProviderConfig from_env();
};

// Generic JSON-over-HTTP provider. Batches requests (max_batch texts each,
// at most max_concurrency in flight), retries transient failures with
// exponential backoff, and fails the whole call once a chunk exhausts its
// attempts. Throws AuthError when an api_key_header is configured without a
// key.
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig cfg);
  std::vector<std::string> translate_batch(const std::vector<std::string>&,
                                           const std::string&,
                                           const std::string&) override;
  std::string name() const override { return "http"; }

 private:
  std::vector<std::string> translate_chunk(
      const std::vector<std::string>& texts, const std::string& source_lang,
      const std::string& target_lang);

  HttpProviderConfig cfg_;
};

}  // namespace templar

#endif  // TEMPLAR_MT_HPP
