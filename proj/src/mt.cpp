#include "templar/mt.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "templar/hashing.hpp"
#include "templar/word_graph.hpp"

namespace templar {

using nlohmann::json;

MockRuleSet MockRuleSet::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid mock rules JSON: ") + e.what());
  }
  MockRuleSet rules;
  if (doc.contains("word_map"))
    for (const auto& [from, to] : doc.at("word_map").items())
      rules.word_map.emplace(from, to.get<std::string>());
  if (doc.contains("reorder")) {
    for (const auto& [len_text, perm_doc] : doc.at("reorder").items()) {
      const std::size_t len = std::stoul(len_text);
      std::vector<std::size_t> perm =
          perm_doc.get<std::vector<std::size_t>>();
      if (perm.size() != len)
        throw ConfigError("reorder pattern for length " + len_text +
                          " has size " + std::to_string(perm.size()));
      std::vector<char> hit(len, 0);
      for (std::size_t p : perm) {
        if (p >= len || hit[p])
          throw ConfigError("reorder pattern for length " + len_text +
                            " is not a permutation");
        hit[p] = 1;
      }
      rules.reorder.emplace(len, std::move(perm));
    }
  }
  if (doc.contains("noun_classes"))
    for (const auto& [token, cls] : doc.at("noun_classes").items())
      rules.noun_classes.emplace(token, cls.get<std::string>());
  if (doc.contains("agreement_splits"))
    for (const auto& [token, splits] : doc.at("agreement_splits").items())
      for (const auto& [cls, form] : splits.items())
        rules.agreement_splits[token][cls] = form.get<std::string>();
  if (doc.contains("noise_rate")) {
    rules.noise_rate = doc.at("noise_rate").get<double>();
    if (rules.noise_rate < 0.0 || rules.noise_rate > 1.0)
      throw ConfigError("noise_rate must be in [0, 1]");
  }
  if (doc.contains("seed")) rules.seed = doc.at("seed").get<std::uint64_t>();
  return rules;
}

MockRuleSet MockRuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock rules file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string mock_translate(const MockRuleSet& rules, std::string_view text) {
  std::vector<std::string> tokens;
  for (auto& tok : tokenize(text, Tokenizer::kWhitespace)) {
    auto it = rules.word_map.find(tok);
    if (it == rules.word_map.end())
      tokens.push_back(std::move(tok));
    else if (!it->second.empty())
      tokens.push_back(it->second);
    // empty mapping deletes the token
  }

  // Agreement: inflect by the class of the nearest classed token, looking
  // forward first.
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto split_it = rules.agreement_splits.find(tokens[i]);
    if (split_it == rules.agreement_splits.end()) continue;
    const std::string* cls = nullptr;
    for (std::size_t j = i + 1; j < tokens.size() && !cls; ++j) {
      auto c = rules.noun_classes.find(tokens[j]);
      if (c != rules.noun_classes.end()) cls = &c->second;
    }
    for (std::size_t j = i; j > 0 && !cls; --j) {
      auto c = rules.noun_classes.find(tokens[j - 1]);
      if (c != rules.noun_classes.end()) cls = &c->second;
    }
    if (!cls) continue;
    auto form = split_it->second.find(*cls);
    if (form != split_it->second.end()) tokens[i] = form->second;
  }

  if (auto perm_it = rules.reorder.find(tokens.size());
      perm_it != rules.reorder.end()) {
    std::vector<std::string> reordered(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i)
      reordered[i] = std::move(tokens[perm_it->second[i]]);
    tokens = std::move(reordered);
  }

  if (rules.noise_rate > 0.0 && !tokens.empty()) {
    SplitMix64 rng(fnv1a64(text) ^ (rules.seed * 0x9e3779b97f4a7c15ULL + 1));
    if (rng.uniform01() < rules.noise_rate) {
      const bool duplicate = tokens.size() < 2 || rng.next() % 2 == 0;
      if (duplicate) {
        const std::size_t at = rng.below(tokens.size());
        tokens.insert(tokens.begin() + at, tokens[at]);
      } else {
        const std::size_t at = rng.below(tokens.size() - 1);
        std::swap(tokens[at], tokens[at + 1]);
      }
    }
  }

  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> MockProvider::translate_batch(
    const std::vector<std::string>& texts, const std::string&,
    const std::string&) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& text : texts) out.push_back(mock_translate(rules_, text));
  return out;
}

namespace {

std::string cache_key(const std::string& src, const std::string& tgt,
                      const std::string& text) {
  std::string key;
  key.reserve(src.size() + tgt.size() + text.size() + 2);
  key += src;
  key += '\x1f';
  key += tgt;
  key += '\x1f';
  key += text;
  return key;
}

}  // namespace

TranslationCache::TranslationCache(std::filesystem::path path)
    : path_(std::move(path)), persistent_(true) {
  std::ifstream in(path_);
  if (!in) return;  // fresh cache; the file appears on first insert
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception&) {
      continue;  // tolerate torn last line from a crashed run
    }
    entries_[cache_key(doc.at("src").get<std::string>(),
                       doc.at("tgt").get<std::string>(),
                       doc.at("text").get<std::string>())] =
        doc.at("translation").get<std::string>();
  }
}

std::optional<std::string> TranslationCache::lookup(
    const std::string& src, const std::string& tgt,
    const std::string& text) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(cache_key(src, tgt, text));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::insert(const std::string& src, const std::string& tgt,
                              const std::string& text,
                              const std::string& translation) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = entries_.emplace(cache_key(src, tgt, text), translation);
  if (!inserted) return;
  if (!persistent_) return;
  if (path_.has_parent_path())
    std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  json doc;
  doc["src"] = src;
  doc["tgt"] = tgt;
  doc["text"] = text;
  doc["translation"] = translation;
  out << doc.dump() << '\n';
}

std::size_t TranslationCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

TranslationService::TranslationService(TranslationCache* cache,
                                       Provider* provider)
    : cache_(cache), provider_(provider) {}

std::vector<std::string> TranslationService::translate(
    const TranslationRequest& request) {
  if (request.texts.empty()) return {};
  const std::size_t n = request.texts.size();
  std::vector<std::string> results(n);
  std::vector<char> resolved(n, 0);

  auto settle_from_cache = [&] {
    bool all = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (resolved[i]) continue;
      if (cache_) {
        auto hit = cache_->lookup(request.source_lang, request.target_lang,
                                  request.texts[i]);
        if (hit) {
          results[i] = std::move(*hit);
          resolved[i] = 1;
          continue;
        }
      }
      all = false;
    }
    return all;
  };

  if (settle_from_cache()) return results;
  if (!provider_)
    throw CacheMiss("cache-only translation: missing entries for " +
                    request.source_lang + "->" + request.target_lang);

  if (!cache_) {
    // Without a cache there is nowhere for another thread's result to land,
    // so skip the in-flight bookkeeping and translate directly (duplicates
    // within the batch still collapse to one slot).
    std::vector<std::string> unique;
    std::map<std::string, std::size_t> slot_of;
    for (const auto& text : request.texts) {
      if (slot_of.emplace(text, unique.size()).second) unique.push_back(text);
    }
    std::vector<std::string> translated = provider_->translate_batch(
        unique, request.source_lang, request.target_lang);
    ++provider_calls_;
    if (translated.size() != unique.size())
      throw ProviderUnavailable("provider returned a misaligned batch");
    for (std::size_t i = 0; i < n; ++i)
      results[i] = translated[slot_of.at(request.texts[i])];
    return results;
  }

  // Claim unresolved keys; keys already being translated by another thread
  // are awaited instead of re-requested.
  std::vector<std::string> owned;
  {
    std::unique_lock<std::mutex> lock(pending_mutex_);
    std::set<std::string> owned_keys;
    for (std::size_t i = 0; i < n; ++i) {
      if (resolved[i]) continue;
      const std::string key = cache_key(request.source_lang,
                                        request.target_lang, request.texts[i]);
      if (pending_.count(key) || owned_keys.count(key)) continue;
      pending_.insert(key);
      owned_keys.insert(key);
      owned.push_back(request.texts[i]);
    }
  }

  if (!owned.empty()) {
    std::vector<std::string> translated;
    try {
      translated = provider_->translate_batch(owned, request.source_lang,
                                              request.target_lang);
      ++provider_calls_;
    } catch (...) {
      std::unique_lock<std::mutex> lock(pending_mutex_);
      for (const auto& text : owned)
        pending_.erase(
            cache_key(request.source_lang, request.target_lang, text));
      pending_cv_.notify_all();
      throw;
    }
    if (translated.size() != owned.size())
      throw ProviderUnavailable("provider returned " +
                                std::to_string(translated.size()) +
                                " translations for " +
                                std::to_string(owned.size()) + " texts");
    for (std::size_t i = 0; i < owned.size(); ++i)
      cache_->insert(request.source_lang, request.target_lang, owned[i],
                     translated[i]);
    {
      std::unique_lock<std::mutex> lock(pending_mutex_);
      for (const auto& text : owned)
        pending_.erase(
            cache_key(request.source_lang, request.target_lang, text));
    }
    pending_cv_.notify_all();
  }

  // Wait for keys owned by other threads, then read everything from cache.
  {
    std::unique_lock<std::mutex> lock(pending_mutex_);
    pending_cv_.wait(lock, [&] {
      for (std::size_t i = 0; i < n; ++i) {
        if (resolved[i]) continue;
        if (pending_.count(cache_key(request.source_lang, request.target_lang,
                                     request.texts[i])))
          return false;
      }
      return true;
    });
  }
  if (!settle_from_cache())
    throw ProviderUnavailable(
        "translation missing after provider round-trip (concurrent failure)");
  return results;
}

HttpProviderConfig HttpProviderConfig::from_env() {
  HttpProviderConfig cfg;
  if (const char* endpoint = std::getenv("MT_ENDPOINT")) cfg.endpoint = endpoint;
  if (const char* key = std::getenv("MT_API_KEY")) cfg.api_key = key;
  if (const char* header = std::getenv("MT_API_KEY_HEADER"))
    cfg.api_key_header = header;
  return cfg;
}

HttpProvider::HttpProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint.empty())
    throw ConfigError("http provider needs an endpoint (MT_ENDPOINT)");
  if (!cfg_.api_key_header.empty() && cfg_.api_key.empty())
    throw AuthError("api key header '" + cfg_.api_key_header +
                    "' configured but no api key set (MT_API_KEY)");
}

namespace {

// Splits "http://host:port/path" into client base and path.
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const std::size_t scheme = url.find("://");
  const std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  const std::size_t path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::vector<std::string> HttpProvider::translate_chunk(
    const std::vector<std::string>& texts, const std::string& source_lang,
    const std::string& target_lang) {
  const auto [base, path] = split_endpoint(cfg_.endpoint);

  json body;
  body[cfg_.texts_key] = texts;
  body[cfg_.source_key] = source_lang;
  body[cfg_.target_key] = target_lang;
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          cfg_.initial_backoff_ms * (1 << (attempt - 1))));
    }
    httplib::Client client(base);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    httplib::Headers headers;
    if (!cfg_.api_key_header.empty())
      headers.emplace(cfg_.api_key_header, cfg_.api_key);
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection failed";
      continue;
    }
    if (res->status == 401 || res->status == 403)
      throw AuthError("translation endpoint rejected credentials (HTTP " +
                      std::to_string(res->status) + ")");
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      json doc = json::parse(res->body);
      const json& list =
          cfg_.response_list_pointer.empty()
              ? doc
              : doc.at(json::json_pointer(cfg_.response_list_pointer));
      if (!list.is_array() || list.size() != texts.size())
        throw ConfigError("response array shape mismatch");
      std::vector<std::string> out;
      out.reserve(texts.size());
      for (const auto& item : list) {
        const json& value =
            cfg_.response_item_pointer.empty()
                ? item
                : item.at(json::json_pointer(cfg_.response_item_pointer));
        out.push_back(value.get<std::string>());
      }
      return out;
    } catch (const json::exception& e) {
      last_error = std::string("bad response: ") + e.what();
      continue;
    } catch (const ConfigError& e) {
      last_error = e.what();
      continue;
    }
  }
  throw ProviderUnavailable("translation failed after " +
                            std::to_string(cfg_.max_attempts) + " attempts: " +
                            last_error);
}

std::vector<std::string> HttpProvider::translate_batch(
    const std::vector<std::string>& texts, const std::string& source_lang,
    const std::string& target_lang) {
  if (texts.empty()) return {};
  const std::size_t batch = std::max<std::size_t>(1, cfg_.max_batch);
  const std::size_t chunk_count = (texts.size() + batch - 1) / batch;

  std::vector<std::vector<std::string>> chunk_results(chunk_count);
  std::atomic<std::size_t> next_chunk{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t ci = next_chunk.fetch_add(1);
      if (ci >= chunk_count) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error) return;  // whole batch already failed
      }
      const std::size_t begin = ci * batch;
      const std::size_t end = std::min(texts.size(), begin + batch);
      try {
        chunk_results[ci] = translate_chunk(
            std::vector<std::string>(texts.begin() + begin, texts.begin() + end),
            source_lang, target_lang);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(std::max<std::size_t>(1, cfg_.max_concurrency),
                            chunk_count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::vector<std::string> out;
  out.reserve(texts.size());
  for (auto& chunk : chunk_results)
    for (auto& text : chunk) out.push_back(std::move(text));
  return out;
}

}  // namespace templar
