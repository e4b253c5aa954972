#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "align/gateway.hpp"
#include "align/learner_data.hpp"
#include "align/recommender.hpp"

namespace align::testing {

/// Source tree root, for the bundled sample course.
std::filesystem::path source_dir();
std::filesystem::path sample_course();

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Small hand-rolled generator helpers over a seeded engine.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  std::uint64_t below(std::uint64_t n);  // uniform in [0, n)
  std::int64_t between(std::int64_t lo, std::int64_t hi);  // inclusive
  double unit();                            // [0, 1)
  double real(double lo, double hi);
  bool coin(double p = 0.5);
  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }
  std::string word(std::size_t min_len = 3, std::size_t max_len = 9);
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Oracles, written independently of the library code they check.

struct OracleClassCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Expands the matrix into individual (truth, prediction) instances and counts each class one instance at a time.
std::vector<OracleClassCounts> oracle_class_counts(const std::vector<std::vector<std::size_t>>& counts);

struct OracleMetrics {
  std::vector<double> precision, recall, f1;
  double macro_precision = 0, macro_recall = 0, macro_f1 = 0, accuracy = 0;
};
OracleMetrics oracle_metrics(const std::vector<std::vector<std::size_t>>& counts);

/// Per-topic plain mean of points_earned / points_possible, accumulated in long double in input order.
std::map<Topic, double> oracle_topic_means(const std::vector<GradebookEntry>& entries);

/// Repeatedly extracts the smallest (rho at 1e-9 resolution, topic) among topics with rho < tau.
std::vector<std::pair<Topic, double>> oracle_gaps(const std::map<Topic, double>& means, double tau);

// ---------------------------------------------------------------------------
// Backends

/// Replies through a user-provided function; records every request it sees.
class FakeChat final : public ChatBackend {
 public:
  using Responder = std::function<std::string(const AgentRequest&)>;
  explicit FakeChat(Responder responder) : responder_(std::move(responder)) {}
  AgentResponse send(const AgentRequest& request, const std::string& digest) override;
  const std::vector<AgentRequest>& requests() const { return requests_; }

 private:
  Responder responder_;
  std::vector<AgentRequest> requests_;
};

class MapSearch final : public SearchBackend {
 public:
  explicit MapSearch(std::map<std::string, std::vector<SearchResult>> results) : results_(std::move(results)) {}
  /// Unknown queries return the `fallback` list when set, otherwise FixtureMiss.
  std::vector<SearchResult> search(const std::string& query) override;
  std::optional<std::vector<SearchResult>> fallback;
  std::vector<std::string> queries;

 private:
  std::map<std::string, std::vector<SearchResult>> results_;
};

class MapFetch final : public FetchBackend {
 public:
  explicit MapFetch(std::map<std::string, FetchedPage> pages) : pages_(std::move(pages)) {}
  /// Status 0 or an unknown URL is a connection failure (BrokenLink).
  FetchedPage fetch(const std::string& url) override;
  std::vector<std::string> fetched;

 private:
  std::map<std::string, FetchedPage> pages_;
};

/// A minimal HTML page whose visible text mentions `text`.
FetchedPage html_page(const std::string& title, const std::string& text, int status = 200);

// ---------------------------------------------------------------------------
// Data builders

GradebookEntry grade(const std::string& student, const std::string& assessment, const Topic& topic, double earned,
                     double possible);
QuizQuestion mc_question(const std::string& id, const std::string& quiz, const Topic& topic,
                         std::vector<std::string> options, const std::string& answer,
                         std::vector<std::string> tags = {}, std::optional<Difficulty> level = std::nullopt);
PreferenceSurvey survey(const std::string& student, std::vector<Modality> ranking, Pacing pacing = Pacing::SelfPaced);

// ---------------------------------------------------------------------------
// Pipeline output checks

/// Every regular file under `dir` (relative path -> bytes).
std::map<std::string, std::string> read_tree(const std::filesystem::path& dir);

/// Problems found in a pipeline output directory: a summary without all five section headings, or a
/// recommended resource whose topic is not a gap with rho < tau_used or whose fixture page is not 2xx.
/// Empty when everything checks out.
std::vector<std::string> audit_pipeline_outputs(const std::filesystem::path& out_dir, const std::filesystem::path& fixtures_dir);

}  // namespace align::testing
