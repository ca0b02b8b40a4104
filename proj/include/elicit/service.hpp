#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "elicit/catalog.hpp"
#include "elicit/core_model.hpp"
#include "elicit/gateway.hpp"
#include "elicit/pipelines.hpp"
#include "elicit/prompts.hpp"
#include "elicit/stats/models.hpp"

namespace httplib {
class Server;
}

namespace elicit::service {

class Clock {
 public:
  virtual ~Clock() = default;
  /// ISO-8601 UTC, second resolution.
  virtual std::string now() = 0;
};

class SystemClock final : public Clock {
 public:
  std::string now() override;
};

/// Fixed epoch plus one second per call, for reproducible replay runs.
class LogicalClock final : public Clock {
 public:
  explicit LogicalClock(std::int64_t epoch_seconds = 1704067200);  // 2024-01-01T00:00:00Z
  std::string now() override;

 private:
  std::atomic<std::int64_t> next_;
};

std::string format_instant(std::int64_t unix_seconds);

struct Suggestion {
  std::string suggestion_id;
  std::string question;
  GenerationMode mode = GenerationMode::MultiAvoid;
  std::optional<std::string> criterion_id;
  bool accepted = false;
};

struct SuggestionBundle {
  std::string session_id;
  std::vector<Turn> basis_turns;
  std::vector<Suggestion> suggestions;
  std::string generated_at;
};

nlohmann::json to_json(const SuggestionBundle& b);
SuggestionBundle bundle_from_json(const nlohmann::json& j);

struct StoredRating {
  std::string rater_id;
  std::string suggestion_id;
  stats::Dimension dimension = stats::Dimension::Relevancy;
  int score = 1;
  int scale_size = 5;
  std::string recorded_at;
};

/// Sessions with per-session write serialization. With a directory, every
/// event is appended to <dir>/<session_id>.jsonl before it is applied, and
/// existing files are replayed on construction.
class SessionStore {
 public:
  SessionStore(std::optional<std::filesystem::path> dir, Clock& clock);

  Session create(const InterviewDomain& domain);
  /// New session holding already-recorded turns; timestamps and provenance are kept.
  Session import(const InterviewDomain& domain, std::span<const Turn> turns);
  /// Throws UnknownSession, SessionClosed or EmptyText.
  Turn append(const std::string& session_id, Speaker speaker, std::string_view text,
              std::optional<Provenance> provenance = std::nullopt);
  Session snapshot(const std::string& session_id) const;
  Session close(const std::string& session_id);
  std::vector<std::string> ids() const;

  /// Next suggestion-bundle number for the session (1, 2, ...).
  std::size_t reserve_bundle(const std::string& session_id);
  void add_bundle(const SuggestionBundle& bundle);
  /// Appends the INTERVIEWER turn for a suggestion. Throws UnknownSuggestion,
  /// AlreadyAccepted, SessionClosed or EmptyText.
  Turn accept(const std::string& session_id, const std::string& suggestion_id,
              std::optional<std::string> edited_text);
  std::optional<Suggestion> find_suggestion(const std::string& session_id,
                                            const std::string& suggestion_id) const;

  /// Throws UnknownSuggestion or OutOfScaleScore.
  void rate(const std::string& session_id, StoredRating rating);
  /// Every rating in arrival order.
  std::vector<StoredRating> rating_history(const std::string& session_id) const;
  /// Latest rating per (rater, suggestion, dimension) as stats records.
  std::vector<stats::RatingRecord> rating_export(const std::string& session_id) const;

  Clock& clock() noexcept { return clock_; }

 private:
  struct Entry {
    mutable std::mutex mu;
    Session session;
    std::vector<Suggestion> suggestions;
    std::size_t bundles = 0;
    std::vector<StoredRating> ratings;
  };

  Entry& entry(const std::string& session_id) const;
  void persist(const std::string& session_id, const nlohmann::json& event) const;
  void replay_file(const std::filesystem::path& file);

  std::optional<std::filesystem::path> dir_;
  Clock& clock_;
  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::unique_ptr<Entry>> entries_;
  std::size_t created_ = 0;
};

struct ServiceConfig {
  std::size_t default_k = 4;
  std::chrono::milliseconds suggestion_timeout{30000};
  PipelineOptions pipeline;
  std::optional<std::filesystem::path> static_dir;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// The HTTP API. `handle` is transport independent; `listen` binds it to a
/// cpp-httplib server.
class Service {
 public:
  Service(ChatGateway& gateway, const Catalog& catalog, const PromptRenderer& renderer,
          const DomainRegistry& domains, SessionStore& store, ServiceConfig config = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  /// Binds and serves until stop(). Port 0 picks a free port, reported by port().
  bool listen(const std::string& host, int port);
  /// Binds without blocking; call serve() afterwards (possibly on another thread).
  int bind(const std::string& host, int port);
  void serve();
  void stop();
  [[nodiscard]] int port() const noexcept { return port_; }

  /// Generates a bundle directly (used by handle). Throws on failure.
  SuggestionBundle suggest(const std::string& session_id, GenerationMode mode,
                           const std::vector<std::string>& criteria, std::size_t k);

 private:
  HttpResponse route(std::string_view method, std::string_view path, std::string_view body);

  ChatGateway& gateway_;
  const Catalog& catalog_;
  const PromptRenderer& renderer_;
  const DomainRegistry& domains_;
  SessionStore& store_;
  ServiceConfig config_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = 0;
  std::mutex pending_mu_;
  std::list<std::future<void>> pending_;  // timed-out generations still running
};

/// Maps an error code to its HTTP status.
int http_status(ErrorCode code) noexcept;

}  // namespace elicit::service
