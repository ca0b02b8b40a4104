#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace elicit {

inline constexpr std::string_view kDefaultModelId = "gpt-4o-2024-08-06";
inline constexpr double kDefaultTemperature = 1.0;

enum class ChatRole { System, User };

std::string_view to_string(ChatRole r) noexcept;

struct ChatMessage {
  ChatRole role = ChatRole::User;
  std::string content;
};

struct ChatRequest {
  std::string model_id{kDefaultModelId};
  double temperature = kDefaultTemperature;
  std::vector<ChatMessage> messages;
  std::string tag;  // caller correlation key, also the replay key

  /// One USER message carrying `prompt`.
  static ChatRequest user(std::string tag, std::string prompt);
};

enum class Backend { Live, Replay };

std::string_view to_string(Backend b) noexcept;

struct ChatResponse {
  std::string content;
  std::chrono::milliseconds latency{0};
  Backend backend = Backend::Live;
  std::string raw_digest;  // SHA-256 of content
};

struct Verdict {
  bool value = false;  // true: the criterion's standard is met
};

std::string sha256_hex(std::string_view data);

/// SHA-256 over "ROLE\ncontent\n" for every message in order.
std::string prompt_digest(const ChatRequest& request);

/// Case-insensitive "yes"/"no" after trimming whitespace, surrounding quotes
/// and terminal punctuation. Throws AmbiguousVerdict otherwise.
[[nodiscard]] Verdict parse_yes_no(std::string_view content);

/// Trims whitespace and surrounding quote marks. Strict mode requires a
/// single line ending in '?' with no "Sure! ..." / "Here is ...:" preamble.
/// Throws NotAQuestion.
[[nodiscard]] std::string parse_question(std::string_view content, bool lenient = false);

// --- recording ---------------------------------------------------------------

struct RecordEntry {
  std::string tag;
  std::string prompt_digest;
  std::string content;
};

/// Line-delimited JSON records {tag, prompt_digest, content}. Later lines for
/// the same tag replace earlier ones. Thread-safe.
class Recording {
 public:
  Recording() = default;
  Recording(const Recording& other);
  Recording(Recording&& other) noexcept;
  Recording& operator=(Recording other) noexcept;

  static Recording parse(std::string_view jsonl);
  static Recording load(const std::filesystem::path& path);

  [[nodiscard]] std::optional<RecordEntry> find(const std::string& tag) const;
  void put(RecordEntry entry);
  [[nodiscard]] std::size_t size() const;
  /// Records sorted by tag.
  [[nodiscard]] std::string format() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, RecordEntry> entries_;
};

std::string format_record_line(const RecordEntry& entry);

// --- transports and gateways ---------------------------------------------------

struct TransportResult {
  int status = 0;  // HTTP status; 0 when the transport itself failed
  std::string body;
  std::string error;
};

/// Sends one serialized chat-completion request body.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual TransportResult post(const std::string& body) = 0;
};

struct LiveConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key;
  std::chrono::seconds timeout{60};

  /// ELICIT_API_ENDPOINT, ELICIT_API_KEY (falls back to OPENAI_API_KEY).
  static LiveConfig from_env();
};

/// cpp-httplib client speaking the common chat-completion wire format.
class HttpTransport final : public ChatTransport {
 public:
  explicit HttpTransport(LiveConfig config);
  TransportResult post(const std::string& body) override;

 private:
  LiveConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
};

/// Serialized request body: {"model", "temperature", "messages": [{role, content}]}.
std::string chat_request_body(const ChatRequest& request);

class ChatGateway {
 public:
  virtual ~ChatGateway() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  [[nodiscard]] virtual Backend backend() const noexcept = 0;
};

/// Looks up the caller tag; a recorded digest that differs from the request's
/// prompt digest is a miss (the template or inputs changed).
class ReplayGateway final : public ChatGateway {
 public:
  explicit ReplayGateway(std::shared_ptr<const Recording> recording);
  ChatResponse complete(const ChatRequest& request) override;
  [[nodiscard]] Backend backend() const noexcept override { return Backend::Replay; }

 private:
  std::shared_ptr<const Recording> recording_;
};

/// Retries transport failures, 5xx and 429 with exponential backoff; 401/403
/// fail immediately. Bounds concurrent in-flight requests. When a record path
/// is set every successful response is appended to it as a RecordEntry.
class LiveGateway final : public ChatGateway {
 public:
  LiveGateway(std::shared_ptr<ChatTransport> transport, RetryPolicy retry = {},
              std::size_t max_in_flight = 4);

  void record_to(std::filesystem::path path);
  ChatResponse complete(const ChatRequest& request) override;
  [[nodiscard]] Backend backend() const noexcept override { return Backend::Live; }

  /// Replaces std::this_thread::sleep_for (tests).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper);

 private:
  class Slot;

  std::shared_ptr<ChatTransport> transport_;
  RetryPolicy retry_;
  std::size_t max_in_flight_;
  std::size_t in_flight_ = 0;
  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  std::function<void(std::chrono::milliseconds)> sleeper_;
  std::mutex record_mutex_;
  std::optional<std::filesystem::path> record_path_;
};

}  // namespace elicit
