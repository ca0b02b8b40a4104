#include "elicit/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <iomanip>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "elicit/core_model.hpp"
#include "elicit/error.hpp"
#include "elicit/io.hpp"

namespace elicit {

std::string_view to_string(ChatRole r) noexcept { return r == ChatRole::System ? "SYSTEM" : "USER"; }
std::string_view to_string(Backend b) noexcept { return b == Backend::Live ? "LIVE" : "REPLAY"; }

ChatRequest ChatRequest::user(std::string tag, std::string prompt) {
  ChatRequest r;
  r.tag = std::move(tag);
  r.messages.push_back({ChatRole::User, std::move(prompt)});
  return r;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i)
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return out.str();
}

std::string prompt_digest(const ChatRequest& request) {
  std::string canonical;
  for (const auto& m : request.messages) {
    canonical += to_string(m.role);
    canonical += '\n';
    canonical += m.content;
    canonical += '\n';
  }
  return sha256_hex(canonical);
}

// --- output parsing ----------------------------------------------------------

namespace {

constexpr std::string_view kQuotes[] = {"\"", "'", "`", "\xE2\x80\x9C", "\xE2\x80\x9D",
                                        "\xE2\x80\x98", "\xE2\x80\x99"};

std::string_view strip_quotes_once(std::string_view s, bool& changed) {
  changed = false;
  for (auto open : kQuotes) {
    if (s.size() >= open.size() && s.substr(0, open.size()) == open) {
      for (auto close : kQuotes) {
        if (s.size() >= open.size() + close.size() &&
            s.substr(s.size() - close.size()) == close) {
          changed = true;
          return s.substr(open.size(), s.size() - open.size() - close.size());
        }
      }
    }
  }
  return s;
}

std::string strip_quotes(std::string_view s) {
  std::string cur = trim(s);
  bool changed = true;
  while (changed && !cur.empty()) {
    cur = trim(strip_quotes_once(cur, changed));
  }
  return cur;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Verdict parse_yes_no(std::string_view content) {
  std::string s = strip_quotes(content);
  while (!s.empty() && std::string_view(".!?,;:").find(s.back()) != std::string_view::npos)
    s.pop_back();
  s = lower(strip_quotes(s));
  if (s == "yes") return {true};
  if (s == "no") return {false};
  throw Error(ErrorCode::AmbiguousVerdict,
              "expected 'Yes' or 'No', got '" + std::string(content.substr(0, 80)) + "'");
}

std::string parse_question(std::string_view content, bool lenient) {
  std::string q = strip_quotes(content);
  if (q.empty()) throw Error(ErrorCode::NotAQuestion, "empty model output");
  if (lenient) return q;
  auto fail = [&](const char* why) {
    throw Error(ErrorCode::NotAQuestion,
                std::string(why) + ": '" + std::string(content.substr(0, 80)) + "'");
  };
  if (q.back() != '?') fail("does not end with '?'");
  if (q.find('\n') != std::string::npos) fail("spans multiple lines");
  if (q.find(": ") != std::string::npos || q.find("! ") != std::string::npos)
    fail("carries a preamble");
  return q;
}

// --- recording -----------------------------------------------------------------

std::string format_record_line(const RecordEntry& e) {
  return nlohmann::json{{"tag", e.tag}, {"prompt_digest", e.prompt_digest}, {"content", e.content}}
      .dump();
}

Recording::Recording(const Recording& other) {
  std::lock_guard lock(other.mutex_);
  entries_ = other.entries_;
}

Recording::Recording(Recording&& other) noexcept : entries_(std::move(other.entries_)) {}

Recording& Recording::operator=(Recording other) noexcept {
  std::lock_guard lock(mutex_);
  entries_ = std::move(other.entries_);
  return *this;
}

Recording Recording::parse(std::string_view jsonl) {
  Recording r;
  auto lines = io::split_lines(jsonl);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    try {
      auto j = nlohmann::json::parse(lines[n]);
      r.put({j.at("tag").get<std::string>(), j.value("prompt_digest", ""),
             j.at("content").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  "recording line " + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return r;
}

Recording Recording::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

std::optional<RecordEntry> Recording::find(const std::string& tag) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(tag);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Recording::put(RecordEntry entry) {
  std::lock_guard lock(mutex_);
  auto tag = entry.tag;
  entries_[tag] = std::move(entry);
}

std::size_t Recording::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string Recording::format() const {
  std::lock_guard lock(mutex_);
  std::string out;
  for (const auto& [tag, e] : entries_) out += format_record_line(e) + "\n";
  return out;
}

// --- live transport ----------------------------------------------------------------

LiveConfig LiveConfig::from_env() {
  LiveConfig c;
  if (const char* e = std::getenv("ELICIT_API_ENDPOINT"); e && *e) c.endpoint = e;
  if (const char* k = std::getenv("ELICIT_API_KEY"); k && *k)
    c.api_key = k;
  else if (const char* o = std::getenv("OPENAI_API_KEY"); o && *o)
    c.api_key = o;
  return c;
}

HttpTransport::HttpTransport(LiveConfig config) : config_(std::move(config)) {
  const auto& url = config_.endpoint;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorCode::InvalidParameter, "endpoint must be an absolute URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

TransportResult HttpTransport::post(const std::string& body) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) return {0, {}, httplib::to_string(res.error())};
  return {res->status, res->body, {}};
}

std::string chat_request_body(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages)
    messages.push_back({{"role", m.role == ChatRole::System ? "system" : "user"},
                        {"content", m.content}});
  return nlohmann::json{{"model", request.model_id},
                        {"temperature", request.temperature},
                        {"messages", std::move(messages)}}
      .dump();
}

// --- gateways ------------------------------------------------------------------------

namespace {

void validate(const ChatRequest& request) {
  if (request.messages.empty())
    throw Error(ErrorCode::InvalidParameter, "chat request has no messages");
  if (!(request.temperature >= 0.0))
    throw Error(ErrorCode::InvalidParameter, "temperature must be >= 0");
}

}  // namespace

ReplayGateway::ReplayGateway(std::shared_ptr<const Recording> recording)
    : recording_(std::move(recording)) {}

ChatResponse ReplayGateway::complete(const ChatRequest& request) {
  validate(request);
  auto entry = recording_->find(request.tag);
  if (!entry) throw Error(ErrorCode::ReplayMiss, "no recording for tag '" + request.tag + "'");
  if (!entry->prompt_digest.empty() && entry->prompt_digest != prompt_digest(request))
    throw Error(ErrorCode::ReplayMiss,
                "prompt digest changed since recording for tag '" + request.tag + "'");
  return ChatResponse{entry->content, std::chrono::milliseconds{0}, Backend::Replay,
                      sha256_hex(entry->content)};
}

class LiveGateway::Slot {
 public:
  explicit Slot(LiveGateway& g) : g_(g) {
    std::unique_lock lock(g_.slots_mutex_);
    g_.slots_cv_.wait(lock, [&] { return g_.in_flight_ < g_.max_in_flight_; });
    ++g_.in_flight_;
  }
  ~Slot() {
    {
      std::lock_guard lock(g_.slots_mutex_);
      --g_.in_flight_;
    }
    g_.slots_cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  LiveGateway& g_;
};

LiveGateway::LiveGateway(std::shared_ptr<ChatTransport> transport, RetryPolicy retry,
                         std::size_t max_in_flight)
    : transport_(std::move(transport)),
      retry_(retry),
      max_in_flight_(std::max<std::size_t>(1, max_in_flight)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

void LiveGateway::record_to(std::filesystem::path path) { record_path_ = std::move(path); }

void LiveGateway::set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) {
  sleeper_ = std::move(sleeper);
}

ChatResponse LiveGateway::complete(const ChatRequest& request) {
  validate(request);
  const auto body = chat_request_body(request);
  const auto started = std::chrono::steady_clock::now();

  TransportResult last;
  auto delay = retry_.base_delay;
  for (int attempt = 0;; ++attempt) {
    {
      Slot slot(*this);
      last = transport_->post(body);
    }
    if (last.status == 401 || last.status == 403)
      throw Error(ErrorCode::AuthError, "backend rejected credential (HTTP " +
                                            std::to_string(last.status) + ")");
    if (last.status >= 200 && last.status < 300) break;
    const bool retryable = last.status == 0 || last.status == 429 || last.status >= 500;
    if (!retryable || attempt >= retry_.max_retries) {
      if (last.status == 429)
        throw Error(ErrorCode::RateLimited,
                    "rate limited after " + std::to_string(attempt + 1) + " attempts");
      throw Error(ErrorCode::TransportError,
                  (last.status == 0 ? last.error : "HTTP " + std::to_string(last.status)) +
                      " after " + std::to_string(attempt + 1) + " attempts");
    }
    sleeper_(delay);
    delay = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(delay.count()) * retry_.multiplier));
  }

  std::string content;
  try {
    auto j = nlohmann::json::parse(last.body);
    content = j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::TransportError, std::string("malformed completion body: ") + e.what());
  }

  if (record_path_) {
    std::lock_guard lock(record_mutex_);
    std::ofstream out(*record_path_, std::ios::app | std::ios::binary);
    out << format_record_line({request.tag, prompt_digest(request), content}) << '\n';
  }

  return ChatResponse{
      content,
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                            started),
      Backend::Live, sha256_hex(content)};
}

}  // namespace elicit
