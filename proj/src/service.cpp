#include "elicit/service.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "elicit/error.hpp"
#include "elicit/io.hpp"

namespace elicit::service {

using nlohmann::json;

std::string format_instant(std::int64_t unix_seconds) {
  const std::time_t t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string SystemClock::now() {
  return format_instant(std::chrono::duration_cast<std::chrono::seconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count());
}

LogicalClock::LogicalClock(std::int64_t epoch_seconds) : next_(epoch_seconds) {}

std::string LogicalClock::now() { return format_instant(next_.fetch_add(1)); }

namespace {

json suggestion_json(const Suggestion& s) {
  json j{{"suggestion_id", s.suggestion_id},
         {"question", s.question},
         {"mode", to_string(s.mode)}};
  j["criterion_id"] = s.criterion_id ? json(*s.criterion_id) : json();
  return j;
}

}  // namespace

json to_json(const SuggestionBundle& b) {
  json suggestions = json::array();
  for (const auto& s : b.suggestions) suggestions.push_back(suggestion_json(s));
  return {{"session_id", b.session_id},
          {"basis_turns", b.basis_turns},
          {"suggestions", std::move(suggestions)},
          {"generated_at", b.generated_at}};
}

SuggestionBundle bundle_from_json(const json& j) {
  SuggestionBundle b;
  b.session_id = j.at("session_id").get<std::string>();
  b.basis_turns = j.at("basis_turns").get<std::vector<Turn>>();
  b.generated_at = j.at("generated_at").get<std::string>();
  for (const auto& s : j.at("suggestions")) {
    Suggestion out;
    out.suggestion_id = s.at("suggestion_id").get<std::string>();
    out.question = s.at("question").get<std::string>();
    out.mode = parse_generation_mode(s.at("mode").get<std::string>());
    if (auto c = s.find("criterion_id"); c != s.end() && !c->is_null())
      out.criterion_id = c->get<std::string>();
    b.suggestions.push_back(std::move(out));
  }
  return b;
}

// --- store -------------------------------------------------------------------

namespace {

json rating_json(const StoredRating& r) {
  return {{"rater_id", r.rater_id},       {"suggestion_id", r.suggestion_id},
          {"dimension", stats::to_string(r.dimension)}, {"score", r.score},
          {"scale_size", r.scale_size},   {"recorded_at", r.recorded_at}};
}

StoredRating rating_from_json(const json& j) {
  return {j.at("rater_id").get<std::string>(), j.at("suggestion_id").get<std::string>(),
          stats::parse_dimension(j.at("dimension").get<std::string>()), j.at("score").get<int>(),
          j.at("scale_size").get<int>(), j.value("recorded_at", "")};
}

std::string session_number(std::size_t n) {
  std::string digits = std::to_string(n);
  return "s" + std::string(digits.size() < 4 ? 4 - digits.size() : 0, '0') + digits;
}

}  // namespace

SessionStore::SessionStore(std::optional<std::filesystem::path> dir, Clock& clock)
    : dir_(std::move(dir)), clock_(clock) {
  if (!dir_) return;
  std::filesystem::create_directories(*dir_);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(*dir_))
    if (e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) replay_file(f);
}

void SessionStore::replay_file(const std::filesystem::path& file) {
  const auto lines = io::split_lines(io::read_file(file));
  auto e = std::make_unique<Entry>();
  std::string id;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    try {
      const auto ev = json::parse(lines[n]);
      const auto type = ev.at("event").get<std::string>();
      if (type == "session") {
        id = ev.at("session_id").get<std::string>();
        e->session = Session(id, ev.at("domain").get<InterviewDomain>());
      } else if (type == "turn") {
        const auto t = ev.at("turn").get<Turn>();
        if (t.index != e->session.size())
          throw Error(ErrorCode::ParseError, "turn index " + std::to_string(t.index) +
                                                 " out of sequence");
        e->session.append(t.speaker, t.text, t.timestamp, t.accepted_from);
        if (t.accepted_from)
          for (auto& s : e->suggestions)
            if (s.suggestion_id == t.accepted_from->suggestion_id) s.accepted = true;
      } else if (type == "bundle") {
        const auto b = bundle_from_json(ev.at("bundle"));
        e->bundles = std::max(e->bundles, ev.value("number", e->bundles + 1));
        for (const auto& s : b.suggestions) e->suggestions.push_back(s);
      } else if (type == "reserve") {
        e->bundles = std::max(e->bundles, ev.at("number").get<std::size_t>());
      } else if (type == "rating") {
        e->ratings.push_back(rating_from_json(ev.at("rating")));
      } else if (type == "close") {
        e->session.close();
      } else {
        throw Error(ErrorCode::ParseError, "unknown event '" + type + "'");
      }
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::ParseError,
                  file.string() + ":" + std::to_string(n + 1) + ": " + ex.what());
    }
  }
  if (id.empty()) throw Error(ErrorCode::ParseError, file.string() + " has no session event");
  if (id.size() > 1 && id[0] == 's')
    created_ = std::max(created_, static_cast<std::size_t>(std::stoul(id.substr(1))));
  entries_[id] = std::move(e);
}

void SessionStore::persist(const std::string& session_id, const json& event) const {
  if (!dir_) return;
  std::ofstream out(*dir_ / (session_id + ".jsonl"), std::ios::app | std::ios::binary);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::TransportError, "cannot write session file for " + session_id);
}

SessionStore::Entry& SessionStore::entry(const std::string& session_id) const {
  std::shared_lock lock(map_mu_);
  auto it = entries_.find(session_id);
  if (it == entries_.end())
    throw Error(ErrorCode::UnknownSession, "no session '" + session_id + "'");
  return *it->second;
}

Session SessionStore::create(const InterviewDomain& domain) {
  std::unique_lock lock(map_mu_);
  const auto id = session_number(++created_);
  auto e = std::make_unique<Entry>();
  e->session = Session(id, domain);
  persist(id, json{{"event", "session"}, {"session_id", id}, {"domain", domain},
                   {"created_at", clock_.now()}});
  auto copy = e->session;
  entries_[id] = std::move(e);
  return copy;
}

Session SessionStore::import(const InterviewDomain& domain, std::span<const Turn> turns) {
  std::unique_lock lock(map_mu_);
  const auto id = session_number(created_ + 1);
  // from_turns validates the indices before anything is written.
  auto session = Session::from_turns(id, domain, std::vector<Turn>(turns.begin(), turns.end()));
  ++created_;
  persist(id, json{{"event", "session"}, {"session_id", id}, {"domain", domain},
                   {"created_at", clock_.now()}});
  for (const auto& t : session.turns()) persist(id, json{{"event", "turn"}, {"turn", t}});
  auto e = std::make_unique<Entry>();
  e->session = session;
  entries_[id] = std::move(e);
  return session;
}

Turn SessionStore::append(const std::string& session_id, Speaker speaker, std::string_view text,
                          std::optional<Provenance> provenance) {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  // Validate on a copy so a failed write leaves memory and file in agreement.
  Session next = e.session;
  const Turn turn = next.append(speaker, text, clock_.now(), std::move(provenance));
  persist(session_id, json{{"event", "turn"}, {"turn", turn}});
  e.session = std::move(next);
  return turn;
}

Session SessionStore::snapshot(const std::string& session_id) const {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  return e.session;
}

Session SessionStore::close(const std::string& session_id) {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  if (e.session.status() != SessionStatus::Closed) {
    persist(session_id, json{{"event", "close"}, {"at", clock_.now()}});
    e.session.close();
  }
  return e.session;
}

std::vector<std::string> SessionStore::ids() const {
  std::shared_lock lock(map_mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : entries_) out.push_back(id);
  return out;
}

std::size_t SessionStore::reserve_bundle(const std::string& session_id) {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  const auto n = ++e.bundles;
  persist(session_id, json{{"event", "reserve"}, {"number", n}});
  return n;
}

void SessionStore::add_bundle(const SuggestionBundle& bundle) {
  auto& e = entry(bundle.session_id);
  std::lock_guard lock(e.mu);
  persist(bundle.session_id, json{{"event", "bundle"}, {"bundle", to_json(bundle)}});
  for (const auto& s : bundle.suggestions) e.suggestions.push_back(s);
}

std::optional<Suggestion> SessionStore::find_suggestion(const std::string& session_id,
                                                        const std::string& suggestion_id) const {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  for (const auto& s : e.suggestions)
    if (s.suggestion_id == suggestion_id) return s;
  return std::nullopt;
}

Turn SessionStore::accept(const std::string& session_id, const std::string& suggestion_id,
                          std::optional<std::string> edited_text) {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  auto it = std::find_if(e.suggestions.begin(), e.suggestions.end(),
                         [&](const auto& s) { return s.suggestion_id == suggestion_id; });
  if (it == e.suggestions.end())
    throw Error(ErrorCode::UnknownSuggestion,
                "no suggestion '" + suggestion_id + "' in session " + session_id);
  if (it->accepted)
    throw Error(ErrorCode::AlreadyAccepted, "suggestion '" + suggestion_id + "' was already accepted");
  Provenance prov{it->suggestion_id, it->mode, it->criterion_id, it->question};
  Session next = e.session;
  const Turn turn = next.append(Speaker::Interviewer, edited_text ? *edited_text : it->question,
                                clock_.now(), std::move(prov));
  persist(session_id, json{{"event", "turn"}, {"turn", turn}});
  e.session = std::move(next);
  it->accepted = true;
  return turn;
}

void SessionStore::rate(const std::string& session_id, StoredRating rating) {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  if (std::none_of(e.suggestions.begin(), e.suggestions.end(),
                   [&](const auto& s) { return s.suggestion_id == rating.suggestion_id; }))
    throw Error(ErrorCode::UnknownSuggestion, "no suggestion '" + rating.suggestion_id + "'");
  stats::validate(stats::RatingRecord{rating.rater_id, rating.suggestion_id, stats::Source::Model,
                                      rating.dimension, rating.score, rating.scale_size});
  rating.recorded_at = clock_.now();
  persist(session_id, json{{"event", "rating"}, {"rating", rating_json(rating)}});
  e.ratings.push_back(std::move(rating));
}

std::vector<StoredRating> SessionStore::rating_history(const std::string& session_id) const {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  return e.ratings;
}

std::vector<stats::RatingRecord> SessionStore::rating_export(const std::string& session_id) const {
  auto& e = entry(session_id);
  std::lock_guard lock(e.mu);
  using Key = std::tuple<std::string, std::string, stats::Dimension>;
  std::map<Key, const StoredRating*> latest;
  std::vector<Key> order;
  for (const auto& r : e.ratings) {
    Key k{r.rater_id, r.suggestion_id, r.dimension};
    if (!latest.count(k)) order.push_back(k);
    latest[k] = &r;
  }
  std::vector<stats::RatingRecord> out;
  for (const auto& k : order) {
    const auto& r = *latest[k];
    out.push_back({r.rater_id, r.suggestion_id, stats::Source::Model, r.dimension, r.score,
                   r.scale_size});
  }
  return out;
}

// --- service -----------------------------------------------------------------

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownSuggestion:
      return 404;
    case ErrorCode::SessionClosed:
    case ErrorCode::AlreadyAccepted:
      return 409;
    case ErrorCode::ParseError:
      return 400;
    case ErrorCode::InvalidRequest:
    case ErrorCode::EmptyText:
    case ErrorCode::UnknownDomain:
    case ErrorCode::UnknownCriterion:
    case ErrorCode::EmptyContext:
    case ErrorCode::EmptyField:
    case ErrorCode::EmptyCatalog:
    case ErrorCode::InvalidParameter:
    case ErrorCode::OutOfScaleScore:
      return 422;
    case ErrorCode::TransportError:
    case ErrorCode::AuthError:
    case ErrorCode::ReplayMiss:
    case ErrorCode::RateLimited:
    case ErrorCode::AmbiguousVerdict:
    case ErrorCode::NotAQuestion:
      return 502;
    case ErrorCode::Timeout:
      return 504;
    default:
      return 500;
  }
}

namespace {

HttpResponse json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_response(const Error& e, json extra = json::object()) {
  json err{{"code", to_string(e.code())}, {"message", e.what()}};
  for (auto& [k, v] : extra.items()) err[k] = v;
  return json_response(http_status(e.code()), json{{"error", std::move(err)}});
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = i;
    while (j < path.size() && path[j] != '/') ++j;
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

json parse_body(std::string_view body) {
  if (trim(body).empty()) return json::object();
  try {
    auto j = json::parse(body);
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed request body: ") + e.what());
  }
}

std::string require_string(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_string())
    throw Error(ErrorCode::InvalidRequest, std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

template <class F>
auto as_request_error(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw Error(ErrorCode::InvalidRequest, e.what());
    throw;
  }
}

}  // namespace

Service::Service(ChatGateway& gateway, const Catalog& catalog, const PromptRenderer& renderer,
                 const DomainRegistry& domains, SessionStore& store, ServiceConfig config)
    : gateway_(gateway),
      catalog_(catalog),
      renderer_(renderer),
      domains_(domains),
      store_(store),
      config_(std::move(config)) {}

Service::~Service() {
  stop();
  std::lock_guard lock(pending_mu_);
  for (auto& f : pending_) f.wait();
}

SuggestionBundle Service::suggest(const std::string& session_id, GenerationMode mode,
                                  const std::vector<std::string>& criteria, std::size_t k) {
  const Session session = store_.snapshot(session_id);
  if (session.status() == SessionStatus::Closed)
    throw Error(ErrorCode::SessionClosed, "session " + session_id + " is closed");
  std::vector<const MistakeCriterion*> selected;
  for (const auto& id : criteria) selected.push_back(&find_criterion(catalog_, id));
  if (mode == GenerationMode::Guided && selected.empty())
    throw Error(ErrorCode::InvalidRequest, "GUIDED suggestions need at least one criterion id");
  if (mode == GenerationMode::Minimal && !selected.empty())
    throw Error(ErrorCode::InvalidRequest, "MINIMAL suggestions take no criteria");

  SuggestionBundle bundle;
  bundle.session_id = session_id;
  bundle.basis_turns = tail_window(session, k);
  std::string speech;
  for (auto it = bundle.basis_turns.rbegin(); it != bundle.basis_turns.rend(); ++it)
    if (it->speaker == Speaker::Interviewee) {
      speech = it->text;
      break;
    }
  if (mode != GenerationMode::Minimal && speech.empty())
    throw Error(ErrorCode::EmptyContext, "no INTERVIEWEE turn in the last " + std::to_string(k) +
                                             " turns");

  const auto turns = std::to_string(session.size());
  const auto mode_token = std::string(to_string(mode));
  auto call = [&](const std::string& criterion, std::string prompt) {
    auto req = ChatRequest::user("suggest:" + session_id + ":" + mode_token + ":" + criterion + ":" +
                                     turns + ":" + std::to_string(config_.pipeline.attempt),
                                 std::move(prompt));
    req.model_id = config_.pipeline.model_id;
    req.temperature = config_.pipeline.temperature;
    return parse_question(gateway_.complete(req).content, config_.pipeline.lenient_questions);
  };

  const auto& keyword = session.domain().keyword;
  std::vector<Suggestion> out;
  switch (mode) {
    case GenerationMode::Minimal:
      out.push_back({"", call("-", renderer_.minimal(session.domain(), bundle.basis_turns).text),
                     mode, std::nullopt});
      break;
    case GenerationMode::Guided:
      for (const auto* c : selected)
        out.push_back({"", call(c->id, renderer_.guided(keyword, speech, *c).text), mode, c->id});
      break;
    case GenerationMode::MultiAvoid: {
      Catalog subset;
      if (selected.empty()) subset = catalog_;
      for (const auto* c : selected) subset.push_back(*c);
      out.push_back({"", call("-", renderer_.multi_avoid(keyword, speech, subset).text), mode,
                     std::nullopt});
      break;
    }
  }
  const auto number = std::to_string(store_.reserve_bundle(session_id));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].suggestion_id = session_id + "." + number + "." + std::to_string(i + 1);
  bundle.suggestions = std::move(out);
  bundle.generated_at = store_.clock().now();
  return bundle;
}

HttpResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  try {
    return route(method, path, body);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return json_response(500, json{{"error", {{"code", "Internal"}, {"message", e.what()}}}});
  }
}

HttpResponse Service::route(std::string_view method, std::string_view full_path, std::string_view body) {
  std::string_view path = full_path;
  std::string_view query;
  if (auto q = full_path.find('?'); q != std::string_view::npos) {
    path = full_path.substr(0, q);
    query = full_path.substr(q + 1);
  }
  const auto parts = split_path(path);
  const bool get = method == "GET", post = method == "POST";
  auto not_allowed = [&] {
    return json_response(405, json{{"error", {{"code", "MethodNotAllowed"},
                                              {"message", std::string(method) + " " + std::string(path)}}}});
  };

  if (parts.size() == 1 && parts[0] == "health") {
    return json_response(200, json{{"status", "ok"},
                                   {"backend", gateway_.backend() == Backend::Replay ? "REPLAY" : "LIVE"}});
  }
  if (parts.size() == 1 && parts[0] == "domains") {
    if (!get) return not_allowed();
    return json_response(200, json{{"domains", domains_.all()}});
  }
  if (parts.size() == 1 && parts[0] == "catalog") {
    if (!get) return not_allowed();
    json list = json::array();
    for (const auto& c : catalog_)
      list.push_back({{"id", c.id}, {"name", c.name}, {"category", to_string(c.category)}});
    return json_response(200, json{{"criteria", std::move(list)}});
  }
  if (parts.empty() || parts[0] != "sessions")
    return json_response(404, json{{"error", {{"code", "NotFound"}, {"message", std::string(path)}}}});

  if (parts.size() == 1) {
    if (get) return json_response(200, json{{"sessions", store_.ids()}});
    if (!post) return not_allowed();
    const auto req = parse_body(body);
    const auto keyword = require_string(req, "domain");
    if (!domains_.contains(keyword))
      throw Error(ErrorCode::UnknownDomain, "unknown domain '" + keyword + "'");
    const auto& domain = domains_.find(keyword);
    const auto s = store_.create(domain);
    return json_response(201, json{{"session_id", s.id()},
                                   {"domain", domain},
                                   {"status", to_string(s.status())},
                                   {"opening_suggestion", {{"question", domain.seed_question}}}});
  }

  const std::string& id = parts[1];
  const std::string action = parts.size() >= 3 ? parts[2] : "";
  if (parts.size() == 2 || (parts.size() == 3 && action == "transcript")) {
    if (!get) return not_allowed();
    const auto s = store_.snapshot(id);
    if (query.find("format=jsonl") != std::string_view::npos)
      return {200, format_transcript(s.turns()), "application/x-ndjson"};
    return json_response(200, session_to_json(s));
  }
  if (parts.size() == 3 && action == "turns") {
    if (get) return json_response(200, json{{"turns", store_.snapshot(id).turns()}});
    if (!post) return not_allowed();
    const auto req = parse_body(body);
    const auto speaker = as_request_error([&] { return parse_speaker(require_string(req, "speaker")); });
    const auto turn = store_.append(id, speaker, require_string(req, "text"));
    return json_response(201, json{{"index", turn.index}, {"turn", turn}});
  }
  if (parts.size() == 3 && action == "suggestions") {
    if (!post) return not_allowed();
    const auto req = parse_body(body);
    GenerationMode mode = GenerationMode::MultiAvoid;
    if (req.contains("mode"))
      mode = as_request_error([&] { return parse_generation_mode(require_string(req, "mode")); });
    std::vector<std::string> criteria;
    if (auto c = req.find("criteria"); c != req.end() && !c->is_null()) {
      if (!c->is_array()) throw Error(ErrorCode::InvalidRequest, "criteria must be a list of ids");
      for (const auto& v : *c) {
        if (!v.is_string()) throw Error(ErrorCode::InvalidRequest, "criteria must be a list of ids");
        criteria.push_back(v.get<std::string>());
      }
    }
    std::size_t k = config_.default_k;
    if (auto kv = req.find("k"); kv != req.end()) {
      if (!kv->is_number_integer() || kv->get<long long>() < 0)
        throw Error(ErrorCode::InvalidRequest, "k must be a non-negative integer");
      k = kv->get<std::size_t>();
    }
    (void)store_.snapshot(id);  // 404 before any generation work

    auto task = std::make_shared<std::packaged_task<SuggestionBundle()>>(
        [this, id, mode, criteria, k] { return suggest(id, mode, criteria, k); });
    auto result = task->get_future();
    auto runner = std::async(std::launch::async, [task] { (*task)(); });
    if (result.wait_for(config_.suggestion_timeout) != std::future_status::ready) {
      std::lock_guard lock(pending_mu_);
      pending_.remove_if([](auto& f) {
        return f.wait_for(std::chrono::seconds(0)) == std::future_status::ready;
      });
      pending_.push_back(std::move(runner));
      throw Error(ErrorCode::Timeout, "suggestion generation exceeded " +
                                          std::to_string(config_.suggestion_timeout.count()) +
                                          " ms; retry the request");
    }
    SuggestionBundle bundle;
    try {
      bundle = result.get();
    } catch (const Error& e) {
      if (http_status(e.code()) == 502) {
        json residue = json::array();
        residue.push_back({{"session_id", id}, {"mode", to_string(mode)}, {"code", to_string(e.code())},
                           {"message", e.what()}});
        return error_response(e, json{{"residue", std::move(residue)}});
      }
      throw;
    }
    store_.add_bundle(bundle);
    return json_response(200, to_json(bundle));
  }
  if (parts.size() == 3 && action == "accept") {
    if (!post) return not_allowed();
    const auto req = parse_body(body);
    std::optional<std::string> text;
    if (auto t = req.find("text"); t != req.end() && !t->is_null()) text = require_string(req, "text");
    const auto turn = store_.accept(id, require_string(req, "suggestion_id"), text);
    return json_response(201, json{{"index", turn.index}, {"turn", turn}});
  }
  if (parts.size() == 3 && action == "close") {
    if (!post) return not_allowed();
    return json_response(200, session_to_json(store_.close(id)));
  }
  if (parts.size() == 3 && action == "ratings") {
    if (get) {
      json history = json::array();
      for (const auto& r : store_.rating_history(id)) history.push_back(rating_json(r));
      return json_response(200, json{{"ratings", std::move(history)}});
    }
    if (!post) return not_allowed();
    const auto req = parse_body(body);
    StoredRating r;
    r.rater_id = req.contains("rater_id") ? require_string(req, "rater_id") : "operator";
    r.suggestion_id = require_string(req, "suggestion_id");
    r.dimension = as_request_error([&] { return stats::parse_dimension(require_string(req, "dimension")); });
    auto number = [&](const char* field, int fallback) {
      auto it = req.find(field);
      if (it == req.end()) return fallback;
      if (!it->is_number_integer())
        throw Error(ErrorCode::InvalidRequest, std::string(field) + " must be an integer");
      return it->get<int>();
    };
    if (!req.contains("score")) throw Error(ErrorCode::InvalidRequest, "field 'score' is required");
    r.score = number("score", 0);
    r.scale_size = number("scale_size", 5);
    store_.rate(id, r);
    return json_response(201, json{{"count", store_.rating_history(id).size()}});
  }
  if (parts.size() == 4 && action == "ratings" && parts[3] == "export") {
    if (!get) return not_allowed();
    return {200, stats::format_ratings(store_.rating_export(id)), "text/tab-separated-values"};
  }
  return json_response(404, json{{"error", {{"code", "NotFound"}, {"message", std::string(path)}}}});
}

int Service::bind(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    std::string target = req.path;
    if (!req.params.empty()) {
      target += '?';
      bool first = true;
      for (const auto& [k, v] : req.params) {
        if (!first) target += '&';
        target += k + "=" + v;
        first = false;
      }
    }
    const auto out = handle(req.method, target, req.body);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  for (const char* pattern : {"/health", "/domains", "/catalog", "/sessions", R"(/sessions/.*)"}) {
    server_->Get(pattern, forward);
    server_->Post(pattern, forward);
  }
  if (config_.static_dir) server_->set_mount_point("/", config_.static_dir->string());
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  return port_;
}

void Service::serve() {
  if (server_) server_->listen_after_bind();
}

bool Service::listen(const std::string& host, int port) {
  if (bind(host, port) < 0) return false;
  serve();
  return true;
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace elicit::service
