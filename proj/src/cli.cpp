#include "elicit/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "elicit/catalog.hpp"
#include "elicit/core_model.hpp"
#include "elicit/error.hpp"
#include "elicit/gateway.hpp"
#include "elicit/io.hpp"
#include "elicit/pipelines.hpp"
#include "elicit/prompts.hpp"
#include "elicit/service.hpp"
#include "elicit/stats/hypothesis.hpp"
#include "elicit/stats/models.hpp"
#include "elicit/survey.hpp"

namespace elicit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string format = "text";
  std::string replay;
  std::string record;
  std::string catalog;
  std::string templates;
  std::string out;
  std::string model;
  std::optional<double> temperature;
  std::size_t parallel = 1;
  int attempt = 0;
  bool lenient = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Seed for every randomized step");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app->add_option("--replay", c.replay, "Replay recording (JSONL); no network")->check(CLI::ExistingFile);
  app->add_option("--record", c.record, "Append live responses to this recording");
  app->add_option("--catalog", c.catalog, "Mistake catalog JSON (default: built-in)")
      ->check(CLI::ExistingFile);
  app->add_option("--templates", c.templates, "Directory with prompt template overrides")
      ->check(CLI::ExistingDirectory);
  app->add_option("--out", c.out, "Write the main output here instead of stdout");
  app->add_option("--model", c.model, "Model id (default: $ELICIT_MODEL or built-in)");
  app->add_option("--temperature", c.temperature, "Sampling temperature (default: $ELICIT_TEMPERATURE or 1.0)");
  app->add_option("--parallel", c.parallel, "Concurrent gateway calls")->check(CLI::PositiveNumber);
  app->add_option("--attempt", c.attempt, "Attempt number carried in replay tags");
  app->add_flag("--lenient", c.lenient, "Accept generated questions without a trailing '?'");
}

/// Everything a command needs, built lazily from the common options.
struct Env {
  const Common& c;
  std::ostream& out;
  std::ostream& err;
  Catalog catalog;
  PromptTemplates templates;
  std::unique_ptr<PromptRenderer> renderer;
  DomainRegistry domains = DomainRegistry::builtin();
  std::unique_ptr<ChatGateway> gateway;

  Env(const Common& common, std::ostream& o, std::ostream& e) : c(common), out(o), err(e) {
    catalog = c.catalog.empty() ? builtin_catalog() : load_catalog_file(c.catalog);
    templates = c.templates.empty() ? PromptTemplates::builtin() : PromptTemplates::load(c.templates);
    renderer = std::make_unique<PromptRenderer>(templates);
  }

  ChatGateway& chat() {
    if (gateway) return *gateway;
    if (!c.replay.empty()) {
      gateway = std::make_unique<ReplayGateway>(std::make_shared<Recording>(Recording::load(c.replay)));
    } else {
      auto config = LiveConfig::from_env();
      if (config.api_key.empty())
        throw Error(ErrorCode::AuthError,
                    "no --replay recording given and neither ELICIT_API_KEY nor OPENAI_API_KEY is set");
      auto live = std::make_unique<LiveGateway>(std::make_shared<HttpTransport>(config), RetryPolicy{},
                                                std::max<std::size_t>(c.parallel, 1));
      if (!c.record.empty()) live->record_to(c.record);
      gateway = std::move(live);
    }
    return *gateway;
  }

  PipelineOptions options() const {
    PipelineOptions o;
    if (const char* m = std::getenv("ELICIT_MODEL"); m && *m) o.model_id = m;
    if (const char* t = std::getenv("ELICIT_TEMPERATURE"); t && *t) {
      try {
        o.temperature = std::stod(t);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidParameter, "ELICIT_TEMPERATURE is not a number");
      }
    }
    if (!c.model.empty()) o.model_id = c.model;
    if (c.temperature) o.temperature = *c.temperature;
    o.parallelism = c.parallel;
    o.attempt = c.attempt;
    o.lenient_questions = c.lenient;
    return o;
  }

  PipelineContext context() { return PipelineContext{chat(), catalog, *renderer, domains, options()}; }

  bool json_out() const { return c.format == "json"; }

  void emit(std::string_view text) {
    if (c.out.empty())
      out << text;
    else
      io::write_file(c.out, text);
  }
};

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

/// One warning line per error code; returns the exit status for the batch.
int report_residue(Env& env, std::span<const ResidueEntry> residue, std::size_t produced,
                   const std::string& residue_path) {
  if (!residue_path.empty()) io::write_file(residue_path, to_json(residue).dump(2) + "\n");
  if (residue.empty()) return kOk;
  std::map<ErrorCode, std::pair<std::size_t, const ResidueEntry*>> by;
  for (const auto& r : residue) {
    auto& slot = by[r.code];
    if (!slot.second) slot.second = &r;
    ++slot.first;
  }
  for (const auto& [code, slot] : by)
    env.err << "warning: " << slot.first << " item(s) failed with " << to_string(code) << " (first: "
            << slot.second->tag << ": " << slot.second->message << ")\n";
  return produced == 0 ? kError : kPartial;
}

std::vector<QuestionRecord> load_pairs(const std::string& pairs, const std::string& records) {
  if (!pairs.empty()) return parse_corpus(io::read_file(pairs));
  if (!records.empty()) return parse_question_records(io::read_file(records));
  throw Error(ErrorCode::InvalidRequest, "give --pairs (corpus TSV) or --records (question JSONL)");
}

// --- ingest / annotate / stats turns -------------------------------------------------

int cmd_ingest(Env& env, const std::vector<std::string>& files, const std::string& domain,
               const std::string& store_dir) {
  service::SystemClock clock;
  service::SessionStore store(fs::path(store_dir), clock);
  const auto& d = env.domains.find(domain);
  json list = json::array();
  std::ostringstream text;
  // Directories contribute their *.jsonl files in name order.
  std::vector<std::string> paths;
  for (const auto& f : files) {
    if (!fs::is_directory(f)) {
      paths.push_back(f);
      continue;
    }
    std::vector<std::string> found;
    for (const auto& e : fs::directory_iterator(f))
      if (e.path().extension() == ".jsonl") found.push_back(e.path().string());
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  for (const auto& f : paths) {
    const auto turns = parse_transcript(io::read_file(f));
    const auto s = store.import(d, turns);
    list.push_back({{"session_id", s.id()}, {"source", f}, {"turns", s.size()}});
    text << s.id() << '\t' << s.size() << " turns\t" << f << '\n';
  }
  env.emit(env.json_out() ? json{{"sessions", list}}.dump(2) + "\n" : text.str());
  return kOk;
}

std::map<std::string, Session> load_sessions(const std::string& store_dir,
                                             const std::string& transcripts_dir,
                                             const DomainRegistry& domains) {
  std::map<std::string, Session> out;
  if (!store_dir.empty()) {
    service::SystemClock clock;
    service::SessionStore store(fs::path(store_dir), clock);
    for (const auto& id : store.ids()) out.emplace(id, store.snapshot(id));
  }
  if (!transcripts_dir.empty()) {
    for (const auto& e : fs::directory_iterator(transcripts_dir)) {
      if (e.path().extension() != ".jsonl") continue;
      const auto id = e.path().stem().string();
      out.emplace(id, Session::from_turns(id, domains.all().front(),
                                          parse_transcript(io::read_file(e.path()))));
    }
  }
  return out;
}

int cmd_annotate(Env& env, const std::string& annotations, const std::string& store_dir,
                 const std::string& transcripts_dir) {
  auto list = parse_annotations(io::read_file(annotations));
  const auto sessions = load_sessions(store_dir, transcripts_dir, env.domains);
  if (sessions.empty())
    throw Error(ErrorCode::InvalidRequest, "give --store or --transcripts-dir to check annotations against");
  for (const auto& a : list) {
    auto it = sessions.find(a.session_id);
    if (it == sessions.end())
      throw Error(ErrorCode::UnknownSession, "annotation references unknown session '" + a.session_id + "'");
    validate_annotation(it->second, a);
  }
  if (env.json_out()) {
    json arr = json::array();
    for (const auto& a : list)
      arr.push_back({{"session_id", a.session_id},
                     {"question_turn_index", a.question_turn_index},
                     {"required_turns", a.required_turns},
                     {"question_type", to_string(a.question_type)},
                     {"question", sessions.at(a.session_id).turns()[a.question_turn_index].text}});
    env.emit(json{{"annotations", arr}}.dump(2) + "\n");
  } else {
    env.emit(format_annotations(list));
  }
  env.err << "validated " << list.size() << " annotation(s) against " << sessions.size() << " session(s)\n";
  return kOk;
}

int cmd_stats_turns(Env& env, const std::string& annotations, std::size_t max_k) {
  const auto list = parse_annotations(io::read_file(annotations));
  const auto st = turn_stats(list);
  std::size_t top = max_k;
  if (!st.by_required_turns.empty()) top = std::max(top, st.by_required_turns.rbegin()->first);
  if (env.json_out()) {
    json hist = json::object(), cum = json::object(), types = json::object();
    for (std::size_t k = 0; k <= top; ++k) {
      auto it = st.by_required_turns.find(k);
      hist[std::to_string(k)] = it == st.by_required_turns.end() ? 0 : it->second;
      cum[std::to_string(k)] = st.at_most(k);
    }
    for (auto t : all_question_types()) {
      auto it = st.by_type.find(t);
      types[std::string(to_string(t))] = it == st.by_type.end() ? 0 : it->second;
    }
    env.emit(json{{"total", st.total}, {"by_required_turns", hist}, {"at_most", cum}, {"by_type", types}}
                 .dump(2) + "\n");
    return kOk;
  }
  std::ostringstream o;
  o << "required_turns  count  at_most\n";
  for (std::size_t k = 0; k <= top; ++k) {
    auto it = st.by_required_turns.find(k);
    const auto n = it == st.by_required_turns.end() ? 0 : it->second;
    const auto c = st.at_most(k);
    o << pad(std::to_string(k), 16) << pad(std::to_string(n), 7) << c << '/' << st.total << " ("
      << Rational(static_cast<std::int64_t>(c), static_cast<std::int64_t>(st.total)).percent() << ")\n";
  }
  o << "\nquestion_type        count\n";
  for (auto t : all_question_types()) {
    auto it = st.by_type.find(t);
    o << pad(std::string(to_string(t)), 21) << (it == st.by_type.end() ? 0 : it->second) << '\n';
  }
  env.emit(o.str());
  return kOk;
}

// --- generate / classify -----------------------------------------------------------

struct GenerateArgs {
  std::string pairs, records, flags, labels, model_labels, residue, questions_out, cells_out;
};

int cmd_generate(Env& env, const std::string& kind, const GenerateArgs& a) {
  auto input = load_pairs(a.pairs, a.records);
  if (input.empty()) {
    env.err << "warning: input has no records; nothing generated\n";
    env.emit(env.json_out() ? json{{"questions", json::array()}, {"residue", json::array()}}.dump(2) + "\n"
                            : std::string());
    return kOk;
  }
  auto ctx = env.context();
  if (kind == "multi") {
    auto result = run_multi_avoidance(input, ctx);
    if (!a.questions_out.empty()) io::write_file(a.questions_out, format_question_records(result.questions));
    if (!a.cells_out.empty()) io::write_file(a.cells_out, format_cells(result.cells));
    const int status = report_residue(env, result.residue, result.questions.size(), a.residue);
    if (result.residue.empty() || !result.questions.empty()) {
      // Only complete rows enter the report; residue rows are never imputed.
      std::set<std::string> complete;
      std::map<std::string, std::size_t> per;
      for (const auto& c : result.cells) ++per[c.record_id];
      for (const auto& [id, n] : per)
        if (n == env.catalog.size()) complete.insert(id);
      std::vector<ClassificationCell> cells;
      for (const auto& c : result.cells)
        if (complete.count(c.record_id)) cells.push_back(c);
      const auto report = avoidance_report(cells, complete.size(), env.catalog);
      if (env.json_out()) {
        json j{{"questions", complete.size()}, {"avoidance", to_json(report)},
               {"residue", to_json(result.residue)}};
        env.emit(j.dump(2) + "\n");
      } else {
        std::ostringstream o;
        o << format_classification_table(nullptr, &report);
        o << "\ndemonstrating cells: " << report.demonstrations << '/' << report.cells << '\n';
        o << "questions avoiding all " << env.catalog.size() << ": " << report.questions_avoiding_all << '/'
          << complete.size() << '\n';
        for (const auto& [t, n] : report.questions_avoiding_at_least)
          if (t + 3 >= env.catalog.size() && t < env.catalog.size())
            o << "questions avoiding at least " << t << ": " << n << '/' << complete.size() << '\n';
        env.emit(o.str());
      }
    }
    return status;
  }

  BatchResult<QuestionRecord> result;
  if (kind == "minimal") {
    result = run_minimal_generation(input, ctx);
  } else {
    std::vector<FlagKey> flags;
    if (!a.flags.empty()) {
      flags = parse_flags(io::read_file(a.flags));
    } else if (!a.labels.empty() && !a.model_labels.empty()) {
      flags = intersect_flags(parse_cells(io::read_file(a.model_labels), Rater::Model),
                              parse_cells(io::read_file(a.labels), Rater::HumanAnalyst));
    } else {
      throw Error(ErrorCode::InvalidRequest, "guided generation needs --flags or --labels with --model-labels");
    }
    result = run_guided_generation(input, flags, ctx);
  }
  const int status = report_residue(env, result.residue, result.items.size(), a.residue);
  if (env.json_out()) {
    json qs = json::parse("[" + [&] {
      std::string s;
      for (const auto& line : io::split_lines(format_question_records(result.items))) {
        if (line.empty()) continue;
        if (!s.empty()) s += ',';
        s += line;
      }
      return s;
    }() + "]");
    env.emit(json{{"questions", qs}, {"residue", to_json(result.residue)}}.dump(2) + "\n");
  } else {
    env.emit(format_question_records(result.items));
  }
  return status;
}

int cmd_classify(Env& env, const GenerateArgs& a, const std::string& flags_out) {
  auto input = load_pairs(a.pairs, a.records);
  if (input.empty()) {
    env.err << "warning: input has no records; nothing classified\n";
    return kOk;
  }
  auto ctx = env.context();
  auto result = run_classification_matrix(input, ctx);
  if (!a.cells_out.empty()) io::write_file(a.cells_out, format_cells(result.items));
  const int status = report_residue(env, result.residue, result.items.size(), a.residue);
  if (a.labels.empty()) {
    env.emit(format_cells(result.items));
    return status;
  }
  if (!result.residue.empty()) {
    env.err << "error: agreement needs the complete matrix; " << result.residue.size()
            << " cell(s) missing\n";
    return kError;
  }
  const auto human = parse_cells(io::read_file(a.labels), Rater::HumanAnalyst);
  const auto report = agreement_report(result.items, human, env.catalog);
  if (!flags_out.empty()) io::write_file(flags_out, format_flags(intersect_flags(result.items, human)));
  if (env.json_out()) {
    env.emit(json{{"agreement", to_json(report)}}.dump(2) + "\n");
  } else {
    env.emit(format_classification_table(&report, nullptr) + "\nagreement: " +
             std::to_string(report.agreements) + "/" + std::to_string(report.cells) + " = " +
             report.total_agreement.percent() + "\n");
  }
  return status;
}

// --- survey ----------------------------------------------------------------------

void write_instruments(Env& env, const std::vector<survey::SurveyInstrument>& insts,
                       const std::string& dir) {
  json list = json::array();
  std::ostringstream text;
  for (const auto& inst : insts) {
    const auto rendering = survey::render(inst).dump(2) + "\n";
    if (const auto leaks = survey::blinding_violations(rendering); !leaks.empty())
      throw Error(ErrorCode::InvalidRequest, "instrument " + inst.survey_id +
                                                 " would show a source token ('" + leaks.front() + "')");
    io::write_file(fs::path(dir) / (inst.survey_id + ".json"), rendering);
    io::write_file(fs::path(dir) / "keys" / (inst.survey_id + ".key.json"),
                   survey::answer_key(inst).dump(2) + "\n");
    list.push_back({{"survey_id", inst.survey_id}, {"blocks", inst.size()}});
    text << inst.survey_id << '\t' << inst.size() << " blocks\n";
  }
  env.emit(env.json_out() ? json{{"instruments", list}, {"seed", env.c.seed}}.dump(2) + "\n" : text.str());
}

std::vector<survey::SurveyInstrument> read_instruments(const std::string& dir, const Catalog& catalog) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<survey::SurveyInstrument> out;
  for (const auto& f : files) {
    const auto rendering = json::parse(io::read_file(f));
    const auto key = json::parse(io::read_file(fs::path(dir) / "keys" / (f.stem().string() + ".key.json")));
    out.push_back(survey::load_instrument(rendering, key, catalog));
  }
  return out;
}

// --- evaluate ----------------------------------------------------------------------

json fit_json(const stats::ModelFit& f) { return stats::to_json(f); }

int cmd_evaluate(Env& env, const std::string& study, const std::string& ratings_path,
                 const std::string& comparisons_path, double effect, double power, double alpha) {
  std::ostringstream o;
  json report = json::object();
  const auto ratings = ratings_path.empty() ? std::vector<stats::RatingRecord>{}
                                            : stats::parse_ratings(io::read_file(ratings_path));

  if (study == "study1") {
    if (ratings.empty()) throw Error(ErrorCode::EmptyInput, "study1 evaluation needs --ratings");
    o << "dimension        n(model) n(human) mean(model) mean(human)  SW p(model) SW p(human)  t        df   p\n";
    json dims = json::array();
    for (auto d : stats::all_dimensions()) {
      // Per-question mean score is the unit of analysis.
      std::map<std::pair<stats::Source, std::string>, std::pair<double, int>> acc;
      for (const auto& r : ratings)
        if (r.dimension == d) {
          auto& a = acc[{r.source, r.item_id}];
          a.first += r.score;
          a.second += 1;
        }
      std::vector<double> model, human;
      for (const auto& [k, a] : acc) (k.first == stats::Source::Model ? model : human).push_back(a.first / a.second);
      if (model.empty() && human.empty()) continue;
      auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
      };
      const auto swm = stats::shapiro_wilk(model);
      const auto swh = stats::shapiro_wilk(human);
      const auto t = stats::t_test_two_sample(model, human);
      o << pad(std::string(stats::to_string(d)), 17) << pad(std::to_string(model.size()), 9)
        << pad(std::to_string(human.size()), 9) << pad(fixed(mean(model), 3), 12) << pad(fixed(mean(human), 3), 13)
        << pad(fixed(swm.p, 4), 12) << pad(fixed(swh.p, 4), 13) << pad(fixed(t.t, 4), 9)
        << pad(std::to_string(t.df), 5) << general(t.p) << '\n';
      dims.push_back({{"dimension", stats::to_string(d)},
                      {"model_questions", model.size()},
                      {"human_questions", human.size()},
                      {"model_mean", mean(model)},
                      {"human_mean", mean(human)},
                      {"shapiro_wilk", {{"model", {{"w", swm.w}, {"p", swm.p}}}, {"human", {{"w", swh.w}, {"p", swh.p}}}}},
                      {"t_test", {{"t", t.t}, {"df", t.df}, {"p", t.p}}}});
    }
    report["study1"] = std::move(dims);
  } else {
    const int n = stats::power_two_sample(effect, power, alpha);
    o << "power analysis: d=" << general(effect) << " power=" << general(power) << " alpha=" << general(alpha)
      << " -> " << n << " per group (" << 2 * n << " total)\n";
    report["power"] = {{"effect_size", effect}, {"power", power}, {"alpha", alpha}, {"n_per_group", n}, {"total", 2 * n}};
    if (!comparisons_path.empty()) {
      const auto comps = stats::parse_comparisons(io::read_file(comparisons_path));
      std::size_t wins = 0;
      for (const auto& c : comps) wins += c.winner == stats::Source::Model;
      const auto fit = stats::fit_bt_mixed(comps);
      const double pref = 1 / (1 + std::exp(-fit.estimate));
      o << "\nmistake avoidance: mixed Bradley-Terry over " << comps.size() << " comparisons, " << fit.raters
        << " raters\n"
        << "  MODEL chosen " << wins << ", HUMAN chosen " << comps.size() - wins << '\n'
        << "  estimate " << fixed(fit.estimate) << "  odds ratio " << fixed(fit.odds_ratio) << "  SE "
        << fixed(fit.std_error) << "  p " << general(fit.p_value) << "  rater sd " << fixed(fit.random_effect_sd)
        << '\n'
        << "  P(MODEL preferred) = " << fixed(100 * pref, 1) << "%\n"
        << "  " << fit.diagnostics << '\n';
      auto j = fit_json(fit);
      j["model_wins"] = wins;
      j["human_wins"] = comps.size() - wins;
      j["preference_probability"] = pref;
      report["bradley_terry"] = std::move(j);
    }
    if (!ratings.empty()) {
      const auto pairs = stats::pair_ratings(ratings);
      const auto rates = stats::win_tie_rates(pairs);
      o << "\ndimension        model win  human win  tie     model mean  human mean  estimate  odds ratio  p\n";
      json dims = json::array();
      for (auto d : stats::all_dimensions()) {
        auto it = rates.find(d);
        if (it == rates.end()) continue;
        std::vector<stats::RatingRecord> subset;
        for (const auto& r : ratings)
          if (r.dimension == d) subset.push_back(r);
        const auto fit = stats::fit_ordinal_mixed(subset);
        const auto& w = it->second;
        o << pad(std::string(stats::to_string(d)), 17) << pad(w.model_win.percent(), 11) << pad(w.human_win.percent(), 11)
          << pad(w.tie.percent(), 8) << pad(fixed(w.model_mean, 2), 12) << pad(fixed(w.human_mean, 2), 12)
          << pad(fixed(fit.estimate), 10) << pad(fixed(fit.odds_ratio), 12) << general(fit.p_value) << '\n';
        dims.push_back({{"dimension", stats::to_string(d)}, {"win_tie", stats::to_json(w)}, {"ordinal", fit_json(fit)}});
      }
      report["dimensions"] = std::move(dims);
    }
  }
  env.emit(env.json_out() ? report.dump(2) + "\n" : o.str());
  return kOk;
}

// --- serve ---------------------------------------------------------------------------

int cmd_serve(Env& env, const std::string& host, int port, const std::string& store_dir,
              const std::string& static_dir, long timeout_ms, std::size_t k) {
  std::unique_ptr<service::Clock> clock;
  if (env.c.replay.empty())
    clock = std::make_unique<service::SystemClock>();
  else
    clock = std::make_unique<service::LogicalClock>();
  service::SessionStore store(store_dir.empty() ? std::nullopt : std::optional<fs::path>(store_dir), *clock);
  service::ServiceConfig config;
  config.default_k = k;
  config.suggestion_timeout = std::chrono::milliseconds(timeout_ms);
  config.pipeline = env.options();
  if (!static_dir.empty()) config.static_dir = static_dir;
  service::Service svc(env.chat(), env.catalog, *env.renderer, env.domains, store, config);
  const int bound = svc.bind(host, port);
  if (bound < 0) throw Error(ErrorCode::TransportError, "cannot bind " + host + ":" + std::to_string(port));
  env.out << "listening on http://" << host << ':' << bound << std::endl;
  svc.serve();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Follow-up question generation, classification and study analysis"};
  app.require_subcommand(1);
  Common c;

  auto* ingest = app.add_subcommand("ingest", "Load transcripts into a session store");
  std::vector<std::string> transcripts;
  std::string domain, store_dir;
  ingest->add_option("--transcripts", transcripts, "Transcript JSONL files or directories of them")
      ->required()
      ->check(CLI::ExistingPath);
  ingest->add_option("--domain", domain, "Domain keyword")->required();
  ingest->add_option("--store", store_dir, "Session store directory")->required();
  add_common(ingest, c);

  auto* annotate = app.add_subcommand("annotate", "Validate context annotations against transcripts");
  std::string annotations, transcripts_dir;
  annotate->add_option("--annotations", annotations, "Annotation TSV")->required()->check(CLI::ExistingFile);
  annotate->add_option("--store", store_dir, "Session store directory")->check(CLI::ExistingDirectory);
  annotate->add_option("--transcripts-dir", transcripts_dir, "Directory of <session_id>.jsonl transcripts")
      ->check(CLI::ExistingDirectory);
  add_common(annotate, c);

  auto* st = app.add_subcommand("stats", "Descriptive statistics");
  st->require_subcommand(1);
  auto* turns = st->add_subcommand("turns", "Turn-context histograms");
  std::size_t max_k = 4;
  turns->add_option("--annotations", annotations, "Annotation TSV")->required()->check(CLI::ExistingFile);
  turns->add_option("--max-k", max_k, "Show rows up to this many turns at least");
  add_common(turns, c);

  auto* gen = app.add_subcommand("generate", "Generate follow-up questions");
  gen->require_subcommand(1);
  GenerateArgs ga;
  std::string gen_kind;
  for (const char* kind : {"minimal", "guided", "multi"}) {
    auto* sub = gen->add_subcommand(kind);
    sub->add_option("--pairs", ga.pairs, "Corpus TSV")->check(CLI::ExistingFile);
    sub->add_option("--records", ga.records, "Question records JSONL")->check(CLI::ExistingFile);
    sub->add_option("--residue", ga.residue, "Write failed items here (JSON)");
    if (std::string(kind) == "guided") {
      sub->add_option("--flags", ga.flags, "Flag TSV (record_id, criterion_id)")->check(CLI::ExistingFile);
      sub->add_option("--labels", ga.labels, "Human label TSV")->check(CLI::ExistingFile);
      sub->add_option("--model-labels", ga.model_labels, "Model label TSV")->check(CLI::ExistingFile);
    }
    if (std::string(kind) == "multi") {
      sub->add_option("--questions-out", ga.questions_out, "Write generated questions (JSONL)");
      sub->add_option("--cells-out", ga.cells_out, "Write self-classification cells (TSV)");
    }
    add_common(sub, c);
    sub->callback([&gen_kind, kind] { gen_kind = kind; });
  }

  auto* classify = app.add_subcommand("classify", "Classify questions against every criterion");
  std::string flags_out;
  classify->add_option("--pairs", ga.pairs, "Corpus TSV")->check(CLI::ExistingFile);
  classify->add_option("--records", ga.records, "Question records JSONL")->check(CLI::ExistingFile);
  classify->add_option("--labels", ga.labels, "Human label TSV for the agreement report")->check(CLI::ExistingFile);
  classify->add_option("--cells-out", ga.cells_out, "Write model cells (TSV)");
  classify->add_option("--flags-out", flags_out, "Write cells both raters flag (TSV)");
  classify->add_option("--residue", ga.residue, "Write failed cells here (JSON)");
  add_common(classify, c);

  auto* sv = app.add_subcommand("survey", "Build and ingest survey instruments");
  sv->require_subcommand(1);
  auto* build = sv->add_subcommand("build", "Build instruments");
  std::string study = "study3", model_q, human_q, questions, out_dir;
  build->add_option("study", study, "study1 or study3")->required()->check(CLI::IsMember({"study1", "study3"}));
  build->add_option("--model-questions", model_q, "study1: MODEL question records")->check(CLI::ExistingFile);
  build->add_option("--human-questions", human_q, "study1: HUMAN question records")->check(CLI::ExistingFile);
  build->add_option("--questions", questions, "study3: MODEL and HUMAN_ANALYST records")->check(CLI::ExistingFile);
  build->add_option("--out-dir", out_dir, "Instrument directory (keys go to <dir>/keys)")->required();
  add_common(build, c);
  auto* sv_ingest = sv->add_subcommand("ingest", "De-blind a response export");
  std::string instruments_dir, responses, ratings_out, comparisons_out;
  sv_ingest->add_option("--instruments", instruments_dir, "Instrument directory")->required()->check(CLI::ExistingDirectory);
  sv_ingest->add_option("--responses", responses, "Response TSV")->required()->check(CLI::ExistingFile);
  sv_ingest->add_option("--ratings-out", ratings_out, "Rating records TSV");
  sv_ingest->add_option("--comparisons-out", comparisons_out, "Paired comparisons TSV");
  add_common(sv_ingest, c);
  auto* order = sv->add_subcommand("order", "Per-respondent block order");
  std::string instrument_file, respondent;
  order->add_option("--instrument", instrument_file, "Instrument JSON")->required()->check(CLI::ExistingFile);
  order->add_option("--respondent", respondent, "Respondent id")->required();
  add_common(order, c);

  auto* eval = app.add_subcommand("evaluate", "Statistical analysis of survey outcomes");
  std::string eval_study = "study3", comparisons;
  std::string ratings;
  double effect = 0.5, power = 0.8, alpha = 0.05;
  eval->add_option("--study", eval_study, "study1 or study3")->check(CLI::IsMember({"study1", "study3"}));
  eval->add_option("--ratings", ratings, "Rating records TSV")->check(CLI::ExistingFile);
  eval->add_option("--comparisons", comparisons, "Paired comparisons TSV")->check(CLI::ExistingFile);
  eval->add_option("--effect-size", effect, "Power analysis effect size");
  eval->add_option("--power", power, "Power analysis target power");
  eval->add_option("--alpha", alpha, "Power analysis significance level");
  add_common(eval, c);

  auto* serve = app.add_subcommand("serve", "Start the local HTTP service");
  std::string host = "127.0.0.1", static_dir;
  int port = 8080;
  long timeout_ms = 30000;
  std::size_t k = 4;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--store", store_dir, "Session store directory");
  serve->add_option("--static", static_dir, "Serve static files from here")->check(CLI::ExistingDirectory);
  serve->add_option("--timeout-ms", timeout_ms, "Suggestion timeout");
  serve->add_option("--k", k, "Default suggestion window");
  add_common(serve, c);

  std::vector<std::string> argv_store{"elicit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Env env(c, out, err);
    if (*ingest) return cmd_ingest(env, transcripts, domain, store_dir);
    if (*annotate) return cmd_annotate(env, annotations, store_dir, transcripts_dir);
    if (*turns) return cmd_stats_turns(env, annotations, max_k);
    if (*gen) return cmd_generate(env, gen_kind, ga);
    if (*classify) return cmd_classify(env, ga, flags_out);
    if (*build) {
      std::vector<survey::SurveyInstrument> insts;
      if (study == "study1") {
        if (model_q.empty() || human_q.empty())
          throw Error(ErrorCode::InvalidRequest, "study1 needs --model-questions and --human-questions");
        insts = survey::build_study1(parse_question_records(io::read_file(model_q)),
                                     parse_question_records(io::read_file(human_q)), env.domains, c.seed);
      } else {
        if (questions.empty()) throw Error(ErrorCode::InvalidRequest, "study3 needs --questions");
        insts = survey::build_study3(parse_question_records(io::read_file(questions)), env.catalog, c.seed);
      }
      write_instruments(env, insts, out_dir);
      return kOk;
    }
    if (*sv_ingest) {
      const auto insts = read_instruments(instruments_dir, env.catalog);
      const auto result = survey::ingest_responses(survey::parse_responses(io::read_file(responses)), insts);
      if (!ratings_out.empty()) io::write_file(ratings_out, stats::format_ratings(result.ratings));
      if (!comparisons_out.empty()) io::write_file(comparisons_out, stats::format_comparisons(result.comparisons));
      env.emit(env.json_out() ? json{{"ratings", result.ratings.size()}, {"comparisons", result.comparisons.size()}}
                                        .dump(2) + "\n"
                              : std::to_string(result.ratings.size()) + " rating record(s), " +
                                    std::to_string(result.comparisons.size()) + " comparison(s)\n");
      return kOk;
    }
    if (*order) {
      const auto rendering = json::parse(io::read_file(instrument_file));
      std::vector<std::string> blocks;
      for (const auto& b : rendering.at("blocks")) blocks.push_back(b.at("block_id").get<std::string>());
      const auto perm = survey::presentation_order(rendering.at("survey_id").get<std::string>(), respondent,
                                                   c.seed, blocks.size());
      json list = json::array();
      std::string text;
      for (auto i : perm) {
        list.push_back(blocks[i]);
        text += blocks[i] + "\n";
      }
      env.emit(env.json_out() ? json{{"order", list}}.dump(2) + "\n" : text);
      return kOk;
    }
    if (*eval) return cmd_evaluate(env, eval_study, ratings, comparisons, effect, power, alpha);
    if (*serve) return cmd_serve(env, host, port, store_dir, static_dir, timeout_ms, k);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: ParseError: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kUsage;
}

}  // namespace elicit::cli
