// Turns a draft recording (tag + content, no digests) into a replay recording by
// running the real pipeline over it, so every entry carries the digest of the
// prompt our renderer produces today. Fails if a draft entry goes unused.
#include <iostream>
#include <map>
#include <mutex>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "elicit/catalog.hpp"
#include "elicit/error.hpp"
#include "elicit/gateway.hpp"
#include "elicit/io.hpp"
#include "elicit/pipelines.hpp"
#include "elicit/prompts.hpp"
#include "elicit/service.hpp"

using namespace elicit;

namespace {

class SealingGateway final : public ChatGateway {
 public:
  explicit SealingGateway(Recording draft) : draft_(std::move(draft)) {}

  ChatResponse complete(const ChatRequest& request) override {
    auto entry = draft_.find(request.tag);
    if (!entry) throw Error(ErrorCode::ReplayMiss, "draft has no tag '" + request.tag + "'");
    {
      std::lock_guard lock(mu_);
      sealed_.put({request.tag, prompt_digest(request), entry->content});
      used_.insert(request.tag);
    }
    return ChatResponse{entry->content, std::chrono::milliseconds{0}, Backend::Replay,
                        sha256_hex(entry->content)};
  }

  [[nodiscard]] Backend backend() const noexcept override { return Backend::Replay; }
  std::size_t used() const { return used_.size(); }
  const Recording& sealed() const { return sealed_; }

 private:
  Recording draft_;
  Recording sealed_;
  std::set<std::string> used_;
  std::mutex mu_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seal a draft recording"};
  std::string mode, draft_path, out_path, pairs, records, flags, script, golden;
  app.add_option("mode", mode)->required()->check(CLI::IsMember({"minimal", "classify", "guided", "multi", "service"}));
  app.add_option("draft", draft_path)->required()->check(CLI::ExistingFile);
  app.add_option("out", out_path)->required();
  app.add_option("--pairs", pairs)->check(CLI::ExistingFile);
  app.add_option("--records", records)->check(CLI::ExistingFile);
  app.add_option("--flags", flags)->check(CLI::ExistingFile);
  app.add_option("--script", script)->check(CLI::ExistingFile);
  app.add_option("--golden", golden, "service mode: write the last response body here");
  CLI11_PARSE(app, argc, argv);

  try {
    auto draft = Recording::load(draft_path);
    const auto draft_size = draft.size();
    SealingGateway gateway(std::move(draft));
    const auto catalog = builtin_catalog();
    const auto templates = PromptTemplates::builtin();
    const PromptRenderer renderer(templates);
    const auto domains = DomainRegistry::builtin();
    PipelineContext ctx{gateway, catalog, renderer, domains, PipelineOptions{}};
    std::vector<QuestionRecord> input;
    if (!pairs.empty()) input = parse_corpus(io::read_file(pairs));
    if (!records.empty()) input = parse_question_records(io::read_file(records));

    std::size_t residue = 0;
    if (mode == "minimal") {
      residue = run_minimal_generation(input, ctx).residue.size();
    } else if (mode == "classify") {
      residue = run_classification_matrix(input, ctx).residue.size();
    } else if (mode == "guided") {
      residue = run_guided_generation(input, parse_flags(io::read_file(flags)), ctx).residue.size();
    } else if (mode == "multi") {
      residue = run_multi_avoidance(input, ctx).residue.size();
    } else {
      service::LogicalClock clock;
      service::SessionStore store(std::nullopt, clock);
      service::Service svc(gateway, catalog, renderer, domains, store);
      std::string last;
      for (const auto& step : nlohmann::json::parse(io::read_file(script))) {
        const auto res = svc.handle(step.at("method").get<std::string>(), step.at("path").get<std::string>(),
                                    step.value("body", nlohmann::json::object()).dump());
        if (res.status >= 400) {
          std::cerr << step.dump() << " -> " << res.status << ' ' << res.body << '\n';
          return 1;
        }
        last = res.body;
      }
      if (!golden.empty()) io::write_file(golden, last);
    }
    if (residue) {
      std::cerr << residue << " item(s) ended in residue\n";
      return 1;
    }
    if (gateway.used() != draft_size) {
      std::cerr << "draft has " << draft_size << " entries, pipeline used " << gateway.used() << '\n';
      return 1;
    }
    io::write_file(out_path, gateway.sealed().format());
    std::cerr << "sealed " << gateway.used() << " entries into " << out_path << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
