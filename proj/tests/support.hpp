#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "elicit/cli.hpp"
#include "elicit/gateway.hpp"
#include "elicit/io.hpp"

namespace elicit::testing {

inline std::filesystem::path source_dir() { return ELICIT_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return source_dir() / "tests" / "fixtures" / rel; }
inline std::filesystem::path golden(const std::string& rel) { return source_dir() / "tests" / "golden" / rel; }
inline std::string read(const std::filesystem::path& p) { return io::read_file(p); }

/// Answers every request through a callback and remembers what it was asked.
class ScriptedGateway final : public ChatGateway {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  explicit ScriptedGateway(Fn fn) : fn_(std::move(fn)) {}

  ChatResponse complete(const ChatRequest& request) override {
    {
      std::lock_guard lock(mu_);
      tags_.push_back(request.tag);
      prompts_.push_back(request.messages.empty() ? "" : request.messages.back().content);
    }
    ChatResponse r;
    r.content = fn_(request);
    r.backend = Backend::Replay;
    r.raw_digest = sha256_hex(r.content);
    return r;
  }
  [[nodiscard]] Backend backend() const noexcept override { return Backend::Replay; }

  std::vector<std::string> tags() const {
    std::lock_guard lock(mu_);
    return tags_;
  }
  std::vector<std::string> prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
  }

 private:
  Fn fn_;
  mutable std::mutex mu_;
  std::vector<std::string> tags_;
  std::vector<std::string> prompts_;
};

struct CliResult {
  int status = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("elicit-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace elicit::testing
