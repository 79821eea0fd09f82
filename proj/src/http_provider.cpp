#include <chrono>
#include <thread>

#include <httplib.h>

#include "discover/providers.hpp"
#include "discover/serialize.hpp"

namespace discover {

namespace {

constexpr std::string_view kFence = "```";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Releases a semaphore slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

}  // namespace

std::string extract_program(std::string_view reply) {
  const auto open = reply.find(kFence);
  std::string program;
  if (open != std::string_view::npos) {
    const auto body_start = reply.find('\n', open + kFence.size());
    if (body_start != std::string_view::npos) {
      auto close = reply.find(kFence, body_start + 1);
      // Closing fence must start a line; tolerate a missing one.
      while (close != std::string_view::npos && reply[close - 1] != '\n') {
        close = reply.find(kFence, close + kFence.size());
      }
      const auto end = close == std::string_view::npos ? reply.size() : close;
      program = std::string(reply.substr(body_start + 1, end - body_start - 1));
    }
  } else {
    program = std::string(reply);
  }
  if (trim(program).empty()) {
    throw GenerationError("model reply contains no program");
  }
  return program;
}

std::pair<std::string, std::string> render_messages(const PromptBundle& prompt) {
  std::string system =
      "You improve programs for an automated evaluator. Reply with the complete new "
      "program in a single fenced code block; text outside the block is ignored.";
  std::string user;
  user += prompt.task_prompt;
  user += "\n\nCurrent program (score " + format_double(prompt.parent_score) + "):\n```\n";
  user += prompt.parent_program;
  if (!prompt.parent_program.empty() && prompt.parent_program.back() != '\n') user += '\n';
  user += "```\n";
  if (!prompt.history.empty()) {
    user += "\nRecent ancestors (oldest first):\n";
    for (const auto& note : prompt.history) {
      user += "- score " + format_double(note.score) + ": " + note.summary + "\n";
    }
  }
  user += "\nPropose an improved version.";
  return {std::move(system), std::move(user)};
}

HttpProvider::HttpProvider(ProviderSpec spec)
    : spec_(std::move(spec)), in_flight_(std::clamp(spec_.max_in_flight, 1, 1024)) {
  if (spec_.base_url.empty()) {
    throw ConfigError("provider.base_url", "must be set for the http provider");
  }
  const auto scheme_end = spec_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("provider.base_url", "expected scheme://host[:port][/path]");
  }
  const auto path_start = spec_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = spec_.base_url.substr(0, path_start);
  std::string base_path = path_start == std::string::npos ? "" : spec_.base_url.substr(path_start);
  while (!base_path.empty() && base_path.back() == '/') base_path.pop_back();
  path_ = base_path + "/chat/completions";
}

std::string HttpProvider::post_once(const std::string& body, bool& transient) {
  SlotGuard slot(in_flight_);
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration<double>(spec_.request_timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(
      std::min(timeout, std::chrono::duration<double>(30.0))));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!spec_.api_key.empty()) headers.emplace("Authorization", "Bearer " + spec_.api_key);

  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    transient = true;
    throw GenerationError("request to " + scheme_host_port_ + path_ +
                          " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    transient = true;
    throw GenerationError("endpoint returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    transient = false;
    throw GenerationError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                          res->body.substr(0, 500));
  }
  transient = false;
  try {
    const auto reply = Json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw GenerationError(std::string("malformed chat-completion reply: ") + e.what());
  }
}

std::string HttpProvider::generate(const GenerationRequest& request) {
  const auto [system, user] = render_messages(request.prompt);
  Json body;
  body["model"] = request.model_id;
  body["messages"] = Json::array({Json{{"role", "system"}, {"content", system}},
                                  Json{{"role", "user"}, {"content", user}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  const std::string payload = body.dump();

  double backoff = spec_.retry.initial_backoff_s;
  std::string last_error;
  for (int attempt = 1; attempt <= spec_.retry.max_attempts; ++attempt) {
    bool transient = false;
    try {
      return extract_program(post_once(payload, transient));
    } catch (const GenerationError& e) {
      last_error = e.what();
      if (!transient) throw;
    }
    if (attempt < spec_.retry.max_attempts) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= spec_.retry.factor;
    }
  }
  throw GenerationError("giving up after " + std::to_string(spec_.retry.max_attempts) +
                        " attempts: " + last_error);
}

std::unique_ptr<Provider> make_provider(const ProviderSpec& spec) {
  if (spec.kind == ProviderSpec::Kind::mock) return std::make_unique<MockProvider>(spec.step_scale);
  return std::make_unique<HttpProvider>(spec);
}

}  // namespace discover
