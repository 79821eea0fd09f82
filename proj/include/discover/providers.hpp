#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "discover/config.hpp"

namespace discover {

struct ModelEnsemble {
  struct Entry {
    std::string model_id;
    double weight = 0.0;
  };
  std::vector<Entry> entries;

  /// Entries in key order of `weights`. Throws ConfigError unless there is
  /// at least one entry, every weight is in [0,1] and they sum to 1 (1e-9).
  static ModelEnsemble from_weights(const std::map<std::string, double>& weights);
};

/// Entry whose cumulative-weight interval [c_{i-1}, c_i) contains u.
/// u is clamped into [0,1); rounding slack at the top goes to the last
/// entry with positive weight.
const std::string& route_model(const ModelEnsemble& ensemble, double u);

/// Uniform double in [0,1) with 53 random bits. Portable across standard
/// libraries, unlike std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng);

const std::string& route_model(const ModelEnsemble& ensemble, std::mt19937_64& rng);

struct AncestorNote {
  double score = 0.0;
  std::string summary;
};

struct PromptBundle {
  std::string task_prompt;
  std::string parent_program;
  double parent_score = 0.0;
  std::vector<AncestorNote> history;  // oldest first
};

struct GenerationRequest {
  PromptBundle prompt;
  std::string model_id;
  int max_output_tokens = 4096;
  double temperature = 0.7;
  std::uint64_t seed = 0;
};

class Provider {
 public:
  virtual ~Provider() = default;

  /// A complete candidate program. Throws GenerationError on failure;
  /// never returns an empty string.
  virtual std::string generate(const GenerationRequest& request) = 0;

  virtual std::string name() const = 0;
};

/// Gaussian perturbation of a builtin-format program (packing or step).
///
/// A seeded random subset of the numeric parameters moves by N(0, step_scale).
/// Centers are clamped to [0,1], radii to >= 0; step values are clamped to
/// [0,1] and shifted back to unit integral. step_scale == 0 returns the
/// parent verbatim. Pure in (parent, seed, step_scale); throws FormatError
/// when the parent does not parse.
std::string mock_mutate(std::string_view parent_program, std::uint64_t seed, double step_scale);

class MockProvider final : public Provider {
 public:
  explicit MockProvider(double step_scale) : step_scale_(step_scale) {}

  std::string generate(const GenerationRequest& request) override;
  std::string name() const override { return "mock"; }

 private:
  double step_scale_;
};

/// First fenced code block of a model reply (language tag dropped), or the
/// whole reply when it has none. Throws GenerationError if that is blank.
std::string extract_program(std::string_view reply);

/// System and user messages sent for one generation.
std::pair<std::string, std::string> render_messages(const PromptBundle& prompt);

// Client for OpenAI-style chat-completion endpoints:
//   POST <base_url>/chat/completions
//   {"model", "messages": [{"role", "content"}...], "temperature", "max_tokens"}
// reading choices[0].message.content from the reply. Connection failures,
// 429 and 5xx are retried with exponential backoff.
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(ProviderSpec spec);

  std::string generate(const GenerationRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  std::string post_once(const std::string& body, bool& transient);

  ProviderSpec spec_;
  std::string scheme_host_port_;
  std::string path_;
  std::counting_semaphore<1024> in_flight_;
};

std::unique_ptr<Provider> make_provider(const ProviderSpec& spec);

}  // namespace discover
