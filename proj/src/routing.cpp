#include <cmath>

#include "discover/providers.hpp"
#include "discover/serialize.hpp"

namespace discover {

ModelEnsemble ModelEnsemble::from_weights(const std::map<std::string, double>& weights) {
  if (weights.empty()) throw ConfigError("model_weights", "needs at least one model");
  ModelEnsemble e;
  double sum = 0.0;
  for (const auto& [model, w] : weights) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw ConfigError("model_weights", "weight of '" + model + "' must lie in [0, 1]");
    }
    sum += w;
    e.entries.push_back({model, w});
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("model_weights", "weights sum to " + format_double(sum) + ", expected 1");
  }
  return e;
}

const std::string& route_model(const ModelEnsemble& ensemble, double u) {
  if (!(u >= 0.0)) u = 0.0;
  double cumulative = 0.0;
  const ModelEnsemble::Entry* last_positive = &ensemble.entries.front();
  for (const auto& entry : ensemble.entries) {
    if (entry.weight <= 0.0) continue;
    cumulative += entry.weight;
    last_positive = &entry;
    if (u < cumulative) return entry.model_id;
  }
  return last_positive->model_id;
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

const std::string& route_model(const ModelEnsemble& ensemble, std::mt19937_64& rng) {
  return route_model(ensemble, unit_uniform(rng));
}

}  // namespace discover
