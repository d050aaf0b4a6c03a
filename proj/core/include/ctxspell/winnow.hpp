#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "ctxspell/bayes.hpp"
#include "ctxspell/corpus.hpp"
#include "ctxspell/features.hpp"

namespace ctxspell {

// Pseudo-feature active in every example (the prior slot).
inline constexpr FeatureId kBiasFeature = std::numeric_limits<FeatureId>::max();

struct WinnowParams {
  double theta = 1.0;
  double alpha = 1.5;
  std::vector<double> betas{0.5, 0.6, 0.7, 0.8, 0.9};
  double one_layer_beta = 0.7;
  double default_weight = 0.1;
  int cycles = 5;

  void validate() const;
};

enum class Architecture { kSparse, kFull };

class WinnowClassifier {
 public:
  using Weights = std::unordered_map<FeatureId, double>;

  WinnowClassifier(double beta, Architecture architecture)
      : beta_(beta), architecture_(architecture) {}

  double beta() const noexcept { return beta_; }
  Architecture architecture() const noexcept { return architecture_; }
  std::uint64_t mistakes() const noexcept { return mistakes_; }
  const Weights& weights() const noexcept { return weights_; }

  bool connected(FeatureId f) const { return weights_.count(f) != 0; }
  // 0 for unconnected features.
  double weight(FeatureId f) const;
  // Sum of the weights of the connected features in `active`.
  double activation(std::span<const FeatureId> active) const;

  void connect(FeatureId f, double weight) { weights_[f] = weight; }
  void scale(std::span<const FeatureId> active, double factor);
  void count_mistake() { ++mistakes_; }
  void set_mistakes(std::uint64_t m) { mistakes_ = m; }

 private:
  double beta_;
  Architecture architecture_;
  std::uint64_t mistakes_ = 0;
  Weights weights_;
};

// 1 iff the connected weights of `active` sum to more than theta.
int winnow_predict(const WinnowClassifier& classifier,
                   std::span<const FeatureId> active, double theta);

// One online step: in sparse mode a positive example first connects its
// unconnected features at the default weight; then a wrong prediction
// promotes (label 1, x alpha) or demotes (label 0, x beta) every connected
// active weight and counts a mistake. Returns true on a mistake.
bool winnow_train_example(WinnowClassifier& classifier,
                          std::span<const FeatureId> active, int label,
                          const WinnowParams& params);

// gamma(t) = end + (start - end) * (1 - min(t / horizon, 1))^2.
struct GammaSchedule {
  double start = 1.0;
  double end = 0.67;
  std::uint64_t horizon = 1000;
};

double gamma_at(const GammaSchedule& schedule, std::uint64_t examples_seen);

// The ensemble of classifiers for one confusion-set member.
struct Cloud {
  std::size_t member = 0;
  std::vector<WinnowClassifier> classifiers;
  std::uint64_t examples_seen = 0;
};

// sum_j gamma^m_j C_j / sum_j gamma^m_j, gamma taken at the cloud's
// examples_seen. `active` must already include the bias feature if wanted.
double cloud_activation(const Cloud& cloud, std::span<const FeatureId> active,
                        const WinnowParams& params, const GammaSchedule& schedule);

enum class LayerMode { kOneLayer, kTwoLayer };
enum class InitMode { kUniform, kBayesian };

struct NetworkConfig {
  Architecture architecture = Architecture::kSparse;
  LayerMode layers = LayerMode::kTwoLayer;
  InitMode init = InitMode::kUniform;
  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

// One cloud per confusion-set member over a learned feature set.
class WinnowNetwork {
 public:
  WinnowNetwork(ConfusionSet set, ExtractionParams extraction, FeatureIndex features,
                WinnowParams params, NetworkConfig config);

  const ConfusionSet& confusion_set() const noexcept { return set_; }
  const ExtractionParams& extraction() const noexcept { return extraction_; }
  const FeatureIndex& features() const noexcept { return features_; }
  const WinnowParams& params() const noexcept { return params_; }
  const NetworkConfig& config() const noexcept { return config_; }
  const GammaSchedule& schedule() const noexcept { return schedule_; }
  std::size_t members() const noexcept { return clouds_.size(); }

  const std::vector<Cloud>& clouds() const noexcept { return clouds_; }
  std::vector<Cloud>& clouds() noexcept { return clouds_; }

  // Training-label counts per member (the comparator's tie-break prior).
  const std::vector<std::uint64_t>& prior_counts() const noexcept { return prior_counts_; }
  std::vector<std::uint64_t>& prior_counts() noexcept { return prior_counts_; }

  void set_theta(double theta) { params_.theta = theta; }
  void set_schedule(const GammaSchedule& schedule) { schedule_ = schedule; }

 private:
  ConfusionSet set_;
  ExtractionParams extraction_;
  FeatureIndex features_;
  WinnowParams params_;
  NetworkConfig config_;
  GammaSchedule schedule_;
  std::vector<Cloud> clouds_;
  std::vector<std::uint64_t> prior_counts_;
};

struct WinnowDecision {
  std::size_t chosen = 0;
  // Two-layer: weighted vote fraction in [0, 1]. One-layer: the single
  // classifier's weighted sum.
  std::vector<double> activations;
};

// Comparator over the clouds; the bias feature is added to `active`. Ties go
// to the larger training prior, then the lower member index.
WinnowDecision classify_winnow(const WinnowNetwork& network, const ActiveSet& active);

// Online training in stream order for params().cycles passes. Each example is
// positive for the cloud of its member and negative for the others. The gamma
// horizon is set to cycles * stream size. A Bayesian-initialized network has
// its threshold recalibrated before its first example (see README).
void train_network(WinnowNetwork& network, std::span<const Example> stream);

// Weights become log(smoothed likelihood) + C and the bias weight
// log(prior) + C, with log(0) floored at -500 and C the smallest shift making
// every weight non-negative. A sparse network only receives connections for
// features seen with the member. Throws Error if the model's feature set or
// confusion set differs from the network's.
void init_bayesian(WinnowNetwork& network, const BayesModel& model);

inline constexpr double kLogZeroFloor = -500.0;

// `WINNOW v1` text format; weights are shortest round-trip decimals.
void save_winnow(std::ostream& out, const WinnowNetwork& network);
WinnowNetwork load_winnow(std::istream& in);

}  // namespace ctxspell
