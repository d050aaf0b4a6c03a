#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ctxspell/corpus.hpp"
#include "ctxspell/features.hpp"

namespace ctxspell {

enum class Smoothing { kInterpolative, kMle };

struct BayesOptions {
  Smoothing smoothing = Smoothing::kInterpolative;
  bool dependency_resolution = true;
  friend bool operator==(const BayesOptions&, const BayesOptions&) = default;
};

// Naive-Bayes tables for one confusion set over its retained features.
// All derived quantities (priors, MLE likelihoods, unigram probabilities and
// interpolation weights) are computed once from the raw counts.
class BayesModel {
 public:
  BayesModel(ConfusionSet set, ExtractionParams extraction, FeatureIndex features,
             const FeatureStats& stats, BayesOptions options);

  const ConfusionSet& confusion_set() const noexcept { return set_; }
  const ExtractionParams& extraction() const noexcept { return extraction_; }
  const FeatureIndex& features() const noexcept { return features_; }
  const BayesOptions& options() const noexcept { return options_; }
  std::size_t members() const noexcept { return member_counts_.size(); }

  // n(W_i) and N.
  std::uint64_t member_count(std::size_t i) const { return member_counts_.at(i); }
  std::uint64_t total() const noexcept { return total_; }

  // P(W_i) = n(W_i) / N.
  double prior(std::size_t i) const { return priors_.at(i); }
  std::uint64_t count(FeatureId f, std::size_t i) const { return counts_[cell(f, i)]; }
  // P_ML(f | W_i) = count(f, W_i) / n(W_i); 0 when n(W_i) = 0.
  double mle(FeatureId f, std::size_t i) const { return mle_[cell(f, i)]; }
  // P_ML(f) = sum_i count(f, W_i) / N.
  double unigram(FeatureId f) const { return unigram_.at(f); }
  // Chi-square probability that the f / W_i association is due to chance.
  double lambda(FeatureId f, std::size_t i) const { return lambda_[cell(f, i)]; }
  double mean_lambda(FeatureId f) const;

  // Members never seen in training (prior 0; never chosen).
  std::vector<std::size_t> unseen_members() const;

 private:
  std::size_t cell(FeatureId f, std::size_t i) const {
    return static_cast<std::size_t>(f) * members() + i;
  }

  ConfusionSet set_;
  ExtractionParams extraction_;
  FeatureIndex features_;
  BayesOptions options_;
  std::vector<std::uint64_t> member_counts_;
  std::uint64_t total_ = 0;
  std::vector<double> priors_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> mle_;
  std::vector<double> unigram_;
  std::vector<double> lambda_;
};

// Prunes `stats` with `policy` and builds the model over the survivors.
BayesModel train_bayes(const ConfusionSet& set, const ExtractionParams& extraction,
                       const FeatureStats& stats, const PruningPolicy& policy,
                       BayesOptions options = {});
// Same, over an already pruned feature set.
BayesModel train_bayes(const ConfusionSet& set, const ExtractionParams& extraction,
                       const FeatureStats& stats, FeatureIndex retained,
                       BayesOptions options = {});

// (1 - lambda) P_ML(f|W_i) + lambda P_ML(f), or P_ML(f|W_i) in MLE mode.
double smoothed_likelihood(const BayesModel& model, FeatureId f, std::size_t member);
// Throws Error if `f` is not a retained feature.
double smoothed_likelihood(const BayesModel& model, const Feature& f,
                           std::size_t member);

// Collocations whose offset spans share a position are treated as strongly
// dependent. Within each connected group only the one with the lowest mean
// lambda survives (ties: canonical order). Context words are always kept.
// Identity when dependency resolution is off.
ActiveSet resolve_dependencies(const BayesModel& model, const ActiveSet& active);

struct Posterior {
  std::vector<double> scores;  // log P(W_i) + sum log P(f | W_i)
  std::size_t chosen = 0;
  bool prior_fallback = false;  // every score was -inf
};

// Argmax of the log posterior over the reduced feature set; ties go to the
// larger prior, then the lower member index.
Posterior classify_bayes(const BayesModel& model, const ActiveSet& active);

// Line-based `BAYES v1` text format holding the raw counts; derived tables
// are recomputed on load.
void save_bayes(std::ostream& out, const BayesModel& model);
BayesModel load_bayes(std::istream& in);

}  // namespace ctxspell
