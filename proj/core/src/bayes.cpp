#include "ctxspell/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "ctxspell/error.hpp"
#include "text_format.hpp"

namespace ctxspell {

BayesModel::BayesModel(ConfusionSet set, ExtractionParams extraction,
                       FeatureIndex features, const FeatureStats& stats,
                       BayesOptions options)
    : set_(std::move(set)),
      extraction_(extraction),
      features_(std::move(features)),
      options_(options) {
  if (stats.members() != set_.size())
    throw Error("statistics do not match confusion set {" + set_.name() + "}");
  const std::size_t m = set_.size();
  member_counts_.resize(m);
  for (std::size_t i = 0; i < m; ++i) member_counts_[i] = stats.occurrences(i);
  total_ = stats.total();
  if (total_ == 0) throw Error("cannot train on zero occurrences");

  priors_.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    priors_[i] = static_cast<double>(member_counts_[i]) / static_cast<double>(total_);

  const std::size_t nf = features_.size();
  counts_.assign(nf * m, 0);
  mle_.assign(nf * m, 0.0);
  lambda_.assign(nf * m, 1.0);
  unigram_.assign(nf, 0.0);
  for (FeatureId f = 0; f < nf; ++f) {
    const Feature& feature = features_[f];
    std::uint64_t present = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto c = stats.count(feature, i);
      counts_[cell(f, i)] = c;
      present += c;
      if (member_counts_[i] > 0)
        mle_[cell(f, i)] =
            static_cast<double>(c) / static_cast<double>(member_counts_[i]);
      lambda_[cell(f, i)] = association(stats, feature, i).p_value;
    }
    unigram_[f] = static_cast<double>(present) / static_cast<double>(total_);
  }
}

double BayesModel::mean_lambda(FeatureId f) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < members(); ++i) sum += lambda(f, i);
  return sum / static_cast<double>(members());
}

std::vector<std::size_t> BayesModel::unseen_members() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < members(); ++i)
    if (member_counts_[i] == 0) out.push_back(i);
  return out;
}

BayesModel train_bayes(const ConfusionSet& set, const ExtractionParams& extraction,
                       const FeatureStats& stats, const PruningPolicy& policy,
                       BayesOptions options) {
  return train_bayes(set, extraction, stats, prune(stats, policy), options);
}

BayesModel train_bayes(const ConfusionSet& set, const ExtractionParams& extraction,
                       const FeatureStats& stats, FeatureIndex retained,
                       BayesOptions options) {
  return BayesModel(set, extraction, std::move(retained), stats, options);
}

double smoothed_likelihood(const BayesModel& model, FeatureId f, std::size_t member) {
  const double ml = model.mle(f, member);
  if (model.options().smoothing == Smoothing::kMle) return ml;
  const double lambda = model.lambda(f, member);
  return (1.0 - lambda) * ml + lambda * model.unigram(f);
}

double smoothed_likelihood(const BayesModel& model, const Feature& f,
                           std::size_t member) {
  const auto id = model.features().find(f);
  if (!id) throw Error("feature '" + f.key() + "' is not retained");
  return smoothed_likelihood(model, *id, member);
}

namespace {

bool spans_overlap(const Feature& a, const Feature& b) {
  for (const auto& sa : a.slots())
    for (const auto& sb : b.slots())
      if (sa.offset == sb.offset) return true;
  return false;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace

ActiveSet resolve_dependencies(const BayesModel& model, const ActiveSet& active) {
  if (!model.options().dependency_resolution) return active;

  std::vector<FeatureId> collocations;
  ActiveSet out;
  for (FeatureId f : active) {
    if (model.features()[f].is_collocation())
      collocations.push_back(f);
    else
      out.push_back(f);
  }

  const std::size_t n = collocations.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (spans_overlap(model.features()[collocations[i]],
                        model.features()[collocations[j]]))
        parent[find_root(parent, i)] = find_root(parent, j);

  // Best member of each group; iteration is in ascending id order, so a
  // strict comparison keeps the canonically first feature on ties.
  std::vector<std::size_t> best(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find_root(parent, i);
    if (best[root] == n ||
        model.mean_lambda(collocations[i]) < model.mean_lambda(collocations[best[root]]))
      best[root] = i;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (best[i] != n) out.push_back(collocations[best[i]]);
  std::sort(out.begin(), out.end());
  return out;
}

Posterior classify_bayes(const BayesModel& model, const ActiveSet& active) {
  const std::size_t m = model.members();
  const ActiveSet reduced = resolve_dependencies(model, active);

  Posterior post;
  post.scores.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double score = std::log(model.prior(i));
    for (FeatureId f : reduced) score += std::log(smoothed_likelihood(model, f, i));
    post.scores[i] = score;
  }

  const double ninf = -std::numeric_limits<double>::infinity();
  post.prior_fallback = std::all_of(post.scores.begin(), post.scores.end(),
                                    [&](double s) { return s == ninf; });
  auto better = [&](std::size_t a, std::size_t b) {
    if (!post.prior_fallback && post.scores[a] != post.scores[b])
      return post.scores[a] > post.scores[b];
    return model.prior(a) > model.prior(b);
  };
  std::size_t chosen = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (better(i, chosen)) chosen = i;
  post.chosen = chosen;
  return post;
}

// ------------------------------------------------------------ Persistence

namespace {
constexpr std::string_view kBayesHeader = "BAYES v1";
}

void save_bayes(std::ostream& out, const BayesModel& model) {
  out << kBayesHeader << '\n';
  out << "set\t" << model.confusion_set().name() << '\n';
  out << "extraction\t" << model.extraction().window << '\t'
      << model.extraction().max_collocation << '\n';
  out << "smoothing\t"
      << (model.options().smoothing == Smoothing::kMle ? "mle" : "interpolative") << '\n';
  out << "dependencies\t" << (model.options().dependency_resolution ? "on" : "off")
      << '\n';
  out << "priors";
  for (std::size_t i = 0; i < model.members(); ++i) out << '\t' << model.member_count(i);
  out << '\n';
  out << "features\t" << model.features().size() << '\n';
  for (FeatureId f = 0; f < model.features().size(); ++f) {
    for (std::size_t i = 0; i < model.members(); ++i) out << model.count(f, i) << '\t';
    out << model.features()[f].key() << '\n';
  }
}

BayesModel load_bayes(std::istream& in) {
  text::LineReader reader(in);
  reader.expect_line(kBayesHeader);
  const ConfusionSet set = ConfusionSet::parse(reader.field("set"));
  ExtractionParams extraction;
  {
    const auto parts = text::split_tabs(reader.field("extraction"));
    if (parts.size() != 2) reader.fail("extraction needs two values");
    extraction.window = static_cast<int>(reader.parse_uint(parts[0]));
    extraction.max_collocation = static_cast<int>(reader.parse_uint(parts[1]));
    extraction.validate();
  }
  BayesOptions options;
  {
    const auto s = reader.field("smoothing");
    if (s == "mle")
      options.smoothing = Smoothing::kMle;
    else if (s == "interpolative")
      options.smoothing = Smoothing::kInterpolative;
    else
      reader.fail("unknown smoothing '" + std::string(s) + "'");
    const auto d = reader.field("dependencies");
    if (d != "on" && d != "off") reader.fail("dependencies must be on or off");
    options.dependency_resolution = d == "on";
  }
  std::vector<std::uint64_t> priors;
  for (auto p : text::split_tabs(reader.field("priors"))) priors.push_back(reader.parse_uint(p));
  if (priors.size() != set.size()) reader.fail("prior count does not match set");

  const auto nf = reader.parse_uint(reader.field("features"));
  std::map<Feature, std::vector<std::uint64_t>> table;
  std::vector<Feature> retained;
  for (std::uint64_t k = 0; k < nf; ++k) {
    const auto parts = text::split_tabs(reader.next_line());
    if (parts.size() != set.size() + 1) reader.fail("malformed feature row");
    std::vector<std::uint64_t> row;
    for (std::size_t i = 0; i < set.size(); ++i) row.push_back(reader.parse_uint(parts[i]));
    Feature f = reader.parse_feature(parts.back());
    retained.push_back(f);
    if (!table.emplace(std::move(f), std::move(row)).second) reader.fail("duplicate feature");
  }
  reader.expect_end();
  const FeatureStats stats = FeatureStats::from_table(std::move(priors), std::move(table));
  return BayesModel(set, extraction, FeatureIndex(std::move(retained)), stats, options);
}

}  // namespace ctxspell
