#include "ctxspell/winnow.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "ctxspell/error.hpp"
#include "text_format.hpp"

namespace ctxspell {

void WinnowParams::validate() const {
  if (!(theta > 0.0)) throw Error("winnow threshold must be > 0");
  if (!(alpha > 1.0)) throw Error("winnow promotion factor must be > 1");
  if (betas.empty()) throw Error("winnow needs at least one demotion factor");
  for (double b : betas)
    if (!(b > 0.0 && b < 1.0)) throw Error("winnow demotion factor must be in (0, 1)");
  if (!(one_layer_beta > 0.0 && one_layer_beta < 1.0))
    throw Error("winnow demotion factor must be in (0, 1)");
  if (!(default_weight > 0.0)) throw Error("winnow default weight must be > 0");
  if (cycles < 1) throw Error("winnow needs at least one training cycle");
}

// ------------------------------------------------------------- Classifier

double WinnowClassifier::weight(FeatureId f) const {
  auto it = weights_.find(f);
  return it == weights_.end() ? 0.0 : it->second;
}

double WinnowClassifier::activation(std::span<const FeatureId> active) const {
  double sum = 0.0;
  for (FeatureId f : active) {
    auto it = weights_.find(f);
    if (it != weights_.end()) sum += it->second;
  }
  return sum;
}

void WinnowClassifier::scale(std::span<const FeatureId> active, double factor) {
  for (FeatureId f : active) {
    auto it = weights_.find(f);
    if (it != weights_.end()) it->second *= factor;
  }
}

int winnow_predict(const WinnowClassifier& classifier,
                   std::span<const FeatureId> active, double theta) {
  return classifier.activation(active) > theta ? 1 : 0;
}

bool winnow_train_example(WinnowClassifier& classifier,
                          std::span<const FeatureId> active, int label,
                          const WinnowParams& params) {
  if (label == 1 && classifier.architecture() == Architecture::kSparse) {
    for (FeatureId f : active)
      if (!classifier.connected(f)) classifier.connect(f, params.default_weight);
  }
  const int predicted = winnow_predict(classifier, active, params.theta);
  if (predicted == label) return false;
  classifier.scale(active, label == 1 ? params.alpha : classifier.beta());
  classifier.count_mistake();
  return true;
}

// ---------------------------------------------------------- Weighted vote

double gamma_at(const GammaSchedule& schedule, std::uint64_t examples_seen) {
  const double horizon = static_cast<double>(std::max<std::uint64_t>(schedule.horizon, 1));
  const double progress = std::min(static_cast<double>(examples_seen) / horizon, 1.0);
  const double remaining = 1.0 - progress;
  return schedule.end + (schedule.start - schedule.end) * remaining * remaining;
}

double cloud_activation(const Cloud& cloud, std::span<const FeatureId> active,
                        const WinnowParams& params, const GammaSchedule& schedule) {
  if (cloud.classifiers.empty()) throw Error("cloud has no classifiers");
  const double gamma = gamma_at(schedule, cloud.examples_seen);
  // gamma^m underflows for large m; factor out gamma^min(m), which cancels.
  std::uint64_t fewest = cloud.classifiers.front().mistakes();
  for (const auto& c : cloud.classifiers) fewest = std::min(fewest, c.mistakes());
  double votes = 0.0, norm = 0.0;
  for (const auto& c : cloud.classifiers) {
    const double w = std::pow(gamma, static_cast<double>(c.mistakes() - fewest));
    norm += w;
    if (winnow_predict(c, active, params.theta) == 1) votes += w;
  }
  return votes / norm;
}

// ---------------------------------------------------------------- Network

WinnowNetwork::WinnowNetwork(ConfusionSet set, ExtractionParams extraction,
                             FeatureIndex features, WinnowParams params,
                             NetworkConfig config)
    : set_(std::move(set)),
      extraction_(extraction),
      features_(std::move(features)),
      params_(std::move(params)),
      config_(config),
      prior_counts_(set_.size(), 0) {
  params_.validate();
  const std::vector<double> betas = config_.layers == LayerMode::kOneLayer
                                        ? std::vector<double>{params_.one_layer_beta}
                                        : params_.betas;
  for (std::size_t i = 0; i < set_.size(); ++i) {
    Cloud cloud;
    cloud.member = i;
    for (double beta : betas) {
      WinnowClassifier c(beta, config_.architecture);
      if (config_.architecture == Architecture::kFull) {
        for (FeatureId f = 0; f < features_.size(); ++f) c.connect(f, params_.default_weight);
        c.connect(kBiasFeature, params_.default_weight);
      }
      cloud.classifiers.push_back(std::move(c));
    }
    clouds_.push_back(std::move(cloud));
  }
}

namespace {

ActiveSet with_bias(const ActiveSet& active) {
  ActiveSet out;
  out.reserve(active.size() + 1);
  out.assign(active.begin(), active.end());
  out.push_back(kBiasFeature);
  return out;
}

}  // namespace

WinnowDecision classify_winnow(const WinnowNetwork& network, const ActiveSet& active) {
  const ActiveSet input = with_bias(active);
  WinnowDecision decision;
  for (const auto& cloud : network.clouds()) {
    if (network.config().layers == LayerMode::kOneLayer)
      decision.activations.push_back(cloud.classifiers.front().activation(input));
    else
      decision.activations.push_back(
          cloud_activation(cloud, input, network.params(), network.schedule()));
  }
  const auto& priors = network.prior_counts();
  std::size_t best = 0;
  for (std::size_t i = 1; i < decision.activations.size(); ++i) {
    const double a = decision.activations[i], b = decision.activations[best];
    if (a > b || (a == b && priors[i] > priors[best])) best = i;
  }
  decision.chosen = best;
  return decision;
}

void train_network(WinnowNetwork& network, std::span<const Example> stream) {
  const auto& params = network.params();
  auto& clouds = network.clouds();
  const bool fresh = std::all_of(clouds.begin(), clouds.end(),
                                 [](const Cloud& c) { return c.examples_seen == 0; });

  // A fresh network takes its priors from the stream alone, replacing any
  // counts copied from a Bayesian model.
  if (fresh) std::fill(network.prior_counts().begin(), network.prior_counts().end(), 0);
  std::vector<ActiveSet> inputs;
  inputs.reserve(stream.size());
  for (const auto& ex : stream) {
    if (ex.member >= network.members()) throw Error("example member out of range");
    inputs.push_back(with_bias(ex.active));
    ++network.prior_counts()[ex.member];
  }
  if (stream.empty()) return;

  if (fresh && network.config().init == InitMode::kBayesian) {
    // Bayesian weights live on a log scale shifted by C, so the unit
    // threshold is meaningless; use the mean initial activation instead.
    double sum = 0.0;
    for (const auto& input : inputs)
      for (const auto& cloud : clouds) sum += cloud.classifiers.front().activation(input);
    const double mean = sum / static_cast<double>(inputs.size() * clouds.size());
    if (mean > 0.0) network.set_theta(mean);
  }

  GammaSchedule schedule = network.schedule();
  schedule.horizon = static_cast<std::uint64_t>(params.cycles) * stream.size() +
                     (fresh ? 0 : clouds.front().examples_seen);
  network.set_schedule(schedule);

  const WinnowParams& current = network.params();
  for (int cycle = 0; cycle < current.cycles; ++cycle) {
    for (std::size_t e = 0; e < stream.size(); ++e) {
      for (auto& cloud : clouds) {
        const int label = cloud.member == stream[e].member ? 1 : 0;
        for (auto& classifier : cloud.classifiers)
          winnow_train_example(classifier, inputs[e], label, current);
        ++cloud.examples_seen;
      }
    }
  }
}

void init_bayesian(WinnowNetwork& network, const BayesModel& model) {
  if (!(model.features() == network.features()))
    throw Error("Bayesian model and network have different feature sets");
  if (!(model.confusion_set() == network.confusion_set()))
    throw Error("Bayesian model and network have different confusion sets");
  const bool sparse = network.config().architecture == Architecture::kSparse;
  const std::size_t nf = network.features().size();

  auto floored_log = [](double p) { return p > 0.0 ? std::log(p) : kLogZeroFloor; };

  // Raw log values per cloud: features first, bias last. NaN marks "no link".
  const double none = std::nan("");
  std::vector<std::vector<double>> raw(network.members(), std::vector<double>(nf + 1, none));
  double lowest = 0.0;
  for (std::size_t i = 0; i < network.members(); ++i) {
    for (FeatureId f = 0; f < nf; ++f) {
      if (sparse && model.count(f, i) == 0) continue;
      raw[i][f] = floored_log(smoothed_likelihood(model, f, i));
      lowest = std::min(lowest, raw[i][f]);
    }
    raw[i][nf] = floored_log(model.prior(i));
    lowest = std::min(lowest, raw[i][nf]);
  }
  const double shift = -lowest;

  for (auto& cloud : network.clouds()) {
    const auto& values = raw[cloud.member];
    for (auto& classifier : cloud.classifiers) {
      WinnowClassifier fresh(classifier.beta(), classifier.architecture());
      for (FeatureId f = 0; f < nf; ++f)
        if (!std::isnan(values[f])) fresh.connect(f, values[f] + shift);
      fresh.connect(kBiasFeature, values[nf] + shift);
      classifier = std::move(fresh);
    }
  }
  for (std::size_t i = 0; i < network.members(); ++i)
    network.prior_counts()[i] = model.member_count(i);
}

// ------------------------------------------------------------ Persistence

namespace {

constexpr std::string_view kWinnowHeader = "WINNOW v1";
constexpr std::string_view kBiasKey = "BIAS";

const char* name(Architecture a) { return a == Architecture::kFull ? "full" : "sparse"; }
const char* name(LayerMode l) { return l == LayerMode::kOneLayer ? "1" : "2"; }
const char* name(InitMode i) { return i == InitMode::kBayesian ? "bayesian" : "uniform"; }

}  // namespace

void save_winnow(std::ostream& out, const WinnowNetwork& network) {
  using text::format_double;
  const auto& p = network.params();
  out << kWinnowHeader << '\n';
  out << "set\t" << network.confusion_set().name() << '\n';
  out << "extraction\t" << network.extraction().window << '\t'
      << network.extraction().max_collocation << '\n';
  out << "architecture\t" << name(network.config().architecture) << '\n';
  out << "layers\t" << name(network.config().layers) << '\n';
  out << "init\t" << name(network.config().init) << '\n';
  out << "theta\t" << format_double(p.theta) << '\n';
  out << "alpha\t" << format_double(p.alpha) << '\n';
  out << "betas";
  for (double b : p.betas) out << '\t' << format_double(b);
  out << '\n';
  out << "one_layer_beta\t" << format_double(p.one_layer_beta) << '\n';
  out << "default_weight\t" << format_double(p.default_weight) << '\n';
  out << "cycles\t" << p.cycles << '\n';
  const auto& g = network.schedule();
  out << "gamma\t" << format_double(g.start) << '\t' << format_double(g.end) << '\t'
      << g.horizon << '\n';
  out << "priors";
  for (auto c : network.prior_counts()) out << '\t' << c;
  out << '\n';
  out << "features\t" << network.features().size() << '\n';
  for (const auto& f : network.features().features()) out << f.key() << '\n';

  for (const auto& cloud : network.clouds()) {
    out << "cloud\t" << cloud.member << '\t' << cloud.examples_seen << '\t'
        << cloud.classifiers.size() << '\n';
    for (const auto& c : cloud.classifiers) {
      std::vector<std::pair<FeatureId, double>> rows(c.weights().begin(), c.weights().end());
      // Bias (max id) sorts last; write it first.
      std::sort(rows.begin(), rows.end());
      out << "classifier\t" << format_double(c.beta()) << '\t' << c.mistakes() << '\t'
          << rows.size() << '\n';
      if (c.connected(kBiasFeature))
        out << format_double(c.weight(kBiasFeature)) << '\t' << kBiasKey << '\n';
      for (const auto& [f, w] : rows)
        if (f != kBiasFeature)
          out << format_double(w) << '\t' << network.features()[f].key() << '\n';
    }
  }
}

WinnowNetwork load_winnow(std::istream& in) {
  text::LineReader reader(in);
  reader.expect_line(kWinnowHeader);
  ConfusionSet set = ConfusionSet::parse(reader.field("set"));
  ExtractionParams extraction;
  {
    const auto parts = text::split_tabs(reader.field("extraction"));
    if (parts.size() != 2) reader.fail("extraction needs two values");
    extraction.window = static_cast<int>(reader.parse_uint(parts[0]));
    extraction.max_collocation = static_cast<int>(reader.parse_uint(parts[1]));
    extraction.validate();
  }
  NetworkConfig config;
  {
    const auto a = reader.field("architecture");
    if (a == "full") config.architecture = Architecture::kFull;
    else if (a != "sparse") reader.fail("unknown architecture");
    const auto l = reader.field("layers");
    if (l == "1") config.layers = LayerMode::kOneLayer;
    else if (l != "2") reader.fail("unknown layer mode");
    const auto i = reader.field("init");
    if (i == "bayesian") config.init = InitMode::kBayesian;
    else if (i != "uniform") reader.fail("unknown init mode");
  }
  WinnowParams params;
  params.theta = reader.parse_double(reader.field("theta"));
  params.alpha = reader.parse_double(reader.field("alpha"));
  params.betas.clear();
  for (auto b : text::split_tabs(reader.field("betas"))) params.betas.push_back(reader.parse_double(b));
  params.one_layer_beta = reader.parse_double(reader.field("one_layer_beta"));
  params.default_weight = reader.parse_double(reader.field("default_weight"));
  params.cycles = static_cast<int>(reader.parse_uint(reader.field("cycles")));
  GammaSchedule schedule;
  {
    const auto parts = text::split_tabs(reader.field("gamma"));
    if (parts.size() != 3) reader.fail("gamma needs three values");
    schedule.start = reader.parse_double(parts[0]);
    schedule.end = reader.parse_double(parts[1]);
    schedule.horizon = reader.parse_uint(parts[2]);
  }
  std::vector<std::uint64_t> priors;
  for (auto p : text::split_tabs(reader.field("priors"))) priors.push_back(reader.parse_uint(p));
  if (priors.size() != set.size()) reader.fail("prior count does not match set");

  const auto nf = reader.parse_uint(reader.field("features"));
  std::vector<Feature> features;
  for (std::uint64_t k = 0; k < nf; ++k) features.push_back(reader.parse_feature(reader.next_line()));
  FeatureIndex index(features);
  if (index.size() != features.size()) reader.fail("duplicate feature");

  std::vector<Cloud> clouds;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto head = text::split_tabs(reader.field("cloud"));
    if (head.size() != 3) reader.fail("malformed cloud line");
    Cloud cloud;
    cloud.member = reader.parse_uint(head[0]);
    if (cloud.member != i) reader.fail("clouds out of order");
    cloud.examples_seen = reader.parse_uint(head[1]);
    const auto nc = reader.parse_uint(head[2]);
    for (std::uint64_t j = 0; j < nc; ++j) {
      const auto ch = text::split_tabs(reader.field("classifier"));
      if (ch.size() != 3) reader.fail("malformed classifier line");
      WinnowClassifier c(reader.parse_double(ch[0]), config.architecture);
      c.set_mistakes(reader.parse_uint(ch[1]));
      const auto nw = reader.parse_uint(ch[2]);
      for (std::uint64_t r = 0; r < nw; ++r) {
        const auto row = text::split_tabs(reader.next_line());
        if (row.size() != 2) reader.fail("malformed weight row");
        const double w = reader.parse_double(row[0]);
        if (!(w >= 0.0)) reader.fail("negative weight");
        if (row[1] == kBiasKey) {
          c.connect(kBiasFeature, w);
        } else {
          const auto id = index.find(reader.parse_feature(row[1]));
          if (!id) reader.fail("weight for unknown feature");
          c.connect(*id, w);
        }
      }
      cloud.classifiers.push_back(std::move(c));
    }
    if (cloud.classifiers.empty()) reader.fail("cloud without classifiers");
    clouds.push_back(std::move(cloud));
  }
  reader.expect_end();

  WinnowNetwork restored(std::move(set), extraction, std::move(index), params, config);
  restored.set_schedule(schedule);
  restored.prior_counts() = std::move(priors);
  restored.clouds() = std::move(clouds);
  return restored;
}

}  // namespace ctxspell
