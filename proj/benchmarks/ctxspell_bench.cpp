#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "ctxspell/bayes.hpp"
#include "ctxspell/corpus.hpp"
#include "ctxspell/features.hpp"
#include "ctxspell/rng.hpp"
#include "ctxspell/winnow.hpp"

namespace {

using namespace ctxspell;

const char* const kVocabulary[] = {"the", "a",     "of",    "talks", "world", "small",
                                   "big", "we",    "found", "near",  "under", "jigsaw",
                                   "red", "green", "today", "there", "cake",  "treaty"};

// Sentences of 8..24 tokens with one {peace, piece} occurrence each.
Corpus make_corpus(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Corpus out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> words;
    const std::size_t len = 8 + rng.below(17);
    const std::size_t target = rng.below(len);
    for (std::size_t j = 0; j < len; ++j)
      words.emplace_back(j == target ? (rng.bernoulli(0.4) ? "piece" : "peace")
                                     : kVocabulary[rng.below(std::size(kVocabulary))]);
    out.push_back(Sentence::from_words(words));
  }
  return out;
}

TagDictionary make_tags() {
  TagDictionary tags;
  tags.add("the", {"DET"});
  tags.add("a", {"DET"});
  tags.add("of", {"PREP"});
  tags.add("near", {"PREP"});
  tags.add("under", {"PREP"});
  tags.add("small", {"ADJ"});
  tags.add("big", {"ADJ"});
  tags.add("talks", {"NOUN", "VERB"});
  return tags;
}

const ConfusionSet kSet = ConfusionSet::parse("peace,piece");

void BM_GenerateFeatures(benchmark::State& state) {
  const Corpus corpus = make_corpus(256, 1);
  const auto tags = make_tags();
  const auto occurrences = find_occurrences(corpus, kSet);
  const ExtractionParams params{static_cast<int>(state.range(0)), 2};
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& occ = occurrences[i++ % occurrences.size()];
    benchmark::DoNotOptimize(generate_features(corpus[occ.sentence], occ, params, tags));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GenerateFeatures)->Arg(3)->Arg(10)->Arg(20);

void BM_TrainWinnow(benchmark::State& state) {
  const Corpus corpus = make_corpus(static_cast<std::size_t>(state.range(0)), 2);
  const auto tags = make_tags();
  const auto stats = collect_stats(corpus, kSet, {}, tags);
  const auto features = prune(stats, {PruneMode::kUnpruned});
  const auto examples = make_examples(corpus, kSet, features, {}, tags);
  for (auto _ : state) {
    WinnowNetwork net(kSet, {}, features, WinnowParams{}, NetworkConfig{});
    train_network(net, examples);
    benchmark::DoNotOptimize(net.clouds().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(examples.size()));
}
BENCHMARK(BM_TrainWinnow)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_ClassifyBayes(benchmark::State& state) {
  const Corpus corpus = make_corpus(2000, 3);
  const auto tags = make_tags();
  const auto stats = collect_stats(corpus, kSet, {}, tags);
  const auto model = train_bayes(kSet, {}, stats, PruningPolicy{PruneMode::kUnpruned},
                                 {Smoothing::kInterpolative, state.range(0) != 0});
  const auto examples = make_examples(make_corpus(256, 4), kSet, model.features(), {}, tags);
  std::size_t i = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(classify_bayes(model, examples[i++ % examples.size()].active));
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(state.range(0) ? "dependency resolution" : "plain");
}
BENCHMARK(BM_ClassifyBayes)->Arg(0)->Arg(1);

void BM_ClassifyWinnow(benchmark::State& state) {
  const Corpus corpus = make_corpus(2000, 5);
  const auto tags = make_tags();
  const auto stats = collect_stats(corpus, kSet, {}, tags);
  const auto features = prune(stats, {PruneMode::kUnpruned});
  WinnowNetwork net(kSet, {}, features, WinnowParams{}, NetworkConfig{});
  train_network(net, make_examples(corpus, kSet, features, {}, tags));
  const auto examples = make_examples(make_corpus(256, 6), kSet, features, {}, tags);
  std::size_t i = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(classify_winnow(net, examples[i++ % examples.size()].active));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ClassifyWinnow);

}  // namespace

BENCHMARK_MAIN();
