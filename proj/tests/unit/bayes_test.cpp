#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "bayes_oracle.hpp"
#include "ctxspell/bayes.hpp"
#include "ctxspell/error.hpp"
#include "synthetic.hpp"

namespace ctxspell {
namespace {

const ConfusionSet kSet = ConfusionSet::parse("peace,piece");

Feature cw(std::string w) { return Feature::context_word(std::move(w)); }
Feature coll(std::vector<Slot> slots) { return Feature::collocation(std::move(slots)); }

BayesModel model_from(std::vector<std::uint64_t> n,
                      std::map<Feature, std::vector<std::uint64_t>> counts,
                      BayesOptions options = {}) {
  const auto stats = FeatureStats::from_table(std::move(n), std::move(counts));
  const ConfusionSet set =
      stats.members() == 2 ? kSet : ConfusionSet::parse("their,there,they're");
  return train_bayes(set, {}, stats, PruningPolicy{PruneMode::kUnpruned}, options);
}

ActiveSet ids(const BayesModel& m, std::initializer_list<Feature> fs) {
  ActiveSet out;
  for (const auto& f : fs) out.push_back(*m.features().find(f));
  std::sort(out.begin(), out.end());
  return out;
}

TEST(TrainBayes, PriorsAreRatios) {
  const auto m = model_from({60, 40}, {{cw("a"), {10, 10}}});
  EXPECT_DOUBLE_EQ(m.prior(0), 0.6);
  EXPECT_DOUBLE_EQ(m.prior(1), 0.4);
  EXPECT_NEAR(m.prior(0) + m.prior(1), 1.0, 1e-12);
}

TEST(TrainBayes, MleLikelihoodIsCountOverOccurrences) {
  const auto m = model_from({50, 98}, {{cw("cake"), {3, 47}}});
  const FeatureId f = *m.features().find(cw("cake"));
  EXPECT_DOUBLE_EQ(m.mle(f, 1), 47.0 / 98.0);
  EXPECT_DOUBLE_EQ(m.unigram(f), 50.0 / 148.0);
}

TEST(TrainBayes, IndependentFeatureHasLambdaOne) {
  const auto m = model_from({100, 50}, {{cw("even"), {20, 10}}});
  const FeatureId f = *m.features().find(cw("even"));
  EXPECT_DOUBLE_EQ(m.lambda(f, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.lambda(f, 1), 1.0);
  EXPECT_DOUBLE_EQ(smoothed_likelihood(m, f, 0), m.unigram(f));
}

TEST(TrainBayes, UnseenMemberGetsZeroPriorAndIsReported) {
  const auto m = model_from({10, 0}, {{cw("a"), {4, 0}}});
  EXPECT_EQ(m.prior(1), 0.0);
  EXPECT_EQ(m.unseen_members(), std::vector<std::size_t>{1});
  for (const auto& active : {ActiveSet{}, ids(m, {cw("a")})})
    EXPECT_EQ(classify_bayes(m, active).chosen, 0u);
}

TEST(TrainBayes, TablesStayInRange) {
  const auto set = ConfusionSet::parse("peace,piece");
  const auto stats = collect_stats(testing::separable_corpus(200, 1), set, {}, {});
  const auto m = train_bayes(set, {}, stats, PruningPolicy{PruneMode::kUnpruned});
  for (FeatureId f = 0; f < m.features().size(); ++f)
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_GE(m.mle(f, i), 0.0);
      EXPECT_LE(m.mle(f, i), 1.0);
      EXPECT_GE(m.lambda(f, i), 0.0);
      EXPECT_LE(m.lambda(f, i), 1.0);
    }
}

TEST(TrainBayes, LikelihoodMonotoneInCount) {
  for (std::uint64_t c = 0; c < 20; ++c) {
    const auto before = model_from({20, 20}, {{cw("f"), {c, 5}}});
    const auto after = model_from({21, 20}, {{cw("f"), {c + 1, 5}}});
    EXPECT_GE(after.mle(0, 0), before.mle(0, 0));
  }
}

// -------------------------------------------------------------- smoothing

TEST(Smoothing, InterpolatesWithLambda) {
  // count 20 of n=100 for member 0, 80 of 100 for member 1: strongly associated.
  const auto m = model_from({100, 100}, {{cw("f"), {20, 80}}});
  const FeatureId f = 0;
  const double lambda = m.lambda(f, 0);
  EXPECT_NEAR(smoothed_likelihood(m, f, 0), (1 - lambda) * 0.2 + lambda * 0.5, 1e-15);
}

TEST(Smoothing, ArithmeticExample) {
  // P_ML(f|W)=0.2, P_ML(f)=0.5, lambda=0.25 -> 0.275.
  EXPECT_DOUBLE_EQ((1 - 0.25) * 0.2 + 0.25 * 0.5, 0.275);
}

TEST(Smoothing, MleModeIgnoresLambda) {
  const auto m = model_from({100, 100}, {{cw("f"), {20, 20}}}, {Smoothing::kMle, true});
  EXPECT_DOUBLE_EQ(smoothed_likelihood(m, 0, 0), 0.2);
}

TEST(Smoothing, UnretainedFeatureThrows) {
  const auto m = model_from({10, 10}, {{cw("f"), {2, 2}}});
  EXPECT_THROW(smoothed_likelihood(m, cw("missing"), 0), Error);
  EXPECT_NO_THROW(smoothed_likelihood(m, cw("f"), 0));
}

// ------------------------------------------------------ dependency handling

TEST(Dependencies, ContextWordsOnlyUnchanged) {
  const auto m = model_from({20, 20}, {{cw("a"), {5, 2}}, {cw("b"), {3, 9}}});
  const ActiveSet active{0, 1};
  EXPECT_EQ(resolve_dependencies(m, active), active);
}

TEST(Dependencies, OverlappingCollocationsKeepLowestMeanLambda) {
  const Feature left = coll({{-1, false, "a"}});
  const Feature straddle = coll({{-1, false, "a"}, {1, false, "of"}});
  const Feature right = coll({{2, false, "x"}, {3, false, "y"}});
  // `straddle` is strongly associated, `left` barely.
  const auto m = model_from(
      {100, 100}, {{left, {30, 25}}, {straddle, {2, 40}}, {right, {5, 5}}, {cw("c"), {9, 9}}});
  EXPECT_LT(m.mean_lambda(*m.features().find(straddle)),
            m.mean_lambda(*m.features().find(left)));
  const auto reduced = resolve_dependencies(m, ids(m, {left, straddle, right, cw("c")}));
  EXPECT_EQ(reduced, ids(m, {straddle, right, cw("c")}));
}

TEST(Dependencies, TransitiveGroupsAndCanonicalTieBreak) {
  const Feature a = coll({{-2, false, "p"}, {-1, false, "q"}});
  const Feature b = coll({{-1, false, "q"}, {1, false, "r"}});
  const Feature c = coll({{1, false, "r"}, {2, false, "s"}});
  // Identical rows give identical lambdas; the canonically smallest survives.
  const auto m = model_from({50, 50}, {{a, {10, 3}}, {b, {10, 3}}, {c, {10, 3}}});
  const auto reduced = resolve_dependencies(m, ids(m, {a, b, c}));
  ASSERT_EQ(reduced.size(), 1u);
  EXPECT_EQ(reduced[0], ids(m, {a, b, c})[0]);
}

TEST(Dependencies, OffModeIsIdentityAndSubsetWhenOn) {
  const Feature l = coll({{-1, false, "a"}});
  const Feature s = coll({{-1, true, "DET"}});
  const auto on = model_from({40, 40}, {{l, {10, 3}}, {s, {20, 15}}, {cw("z"), {2, 2}}});
  const auto off = model_from({40, 40}, {{l, {10, 3}}, {s, {20, 15}}, {cw("z"), {2, 2}}},
                              {Smoothing::kInterpolative, false});
  const ActiveSet all{0, 1, 2};
  EXPECT_EQ(resolve_dependencies(off, all), all);
  const auto reduced = resolve_dependencies(on, all);
  EXPECT_TRUE(std::includes(all.begin(), all.end(), reduced.begin(), reduced.end()));
  EXPECT_EQ(reduced, resolve_dependencies(on, all));
}

// ------------------------------------------------------------ classification

TEST(ClassifyBayes, EmptyActiveSetPicksPrior) {
  const auto m = model_from({30, 70}, {{cw("a"), {5, 5}}});
  const auto p = classify_bayes(m, {});
  EXPECT_EQ(p.chosen, 1u);
  EXPECT_DOUBLE_EQ(p.scores[0], std::log(0.3));
}

TEST(ClassifyBayes, MleZeroEverywhereFallsBackToPrior) {
  // Under MLE, a feature seen only with member 0 zeroes member 1, and one seen
  // only with member 1 zeroes member 0.
  const auto m = model_from({30, 70}, {{cw("a"), {3, 0}}, {cw("b"), {0, 4}}},
                            {Smoothing::kMle, true});
  const auto p = classify_bayes(m, {0, 1});
  EXPECT_TRUE(p.prior_fallback);
  EXPECT_EQ(p.scores[0], -std::numeric_limits<double>::infinity());
  EXPECT_EQ(p.chosen, 1u);
}

TEST(ClassifyBayes, TiesGoToLargerPriorThenLowerIndex) {
  // Three members, two with identical statistics.
  const auto m = model_from({20, 20, 10}, {{cw("a"), {2, 2, 1}}});
  EXPECT_EQ(classify_bayes(m, {0}).chosen, 0u);
}

TEST(ClassifyBayes, ShiftInvarianceOfArgmax) {
  const auto m = model_from({30, 70}, {{cw("a"), {25, 5}}, {cw("b"), {10, 40}}});
  const auto p = classify_bayes(m, {0});
  std::vector<double> shifted = p.scores;
  for (auto& s : shifted) s += 123.0;
  EXPECT_EQ(std::max_element(shifted.begin(), shifted.end()) - shifted.begin(),
            static_cast<std::ptrdiff_t>(p.chosen));
}

TEST(ClassifyBayes, MatchesBruteForceOnFourSentences) {
  const auto set = ConfusionSet::parse("x,y");
  const Corpus train{Sentence::from_words({"a", "x", "b"}), Sentence::from_words({"a", "x"}),
                     Sentence::from_words({"y", "b"}), Sentence::from_words({"b", "y", "b"})};
  const ExtractionParams params{10, 1};
  const auto stats = collect_stats(train, set, params, {});
  const auto model = train_bayes(set, params, stats, PruningPolicy{PruneMode::kUnpruned},
                                 {Smoothing::kInterpolative, false});
  const testing::ToyBayesOracle oracle(train);
  EXPECT_EQ(model.features().size(), oracle.retained());

  const Sentence test = Sentence::from_words({"a", "y", "b"});
  const auto occ = find_occurrences(test, 0, set).front();
  const auto got = classify_bayes(model, extract_active(test, occ, model.features(), params, {}));
  const auto want = oracle.classify(test);
  EXPECT_EQ(got.chosen, want.chosen);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(got.scores[i], want.log_scores[i], 1e-9);
}

TEST(ClassifyBayes, PlantedCollocationWins) {
  const auto set = ConfusionSet::parse("peace,piece");
  const Corpus train = testing::separable_corpus(200, 5);
  const auto stats = collect_stats(train, set, {}, {});
  const auto model = train_bayes(set, {}, stats, PruningPolicy{PruneMode::kPruned});
  const Corpus probe = testing::make_corpus({"I'd like a peace of cake ."});
  const auto occ = find_occurrences(probe, set).front();
  const auto active = extract_active(probe[0], occ, model.features(), {}, {});
  EXPECT_EQ(classify_bayes(model, active).chosen, 1u);
}

// ------------------------------------------------------------- persistence

TEST(BayesPersistence, SaveLoadSaveIsByteIdentical) {
  const auto set = ConfusionSet::parse("maybe,may be");
  const Corpus c = testing::make_corpus(
      {"maybe it will rain .", "it may be late .", "maybe not .", "that may be so .",
       "maybe so .", "it may be ."});
  const auto stats = collect_stats(c, set, {}, {});
  for (BayesOptions options : {BayesOptions{}, BayesOptions{Smoothing::kMle, false}}) {
    const auto model = train_bayes(set, {}, stats, PruningPolicy{PruneMode::kUnpruned}, options);
    std::ostringstream first;
    save_bayes(first, model);
    std::istringstream in(first.str());
    const auto loaded = load_bayes(in);
    std::ostringstream second;
    save_bayes(second, loaded);
    EXPECT_EQ(first.str(), second.str());
    EXPECT_EQ(loaded.options(), options);
    for (FeatureId f = 0; f < model.features().size(); ++f)
      for (std::size_t i = 0; i < 2; ++i)
        EXPECT_EQ(smoothed_likelihood(loaded, f, i), smoothed_likelihood(model, f, i));
  }
}

TEST(BayesPersistence, RejectsCorruptFiles) {
  for (std::string text : {"", "BAYES v2\n", "BAYES v1\nset\tpeace,piece\n",
                           "BAYES v1\nset\tpeace,piece\nextraction\t10\t2\nsmoothing\tfoo\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(load_bayes(in), Error) << text;
  }
}

}  // namespace
}  // namespace ctxspell
