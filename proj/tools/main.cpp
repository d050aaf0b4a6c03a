#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ctxspell/error.hpp"
#include "ctxspell/eval.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

constexpr const char* kReportHelp =
    "Report columns (report.tsv): confusion_set, train_cases, test_cases,\n"
    "retained_features, one accuracy percentage per system, then\n"
    "mcnemar_p:<a>/<b> for each adjacent pair of systems. The last row is\n"
    "OVERALL, pooled over all test cases.";

}  // namespace

int main(int argc, char** argv) {
  using namespace ctxspell;
  cli::Options opts;

  CLI::App app{"Context-sensitive spelling correction with Bayesian and Winnow classifiers"};
  app.set_version_flag("--version", "ctxspell 0.1.0");
  app.set_config("--config", "", "TOML/INI file with flag defaults; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  std::vector<std::string> system_names;
  for (System s : all_systems()) system_names.emplace_back(system_name(s));

  app.add_option("--corpus", opts.corpus, "Training corpus");
  app.add_option("--test-corpus", opts.test_corpus,
                 "Second corpus for the across and supunsup protocols");
  app.add_option("--confusion-sets", opts.confusion_sets,
                 "Confusion sets, one per line, members comma-separated");
  app.add_option("--tagdict", opts.tagdict, "Tag dictionary: word<TAB>tag1,tag2");
  app.add_option("--format", opts.format, "Corpus layout")
      ->check(CLI::IsMember({"presplit", "raw"}))
      ->capture_default_str();
  app.add_option("--mode", opts.mode, "Feature pruning")
      ->check(CLI::IsMember({"pruned", "unpruned"}))
      ->capture_default_str();
  app.add_option("--system", opts.systems, "Systems, comma-separated")
      ->delimiter(',')
      ->check(CLI::IsMember(system_names));
  app.add_option("--protocol", opts.protocol, "Evaluation protocol")
      ->check(CLI::IsMember({"within", "across", "supunsup"}))
      ->capture_default_str();
  app.add_option("--seed", opts.seed, "Random seed")->capture_default_str();
  app.add_option("--cycles", opts.cycles, "Winnow training passes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--corrupt-pct", opts.corrupt_pct,
                 "Corruption percentage; a list yields the supunsup curve")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  app.add_option("--out", opts.out, "Output directory");
  app.add_option("--models", opts.models, "Model directory (classify)");
  app.add_option("--input", opts.input, "Text to check; '-' reads stdin")
      ->capture_default_str();
  app.add_option("--window", opts.window, "Context-word half-window k")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--collocation-length", opts.collocation_length,
                 "Maximum collocation length l")
      ->check(CLI::Range(1, 2))
      ->capture_default_str();
  app.add_option("--theta", opts.theta, "Winnow threshold")->capture_default_str();
  app.add_option("--alpha", opts.alpha, "Winnow promotion factor")->capture_default_str();
  app.add_option("--default-weight", opts.default_weight, "Initial Winnow weight")
      ->capture_default_str();

  auto* train = app.add_subcommand("train", "Train per-set models into --out");
  auto* classify = app.add_subcommand(
      "classify",
      "Check --input against models in --models. Rows: sentence, span start, span "
      "length, set, observed, suggested, ok|suspect, member=score list");
  auto* eval = app.add_subcommand("eval", std::string("Evaluate systems.\n") + kReportHelp);
  auto* ablate = app.add_subcommand(
      "ablate", std::string("Run the ablation ladder in order.\n") + kReportHelp);
  auto* corrupt = app.add_subcommand(
      "corrupt", "Write <out>/corpus.txt with members replaced at --corrupt-pct, "
                 "plus <out>/changes.tsv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return cli::cmd_train(opts, std::cout);
    if (*classify) return cli::cmd_classify(opts, std::cout);
    if (*eval) return cli::cmd_eval(opts, std::cout);
    if (*ablate) return cli::cmd_ablate(opts, std::cout);
    if (*corrupt) return cli::cmd_corrupt(opts, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "ctxspell: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
