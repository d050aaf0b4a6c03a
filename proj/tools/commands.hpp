#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ctxspell::cli {

// Flag values shared by all subcommands. Defaults mirror the library's.
struct Options {
  std::string corpus;
  std::string test_corpus;
  std::string confusion_sets;
  std::string tagdict;
  std::string format = "presplit";
  std::string mode = "unpruned";
  std::vector<std::string> systems;
  std::string protocol = "within";
  std::uint64_t seed = 0;
  int cycles = 5;
  std::vector<double> corrupt_pct{5.0};
  std::string out;
  std::string models;
  std::string input = "-";
  int window = 10;
  int collocation_length = 2;
  double theta = 1.0;
  double alpha = 1.5;
  double default_weight = 0.1;
};

// Runtime failures throw ctxspell::Error; the caller maps them to exit 1.
int cmd_train(const Options& opts, std::ostream& out);
int cmd_classify(const Options& opts, std::ostream& out);
int cmd_eval(const Options& opts, std::ostream& out);
int cmd_ablate(const Options& opts, std::ostream& out);
int cmd_corrupt(const Options& opts, std::ostream& out);

}  // namespace ctxspell::cli
