#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ctxspell/corpus.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("ctxspell_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write("sets.txt", "peace, piece\n");
    std::ofstream corpus(dir_ / "corpus.txt", std::ios::binary);
    ctxspell::write_corpus(corpus, ctxspell::testing::separable_corpus(150, 21));
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

  Result run(const std::string& args, const std::string& stdin_text = "") {
    write("stdin.txt", stdin_text);
    const std::string cmd = std::string("cd '") + dir_.string() + "' && '" CTXSPELL_CLI "' " +
                            args + " < stdin.txt > stdout.txt 2> stderr.txt";
    const int raw = std::system(cmd.c_str());
    Result r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(dir_ / "stdout.txt");
    r.err = slurp(dir_ / "stderr.txt");
    return r;
  }

  const std::string base = "--corpus corpus.txt --confusion-sets sets.txt";
  fs::path dir_;
};

TEST_F(Cli, HelpAndVersionExitZero) {
  EXPECT_EQ(run("--help").status, 0);
  EXPECT_EQ(run("--version").status, 0);
  EXPECT_EQ(run("eval --help").status, 0);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("train " + base + " --system bogus --out m").status, 2);
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("eval " + base + " --mode sometimes").status, 2);
  EXPECT_EQ(run("eval " + base + " --corrupt-pct 120").status, 2);
}

TEST_F(Cli, RuntimeErrorsExitOne) {
  const Result missing = run("eval --corpus nowhere.txt --confusion-sets sets.txt");
  EXPECT_EQ(missing.status, 1);
  EXPECT_NE(missing.err.find("nowhere.txt"), std::string::npos);
  EXPECT_EQ(run("classify --confusion-sets sets.txt --models none --system bayes").status, 1);
}

TEST_F(Cli, TrainWritesOneModelPerSetAndSystem) {
  const Result r = run("train " + base + " --system bayes,winnow,baseline --out models");
  ASSERT_EQ(r.status, 0) << r.err;
  for (auto name : {"peace_piece.bayes.model", "peace_piece.winnow.model",
                    "peace_piece.baseline.model", "peace_piece.features"})
    EXPECT_TRUE(fs::exists(dir_ / "models" / name)) << name;
  EXPECT_EQ(slurp(dir_ / "models/peace_piece.bayes.model").rfind("BAYES v1\n", 0), 0u);
  EXPECT_EQ(slurp(dir_ / "models/peace_piece.winnow.model").rfind("WINNOW v1\n", 0), 0u);
}

TEST_F(Cli, SetsAbsentFromTrainingCorpusAreSkipped) {
  write("more.txt", "accept, except\npeace, piece\n");
  const Result r =
      run("train --corpus corpus.txt --confusion-sets more.txt --system bayes --out models");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("skipping {accept,except}"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "models/accept_except.bayes.model"));
  const Result c = run("classify --confusion-sets more.txt --models models --system bayes",
                       "A peace of cake .\n");
  EXPECT_EQ(c.status, 0) << c.err;
  EXPECT_NE(c.out.find("peace,piece"), std::string::npos);

  write("absent.txt", "accept, except\n");
  EXPECT_EQ(run("train --corpus corpus.txt --confusion-sets absent.txt --out m").status, 1);
}

TEST_F(Cli, TrainIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(run("train " + base + " --system winnow,bayes --out a").status, 0);
  ASSERT_EQ(run("train " + base + " --system winnow,bayes --out b").status, 0);
  for (auto name : {"peace_piece.bayes.model", "peace_piece.winnow.model"})
    EXPECT_EQ(slurp(dir_ / "a" / name), slurp(dir_ / "b" / name)) << name;
}

TEST_F(Cli, ClassifySuggestsPieceForPeaceOfCake) {
  ASSERT_EQ(run("train " + base + " --system winnow,bayes --out models").status, 0);
  for (auto system : {"winnow", "bayes"}) {
    const Result r = run(std::string("classify --confusion-sets sets.txt --models models --system ") +
                          system,
                      "I'd like a peace of cake .\nThe peace talks began .\n");
    ASSERT_EQ(r.status, 0) << r.err;
    std::istringstream rows(r.out);
    std::string first, second;
    std::getline(rows, first);
    std::getline(rows, second);
    EXPECT_EQ(first.rfind("1\t3\t1\tpeace,piece\tpeace\tpiece\tsuspect\t", 0), 0u) << first;
    EXPECT_EQ(second.rfind("2\t1\t1\tpeace,piece\tpeace\tpeace\tok\t", 0), 0u) << second;
    EXPECT_NE(first.find("peace="), std::string::npos);
  }
}

TEST_F(Cli, ClassifyWithoutOccurrencesPrintsNothing) {
  ASSERT_EQ(run("train " + base + " --system bayes --out models").status, 0);
  const Result r = run("classify --confusion-sets sets.txt --models models --system bayes",
                    "Nothing relevant here .\n");
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(r.out.empty());
}

TEST_F(Cli, EvalReportHasMcNemarColumnAndIsDeterministic) {
  const std::string args = "eval " + base + " --system baseline,winnow --seed 3 --out report";
  const Result first = run(args);
  ASSERT_EQ(first.status, 0) << first.err;
  const std::string tsv = slurp(dir_ / "report/report.tsv");
  EXPECT_NE(tsv.find("mcnemar_p:baseline/winnow"), std::string::npos);
  const Result second = run(args);
  EXPECT_EQ(first.out, second.out);
  EXPECT_EQ(tsv, slurp(dir_ / "report/report.tsv"));
}

TEST_F(Cli, AblateUsesLadderOrder) {
  const Result r = run("ablate " + base + " --out abl");
  ASSERT_EQ(r.status, 0) << r.err;
  std::istringstream tsv(slurp(dir_ / "abl/report.tsv"));
  std::string header;
  std::getline(tsv, header);
  EXPECT_EQ(header.rfind("confusion_set\ttrain_cases\ttest_cases\tretained_features\t"
                         "bayes\tsimplified-bayes\twinnow-1layer\twinnow-2layer\t"
                         "winnow-bayes-init\t",
                         0),
            0u)
      << header;
}

TEST_F(Cli, CorruptAtZeroReproducesInput) {
  write("mixed.txt", "The Peace talks began .\nA piece of cake , please .\nNo target here .\n");
  const Result r = run("corrupt --corpus mixed.txt --confusion-sets sets.txt --corrupt-pct 0 --out c");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(slurp(dir_ / "c/corpus.txt"), slurp(dir_ / "mixed.txt"));
  EXPECT_EQ(slurp(dir_ / "c/changes.tsv"), "set\tsentence\tspan_start\tfrom\tto\n");
}

TEST_F(Cli, CorruptIsDeterministic) {
  const std::string args = base + " --corrupt-pct 30 --seed 8";
  ASSERT_EQ(run("corrupt " + args + " --out c1").status, 0);
  ASSERT_EQ(run("corrupt " + args + " --out c2").status, 0);
  EXPECT_EQ(slurp(dir_ / "c1/corpus.txt"), slurp(dir_ / "c2/corpus.txt"));
  EXPECT_EQ(slurp(dir_ / "c1/changes.tsv"), slurp(dir_ / "c2/changes.tsv"));
  EXPECT_NE(slurp(dir_ / "c1/corpus.txt"), slurp(dir_ / "corpus.txt"));
}

TEST_F(Cli, ConfigFileSuppliesDefaultsAndFlagsOverride) {
  write("run.toml",
        "corpus = \"corpus.txt\"\nconfusion-sets = \"sets.txt\"\nsystem = [\"baseline\", "
        "\"bayes\"]\nmode = \"pruned\"\n");
  const Result from_file = run("eval --config run.toml");
  ASSERT_EQ(from_file.status, 0) << from_file.err;
  EXPECT_NE(from_file.out.find("(within, pruned)"), std::string::npos);
  const Result overridden = run("eval --config run.toml --mode unpruned");
  ASSERT_EQ(overridden.status, 0) << overridden.err;
  EXPECT_NE(overridden.out.find("(within, unpruned)"), std::string::npos);
}

TEST_F(Cli, SupUnsupEmitsComparisonAndCurve) {
  std::ofstream(dir_ / "second.txt", std::ios::binary) << slurp(dir_ / "corpus.txt");
  const Result r = run("eval " + base +
                    " --test-corpus second.txt --protocol supunsup --system bayes,winnow "
                    "--corrupt-pct 0,10 --out su");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("McNemar"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "su/comparison.tsv"));
  const std::string curve = slurp(dir_ / "su/curve.tsv");
  EXPECT_EQ(curve.rfind("corrupt_pct\tsystem\tsup_only\tsup_unsup\n", 0), 0u);
}

}  // namespace
