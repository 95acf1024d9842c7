// End-to-end checks of the command-line front end: exit-code classes,
// deterministic machine-readable outputs, and the train/predict round trip.

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

#ifndef COHERE_CLI_PATH
#error "COHERE_CLI_PATH must be defined"
#endif

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string out_file = testing::TempDir() + "/cli_run_output.txt";
  const std::string cmd = std::string(COHERE_CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult result;
  result.code = WEXITSTATUS(raw);
  std::ifstream in(out_file);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  return result;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

class CliEnv : public ::testing::Environment {
 public:
  void SetUp() override {
    root = testing::TempDir() + "/cohere_cli_test";
    fs::remove_all(root);
    fs::create_directories(root);
    const auto synth = run("synth --out " + root + "/data --seed 20180101 --embedding-dim 16");
    ASSERT_EQ(synth.code, 0) << synth.output;
    std::ofstream conf(root + "/run.conf");
    conf << "[corpus]\n";
    for (const char* d : {"Yahoo", "Clinton", "Enron", "Yelp"}) {
      std::string lower = d;
      for (auto& c : lower) c = static_cast<char>(std::tolower(c));
      conf << lower << "_train = " << root << "/data/" << d << "_train.csv\n";
      conf << lower << "_test = " << root << "/data/" << d << "_test.csv\n";
    }
    conf << "[embeddings]\npath = " << root << "/data/embeddings.txt\ndim = 16\n";
    conf << "[model]\nmodel = majority\n";
    conf << "[task]\ntask = classify3\nlabels = expert\nseeds = 1\nmaster_seed = 20180101\n";
    conf << "[output]\ndir = " << root << "/out\n";
  }
  static std::string root;
};

std::string CliEnv::root;

const auto* const env = ::testing::AddGlobalTestEnvironment(new CliEnv);

TEST(Cli, SynthDeterministic) {
  const std::string& root = CliEnv::root;
  ASSERT_EQ(run("synth --out " + root + "/data2 --seed 20180101 --embedding-dim 16").code, 0);
  EXPECT_EQ(slurp(root + "/data/Enron_test.csv"), slurp(root + "/data2/Enron_test.csv"));
  EXPECT_EQ(slurp(root + "/data/embeddings.txt"), slurp(root + "/data2/embeddings.txt"));
}

TEST(Cli, ValidateOk) {
  const auto result = run("corpus validate --config " + CliEnv::root + "/run.conf");
  EXPECT_EQ(result.code, 0) << result.output;
  EXPECT_NE(result.output.find("corpus valid"), std::string::npos);
}

TEST(Cli, ValidateCorruptedExitsWithDataCode) {
  const std::string& root = CliEnv::root;
  // corrupt a rating in a copy of the corpus
  fs::create_directories(root + "/bad");
  std::ofstream bad(root + "/bad/Yahoo_train.csv");
  bad << "text_id,text,expert1,expert2,expert3,crowd1,crowd2,crowd3,crowd4,crowd5\n";
  bad << "x1,Fine text here.,1,2,7,1,1,2,2,3\n";
  bad.close();
  std::ofstream conf(root + "/bad.conf");
  conf << "[corpus]\nyahoo_train = " << root << "/bad/Yahoo_train.csv\nyahoo_test = " << root
       << "/data/Yahoo_test.csv\n[task]\ndomains = yahoo\n";
  conf.close();
  const auto result = run("corpus validate --config " + root + "/bad.conf");
  EXPECT_EQ(result.code, 3);
  EXPECT_NE(result.output.find("x1"), std::string::npos);
}

TEST(Cli, MissingConfigKeyExitsWithConfigCode) {
  const std::string& root = CliEnv::root;
  std::ofstream conf(root + "/broken.conf");
  conf << "[model]\nmodel = majority\nLSTM dim = 100\n";
  conf.close();
  const auto result = run("evaluate --config " + root + "/broken.conf");
  EXPECT_EQ(result.code, 2);
  EXPECT_NE(result.output.find("not valid for model"), std::string::npos);
}

TEST(Cli, StatsReproducesClassPercentages) {
  const std::string& root = CliEnv::root;
  const auto result = run("corpus stats --config " + root + "/run.conf --domain yahoo");
  ASSERT_EQ(result.code, 0) << result.output;
  const std::string stats = slurp(root + "/out/corpus_stats.tsv");
  EXPECT_NE(stats.find("46.6"), std::string::npos);
  EXPECT_NE(stats.find("# cohere-report v1"), std::string::npos);
}

TEST(Cli, EvaluateMajorityByteIdentical) {
  const std::string& root = CliEnv::root;
  ASSERT_EQ(run("evaluate --config " + root + "/run.conf --domain yahoo").code, 0);
  const std::string first = slurp(root + "/out/classify3/Yahoo/majority/report.tsv");
  ASSERT_EQ(run("evaluate --config " + root + "/run.conf --domain yahoo").code, 0);
  EXPECT_EQ(first, slurp(root + "/out/classify3/Yahoo/majority/report.tsv"));
  EXPECT_NE(first.find("0.410000"), std::string::npos);
}

TEST(Cli, PermuteByteIdentical) {
  const std::string& root = CliEnv::root;
  ASSERT_EQ(run("corpus permute --config " + root + "/run.conf --domain enron").code, 0);
  const std::string first = slurp(root + "/out/permutations_Enron.tsv");
  ASSERT_EQ(run("corpus permute --config " + root + "/run.conf --domain enron").code, 0);
  EXPECT_EQ(first, slurp(root + "/out/permutations_Enron.tsv"));
  EXPECT_GT(first.size(), 1000u);
}

TEST(Cli, TrainPredictRoundTrip) {
  const std::string& root = CliEnv::root;
  std::ofstream conf(root + "/baseline.conf");
  conf << "[corpus]\nyahoo_train = " << root << "/data/Yahoo_train.csv\nyahoo_test = " << root
       << "/data/Yahoo_test.csv\n";
  conf << "[model]\nmodel = baseline\nthreshold1 = 6.5\nthreshold2 = 7.0\n";
  conf << "[task]\ntask = classify3\ndomains = yahoo\nmaster_seed = 20180101\n";
  conf << "[output]\ndir = " << root << "/out\n";
  conf.close();
  ASSERT_EQ(run("train --config " + root + "/baseline.conf").code, 0);
  const std::string ckpt = root + "/out/classify3/Yahoo/baseline/model.ckpt";
  ASSERT_TRUE(fs::exists(ckpt));
  // fixed thresholds from the config land in the checkpoint verbatim
  const std::string saved = slurp(ckpt);
  EXPECT_NE(saved.find("thresholds 6.5 7 "), std::string::npos) << saved.substr(0, 400);

  std::ofstream sample1(root + "/sample1.txt");
  sample1 << "First, Marisol checked the trellis with Tobias. Then, Tobias updated the compost with "
             "Lena. Next, Lena reviewed the garden with Marisol.";
  sample1.close();
  std::ofstream sample2(root + "/sample2.txt");
  sample2 << "Anyway, Oscar noted the forum with Petra. Hugo covered the sauce with Dario, whatever.";
  sample2.close();
  const auto result = run("predict --checkpoint " + ckpt + " --flag-low " + root + "/sample1.txt " +
                          root + "/sample2.txt");
  ASSERT_EQ(result.code, 0) << result.output;
  // one row per input document plus version + header
  int rows = 0;
  std::istringstream lines(result.output);
  std::string line;
  while (std::getline(lines, line))
    if (line.find("sample") != std::string::npos) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST(Cli, PredictEmptyInputFails) {
  const std::string& root = CliEnv::root;
  std::ofstream empty(root + "/empty.txt");
  empty.close();
  const std::string ckpt = root + "/out/classify3/Yahoo/baseline/model.ckpt";
  const auto result = run("predict --checkpoint " + ckpt + " " + root + "/empty.txt");
  EXPECT_EQ(result.code, 3);
}

TEST(Cli, FeatureDumpSparseFormat) {
  const std::string& root = CliEnv::root;
  std::ofstream conf(root + "/egrid.conf");
  conf << "[corpus]\nyahoo_train = " << root << "/data/Yahoo_train.csv\nyahoo_test = " << root
       << "/data/Yahoo_test.csv\n";
  conf << "[model]\nmodel = egrid\nsequence length = 2\n";
  conf << "[task]\ndomains = yahoo\n";
  conf << "[output]\ndir = " << root << "/out\n";
  conf.close();
  const auto result = run("features --config " + root + "/egrid.conf");
  ASSERT_EQ(result.code, 0) << result.output;
  const std::string dump = slurp(root + "/out/features_egrid_Yahoo.txt");
  EXPECT_NE(dump.find("Yahoo_train_0000 "), std::string::npos);
  EXPECT_NE(dump.find(':'), std::string::npos);
}

TEST(Cli, SearchRecordsFoldScores) {
  const std::string& root = CliEnv::root;
  std::ofstream conf(root + "/egraph.conf");
  conf << "[corpus]\nyahoo_train = " << root << "/data/Yahoo_train.csv\nyahoo_test = " << root
       << "/data/Yahoo_test.csv\n";
  conf << "[model]\nmodel = egraph\n";
  conf << "[task]\ntask = classify3\ndomains = yahoo\nmaster_seed = 20180101\n";
  conf << "[output]\ndir = " << root << "/out\n";
  conf.close();
  const auto result = run("train --config " + root + "/egraph.conf --search");
  ASSERT_EQ(result.code, 0) << result.output;
  const std::string log = slurp(root + "/out/classify3/Yahoo/egraph/train_log.tsv");
  EXPECT_NE(log.find("grid_point\tfold\tscore"), std::string::npos);
  EXPECT_NE(log.find("best_grid_point"), std::string::npos);
}

TEST(Cli, AgreementRuns) {
  const std::string& root = CliEnv::root;
  const auto result =
      run("agreement --config " + root + "/run.conf --domain yahoo --repeats 100");
  ASSERT_EQ(result.code, 0) << result.output;
  EXPECT_NE(result.output.find("ICC"), std::string::npos);
  EXPECT_TRUE(fs::exists(root + "/out/agreement_Yahoo_expert.tsv"));
}

TEST(Cli, CrossDomainMatrixSixteenCells) {
  const std::string& root = CliEnv::root;
  const auto result = run("evaluate --config " + root + "/run.conf --cross-domain --out " + root +
                          "/out_xd");
  ASSERT_EQ(result.code, 0) << result.output;
  int cells = 0;
  for (const char* test_d : {"Yahoo", "Clinton", "Enron", "Yelp"}) {
    for (const char* train_d : {"Yahoo", "Clinton", "Enron", "Yelp"}) {
      const std::string file = std::string(train_d) == test_d
                                   ? std::string("report.tsv")
                                   : "report_from_" + std::string(train_d) + ".tsv";
      if (fs::exists(root + "/out_xd/classify3/" + test_d + "/majority/" + file)) ++cells;
    }
  }
  EXPECT_EQ(cells, 16);
  int table_rows = 0;
  std::istringstream lines(result.output);
  std::string line;
  while (std::getline(lines, line))
    if (line.rfind("majority", 0) == 0) ++table_rows;
  EXPECT_EQ(table_rows, 16);
}

TEST(Cli, SignificanceOverReports) {
  const std::string& root = CliEnv::root;
  const std::string report = root + "/out/classify3/Yahoo/majority/report.tsv";
  ASSERT_TRUE(fs::exists(report));
  const auto result = run("significance " + report + " --mu 0.4 --out " + root + "/out/sig.tsv");
  ASSERT_EQ(result.code, 0) << result.output;
  const std::string sig = slurp(root + "/out/sig.tsv");
  EXPECT_NE(sig.find("p_adjusted"), std::string::npos);
}

}  // namespace
