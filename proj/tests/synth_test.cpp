#include "cohere/synth.hpp"

#include <gtest/gtest.h>

#include "cohere/agreement.hpp"
#include "cohere/textproc.hpp"

using namespace cohere;

namespace {

constexpr std::uint64_t kSeed = 20180101;

TEST(SynthCorpus, SizesAndDeterminism) {
  const auto train = synth::generate_domain(Domain::Yahoo, Split::Train, kSeed);
  const auto test = synth::generate_domain(Domain::Yahoo, Split::Test, kSeed);
  EXPECT_EQ(train.size(), 1000u);
  EXPECT_EQ(test.size(), 200u);
  const auto again = synth::generate_domain(Domain::Yahoo, Split::Train, kSeed);
  ASSERT_EQ(train.size(), again.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    EXPECT_EQ(train[i].body, again[i].body);
    EXPECT_EQ(train[i].expert_ratings, again[i].expert_ratings);
    EXPECT_EQ(train[i].crowd_ratings, again[i].crowd_ratings);
  }
}

TEST(SynthCorpus, TrainClassDistributions) {
  struct Row {
    Domain domain;
    double low, med, high;        // expert %
    double clow, cmed, chigh;     // crowd %
  };
  // Yahoo/Clinton expert medium cells are corpus-consistent remainders; the
  // printed table rows for those domains do not sum to 100.0.
  const std::vector<Row> rows = {
      {Domain::Yahoo, 46.6, 16.4, 37.0, 35.5, 39.2, 25.3},
      {Domain::Clinton, 28.2, 20.7, 51.1, 36.7, 38.6, 24.7},
      {Domain::Enron, 29.9, 19.4, 50.7, 34.9, 44.2, 20.9},
      {Domain::Yelp, 27.1, 21.8, 51.1, 19.9, 43.4, 36.7},
  };
  for (const auto& row : rows) {
    const auto train = synth::generate_domain(row.domain, Split::Train, kSeed);
    const auto expert = class_distribution(train, RaterSource::Expert);
    EXPECT_DOUBLE_EQ(expert.pct(Coherence::Low), row.low) << domain_name(row.domain);
    EXPECT_DOUBLE_EQ(expert.pct(Coherence::Medium), row.med) << domain_name(row.domain);
    EXPECT_DOUBLE_EQ(expert.pct(Coherence::High), row.high) << domain_name(row.domain);
    const auto crowd = class_distribution(train, RaterSource::Crowd);
    EXPECT_DOUBLE_EQ(crowd.pct(Coherence::Low), row.clow) << domain_name(row.domain);
    EXPECT_DOUBLE_EQ(crowd.pct(Coherence::Medium), row.cmed) << domain_name(row.domain);
    EXPECT_DOUBLE_EQ(crowd.pct(Coherence::High), row.chigh) << domain_name(row.domain);
  }
}

TEST(SynthCorpus, MajorityTestAccuracies) {
  const std::vector<std::pair<Domain, double>> expected = {{Domain::Yahoo, 41.0},
                                                           {Domain::Clinton, 55.5},
                                                           {Domain::Enron, 44.0},
                                                           {Domain::Yelp, 54.0}};
  for (const auto& [domain, acc] : expected) {
    const auto train = synth::generate_domain(domain, Split::Train, kSeed);
    const auto test = synth::generate_domain(domain, Split::Test, kSeed);
    const auto train_stats = class_distribution(train, RaterSource::Expert);
    int majority = 0;
    for (int c = 1; c < 3; ++c)
      if (train_stats.counts[c] > train_stats.counts[majority]) majority = c;
    const auto test_stats = class_distribution(test, RaterSource::Expert);
    EXPECT_DOUBLE_EQ(100.0 * test_stats.counts[majority] / test_stats.total, acc)
        << domain_name(domain);
  }
}

TEST(SynthCorpus, OrderingSubsetCounts) {
  const std::vector<std::tuple<Domain, int, int>> expected = {{Domain::Yahoo, 370, 76},
                                                              {Domain::Clinton, 511, 111},
                                                              {Domain::Enron, 507, 88},
                                                              {Domain::Yelp, 511, 108}};
  for (const auto& [domain, train_high, test_high] : expected) {
    const auto train = synth::generate_domain(domain, Split::Train, kSeed);
    const auto test = synth::generate_domain(domain, Split::Test, kSeed);
    EXPECT_EQ(static_cast<int>(ordering_subset(train).size()), train_high) << domain_name(domain);
    EXPECT_EQ(static_cast<int>(ordering_subset(test).size()), test_high) << domain_name(domain);
  }
}

TEST(SynthCorpus, MinorityRates) {
  const std::vector<std::pair<Domain, int>> expected = {{Domain::Yahoo, 300},
                                                        {Domain::Clinton, 166},
                                                        {Domain::Enron, 184},
                                                        {Domain::Yelp, 148}};
  for (const auto& [domain, count] : expected) {
    const auto train = synth::generate_domain(domain, Split::Train, kSeed);
    int low = 0;
    for (const auto& r : train)
      if (minority_relabel(r.expert_ratings) == MinorityLabel::Low) ++low;
    EXPECT_EQ(low, count) << domain_name(domain);
  }
}

TEST(SynthCorpus, AgreementWindows) {
  const std::vector<std::tuple<Domain, double, double>> expected = {
      {Domain::Yahoo, 0.557, 0.386},
      {Domain::Clinton, 0.398, 0.250},
      {Domain::Enron, 0.428, 0.273},
      {Domain::Yelp, 0.304, 0.181}};
  for (const auto& [domain, icc_target, kappa_target] : expected) {
    auto records = synth::generate_domain(domain, Split::Train, kSeed);
    const auto test = synth::generate_domain(domain, Split::Test, kSeed);
    records.insert(records.end(), test.begin(), test.end());
    std::vector<std::vector<int>> ratings;
    for (const auto& r : records) ratings.push_back(r.expert_ratings);
    const auto report = simulate_agreement(ratings, 200, 99);
    EXPECT_NEAR(report.icc_mean, icc_target, 0.05) << domain_name(domain);
    EXPECT_NEAR(report.kappa_mean, kappa_target, 0.05) << domain_name(domain);
  }
}

TEST(SynthCorpus, BodiesPassSelectionFilterAndSegment) {
  for (Domain domain : {Domain::Yahoo, Domain::Clinton, Domain::Enron, Domain::Yelp}) {
    const auto test = synth::generate_domain(domain, Split::Test, kSeed);
    for (const auto& r : test) {
      EXPECT_TRUE(selection_filter(r.body)) << r.text_id << " words=" << whitespace_word_count(r.body);
      const auto doc = segment(r.body, r.text_id);
      EXPECT_GE(doc.n_sentences(), 4) << r.text_id;
      const Coherence cls = consensus_label(r.expert_ratings).value;
      if (cls == Coherence::High) {
        EXPECT_EQ(doc.n_paragraphs(), 3) << r.text_id;
      }
    }
  }
}

TEST(SynthCorpus, CsvRoundTrip) {
  const auto records = synth::generate_domain(Domain::Clinton, Split::Test, kSeed);
  const std::string path = testing::TempDir() + "/synth_clinton_test.csv";
  synth::write_corpus_csv(records, path);
  const auto loaded = load_corpus(path, ColumnMap{}, Domain::Clinton, Split::Test);
  ASSERT_EQ(loaded.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(loaded[i].text_id, records[i].text_id);
    EXPECT_EQ(loaded[i].body, records[i].body);
    EXPECT_EQ(loaded[i].expert_ratings, records[i].expert_ratings);
    EXPECT_EQ(loaded[i].crowd_ratings, records[i].crowd_ratings);
  }
}

TEST(SynthEmbeddings, TopicClusteringAndFile) {
  const auto table = synth::synth_embedding_table(16, kSeed);
  // same-topic words similar, cross-topic words not
  const double same = cosine_similarity(table.lookup("garden"), table.lookup("tomatoes"));
  const double cross = cosine_similarity(table.lookup("garden"), table.lookup("invoice"));
  EXPECT_GT(same, 0.5);
  EXPECT_LT(cross, 0.5);

  const std::string path = testing::TempDir() + "/synth_embed.txt";
  synth::write_synth_embeddings(path, 16, kSeed);
  const auto loaded = load_embeddings_file(path, 16);
  EXPECT_EQ(loaded.size(), table.size());
  EXPECT_NEAR(cosine_similarity(loaded.lookup("garden"), loaded.lookup("tomatoes")), same, 1e-6);
}

}  // namespace
