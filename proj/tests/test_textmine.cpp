#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "stampede/textmine.hpp"

using namespace stampede;
using namespace stampede::textmine;

namespace {

const std::string kDataDir = STAMPEDE_DATA_DIR;
const std::string kTestDataDir = STAMPEDE_TEST_DATA_DIR;

using Tokens = std::vector<std::string>;

Corpus three_doc_corpus() {
  Corpus c;
  c.documents = {{1, {"unforeseen surge"}}, {2, {"crowd mismanagement surge"}}, {3, {"barricade collapse"}}};
  return c;
}

}  // namespace

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("Barricade collapse, VIP route allocation"),
            (Tokens{"barricade", "collapse", "vip", "route", "allocation"}));
  EXPECT_EQ(tokenize(""), Tokens{});
  EXPECT_EQ(tokenize("unforeseen   SURGE"), (Tokens{"unforeseen", "surge"}));
  EXPECT_EQ(tokenize("\xE2\x80\x9CUnforeseen surge\xE2\x80\x9D"), (Tokens{"unforeseen", "surge"}));
}

TEST(Tokenize, IdempotentOnNormalizedText) {
  const std::string text = "Railway station mismanagement; no alerts -- 2013!";
  const auto once = tokenize(text);
  std::string joined;
  for (const auto& t : once) joined += t + " ";
  EXPECT_EQ(tokenize(joined), once);
}

TEST(Stopwords, Examples) {
  const StopList standard;
  EXPECT_EQ(remove_stopwords({"lack", "of", "exits"}, standard), (Tokens{"lack", "exits"}));
  EXPECT_EQ(remove_stopwords({}, standard), Tokens{});
  EXPECT_EQ(remove_stopwords({"of", "the", "no"}, standard), Tokens{});
}

TEST(Stopwords, ShippedFileMatchesBuiltInList) {
  const auto from_file = StopList::from_file(kDataDir + "/stopwords.txt");
  EXPECT_EQ(from_file.size(), kEnglishStopwords.size());
  for (auto w : kEnglishStopwords) EXPECT_TRUE(from_file.contains(w)) << w;
}

TEST(Porter, PublishedVectors) {
  std::ifstream in(kTestDataDir + "/porter_fixture.tsv");
  ASSERT_TRUE(in);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos);
    const auto word = line.substr(0, tab);
    const auto expected = line.substr(tab + 1);
    EXPECT_EQ(porter_stem(word), expected) << word;
    ++checked;
  }
  EXPECT_GT(checked, 200);
}

TEST(Porter, Examples) {
  EXPECT_EQ(porter_stem("delays"), "delai");
  EXPECT_EQ(porter_stem("surge"), "surg");
  EXPECT_EQ(porter_stem("exit"), "exit");
  EXPECT_EQ(porter_stem("no"), "no");
}

TEST(Stem, IdempotentWhereSinglePassIsNot) {
  EXPECT_EQ(porter_stem("contingency"), "conting");
  EXPECT_EQ(porter_stem("conting"), "cont");
  EXPECT_EQ(stem("contingency"), "cont");
  EXPECT_EQ(stem(stem("contingency")), stem("contingency"));
}

TEST(Stem, IdempotentOverCorpusVocabulary) {
  const auto corpus = load_corpus(kDataDir + "/inquiries.csv");
  Normalizer raw;
  raw.stemming = false;
  for (const auto& w : corpus.vocabulary(raw)) {
    const auto s = stem(w);
    EXPECT_EQ(stem(s), s) << w;
  }
  for (const auto& s : corpus.vocabulary()) EXPECT_EQ(stem(s), s);
}

TEST(Stem, IdempotentOverFixtureWords) {
  std::ifstream in(kTestDataDir + "/porter_fixture.tsv");
  std::string line;
  while (std::getline(in, line)) {
    const auto word = line.substr(0, line.find('\t'));
    EXPECT_EQ(stem(stem(word)), stem(word)) << word;
  }
}

TEST(TfIdf, ThreeDocumentHandExample) {
  const auto model = tfidf(three_doc_corpus());
  // Independent re-derivation: "surge" occurs once in the two-term d1 and in
  // two of three documents.
  const double expected = (1.0 / 2.0) * std::log(3.0 / 2.0);
  EXPECT_NEAR(model.weight(0, stem("surge")), expected, 1e-15);
  EXPECT_NEAR(model.weight(0, stem("surge")), 0.20273, 1e-5);
  EXPECT_EQ(model.doc_freq.at("surg"), 2);
  EXPECT_EQ(model.n_docs, 3);
  EXPECT_EQ(model.weight(2, "surg"), 0.0);
}

TEST(TfIdf, TermInEveryDocumentHasZeroWeight) {
  Corpus c;
  c.documents = {{1, {"crowd surge"}}, {2, {"crowd crush"}}, {3, {"crowd"}}};
  const auto model = tfidf(c);
  for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(model.weight(d, "crowd"), 0.0);
  Corpus single;
  single.documents = {{2025, {"barricade collapse", "VIP route allocation"}}};
  const auto single_model = tfidf(single);
  for (double w : single_model.weights[0]) EXPECT_EQ(w, 0.0);
  EXPECT_THROW(tfidf(Corpus{}), Error);
}

TEST(TfIdf, WeightsNonNegativeAndZeroWhenAbsent) {
  const auto model = tfidf(load_corpus(kDataDir + "/inquiries.csv"));
  for (std::size_t d = 0; d < model.weights.size(); ++d) {
    for (std::size_t t = 0; t < model.vocabulary.size(); ++t) {
      EXPECT_GE(model.weights[d][t], 0.0);
      if (model.counts[d][t] == 0) {
        EXPECT_EQ(model.weights[d][t], 0.0);
      }
    }
  }
  for (const auto& [term, df] : model.doc_freq) {
    EXPECT_GT(df, 0);
    EXPECT_LE(df, model.n_docs);
  }
}

TEST(TfIdf, AddingAllTermDocumentShrinksIdf) {
  auto corpus = load_corpus(kDataDir + "/inquiries.csv");
  const auto before = tfidf(corpus);
  std::string everything;
  for (const auto& t : before.vocabulary) everything += t + " ";
  corpus.documents.push_back({2099, {everything}});
  const auto after = tfidf(corpus);
  for (const auto& t : before.vocabulary) {
    const double a = before.idf(t);
    const double b = after.idf(t);
    if (a == 0.0) {
      EXPECT_EQ(b, 0.0);
    } else {
      EXPECT_LT(b, a) << t;
    }
  }
}

TEST(TopTerms, Examples) {
  const auto model = tfidf(three_doc_corpus());
  const auto top = top_terms(model, 2, 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].first, stem("barricade"));
  EXPECT_EQ(top[1].first, stem("collapse"));
  EXPECT_NEAR(top[0].second, 0.5 * std::log(3.0), 1e-12);
  EXPECT_EQ(top[0].second, top[1].second);

  const auto all = top_terms(model, 0, 100);
  EXPECT_EQ(all.size(), model.vocabulary.size());

  Corpus flat;
  flat.documents = {{1, {"zeta alpha mid"}}};
  const auto zero = top_terms(tfidf(flat), 0, 2);
  EXPECT_EQ(zero[0].first, "alpha");
  EXPECT_EQ(zero[1].first, "mid");
}

TEST(Recurring, BundledTableHasNoCrossYearRepeats) {
  // Each inquiry row uses its own vocabulary: no normalized unigram appears
  // in two different years, so the golden result is empty.
  const auto corpus = load_corpus(kDataDir + "/inquiries.csv");
  EXPECT_TRUE(recurring_phrases(corpus, 1).empty());
  EXPECT_TRUE(recurring_phrases(corpus, 2).empty());
}

TEST(Recurring, Examples) {
  Corpus one;
  one.documents = {{1954, {"unforeseen surge"}}};
  EXPECT_TRUE(recurring_phrases(one, 1).empty());

  Corpus twins;
  twins.documents = {{1954, {"unforeseen surge"}}, {2025, {"unforeseen surge"}}};
  const auto grams = recurring_phrases(twins, 1);
  ASSERT_EQ(grams.size(), 2u);
  for (const auto& g : grams) EXPECT_EQ(g.years, (std::vector<int>{1954, 2025}));
  const auto bigrams = recurring_phrases(twins, 2);
  ASSERT_EQ(bigrams.size(), 1u);
  EXPECT_EQ(bigrams[0].ngram, "unforeseen surg");
}

TEST(Recurring, NgramsDoNotCrossSegments) {
  Corpus c;
  c.documents = {{1, {"crowd", "surge"}}, {2, {"crowd surge"}}};
  EXPECT_TRUE(recurring_phrases(c, 2).empty());
  EXPECT_EQ(recurring_phrases(c, 1).size(), 2u);
}

TEST(Recurring, InvariantUnderDocumentOrder) {
  Corpus c;
  c.documents = {{1954, {"unforeseen surge", "lack of exits"}},
                 {1986, {"crowd became unruly", "medical delays"}},
                 {2003, {"crowd surge", "no exits"}},
                 {2013, {"crowd mismanagement"}},
                 {2025, {"crowd mismanagement", "surge"}}};
  const auto reference = recurring_phrases(c, 1);
  ASSERT_FALSE(reference.empty());
  EXPECT_EQ(reference.front().ngram, "crowd");
  std::mt19937 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(c.documents.begin(), c.documents.end(), rng);
    const auto got = recurring_phrases(c, 1);
    ASSERT_EQ(got.size(), reference.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].ngram, reference[i].ngram);
      EXPECT_EQ(got[i].years, reference[i].years);
    }
  }
}

TEST(Corpus, DirectoryOfYearFiles) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "stampede_corpus_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "2025.txt") << "Barricade collapse\nVIP route allocation\n";
  std::ofstream(dir / "1954.txt") << "Unforeseen surge\n\nlack of exits\n";
  std::ofstream(dir / "notes.md") << "ignored";
  const auto corpus = load_corpus(dir.string());
  ASSERT_EQ(corpus.documents.size(), 2u);
  EXPECT_EQ(corpus.documents[0].year, 1954);
  EXPECT_EQ(corpus.documents[0].segments, (std::vector<std::string>{"Unforeseen surge", "lack of exits"}));
  fs::remove_all(dir);
}
