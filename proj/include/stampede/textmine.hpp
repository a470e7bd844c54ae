#pragma once

// Inquiry-report mining: tokenize -> drop stopwords -> stem, then TF-IDF
// weights, per-document dominant terms and n-grams that recur across years.
//
//   tf(d, t)  = count(t in d) / len(d)        (len after normalization)
//   idf(t)    = ln(n_docs / doc_freq(t))      (no smoothing)
//   w(d, t)   = tf(d, t) * idf(t)

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stampede/csv.hpp"
#include "stampede/dataset.hpp"
#include "stampede/error.hpp"
#include "stampede/porter.hpp"
#include "stampede/stopwords.hpp"

namespace stampede::textmine {

/// Lowercases ASCII letters and splits on every non-alphanumeric byte.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (uc < 128 && std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

class StopList {
 public:
  StopList() {
    for (auto w : kEnglishStopwords) words_.emplace(w);
  }
  explicit StopList(std::vector<std::string> words) : words_(words.begin(), words.end()) {}

  /// One word per line; blank lines and lines starting with '#' are skipped.
  static StopList from_file(const std::string& path) {
    std::istringstream in(csv::read_file(path));
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
      const auto w = csv::trim(line);
      if (w.empty() || w.front() == '#') continue;
      std::string lower(w);
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      words.push_back(std::move(lower));
    }
    return StopList(std::move(words));
  }

  static StopList none() { return StopList(std::vector<std::string>{}); }

  bool contains(std::string_view w) const { return words_.count(std::string(w)) != 0; }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

inline std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens, const StopList& stoplist) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stoplist.contains(t)) out.push_back(t);
  }
  return out;
}

struct Normalizer {
  StopList stoplist;
  bool stemming = true;

  std::vector<std::string> operator()(std::string_view text) const {
    auto tokens = remove_stopwords(tokenize(text), stoplist);
    if (stemming) {
      for (auto& t : tokens) t = stem(t);
    }
    return tokens;
  }
};

/// One document per year. Segments are the units n-grams may not cross: key
/// phrases for the inquiry table, lines for plain-text reports.
struct Document {
  int year = 0;
  std::vector<std::string> segments;

  std::string text() const {
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (i) out.push_back(' ');
      out += segments[i];
    }
    return out;
  }
};

struct Corpus {
  std::vector<Document> documents;

  /// Sorted, deduplicated normalized terms across all documents.
  std::vector<std::string> vocabulary(const Normalizer& norm = {}) const {
    std::set<std::string> terms;
    for (const auto& d : documents) {
      for (const auto& t : norm(d.text())) terms.insert(t);
    }
    return {terms.begin(), terms.end()};
  }
};

inline void check_unique_years(const Corpus& corpus) {
  std::set<int> years;
  for (const auto& d : corpus.documents) {
    if (!years.insert(d.year).second) {
      throw Error(ErrorKind::DuplicateYear, "corpus: year " + std::to_string(d.year) + " appears twice");
    }
  }
}

inline Corpus corpus_from_inquiries(const std::vector<dataset::InquiryRecord>& records) {
  Corpus corpus;
  for (const auto& r : records) corpus.documents.push_back({r.year, r.key_phrases});
  check_unique_years(corpus);
  return corpus;
}

/// Reads either an inquiries CSV or a directory of `YEAR.txt` files.
inline Corpus load_corpus(const std::string& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw Error(ErrorKind::FileNotFound, "corpus not found: " + path);
  if (!fs::is_directory(path)) return corpus_from_inquiries(dataset::load_inquiries(path).records);

  std::vector<std::pair<int, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    const auto year = csv::parse_integer<int>(entry.path().stem().string());
    if (!year) continue;
    files.emplace_back(*year, entry.path());
  }
  std::sort(files.begin(), files.end());
  Corpus corpus;
  for (const auto& [year, file] : files) {
    Document doc{year, {}};
    std::istringstream in(csv::read_file(file.string()));
    std::string line;
    while (std::getline(in, line)) {
      const auto trimmed = csv::trim(line);
      if (!trimmed.empty()) doc.segments.emplace_back(trimmed);
    }
    corpus.documents.push_back(std::move(doc));
  }
  check_unique_years(corpus);
  return corpus;
}

struct TfIdfModel {
  int n_docs = 0;
  std::vector<int> years;                 // row labels
  std::vector<std::string> vocabulary;    // column labels, sorted
  std::map<std::string, int> doc_freq;
  std::vector<std::vector<int>> counts;   // document x term
  std::vector<std::vector<double>> weights;

  /// Column of `term`, or -1 when it is outside the vocabulary.
  long term_index(std::string_view term) const {
    const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), term);
    if (it == vocabulary.end() || *it != term) return -1;
    return it - vocabulary.begin();
  }

  double weight(std::size_t doc, std::string_view term) const {
    const long t = term_index(term);
    return t < 0 ? 0.0 : weights.at(doc)[static_cast<std::size_t>(t)];
  }

  double idf(std::string_view term) const {
    const auto it = doc_freq.find(std::string(term));
    if (it == doc_freq.end()) return 0.0;
    return std::log(static_cast<double>(n_docs) / it->second);
  }
};

inline TfIdfModel tfidf(const Corpus& corpus, const Normalizer& norm = {}) {
  if (corpus.documents.empty()) throw Error(ErrorKind::EmptyCorpus, "tfidf: corpus has no documents");
  check_unique_years(corpus);

  std::vector<std::vector<std::string>> docs;
  std::set<std::string> terms;
  for (const auto& d : corpus.documents) {
    docs.push_back(norm(d.text()));
    terms.insert(docs.back().begin(), docs.back().end());
  }

  TfIdfModel model;
  model.n_docs = static_cast<int>(docs.size());
  model.vocabulary.assign(terms.begin(), terms.end());
  const std::size_t v = model.vocabulary.size();
  model.counts.assign(docs.size(), std::vector<int>(v, 0));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    model.years.push_back(corpus.documents[d].year);
    for (const auto& t : docs[d]) ++model.counts[d][static_cast<std::size_t>(model.term_index(t))];
  }
  std::vector<double> idf(v, 0.0);
  for (std::size_t t = 0; t < v; ++t) {
    int df = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) df += model.counts[d][t] > 0 ? 1 : 0;
    model.doc_freq[model.vocabulary[t]] = df;
    idf[t] = std::log(static_cast<double>(model.n_docs) / df);
  }
  model.weights.assign(docs.size(), std::vector<double>(v, 0.0));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].empty()) continue;
    const double len = static_cast<double>(docs[d].size());
    for (std::size_t t = 0; t < v; ++t) {
      if (model.counts[d][t] > 0) model.weights[d][t] = (model.counts[d][t] / len) * idf[t];
    }
  }
  return model;
}

/// The k highest-weight terms of document `doc`; ties go to the
/// lexicographically smaller term.
inline std::vector<std::pair<std::string, double>> top_terms(const TfIdfModel& model, std::size_t doc, std::size_t k) {
  if (k < 1) throw Error(ErrorKind::InvalidConfig, "top_terms: k must be >= 1");
  if (doc >= model.weights.size()) throw Error(ErrorKind::DimensionMismatch, "top_terms: no such document");
  std::vector<std::pair<std::string, double>> ranked;
  ranked.reserve(model.vocabulary.size());
  for (std::size_t t = 0; t < model.vocabulary.size(); ++t) ranked.emplace_back(model.vocabulary[t], model.weights[doc][t]);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

struct RecurringPhrase {
  std::string ngram;       // normalized tokens joined by single spaces
  std::vector<int> years;  // ascending
};

/// Normalized n-grams (within a segment) that occur in at least two
/// documents, most widespread first, then lexicographic.
inline std::vector<RecurringPhrase> recurring_phrases(const Corpus& corpus, std::size_t n, const Normalizer& norm = {}) {
  if (n < 1) throw Error(ErrorKind::InvalidConfig, "recurring_phrases: n must be >= 1");
  std::map<std::string, std::set<int>> seen;
  for (const auto& doc : corpus.documents) {
    for (const auto& segment : doc.segments) {
      const auto tokens = norm(segment);
      for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (std::size_t j = 1; j < n; ++j) gram += " " + tokens[i + j];
        seen[gram].insert(doc.year);
      }
    }
  }
  std::vector<RecurringPhrase> out;
  for (const auto& [gram, years] : seen) {
    if (years.size() >= 2) out.push_back({gram, {years.begin(), years.end()}});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.years.size() != b.years.size()) return a.years.size() > b.years.size();
    return a.ngram < b.ngram;
  });
  return out;
}

}  // namespace stampede::textmine
