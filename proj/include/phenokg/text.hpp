#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace phenokg {

// Lowercased alphanumeric tokens; everything else is a separator.
std::vector<std::string> tokenize(const std::string& text);
std::set<std::string> token_set(const std::string& text);

// |A intersect B| / |A union B|; 0 when the union is empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// 1 - levenshtein / max_len on lowercased input; 1.0 for two empty strings.
double edit_similarity(const std::string& a, const std::string& b);

// TF-IDF over a fixed corpus with smoothed idf = ln((1+N)/(1+df)) + 1.
// Cosine of the resulting non-negative vectors lands in [0, 1].
class TfIdf {
  public:
    static TfIdf fit(const std::vector<std::string>& corpus);

    std::map<std::string, double> vectorize(const std::string& text) const;
    double cosine(const std::string& a, const std::string& b) const;

    size_t corpus_size() const { return n_docs_; }

  private:
    double idf(const std::string& term) const;

    std::map<std::string, size_t> doc_freq_;
    size_t n_docs_ = 0;
};

}  // namespace phenokg
