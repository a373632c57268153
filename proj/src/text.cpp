#include "phenokg/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace phenokg {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::set<std::string> token_set(const std::string& text) {
    auto toks = tokenize(text);
    return {toks.begin(), toks.end()};
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    size_t inter = 0;
    for (const auto& t : a)
        if (b.count(t)) ++inter;
    size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double edit_similarity(const std::string& a_raw, const std::string& b_raw) {
    std::string a = a_raw, b = b_raw;
    std::transform(a.begin(), a.end(), a.begin(), [](unsigned char c) { return std::tolower(c); });
    std::transform(b.begin(), b.end(), b.begin(), [](unsigned char c) { return std::tolower(c); });
    if (a.empty() && b.empty()) return 1.0;
    const size_t n = a.size(), m = b.size();
    std::vector<size_t> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = j;
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= m; ++j) {
            size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    double dist = static_cast<double>(prev[m]);
    return 1.0 - dist / static_cast<double>(std::max(n, m));
}

TfIdf TfIdf::fit(const std::vector<std::string>& corpus) {
    TfIdf t;
    t.n_docs_ = corpus.size();
    for (const auto& doc : corpus) {
        for (const auto& term : token_set(doc)) ++t.doc_freq_[term];
    }
    return t;
}

double TfIdf::idf(const std::string& term) const {
    auto it = doc_freq_.find(term);
    size_t df = it == doc_freq_.end() ? 0 : it->second;
    return std::log(static_cast<double>(1 + n_docs_) / static_cast<double>(1 + df)) + 1.0;
}

std::map<std::string, double> TfIdf::vectorize(const std::string& text) const {
    std::map<std::string, size_t> tf;
    for (const auto& tok : tokenize(text)) ++tf[tok];
    std::map<std::string, double> vec;
    for (const auto& [term, count] : tf)
        vec[term] = static_cast<double>(count) * idf(term);
    return vec;
}

double TfIdf::cosine(const std::string& a, const std::string& b) const {
    auto va = vectorize(a);
    auto vb = vectorize(b);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [term, w] : va) {
        na += w * w;
        auto it = vb.find(term);
        if (it != vb.end()) dot += w * it->second;
    }
    for (const auto& [term, w] : vb) nb += w * w;
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, 0.0, 1.0);
}

}  // namespace phenokg
