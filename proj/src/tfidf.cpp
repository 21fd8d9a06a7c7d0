#include "wfc/tfidf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace wfc {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 128 && std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TfIdfModel::TfIdfModel(const std::vector<std::string>& corpus) : documents_(corpus.size()) {
  for (const auto& doc : corpus) {
    auto tokens = tokenize(doc);
    for (const auto& t : std::set<std::string>(tokens.begin(), tokens.end())) ++df_[t];
  }
  std::size_t i = 0;
  for (const auto& [term, _] : df_) vocabulary_[term] = i++;
}

double TfIdfModel::idf(const std::string& term) const {
  auto it = df_.find(term);
  const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(documents_)) / (1.0 + df)) + 1.0;
}

TermVector TfIdfModel::vectorize(std::string_view text) const {
  TermVector counts;
  for (const auto& t : tokenize(text)) counts[t] += 1.0;
  for (auto& [term, weight] : counts) weight *= idf(term);
  return counts;
}

double TfIdfModel::cosine(const TermVector& a, const TermVector& b) {
  if (a == b) return 1.0;  // includes both empty
  if (a.empty() || b.empty()) return 0.0;
  // Walk both maps in term order so the sum is the same whichever side is first.
  double dot = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) ++ia;
    else if (ib->first < ia->first) ++ib;
    else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  auto norm = [](const TermVector& v) {
    double s = 0.0;
    for (const auto& [_, w] : v) s += w * w;
    return std::sqrt(s);
  };
  const double na = norm(a), nb = norm(b);
  return std::min(1.0, dot / (na * nb));
}

}  // namespace wfc
