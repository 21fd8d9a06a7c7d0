#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace wfc {

// Lowercased runs of ASCII letters and digits.
std::vector<std::string> tokenize(std::string_view text);

using TermVector = std::map<std::string, double>;

// TF is the raw count; IDF is ln((1 + N) / (1 + df)) + 1 over the corpus,
// so terms unseen in the corpus still get weight ln(1 + N) + 1.
class TfIdfModel {
 public:
  explicit TfIdfModel(const std::vector<std::string>& corpus);

  std::size_t documents() const { return documents_; }
  // term -> column index, in lexicographic term order
  const std::map<std::string, std::size_t>& vocabulary() const { return vocabulary_; }
  double idf(const std::string& term) const;
  TermVector vectorize(std::string_view text) const;

  // Cosine of two vectors; 1 when both are empty, 0 when exactly one is.
  static double cosine(const TermVector& a, const TermVector& b);
  double similarity(std::string_view a, std::string_view b) const { return cosine(vectorize(a), vectorize(b)); }

 private:
  std::size_t documents_ = 0;
  std::map<std::string, std::size_t> vocabulary_;
  std::map<std::string, std::size_t> df_;
};

}  // namespace wfc
