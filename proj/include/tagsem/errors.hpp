#ifndef TAGSEM_ERRORS_HPP
#define TAGSEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tagsem {

// Malformed or inconsistent input data (bad corpus line, truncated
// codebook, version mismatch, ...). CLI maps this to exit code 3.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// The requested configuration cannot produce a result, e.g. a category
// label that is out of vocabulary in every embedding table. Exit code 4.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tagsem

#endif  // TAGSEM_ERRORS_HPP
