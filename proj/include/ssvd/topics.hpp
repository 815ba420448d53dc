#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ssvd/decomposition.hpp"

namespace ssvd {

struct TopicWord {
  std::string token;
  double weight = 0.0;
};

struct TopicListing {
  std::size_t index = 0;
  double singular_value = 0.0;
  /// Sorted by |weight| descending, ties by feature index.
  std::vector<TopicWord> words;

  /// `-0.474*"delete" + -0.383*"deletion" + ...`
  std::string format() const;
};

/// The `words` largest-magnitude entries of each of the first `topics`
/// columns of U. Exactly zero weights are skipped. Throws ContractError if
/// the vocabulary size differs from the row count of U.
std::vector<TopicListing> show_topics(const Decomposition& d, const std::vector<std::string>& vocabulary,
                                      std::size_t topics, std::size_t words);

}  // namespace ssvd
