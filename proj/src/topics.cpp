#include "ssvd/topics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ssvd/errors.hpp"

namespace ssvd {

std::string TopicListing::format() const {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += " + ";
    std::snprintf(buf, sizeof buf, "%.3f", words[i].weight);
    out += buf;
    out += "*\"" + words[i].token + "\"";
  }
  return out;
}

std::vector<TopicListing> show_topics(const Decomposition& d, const std::vector<std::string>& vocabulary,
                                      std::size_t topics, std::size_t words) {
  if (vocabulary.size() != d.U.rows())
    throw ContractError("show_topics: vocabulary has " + std::to_string(vocabulary.size()) +
                        " entries but the decomposition has " + std::to_string(d.U.rows()) + " features");
  const std::size_t count = std::min(topics, d.U.cols());
  std::vector<TopicListing> out;
  out.reserve(count);
  std::vector<std::size_t> order(d.U.rows());
  for (std::size_t t = 0; t < count; ++t) {
    const auto col = d.U.col(t);
    order.clear();
    for (std::size_t i = 0; i < col.size(); ++i)
      if (col[i] != 0.0) order.push_back(i);
    const std::size_t take = std::min(words, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double wa = std::abs(col[a]), wb = std::abs(col[b]);
                        return wa != wb ? wa > wb : a < b;
                      });
    TopicListing listing;
    listing.index = t;
    listing.singular_value = t < d.S.size() ? d.S[t] : 0.0;
    for (std::size_t i = 0; i < take; ++i) listing.words.push_back({vocabulary[order[i]], col[order[i]]});
    out.push_back(std::move(listing));
  }
  return out;
}

}  // namespace ssvd
