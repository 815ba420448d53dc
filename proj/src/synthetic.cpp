#include "ssvd/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "ssvd/errors.hpp"
#include "ssvd/random.hpp"

namespace ssvd {
namespace {

// Independent sub-streams of the spec seed.
constexpr std::uint64_t kSupportStream = 1;
constexpr std::uint64_t kFactorStream = 2;
constexpr std::uint64_t kColumnStream = 3;

}  // namespace

std::size_t SyntheticSpec::effective_rank() const noexcept {
  const std::size_t full = std::min(rows, cols);
  return rank == 0 ? full : std::min(rank, full);
}

double SyntheticSpec::planted_sigma(std::size_t i) const noexcept {
  return scale * std::pow(static_cast<double>(i + 1), -alpha);
}

void SyntheticSpec::validate() const {
  if (rows == 0 || cols == 0) throw ConfigError("synthetic: rows and cols must be positive");
  if (rows > (std::size_t{1} << 31)) throw ConfigError("synthetic: too many rows");
  if (!(factor_density > 0.0 && factor_density <= 1.0)) throw ConfigError("synthetic: factor_density must be in (0, 1]");
  if (!(activation > 0.0 && activation <= 1.0)) throw ConfigError("synthetic: activation must be in (0, 1]");
  if (!(scale > 0.0) || !std::isfinite(alpha)) throw ConfigError("synthetic: scale must be positive, alpha finite");
}

SyntheticStream::SyntheticStream(const SyntheticSpec& spec, std::size_t chunk_size)
    : spec_(spec), chunk_size_(chunk_size) {
  spec_.validate();
  if (chunk_size_ < 1) throw ConfigError("synthetic: chunk_size must be >= 1");
  const std::size_t r = spec_.effective_rank();
  const std::uint64_t support_seed = mix_seed(spec_.seed, kSupportStream);
  const std::uint64_t factor_seed = mix_seed(spec_.seed, kFactorStream);
  offsets_.reserve(r + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t begin = factor_rows_.size();
    for (std::size_t row = 0; row < spec_.rows; ++row) {
      const std::uint64_t t = static_cast<std::uint64_t>(i) * spec_.rows + row;
      if (uniform_at(support_seed, t) < spec_.factor_density) {
        factor_rows_.push_back(static_cast<std::uint32_t>(row));
        factor_values_.push_back(standard_normal_at(factor_seed, t));
      }
    }
    if (factor_rows_.size() == begin) {
      const auto row = mix_seed(support_seed, ~static_cast<std::uint64_t>(i)) % spec_.rows;
      factor_rows_.push_back(static_cast<std::uint32_t>(row));
      factor_values_.push_back(1.0);
    }
    double norm = 0.0;
    for (std::size_t p = begin; p < factor_rows_.size(); ++p) norm += factor_values_[p] * factor_values_[p];
    const double s = spec_.planted_sigma(i) / std::sqrt(norm);
    for (std::size_t p = begin; p < factor_rows_.size(); ++p) factor_values_[p] *= s;
    offsets_.push_back(factor_rows_.size());
  }
}

std::optional<std::size_t> SyntheticStream::chunk_count() const {
  return (spec_.cols + chunk_size_ - 1) / chunk_size_;
}

void SyntheticStream::append_column(SparseChunk& chunk, std::size_t j) const {
  const std::size_t r = offsets_.size() - 1;
  const std::uint64_t col_seed = mix_seed(mix_seed(spec_.seed, kColumnStream), j);
  const double t = spec_.cols > 1 ? static_cast<double>(j) / static_cast<double>(spec_.cols - 1) : 0.5;
  const double weight_scale = 1.0 / std::sqrt(static_cast<double>(spec_.cols) * spec_.activation);
  std::vector<double> dense(spec_.rows, 0.0);
  std::vector<char> touched(spec_.rows, 0);
  for (std::size_t i = 0; i < r; ++i) {
    double p = spec_.activation;
    if (spec_.drift) p = std::min(1.0, 2.0 * spec_.activation * (i % 2 == 0 ? t : 1.0 - t));
    if (!(uniform_at(col_seed, 2 * i) < p)) continue;
    const double g = standard_normal_at(col_seed, 2 * i + 1) * weight_scale;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      dense[factor_rows_[k]] += factor_values_[k] * g;
      touched[factor_rows_[k]] = 1;
    }
  }
  std::vector<std::uint32_t> rows;
  std::vector<double> values;
  for (std::size_t row = 0; row < spec_.rows; ++row) {
    if (touched[row] && dense[row] != 0.0) {
      rows.push_back(static_cast<std::uint32_t>(row));
      values.push_back(dense[row]);
    }
  }
  chunk.append_column(rows, values);
}

std::optional<SparseChunk> SyntheticStream::next() {
  if (pos_ >= spec_.cols) return std::nullopt;
  const std::size_t end = std::min(spec_.cols, pos_ + chunk_size_);
  SparseChunk chunk(spec_.rows);
  for (std::size_t j = pos_; j < end; ++j) append_column(chunk, j);
  pos_ = end;
  return chunk;
}

MemoryChunkStream materialize(const SyntheticSpec& spec, std::size_t chunk_size) {
  SyntheticStream s(spec, chunk_size);
  std::vector<SparseChunk> chunks;
  while (auto c = s.next()) chunks.push_back(std::move(*c));
  return MemoryChunkStream(spec.rows, std::move(chunks));
}

}  // namespace ssvd
