#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbir/color_histogram.hpp"
#include "cbir/features.hpp"

namespace cbir {

enum class MetricKind {
  kMinkowski,
  kL1,
  kEuclidean,
  kIntersection,
  kQuadratic,
  kChebyshev,
  kBrayCurtis,
  kManhattan,
  kHamming,
};

/// A metric choice. `order` is the Minkowski exponent and is only meaningful
/// for kMinkowski; use resolve() to fold manhattan/euclidean into that family.
struct MetricSpec {
  MetricKind kind = MetricKind::kL1;
  std::optional<double> order;

  /// Parses a metric name (minkowski, l1, euclidean, intersection, quadratic,
  /// chebyshev, bray_curtis, manhattan, hamming). kInvalidArgument on an
  /// unknown name, kInvalidOrder when minkowski lacks an order >= 1.
  static MetricSpec parse(std::string_view name, std::optional<double> order = std::nullopt);

  /// manhattan -> minkowski(1), euclidean -> minkowski(2); others unchanged.
  MetricSpec resolve() const;

  friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

std::string_view metric_name(MetricKind kind);
const std::vector<std::string_view>& metric_names();

// Vector forms -------------------------------------------------------------

/// (sum |a_i - b_i|^k)^(1/k). kLengthMismatch, kInvalidOrder for k < 1.
double minkowski(std::span<const double> a, std::span<const double> b, double k);
double manhattan(std::span<const double> a, std::span<const double> b);
double chebyshev(std::span<const double> a, std::span<const double> b);

/// sum |a_i - b_i| / sum |a_i + b_i|; in [0, 1] for non-negative inputs.
/// kZeroDenominator when the denominator vanishes.
double bray_curtis(std::span<const double> a, std::span<const double> b);

/// sum_m (1 - |a_m - b_m|); larger means more similar.
double intersection(std::span<const double> a, std::span<const double> b);

// Histogram forms (scheme-checked) ------------------------------------------

double l1_histogram(const ColorHistogram& hq, const ColorHistogram& ht);
double euclidean_histogram(const ColorHistogram& hq, const ColorHistogram& ht);
/// Equals M - l1_histogram(hq, ht).
double intersection_similarity(const ColorHistogram& hq, const ColorHistogram& ht);

// Quadratic form ------------------------------------------------------------

/// Symmetric bin-to-bin colour similarity, row-major m x m.
class SimilarityMatrix {
 public:
  SimilarityMatrix(std::size_t m, std::vector<double> entries);

  static SimilarityMatrix identity(std::size_t m);

  std::size_t size() const noexcept { return m_; }
  double at(std::size_t i, std::size_t j) const noexcept { return a_[i * m_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {a_.data() + i * m_, m_}; }
  std::span<const double> entries() const noexcept { return a_; }

 private:
  std::size_t m_;
  std::vector<double> a_;
};

/// 1 - ||(v, s cos h, s sin h)_q - (v, s cos h, s sin h)_i|| / sqrt(5).
double color_similarity(const HsvColor& q, const HsvColor& i) noexcept;

SimilarityMatrix build_similarity_matrix(const QuantizationScheme& scheme);

/// Built once per scheme and shared read-only afterwards. Concurrent first
/// use blocks on a single builder.
std::shared_ptr<const SimilarityMatrix> cached_similarity_matrix(const QuantizationScheme& scheme);

/// (a - b)^T A (a - b), reported raw (not clamped). kDimensionMismatch.
double quadratic_distance(std::span<const double> a, std::span<const double> b, const SimilarityMatrix& A);
double quadratic_distance(const ColorHistogram& hq, const ColorHistogram& ht, const SimilarityMatrix& A);

// Hamming -------------------------------------------------------------------

/// Packed bit vector.
class BitSignature {
 public:
  BitSignature() = default;
  explicit BitSignature(std::size_t n);
  /// From a string of '0'/'1' characters, leftmost character is bit 0.
  static BitSignature from_string(std::string_view bits);

  std::size_t size() const noexcept { return n_; }
  bool test(std::size_t i) const noexcept { return (words_[i / 64] >> (i % 64)) & 1U; }
  void set(std::size_t i, bool value = true) noexcept;
  std::size_t count() const noexcept;
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  BitSignature complement() const;

  friend bool operator==(const BitSignature&, const BitSignature&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// (1/N) sum x_j XOR y_j. kLengthMismatch, kInvalidArgument for empty signatures.
double hamming(const BitSignature& x, const BitSignature& y);

/// Bit i set iff values[i] > threshold.
BitSignature binarize(std::span<const double> values, double threshold);
/// One bit per bin, set iff the bin frequency exceeds 1/M.
BitSignature binarize_histogram(const ColorHistogram& h);
/// binarize_histogram over the feature vector's GCH. kMissingFeature if the
/// vector carries no GCH.
BitSignature binarize_features(const FeatureVector& f);

}  // namespace cbir
