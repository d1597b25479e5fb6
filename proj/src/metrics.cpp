#include "cbir/metrics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "cbir/error.hpp"

namespace cbir {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "vector lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

void check_schemes(const ColorHistogram& hq, const ColorHistogram& ht) {
  if (!(hq.scheme == ht.scheme) || hq.values.size() != ht.values.size()) {
    throw Error(ErrorCode::kSchemeMismatch, "histograms use different quantization schemes");
  }
}

double sum_abs_diff(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

constexpr std::array<std::string_view, 9> kNames = {
    "minkowski", "l1", "euclidean", "intersection", "quadratic", "chebyshev", "bray_curtis", "manhattan", "hamming",
};

}  // namespace

std::string_view metric_name(MetricKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

const std::vector<std::string_view>& metric_names() {
  static const std::vector<std::string_view> names(kNames.begin(), kNames.end());
  return names;
}

MetricSpec MetricSpec::parse(std::string_view name, std::optional<double> order) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] != name) continue;
    MetricSpec spec{static_cast<MetricKind>(i), std::nullopt};
    if (spec.kind == MetricKind::kMinkowski) {
      if (!order) throw Error(ErrorCode::kInvalidOrder, "minkowski requires an order");
      if (!(*order >= 1.0) || !std::isfinite(*order)) {
        throw Error(ErrorCode::kInvalidOrder, "minkowski order must be finite and >= 1");
      }
      spec.order = order;
    }
    return spec;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(name) + "'");
}

MetricSpec MetricSpec::resolve() const {
  switch (kind) {
    case MetricKind::kManhattan: return {MetricKind::kMinkowski, 1.0};
    case MetricKind::kEuclidean: return {MetricKind::kMinkowski, 2.0};
    default: return *this;
  }
}

double minkowski(std::span<const double> a, std::span<const double> b, double k) {
  check_lengths(a, b);
  if (!(k >= 1.0)) throw Error(ErrorCode::kInvalidOrder, "minkowski order must be >= 1");
  if (k == 1.0) return sum_abs_diff(a, b);
  if (k == 2.0) return std::sqrt(sum_sq_diff(a, b));
  // Scaling by the largest gap keeps every term in [0, 1], so large orders
  // neither overflow nor underflow and the result never drops below max|d|.
  double largest = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) largest = std::max(largest, std::abs(a[i] - b[i]));
  if (largest == 0.0) return 0.0;
  if (std::isinf(k)) return largest;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::pow(std::abs(a[i] - b[i]) / largest, k);
  return largest * std::pow(sum, 1.0 / k);
}

double manhattan(std::span<const double> a, std::span<const double> b) { return minkowski(a, b, 1.0); }

double chebyshev(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  double largest = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) largest = std::max(largest, std::abs(a[i] - b[i]));
  return largest;
}

double bray_curtis(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::abs(a[i] - b[i]);
    den += std::abs(a[i] + b[i]);
  }
  if (den == 0.0) throw Error(ErrorCode::kZeroDenominator, "bray-curtis undefined for all-zero vectors");
  return num / den;
}

// sum (1 - |a_i - b_i|) evaluated as M - sum |a_i - b_i| so that S + L1 == M
// holds in floating point, not just algebraically.
double intersection(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  return static_cast<double>(a.size()) - sum_abs_diff(a, b);
}

double l1_histogram(const ColorHistogram& hq, const ColorHistogram& ht) {
  check_schemes(hq, ht);
  return sum_abs_diff(hq.values, ht.values);
}

double euclidean_histogram(const ColorHistogram& hq, const ColorHistogram& ht) {
  check_schemes(hq, ht);
  return std::sqrt(sum_sq_diff(hq.values, ht.values));
}

double intersection_similarity(const ColorHistogram& hq, const ColorHistogram& ht) {
  check_schemes(hq, ht);
  return intersection(hq.values, ht.values);
}

// ---------------------------------------------------------------------------

SimilarityMatrix::SimilarityMatrix(std::size_t m, std::vector<double> entries) : m_(m), a_(std::move(entries)) {
  if (a_.size() != m * m) throw Error(ErrorCode::kDimensionMismatch, "similarity matrix must be m x m");
}

SimilarityMatrix SimilarityMatrix::identity(std::size_t m) {
  std::vector<double> a(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) a[i * m + i] = 1.0;
  return SimilarityMatrix(m, std::move(a));
}

double color_similarity(const HsvColor& q, const HsvColor& i) noexcept {
  const double dv = q.v - i.v;
  const double dx = q.s * std::cos(q.h) - i.s * std::cos(i.h);
  const double dy = q.s * std::sin(q.h) - i.s * std::sin(i.h);
  return 1.0 - std::sqrt(dv * dv + dx * dx + dy * dy) / std::sqrt(5.0);
}

SimilarityMatrix build_similarity_matrix(const QuantizationScheme& scheme) {
  validate(scheme);
  const std::size_t m = scheme.bin_count();
  std::vector<HsvColor> reps(m);
  for (std::size_t i = 0; i < m; ++i) reps[i] = bin_representative(scheme, i);
  std::vector<double> a(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    a[i * m + i] = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      const double s = color_similarity(reps[i], reps[j]);
      a[i * m + j] = s;
      a[j * m + i] = s;
    }
  }
  return SimilarityMatrix(m, std::move(a));
}

std::shared_ptr<const SimilarityMatrix> cached_similarity_matrix(const QuantizationScheme& scheme) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const SimilarityMatrix>> cache;
  const Key key{scheme.h_bins, scheme.s_bins, scheme.v_bins};
  std::lock_guard lock(mutex);
  auto& slot = cache[key];
  if (!slot) slot = std::make_shared<const SimilarityMatrix>(build_similarity_matrix(scheme));
  return slot;
}

double quadratic_distance(std::span<const double> a, std::span<const double> b, const SimilarityMatrix& A) {
  if (a.size() != b.size() || a.size() != A.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "quadratic form operands do not match the matrix size");
  }
  const std::size_t m = a.size();
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i) d[i] = a[i] - b[i];
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (d[i] == 0.0) continue;
    const auto row = A.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += row[j] * d[j];
    total += d[i] * acc;
  }
  return total;
}

double quadratic_distance(const ColorHistogram& hq, const ColorHistogram& ht, const SimilarityMatrix& A) {
  return quadratic_distance(hq.values, ht.values, A);
}

// ---------------------------------------------------------------------------

BitSignature::BitSignature(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

BitSignature BitSignature::from_string(std::string_view bits) {
  BitSignature sig(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      sig.set(i);
    } else if (bits[i] != '0') {
      throw Error(ErrorCode::kInvalidArgument, "bit string may only contain '0' and '1'");
    }
  }
  return sig;
}

void BitSignature::set(std::size_t i, bool value) noexcept {
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (value) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

std::size_t BitSignature::count() const noexcept {
  std::size_t total = 0;
  for (const auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

BitSignature BitSignature::complement() const {
  BitSignature out(n_);
  for (std::size_t i = 0; i < n_; ++i) out.set(i, !test(i));
  return out;
}

double hamming(const BitSignature& x, const BitSignature& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "signature lengths differ: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (x.size() == 0) throw Error(ErrorCode::kInvalidArgument, "hamming distance needs at least one bit");
  std::size_t differing = 0;
  const auto xw = x.words();
  const auto yw = y.words();
  for (std::size_t i = 0; i < xw.size(); ++i) differing += static_cast<std::size_t>(std::popcount(xw[i] ^ yw[i]));
  return static_cast<double>(differing) / static_cast<double>(x.size());
}

BitSignature binarize(std::span<const double> values, double threshold) {
  BitSignature sig(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > threshold) sig.set(i);
  }
  return sig;
}

BitSignature binarize_histogram(const ColorHistogram& h) {
  return binarize(h.values, 1.0 / static_cast<double>(h.values.size()));
}

BitSignature binarize_features(const FeatureVector& f) {
  if (f.gch.values.empty()) throw Error(ErrorCode::kMissingFeature, "feature vector has no global histogram");
  return binarize_histogram(f.gch);
}

}  // namespace cbir
