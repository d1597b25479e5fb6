#include "cbir/query.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cbir/error.hpp"
#include "parallel.hpp"

namespace cbir {

namespace {

constexpr std::array<std::string_view, kFamilyCount> kFamilyNames = {"gch", "lch", "texture"};

bool family_enabled(Family f, const ExtractionConfig& config) {
  switch (f) {
    case Family::kGch: return true;
    case Family::kLch: return config.include_lch;
    case Family::kTexture: return config.include_texture;
  }
  return false;
}

// How a vector is binarized for hamming: histograms at 1/M, texture
// vectors at their own component mean.
enum class BitRule { kUniformOccupancy, kComponentMean };

BitSignature to_bits(std::span<const double> v, BitRule rule) {
  if (rule == BitRule::kUniformOccupancy) return binarize(v, 1.0 / static_cast<double>(v.size()));
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return binarize(v, mean);
}

// `metric` must already be resolved. `A` is the similarity matrix for the
// quadratic kind.
double vector_distance(std::span<const double> a, std::span<const double> b, const MetricSpec& metric,
                       const SimilarityMatrix& A, BitRule rule) {
  switch (metric.kind) {
    case MetricKind::kMinkowski: return minkowski(a, b, *metric.order);
    case MetricKind::kL1: return manhattan(a, b);
    case MetricKind::kIntersection: return static_cast<double>(a.size()) - intersection(a, b);
    case MetricKind::kQuadratic: return quadratic_distance(a, b, A);
    case MetricKind::kChebyshev: return chebyshev(a, b);
    case MetricKind::kBrayCurtis: return bray_curtis(a, b);
    case MetricKind::kHamming: return hamming(to_bits(a, rule), to_bits(b, rule));
    case MetricKind::kManhattan:
    case MetricKind::kEuclidean: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "metric was not resolved");
}

void require_same_scheme(const ColorHistogram& a, const ColorHistogram& b) {
  if (!(a.scheme == b.scheme) || a.values.size() != b.values.size()) {
    throw Error(ErrorCode::kSchemeMismatch, "feature vectors use different quantization schemes");
  }
}

std::shared_ptr<const SimilarityMatrix> matrix_for(const MetricSpec& metric, const QuantizationScheme& scheme) {
  if (metric.kind != MetricKind::kQuadratic) return nullptr;
  return cached_similarity_matrix(scheme);
}

const SimilarityMatrix& texture_matrix() {
  static const SimilarityMatrix identity = SimilarityMatrix::identity(TextureMoments::kSize);
  return identity;
}

const SimilarityMatrix& unused_matrix() {
  static const SimilarityMatrix empty(0, {});
  return empty;
}

}  // namespace

std::string_view family_name(Family f) { return kFamilyNames[static_cast<std::size_t>(f)]; }

FamilyWeights FamilyWeights::defaults_for(const ExtractionConfig& config) {
  FamilyWeights w;
  for (const Family f : kFamilies) w[f] = family_enabled(f, config) ? 1.0 : 0.0;
  return w;
}

FamilyWeights FamilyWeights::parse(std::string_view text) {
  FamilyWeights w;
  std::array<bool, kFamilyCount> seen{};
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) {
      if (comma == text.size()) break;
      continue;
    }
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument, "weight '" + std::string(item) + "' is not of the form family=value");
    }
    const std::string_view name = item.substr(0, eq);
    const std::string value(item.substr(eq + 1));
    const auto it = std::find(kFamilyNames.begin(), kFamilyNames.end(), name);
    if (it == kFamilyNames.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown feature family '" + std::string(name) + "'");
    }
    const auto idx = static_cast<std::size_t>(it - kFamilyNames.begin());
    if (seen[idx]) throw Error(ErrorCode::kInvalidArgument, "weight for '" + std::string(name) + "' given twice");
    seen[idx] = true;
    std::size_t used = 0;
    double parsed = 0.0;
    try {
      parsed = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw Error(ErrorCode::kInvalidArgument, "weight for '" + std::string(name) + "' is not a number");
    }
    w.w[idx] = parsed;
  }
  return w;
}

std::string FamilyWeights::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < kFamilyCount; ++i) {
    if (i) out << ',';
    out << kFamilyNames[i] << '=' << w[i];
  }
  return out.str();
}

void validate(const QuerySpec& spec, const ExtractionConfig& config) {
  if (spec.k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  bool any = false;
  for (const Family f : kFamilies) {
    const double w = spec.weights[f];
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "weight for " + std::string(family_name(f)) + " must be >= 0");
    }
    if (w > 0.0) {
      any = true;
      if (!family_enabled(f, config)) {
        throw Error(ErrorCode::kMissingFeature,
                    "feature family " + std::string(family_name(f)) + " is weighted but not in the store");
      }
    }
  }
  if (!any) throw Error(ErrorCode::kInvalidArgument, "at least one family weight must be positive");
  const MetricSpec resolved = spec.metric.resolve();
  if (resolved.kind == MetricKind::kMinkowski && (!resolved.order || !(*resolved.order >= 1.0))) {
    throw Error(ErrorCode::kInvalidOrder, "minkowski requires an order >= 1");
  }
}

TextureScale texture_scale(const FeatureStore& store) {
  TextureScale scale{};
  for (const auto& fv : store.entries()) {
    if (!fv.texture) continue;
    const auto v = fv.texture->as_array();
    for (std::size_t i = 0; i < v.size(); ++i) scale[i] = std::max(scale[i], std::abs(v[i]));
  }
  for (double& s : scale) {
    if (s == 0.0) s = 1.0;
  }
  return scale;
}

double feature_distance(const FeatureVector& q, const FeatureVector& t, Family family, const MetricSpec& metric,
                        const TextureScale& scale) {
  const MetricSpec m = metric.resolve();
  switch (family) {
    case Family::kGch: {
      if (q.gch.values.empty() || t.gch.values.empty()) {
        throw Error(ErrorCode::kMissingFeature, "feature vector has no global histogram");
      }
      require_same_scheme(q.gch, t.gch);
      const auto A = matrix_for(m, q.gch.scheme);
      return vector_distance(q.gch.values, t.gch.values, m, A ? *A : unused_matrix(), BitRule::kUniformOccupancy);
    }
    case Family::kLch: {
      if (!q.lch || !t.lch) throw Error(ErrorCode::kMissingFeature, "feature vector has no local histograms");
      if (!(q.lch->grid == t.lch->grid) || q.lch->blocks.size() != t.lch->blocks.size() ||
          q.lch->blocks.empty()) {
        throw Error(ErrorCode::kSchemeMismatch, "local histograms use different grids");
      }
      const std::size_t n = q.lch->blocks.size();
      const auto A = matrix_for(m, q.lch->blocks.front().scheme);
      double sum = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        require_same_scheme(q.lch->blocks[b], t.lch->blocks[b]);
        sum += vector_distance(q.lch->blocks[b].values, t.lch->blocks[b].values, m, A ? *A : unused_matrix(),
                               BitRule::kUniformOccupancy);
      }
      return sum / static_cast<double>(n);
    }
    case Family::kTexture: {
      if (!q.texture || !t.texture) throw Error(ErrorCode::kMissingFeature, "feature vector has no texture moments");
      auto a = q.texture->as_array();
      auto b = t.texture->as_array();
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] /= scale[i];
        b[i] /= scale[i];
      }
      return vector_distance(a, b, m, texture_matrix(), BitRule::kComponentMean);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown feature family");
}

double combine_distances(const std::array<double, kFamilyCount>& per_family, const FamilyWeights& weights,
                         const std::array<Normalizer, kFamilyCount>& normalizers) {
  const double weight_sum = std::accumulate(weights.w.begin(), weights.w.end(), 0.0);
  if (!(weight_sum > 0.0)) return 0.0;
  double total = 0.0;
  for (std::size_t f = 0; f < kFamilyCount; ++f) {
    const double w = weights.w[f];
    if (w == 0.0) continue;
    const double span = normalizers[f].max - normalizers[f].min;
    if (!(span > 0.0)) continue;
    total += (w / weight_sum) * ((per_family[f] - normalizers[f].min) / span);
  }
  return total;
}

std::vector<QueryResult> rank(const FeatureVector& q, const FeatureStore& store, const QuerySpec& spec,
                              std::size_t threads) {
  if (store.size() == 0) throw Error(ErrorCode::kEmptyStore, "store has no entries");
  validate(spec, store.config());
  const auto& config = store.config();
  if (!(q.gch.scheme == config.scheme)) {
    throw Error(ErrorCode::kSchemeMismatch, "query was extracted with a different quantization scheme");
  }
  if (spec.weights[Family::kLch] > 0.0 && q.lch && !(q.lch->grid == config.grid)) {
    throw Error(ErrorCode::kSchemeMismatch, "query was extracted with a different LCH grid");
  }

  const TextureScale scale = spec.weights[Family::kTexture] > 0.0 ? texture_scale(store) : TextureScale{1, 1, 1, 1, 1, 1};
  const auto& entries = store.entries();
  const std::size_t n = entries.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<QueryResult> results(n);
  detail::parallel_for(n, threads, [&](std::size_t i) {
    QueryResult& r = results[i];
    r.id = entries[i].id;
    r.label = entries[i].label;
    for (const Family f : kFamilies) {
      r.per_feature[static_cast<std::size_t>(f)] =
          spec.weights[f] > 0.0 ? feature_distance(q, entries[i], f, spec.metric, scale) : nan;
    }
  });

  std::array<Normalizer, kFamilyCount> norms{};
  for (const Family f : kFamilies) {
    if (spec.weights[f] == 0.0) continue;
    const auto idx = static_cast<std::size_t>(f);
    auto [lo, hi] = std::minmax_element(results.begin(), results.end(), [idx](const auto& a, const auto& b) {
      return a.per_feature[idx] < b.per_feature[idx];
    });
    norms[idx] = {lo->per_feature[idx], hi->per_feature[idx]};
  }
  for (auto& r : results) r.total_distance = combine_distances(r.per_feature, spec.weights, norms);

  const auto before = [&q](const QueryResult& a, const QueryResult& b) {
    if (a.total_distance != b.total_distance) return a.total_distance < b.total_distance;
    const bool a_self = a.id == q.id;
    const bool b_self = b.id == q.id;
    if (a_self != b_self) return a_self;
    return a.id < b.id;
  };
  const std::size_t k = std::min(spec.k, n);
  std::partial_sort(results.begin(), results.begin() + static_cast<std::ptrdiff_t>(k), results.end(), before);
  results.resize(k);
  return results;
}

}  // namespace cbir
