#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbir/feature_store.hpp"
#include "cbir/metrics.hpp"

namespace cbir {

enum class Family : std::size_t { kGch = 0, kLch = 1, kTexture = 2 };
inline constexpr std::size_t kFamilyCount = 3;
inline constexpr std::array<Family, kFamilyCount> kFamilies = {Family::kGch, Family::kLch, Family::kTexture};

std::string_view family_name(Family f);

/// Non-negative weight per family, indexed by Family.
struct FamilyWeights {
  std::array<double, kFamilyCount> w{};

  double& operator[](Family f) noexcept { return w[static_cast<std::size_t>(f)]; }
  double operator[](Family f) const noexcept { return w[static_cast<std::size_t>(f)]; }

  /// Weight 1 for every family the config enables.
  static FamilyWeights defaults_for(const ExtractionConfig& config);
  /// Parses "gch=1,lch=0.5,texture=2"; unspecified families get 0.
  static FamilyWeights parse(std::string_view text);
  std::string to_string() const;
};

struct QuerySpec {
  MetricSpec metric;
  std::size_t k = 10;
  FamilyWeights weights;
};

/// Throws kInvalidArgument for k = 0, negative or non-finite weights, or all
/// weights zero; kMissingFeature when a weighted family is not in the store.
void validate(const QuerySpec& spec, const ExtractionConfig& config);

/// Per-component divisors for texture vectors: the corpus-wide max |value|
/// of each moment (1 where that max is 0).
using TextureScale = std::array<double, TextureMoments::kSize>;
TextureScale texture_scale(const FeatureStore& store);

/// Distance between two feature vectors for one family under `metric`.
/// LCH distances average the metric over positionally matched blocks. The
/// texture family compares moment vectors divided component-wise by `scale`.
/// Similarity-type metrics (intersection) are returned as M - S so smaller
/// is closer. kSchemeMismatch, kMissingFeature.
double feature_distance(const FeatureVector& q, const FeatureVector& t, Family family, const MetricSpec& metric,
                        const TextureScale& scale = TextureScale{1, 1, 1, 1, 1, 1});

struct Normalizer {
  double min = 0.0;
  double max = 0.0;
};

/// sum_f w_f * (d_f - min_f) / (max_f - min_f), with weights rescaled to sum
/// to 1 and a family contributing 0 when max_f == min_f.
double combine_distances(const std::array<double, kFamilyCount>& per_family, const FamilyWeights& weights,
                         const std::array<Normalizer, kFamilyCount>& normalizers);

struct QueryResult {
  std::string id;
  std::optional<std::string> label;
  double total_distance = 0.0;
  /// Raw per-family distances; NaN for families with zero weight.
  std::array<double, kFamilyCount> per_feature{};
};

/// Top-k candidates ordered by total distance, then (on exact ties) the
/// candidate whose id equals q.id, then id ascending. k is capped at the
/// store size. kEmptyStore, kSchemeMismatch, kMissingFeature.
std::vector<QueryResult> rank(const FeatureVector& q, const FeatureStore& store, const QuerySpec& spec,
                              std::size_t threads = 1);

}  // namespace cbir
