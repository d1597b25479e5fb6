#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cbir/features.hpp"

namespace cbir {

inline constexpr int kStoreVersion = 1;

/// Immutable set of feature vectors extracted under one config, ordered by id.
class FeatureStore {
 public:
  /// Validates every entry against `config` (families present, histogram
  /// normalization, texture ranges) and id uniqueness. kMalformedRecord.
  FeatureStore(ExtractionConfig config, std::vector<FeatureVector> entries);

  const ExtractionConfig& config() const noexcept { return config_; }
  const std::vector<FeatureVector>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  int version() const noexcept { return kStoreVersion; }

  /// nullptr when absent.
  const FeatureVector* find(const std::string& id) const;

  friend bool operator==(const FeatureStore&, const FeatureStore&) = default;

 private:
  ExtractionConfig config_;
  std::vector<FeatureVector> entries_;
};

/// Throws kMalformedRecord unless the vector carries exactly the families the
/// config enables with matching scheme/grid and valid ranges.
void validate_entry(const FeatureVector& fv, const ExtractionConfig& config);

struct IngestResult {
  FeatureStore store;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Scans root for .png/.jpg/.jpeg/.bmp files. Files under root/<label>/ take
/// that label; files directly under root are unlabeled. Undecodable files are
/// skipped and counted. `threads` = 0 picks hardware concurrency.
/// kEmptyCorpus, kIoError.
IngestResult ingest_directory(const std::filesystem::path& root, const ExtractionConfig& config,
                              std::size_t threads = 0);

/// Line-delimited JSON: a header object, then one object per entry.
void write_store(const FeatureStore& store, std::ostream& out);
FeatureStore read_store(std::istream& in);

/// The header object written as the first line of a store file.
std::string store_header_json(const FeatureStore& store);

void save_store(const FeatureStore& store, const std::filesystem::path& path);
FeatureStore load_store(const std::filesystem::path& path);

}  // namespace cbir
