#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cbir/feature_store.hpp"
#include "cbir/query.hpp"

namespace httplib {
class Server;
}

namespace cbir {

/// One query as received over HTTP: exactly one of `upload` / `image_id`.
struct ApiQueryRequest {
  std::optional<std::vector<std::uint8_t>> upload;
  std::optional<std::string> image_id;
  std::string metric = "l1";
  std::optional<double> mk;
  std::size_t k = 10;
  std::optional<FamilyWeights> weights;
};

/// Builds the query vector and spec for a request. Uploaded images are
/// extracted with the store's own config. kInvalidArgument when the request
/// is inconsistent, kNotFound for an unknown image id.
struct PreparedQuery {
  FeatureVector query;
  QuerySpec spec;
};
PreparedQuery prepare_query(const FeatureStore& store, const ApiQueryRequest& request);

struct ServiceOptions {
  std::optional<std::filesystem::path> assets;
  std::size_t thumb_side = 128;
};

/// HTTP front end over an immutable store. Thread-safe: the thumbnail cache
/// is the only mutable state.
class QueryService {
 public:
  QueryService(FeatureStore store, ServiceOptions options = {});

  const FeatureStore& store() const noexcept { return store_; }

  /// Installs the /api routes (and the static asset mount) on `server`.
  void mount(httplib::Server& server);

  /// JSON body of POST /api/query.
  std::string query_json(const ApiQueryRequest& request) const;
  std::string corpus_json(std::size_t offset, std::size_t limit) const;
  std::string config_json() const;
  /// PNG bytes, at most thumb_side on the longest edge. Cached per id.
  std::shared_ptr<const std::vector<std::uint8_t>> thumbnail_png(const std::string& id);

 private:
  FeatureStore store_;
  ServiceOptions options_;
  std::mutex thumb_mutex_;
  std::unordered_map<std::string, std::shared_ptr<const std::vector<std::uint8_t>>> thumbs_;
};

}  // namespace cbir
