#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "cbir/color_histogram.hpp"
#include "cbir/feature_store.hpp"
#include "cbir/image.hpp"
#include "cbir/service.hpp"
#include "httplib.h"

namespace cbir::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

RawImage solid_image(std::size_t w, std::size_t h, Rgb color);
RawImage random_image(std::size_t w, std::size_t h, std::mt19937_64& rng);

void write_file(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& p);
void write_png(const std::filesystem::path& p, const RawImage& img);

/// Random point on the probability simplex with `bins` entries.
std::vector<double> random_distribution(std::size_t bins, std::mt19937_64& rng);
ColorHistogram random_histogram(const QuantizationScheme& scheme, std::mt19937_64& rng);
std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0);

/// root/beach/{b1,b2}.png and root/forest/{f1,f2,f3}.png; colour-dominant
/// images with per-image noise so no two are identical.
void write_fixture_corpus(const std::filesystem::path& root);

/// 4 classes x `per_class` images, each class a distinct hue cell of the
/// (16,4,4) scheme. `crossing_fraction` of pixels are pushed into a
/// neighbouring value bin; the remainder stay inside the class cell.
void write_separable_corpus(const std::filesystem::path& root, std::size_t per_class, double crossing_fraction,
                            std::uint64_t seed, std::size_t side = 48);

/// Two classes (A: a1 a2 a3, B: b1 b2 b3) planted on a one-parameter family
/// of 4-bin histograms (t, 1 - t, 0, 0) under scheme (4,1,1).
FeatureStore hand_planted_store();

/// Report for hand_planted_store() under GCH + L1 with x = 3, worked by hand:
/// a1/a2 retrieve {self, other a, b1}; a3 retrieves {a3, b1, b2}; b1
/// retrieves {b1, a3, a2}; b2/b3 retrieve {self, other b, a3}. a3 and b1 have
/// 4 mismatches > x, so their scores clamp to 0.
inline constexpr const char* kHandPlantedCsv =
    "query_id,class,precision,recall,score\n"
    "a1,A,0.666667,0.666667,33.333333\n"
    "a2,A,0.666667,0.666667,33.333333\n"
    "a3,A,0.333333,0.333333,0.000000\n"
    "b1,B,0.333333,0.333333,0.000000\n"
    "b2,B,0.666667,0.666667,33.333333\n"
    "b3,B,0.666667,0.666667,33.333333\n"
    "CLASS,A,0.555556,0.555556,22.222222\n"
    "CLASS,B,0.555556,0.555556,22.222222\n"
    "MACRO,,0.555556,0.555556,22.222222\n";

/// `n` entries with random histograms and texture moments under `config`;
/// ids are id0000.., labels cycle through `classes` names.
FeatureStore random_store(std::size_t n, const ExtractionConfig& config, std::mt19937_64& rng,
                          std::size_t classes = 3);

struct CliRun {
  int code;
  std::string out;
  std::string err;
};
CliRun run_cli(const std::vector<std::string>& args);

/// QueryService listening on an ephemeral localhost port for the lifetime
/// of the object.
class TestServer {
 public:
  explicit TestServer(FeatureStore store);
  ~TestServer();
  TestServer(const TestServer&) = delete;
  TestServer& operator=(const TestServer&) = delete;

  int port() const noexcept { return port_; }
  httplib::Client client() const;

 private:
  std::unique_ptr<QueryService> service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

/// The id column of a `cbir query` result table.
std::vector<std::string> table_ids(const std::string& table);

}  // namespace cbir::testing
