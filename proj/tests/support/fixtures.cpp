#include "fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "cbir/cli.hpp"
#include "httplib.h"

namespace cbir::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "cbir-test-XXXXXX").string();
  if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

RawImage solid_image(std::size_t w, std::size_t h, Rgb color) {
  RawImage img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) img.set(x, y, color);
  }
  return img;
}

RawImage random_image(std::size_t w, std::size_t h, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<std::uint8_t> px(w * h * 3);
  for (auto& b : px) b = static_cast<std::uint8_t>(byte(rng));
  return RawImage(w, h, std::move(px));
}

void write_file(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::vector<std::uint8_t> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_png(const fs::path& p, const RawImage& img) { write_file(p, encode_png(img)); }

std::vector<double> random_distribution(std::size_t bins, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution sparse(0.3);
  std::vector<double> v(bins);
  double sum = 0.0;
  for (auto& x : v) {
    x = sparse(rng) ? 0.0 : expo(rng);
    sum += x;
  }
  if (sum == 0.0) {
    v[0] = 1.0;
    return v;
  }
  for (auto& x : v) x /= sum;
  return v;
}

ColorHistogram random_histogram(const QuantizationScheme& scheme, std::mt19937_64& rng) {
  return {scheme, random_distribution(scheme.bin_count(), rng)};
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

namespace {

RawImage noisy_image(std::size_t side, Rgb base, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> jitter(-12, 12);
  RawImage img(side, side);
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      auto clamp8 = [](int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); };
      img.set(x, y, {clamp8(base.r + jitter(rng)), clamp8(base.g + jitter(rng)), clamp8(base.b + jitter(rng))});
    }
  }
  return img;
}

}  // namespace

void write_fixture_corpus(const fs::path& root) {
  std::mt19937_64 rng(7);
  write_png(root / "beach" / "b1.png", noisy_image(24, {230, 200, 120}, rng));
  write_png(root / "beach" / "b2.png", noisy_image(24, {60, 140, 220}, rng));
  write_png(root / "forest" / "f1.png", noisy_image(24, {30, 110, 40}, rng));
  write_png(root / "forest" / "f2.png", noisy_image(24, {70, 150, 60}, rng));
  write_png(root / "forest" / "f3.png", noisy_image(24, {90, 80, 40}, rng));
}

void write_separable_corpus(const fs::path& root, std::size_t per_class, double crossing_fraction,
                            std::uint64_t seed, std::size_t side) {
  const QuantizationScheme scheme{16, 4, 4};
  // Hue cells 0, 4, 8, 12 (centres at 11.25, 101.25, 191.25, 281.25 degrees),
  // saturation cell 2 and value cell 2.
  constexpr std::size_t kHueCells[] = {0, 4, 8, 12};
  constexpr std::size_t kSat = 2;
  constexpr std::size_t kVal = 2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::bernoulli_distribution crosses(crossing_fraction);

  for (std::size_t c = 0; c < 4; ++c) {
    const std::size_t home = kHueCells[c] * 16 + kSat * 4 + kVal;
    const std::string label = "class" + std::to_string(c);
    for (std::size_t n = 0; n < per_class; ++n) {
      RawImage img(side, side);
      for (std::size_t y = 0; y < side; ++y) {
        for (std::size_t x = 0; x < side; ++x) {
          const bool cross = crosses(rng);
          const std::size_t target = cross ? home + 1 : home;  // next value cell, same hue and saturation
          const HsvColor cell = bin_representative(scheme, target);
          Rgb px{};
          // +-10% of the cell width around the centre; resample until the
          // 8-bit colour quantizes back into the intended cell.
          for (int attempt = 0; attempt < 64; ++attempt) {
            const HsvColor jittered{cell.h + 0.1 * unit(rng) * (kTwoPi / 16.0), cell.s + 0.1 * unit(rng) * 0.25,
                                    cell.v + 0.1 * unit(rng) * 0.25};
            px = hsv_to_rgb(jittered);
            if (quantize_hsv(rgb_to_hsv(px), scheme) == target) break;
            px = hsv_to_rgb(cell);
          }
          img.set(x, y, px);
        }
      }
      char name[32];
      std::snprintf(name, sizeof name, "img%03zu.png", n);
      write_png(root / label / name, img);
    }
  }
}

FeatureStore hand_planted_store() {
  ExtractionConfig config;
  config.scheme = {4, 1, 1};
  config.include_lch = false;
  config.include_texture = false;
  auto entry = [&](const std::string& id, const std::string& label, double t) {
    FeatureVector fv;
    fv.id = id;
    fv.path = id + ".png";
    fv.label = label;
    fv.gch = {config.scheme, {t, 1.0 - t, 0.0, 0.0}};
    return fv;
  };
  return FeatureStore(config, {entry("a1", "A", 0.0), entry("a2", "A", 0.1), entry("a3", "A", 0.5),
                               entry("b1", "B", 0.35), entry("b2", "B", 0.8), entry("b3", "B", 0.9)});
}

FeatureStore random_store(std::size_t n, const ExtractionConfig& config, std::mt19937_64& rng,
                          std::size_t classes) {
  std::vector<FeatureVector> entries;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector fv;
    char id[32];
    std::snprintf(id, sizeof id, "id%04zu", i);
    fv.id = id;
    fv.path = fv.id + ".png";
    fv.label = "c" + std::to_string(i % classes);
    fv.gch = random_histogram(config.scheme, rng);
    if (config.include_lch) {
      LocalColorHistogram lch{config.grid, {}};
      for (std::size_t b = 0; b < config.grid.cells(); ++b) lch.blocks.push_back(random_histogram(config.scheme, rng));
      fv.lch = std::move(lch);
    }
    if (config.include_texture) {
      GrayHistogram g;
      const auto p = random_distribution(kGrayLevels, rng);
      std::copy(p.begin(), p.end(), g.p.begin());
      fv.texture = texture_moments(g);
    }
    entries.push_back(std::move(fv));
  }
  return FeatureStore(config, std::move(entries));
}

CliRun run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"cbir"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cbir::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

TestServer::TestServer(FeatureStore store)
    : service_(std::make_unique<QueryService>(std::move(store))), server_(std::make_unique<httplib::Server>()) {
  service_->mount(*server_);
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("cannot bind a test port");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

TestServer::~TestServer() {
  server_->stop();
  thread_.join();
}

httplib::Client TestServer::client() const { return httplib::Client("127.0.0.1", port_); }

std::vector<std::string> table_ids(const std::string& table) {
  std::vector<std::string> ids;
  std::istringstream in(table);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::istringstream cols(line);
    std::string rank;
    std::string id;
    cols >> rank >> id;
    ids.push_back(id);
  }
  return ids;
}

}  // namespace cbir::testing
