#include "cbir/feature_store.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"

#include "cbir/error.hpp"
#include "parallel.hpp"

namespace cbir {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kMassTolerance = 1e-9;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::kMalformedRecord, what); }

void check_histogram(const ColorHistogram& h, const QuantizationScheme& scheme, const std::string& where) {
  if (!(h.scheme == scheme)) malformed(where + ": scheme differs from store config");
  if (h.values.size() != scheme.bin_count()) {
    malformed(where + ": expected " + std::to_string(scheme.bin_count()) + " bins, got " +
              std::to_string(h.values.size()));
  }
  double sum = 0.0;
  for (const double v : h.values) {
    if (!std::isfinite(v) || v < 0.0) malformed(where + ": bin values must be finite and non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kMassTolerance) malformed(where + ": histogram mass " + std::to_string(sum) + " != 1");
}

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

json config_to_json(const ExtractionConfig& c) {
  return {
      {"scheme", {{"h_bins", c.scheme.h_bins}, {"s_bins", c.scheme.s_bins}, {"v_bins", c.scheme.v_bins}}},
      {"grid", {{"rows", c.grid.rows}, {"cols", c.grid.cols}}},
      {"include_lch", c.include_lch},
      {"include_texture", c.include_texture},
  };
}

ExtractionConfig config_from_json(const json& j) {
  ExtractionConfig c;
  const auto& s = j.at("scheme");
  c.scheme = {s.at("h_bins").get<std::size_t>(), s.at("s_bins").get<std::size_t>(), s.at("v_bins").get<std::size_t>()};
  const auto& g = j.at("grid");
  c.grid = {g.at("rows").get<std::size_t>(), g.at("cols").get<std::size_t>()};
  c.include_lch = j.at("include_lch").get<bool>();
  c.include_texture = j.at("include_texture").get<bool>();
  return c;
}

json entry_to_json(const FeatureVector& fv) {
  json j;
  j["id"] = fv.id;
  j["path"] = fv.path;
  j["label"] = fv.label ? json(*fv.label) : json(nullptr);
  j["gch"] = fv.gch.values;
  if (fv.lch) {
    json blocks = json::array();
    for (const auto& b : fv.lch->blocks) blocks.push_back(b.values);
    j["lch"] = std::move(blocks);
  }
  if (fv.texture) {
    const auto& t = *fv.texture;
    j["texture"] = {{"mean", t.mean},
                    {"sigma", t.sigma},
                    {"smoothness", t.smoothness},
                    {"third_moment", t.third_moment},
                    {"uniformity", t.uniformity},
                    {"entropy", t.entropy}};
  }
  return j;
}

FeatureVector entry_from_json(const json& j, const ExtractionConfig& config) {
  FeatureVector fv;
  fv.id = j.at("id").get<std::string>();
  fv.path = j.at("path").get<std::string>();
  if (const auto& label = j.at("label"); !label.is_null()) fv.label = label.get<std::string>();
  fv.gch = {config.scheme, j.at("gch").get<std::vector<double>>()};
  if (const auto it = j.find("lch"); it != j.end()) {
    LocalColorHistogram lch{config.grid, {}};
    for (const auto& block : *it) lch.blocks.push_back({config.scheme, block.get<std::vector<double>>()});
    fv.lch = std::move(lch);
  }
  if (const auto it = j.find("texture"); it != j.end()) {
    const auto& t = *it;
    fv.texture = TextureMoments{t.at("mean").get<double>(),         t.at("sigma").get<double>(),
                                t.at("smoothness").get<double>(),   t.at("third_moment").get<double>(),
                                t.at("uniformity").get<double>(),   t.at("entropy").get<double>()};
  }
  return fv;
}

}  // namespace

void validate_entry(const FeatureVector& fv, const ExtractionConfig& config) {
  const std::string where = "entry '" + fv.id + "'";
  if (fv.id.empty()) malformed("entry with empty id");
  check_histogram(fv.gch, config.scheme, where + " gch");
  if (config.include_lch != fv.lch.has_value()) {
    malformed(where + (config.include_lch ? ": missing lch" : ": unexpected lch"));
  }
  if (fv.lch) {
    if (!(fv.lch->grid == config.grid)) malformed(where + ": lch grid differs from store config");
    if (fv.lch->blocks.size() != config.grid.cells()) {
      malformed(where + ": expected " + std::to_string(config.grid.cells()) + " lch blocks");
    }
    for (std::size_t b = 0; b < fv.lch->blocks.size(); ++b) {
      check_histogram(fv.lch->blocks[b], config.scheme, where + " lch block " + std::to_string(b));
    }
  }
  if (config.include_texture != fv.texture.has_value()) {
    malformed(where + (config.include_texture ? ": missing texture" : ": unexpected texture"));
  }
  if (fv.texture && !moments_valid(*fv.texture)) malformed(where + ": texture moments out of range");
}

FeatureStore::FeatureStore(ExtractionConfig config, std::vector<FeatureVector> entries)
    : config_(std::move(config)), entries_(std::move(entries)) {
  try {
    validate(config_);
  } catch (const Error& e) {
    malformed(std::string("store config: ") + e.what());
  }
  std::set<std::string> seen;
  for (const auto& fv : entries_) {
    validate_entry(fv, config_);
    if (!seen.insert(fv.id).second) malformed("duplicate id '" + fv.id + "'");
  }
}

const FeatureVector* FeatureStore::find(const std::string& id) const {
  for (const auto& fv : entries_) {
    if (fv.id == id) return &fv;
  }
  return nullptr;
}

IngestResult ingest_directory(const fs::path& root, const ExtractionConfig& config, std::size_t threads) {
  validate(config);
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::kIoError, "not a directory: " + root.string());

  std::vector<fs::path> files;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot scan " + root.string() + ": " + ec.message());
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) throw Error(ErrorCode::kIoError, "cannot scan " + root.string() + ": " + ec.message());
    const auto& p = it->path();
    if (p.filename().string().starts_with('.')) {
      if (it->is_directory()) it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && has_image_extension(p)) files.push_back(p);
  }

  struct Slot {
    std::optional<FeatureVector> fv;
    std::string warning;
  };
  std::vector<Slot> slots(files.size());
  detail::parallel_for(files.size(), threads, [&](std::size_t i) {
    const fs::path rel = files[i].lexically_relative(root);
    try {
      FeatureVector fv = extract_features(read_image(files[i].string()), config);
      fv.id = rel.generic_string();
      fv.path = (root / rel).string();
      if (std::distance(rel.begin(), rel.end()) > 1) fv.label = rel.begin()->string();
      slots[i].fv = std::move(fv);
    } catch (const Error& e) {
      slots[i].warning = rel.generic_string() + ": " + e.what();
    }
  });

  std::vector<FeatureVector> entries;
  IngestResult result{FeatureStore(config, {}), 0, {}};
  for (auto& slot : slots) {
    if (slot.fv) {
      entries.push_back(std::move(*slot.fv));
    } else {
      ++result.skipped;
      result.warnings.push_back(std::move(slot.warning));
    }
  }
  if (entries.empty()) throw Error(ErrorCode::kEmptyCorpus, "no decodable images under " + root.string());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  result.store = FeatureStore(config, std::move(entries));
  return result;
}

std::string store_header_json(const FeatureStore& store) {
  const json header = {{"store_version", store.version()}, {"config", config_to_json(store.config())}};
  return header.dump();
}

void write_store(const FeatureStore& store, std::ostream& out) {
  out << store_header_json(store) << '\n';
  for (const auto& fv : store.entries()) out << entry_to_json(fv).dump() << '\n';
}

FeatureStore read_store(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) malformed("store file is empty");
  ExtractionConfig config;
  try {
    const json header = json::parse(line);
    const int version = header.at("store_version").get<int>();
    if (version != kStoreVersion) {
      throw Error(ErrorCode::kVersionMismatch, "unsupported store version " + std::to_string(version) +
                                                   " (expected " + std::to_string(kStoreVersion) + ")");
    }
    config = config_from_json(header.at("config"));
  } catch (const json::exception& e) {
    malformed(std::string("store header: ") + e.what());
  }

  std::vector<FeatureVector> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      entries.push_back(entry_from_json(json::parse(line), config));
    } catch (const json::exception& e) {
      malformed("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw Error(ErrorCode::kIoError, "read error while loading store");
  return FeatureStore(std::move(config), std::move(entries));
}

void save_store(const FeatureStore& store, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_store(store, out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

FeatureStore load_store(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_store(in);
}

}  // namespace cbir
