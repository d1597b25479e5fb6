#include "cbir/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"

#include "cbir/error.hpp"
#include "cbir/evaluation.hpp"
#include "cbir/feature_store.hpp"
#include "cbir/query.hpp"
#include "cbir/service.hpp"

namespace cbir {

namespace fs = std::filesystem;

namespace {

// Usage problems detected after CLI11 has parsed the flags.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError: return kExitIo;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidOrder: return kExitUsage;
    default: return kExitData;
  }
}

std::vector<std::size_t> parse_counts(const std::string& text, std::size_t expected, const std::string& flag) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v < 1) {
      throw UsageError(flag + " expects " + std::to_string(expected) + " positive integers, got '" + text + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.size() != expected) {
    throw UsageError(flag + " expects " + std::to_string(expected) + " comma-separated values, got '" + text + "'");
  }
  return out;
}

MetricSpec metric_from_flags(const std::string& name, const std::optional<double>& mk) {
  try {
    return MetricSpec::parse(name, mk);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

FamilyWeights weights_from_flags(const std::optional<std::string>& text, const ExtractionConfig& config) {
  if (!text) return FamilyWeights::defaults_for(config);
  try {
    return FamilyWeights::parse(*text);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void require_file(const std::string& path, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::kIoError, what + " not found: " + path);
}

void require_parent_dir(const std::string& path) {
  const fs::path parent = fs::absolute(fs::path(path)).parent_path();
  std::error_code ec;
  if (!fs::is_directory(parent, ec)) throw Error(ErrorCode::kIoError, "output directory does not exist: " + parent.string());
}

std::string fixed6(double v) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

bool same_file(const std::string& a, const std::string& b) {
  std::error_code ec;
  const bool eq = fs::equivalent(a, b, ec);
  return !ec && eq;
}

void print_results(const std::vector<QueryResult>& results, std::ostream& out) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"rank", "id", "label", "distance", "gch", "lch", "texture"});
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    rows.push_back({std::to_string(i + 1), r.id, r.label.value_or("-"), fixed6(r.total_distance),
                    fixed6(r.per_feature[0]), fixed6(r.per_feature[1]), fixed6(r.per_feature[2])});
  }
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      line += row[c];
      if (c + 1 < row.size()) line.append(widths[c] - row[c].size(), ' ');
    }
    out << line << '\n';
  }
}

struct IndexFlags {
  std::string dir;
  std::string out;
  std::string hsv_bins = "16,4,4";
  std::string grid = "4,4";
  bool no_lch = false;
  bool no_texture = false;
  std::size_t threads = 0;
};

struct QueryFlags {
  std::string store;
  std::string image;
  std::string metric;
  std::optional<double> mk;
  std::size_t k = 10;
  std::optional<std::string> weights;
};

struct EvalFlags {
  std::string store;
  std::size_t x = 0;
  std::string metric;
  std::optional<double> mk;
  std::optional<std::string> weights;
  std::string report;
  std::size_t threads = 0;
};

struct ServeFlags {
  std::string store;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::optional<std::string> assets;
};

int cmd_index(const IndexFlags& f, std::ostream& out, std::ostream& err) {
  ExtractionConfig config;
  const auto bins = parse_counts(f.hsv_bins, 3, "--hsv-bins");
  config.scheme = {bins[0], bins[1], bins[2]};
  const auto grid = parse_counts(f.grid, 2, "--grid");
  config.grid = {grid[0], grid[1]};
  config.include_lch = !f.no_lch;
  config.include_texture = !f.no_texture;

  std::error_code ec;
  if (!fs::is_directory(f.dir, ec)) throw Error(ErrorCode::kIoError, "corpus directory not found: " + f.dir);
  require_parent_dir(f.out);

  const IngestResult ingested = ingest_directory(f.dir, config, f.threads);
  for (const auto& w : ingested.warnings) err << "warning: skipped " << w << '\n';
  save_store(ingested.store, f.out);
  out << "indexed " << ingested.store.size() << " images (skipped " << ingested.skipped << ") scheme="
      << config.scheme.h_bins << ',' << config.scheme.s_bins << ',' << config.scheme.v_bins
      << " grid=" << config.grid.rows << ',' << config.grid.cols << " lch=" << (config.include_lch ? "on" : "off")
      << " texture=" << (config.include_texture ? "on" : "off") << " -> " << f.out << '\n';
  return kExitOk;
}

int cmd_query(const QueryFlags& f, std::ostream& out) {
  const MetricSpec metric = metric_from_flags(f.metric, f.mk);
  if (f.k == 0) throw UsageError("--k must be at least 1");
  require_file(f.store, "store");
  require_file(f.image, "query image");

  const FeatureStore store = load_store(f.store);
  const QuerySpec spec{metric, f.k, weights_from_flags(f.weights, store.config())};
  FeatureVector q = extract_features(read_image(f.image), store.config());
  for (const auto& fv : store.entries()) {
    if (same_file(fv.path, f.image)) {
      q.id = fv.id;
      break;
    }
  }
  print_results(rank(q, store, spec), out);
  return kExitOk;
}

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const MetricSpec metric = metric_from_flags(f.metric, f.mk);
  if (f.x == 0) throw UsageError("--x must be at least 1");
  require_file(f.store, "store");
  require_parent_dir(f.report);

  const FeatureStore store = load_store(f.store);
  const EvalConfig cfg{f.x, metric, weights_from_flags(f.weights, store.config())};
  const EvalReport report = evaluate_corpus(store, cfg, f.threads);
  save_report_csv(report, f.report);
  print_report_table(report, out);
  return kExitOk;
}

int cmd_serve(const ServeFlags& f, std::ostream& out, std::ostream& err) {
  require_file(f.store, "store");
  ServiceOptions options;
  if (f.assets) {
    std::error_code ec;
    if (!fs::is_directory(*f.assets, ec)) throw Error(ErrorCode::kIoError, "asset directory not found: " + *f.assets);
    options.assets = *f.assets;
  }
  QueryService service(load_store(f.store), options);
  httplib::Server server;
  // httplib's default adds SO_REUSEPORT, which lets a second server share a busy port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  service.mount(server);
  if (!server.bind_to_port(f.host, f.port)) {
    err << "error: cannot bind " << f.host << ':' << f.port << '\n';
    return kExitIo;
  }
  out << "serving " << service.store().size() << " images on http://" << f.host << ':' << f.port << '\n';
  out.flush();
  if (!server.listen_after_bind()) return kExitIo;
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Content-based image retrieval over colour histograms and texture moments", "cbir"};
  app.require_subcommand(1);

  IndexFlags index_flags;
  auto* index = app.add_subcommand("index", "Extract features for a directory tree and write a store");
  index->add_option("--dir", index_flags.dir, "Corpus root (root/<label>/<image>)")->required();
  index->add_option("--out", index_flags.out, "Store file to write")->required();
  index->add_option("--hsv-bins", index_flags.hsv_bins, "Hue,saturation,value bin counts")
      ->capture_default_str();
  index->add_option("--grid", index_flags.grid, "LCH grid rows,cols")->capture_default_str();
  index->add_flag("--no-lch", index_flags.no_lch, "Skip local colour histograms");
  index->add_flag("--no-texture", index_flags.no_texture, "Skip texture moments");
  index->add_option("--threads", index_flags.threads, "Worker threads (0 = all cores)");

  QueryFlags query_flags;
  auto* query = app.add_subcommand("query", "Rank the stored images against a query image");
  query->add_option("--store", query_flags.store, "Store file")->required();
  query->add_option("--image", query_flags.image, "Query image")->required();
  query->add_option("--metric", query_flags.metric, "Metric name")->required();
  query->add_option("--mk", query_flags.mk, "Minkowski order (required for minkowski)");
  query->add_option("--k", query_flags.k, "Number of results")->capture_default_str();
  query->add_option("--weights", query_flags.weights, "Family weights, e.g. gch=1,lch=1,texture=1");

  EvalFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Score retrieval quality over a labeled store");
  eval->add_option("--store", eval_flags.store, "Store file")->required();
  eval->add_option("--x", eval_flags.x, "Returned-set size per query")->required();
  eval->add_option("--metric", eval_flags.metric, "Metric name")->required();
  eval->add_option("--mk", eval_flags.mk, "Minkowski order (required for minkowski)");
  eval->add_option("--weights", eval_flags.weights, "Family weights, e.g. gch=1,lch=1,texture=1");
  eval->add_option("--report", eval_flags.report, "CSV report path")->required();
  eval->add_option("--threads", eval_flags.threads, "Worker threads (0 = all cores)");

  ServeFlags serve_flags;
  auto* serve = app.add_subcommand("serve", "Serve the query HTTP API");
  serve->add_option("--store", serve_flags.store, "Store file")->required();
  serve->add_option("--port", serve_flags.port, "TCP port")->required();
  serve->add_option("--host", serve_flags.host, "Bind address")->capture_default_str();
  serve->add_option("--assets", serve_flags.assets, "Directory of static UI assets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (index->parsed()) return cmd_index(index_flags, out, err);
    if (query->parsed()) return cmd_query(query_flags, out);
    if (eval->parsed()) return cmd_eval(eval_flags, out);
    if (serve->parsed()) return cmd_serve(serve_flags, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  }
  return kExitUsage;
}

}  // namespace cbir
