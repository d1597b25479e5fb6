#include "cbir/service.hpp"

#include <cmath>
#include <limits>

#include "httplib.h"
#include "json.hpp"

#include "cbir/error.hpp"

namespace cbir {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";
constexpr std::size_t kDefaultPageSize = 50;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kIoError:
    case ErrorCode::kEmptyStore: return 500;
    default: return 400;
  }
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(), kJson);
}

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

std::string thumb_url(const std::string& id) { return "/api/images/" + httplib::detail::encode_url(id) + "/thumb"; }

std::optional<std::string> form_value(const httplib::Request& req, const std::string& key) {
  if (req.has_file(key)) {
    const auto part = req.get_file_value(key);
    if (part.filename.empty()) return part.content;
  }
  if (req.has_param(key)) return req.get_param_value(key);
  return std::nullopt;
}

std::size_t parse_count(const std::string& text, const std::string& name) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || v < 0) {
    throw Error(ErrorCode::kInvalidArgument, name + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

double parse_real(const std::string& text, const std::string& name) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(ErrorCode::kInvalidArgument, name + " must be a number");
  return v;
}

ApiQueryRequest parse_request(const httplib::Request& req) {
  ApiQueryRequest out;
  if (req.has_file("image")) {
    const auto part = req.get_file_value("image");
    out.upload = std::vector<std::uint8_t>(part.content.begin(), part.content.end());
  }
  out.image_id = form_value(req, "image_id");
  if (out.image_id && out.image_id->empty()) out.image_id.reset();
  out.metric = form_value(req, "metric").value_or("l1");
  if (const auto mk = form_value(req, "mk"); mk && !mk->empty()) out.mk = parse_real(*mk, "mk");
  if (const auto k = form_value(req, "k"); k && !k->empty()) out.k = parse_count(*k, "k");
  if (const auto w = form_value(req, "weights"); w && !w->empty()) out.weights = FamilyWeights::parse(*w);
  return out;
}

}  // namespace

PreparedQuery prepare_query(const FeatureStore& store, const ApiQueryRequest& request) {
  if (request.upload.has_value() == request.image_id.has_value()) {
    throw Error(ErrorCode::kInvalidArgument, "provide exactly one of an uploaded image or image_id");
  }
  if (request.k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  PreparedQuery prepared;
  prepared.spec.metric = MetricSpec::parse(request.metric, request.mk);
  prepared.spec.k = request.k;
  prepared.spec.weights = request.weights.value_or(FamilyWeights::defaults_for(store.config()));
  if (request.image_id) {
    const FeatureVector* fv = store.find(*request.image_id);
    if (!fv) throw Error(ErrorCode::kNotFound, "no image with id '" + *request.image_id + "'");
    prepared.query = *fv;
  } else {
    prepared.query = extract_features(decode_image(*request.upload), store.config());
  }
  return prepared;
}

QueryService::QueryService(FeatureStore store, ServiceOptions options)
    : store_(std::move(store)), options_(std::move(options)) {}

std::string QueryService::query_json(const ApiQueryRequest& request) const {
  const PreparedQuery prepared = prepare_query(store_, request);
  const auto results = rank(prepared.query, store_, prepared.spec);
  json items = json::array();
  for (const auto& r : results) {
    json per_feature = json::object();
    for (const Family f : kFamilies) {
      per_feature[std::string(family_name(f))] = number_or_null(r.per_feature[static_cast<std::size_t>(f)]);
    }
    items.push_back({{"id", r.id},
                     {"label", r.label ? json(*r.label) : json(nullptr)},
                     {"distance", r.total_distance},
                     {"per_feature", std::move(per_feature)}});
  }
  return json{{"results", std::move(items)}}.dump();
}

std::string QueryService::corpus_json(std::size_t offset, std::size_t limit) const {
  json items = json::array();
  const auto& entries = store_.entries();
  for (std::size_t i = offset; i < entries.size() && i - offset < limit; ++i) {
    const auto& fv = entries[i];
    items.push_back({{"id", fv.id}, {"label", fv.label ? json(*fv.label) : json(nullptr)}, {"thumb_url", thumb_url(fv.id)}});
  }
  return items.dump();
}

std::string QueryService::config_json() const {
  json header = json::parse(store_header_json(store_));
  header["entries"] = store_.size();
  return header.dump();
}

std::shared_ptr<const std::vector<std::uint8_t>> QueryService::thumbnail_png(const std::string& id) {
  {
    std::lock_guard lock(thumb_mutex_);
    if (const auto it = thumbs_.find(id); it != thumbs_.end()) return it->second;
  }
  const FeatureVector* fv = store_.find(id);
  if (!fv) throw Error(ErrorCode::kNotFound, "no image with id '" + id + "'");
  RawImage img;
  try {
    img = read_image(fv->path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kNotFound, "source image for '" + id + "' is unavailable: " + e.what());
  }
  auto png = std::make_shared<const std::vector<std::uint8_t>>(encode_png(thumbnail(img, options_.thumb_side)));
  // Two threads may encode the same id concurrently; the first insert wins.
  std::lock_guard lock(thumb_mutex_);
  return thumbs_.emplace(id, std::move(png)).first->second;
}

void QueryService::mount(httplib::Server& server) {
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    } catch (...) {
      send_error(res, 500, "Internal", "unknown error");
    }
  });
  server.set_post_routing_handler([](const httplib::Request& req, httplib::Response& res) {
    if (req.path.rfind("/api/", 0) == 0) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
  });
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", kJson);
  });
  server.Get("/api/config", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(config_json(), kJson);
  });
  server.Get("/api/corpus", [this](const httplib::Request& req, httplib::Response& res) {
    const std::size_t offset = req.has_param("offset") ? parse_count(req.get_param_value("offset"), "offset") : 0;
    const std::size_t limit =
        req.has_param("limit") ? parse_count(req.get_param_value("limit"), "limit") : kDefaultPageSize;
    res.set_content(corpus_json(offset, limit), kJson);
  });
  server.Get(R"(/api/images/(.+)/thumb)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto png = thumbnail_png(req.matches[1].str());
    res.set_content(reinterpret_cast<const char*>(png->data()), png->size(), "image/png");
  });
  server.Post("/api/query", [this](const httplib::Request& req, httplib::Response& res) {
    res.set_content(query_json(parse_request(req)), kJson);
  });

  if (options_.assets) {
    if (!server.set_mount_point("/", options_.assets->string())) {
      throw Error(ErrorCode::kIoError, "asset directory not found: " + options_.assets->string());
    }
  }
}

}  // namespace cbir
