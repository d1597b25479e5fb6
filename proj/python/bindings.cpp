#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "cbir/color_histogram.hpp"
#include "cbir/error.hpp"
#include "cbir/evaluation.hpp"
#include "cbir/feature_store.hpp"
#include "cbir/image.hpp"
#include "cbir/metrics.hpp"
#include "cbir/query.hpp"
#include "cbir/texture.hpp"

namespace py = pybind11;
using namespace py::literals;

namespace {

std::vector<std::uint8_t> to_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

py::dict result_to_dict(const cbir::QueryResult& r) {
  py::dict per_feature;
  for (const auto f : cbir::kFamilies) {
    const double v = r.per_feature[static_cast<std::size_t>(f)];
    per_feature[py::str(std::string(cbir::family_name(f)))] = std::isnan(v) ? py::object(py::none()) : py::float_(v);
  }
  return py::dict("id"_a = r.id, "label"_a = r.label, "distance"_a = r.total_distance,
                  "per_feature"_a = per_feature);
}

cbir::FamilyWeights weights_from(const py::object& w, const cbir::ExtractionConfig& config) {
  if (w.is_none()) return cbir::FamilyWeights::defaults_for(config);
  if (py::isinstance<py::str>(w)) return cbir::FamilyWeights::parse(w.cast<std::string>());
  std::string text;
  for (const auto& [key, value] : w.cast<py::dict>()) {
    if (!text.empty()) text += ',';
    text += key.cast<std::string>() + '=' + py::repr(value).cast<std::string>();
  }
  return cbir::FamilyWeights::parse(text);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of the cbir retrieval engine";
  m.attr("__version__") = "0.1.0";

  static py::exception<cbir::Error> cbir_error(m, "CbirError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const cbir::Error& e) {
      const std::string msg = std::string(cbir::to_string(e.code())) + ": " + e.what();
      cbir_error(msg.c_str());
    }
  });

  // imaging
  py::class_<cbir::RawImage>(m, "RawImage")
      .def(py::init([](std::size_t w, std::size_t h, const py::bytes& pixels) {
             return cbir::RawImage(w, h, to_bytes(pixels));
           }),
           "width"_a, "height"_a, "pixels"_a)
      .def_property_readonly("width", &cbir::RawImage::width)
      .def_property_readonly("height", &cbir::RawImage::height)
      .def("tobytes", [](const cbir::RawImage& img) {
        const auto b = img.bytes();
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
      });

  py::class_<cbir::HsvColor>(m, "HsvColor")
      .def(py::init<double, double, double>(), "h"_a, "s"_a, "v"_a)
      .def_readwrite("h", &cbir::HsvColor::h)
      .def_readwrite("s", &cbir::HsvColor::s)
      .def_readwrite("v", &cbir::HsvColor::v)
      .def("__repr__", [](const cbir::HsvColor& c) {
        return "HsvColor(h=" + std::to_string(c.h) + ", s=" + std::to_string(c.s) + ", v=" + std::to_string(c.v) + ")";
      });

  m.def("decode_image", [](const py::bytes& data) { return cbir::decode_image(to_bytes(data)); }, "data"_a);
  m.def("read_image", &cbir::read_image, "path"_a);
  m.def("encode_png", [](const cbir::RawImage& img) {
    const auto b = cbir::encode_png(img);
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
  });
  m.def("rgb_to_hsv", py::overload_cast<std::uint8_t, std::uint8_t, std::uint8_t>(&cbir::rgb_to_hsv), "r"_a, "g"_a,
        "b"_a);
  m.def("grayscale_levels", [](const cbir::RawImage& img) {
    const auto g = cbir::to_grayscale(img);
    return std::vector<std::uint8_t>(g.levels().begin(), g.levels().end());
  });

  // colour
  py::class_<cbir::QuantizationScheme>(m, "QuantizationScheme")
      .def(py::init<>())
      .def(py::init([](std::size_t h, std::size_t s, std::size_t v) {
             cbir::QuantizationScheme q{h, s, v};
             cbir::validate(q);
             return q;
           }),
           "h_bins"_a, "s_bins"_a, "v_bins"_a)
      .def_readonly("h_bins", &cbir::QuantizationScheme::h_bins)
      .def_readonly("s_bins", &cbir::QuantizationScheme::s_bins)
      .def_readonly("v_bins", &cbir::QuantizationScheme::v_bins)
      .def_property_readonly("bin_count", &cbir::QuantizationScheme::bin_count);

  py::class_<cbir::ColorHistogram>(m, "ColorHistogram")
      .def(py::init<cbir::QuantizationScheme, std::vector<double>>(), "scheme"_a, "values"_a)
      .def_readonly("scheme", &cbir::ColorHistogram::scheme)
      .def_readonly("values", &cbir::ColorHistogram::values);

  py::class_<cbir::GridSize>(m, "GridSize")
      .def(py::init<std::size_t, std::size_t>(), "rows"_a, "cols"_a)
      .def_readonly("rows", &cbir::GridSize::rows)
      .def_readonly("cols", &cbir::GridSize::cols);

  m.def("quantize_hsv", &cbir::quantize_hsv, "color"_a, "scheme"_a);
  m.def("bin_representative", &cbir::bin_representative, "scheme"_a, "index"_a);
  m.def("global_histogram", &cbir::global_histogram, "image"_a, "scheme"_a = cbir::QuantizationScheme{});
  m.def(
      "local_histograms",
      [](const cbir::RawImage& img, const cbir::GridSize& grid, const cbir::QuantizationScheme& scheme) {
        return cbir::local_histograms(img, grid, scheme).blocks;
      },
      "image"_a, "grid"_a, "scheme"_a = cbir::QuantizationScheme{});

  // texture
  py::class_<cbir::TextureMoments>(m, "TextureMoments")
      .def_readonly("mean", &cbir::TextureMoments::mean)
      .def_readonly("sigma", &cbir::TextureMoments::sigma)
      .def_readonly("smoothness", &cbir::TextureMoments::smoothness)
      .def_readonly("third_moment", &cbir::TextureMoments::third_moment)
      .def_readonly("uniformity", &cbir::TextureMoments::uniformity)
      .def_readonly("entropy", &cbir::TextureMoments::entropy)
      .def("as_list", [](const cbir::TextureMoments& t) {
        const auto a = t.as_array();
        return std::vector<double>(a.begin(), a.end());
      });
  m.def("texture_moments", [](const std::vector<double>& p) {
    if (p.size() != cbir::kGrayLevels) throw cbir::Error(cbir::ErrorCode::kLengthMismatch, "expected 256 probabilities");
    cbir::GrayHistogram h;
    std::copy(p.begin(), p.end(), h.p.begin());
    return cbir::texture_moments(h);
  });
  m.def("image_texture", [](const cbir::RawImage& img) {
    return cbir::texture_moments(cbir::gray_histogram(cbir::to_grayscale(img)));
  });

  // metrics
  m.def("minkowski", [](const std::vector<double>& a, const std::vector<double>& b, double k) {
    return cbir::minkowski(a, b, k);
  });
  m.def("manhattan", [](const std::vector<double>& a, const std::vector<double>& b) { return cbir::manhattan(a, b); });
  m.def("chebyshev", [](const std::vector<double>& a, const std::vector<double>& b) { return cbir::chebyshev(a, b); });
  m.def("bray_curtis",
        [](const std::vector<double>& a, const std::vector<double>& b) { return cbir::bray_curtis(a, b); });
  m.def("l1_histogram", &cbir::l1_histogram);
  m.def("euclidean_histogram", &cbir::euclidean_histogram);
  m.def("intersection_similarity", &cbir::intersection_similarity);
  m.def("hamming", [](const std::string& x, const std::string& y) {
    return cbir::hamming(cbir::BitSignature::from_string(x), cbir::BitSignature::from_string(y));
  });
  m.def("similarity_matrix", [](const cbir::QuantizationScheme& scheme) {
    const auto A = cbir::cached_similarity_matrix(scheme);
    std::vector<std::vector<double>> rows(A->size());
    for (std::size_t i = 0; i < A->size(); ++i) rows[i].assign(A->row(i).begin(), A->row(i).end());
    return rows;
  });
  m.def("quadratic_distance", [](const cbir::ColorHistogram& a, const cbir::ColorHistogram& b) {
    return cbir::quadratic_distance(a, b, *cbir::cached_similarity_matrix(a.scheme));
  });
  m.def("metric_names", [] {
    std::vector<std::string> out;
    for (const auto n : cbir::metric_names()) out.emplace_back(n);
    return out;
  });

  // store, ranking, evaluation
  py::class_<cbir::ExtractionConfig>(m, "ExtractionConfig")
      .def(py::init([](const cbir::QuantizationScheme& scheme, const cbir::GridSize& grid, bool lch, bool texture) {
             cbir::ExtractionConfig c{scheme, grid, lch, texture};
             cbir::validate(c);
             return c;
           }),
           "scheme"_a = cbir::QuantizationScheme{}, "grid"_a = cbir::GridSize{}, "include_lch"_a = true,
           "include_texture"_a = true)
      .def_readonly("scheme", &cbir::ExtractionConfig::scheme)
      .def_readonly("grid", &cbir::ExtractionConfig::grid)
      .def_readonly("include_lch", &cbir::ExtractionConfig::include_lch)
      .def_readonly("include_texture", &cbir::ExtractionConfig::include_texture);

  py::class_<cbir::FeatureVector>(m, "FeatureVector")
      .def_readonly("id", &cbir::FeatureVector::id)
      .def_readonly("path", &cbir::FeatureVector::path)
      .def_readonly("label", &cbir::FeatureVector::label)
      .def_readonly("gch", &cbir::FeatureVector::gch)
      .def_property_readonly("texture", [](const cbir::FeatureVector& f) { return f.texture; })
      .def_property_readonly("has_lch", [](const cbir::FeatureVector& f) { return f.lch.has_value(); });
  m.def("extract_features", &cbir::extract_features, "image"_a, "config"_a = cbir::ExtractionConfig{});

  py::class_<cbir::FeatureStore>(m, "FeatureStore")
      .def_property_readonly("config", &cbir::FeatureStore::config)
      .def_property_readonly("entries", &cbir::FeatureStore::entries)
      .def("__len__", &cbir::FeatureStore::size)
      .def("find", [](const cbir::FeatureStore& s, const std::string& id) -> std::optional<cbir::FeatureVector> {
        const auto* fv = s.find(id);
        if (!fv) return std::nullopt;
        return *fv;
      })
      .def("save", [](const cbir::FeatureStore& s, const std::filesystem::path& p) { cbir::save_store(s, p); });
  m.def("load_store", &cbir::load_store, "path"_a);
  m.def(
      "ingest_directory",
      [](const std::filesystem::path& root, const cbir::ExtractionConfig& config) {
        auto r = cbir::ingest_directory(root, config);
        return py::make_tuple(std::move(r.store), r.skipped);
      },
      "root"_a, "config"_a = cbir::ExtractionConfig{});

  m.def(
      "rank",
      [](const cbir::FeatureVector& q, const cbir::FeatureStore& store, const std::string& metric,
         std::optional<double> mk, std::size_t k, const py::object& weights) {
        const cbir::QuerySpec spec{cbir::MetricSpec::parse(metric, mk), k, weights_from(weights, store.config())};
        py::list out;
        for (const auto& r : cbir::rank(q, store, spec)) out.append(result_to_dict(r));
        return out;
      },
      "query"_a, "store"_a, "metric"_a = "l1", "mk"_a = py::none(), "k"_a = 10, "weights"_a = py::none());

  m.def(
      "evaluate",
      [](const cbir::FeatureStore& store, std::size_t x, const std::string& metric, std::optional<double> mk,
         const py::object& weights) {
        const cbir::EvalConfig cfg{x, cbir::MetricSpec::parse(metric, mk), weights_from(weights, store.config())};
        const auto report = cbir::evaluate_corpus(store, cfg);
        py::list rows;
        for (const auto& r : report.per_query) {
          rows.append(py::dict("id"_a = r.id, "label"_a = r.label, "precision"_a = r.precision, "recall"_a = r.recall,
                               "score"_a = r.score));
        }
        return py::dict("per_query"_a = rows, "macro_precision"_a = report.macro_precision,
                        "macro_recall"_a = report.macro_recall, "macro_score"_a = report.macro_score);
      },
      "store"_a, "x"_a, "metric"_a = "l1", "mk"_a = py::none(), "weights"_a = py::none());
}
