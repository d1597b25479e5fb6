#include "cbir/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "cbir/error.hpp"
#include "parallel.hpp"

namespace cbir {

namespace {

std::size_t overlap(const IdSet& a, const IdSet& b) {
  std::size_t n = 0;
  for (const auto& id : a) n += b.count(id);
  return n;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

double precision(const IdSet& retrieved, const IdSet& relevant) {
  if (retrieved.empty()) throw Error(ErrorCode::kEmptyRetrieved, "precision needs at least one retrieved item");
  return static_cast<double>(overlap(retrieved, relevant)) / static_cast<double>(retrieved.size());
}

double recall(const IdSet& retrieved, const IdSet& relevant) {
  if (relevant.empty()) throw Error(ErrorCode::kEmptyRelevant, "recall needs at least one relevant item");
  return static_cast<double>(overlap(retrieved, relevant)) / static_cast<double>(relevant.size());
}

std::size_t count_mismatches(const std::vector<std::string>& returned, const std::string& query_class,
                             const FeatureStore& store) {
  const IdSet returned_set(returned.begin(), returned.end());
  std::size_t off_class = 0;
  std::size_t missed = 0;
  for (const auto& fv : store.entries()) {
    const bool in_class = fv.label && *fv.label == query_class;
    const bool was_returned = returned_set.count(fv.id) > 0;
    if (was_returned && !in_class) ++off_class;
    if (!was_returned && in_class) ++missed;
  }
  return off_class + missed;
}

double retrieval_score(const std::vector<std::string>& returned, std::size_t x, const std::string& query_class,
                       const FeatureStore& store) {
  if (x == 0) throw Error(ErrorCode::kInvalidArgument, "x must be at least 1");
  if (query_class.empty()) throw Error(ErrorCode::kUnlabeledQuery, "retrieval score needs a labeled query");
  const double mismatches = static_cast<double>(count_mismatches(returned, query_class, store));
  return std::clamp(100.0 * (1.0 - mismatches / static_cast<double>(x)), 0.0, 100.0);
}

EvalReport evaluate_corpus(const FeatureStore& store, const EvalConfig& config, std::size_t threads) {
  if (config.x == 0) throw Error(ErrorCode::kInvalidArgument, "x must be at least 1");
  if (store.size() == 0) throw Error(ErrorCode::kEmptyStore, "store has no entries");
  std::map<std::string, IdSet> classes;
  for (const auto& fv : store.entries()) {
    if (!fv.label || fv.label->empty()) {
      throw Error(ErrorCode::kUnlabeledCorpus, "entry '" + fv.id + "' has no class label");
    }
    classes[*fv.label].insert(fv.id);
  }
  if (classes.size() < 2) throw Error(ErrorCode::kSingleClass, "evaluation needs at least two classes");

  const QuerySpec spec{config.metric, config.x, config.weights};
  validate(spec, store.config());

  EvalReport report;
  report.config = config;
  const auto& entries = store.entries();
  report.per_query.resize(entries.size());
  // Queries run one per worker; each rank() stays single-threaded.
  detail::parallel_for(entries.size(), threads, [&](std::size_t i) {
    const FeatureVector& q = entries[i];
    const auto results = rank(q, store, spec, 1);
    std::vector<std::string> returned;
    returned.reserve(results.size());
    for (const auto& r : results) returned.push_back(r.id);
    const IdSet retrieved(returned.begin(), returned.end());
    const IdSet& relevant = classes.at(*q.label);
    report.per_query[i] = {q.id, *q.label, precision(retrieved, relevant), recall(retrieved, relevant),
                           retrieval_score(returned, config.x, *q.label, store)};
  });

  std::map<std::string, ClassRow> by_class;
  for (const auto& row : report.per_query) {
    ClassRow& c = by_class[row.label];
    c.label = row.label;
    ++c.queries;
    c.precision += row.precision;
    c.recall += row.recall;
    c.score += row.score;
  }
  for (auto& [label, c] : by_class) {
    const double n = static_cast<double>(c.queries);
    c.precision /= n;
    c.recall /= n;
    c.score /= n;
    report.macro_precision += c.precision;
    report.macro_recall += c.recall;
    report.macro_score += c.score;
    report.per_class.push_back(c);
  }
  const double classes_n = static_cast<double>(report.per_class.size());
  report.macro_precision /= classes_n;
  report.macro_recall /= classes_n;
  report.macro_score /= classes_n;
  return report;
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "query_id,class,precision,recall,score\n";
  for (const auto& r : report.per_query) {
    out << r.id << ',' << r.label << ',' << fixed6(r.precision) << ',' << fixed6(r.recall) << ',' << fixed6(r.score)
        << '\n';
  }
  for (const auto& c : report.per_class) {
    out << "CLASS," << c.label << ',' << fixed6(c.precision) << ',' << fixed6(c.recall) << ',' << fixed6(c.score)
        << '\n';
  }
  out << "MACRO,," << fixed6(report.macro_precision) << ',' << fixed6(report.macro_recall) << ','
      << fixed6(report.macro_score) << '\n';
}

void save_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_report_csv(report, out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

void print_report_table(const EvalReport& report, std::ostream& out) {
  std::size_t width = 5;
  for (const auto& c : report.per_class) width = std::max(width, c.label.size());
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %7s %10s %10s %10s\n", static_cast<int>(width), "class", "queries",
                "precision", "recall", "score");
  out << line;
  for (const auto& c : report.per_class) {
    std::snprintf(line, sizeof line, "%-*s %7zu %10.6f %10.6f %10.6f\n", static_cast<int>(width), c.label.c_str(),
                  c.queries, c.precision, c.recall, c.score);
    out << line;
  }
  std::snprintf(line, sizeof line, "macro precision=%.6f recall=%.6f score=%.6f (x=%zu, metric=%s)\n",
                report.macro_precision, report.macro_recall, report.macro_score, report.config.x,
                std::string(metric_name(report.config.metric.kind)).c_str());
  out << line;
}

}  // namespace cbir
