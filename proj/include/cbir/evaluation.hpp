#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "cbir/feature_store.hpp"
#include "cbir/query.hpp"

namespace cbir {

using IdSet = std::set<std::string>;

/// |retrieved n relevant| / |retrieved|. kEmptyRetrieved.
double precision(const IdSet& retrieved, const IdSet& relevant);
/// |retrieved n relevant| / |relevant|. kEmptyRelevant.
double recall(const IdSet& retrieved, const IdSet& relevant);

/// Mismatches are returned images from another class plus query-class images
/// that were not returned. The count can exceed x (each missed in-class image
/// usually displaces one returned image), so the score is clamped to [0, 100].
std::size_t count_mismatches(const std::vector<std::string>& returned, const std::string& query_class,
                             const FeatureStore& store);
/// 100 * (1 - mismatches / x), clamped. kUnlabeledQuery for an empty class,
/// kInvalidArgument for x = 0.
double retrieval_score(const std::vector<std::string>& returned, std::size_t x, const std::string& query_class,
                       const FeatureStore& store);

struct EvalConfig {
  std::size_t x = 10;
  MetricSpec metric;
  FamilyWeights weights;
};

struct QueryRow {
  std::string id;
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double score = 0.0;
};

struct ClassRow {
  std::string label;
  std::size_t queries = 0;
  double precision = 0.0;
  double recall = 0.0;
  double score = 0.0;
};

struct EvalReport {
  EvalConfig config;
  std::vector<QueryRow> per_query;  // store order
  std::vector<ClassRow> per_class;  // label order
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_score = 0.0;
};

/// Every stored image is used once as a query against the whole store (the
/// query stays in the candidate set). Relevant set = images sharing the
/// query's label. kUnlabeledCorpus, kSingleClass.
EvalReport evaluate_corpus(const FeatureStore& store, const EvalConfig& config, std::size_t threads = 0);

/// query_id,class,precision,recall,score rows, then CLASS and MACRO rows,
/// all values with 6 decimals.
void write_report_csv(const EvalReport& report, std::ostream& out);
void save_report_csv(const EvalReport& report, const std::filesystem::path& path);
/// Human-readable per-class table plus the macro line.
void print_report_table(const EvalReport& report, std::ostream& out);

}  // namespace cbir
