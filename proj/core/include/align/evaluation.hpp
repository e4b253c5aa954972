#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "align/labeling.hpp"
#include "align/proficiency.hpp"

namespace align {

/// Rows are truth, columns are prediction.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> counts;

  static ConfusionMatrix empty(std::vector<std::string> classes);
  std::size_t index_of(std::string_view label) const;  // throws SchemaError for a label outside `classes`
  void add(std::string_view truth, std::string_view prediction);
  std::size_t total() const noexcept;
  std::size_t trace() const noexcept;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // truth count
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  bool precision_undefined = false;  // TP+FP == 0, reported as 0
  bool recall_undefined = false;     // TP+FN == 0, reported as 0
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;
};

/// 2PR/(P+R), 0 when both are 0.
double f1_from_pr(double precision, double recall) noexcept;

/// One-vs-rest per class, unweighted macro averages, accuracy = trace/n (0 for an empty matrix).
MetricsReport metrics(const ConfusionMatrix& matrix);

inline const std::vector<std::string> k_band_classes{"High", "Medium", "Low"};
inline const std::vector<std::string> k_difficulty_classes{"Easy", "Medium", "Hard"};

using PairKey = std::pair<StudentId, Topic>;
using BandMap = std::map<PairKey, Band>;
using GroundTruthMap = std::map<StudentId, std::map<Topic, Band>>;

/// Mean normalized exam score per (student, topic), banded. Exam gradebook entries are used when the pair has
/// any; otherwise the pair's responses to questions from exam assessments. Pairs without exam items are absent.
/// Errors: NoExamData when no pair has a usable exam item.
GroundTruthMap derive_ground_truth(const CourseDataset& dataset, const BandConfig& bands);

/// Predicted bands of every (student, topic) pair; Unknown bands are included and skipped by confusion().
BandMap prediction_map(const std::vector<StudentProficiency>& students);

struct SkippedPair {
  PairKey key;
  std::string reason;
};

struct ConfusionResult {
  ConfusionMatrix matrix;
  std::vector<SkippedPair> skipped;
};

/// Counts over the pairs keyed in both maps with a known prediction. Errors: EmptyIntersection.
ConfusionResult confusion(const BandMap& predictions, const GroundTruthMap& truth);

struct LabelComparison {
  ConfusionMatrix matrix;
  MetricsReport report;
  std::size_t only_reference = 0;
  std::size_t only_prediction = 0;
};

/// `reference` is truth, `prediction` the predicted labels, over jointly labeled questions.
/// Errors: EmptyIntersection.
LabelComparison compare_label_sets(const LabelSet& reference, const LabelSet& prediction);

/// CSV `topic,easy,medium,hard,total` sorted by topic, counting labeled questions only.
std::string emit_chart_data(const CourseDataset& dataset, const LabelSet& labels);

nlohmann::json to_json(const ConfusionMatrix& matrix);
nlohmann::json to_json(const MetricsReport& report);

}  // namespace align
