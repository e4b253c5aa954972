#include "align/evaluation.hpp"

#include <algorithm>
#include <array>
#include <nlohmann/json.hpp>

#include "align/csv.hpp"
#include "align/error.hpp"

namespace align {

using nlohmann::json;

ConfusionMatrix ConfusionMatrix::empty(std::vector<std::string> classes) {
  ConfusionMatrix m;
  m.counts.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
  m.classes = std::move(classes);
  return m;
}

std::size_t ConfusionMatrix::index_of(std::string_view label) const {
  auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) throw Error(ErrorKind::SchemaError, "label '" + std::string(label) + "' is not a class");
  return static_cast<std::size_t>(it - classes.begin());
}

void ConfusionMatrix::add(std::string_view truth, std::string_view prediction) {
  ++counts[index_of(truth)][index_of(prediction)];
}

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t n = 0;
  for (const auto& row : counts) {
    for (auto c : row) n += c;
  }
  return n;
}

std::size_t ConfusionMatrix::trace() const noexcept {
  std::size_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

double f1_from_pr(double precision, double recall) noexcept {
  double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

MetricsReport metrics(const ConfusionMatrix& matrix) {
  MetricsReport r;
  const auto k = matrix.classes.size();
  r.n = matrix.total();

  std::vector<std::size_t> row_sum(k, 0), col_sum(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      row_sum[i] += matrix.counts[i][j];
      col_sum[j] += matrix.counts[i][j];
    }
  }

  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics m;
    m.label = matrix.classes[c];
    m.tp = matrix.counts[c][c];
    m.fp = col_sum[c] - m.tp;
    m.fn = row_sum[c] - m.tp;
    m.tn = r.n - m.tp - m.fp - m.fn;
    m.support = row_sum[c];
    m.precision_undefined = m.tp + m.fp == 0;
    m.recall_undefined = m.tp + m.fn == 0;
    m.precision = m.precision_undefined ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    m.recall = m.recall_undefined ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    m.f1 = f1_from_pr(m.precision, m.recall);
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
    r.per_class.push_back(std::move(m));
  }
  if (k > 0) {
    r.macro_precision /= static_cast<double>(k);
    r.macro_recall /= static_cast<double>(k);
    r.macro_f1 /= static_cast<double>(k);
  }
  r.accuracy = r.n > 0 ? static_cast<double>(matrix.trace()) / static_cast<double>(r.n) : 0.0;
  return r;
}

namespace {

double sorted_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

GroundTruthMap derive_ground_truth(const CourseDataset& dataset, const BandConfig& bands) {
  bands.validate();
  std::map<PairKey, std::vector<double>> from_gradebook;
  for (const auto& e : dataset.gradebook) {
    if (dataset.is_exam(e.assessment_id)) from_gradebook[{e.student, e.topic}].push_back(e.normalized_score);
  }
  std::map<PairKey, std::vector<double>> from_responses;
  for (const auto& r : dataset.responses) {
    const auto* q = dataset.find_question(r.question_id);
    if (!q || !dataset.is_exam(q->quiz_id) || r.points_possible <= 0.0) continue;
    from_responses[{r.student, q->topic}].push_back(r.points_earned / r.points_possible);
  }
  for (auto& [key, scores] : from_responses) from_gradebook.try_emplace(key, std::move(scores));

  if (from_gradebook.empty()) {
    throw Error(ErrorKind::NoExamData, dataset.exam_assessment_ids.empty()
                                           ? "no exam assessment ids are configured"
                                           : "exam assessments have no gradebook entries or responses");
  }
  GroundTruthMap truth;
  for (const auto& [key, scores] : from_gradebook) truth[key.first][key.second] = band_for(sorted_mean(scores), bands);
  return truth;
}

BandMap prediction_map(const std::vector<StudentProficiency>& students) {
  BandMap out;
  for (const auto& s : students) {
    for (const auto& [topic, tp] : s.vector.entries) out[{s.vector.student, topic}] = tp.band;
  }
  return out;
}

ConfusionResult confusion(const BandMap& predictions, const GroundTruthMap& truth) {
  ConfusionResult result{ConfusionMatrix::empty(k_band_classes), {}};
  auto truth_of = [&](const PairKey& key) -> const Band* {
    auto s = truth.find(key.first);
    if (s == truth.end()) return nullptr;
    auto t = s->second.find(key.second);
    return t == s->second.end() ? nullptr : &t->second;
  };

  for (const auto& [key, band] : predictions) {
    const Band* actual = truth_of(key);
    if (!actual) {
      result.skipped.push_back({key, "no exam ground truth"});
    } else if (band == Band::Unknown) {
      result.skipped.push_back({key, "no quiz evidence for a prediction"});
    } else {
      result.matrix.add(to_string(*actual), to_string(band));
    }
  }
  for (const auto& [student, topics] : truth) {
    for (const auto& [topic, band] : topics) {
      if (!predictions.count({student, topic})) result.skipped.push_back({{student, topic}, "no prediction"});
    }
  }
  std::sort(result.skipped.begin(), result.skipped.end(),
            [](const SkippedPair& a, const SkippedPair& b) { return a.key < b.key; });
  if (result.matrix.total() == 0) throw Error(ErrorKind::EmptyIntersection, "no (student, topic) pair has both a prediction and ground truth");
  return result;
}

LabelComparison compare_label_sets(const LabelSet& reference, const LabelSet& prediction) {
  LabelComparison out{ConfusionMatrix::empty(k_difficulty_classes), {}, 0, 0};
  for (const auto& [qid, level] : reference.labels) {
    auto it = prediction.labels.find(qid);
    if (it == prediction.labels.end()) {
      ++out.only_reference;
    } else {
      out.matrix.add(to_string(level), to_string(it->second));
    }
  }
  for (const auto& [qid, level] : prediction.labels) {
    if (!reference.labels.count(qid)) ++out.only_prediction;
  }
  if (out.matrix.total() == 0) {
    throw Error(ErrorKind::EmptyIntersection,
                reference.source.name() + " and " + prediction.source.name() + " share no labeled question");
  }
  out.report = metrics(out.matrix);
  return out;
}

std::string emit_chart_data(const CourseDataset& dataset, const LabelSet& labels) {
  std::map<Topic, std::array<std::size_t, 3>> rows;
  for (const auto& [qid, level] : labels.labels) {
    const auto* q = dataset.find_question(qid);
    if (!q) continue;
    ++rows[q->topic][static_cast<std::size_t>(level)];
  }
  std::string out = "topic,easy,medium,hard,total\n";
  for (const auto& [topic, c] : rows) {
    out += csv::format_row({topic, std::to_string(c[0]), std::to_string(c[1]), std::to_string(c[2]),
                            std::to_string(c[0] + c[1] + c[2])});
  }
  return out;
}

json to_json(const ConfusionMatrix& matrix) {
  return json{{"classes", matrix.classes}, {"counts", matrix.counts}, {"rows", "truth"}, {"columns", "prediction"}};
}

json to_json(const MetricsReport& report) {
  json per_class = json::array();
  for (const auto& m : report.per_class) {
    json flags = json::array();
    if (m.precision_undefined) flags.push_back("precision_zero_denominator");
    if (m.recall_undefined) flags.push_back("recall_zero_denominator");
    per_class.push_back({{"class", m.label},
                         {"precision", round6(m.precision)},
                         {"recall", round6(m.recall)},
                         {"f1", round6(m.f1)},
                         {"support", m.support},
                         {"tp", m.tp},
                         {"fp", m.fp},
                         {"fn", m.fn},
                         {"tn", m.tn},
                         {"flags", flags}});
  }
  return json{{"n", report.n},
              {"accuracy", round6(report.accuracy)},
              {"macro_precision", round6(report.macro_precision)},
              {"macro_recall", round6(report.macro_recall)},
              {"macro_f1", round6(report.macro_f1)},
              {"averaging", "macro"},
              {"per_class", per_class}};
}

}  // namespace align
