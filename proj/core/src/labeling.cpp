#include "align/labeling.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>

#include "align/error.hpp"
#include "align/text.hpp"

namespace align {

using nlohmann::json;

std::string LabelSource::name() const {
  return kind == Kind::Instructor ? std::string("instructor") : "model:" + model_id;
}

namespace {

double coverage_of(std::size_t labeled, std::size_t total) {
  return total == 0 ? 0.0 : static_cast<double>(labeled) / static_cast<double>(total);
}

}  // namespace

LabelSet load_instructor_labels(const std::vector<QuizQuestion>& questions) {
  LabelSet set;
  set.source = LabelSource{};
  for (const auto& q : questions) {
    if (q.instructor_difficulty) set.labels[q.question_id] = *q.instructor_difficulty;
  }
  set.coverage = coverage_of(set.labels.size(), questions.size());
  return set;
}

std::optional<Difficulty> canonicalize_level(std::string_view reply) {
  auto lower = text::to_lower(reply);
  auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  std::size_t best = std::string::npos;
  std::optional<Difficulty> found;
  for (auto level : {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard}) {
    auto word = text::to_lower(to_string(level));
    for (auto pos = lower.find(word); pos != std::string::npos; pos = lower.find(word, pos + 1)) {
      bool left = pos == 0 || !is_word(lower[pos - 1]);
      bool right = pos + word.size() >= lower.size() || !is_word(lower[pos + word.size()]);
      if (left && right) {
        if (pos < best) {
          best = pos;
          found = level;
        }
        break;
      }
    }
  }
  return found;
}

std::string render_label_prompt(const QuizQuestion& question, const PromptLibrary& prompts) {
  std::string options;
  if (question.options.empty()) {
    options = "(short answer; no choices)\n";
  } else {
    for (std::size_t i = 0; i < question.options.size(); ++i) options += "- " + question.options[i] + "\n";
  }
  return render(prompts.get("label"), {{"topic", question.topic}, {"question_text", question.text}, {"options", options}})
      .text;
}

DifficultyLabel label_with_model(const QuizQuestion& question, Gateway& gateway, const PromptLibrary& prompts) {
  auto request = gateway.make_request(prompts.get("system").body, render_label_prompt(question, prompts));
  auto level = complete_with_reprompt(
      gateway, request,
      [](const std::string& reply, std::string& why) {
        auto l = canonicalize_level(reply);
        if (!l) why = "no difficulty level word in '" + text::trim(reply) + "'";
        return l;
      },
      ErrorKind::UnparseableLabel, "Reply with exactly one word: Easy, Medium, or Hard.");
  return DifficultyLabel{question.question_id, level, LabelSource{LabelSource::Kind::Model, gateway.model_id()}};
}

LabelSet label_bank(const std::vector<QuizQuestion>& questions, Gateway& gateway, const PromptLibrary& prompts) {
  LabelSet set;
  set.source = LabelSource{LabelSource::Kind::Model, gateway.model_id()};
  std::vector<const QuizQuestion*> ordered;
  for (const auto& q : questions) ordered.push_back(&q);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->question_id < b->question_id; });
  for (const auto* q : ordered) {
    try {
      set.labels[q->question_id] = label_with_model(*q, gateway, prompts).level;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NonZeroTemperature) throw;
      set.failures.push_back({q->question_id, e.what()});
    }
  }
  set.coverage = coverage_of(set.labels.size(), questions.size());
  return set;
}

std::string serialize_label_set(const LabelSet& set) {
  json labels = json::object();
  for (const auto& [qid, level] : set.labels) labels[qid] = to_string(level);
  json failures = json::array();
  for (const auto& f : set.failures) failures.push_back({{"question_id", f.question_id}, {"error", f.error}});
  json doc = {{"source", set.source.name()}, {"coverage", set.coverage}, {"labels", labels}, {"failures", failures}};
  return doc.dump(2) + "\n";
}

LabelSet parse_label_set(std::string_view raw) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("label set: ") + e.what());
  }
  LabelSet set;
  auto source = doc.value("source", std::string("instructor"));
  if (source.rfind("model:", 0) == 0) set.source = LabelSource{LabelSource::Kind::Model, source.substr(6)};
  set.coverage = doc.value("coverage", 0.0);
  if (!doc.contains("labels") || !doc["labels"].is_object()) throw Error(ErrorKind::SchemaError, "label set: missing labels");
  for (const auto& [qid, level] : doc["labels"].items()) {
    auto parsed = level.is_string() ? parse_difficulty(level.get<std::string>()) : std::nullopt;
    if (!parsed) throw Error(ErrorKind::SchemaError, "label set: bad level for " + qid);
    set.labels[qid] = *parsed;
  }
  if (doc.contains("failures")) {
    for (const auto& f : doc["failures"]) set.failures.push_back({f.value("question_id", ""), f.value("error", "")});
  }
  return set;
}

}  // namespace align
