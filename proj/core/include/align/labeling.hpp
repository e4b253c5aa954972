#pragma once

#include <map>
#include <string>
#include <vector>

#include "align/gateway.hpp"
#include "align/learner_data.hpp"

namespace align {

/// "instructor" or "model:<model_id>".
struct LabelSource {
  enum class Kind { Instructor, Model } kind = Kind::Instructor;
  std::string model_id;

  std::string name() const;
  friend bool operator==(const LabelSource&, const LabelSource&) = default;
};

struct DifficultyLabel {
  std::string question_id;
  Difficulty level = Difficulty::Medium;
  LabelSource source;
};

struct LabelFailure {
  std::string question_id;
  std::string error;
};

struct LabelSet {
  LabelSource source;
  std::map<std::string, Difficulty> labels;  // question_id -> level
  double coverage = 0.0;                     // labeled / bank size; 0 for an empty bank
  std::vector<LabelFailure> failures;
};

LabelSet load_instructor_labels(const std::vector<QuizQuestion>& questions);

/// First case-insensitive whole-word occurrence of easy/medium/hard in `reply`.
std::optional<Difficulty> canonicalize_level(std::string_view reply);

/// Only the question's own text, options and topic are bound into the prompt.
std::string render_label_prompt(const QuizQuestion& question, const PromptLibrary& prompts);

/// Errors: UnparseableLabel after one reprompt, BackendUnavailable, ReplayMiss.
DifficultyLabel label_with_model(const QuizQuestion& question, Gateway& gateway, const PromptLibrary& prompts);

/// Labels in question_id order; per-question failures are recorded, not thrown.
LabelSet label_bank(const std::vector<QuizQuestion>& questions, Gateway& gateway, const PromptLibrary& prompts);

std::string serialize_label_set(const LabelSet& set);
LabelSet parse_label_set(std::string_view raw);

}  // namespace align
