#include "align/diagnosis.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <unordered_map>

#include "align/error.hpp"
#include "align/text.hpp"

namespace align {

std::string_view to_string(StageMode mode) noexcept { return mode == StageMode::Rule ? "rule" : "agent"; }

std::optional<StageMode> parse_stage_mode(std::string_view s) noexcept {
  if (s == "rule" || s == "template") return StageMode::Rule;
  if (s == "agent") return StageMode::Agent;
  return std::nullopt;
}

std::vector<Modality> ExtractedPreferences::top(std::size_t n) const {
  return {ranked_modalities.begin(), ranked_modalities.begin() + static_cast<std::ptrdiff_t>(std::min(n, ranked_modalities.size()))};
}

ExtractedPreferences default_preferences(const StudentId& student) {
  ExtractedPreferences p;
  p.student = student;
  p.ranked_modalities.assign(std::begin(k_all_modalities), std::end(k_all_modalities));
  return p;
}

ExtractedPreferences extract_preferences(const PreferenceSurvey& survey, StageMode mode, Gateway* gateway,
                                         const PromptLibrary* prompts) {
  ExtractedPreferences p;
  p.student = survey.student;
  p.pacing = survey.pacing;
  p.ranked_modalities = survey.modality_ranking;
  p.feedback_style = survey.feedback_preference;
  if (survey.free_text.empty()) return p;

  if (mode == StageMode::Rule) {
    for (const auto& [item, answer] : survey.free_text) {
      if (!p.notes.empty()) p.notes += "; ";
      p.notes += item + ": " + answer;
    }
    return p;
  }

  if (!gateway || !prompts) throw Error(ErrorKind::ConfigError, "agent preference extraction needs a gateway");
  std::string lines;
  for (const auto& [item, answer] : survey.free_text) lines += "- " + item + ": " + answer + "\n";
  auto user = render(prompts->get("preferences"), {{"free_text", lines}}).text;
  p.notes = text::trim(gateway->complete(gateway->make_request(prompts->get("system").body, user)).text);
  return p;
}

DiagnosisEvidence assemble_evidence(const CourseDataset& dataset, const StudentId& student, const Topic& topic,
                                    bool include_exams) {
  std::unordered_map<std::string, const QuizQuestion*> by_id;
  for (const auto& q : dataset.questions) {
    if (q.topic == topic) by_id.emplace(q.question_id, &q);
  }

  DiagnosisEvidence ev;
  ev.student = student;
  ev.topic = topic;
  for (const auto& r : dataset.responses) {
    if (r.student != student) continue;
    auto it = by_id.find(r.question_id);
    if (it == by_id.end()) continue;
    const auto& q = *it->second;
    if (!include_exams && dataset.is_exam(q.quiz_id)) continue;
    if (q.is_correct(r.selected_answer)) continue;

    ev.missed_questions.push_back({q.question_id, q.text, q.correct_answer, r.selected_answer, q.kind, q.concept_tags});
    if (q.kind == QuestionKind::MultipleChoice) ++ev.distractor_counts[text::trim(r.selected_answer)];
    for (const auto& tag : q.concept_tags) ++ev.concept_tag_misses[tag];
  }
  return ev;
}

std::optional<ConceptDiagnosis> parse_diagnosis_reply(std::string_view reply, const DiagnosisEvidence& evidence,
                                                      std::string& why) {
  static const std::regex line_re(R"(^\s*\d+[.)]\s+(.*\S)\s*\[\s*evidence\s*:\s*([^\]]*)\]\s*$)", std::regex::icase);
  std::set<std::string> known;
  for (const auto& m : evidence.missed_questions) known.insert(m.question_id);

  ConceptDiagnosis d;
  d.topic = evidence.topic;
  std::set<std::string> cited;
  for (const auto& raw_line : text::split(reply, '\n')) {
    auto line = text::trim(raw_line);
    if (line.empty()) continue;
    std::smatch m;
    if (!std::regex_match(line, m, line_re)) {
      why = "line is not '<n>. <statement> [evidence: <ids>]': " + line;
      return std::nullopt;
    }
    auto statement = text::trim(m[1].str());
    if (statement.empty()) {
      why = "empty statement";
      return std::nullopt;
    }
    std::size_t ids_on_line = 0;
    for (const auto& raw_id : text::split(m[2].str(), ',')) {
      auto id = text::trim(raw_id);
      if (id.empty()) continue;
      if (!known.count(id)) {
        why = "cites question " + id + " which is not among the missed questions";
        return std::nullopt;
      }
      ++ids_on_line;
      if (cited.insert(id).second) d.evidence_refs.push_back(id);
    }
    if (ids_on_line == 0) {
      why = "statement cites no question id: " + line;
      return std::nullopt;
    }
    d.statements.push_back(statement);
  }
  if (d.statements.empty()) {
    why = "no numbered statements";
    return std::nullopt;
  }
  return d;
}

std::string render_diagnosis_prompt(const DiagnosisEvidence& evidence, const PromptLibrary& prompts) {
  std::string missed;
  for (const auto& m : evidence.missed_questions) {
    missed += "- [" + m.question_id + "] " + m.text + "\n  Learner answered: " + m.selected_answer +
              " | Correct answer: " + m.correct_answer + "\n";
  }
  auto tally = [](const std::map<std::string, std::size_t>& counts) {
    if (counts.empty()) return std::string("(none)\n");
    std::string out;
    for (const auto& [k, n] : counts) out += "- " + k + ": " + std::to_string(n) + "\n";
    return out;
  };
  return render(prompts.get("diagnose"), {{"topic", evidence.topic},
                                          {"missed_questions", missed},
                                          {"distractor_counts", tally(evidence.distractor_counts)},
                                          {"concept_tags", tally(evidence.concept_tag_misses)}})
      .text;
}

ConceptDiagnosis diagnose(const DiagnosisEvidence& evidence, Gateway& gateway, const PromptLibrary& prompts) {
  if (evidence.missed_questions.empty()) throw Error(ErrorKind::EmptyEvidence, evidence.topic);
  auto request = gateway.make_request(prompts.get("system").body, render_diagnosis_prompt(evidence, prompts));
  return complete_with_reprompt(
      gateway, request,
      [&](const std::string& reply, std::string& why) { return parse_diagnosis_reply(reply, evidence, why); },
      ErrorKind::UnparseableDiagnosis,
      "Reply again as a numbered list where every line is '<n>. <statement> [evidence: <question_id>,...]' citing only "
      "the question ids listed above.");
}

ConceptDiagnosis diagnose_by_rules(const DiagnosisEvidence& evidence) {
  if (evidence.missed_questions.empty()) throw Error(ErrorKind::EmptyEvidence, evidence.topic);

  ConceptDiagnosis d;
  d.topic = evidence.topic;
  std::set<std::string> cited;
  auto cite = [&](const std::vector<std::string>& ids) {
    for (const auto& id : ids) {
      if (cited.insert(id).second) d.evidence_refs.push_back(id);
    }
  };

  std::vector<std::pair<std::string, std::size_t>> tags(evidence.concept_tag_misses.begin(), evidence.concept_tag_misses.end());
  std::stable_sort(tags.begin(), tags.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (std::size_t i = 0; i < tags.size() && i < 3; ++i) {
    const auto& [tag, n] = tags[i];
    std::vector<std::string> ids;
    for (const auto& m : evidence.missed_questions) {
      if (std::find(m.concept_tags.begin(), m.concept_tags.end(), tag) != m.concept_tags.end()) ids.push_back(m.question_id);
    }
    d.statements.push_back("Missed " + std::to_string(n) + " question(s) tagged '" + tag +
                           "', indicating an incomplete grasp of this concept.");
    cite(ids);
  }

  for (const auto& [option, n] : evidence.distractor_counts) {
    if (n < 2) continue;
    std::vector<std::string> ids;
    for (const auto& m : evidence.missed_questions) {
      if (m.kind == QuestionKind::MultipleChoice && text::trim(m.selected_answer) == option) ids.push_back(m.question_id);
    }
    d.statements.push_back("Selected the incorrect option '" + option + "' " + std::to_string(n) +
                           " times, pointing to a consistent misconception rather than isolated slips.");
    cite(ids);
  }

  if (d.statements.empty()) {
    std::vector<std::string> ids;
    for (const auto& m : evidence.missed_questions) ids.push_back(m.question_id);
    d.statements.push_back("Missed " + std::to_string(ids.size()) + " question(s) on " + evidence.topic +
                           " without a repeated pattern; the core principles of the topic need review.");
    cite(ids);
  }
  return d;
}

GapReport build_gap_report(const std::vector<SkillGapEntry>& gaps, const std::vector<ConceptDiagnosis>& diagnoses,
                           double tau, const StudentId& student, std::chrono::system_clock::time_point generated_at) {
  if (gaps.size() != diagnoses.size()) {
    throw Error(ErrorKind::CountMismatch,
                std::to_string(gaps.size()) + " gaps but " + std::to_string(diagnoses.size()) + " diagnoses");
  }
  GapReport report;
  report.student = student;
  report.tau_used = tau;
  report.generated_at = generated_at;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (gaps[i].topic != diagnoses[i].topic) {
      throw Error(ErrorKind::CountMismatch, "diagnosis " + std::to_string(i) + " is for '" + diagnoses[i].topic +
                                                "' but gap is '" + gaps[i].topic + "'");
    }
    report.gaps.emplace_back(gaps[i], diagnoses[i]);
  }
  return report;
}

GapReport diagnose_gaps(const CourseDataset& dataset, const StudentProficiency& proficiency, double tau,
                        const DiagnosisOptions& options, Gateway* gateway, const PromptLibrary& prompts,
                        std::chrono::system_clock::time_point generated_at) {
  std::vector<ConceptDiagnosis> diagnoses;
  for (const auto& gap : proficiency.gaps) {
    auto evidence = assemble_evidence(dataset, proficiency.vector.student, gap.topic, options.include_exams);
    if (evidence.missed_questions.empty()) {
      diagnoses.push_back({gap.topic, {std::string(k_insufficient_evidence)}, {}});
    } else if (options.mode == StageMode::Agent) {
      if (!gateway) throw Error(ErrorKind::ConfigError, "agent diagnosis needs an LLM backend (--replay or live)");
      diagnoses.push_back(diagnose(evidence, *gateway, prompts));
    } else {
      diagnoses.push_back(diagnose_by_rules(evidence));
    }
  }
  return build_gap_report(proficiency.gaps, diagnoses, tau, proficiency.vector.student, generated_at);
}

}  // namespace align
