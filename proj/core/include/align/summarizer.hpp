#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "align/diagnosis.hpp"
#include "align/recommender.hpp"

namespace align {

/// Section keys, in the order every summary carries them.
inline constexpr std::array<std::string_view, 5> k_summary_sections = {
    "overall_trends", "topic_insights", "concept_gaps", "actionable_guidance", "motivational_support"};

std::string_view section_title(std::string_view key) noexcept;

struct StudentSummary {
  StudentId student;
  std::vector<std::pair<std::string, std::string>> sections;  // exactly the five keys, fixed order

  const std::string& section(std::string_view key) const;
};

struct SummaryInputs {
  const GapReport& report;
  const RecommendationSet& recommendations;
  const ExtractedPreferences& preferences;
  const ProficiencyVector* proficiency = nullptr;  // enables per-topic band insights
};

/// Template mode is a deterministic fill-in; agent mode parses the gateway reply into the five sections.
/// Errors: StudentMismatch; MissingSection (agent mode, after one reprompt).
StudentSummary summarize(const SummaryInputs& inputs, StageMode mode, Gateway* gateway = nullptr,
                         const PromptLibrary* prompts = nullptr);

/// Splits a reply on `## <key>` headings. Rejects missing, duplicated or empty sections, and guidance
/// that cites URLs outside `recommendations` (or none when resources exist).
std::optional<StudentSummary> parse_summary_reply(std::string_view reply, const StudentId& student,
                                                  const RecommendationSet& recommendations, std::string& why);

std::string render_summary_markdown(const StudentSummary& summary);

/// http(s) URLs appearing in `s`, in order.
std::vector<std::string> find_urls(std::string_view s);

}  // namespace align
