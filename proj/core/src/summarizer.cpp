#include "align/summarizer.hpp"

#include <regex>
#include <set>

#include "align/error.hpp"
#include "align/text.hpp"

namespace align {

std::string_view section_title(std::string_view key) noexcept {
  if (key == "overall_trends") return "Overall Performance Trends";
  if (key == "topic_insights") return "Topic-Specific Insights";
  if (key == "concept_gaps") return "Concept-Level Skill Gaps";
  if (key == "actionable_guidance") return "Actionable Guidance";
  if (key == "motivational_support") return "Motivational Support";
  return "";
}

const std::string& StudentSummary::section(std::string_view key) const {
  for (const auto& [k, v] : sections) {
    if (k == key) return v;
  }
  throw Error(ErrorKind::MissingSection, std::string(key));
}

std::vector<std::string> find_urls(std::string_view s) {
  static const std::regex re(R"(https?://[^\s<>()\[\]"']+)");
  std::vector<std::string> urls;
  std::string str(s);
  for (auto it = std::sregex_iterator(str.begin(), str.end(), re); it != std::sregex_iterator(); ++it) {
    auto url = it->str();
    while (!url.empty() && (url.back() == '.' || url.back() == ',' || url.back() == ';' || url.back() == ':')) url.pop_back();
    urls.push_back(url);
  }
  return urls;
}

namespace {

std::string rho_text(double rho) { return text::fixed(rho, 2); }

std::string template_overall(const SummaryInputs& in) {
  const auto& gaps = in.report.gaps;
  std::string out;
  if (in.proficiency) {
    std::size_t high = 0, medium = 0, low = 0, unknown = 0;
    const TopicProficiency* best = nullptr;
    for (const auto& [topic, tp] : in.proficiency->entries) {
      switch (tp.band) {
        case Band::High: ++high; break;
        case Band::Medium: ++medium; break;
        case Band::Low: ++low; break;
        case Band::Unknown: ++unknown; break;
      }
      if (tp.evidence_count > 0 && (!best || tp.rho > best->rho)) best = &tp;
    }
    auto assessed = in.proficiency->entries.size() - unknown;
    out = "Quiz evidence covers " + std::to_string(assessed) + " of " + std::to_string(in.proficiency->entries.size()) +
          " course topics: " + std::to_string(high) + " High, " + std::to_string(medium) + " Medium and " +
          std::to_string(low) + " Low.";
    if (best) out += " Strongest topic so far: " + best->topic + " (" + rho_text(best->rho) + ").";
    out += " ";
  }
  if (gaps.empty()) {
    out += "No topic falls below the mastery threshold of " + rho_text(in.report.tau_used) + ".";
  } else {
    out += std::to_string(gaps.size()) + " topic(s) fall below the mastery threshold of " + rho_text(in.report.tau_used) +
           "; the most pressing is " + gaps.front().first.topic + " (" + rho_text(gaps.front().first.rho) + ").";
  }
  return out;
}

std::string template_topics(const SummaryInputs& in) {
  std::string out;
  if (in.proficiency) {
    for (const auto& [topic, tp] : in.proficiency->entries) {
      if (tp.band == Band::Unknown) {
        out += "- " + topic + ": no quiz evidence yet.\n";
      } else {
        out += "- " + topic + ": " + std::string(to_string(tp.band)) + " (" + rho_text(tp.rho) + " across " +
               std::to_string(tp.evidence_count) + " graded item(s))" +
               (tp.band == Band::High ? ", a demonstrated strength.\n" : tp.band == Band::Medium ? ", partly secure.\n" : ", needs more practice.\n");
      }
    }
  } else if (in.report.gaps.empty()) {
    out = "All assessed topics are at or above the mastery threshold.\n";
  } else {
    for (const auto& [gap, d] : in.report.gaps) out += "- " + gap.topic + ": needs more practice (" + rho_text(gap.rho) + ").\n";
  }
  return text::trim(out);
}

std::string template_gaps(const SummaryInputs& in) {
  if (in.report.gaps.empty()) {
    return "No skill gaps were detected at the mastery threshold of " + rho_text(in.report.tau_used) + ".";
  }
  std::string out;
  for (const auto& [gap, d] : in.report.gaps) {
    out += "- " + gap.topic + " (proficiency " + rho_text(gap.rho) + "):\n";
    for (const auto& s : d.statements) out += "  - " + s + "\n";
  }
  return text::trim(out);
}

std::string template_guidance(const SummaryInputs& in) {
  const auto& resources = in.recommendations.resources;
  if (!resources.empty()) {
    std::string out;
    for (const auto& r : resources) {
      out += "- For " + r.topic + ", work through \"" + r.title + "\" (" + std::string(to_string(r.modality)) + "): " + r.url + "\n";
    }
    return text::trim(out);
  }
  if (!in.report.gaps.empty()) {
    std::string topics;
    for (const auto& [gap, d] : in.report.gaps) topics += (topics.empty() ? "" : ", ") + gap.topic;
    return "No external resource passed the link and preference checks this cycle. Revisit the course materials and "
           "practice questions for: " + topics + ".";
  }
  return "Keep practicing with the upcoming quizzes to maintain your current level of mastery.";
}

std::string template_motivation(const SummaryInputs& in) {
  bool self_paced = in.preferences.pacing == Pacing::SelfPaced;
  if (in.report.gaps.empty()) {
    return "Your quiz results show solid command of the material so far. Keep the same study routine as new topics arrive.";
  }
  std::string out = "Each gap listed here is specific and fixable, and closing the first one will make the others easier. ";
  out += self_paced ? "Work through the suggested material at your own pace, one topic at a time."
                    : "Fit the suggested material into the course schedule before the next topic is introduced.";
  return out;
}

void check_same_student(const SummaryInputs& in) {
  const auto& s = in.report.student;
  if (in.recommendations.student != s || in.preferences.student != s || (in.proficiency && in.proficiency->student != s)) {
    throw Error(ErrorKind::StudentMismatch, "summary inputs belong to different students (report " + s.value + ")");
  }
}

std::string agent_prompt(const SummaryInputs& in, const PromptLibrary& prompts) {
  std::string proficiency;
  if (in.proficiency) {
    for (const auto& [topic, tp] : in.proficiency->entries) {
      proficiency += "- " + topic + ": " + std::string(to_string(tp.band)) +
                     (tp.evidence_count ? " (" + rho_text(tp.rho) + ")" : std::string()) + "\n";
    }
  } else {
    proficiency = "(not provided)\n";
  }
  std::string gaps;
  for (const auto& [gap, d] : in.report.gaps) {
    gaps += std::to_string(gap.rank) + ". " + gap.topic + " (" + rho_text(gap.rho) + ")\n";
    for (const auto& s : d.statements) gaps += "   - " + s + "\n";
  }
  if (gaps.empty()) gaps = "(none)\n";
  std::string resources;
  for (const auto& r : in.recommendations.resources) {
    resources += "- " + r.title + " | " + r.url + " | topic: " + r.topic + " | format: " + std::string(to_string(r.modality)) + "\n";
  }
  if (resources.empty()) resources = "(none)\n";
  std::string prefs = std::string(to_string(in.preferences.pacing)) + " pacing; formats: ";
  for (std::size_t i = 0; i < in.preferences.ranked_modalities.size(); ++i) {
    prefs += (i ? ", " : "") + std::string(to_string(in.preferences.ranked_modalities[i]));
  }
  if (!in.preferences.feedback_style.empty()) prefs += "; feedback: " + in.preferences.feedback_style;
  return render(prompts.get("summarize"),
                {{"proficiency", proficiency}, {"gaps", gaps}, {"resources", resources}, {"preferences", prefs}})
      .text;
}

}  // namespace

std::optional<StudentSummary> parse_summary_reply(std::string_view reply, const StudentId& student,
                                                  const RecommendationSet& recommendations, std::string& why) {
  static const std::regex heading(R"(^\s*#{1,3}\s*([a-z_]+)\s*:?\s*$)", std::regex::icase);
  std::map<std::string, std::string> found;
  std::optional<std::string> current;
  for (const auto& line : text::split(reply, '\n')) {
    std::smatch m;
    if (std::regex_match(line, m, heading)) {
      auto key = text::to_lower(m[1].str());
      bool known = false;
      for (auto k : k_summary_sections) known = known || k == key;
      if (known) {
        if (found.count(key)) {
          why = "section " + key + " appears twice";
          return std::nullopt;
        }
        found[key];
        current = key;
        continue;
      }
    }
    if (current) found[*current] += line + "\n";
  }

  StudentSummary summary;
  summary.student = student;
  for (auto key : k_summary_sections) {
    auto it = found.find(std::string(key));
    if (it == found.end() || text::trim(it->second).empty()) {
      why = "missing or empty section " + std::string(key);
      return std::nullopt;
    }
    summary.sections.emplace_back(std::string(key), text::trim(it->second));
  }

  std::set<std::string> allowed;
  for (const auto& r : recommendations.resources) allowed.insert(r.url);
  auto urls = find_urls(summary.section("actionable_guidance"));
  bool cites_one = false;
  for (const auto& u : urls) {
    if (!allowed.count(u)) {
      why = "actionable_guidance cites " + u + " which was not recommended";
      return std::nullopt;
    }
    cites_one = true;
  }
  if (!allowed.empty() && !cites_one) {
    why = "actionable_guidance does not cite any recommended resource URL";
    return std::nullopt;
  }
  return summary;
}

StudentSummary summarize(const SummaryInputs& in, StageMode mode, Gateway* gateway, const PromptLibrary* prompts) {
  check_same_student(in);
  if (mode == StageMode::Agent) {
    if (!gateway || !prompts) throw Error(ErrorKind::ConfigError, "agent summaries need an LLM backend (--replay or live)");
    auto request = gateway->make_request(prompts->get("system").body, agent_prompt(in, *prompts));
    return complete_with_reprompt(
        *gateway, request,
        [&](const std::string& reply, std::string& why) {
          return parse_summary_reply(reply, in.report.student, in.recommendations, why);
        },
        ErrorKind::MissingSection,
        "Reply again with all five sections, each introduced by its '## <section_key>' heading line.");
  }

  StudentSummary s;
  s.student = in.report.student;
  s.sections = {{"overall_trends", template_overall(in)},
                {"topic_insights", template_topics(in)},
                {"concept_gaps", template_gaps(in)},
                {"actionable_guidance", template_guidance(in)},
                {"motivational_support", template_motivation(in)}};
  return s;
}

std::string render_summary_markdown(const StudentSummary& summary) {
  std::string out = "# Learner summary: " + summary.student.value + "\n";
  for (const auto& [key, body] : summary.sections) {
    out += "\n## " + std::string(section_title(key)) + "\n\n" + body + "\n";
  }
  return out;
}

}  // namespace align
