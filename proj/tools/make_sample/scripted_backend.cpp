#include "make_sample/scripted_backend.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <vector>

#include "align/text.hpp"

namespace align::tools {

namespace {

bool has(std::string_view s, std::string_view needle) { return s.find(needle) != std::string_view::npos; }

/// Lines following `heading` up to the next blank line.
std::vector<std::string> block_after(const std::string& prompt, std::string_view heading) {
  std::vector<std::string> out;
  auto pos = prompt.find(heading);
  if (pos == std::string::npos) return out;
  auto lines = text::split(std::string_view(prompt).substr(pos + heading.size()), '\n');
  bool started = false;
  for (const auto& line : lines) {
    auto t = text::trim(line);
    if (t.empty()) {
      if (started) break;
      continue;
    }
    started = true;
    out.push_back(line);
  }
  return out;
}

std::string line_value(const std::string& prompt, std::string_view prefix) {
  for (const auto& line : text::split(prompt, '\n')) {
    if (line.rfind(prefix, 0) == 0) return text::trim(std::string_view(line).substr(prefix.size()));
  }
  return {};
}

std::string diagnose_reply(const std::string& prompt, bool malformed) {
  auto topic = line_value(prompt, "Topic: ");
  static const std::regex id_re(R"(^- \[([^\]]+)\])");
  std::vector<std::string> ids;
  for (const auto& line : block_after(prompt, "incorrectly:")) {
    std::smatch m;
    if (std::regex_search(line, m, id_re)) ids.push_back(m[1].str());
  }
  std::string cited;
  for (const auto& id : ids) cited += (cited.empty() ? "" : ",") + id;

  std::vector<std::pair<std::string, int>> tags;
  static const std::regex tally_re(R"(^- (.+): (\d+)$)");
  for (const auto& line : block_after(prompt, "with miss counts:")) {
    std::smatch m;
    if (std::regex_match(line, m, tally_re)) tags.emplace_back(m[1].str(), std::stoi(m[2].str()));
  }
  std::stable_sort(tags.begin(), tags.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> statements;
  for (std::size_t i = 0; i < tags.size() && i < 2; ++i) {
    statements.push_back("Misapplies the idea of \"" + tags[i].first + "\" when working " + topic +
                         " problems, so answers that depend on it go wrong.");
  }
  for (const auto& line : block_after(prompt, "with counts:")) {
    std::smatch m;
    if (std::regex_match(line, m, tally_re) && std::stoi(m[2].str()) >= 2) {
      statements.push_back("Repeatedly picks \"" + m[1].str() + "\", which points to a settled misconception rather than a slip.");
    }
  }
  if (statements.empty()) statements.push_back("Has gaps in the core principles of " + topic + ".");

  std::string out;
  for (std::size_t i = 0; i < statements.size(); ++i) {
    out += std::to_string(i + 1) + ". " + statements[i];
    out += malformed ? "\n" : " [evidence: " + cited + "]\n";
  }
  return out;
}

std::string label_reply(const std::string& prompt) {
  auto question = text::to_lower(text::trim(block_after(prompt, "Question:").empty() ? "" : block_after(prompt, "Question:").front()));
  for (std::string_view hard : {"amortized", "cycle", "why must", "how many calls", "extra memory", "reverses"}) {
    if (has(question, hard)) return "Hard";
  }
  for (std::string_view medium : {"time complexity", "running time", "cost", "stable", "return", "depth", "load factor", "probe", "traversal"}) {
    if (has(question, medium)) return "Medium";
  }
  return "Easy";
}

std::string compat_reply(const std::string& prompt) {
  auto prefs = line_value(prompt, "Learner preferences: ");
  auto format = line_value(prompt, "Format: ");
  auto topic_line = line_value(prompt, "A learner has a skill gap in the topic ");
  auto formats_pos = prefs.find("most preferred first: ");
  std::vector<std::string> ranked;
  if (formats_pos != std::string::npos) {
    auto rest = prefs.substr(formats_pos + 22);
    rest = rest.substr(0, rest.find(';'));
    for (const auto& m : text::split(rest, ',')) ranked.push_back(text::trim(m));
  }
  std::map<std::string, std::vector<std::string>> serves = {{"video_page", {"video"}},
                                                            {"article", {"text_pdf"}},
                                                            {"pdf", {"text_pdf"}},
                                                            {"interactive", {"interactive", "hands_on"}}};
  for (std::size_t i = 0; i < ranked.size() && i < 2; ++i) {
    for (const auto& m : serves[format]) {
      if (m == ranked[i]) return "YES: a " + format + " resource suits a learner who prefers " + m + " material.";
    }
  }
  return "NO: the learner's top formats are " + (ranked.empty() ? std::string("unknown") : ranked[0]) +
         " and the resource is a " + format + ".";
}

std::string summarize_reply(const std::string& prompt) {
  struct Resource {
    std::string title, url, topic;
  };
  std::vector<Resource> resources;
  for (const auto& line : block_after(prompt, "Recommended resources:")) {
    auto parts = text::split(std::string_view(line).substr(2), '|');
    if (parts.size() < 3) continue;
    auto topic = text::trim(parts[2]);
    if (topic.rfind("topic: ", 0) == 0) topic = topic.substr(7);
    resources.push_back({text::trim(parts[0]), text::trim(parts[1]), topic});
  }
  std::vector<std::string> gaps;
  static const std::regex gap_re(R"(^\d+\. (.+) \(([0-9.]+)\)$)");
  for (const auto& line : block_after(prompt, "most severe first:")) {
    std::smatch m;
    if (std::regex_match(line, m, gap_re)) gaps.push_back(m[1].str() + " (" + m[2].str() + ")");
  }
  std::vector<std::string> strong;
  for (const auto& line : block_after(prompt, "Topic proficiency:")) {
    if (has(line, ": High")) strong.push_back(text::trim(std::string_view(line).substr(2, line.find(':') - 2)));
  }

  std::string out = "## overall_trends\n";
  out += gaps.empty() ? "Your quiz results are at or above the mastery threshold in every assessed topic.\n"
                      : "Most of your work is on track, with " + std::to_string(gaps.size()) +
                            " topic(s) still below the mastery threshold.\n";
  out += "\n## topic_insights\n";
  if (strong.empty()) {
    out += "No topic has reached the High band yet; steady practice will move several of them up.\n";
  } else {
    std::string list;
    for (const auto& s : strong) list += (list.empty() ? "" : ", ") + s;
    out += "Your strongest topics are " + list + ".\n";
  }
  out += "\n## concept_gaps\n";
  if (gaps.empty()) {
    out += "No skill gaps were detected.\n";
  } else {
    for (const auto& g : gaps) out += "- " + g + "\n";
  }
  out += "\n## actionable_guidance\n";
  if (resources.empty()) {
    out += "Review your course notes and retry the quiz questions you missed.\n";
  } else {
    for (const auto& r : resources) out += "- Work through " + r.title + " for " + r.topic + ": " + r.url + "\n";
  }
  out += "\n## motivational_support\n";
  out += "Each gap here is specific and fixable. Closing one topic at a time adds up quickly.\n";
  return out;
}

std::string preferences_reply(const std::string& prompt) {
  auto lines = block_after(prompt, "Their additional answers were:");
  std::string said = lines.empty() ? "" : text::trim(lines.front().substr(lines.front().find(':') + 1));
  return "The learner added: \"" + said + "\" Favor resources that address this directly.";
}

}  // namespace

AgentResponse ScriptedChatBackend::send(const AgentRequest& request, const std::string&) {
  const auto& user = request.user_text;
  std::string reply;
  if (has(user, "Write concept-level diagnostic statements")) {
    bool retry = has(user, "Your previous reply was:");
    bool malformed = !retry && !malformed_topic_.empty() && line_value(user, "Topic: ") == malformed_topic_;
    reply = diagnose_reply(user, malformed);
  } else if (has(user, "Classify the difficulty")) {
    reply = label_reply(user);
  } else if (has(user, "Candidate resource")) {
    reply = compat_reply(user);
  } else if (has(user, "Use exactly these five sections")) {
    reply = summarize_reply(user);
  } else if (has(user, "learning-preferences survey")) {
    reply = preferences_reply(user);
  } else {
    reply = "I cannot help with that request.";
  }
  return {reply, request.model_id};
}

}  // namespace align::tools
