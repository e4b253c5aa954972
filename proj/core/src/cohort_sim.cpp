#include "align/cohort_sim.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "align/error.hpp"
#include "align/evaluation.hpp"

namespace align {

namespace sim_rng {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) {
  // Largest multiple of n that fits, so every residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    std::uint64_t x = rng();
    if (x < limit) return x % n;
  }
}

}  // namespace sim_rng

double difficulty_penalty(Difficulty level) noexcept {
  switch (level) {
    case Difficulty::Easy: return 0.0;
    case Difficulty::Medium: return 0.1;
    case Difficulty::Hard: return 0.2;
  }
  return 0.0;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
  if (n_students == 0) fail("n_students must be positive");
  if (n_topics == 0) fail("n_topics must be positive");
  if (n_topics > 99) fail("n_topics must be at most 99");
  if (n_students > 9999) fail("n_students must be at most 9999");
  if (questions_per_topic == 0) fail("questions_per_topic must be positive");
  if (exam_questions_per_topic == 0) fail("exam_questions_per_topic must be positive");
  if (!(noise >= 0.0 && noise <= 0.5)) fail("noise must be in [0, 0.5]");
  const auto& m = difficulty_mix;
  if (!(m.easy >= 0 && m.medium >= 0 && m.hard >= 0)) fail("difficulty_mix proportions must be non-negative");
  if (std::fabs(m.easy + m.medium + m.hard - 1.0) > 1e-9) fail("difficulty_mix proportions must sum to 1");
  if (!(margin_tau >= 0.0 && margin_tau <= 1.0)) fail("margin_tau must be in [0, 1]");
  if (!(mastery_margin >= 0.0)) fail("mastery_margin must be non-negative");
  double lo = std::max(0.0, margin_tau - mastery_margin), hi = std::min(1.0, margin_tau + mastery_margin);
  if (mastery_margin > 0 && lo <= 0.0 && hi >= 1.0) fail("mastery_margin leaves no admissible mastery values");
  if (fixed_mastery && !(*fixed_mastery >= 0.0 && *fixed_mastery <= 1.0)) fail("fixed_mastery must be in [0, 1]");
}

namespace {

using Rng = std::mt19937_64;

/// Largest-remainder apportionment of `n` items over the mix, then a Fisher-Yates shuffle.
std::vector<Difficulty> assign_difficulties(std::size_t n, const DifficultyMix& mix, Rng& rng) {
  const double shares[3] = {mix.easy, mix.medium, mix.hard};
  std::size_t counts[3];
  double remainders[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double exact = shares[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainders[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (remainders[i] > remainders[best]) best = i;
    }
    ++counts[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  std::vector<Difficulty> out;
  for (int i = 0; i < 3; ++i) out.insert(out.end(), counts[i], static_cast<Difficulty>(i));
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[sim_rng::below(rng, i)]);
  return out;
}

double draw_mastery(const SimConfig& c, Rng& rng) {
  if (c.fixed_mastery) return *c.fixed_mastery;
  if (c.mastery_margin <= 0.0) return sim_rng::uniform01(rng);
  double lo = std::max(0.0, c.margin_tau - c.mastery_margin);
  double hi = std::min(1.0, c.margin_tau + c.mastery_margin);
  double below_len = lo, above_len = 1.0 - hi;
  double x = sim_rng::uniform01(rng) * (below_len + above_len);
  if (x < below_len) return x;
  // (hi, 1]: avoid returning exactly hi.
  double v = hi + (x - below_len);
  return v <= hi ? std::nextafter(hi, 2.0) : std::min(v, 1.0);
}

std::string two_digit(std::size_t i) {
  auto s = std::to_string(i);
  return s.size() < 2 ? "0" + s : s;
}

struct SimQuestion {
  QuizQuestion question;
  Difficulty difficulty;
};

const std::vector<std::string> k_options{"A", "B", "C", "D"};
const char* const k_assessment_prefs[] = {"frequent short quizzes", "projects", "written exams"};
const char* const k_feedback_prefs[] = {"detailed written comments", "worked examples", "brief hints"};
const char* const k_study_times[] = {"mornings", "evenings", "weekends"};

/// Simulates one (student, topic) block of items; returns the per-item correctness.
std::vector<bool> simulate_block(const std::vector<const SimQuestion*>& items, double mastery, double noise, Rng& rng) {
  double u = sim_rng::uniform01(rng);
  double running = 0.0;
  std::vector<bool> correct;
  correct.reserve(items.size());
  for (const auto* item : items) {
    double jitter = noise > 0.0 ? (2.0 * sim_rng::uniform01(rng) - 1.0) * noise : 0.0;
    double p = std::clamp(mastery - difficulty_penalty(item->difficulty) + jitter, 0.0, 1.0);
    double before = std::floor(running + u);
    running += p;
    correct.push_back(std::floor(running + u) > before);
  }
  return correct;
}

}  // namespace

SimulatedCohort generate_cohort(const SimConfig& config) {
  config.validate();
  Rng rng(config.seed);

  SimulatedCohort out;
  auto& ds = out.dataset;
  ds.course_id = "sim-" + std::to_string(config.seed);
  ds.exam_assessment_ids = {"midterm", "final"};

  // Course content: per topic, quiz items then exam items; exams split between midterm and final.
  std::vector<Topic> topics;
  std::map<Topic, std::vector<SimQuestion>> quiz_items, exam_items;
  for (std::size_t t = 1; t <= config.n_topics; ++t) {
    Topic topic = "topic_" + two_digit(t);
    topics.push_back(topic);
    ds.topics.insert(topic);
    auto make = [&](std::size_t n, bool exam) {
      auto levels = assign_difficulties(n, config.difficulty_mix, rng);
      std::vector<SimQuestion> qs;
      for (std::size_t j = 0; j < n; ++j) {
        QuizQuestion q;
        q.question_id = "t" + two_digit(t) + (exam ? "_x" : "_q") + two_digit(j + 1);
        q.quiz_id = exam ? (j < (n + 1) / 2 ? "midterm" : "final") : "quiz_" + topic;
        q.topic = topic;
        q.kind = QuestionKind::MultipleChoice;
        std::string concept_tag = "concept_" + two_digit(t) + "_" + std::to_string(j % 3 + 1);
        q.text = "Which option correctly applies " + concept_tag + " in " + topic + " (item " + std::to_string(j + 1) + ")?";
        q.options = k_options;
        q.correct_answer = k_options[sim_rng::below(rng, k_options.size())];
        q.concept_tags = {concept_tag};
        q.instructor_difficulty = levels[j];
        qs.push_back({q, levels[j]});
      }
      return qs;
    };
    quiz_items[topic] = make(config.questions_per_topic, false);
    exam_items[topic] = make(config.exam_questions_per_topic, true);
    for (const auto& q : quiz_items[topic]) ds.questions.push_back(q.question);
    for (const auto& q : exam_items[topic]) ds.questions.push_back(q.question);
  }

  for (std::size_t s = 1; s <= config.n_students; ++s) {
    auto digits = std::to_string(s);
    LatentProfile latent;
    latent.student = StudentId{"s" + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits};
    ds.students.insert(latent.student);

    for (const auto& topic : topics) latent.mastery[topic] = draw_mastery(config, rng);

    auto& pref = latent.preference;
    pref.student = latent.student;
    pref.pacing = sim_rng::below(rng, 2) == 0 ? Pacing::SelfPaced : Pacing::InstructorPaced;
    pref.modality_ranking.assign(std::begin(k_all_modalities), std::end(k_all_modalities));
    for (std::size_t i = pref.modality_ranking.size(); i > 1; --i) {
      std::swap(pref.modality_ranking[i - 1], pref.modality_ranking[sim_rng::below(rng, i)]);
    }
    pref.assessment_preference = k_assessment_prefs[sim_rng::below(rng, 3)];
    pref.feedback_preference = k_feedback_prefs[sim_rng::below(rng, 3)];
    pref.study_time = k_study_times[sim_rng::below(rng, 3)];
    ds.surveys.push_back(pref);

    for (const auto& topic : topics) {
      double mastery = latent.mastery[topic];
      // assessment_id -> (earned, possible), in first-seen order for stable output
      std::vector<std::pair<std::string, std::pair<double, double>>> totals;
      auto tally = [&](const std::string& assessment, bool ok) {
        auto it = std::find_if(totals.begin(), totals.end(), [&](const auto& e) { return e.first == assessment; });
        if (it == totals.end()) {
          totals.push_back({assessment, {0.0, 0.0}});
          it = std::prev(totals.end());
        }
        it->second.first += ok ? 1.0 : 0.0;
        it->second.second += 1.0;
      };
      for (const auto* block : {&quiz_items[topic], &exam_items[topic]}) {
        std::vector<const SimQuestion*> items;
        for (const auto& q : *block) items.push_back(&q);
        auto correct = simulate_block(items, mastery, config.noise, rng);
        for (std::size_t j = 0; j < items.size(); ++j) {
          const auto& q = items[j]->question;
          std::string answer = q.correct_answer;
          if (!correct[j]) {
            std::vector<std::string> wrong;
            for (const auto& o : q.options) {
              if (o != q.correct_answer) wrong.push_back(o);
            }
            answer = wrong[sim_rng::below(rng, wrong.size())];
          }
          ds.responses.push_back({latent.student, q.question_id, answer, correct[j] ? 1.0 : 0.0, 1.0});
          tally(q.quiz_id, correct[j]);
        }
      }
      for (const auto& [assessment, ep] : totals) {
        ds.gradebook.push_back({latent.student, assessment, topic, ep.first, ep.second, ep.first / ep.second});
      }
    }
    out.latents.push_back(std::move(latent));
  }
  return out;
}

RecoveryReport recovery_report(const CourseDataset& dataset, const std::vector<LatentProfile>& latents, double tau,
                               const BandConfig& bands) {
  ProficiencyOptions options;
  options.bands = bands;
  options.tau = tau;

  std::set<PairKey> planted, detected;
  for (const auto& l : latents) {
    for (const auto& [topic, m] : l.mastery) {
      if (m < tau) planted.insert({l.student, topic});
    }
  }
  for (const auto& s : analyze_course(dataset, options)) {
    for (const auto& g : s.gaps) detected.insert({s.vector.student, g.topic});
  }

  RecoveryReport r;
  r.planted = planted.size();
  r.detected = detected.size();
  for (const auto& key : detected) r.true_positive += planted.count(key);
  if (r.detected > 0) r.precision = static_cast<double>(r.true_positive) / static_cast<double>(r.detected);
  if (r.planted > 0) r.recall = static_cast<double>(r.true_positive) / static_cast<double>(r.planted);
  r.f1 = f1_from_pr(r.precision, r.recall);
  return r;
}

nlohmann::json to_json(const RecoveryReport& r) {
  return {{"planted", r.planted},     {"detected", r.detected},       {"true_positive", r.true_positive},
          {"precision", round6(r.precision)}, {"recall", round6(r.recall)}, {"f1", round6(r.f1)}};
}

nlohmann::json latents_to_json(const std::vector<LatentProfile>& latents) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& l : latents) {
    nlohmann::json mastery = nlohmann::json::object();
    for (const auto& [topic, m] : l.mastery) mastery[topic] = m;
    out.push_back({{"student_id", l.student.value}, {"mastery", mastery}});
  }
  return out;
}

}  // namespace align
