#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "align/learner_data.hpp"
#include "align/proficiency.hpp"

namespace align {

struct DifficultyMix {
  double easy = 0.5;
  double medium = 0.3;
  double hard = 0.2;
};

/// Penalty subtracted from mastery: 0 / 0.1 / 0.2 for Easy / Medium / Hard.
double difficulty_penalty(Difficulty level) noexcept;

struct SimConfig {
  std::uint64_t seed = 42;
  std::size_t n_students = 30;
  std::size_t n_topics = 5;
  std::size_t questions_per_topic = 20;
  double noise = 0.0;  // half-width of the uniform per-item perturbation
  std::size_t exam_questions_per_topic = 6;
  DifficultyMix difficulty_mix;
  /// Mastery is drawn uniformly from [0,1] minus the open band (tau - margin, tau + margin); margin 0 disables it.
  double mastery_margin = 0.0;
  double margin_tau = k_default_tau;
  /// When set, every student gets this mastery on every topic (no mastery draws).
  std::optional<double> fixed_mastery;

  /// Throws Error(ConfigError) naming the offending field.
  void validate() const;
};

struct LatentProfile {
  StudentId student;
  std::map<Topic, double> mastery;
  PreferenceSurvey preference;

  friend bool operator==(const LatentProfile&, const LatentProfile&) = default;
};

struct SimulatedCohort {
  CourseDataset dataset;
  std::vector<LatentProfile> latents;
};

/// Deterministic in the seed. The generator is std::mt19937_64 (the standard 64-bit Mersenne Twister) and every
/// derived draw is computed by hand from its raw output, so the dataset does not depend on the standard library:
///   uniform double  = (x >> 11) * 2^-53
///   uniform integer below n = rejection sampling on the raw 64-bit value.
/// Item j of a (student, topic) block has probability p_j = clamp(mastery - penalty_j + U(-noise, noise), 0, 1)
/// and is answered correctly iff floor(S_j + u) > floor(S_{j-1} + u), with S the running sum of p and u one
/// uniform offset per block. Each item keeps marginal probability p_j while the block's correct count stays
/// within 1 of the sum of p.
SimulatedCohort generate_cohort(const SimConfig& config);

struct RecoveryReport {
  std::size_t planted = 0;
  std::size_t detected = 0;
  std::size_t true_positive = 0;
  double precision = 1.0;  // vacuously 1 with no detections
  double recall = 1.0;     // vacuously 1 with no planted gaps
  double f1 = 1.0;
};

/// Planted gap: mastery < tau. Detected gap: identify_gaps over quiz-only proficiency.
RecoveryReport recovery_report(const CourseDataset& dataset, const std::vector<LatentProfile>& latents, double tau,
                               const BandConfig& bands);

nlohmann::json to_json(const RecoveryReport& report);
nlohmann::json latents_to_json(const std::vector<LatentProfile>& latents);

/// The raw generator helpers, exposed for tests.
namespace sim_rng {
double uniform01(std::mt19937_64& rng);
std::uint64_t below(std::mt19937_64& rng, std::uint64_t n);
}  // namespace sim_rng

}  // namespace align
