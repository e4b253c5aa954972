#include "align/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <nlohmann/json.hpp>
#include <ostream>

#include "align/cohort_sim.hpp"
#include "align/error.hpp"
#include "align/pipeline.hpp"
#include "align/text.hpp"

namespace align::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* k_synopsis =
    "usage: align <validate|proficiency|diagnose|label|recommend|summarize|evaluate|simulate|pipeline> [options]\n"
    "       align <subcommand> --help";

struct Flags {
  std::string course, config, out, prompts, replay, record, fixtures, model, as_of, bands;
  std::string mode_diagnose, mode_compat, mode_summary, mode_prefs;
  double tau = k_default_tau;
  std::size_t k = 3;
  bool k_per_gap = false;
  bool include_exams = false;

  // simulate
  std::uint64_t seed = 42;
  std::size_t students = 30, topics = 5, questions = 20, exam_questions = 6;
  double noise = 0.0, margin = 0.0, mastery = 0.0;
  std::string mix;
};

/// Options recorded so a flag given on the command line can override the config file.
struct Registered {
  std::map<std::string, CLI::Option*> options;
  bool given(const std::string& name) const {
    auto it = options.find(name);
    return it != options.end() && it->second->count() > 0;
  }
};

void add_run_options(CLI::App& cmd, Flags& f, Registered& reg, bool needs_llm, bool needs_recs) {
  reg.options["course"] = cmd.add_option("--course", f.course, "Course manifest (course.json)");
  reg.options["config"] = cmd.add_option("--config", f.config, "JSON config file; flags override its values");
  reg.options["tau"] = cmd.add_option("--tau", f.tau, "Mastery threshold in [0,1] (default 0.70)");
  reg.options["bands"] = cmd.add_option("--bands", f.bands, "Band cutoffs, e.g. high:0.8,medium:0.6");
  reg.options["include_exams"] = cmd.add_flag("--include-exams", f.include_exams, "Use exam items as proficiency evidence");
  reg.options["out"] = cmd.add_option("--out", f.out, "Output directory (default out)");
  reg.options["as_of"] = cmd.add_option("--as-of", f.as_of, "Report timestamp (UTC); defaults to the manifest's as_of");
  reg.options["prompts"] = cmd.add_option("--prompts", f.prompts, "Directory of prompt templates overriding the built-ins");
  if (needs_llm) {
    reg.options["replay"] = cmd.add_option("--replay", f.replay, "Replay store for LLM calls (offline)");
    reg.options["record"] = cmd.add_option("--record", f.record, "Write the LLM calls of this run as a replay store");
    reg.options["model"] = cmd.add_option("--model", f.model, "Model id sent to the LLM backend (default gpt-4o)");
    reg.options["mode_diagnose"] = cmd.add_option("--mode-diagnose", f.mode_diagnose, "agent|rule (default agent)");
    reg.options["mode_prefs"] = cmd.add_option("--mode-prefs", f.mode_prefs, "rule|agent (default rule)");
  }
  if (needs_recs) {
    reg.options["k"] = cmd.add_option("--k", f.k, "Resource budget per student (default 3)");
    reg.options["k_per_gap"] = cmd.add_flag("--k-per-gap", f.k_per_gap, "Apply K to each gap instead of the student");
    reg.options["fixtures"] = cmd.add_option("--fixtures", f.fixtures, "Directory with search.json and pages/ (offline)");
    reg.options["mode_compat"] = cmd.add_option("--mode-compat", f.mode_compat, "rule|agent (default rule)");
    reg.options["mode_summary"] = cmd.add_option("--mode-summary", f.mode_summary, "template|agent (default template)");
  }
}

BandConfig parse_bands(const std::string& spec) {
  BandConfig b;
  bool high = false, medium = false;
  for (const auto& part : text::split(spec, ',')) {
    auto kv = text::split(part, ':');
    if (kv.size() != 2) throw Error(ErrorKind::InvalidBands, "expected name:value in '" + spec + "'");
    auto name = text::trim(kv[0]);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(text::trim(kv[1]), &used);
      if (used != text::trim(kv[1]).size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidBands, "not a number: '" + kv[1] + "'");
    }
    if (name == "high") {
      b.high_min = value;
      high = true;
    } else if (name == "medium") {
      b.medium_min = value;
      medium = true;
    } else {
      throw Error(ErrorKind::InvalidBands, "unknown band '" + name + "'");
    }
  }
  if (!high && !medium) throw Error(ErrorKind::InvalidBands, "no cutoffs in '" + spec + "'");
  b.validate();
  return b;
}

StageMode parse_mode(const std::string& flag, const std::string& value) {
  auto m = parse_stage_mode(value);
  if (!m) throw Error(ErrorKind::ConfigError, flag + " must be rule|template|agent, got '" + value + "'");
  return *m;
}

/// Defaults, then the config file, then explicit flags.
RunConfig build_run_config(const Flags& f, const Registered& reg) {
  RunConfig c;
  if (!f.config.empty()) {
    json doc;
    try {
      doc = json::parse(text::read_file(f.config));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ConfigError, f.config + ": " + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::ConfigError, f.config + ": expected a JSON object");
    auto base = fs::path(f.config).parent_path();
    auto path_of = [&](const json& v) { return (base / v.get<std::string>()).lexically_normal().string(); };
    try {
      for (const auto& [key, v] : doc.items()) {
        if (key == "course") c.course_path = path_of(v);
        else if (key == "tau") c.tau = v.get<double>();
        else if (key == "bands") c.bands = v.is_string() ? parse_bands(v.get<std::string>())
                                                         : BandConfig{v.at("high").get<double>(), v.at("medium").get<double>()};
        else if (key == "k") c.k = v.get<std::size_t>();
        else if (key == "k_per_gap") c.k_per_gap = v.get<bool>();
        else if (key == "include_exams") c.include_exams = v.get<bool>();
        else if (key == "mode_diagnose") c.mode_diagnose = parse_mode(key, v.get<std::string>());
        else if (key == "mode_compat") c.mode_compat = parse_mode(key, v.get<std::string>());
        else if (key == "mode_summary") c.mode_summary = parse_mode(key, v.get<std::string>());
        else if (key == "mode_prefs") c.mode_prefs = parse_mode(key, v.get<std::string>());
        else if (key == "replay") c.replay_path = path_of(v);
        else if (key == "fixtures") c.fixtures_dir = path_of(v);
        else if (key == "prompts") c.prompts_dir = path_of(v);
        else if (key == "out") c.out_dir = path_of(v);
        else if (key == "model") c.model_id = v.get<std::string>();
        else if (key == "as_of") c.as_of = v.get<std::string>();
        else throw Error(ErrorKind::ConfigError, f.config + ": unknown key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ConfigError, f.config + ": " + e.what());
    }
  }

  if (reg.given("course")) c.course_path = f.course;
  if (reg.given("tau")) c.tau = f.tau;
  if (reg.given("bands")) c.bands = parse_bands(f.bands);
  if (reg.given("include_exams")) c.include_exams = f.include_exams;
  if (reg.given("out")) c.out_dir = f.out;
  if (reg.given("as_of")) c.as_of = f.as_of;
  if (reg.given("prompts")) c.prompts_dir = f.prompts;
  if (reg.given("replay")) c.replay_path = f.replay;
  if (reg.given("record")) c.record_path = f.record;
  if (reg.given("model")) c.model_id = f.model;
  if (reg.given("mode_diagnose")) c.mode_diagnose = parse_mode("--mode-diagnose", f.mode_diagnose);
  if (reg.given("mode_prefs")) c.mode_prefs = parse_mode("--mode-prefs", f.mode_prefs);
  if (reg.given("k")) c.k = f.k;
  if (reg.given("k_per_gap")) c.k_per_gap = f.k_per_gap;
  if (reg.given("fixtures")) c.fixtures_dir = f.fixtures;
  if (reg.given("mode_compat")) c.mode_compat = parse_mode("--mode-compat", f.mode_compat);
  if (reg.given("mode_summary")) c.mode_summary = parse_mode("--mode-summary", f.mode_summary);
  if (c.course_path.empty()) throw Error(ErrorKind::ConfigError, "--course is required");
  return c;
}

std::size_t count_gaps(const std::vector<StudentProficiency>& students) {
  std::size_t n = 0;
  for (const auto& s : students) n += s.gaps.size();
  return n;
}

int cmd_validate(const Flags& f, const Registered& reg, std::ostream& out, std::ostream& err) {
  auto config = build_run_config(f, reg);
  auto parts = load_course_parts(config.course_path);
  auto report = check_dataset(parts);
  if (!report.ok()) {
    for (const auto& v : report.violations) err << to_string(v.kind) << ": " << v.detail << "\n";
    err << report.violations.size() << " violation(s)\n";
    return k_exit_data;
  }
  auto result = validate_dataset(std::move(parts));
  const auto& ds = std::get<CourseDataset>(result);
  out << "valid: " << ds.students.size() << " students, " << ds.topics.size() << " topics, " << ds.questions.size()
      << " questions, " << ds.responses.size() << " responses, " << ds.gradebook.size() << " gradebook entries\n";
  return k_exit_ok;
}

int cmd_simulate(const Flags& f, const Registered& reg, std::ostream& out) {
  SimConfig sim;
  sim.seed = f.seed;
  sim.n_students = f.students;
  sim.n_topics = f.topics;
  sim.questions_per_topic = f.questions;
  sim.exam_questions_per_topic = f.exam_questions;
  sim.noise = f.noise;
  sim.mastery_margin = f.margin;
  sim.margin_tau = f.tau;
  if (reg.given("mastery")) sim.fixed_mastery = f.mastery;
  if (!f.mix.empty()) {
    for (const auto& part : text::split(f.mix, ',')) {
      auto kv = text::split(part, ':');
      if (kv.size() != 2) throw Error(ErrorKind::ConfigError, "--mix expects easy:x,medium:y,hard:z");
      double v = 0.0;
      try {
        v = std::stod(kv[1]);
      } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigError, "--mix value is not a number: " + kv[1]);
      }
      auto name = text::trim(kv[0]);
      if (name == "easy") sim.difficulty_mix.easy = v;
      else if (name == "medium") sim.difficulty_mix.medium = v;
      else if (name == "hard") sim.difficulty_mix.hard = v;
      else throw Error(ErrorKind::ConfigError, "--mix has unknown level '" + name + "'");
    }
  }
  auto cohort = generate_cohort(sim);
  std::string dir = f.out.empty() ? "sim_course" : f.out;
  std::optional<std::string> as_of;
  if (reg.given("as_of")) {
    if (!text::parse_utc(f.as_of)) throw Error(ErrorKind::ConfigError, "--as-of must be a UTC date or timestamp");
    as_of = f.as_of;
  }
  write_course_bundle(cohort.dataset, dir, as_of);
  auto recovery = recovery_report(cohort.dataset, cohort.latents, f.tau, BandConfig{});
  write_json((fs::path(dir) / "latents.json").string(), latents_to_json(cohort.latents));
  write_json((fs::path(dir) / "recovery.json").string(), json{{"tau", f.tau}, {"recovery", to_json(recovery)}});
  out << "simulated " << sim.n_students << " students x " << sim.n_topics << " topics into " << dir
      << " (gap recovery P=" << text::fixed(recovery.precision, 3) << " R=" << text::fixed(recovery.recall, 3) << ")\n";
  return k_exit_ok;
}

int run_stage(const std::string& name, const Flags& f, const Registered& reg, std::ostream& out) {
  Session session(build_run_config(f, reg));
  const auto& c = session.config();
  if (name == "pipeline") {
    run_pipeline(session);
    out << "pipeline complete: outputs in " << c.out_dir << "\n";
    return k_exit_ok;
  }
  if (name == "label") {
    bool with_model = session.has_llm();
    auto sets = run_label(session, with_model);
    out << "labeled " << sets.front().labels.size() << " questions from the instructor bank";
    if (with_model) out << ", " << sets.back().labels.size() << " by " << c.model_id;
    out << "\n";
    session.finish();
    return k_exit_ok;
  }

  auto proficiency = run_proficiency(session);
  if (name == "proficiency") {
    out << "proficiency: " << proficiency.size() << " students, " << count_gaps(proficiency) << " gaps below tau "
        << format_number(c.tau) << "\n";
    return k_exit_ok;
  }
  if (name == "evaluate") {
    run_evaluate(session, proficiency, {});
    out << "evaluation written to " << c.out_dir << "\n";
    return k_exit_ok;
  }
  auto reports = run_diagnose(session, proficiency);
  if (name == "diagnose") {
    out << "diagnosed " << count_gaps(proficiency) << " gaps for " << reports.size() << " students\n";
    session.finish();
    return k_exit_ok;
  }
  auto prefs = run_preferences(session);
  auto recs = run_recommend(session, reports, prefs);
  if (name == "recommend") {
    std::size_t n = 0;
    for (const auto& r : recs) n += r.set.resources.size();
    out << "recommended " << n << " resources for " << recs.size() << " students\n";
    session.finish();
    return k_exit_ok;
  }
  auto summaries = run_summarize(session, proficiency, reports, recs, prefs);
  out << "wrote " << summaries.size() << " summaries to " << c.out_dir << "\n";
  session.finish();
  return k_exit_ok;
}

int exit_code_for(ErrorKind kind) {
  if (is_backend_error(kind)) return k_exit_backend;
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidTau:
    case ErrorKind::InvalidK:
    case ErrorKind::InvalidBands:
      return k_exit_usage;
    default:
      return k_exit_data;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Course diagnostics: proficiency, skill gaps, resources and learner summaries", "align"};
  app.require_subcommand(1);
  Flags f;
  std::map<std::string, Registered> registered;

  struct Spec {
    const char* name;
    const char* help;
    bool llm;
    bool recs;
  };
  const Spec specs[] = {
      {"validate", "Parse and cross-check a course bundle", false, false},
      {"proficiency", "Per-topic proficiency and skill gaps", false, false},
      {"diagnose", "Concept-level diagnosis of every skill gap", true, false},
      {"label", "Difficulty labels from the instructor bank and the model", true, false},
      {"recommend", "Search, check and select learning resources", true, true},
      {"summarize", "Five-section learner summaries", true, true},
      {"evaluate", "Metrics against exam ground truth and label comparison", true, false},
      {"pipeline", "Every stage in order", true, true},
  };
  std::vector<std::pair<std::string, CLI::App*>> commands;
  for (const auto& s : specs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_run_options(*cmd, f, registered[s.name], s.llm, s.recs);
    commands.emplace_back(s.name, cmd);
  }

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic cohort with known mastery");
  auto& sim_reg = registered["simulate"];
  sim->add_option("--seed", f.seed, "PRNG seed (default 42)");
  sim->add_option("--students", f.students, "Number of students (default 30)");
  sim->add_option("--topics", f.topics, "Number of topics (default 5)");
  sim->add_option("--questions", f.questions, "Quiz questions per topic (default 20)");
  sim->add_option("--exam-questions", f.exam_questions, "Exam questions per topic (default 6)");
  sim->add_option("--noise", f.noise, "Per-item noise half-width in [0,0.5] (default 0)");
  sim->add_option("--mix", f.mix, "Difficulty mix, e.g. easy:0.5,medium:0.3,hard:0.2");
  sim->add_option("--margin", f.margin, "Keep mastery at least this far from --tau (default 0)");
  sim->add_option("--tau", f.tau, "Threshold for the margin and the recovery report (default 0.70)");
  sim_reg.options["mastery"] = sim->add_option("--mastery", f.mastery, "Give every student this mastery on every topic");
  sim->add_option("--out", f.out, "Bundle directory (default sim_course)");
  sim_reg.options["as_of"] = sim->add_option("--as-of", f.as_of, "as_of recorded in the manifest");
  commands.emplace_back("simulate", sim);

  if (argc > 1 && argv[1][0] != '-') {
    bool known = false;
    for (const auto& [n, cmd] : commands) known = known || n == argv[1];
    if (!known) {
      err << "align: unknown subcommand '" << argv[1] << "'\n" << k_synopsis << "\n";
      return k_exit_usage;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return k_exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "align: " << e.what() << "\n" << k_synopsis << "\n";
    return k_exit_usage;
  }

  std::string name;
  for (const auto& [n, cmd] : commands) {
    if (cmd->parsed()) name = n;
  }
  try {
    if (name == "simulate") return cmd_simulate(f, sim_reg, out);
    if (name == "validate") return cmd_validate(f, registered[name], out, err);
    return run_stage(name, f, registered[name], out);
  } catch (const Error& e) {
    err << "align " << name << ": " << e.what() << "\n";
    int code = exit_code_for(e.kind());
    if (code == k_exit_usage) err << k_synopsis << "\n";
    return code;
  } catch (const std::exception& e) {
    err << "align " << name << ": " << e.what() << "\n";
    return k_exit_data;
  }
}

}  // namespace align::cli
