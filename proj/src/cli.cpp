#include "zoneseq/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "zoneseq/ingest.hpp"
#include "zoneseq/io.hpp"
#include "zoneseq/pipeline.hpp"
#include "zoneseq/scorer.hpp"
#include "zoneseq/synth.hpp"
#include "zoneseq/tsplib.hpp"

namespace zoneseq::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t parse_count(std::string_view what, const std::string& text) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size() || text.starts_with('-')) {
      throw std::invalid_argument(text);
    }
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(what) + ": expected a non-negative integer, got '" +
                      text + "'");
  }
}

bool parse_bool(std::string_view what, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") {
    return true;
  }
  if (text.empty() || text == "0" || text == "false" || text == "no" || text == "off") {
    return false;
  }
  throw ConfigError(std::string(what) + ": expected a boolean, got '" + text + "'");
}

// One settable field; every source (config file, env, flag) funnels through
// the same string setter.
struct Field {
  const char* key;
  void (*set)(RunConfig&, const std::string&);
};

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
    {"dataset", [](RunConfig& c, const std::string& v) { c.dataset = v; }},
    {"model", [](RunConfig& c, const std::string& v) { c.model = v; }},
    {"out", [](RunConfig& c, const std::string& v) { c.out = v; }},
    {"submission", [](RunConfig& c, const std::string& v) { c.submission = v; }},
    {"synth_config", [](RunConfig& c, const std::string& v) { c.synth_config = v; }},
    {"external_solver",
     [](RunConfig& c, const std::string& v) {
       if (v.empty()) {
         c.external_solver.reset();
       } else {
         c.external_solver = v;
       }
     }},
    {"order", [](RunConfig& c, const std::string& v) { c.order = parse_count("order", v); }},
    {"weights", [](RunConfig& c, const std::string& v) { c.weights = parse_weights(v); }},
    {"threads",
     [](RunConfig& c, const std::string& v) { c.threads = parse_count("threads", v); }},
    {"seed",
     [](RunConfig& c, const std::string& v) {
       c.seed = parse_count("seed", v);
       c.seed_given = true;
     }},
    {"log_level", [](RunConfig& c, const std::string& v) { c.log_level = v; }},
    {"include_low",
     [](RunConfig& c, const std::string& v) { c.include_low = parse_bool("include_low", v); }},
    {"per_route_timing",
     [](RunConfig& c, const std::string& v) {
       c.per_route_timing = parse_bool("per_route_timing", v);
     }},
    {"log_space",
     [](RunConfig& c, const std::string& v) { c.log_space = parse_bool("log_space", v); }},
  };
  return f;
}

std::string env_name(std::string_view key) {
  std::string out = "ZSEQ_";
  for (const char ch : key) {
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  }
  return out;
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config " + path.string() + " must be a JSON object");
  }
  for (const auto& f : fields()) {
    if (!j.contains(f.key)) {
      continue;
    }
    const auto& v = j.at(f.key);
    std::string text;
    if (v.is_string()) {
      text = v.get<std::string>();
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        text += (i ? "," : "") + v.at(i).dump();
      }
    } else if (v.is_boolean()) {
      text = v.get<bool>() ? "true" : "false";
    } else {
      text = v.dump();
    }
    f.set(cfg, text);
  }
}

void apply_env(RunConfig& cfg) {
  for (const auto& f : fields()) {
    if (const char* v = std::getenv(env_name(f.key).c_str())) {
      f.set(cfg, v);
    }
  }
}

std::shared_ptr<spdlog::logger> logger() {
  auto log = spdlog::get("zoneseq");
  if (!log) {
    log = spdlog::stderr_color_mt("zoneseq");
  }
  return log;
}

void setup(const RunConfig& cfg) {
  validate(cfg);
  omp_set_num_threads(static_cast<int>(cfg.threads));
  logger()->set_level(spdlog::level::from_str(cfg.log_level));
}

void write_json(const std::filesystem::path& path, const std::string& text) {
  io::write_file_atomic(path, text);
}

void require(const std::filesystem::path& p, const char* flag) {
  if (p.empty()) {
    throw ConfigError(std::string("missing required --") + flag);
  }
}

SequenceOptions sequence_options(const RunConfig& cfg,
                                 const tsp::AtspSolver* solver,
                                 ZonePolicy policy) {
  SequenceOptions opt;
  opt.policy = policy;
  opt.rollout.objective =
    cfg.log_space ? ppm::Objective::LogProbability : ppm::Objective::Probability;
  opt.rollout.parallel = cfg.threads > 1;
  opt.solver = solver;
  opt.seed = cfg.seed;
  return opt;
}

std::unique_ptr<tsp::AtspSolver> make_solver(const RunConfig& cfg) {
  if (cfg.external_solver) {
    return std::make_unique<tsp::ExternalSolver>(*cfg.external_solver);
  }
  return std::make_unique<tsp::BuiltinSolver>();
}

} // namespace

ppm::Weights parse_weights(std::string_view text) {
  ppm::Weights w{};
  std::size_t k = 0;
  std::stringstream in{std::string(text)};
  std::string item;
  while (std::getline(in, item, ',')) {
    if (k == ppm::component_count) {
      throw ConfigError("weights: expected 4 comma-separated values");
    }
    try {
      std::size_t used = 0;
      w[k] = std::stod(item, &used);
      if (used != item.size()) {
        throw std::invalid_argument(item);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("weights: '" + item + "' is not a number");
    }
    ++k;
  }
  if (k != ppm::component_count) {
    throw ConfigError("weights: expected 4 comma-separated values");
  }
  ppm::validate_weights(w);
  return w;
}

void validate(const RunConfig& config) {
  if (config.threads < 1) {
    throw ConfigError("thread count must be at least 1");
  }
  if (config.order < 1) {
    throw ConfigError("order must be at least 1");
  }
  ppm::validate_weights(config.weights);
  if (spdlog::level::from_str(config.log_level) == spdlog::level::off &&
      config.log_level != "off") {
    throw ConfigError("unknown log level '" + config.log_level + "'");
  }
}

int cmd_train(const RunConfig& cfg) {
  setup(cfg);
  require(cfg.dataset, "dataset");
  require(cfg.model, "model");
  const Dataset data = load_dataset(cfg.dataset, Split::Train);
  const auto t0 = Clock::now();
  const auto corpus = training_corpus(data, cfg.include_low);
  const auto model = ppm::PpmModel::train(
    corpus, {.max_order = cfg.order, .weights = cfg.weights, .prepend_sentinel = true});
  const double secs = seconds_since(t0);
  model.save(cfg.model);
  std::cout << "corpus: " << corpus.size() << " zone sequences\n"
            << "train time: " << secs << " s\n"
            << "model: " << cfg.model.string() << "\n";
  return exit_ok;
}

int cmd_sequence(const RunConfig& cfg) {
  setup(cfg);
  require(cfg.dataset, "dataset");
  require(cfg.model, "model");
  require(cfg.out, "out");
  const Dataset data = load_dataset(cfg.dataset, Split::Eval);
  const auto model = ppm::PpmModel::load(cfg.model);
  const auto solver = make_solver(cfg);
  const auto t0 = Clock::now();
  const auto results =
    sequence_dataset(data, &model, sequence_options(cfg, solver.get(), ZonePolicy::Rollout));
  const double secs = seconds_since(t0);
  write_json(cfg.out, scorer::submission_json(to_submission(results)));

  if (cfg.per_route_timing) {
    json timing = json::object();
    for (const auto& r : results) {
      timing[r.stops.route_id] = {{"zone_sequencing_ms", r.zone_ms},
                                  {"stop_sorting_ms", r.stop_ms}};
      std::cout << r.stops.route_id << " zone_ms=" << r.zone_ms
                << " stop_ms=" << r.stop_ms << "\n";
    }
    auto path = cfg.out;
    path += ".timing.json";
    write_json(path, timing.dump(1) + "\n");
  }
  std::cout << "sequenced " << results.size() << " routes in " << secs << " s\n";
  return exit_ok;
}

int cmd_evaluate(const RunConfig& cfg) {
  setup(cfg);
  require(cfg.dataset, "dataset");
  require(cfg.submission, "submission");
  require(cfg.out, "out");
  const Dataset data = load_dataset(cfg.dataset, Split::Eval);
  const auto submission = scorer::read_submission(cfg.submission);
  const scorer::SdErpScorer scorer({.haversine_fallback = true});
  const auto report = scorer::dataset_score(data, submission, scorer);
  write_json(cfg.out, scorer::report_json(report));
  std::cout << "routes: " << report.routes.size() << "\nmean score: " << report.mean_score
            << "\n";
  return exit_ok;
}

namespace {

synth::SynthConfig synth_config(const RunConfig& cfg) {
  synth::SynthConfig sc;
  if (!cfg.synth_config.empty()) {
    sc = synth::read_config(cfg.synth_config);
  }
  if (cfg.seed_given) {
    sc.seed = cfg.seed;
  }
  return sc;
}

} // namespace

int cmd_synth(const RunConfig& cfg) {
  setup(cfg);
  require(cfg.out, "out");
  const auto output = synth::generate(synth_config(cfg));
  synth::write(output, cfg.out);
  std::cout << "wrote " << output.train.routes.size() << " train and "
            << output.eval.routes.size() << " eval routes to " << cfg.out.string()
            << "\n";
  return exit_ok;
}

int cmd_bench(const RunConfig& cfg) {
  setup(cfg);
  require(cfg.out, "out");
  auto log = logger();

  Dataset train;
  Dataset eval;
  if (!cfg.dataset.empty()) {
    train = load_dataset(cfg.dataset / "train", Split::Train);
    eval = load_dataset(cfg.dataset / "eval", Split::Eval);
  } else {
    log->info("no --dataset given, generating the default synthetic benchmark");
    auto output = synth::generate(synth_config(cfg));
    train = std::move(output.train);
    eval = std::move(output.eval);
  }

  const auto t0 = Clock::now();
  ppm::PpmModel model;
  std::size_t corpus_size = 0;
  if (!cfg.model.empty() && std::filesystem::exists(cfg.model)) {
    model = ppm::PpmModel::load(cfg.model);
  } else {
    const auto corpus = training_corpus(train, cfg.include_low);
    corpus_size = corpus.size();
    model = ppm::PpmModel::train(
      corpus, {.max_order = cfg.order, .weights = cfg.weights, .prepend_sentinel = true});
    if (!cfg.model.empty()) {
      model.save(cfg.model);
    }
  }
  const double train_s = seconds_since(t0);

  const auto solver = make_solver(cfg);
  const scorer::SdErpScorer scorer({.haversine_fallback = true});
  json summary = json::object();
  std::ostringstream table;
  table << "policy         mean_score    zone_ms/route  stop_ms/route\n";
  for (const ZonePolicy policy :
       {ZonePolicy::Rollout, ZonePolicy::Alphabetical, ZonePolicy::GroundTruth}) {
    const auto name = std::string(to_string(policy));
    const auto results =
      sequence_dataset(eval, &model, sequence_options(cfg, solver.get(), policy));
    const auto submission = to_submission(results);
    const auto report = scorer::dataset_score(eval, submission, scorer);
    write_json(cfg.out / (name + "_submission.json"), scorer::submission_json(submission));
    write_json(cfg.out / (name + "_report.json"), scorer::report_json(report));
    summary[name] = report.mean_score;

    double zone_ms = 0.0;
    double stop_ms = 0.0;
    for (const auto& r : results) {
      zone_ms += r.zone_ms;
      stop_ms += r.stop_ms;
    }
    const double n = results.empty() ? 1.0 : static_cast<double>(results.size());
    char line[128];
    std::snprintf(line, sizeof line, "%-14s %-13.6f %-14.1f %.1f\n", name.c_str(),
                  report.mean_score, zone_ms / n, stop_ms / n);
    table << line;
  }
  write_json(cfg.out / "summary.json", summary.dump(1) + "\n");
  std::cout << "train routes: " << train.routes.size() << " (corpus " << corpus_size
            << "), eval routes: " << eval.routes.size() << ", train time: " << train_s
            << " s\n"
            << table.str();
  return exit_ok;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Zone-sequence route planner: learn driver zone order, sequence stops, score"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, bool> bool_flags;
  std::vector<std::pair<std::string, CLI::Option*>> value_opts;
  std::vector<std::pair<std::string, CLI::Option*>> bool_opts;

  app.add_option("--config", config_path, "JSON config file (also ZSEQ_CONFIG)");
  auto value = [&](const char* flag, const char* key, const char* help) {
    value_opts.emplace_back(key, app.add_option(flag, flag_values[key], help));
  };
  auto toggle = [&](const char* flag, const char* key, const char* help) {
    bool_opts.emplace_back(key, app.add_flag(flag, bool_flags[key], help));
  };
  value("--dataset", "dataset", "Dataset directory");
  value("--model", "model", "Model file");
  value("--out", "out", "Output file or directory");
  value("--submission", "submission", "Submission JSON to evaluate");
  value("--synth-config", "synth_config", "Synthetic dataset config (JSON)");
  value("--order", "order", "Maximum PPM context order K");
  value("--weights", "weights", "Component weights w0,w1,w2,w3");
  value("--external-solver", "external_solver", "TSPLIB/LKH-style solver binary");
  value("--threads", "threads", "Worker threads");
  value("--seed", "seed", "Random seed");
  value("--log-level", "log_level", "trace|debug|info|warn|error|off");
  toggle("--include-low", "include_low", "Train on Low quality routes too");
  toggle("--per-route-timing", "per_route_timing", "Emit per-route timing");
  toggle("--log-space", "log_space", "Rollout on summed log-probabilities");

  auto* train = app.add_subcommand("train", "Train the zone model");
  auto* sequence = app.add_subcommand("sequence", "Sequence every route of a dataset");
  auto* evaluate = app.add_subcommand("evaluate", "Score a submission");
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  auto* bench = app.add_subcommand("bench", "Compare rollout with baseline zone orders");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    RunConfig cfg;
    cfg.threads = static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
    if (config_path.empty()) {
      if (const char* v = std::getenv("ZSEQ_CONFIG")) {
        config_path = v;
      }
    }
    if (!config_path.empty()) {
      apply_config_file(cfg, config_path);
    }
    apply_env(cfg);
    for (const auto& [key, opt] : value_opts) {
      if (opt->count() > 0) {
        for (const auto& f : fields()) {
          if (key == f.key) {
            f.set(cfg, flag_values[key]);
          }
        }
      }
    }
    for (const auto& [key, opt] : bool_opts) {
      if (opt->count() > 0) {
        for (const auto& f : fields()) {
          if (key == f.key) {
            f.set(cfg, "true");
          }
        }
      }
    }

    if (train->parsed()) {
      return cmd_train(cfg);
    }
    if (sequence->parsed()) {
      return cmd_sequence(cfg);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(cfg);
    }
    if (synth_cmd->parsed()) {
      return cmd_synth(cfg);
    }
    if (bench->parsed()) {
      return cmd_bench(cfg);
    }
    return exit_config;
  } catch (const ConfigError& e) {
    logger()->error("{}", e.what());
    return exit_config;
  } catch (const IoError& e) {
    logger()->error("{}", e.what());
    return exit_io;
  } catch (const ValidationError& e) {
    logger()->error("{}", e.what());
    return exit_validation;
  } catch (const std::exception& e) {
    logger()->error("{}", e.what());
    return exit_validation;
  }
}

} // namespace zoneseq::cli
