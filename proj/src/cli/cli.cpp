#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "fflp/accel/simulator.hpp"
#include "fflp/cli.hpp"
#include "fflp/dataset.hpp"
#include "fflp/errors.hpp"
#include "fflp/evolution.hpp"
#include "fflp/model_file.hpp"
#include "fflp/tasks.hpp"

namespace fflp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunContext {
  fs::path out_dir;
  std::ostream& out;
  std::ostream& err;
  std::size_t workers = 1;
  json inputs = json::object();
  json outputs = json::object();
};

void write_output(RunContext& ctx, const std::string& name, const std::string& bytes) {
  const fs::path path = ctx.out_dir / name;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f) throw IoError("cannot write " + path.string());
  ctx.outputs[name] = sha256_hex(bytes);
}

void record_input(RunContext& ctx, const std::string& role, const fs::path& path) {
  ctx.inputs[role] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
}

std::string dataset_for(const std::string& task, const std::string& requested) {
  if (task != "mini_classify") return "";
  return fs::absolute(requested.empty() ? default_digits_path() : fs::path(requested)).string();
}

std::unique_ptr<Environment> open_task(const std::string& name, const std::string& dataset) {
  try {
    return make_task(name, dataset);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

std::optional<Perturbation> parse_perturbation(const std::string& text, std::size_t episode_length) {
  try {
    return Perturbation::parse(text, episode_length);
  } catch (const std::logic_error& e) {
    throw InputError(std::string("perturbation: ") + e.what());
  }
}

NetworkConfig task_network(const TaskSpec& spec, const json& net) {
  const NetworkConfig c = parse_network(net, network_for(spec, 16));
  if (c.n_in != spec.n_inputs() || c.n_out != spec.n_outputs()) {
    throw InputError("net: task " + spec.name + " needs n_in " + std::to_string(spec.n_inputs()) + " and n_out " +
                     std::to_string(spec.n_outputs()));
  }
  return c;
}

template <typename T>
T get(const json& cfg, const char* key) {
  if (!cfg.contains(key)) throw InputError(std::string("config is missing '") + key + "'");
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string hex64(std::uint64_t x) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << x;
  return os.str();
}

// ------------------------------------------------------------------ train-rule

json train_config_defaults(const TaskSpec& spec) {
  const PepgConfig p;
  return {{"pepg", {{"sigma_init", p.sigma_init}, {"eta_mu", p.eta_mu}, {"eta_sigma", p.eta_sigma},
                    {"sigma_min", p.sigma_min}}},
          {"plan",
           {{"variants", spec.train_variants}, {"episodes_per_variant", 1}, {"timesteps_per_step", 16},
            {"perturbation", "none"}}}};
}

// Folds a user train-config file into the resolved config. Flat keys only.
void apply_train_config(json& cfg, const json& file) {
  static const std::set<std::string> pepg_keys = {"sigma_init", "eta_mu", "eta_sigma", "sigma_min"};
  static const std::set<std::string> plan_keys = {"variants", "episodes_per_variant", "timesteps_per_step",
                                                  "perturbation"};
  if (!file.is_object()) throw InputError("train config: expected a JSON object");
  for (const auto& [key, value] : file.items()) {
    if (pepg_keys.contains(key)) {
      if (!value.is_number()) throw InputError("train config: '" + key + "' must be a number");
      cfg["pepg"][key] = value;
    } else if (plan_keys.contains(key)) {
      cfg["plan"][key] = value;
    } else {
      throw InputError("train config: unknown key '" + key +
                       "' (allowed: sigma_init, eta_mu, eta_sigma, sigma_min, variants, episodes_per_variant, "
                       "timesteps_per_step, perturbation)");
    }
  }
}

int run_train(const json& cfg, RunContext& ctx) {
  const std::string task_name = get<std::string>(cfg, "task");
  const std::string dataset = get<std::string>(cfg, "dataset");
  auto task = open_task(task_name, dataset);
  const TaskSpec& spec = task->spec();
  if (!dataset.empty()) record_input(ctx, "dataset", dataset);

  TrainConfig tc;
  tc.net = task_network(spec, get<json>(cfg, "net"));
  const json pepg = get<json>(cfg, "pepg");
  tc.pepg.sigma_init = get<double>(pepg, "sigma_init");
  tc.pepg.eta_mu = get<double>(pepg, "eta_mu");
  tc.pepg.eta_sigma = get<double>(pepg, "eta_sigma");
  tc.pepg.sigma_min = get<double>(pepg, "sigma_min");
  const json plan = get<json>(cfg, "plan");
  tc.plan.variants = get<std::vector<std::size_t>>(plan, "variants");
  for (std::size_t v : tc.plan.variants) {
    if (v >= spec.variant_count) throw InputError("variant " + std::to_string(v) + " out of range");
  }
  tc.plan.episodes_per_variant = get<std::size_t>(plan, "episodes_per_variant");
  tc.plan.timesteps_per_step = get<std::uint32_t>(plan, "timesteps_per_step");
  tc.plan.perturbation = parse_perturbation(get<std::string>(plan, "perturbation"), spec.episode_length);
  tc.generations = get<std::size_t>(cfg, "generations");
  tc.pop_size = get<std::size_t>(cfg, "pop");
  tc.seed = get<std::uint64_t>(cfg, "seed");
  tc.workers = ctx.workers;
  if (tc.pop_size == 0 || tc.pop_size % 2 != 0) throw InputError("--pop must be a positive even number");

  std::ostringstream log;
  write_log_header(log);
  const auto factory = [task_name, dataset] { return make_task(task_name, dataset); };
  const TrainResult result = train_rule(tc, factory, [&](const GenerationStats& s) {
    write_log_row(log, s);
    ctx.out << "generation " << s.generation << " best " << s.best << " mean " << s.mean << " best_so_far "
            << s.best_so_far << '\n';
  });

  std::ostringstream model;
  write_model(model, ModelFile::from_rule(tc.net, result.rule));
  write_output(ctx, get<std::string>(cfg, "out"), model.str());
  write_output(ctx, "train_log.csv", log.str());
  return kOk;
}

// ------------------------------------------------------------------ adapt

struct AdaptRun {
  EpisodeResult episode;
  std::unique_ptr<Environment> task;
};

int run_adapt(const json& cfg, RunContext& ctx) {
  const fs::path rule_path = get<std::string>(cfg, "rule");
  record_input(ctx, "rule", rule_path);
  const ModelFile model = load_model(rule_path);
  const std::string task_name = get<std::string>(cfg, "task");
  const std::string dataset = get<std::string>(cfg, "dataset");
  if (!dataset.empty()) record_input(ctx, "dataset", dataset);
  const std::string backend_name = get<std::string>(cfg, "backend");
  if (backend_name != "functional" && backend_name != "cycle") {
    throw InputError("--backend must be functional or cycle");
  }
  const accel::HardwareConfig hw = parse_hardware(get<json>(cfg, "hardware"));

  auto probe = open_task(task_name, dataset);
  const TaskSpec spec = probe->spec();
  if (model.config.n_in != spec.n_inputs() || model.config.n_out != spec.n_outputs()) {
    throw InputError("rule network " + std::to_string(model.config.n_in) + "-" + std::to_string(model.config.n_hidden) +
                     "-" + std::to_string(model.config.n_out) + " does not fit task " + spec.name);
  }
  EpisodeConfig ec;
  ec.seed = get<std::uint64_t>(cfg, "seed");
  ec.variant = get<std::size_t>(cfg, "variant");
  if (ec.variant >= spec.variant_count) {
    throw InputError("variant " + std::to_string(ec.variant) + " out of range (task has " +
                     std::to_string(spec.variant_count) + ")");
  }
  ec.timesteps_per_step = get<std::uint32_t>(cfg, "timesteps_per_step");
  ec.max_steps = get<std::size_t>(cfg, "steps");
  ec.perturbation = parse_perturbation(get<std::string>(cfg, "perturbation"), spec.episode_length);
  ec.record = true;

  const NetworkState initial = NetworkState::zeros(model.config);
  const auto run = [&](NetworkBackend& backend) {
    AdaptRun r;
    r.task = open_task(task_name, dataset);
    r.episode = run_episode(*r.task, backend, initial, model.rule, ec);
    return r;
  };

  FunctionalBackend functional;
  accel::CycleBackend cycle(hw);
  NetworkBackend& primary = backend_name == "cycle" ? static_cast<NetworkBackend&>(cycle) : functional;
  const AdaptRun main_run = run(primary);
  const EpisodeResult& ep = main_run.episode;

  std::ostringstream csv;
  write_episode_csv(csv, spec, ep);
  write_output(ctx, "episode.csv", csv.str());

  json summary;
  summary["task"] = spec.name;
  summary["variant"] = ec.variant;
  summary["backend"] = backend_name;
  summary["steps"] = ep.rewards.size();
  summary["return"] = ep.total_return;
  summary["non_finite"] = ep.non_finite;
  summary["clipped_observations"] = ep.clipped_observations;
  summary["final_state_hash"] = hex64(ep.final_state_hash);
  if (const auto* classify = dynamic_cast<const MiniClassifyTask*>(main_run.task.get())) {
    summary["accuracy"] = classify->accuracy();
  }
  if (spec.name == "reaching" && ec.perturbation && ec.perturbation->at_step >= 100 &&
      ec.perturbation->at_step + 200 <= ep.rewards.size()) {
    const RecoveryReport rec =
        recovery(reaching_progress(ep, ReachingTask::kSegmentLength), ec.perturbation->at_step);
    summary["recovery"] = {{"pre", rec.pre}, {"post", rec.post}, {"fraction", rec.fraction}};
  }

  int code = kOk;
  if (get<bool>(cfg, "check")) {
    FunctionalBackend f2;
    accel::CycleBackend c2(hw);
    NetworkBackend& other = backend_name == "cycle" ? static_cast<NetworkBackend&>(f2) : c2;
    const AdaptRun check = run(other);
    const bool same = check.episode.rewards == ep.rewards && check.episode.actions == ep.actions &&
                      check.episode.final_state_hash == ep.final_state_hash;
    const auto& sim = backend_name == "cycle" ? cycle.simulator() : c2.simulator();
    const bool monitor_clean = sim.monitor().stale_reads == 0 && sim.monitor().overwritten_reads == 0;
    summary["check"] = same && monitor_clean ? "match" : "mismatch";
    if (!same || !monitor_clean) {
      ctx.err << "backend check failed: functional and cycle backends disagree\n";
      code = kInternal;
    }
  }
  if (backend_name == "cycle") {
    accel::Simulator& sim = cycle.finished_simulator();
    const accel::LatencyReport r = accel::latency_report(sim.trace(), hw.clock_mhz, ep.rewards.size(), ep.snn_timesteps);
    write_output(ctx, "report.json", accel::to_json(r) + "\n");
    std::ostringstream text;
    accel::write_report_text(text, r, hw, ec.timesteps_per_step);
    write_output(ctx, "report.txt", text.str());
    summary["latency"] = json::parse(accel::to_json(r));
  }
  write_output(ctx, "summary.json", summary.dump(2) + "\n");
  ctx.out << summary.dump(2) << '\n';
  return code;
}

// ------------------------------------------------------------------ bench

int run_bench(const json& cfg, RunContext& ctx) {
  const NetworkConfig net = parse_network(get<json>(cfg, "net"), NetworkConfig{});
  const accel::HardwareConfig hw = parse_hardware(get<json>(cfg, "hardware"));
  const auto frames = get<std::uint64_t>(cfg, "frames");
  const auto per_frame = get<std::uint32_t>(cfg, "timesteps_per_frame");
  const auto rate = get<double>(cfg, "input_rate");
  const auto weight_sd = get<double>(cfg, "weight_sd");
  const auto seed = get<std::uint64_t>(cfg, "seed");
  const auto schedule = get<std::string>(cfg, "schedule");
  const bool keep_trace = get<bool>(cfg, "trace");
  if (!(rate >= 0.0 && rate <= 1.0)) throw InputError("--rate must lie in [0, 1]");
  if (!(weight_sd >= 0.0)) throw InputError("--weight-sd must be non-negative");
  if (per_frame == 0) throw InputError("--timesteps must be positive");
  if (schedule != "overlapped" && schedule != "serialized") throw InputError("--schedule must be overlapped or serialized");

  std::mt19937_64 rng(seed);
  NetworkState state = NetworkState::zeros(net);
  std::normal_distribution<double> g(0.0, weight_sd);
  for (HalfMatrix* m : {&state.w_input_hidden, &state.w_hidden_output}) {
    for (Half& w : m->values()) w = Half::from_double(g(rng));
  }
  accel::Simulator sim(hw, state, PlasticityRule::zeros(net),
                       schedule == "overlapped" ? accel::ScheduleMode::overlapped : accel::ScheduleMode::serialized,
                       keep_trace);
  std::bernoulli_distribution spike(rate);
  SpikeVector in(net.n_in);
  for (std::uint64_t f = 0; f < frames; ++f) {
    for (std::uint32_t t = 0; t < per_frame; ++t) {
      for (auto& s : in) s = spike(rng) ? 1 : 0;
      sim.step(in);
    }
  }
  sim.finish();
  const accel::LatencyReport r = accel::latency_report(sim.trace(), hw.clock_mhz, frames, frames * per_frame);
  const std::string report = accel::to_json(r);
  ctx.out << report << '\n';
  write_output(ctx, "report.json", report + "\n");
  std::ostringstream text;
  accel::write_report_text(text, r, hw, per_frame);
  write_output(ctx, "report.txt", text.str());
  if (keep_trace) {
    std::ostringstream csv;
    sim.trace().write_csv(csv);
    write_output(ctx, "trace.csv", csv.str());
  }
  return kOk;
}

// ------------------------------------------------------------------ driver

int execute(const std::string& command, const json& cfg, RunContext& ctx) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec || !fs::is_directory(ctx.out_dir)) throw IoError("cannot create output directory " + ctx.out_dir.string());

  const auto start = std::chrono::steady_clock::now();
  int code = kOk;
  if (command == "train-rule") {
    code = run_train(cfg, ctx);
  } else if (command == "adapt") {
    code = run_adapt(cfg, ctx);
  } else if (command == "bench") {
    code = run_bench(cfg, ctx);
  } else {
    throw InputError("unknown command '" + command + "' in manifest");
  }
  json manifest;
  manifest["command"] = command;
  manifest["tool_version"] = kToolVersion;
  manifest["config"] = cfg;
  manifest["seeds"] = {{"seed", cfg.at("seed")}};
  manifest["workers"] = ctx.workers;
  manifest["inputs"] = ctx.inputs;
  manifest["outputs"] = ctx.outputs;
  manifest["exit_code"] = code;
  manifest["wallclock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const fs::path path = ctx.out_dir / "manifest.json";
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << manifest.dump(2) << '\n';
  if (!f) throw IoError("cannot write " + path.string());
  return code;
}

int replay(const fs::path& manifest_path, RunContext& ctx) {
  const json manifest = read_json_file(manifest_path);
  const std::string command = get<std::string>(manifest, "command");
  const json cfg = get<json>(manifest, "config");
  const json inputs = manifest.value("inputs", json::object());
  for (const auto& [role, entry] : inputs.items()) {
    const std::string path = get<std::string>(entry, "path");
    if (sha256_file(path) != get<std::string>(entry, "sha256")) {
      throw InputError("input '" + role + "' (" + path + ") changed since the manifest was written");
    }
  }
  if (fs::exists(ctx.out_dir) && fs::equivalent(ctx.out_dir, manifest_path.parent_path().empty() ? "." : manifest_path.parent_path())) {
    throw InputError("replay needs an --out-dir different from the manifest's directory");
  }
  const int code = execute(command, cfg, ctx);
  bool identical = true;
  const json expected = get<json>(manifest, "outputs");
  for (const auto& [name, digest] : expected.items()) {
    const bool same = ctx.outputs.contains(name) && ctx.outputs[name] == digest;
    ctx.out << (same ? "identical " : "DIFFERENT ") << name << '\n';
    identical = identical && same;
  }
  for (const auto& [name, digest] : ctx.outputs.items()) {
    if (!expected.contains(name)) {
      ctx.out << "EXTRA " << name << '\n';
      identical = false;
    }
  }
  if (!identical) {
    ctx.err << "replay produced different outputs\n";
    return kInternal;
  }
  return code;
}

std::size_t default_workers() {
  if (const char* env = std::getenv("FFLP_WORKERS")) {
    char* end = nullptr;
    const unsigned long n = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return n;
    throw InputError("FFLP_WORKERS must be a positive integer");
  }
  return 1;
}

json read_optional(const std::string& path, RunContext& ctx, const char* role) {
  if (path.empty()) return json::object();
  record_input(ctx, role, path);
  return read_json_file(path);
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plastic spiking-network controller: rule evolution, online adaptation and accelerator model"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string out_dir = "fflp_out";
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  std::string dataset;

  auto* train = app.add_subcommand("train-rule", "Evolve a plasticity rule offline with PEPG");
  std::string task, net_file, train_file, rule_out = "rule.fflp";
  std::size_t generations = 0, pop = 16;
  train->add_option("--task", task, "Task name")->required();
  train->add_option("--net", net_file, "Network config JSON (n_hidden, v_th, lambda)");
  train->add_option("--train-config", train_file, "PEPG and evaluation settings JSON");
  train->add_option("--generations", generations, "Generations")->required();
  train->add_option("--pop", pop, "Population size (even)");
  train->add_option("--seed", seed, "Seed");
  train->add_option("--out", rule_out, "Rule file name inside --out-dir");
  train->add_option("--dataset", dataset, "Dataset file for mini_classify");
  train->add_option("--workers", workers, "Parallel evaluation threads (default FFLP_WORKERS or 1)");
  train->add_option("--out-dir", out_dir, "Output directory");

  auto* adapt = app.add_subcommand("adapt", "Run online adaptation from zero weights with a frozen rule");
  std::string rule_file, perturb = "none", backend = "functional", hw_file;
  std::size_t variant = 0, steps = 0;
  std::uint32_t timesteps = 16;
  bool check = false;
  adapt->add_option("--rule", rule_file, "FFLP rule file")->required();
  adapt->add_option("--task", task, "Task name")->required();
  adapt->add_option("--variant", variant, "Task variant");
  adapt->add_option("--steps", steps, "Control steps (0 = full episode)");
  adapt->add_option("--perturb", perturb, "none, joint-freeze or joint-gain:<f>, optional @step and #channel");
  adapt->add_option("--backend", backend, "functional or cycle");
  adapt->add_flag("--check", check, "Also run the other backend and fail on any mismatch");
  adapt->add_option("--hwconfig", hw_file, "Hardware config JSON for the cycle backend");
  adapt->add_option("--timesteps", timesteps, "SNN timesteps per control step");
  adapt->add_option("--seed", seed, "Episode seed");
  adapt->add_option("--dataset", dataset, "Dataset file for mini_classify");
  adapt->add_option("--out-dir", out_dir, "Output directory");
  bool report_flag = false;
  adapt->add_flag("--report", report_flag, "Write the latency report (implied by --backend cycle)");

  auto* bench = app.add_subcommand("bench", "Run the accelerator model over synthetic frames");
  std::uint64_t frames = 1;
  std::uint32_t per_frame = 16;
  double rate = 0.2, weight_sd = 0.1;
  std::string schedule = "overlapped";
  bool trace = false;
  bench->add_option("--net", net_file, "Network config JSON with n_in, n_hidden, n_out")->required();
  bench->add_option("--hwconfig", hw_file, "Hardware config JSON");
  bench->add_option("--frames", frames, "Input frames");
  bench->add_option("--timesteps", per_frame, "SNN timesteps per frame");
  bench->add_option("--rate", rate, "Input spike probability");
  bench->add_option("--weight-sd", weight_sd, "Standard deviation of the random initial weights");
  bench->add_option("--schedule", schedule, "overlapped or serialized");
  bench->add_flag("--trace", trace, "Write the per-event trace CSV");
  bench->add_option("--seed", seed, "Seed");
  bench->add_option("--out-dir", out_dir, "Output directory");

  auto* replay_cmd = app.add_subcommand("replay", "Rerun a command from its manifest and compare outputs");
  std::string manifest_file;
  replay_cmd->add_option("--manifest", manifest_file, "manifest.json of an earlier run")->required();
  replay_cmd->add_option("--workers", workers, "Parallel evaluation threads");
  replay_cmd->add_option("--out-dir", out_dir, "Output directory for the rerun")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }

  RunContext ctx{out_dir, out, err};
  ctx.workers = workers > 0 ? workers : default_workers();

  if (*train) {
    auto probe = open_task(task, dataset_for(task, dataset));
    json cfg = train_config_defaults(probe->spec());
    json net = read_optional(net_file, ctx, "net");
    cfg["net"] = network_to_json(task_network(probe->spec(), net));
    apply_train_config(cfg, read_optional(train_file, ctx, "train_config"));
    cfg["task"] = task;
    cfg["dataset"] = dataset_for(task, dataset);
    cfg["generations"] = generations;
    cfg["pop"] = pop;
    cfg["seed"] = seed;
    cfg["out"] = rule_out;
    return execute("train-rule", cfg, ctx);
  }
  if (*adapt) {
    json cfg;
    cfg["rule"] = fs::absolute(rule_file).string();
    cfg["task"] = task;
    cfg["dataset"] = dataset_for(task, dataset);
    cfg["variant"] = variant;
    cfg["steps"] = steps;
    cfg["perturbation"] = perturb;
    cfg["backend"] = backend;
    cfg["check"] = check;
    cfg["timesteps_per_step"] = timesteps;
    cfg["seed"] = seed;
    cfg["hardware"] = hardware_to_json(parse_hardware(read_optional(hw_file, ctx, "hardware")));
    if (report_flag && backend != "cycle") throw InputError("--report needs --backend cycle");
    return execute("adapt", cfg, ctx);
  }
  if (*bench) {
    json cfg;
    const json raw = read_optional(net_file, ctx, "net");
    for (const char* key : {"n_in", "n_hidden", "n_out"}) {
      if (!raw.contains(key)) throw InputError(std::string("net: '") + key + "' is required for bench");
    }
    cfg["net"] = network_to_json(parse_network(raw, NetworkConfig{}));
    cfg["hardware"] = hardware_to_json(parse_hardware(read_optional(hw_file, ctx, "hardware")));
    cfg["frames"] = frames;
    cfg["timesteps_per_frame"] = per_frame;
    cfg["input_rate"] = rate;
    cfg["weight_sd"] = weight_sd;
    cfg["schedule"] = schedule;
    cfg["trace"] = trace;
    cfg["seed"] = seed;
    return execute("bench", cfg, ctx);
  }
  return replay(manifest_file, ctx);
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(argc, argv, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace fflp::cli
