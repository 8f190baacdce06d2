// percuss: silhouette strike detection from the command line.
//
//   percuss run       frames -> strike events (JSONL, OSC/UDP) and spines
//   percuss simulate  synthetic performance footage + ground truth
//   percuss evaluate  score events against ground truth
//   percuss bench     pipeline throughput on simulated frames
//
// Exit codes: 0 ok, 2 invalid configuration, 3 unreadable input, 4 runtime I/O.

#include "percuss/config.hpp"
#include "percuss/evaluate.hpp"
#include "percuss/jsonl.hpp"
#include "percuss/pipeline.hpp"
#include "percuss/scene.hpp"
#include "percuss/simulator.hpp"
#include "percuss/transport.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <poll.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

using namespace percuss;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitRuntime = 4;

volatile std::sig_atomic_t g_stop = 0;
volatile std::sig_atomic_t g_next_scene = 0;

void on_signal(int sig) {
  if (sig == SIGUSR1) g_next_scene = 1;
  else g_stop = 1;
}

/// Registers one flag per configuration key. Values are kept as text and
/// turned into JSON so flags and --config files share one validation path.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::string> osc;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_path, "JSON configuration file (flags override it)");
    for (const std::string& key : config_keys()) {
      if (key == "osc") continue;
      std::string dashed = key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      std::string names = "--" + dashed;
      if (dashed != key) names += ",--" + key;
      app.add_option(names, values[key], "config key " + key);
    }
    app.add_option("--osc", osc, "OSC/UDP destination host:port (repeatable)");
  }

  json overrides(const CLI::App& app) const {
    json doc = json::object();
    for (const auto& [key, text] : values) {
      std::string dashed = key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      if (app.count("--" + dashed) == 0) continue;
      json v = json::parse(text, nullptr, false);
      doc[key] = v.is_discarded() || v.is_object() || v.is_array() ? json(text) : v;
    }
    if (!osc.empty()) doc["osc"] = osc;
    return doc;
  }

  RunConfig build(const CLI::App& app) const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    apply_config(cfg, overrides(app));
    validate(cfg);
    return cfg;
  }
};

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::config_invalid:
    case Errc::unknown_scene:
    case Errc::geometry_out_of_bounds:
    case Errc::invalid_address:
    case Errc::embedded_nul:
      return kExitConfig;
    case Errc::socket_failure:
    case Errc::oversized_payload:
      return kExitRuntime;
    default:
      return kExitInput;
  }
}

/// Output sink: "-" is stdout, "" is disabled, otherwise a file.
class LineSink {
 public:
  explicit LineSink(const std::string& path) {
    if (path.empty()) return;
    if (path == "-") {
      out_ = &std::cout;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw Error(Errc::io_failure, "cannot open " + path + " for writing");
    out_ = file_.get();
  }

  bool enabled() const { return out_ != nullptr; }

  void write(const std::string& line) {
    if (!out_) return;
    *out_ << line << '\n';
    if (!*out_) throw Error(Errc::io_failure, "write failed");
  }

  void flush() {
    if (out_) out_->flush();
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
};

/// Non-blocking reader for "scene <name>" lines on stdin.
class ControlInput {
 public:
  explicit ControlInput(bool enabled) : open_(enabled) {}

  std::vector<std::string> poll_lines() {
    std::vector<std::string> lines;
    while (open_) {
      pollfd pfd{STDIN_FILENO, POLLIN, 0};
      if (::poll(&pfd, 1, 0) <= 0 || !(pfd.revents & (POLLIN | POLLHUP))) break;
      char buf[256];
      const ssize_t n = ::read(STDIN_FILENO, buf, sizeof buf);
      if (n <= 0) {
        open_ = false;
        break;
      }
      pending_.append(buf, static_cast<std::size_t>(n));
    }
    for (auto nl = pending_.find('\n'); nl != std::string::npos; nl = pending_.find('\n')) {
      lines.push_back(pending_.substr(0, nl));
      pending_.erase(0, nl + 1);
    }
    return lines;
  }

 private:
  bool open_;
  std::string pending_;
};

int cmd_run(const CLI::App& app, const ConfigFlags& flags) {
  RunConfig cfg;
  std::unique_ptr<SceneSet> scenes;
  std::unique_ptr<FrameSource> source;
  std::unique_ptr<Pipeline> pipeline;
  try {
    cfg = flags.build(app);
    scenes = std::make_unique<SceneSet>(cfg.scenes_path.empty() ? SceneSet({default_scene()})
                                                                 : load_scenes(cfg.scenes_path));
  } catch (const Error& e) {
    std::cerr << "percuss run: invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    source = open_stream(cfg.input);
  } catch (const Error& e) {
    std::cerr << "percuss run: cannot read input " << cfg.input.path << ": " << e.what() << '\n';
    return kExitInput;
  }
  try {
    pipeline = std::make_unique<Pipeline>(cfg.pipeline, source->width(), source->height());
  } catch (const Error& e) {
    std::cerr << "percuss run: invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  }

  std::unique_ptr<OscDispatcher> osc;
  std::unique_ptr<LineSink> events_out, spines_out;
  try {
    if (!cfg.osc.empty()) osc = std::make_unique<OscDispatcher>(cfg.osc, cfg.queue_capacity);
  } catch (const Error& e) {
    std::cerr << "percuss run: invalid configuration: osc: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    events_out = std::make_unique<LineSink>(cfg.events_out);
    spines_out = std::make_unique<LineSink>(cfg.spines_out);
  } catch (const Error& e) {
    std::cerr << "percuss run: " << e.what() << '\n';
    return kExitRuntime;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::signal(SIGUSR1, on_signal);
  ControlInput control(cfg.input.path != "-");
  pipeline->set_spines_enabled(cfg.pipeline.spines && scenes->active().spine_output);

  std::size_t counts[2] = {0, 0};
  int status = 0;
  auto emit = [&](const StrikeEvent& e) {
    ++counts[side_index(e.side)];
    events_out->write(jsonl::event_line(e));
    if (osc)
      for (const osc::Message& m : map_event(e, scenes->active())) osc->post(osc::encode(m));
  };
  auto switch_to = [&](const std::string& name) {
    try {
      if (scenes->active().name == name) return;
      scenes->switch_scene(name);
      pipeline->set_spines_enabled(cfg.pipeline.spines && scenes->active().spine_output);
      std::cerr << "percuss run: scene " << name << '\n';
    } catch (const Error& e) {
      std::cerr << "percuss run: " << e.what() << '\n';
    }
  };

  try {
    while (!g_stop) {
      // scene changes land between frames
      for (const std::string& line : control.poll_lines()) {
        if (line.rfind("scene ", 0) == 0) switch_to(line.substr(6));
        else if (!line.empty()) std::cerr << "percuss run: ignoring command \"" << line << "\"\n";
      }
      if (g_next_scene) {
        g_next_scene = 0;
        const auto& all = scenes->scenes();
        for (std::size_t i = 0; i < all.size(); ++i)
          if (all[i].name == scenes->active().name) {
            switch_to(all[(i + 1) % all.size()].name);
            break;
          }
      }

      std::optional<Frame> frame;
      try {
        frame = source->next();
      } catch (const Error& e) {
        std::cerr << "percuss run: input error after " << pipeline->frames() << " frames: " << e.what() << '\n';
        status = kExitInput;
        break;
      }
      if (!frame) break;
      FrameResult r = pipeline->process(*frame);
      for (const StrikeEvent& e : r.events) emit(e);
      for (const SpineField& f : r.spines) spines_out->write(jsonl::spine_line(f));
    }
    for (const StrikeEvent& e : pipeline->finish()) emit(e);
    events_out->flush();
    spines_out->flush();
  } catch (const Error& e) {
    std::cerr << "percuss run: " << e.what() << '\n';
    status = e.code() == Errc::io_failure ? kExitRuntime : exit_code_for(e);
  }

  std::size_t dropped = 0, failures = 0;
  if (osc) {
    osc->close();
    dropped = osc->dropped();
    failures = osc->failures();
    if (failures > 0) std::cerr << "percuss run: " << failures << " OSC send failures, last: " << osc->last_error() << '\n';
  }
  std::cerr << "frames " << pipeline->frames() << ", events L " << counts[0] << " R " << counts[1]
            << ", dropped " << dropped << ", mean frame " << pipeline->frame_mean_us() << " us\n";
  return status;
}

struct SimulateArgs {
  std::string script;
  std::string preset = "default";
  std::string out = "-";
  std::string format = "y4m";
  std::string truth;
  std::optional<int> width, height;
  std::optional<double> fps, duration, noise;
  std::optional<std::uint64_t> seed;
};

SimulationSpec build_simulation(const SimulateArgs& a) {
  SimulationSpec spec;
  if (a.preset == "default") spec = default_bounce_spec();
  else if (a.preset == "dense-roll") spec = dense_roll_spec();
  else throw Error(Errc::config_invalid, "preset: must be default or dense-roll");
  if (!a.script.empty()) spec = load_simulation(a.script, spec);
  if (a.width) spec.width = *a.width;
  if (a.height) spec.height = *a.height;
  if (a.fps) spec.fps = *a.fps;
  if (a.duration) spec.duration = *a.duration;
  if (a.noise) spec.noise = *a.noise;
  if (a.seed) spec.seed = *a.seed;
  return spec;
}

int cmd_simulate(const SimulateArgs& a) {
  Simulation sim;
  std::optional<StreamFormat> format = parse_stream_format(a.format);
  try {
    if (!format) throw Error(Errc::config_invalid, "format: must be pgm-sequence, raw-y8 or y4m");
    if (*format == StreamFormat::pgm_sequence && a.out == "-")
      throw Error(Errc::config_invalid, "out: pgm-sequence output needs a directory");
    sim = simulate(build_simulation(a));
  } catch (const Error& e) {
    std::cerr << "percuss simulate: invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    if (!a.truth.empty()) {
      LineSink truth(a.truth);
      for (const TruthStrike& s : sim.truth.strikes) truth.write(jsonl::truth_line(s));
      truth.flush();
    }
    std::unique_ptr<std::ofstream> file;
    std::unique_ptr<FrameWriter> writer;
    if (*format == StreamFormat::pgm_sequence) {
      writer = make_pgm_sequence_writer(a.out);
    } else {
      std::ostream* out = &std::cout;
      if (a.out != "-") {
        file = std::make_unique<std::ofstream>(a.out, std::ios::binary | std::ios::trunc);
        if (!*file) throw Error(Errc::io_failure, "cannot open " + a.out + " for writing");
        out = file.get();
      }
      writer = make_frame_writer(*out, *format, sim.frames->width(), sim.frames->height(), sim.frames->nominal_fps());
    }
    std::int64_t n = 0;
    while (auto f = sim.frames->next()) {
      writer->write(*f);
      ++n;
    }
    std::cout.flush();
    std::cerr << "simulated " << n << " frames, " << sim.truth.strikes.size() << " ground-truth strikes\n";
  } catch (const Error& e) {
    std::cerr << "percuss simulate: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}

int cmd_evaluate(const std::string& events_path, const std::string& truth_path, double tol_us,
                 std::optional<double> tol_frames, double fps) {
  const Micros tol = static_cast<Micros>(std::llround(tol_frames ? *tol_frames * 1e6 / fps : tol_us));
  if (tol <= 0) {
    std::cerr << "percuss evaluate: invalid configuration: tol: must be > 0\n";
    return kExitConfig;
  }
  std::vector<StrikeEvent> events;
  GroundTruth truth;
  for (const auto& [path, what] : {std::pair{events_path, "events"}, std::pair{truth_path, "truth"}}) {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "percuss evaluate: cannot read " << what << " file " << path << '\n';
      return kExitInput;
    }
    try {
      if (std::string_view(what) == "events") events = jsonl::read_events(in);
      else truth.strikes = jsonl::read_truth(in);
    } catch (const Error& e) {
      std::cerr << "percuss evaluate: " << path << ": " << e.what() << '\n';
      return kExitInput;
    }
  }
  const EvaluationReport report = evaluate(events, truth, tol);
  std::cout << report_json(report) << '\n';
  if (report.overall.recall_vacuous) std::cerr << "note: ground truth is empty; recall is vacuously 1.0\n";
  if (report.overall.precision_vacuous) std::cerr << "note: no events; precision is vacuously 1.0\n";
  return 0;
}

int cmd_bench(const CLI::App& app, const ConfigFlags& flags, long frames, std::uint64_t seed) {
  RunConfig cfg;
  if (frames <= 0) {
    std::cerr << "percuss bench: invalid configuration: frames: must be > 0\n";
    return kExitConfig;
  }
  SimulationSpec spec = default_bounce_spec();
  Simulation sim;
  std::unique_ptr<Pipeline> pipeline;
  try {
    cfg = flags.build(app);
    spec.fps = cfg.input.nominal_fps;
    spec.seed = seed;
    spec.duration = static_cast<double>(frames) / spec.fps;
    sim = simulate(spec);
    pipeline = std::make_unique<Pipeline>(cfg.pipeline, spec.width, spec.height);
  } catch (const Error& e) {
    std::cerr << "percuss bench: invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  }

  std::size_t counts[2] = {0, 0};
  double busy_us = 0.0;
  while (auto f = sim.frames->next()) {
    const auto t0 = std::chrono::steady_clock::now();
    FrameResult r = pipeline->process(*f);
    busy_us += std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    for (const StrikeEvent& e : r.events) ++counts[side_index(e.side)];
  }
  for (const StrikeEvent& e : pipeline->finish()) ++counts[side_index(e.side)];

  nlohmann::ordered_json j;
  j["frames"] = pipeline->frames();
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["fps"] = busy_us > 0 ? static_cast<double>(pipeline->frames()) * 1e6 / busy_us : 0.0;
  j["frame_mean_us"] = pipeline->frame_mean_us();
  nlohmann::ordered_json stages;
  const auto means = pipeline->stage_mean_us();
  for (std::size_t i = 0; i < means.size(); ++i) stages[std::string(kStageNames[i])] = means[i];
  j["stage_mean_us"] = stages;
  j["events"] = {{"L", counts[0]}, {"R", counts[1]}};
  std::cout << j.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Silhouette strike detection: frames in, strike events and trigger messages out"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Detect strikes in a frame stream");
  run_flags.add_to(*run);

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "Render synthetic performance footage with ground truth");
  sim->add_option("--script", sim_args.script, "performer script JSON");
  sim->add_option("--preset", sim_args.preset, "built-in script: default or dense-roll");
  sim->add_option("--out", sim_args.out, "frame output path, - for stdout, directory for pgm-sequence");
  sim->add_option("--format", sim_args.format, "y4m, raw-y8 or pgm-sequence");
  sim->add_option("--truth", sim_args.truth, "ground-truth JSONL output path");
  sim->add_option("--width", sim_args.width);
  sim->add_option("--height", sim_args.height);
  sim->add_option("--fps", sim_args.fps);
  sim->add_option("--duration", sim_args.duration, "seconds");
  sim->add_option("--noise", sim_args.noise, "luma noise stddev");
  sim->add_option("--seed", sim_args.seed);

  std::string events_path, truth_path;
  double tol_us = 2e6 / 60.0;
  std::optional<double> tol_frames;
  double eval_fps = 60.0;
  CLI::App* eval = app.add_subcommand("evaluate", "Score detected events against ground truth");
  eval->add_option("--events", events_path, "event JSONL")->required();
  eval->add_option("--truth", truth_path, "ground-truth JSONL")->required();
  eval->add_option("--tol", tol_us, "match tolerance in microseconds (default: 2 frames at 60 fps)");
  eval->add_option("--tol-frames", tol_frames, "match tolerance in frame periods (uses --fps)");
  eval->add_option("--fps", eval_fps, "frame rate for --tol-frames");

  ConfigFlags bench_flags;
  long bench_frames = 1800;
  std::uint64_t bench_seed = 1;
  CLI::App* bench = app.add_subcommand("bench", "Measure pipeline throughput on simulated frames");
  bench_flags.add_to(*bench);
  bench->add_option("--frames", bench_frames, "number of frames");
  bench->add_option("--seed", bench_seed, "simulator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(*run, run_flags);
    if (*sim) return cmd_simulate(sim_args);
    if (*eval) return cmd_evaluate(events_path, truth_path, tol_us, tol_frames, eval_fps);
    if (*bench) return cmd_bench(*bench, bench_flags, bench_frames, bench_seed);
  } catch (const Error& e) {
    std::cerr << "percuss: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
