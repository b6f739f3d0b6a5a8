// Copyright 2026 The bhc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// bhc: command-line driver for the Bose-Hubbard chain simulator.
//
// Every run writes runs/<hash>/manifest.jsonl next to its CSV outputs; the
// hash is the git blob id of the command, resolved parameters and options.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bhc/chaos.hpp"
#include "bhc/classical.hpp"
#include "bhc/csv.hpp"
#include "bhc/error.hpp"
#include "bhc/model.hpp"
#include "bhc/quantum.hpp"
#include "bhc/scan.hpp"
#include "bhc/stability.hpp"
#include "bhc/twa.hpp"

#ifndef BHC_VERSION
#define BHC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitPartial = 2;
constexpr int kExitConfig = 3;

// Runtime settings that never change outputs and stay out of the hash.
struct Runtime {
  unsigned workers = 0;
  bool yes = false;
  fs::path out_root = "runs";
};

struct Context {
  bhc::ModelParams params;
  json options;
  Runtime runtime;
  fs::path dir;
  std::vector<std::string> outputs;
  std::vector<std::uint64_t> seeds;

  std::ofstream open(const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw bhc::Error("cannot write " + (dir / name).string());
    out.precision(17);
    outputs.push_back(name);
    return out;
  }

  bhc::ScanOptions scan_options() const {
    bhc::ScanOptions o;
    o.n_traj = options.value("n_traj", 1000);
    o.width = options.value("width", 1.0);
    o.seed = options.value("seed", std::uint64_t{1});
    o.workers = runtime.workers;
    o.allow_long = runtime.yes;
    o.sample_count = options.value("sample_count", 500);
    return o;
  }

  bhc::SweepProtocol protocol() const {
    if (!options.contains("rate_exp"))
      throw bhc::ConfigError("a sweep rate is required: pass --rate-exp or set rate_exponent");
    return bhc::SweepProtocol::from_exponent(options.at("rate_exp").get<double>());
  }
};

using Runner = std::function<int(Context&)>;

void announce_qmb(const Context& ctx, const bhc::ModelParams& p) {
  const double est = bhc::qmb_step_estimate(p, ctx.protocol(), ctx.scan_options());
  std::cout << "estimated Krylov steps (N=" << p.particles << "): " << bhc::csv::num(est) << "\n";
}

int run_mft(Context& ctx) {
  bhc::IntegratorControl c;
  c.sample_count = ctx.options.value("sample_count", 500);
  const auto run = bhc::integrate_trajectory(bhc::source_orbital(ctx.params.sites), ctx.protocol(),
                                             ctx.params, c);
  auto out = ctx.open("mft.csv");
  bhc::write_classical_csv(out, run, ctx.params.sites);
  std::cout << "P_drain " << bhc::csv::num(bhc::orbital_occupations(run.final_state.psi).back())
            << "\n";
  return kExitOk;
}

int run_twa(Context& ctx) {
  auto o = ctx.scan_options();
  if (ctx.options.contains("epsilon"))
    o.width = bhc::calibrate_width(ctx.params, ctx.options.at("epsilon").get<double>(), o.n_traj,
                                   o.seed);
  ctx.seeds.push_back(o.seed);
  const bhc::Cloud cloud = bhc::sample_cloud(ctx.params, o.n_traj, o.width, o.seed);
  bhc::CloudControl c;
  c.workers = o.workers;
  c.sample_count = o.sample_count;
  const auto run = bhc::propagate_cloud(cloud, ctx.protocol(), ctx.params, c);
  {
    auto out = ctx.open("twa.csv");
    bhc::csv::comment(out, "width " + bhc::csv::num(o.width) + "; epsilon " +
                               bhc::csv::num(cloud.epsilon) + " K");
    bhc::write_twa_csv(out, run, ctx.params.sites);
  }
  if (ctx.options.value("export_cloud", false)) {
    auto init = ctx.open("cloud_initial.csv");
    bhc::write_cloud_csv(init, cloud.seeds, ctx.params.particles);
    auto fin = ctx.open("cloud_final.csv");
    bhc::write_cloud_csv(fin, run.final_ensemble, ctx.params.particles);
  }
  std::cout << "epsilon " << bhc::csv::num(cloud.epsilon) << "\nP_drain "
            << bhc::csv::num(run.p_drain) << " +- " << bhc::csv::num(run.stderr_drain) << "\n";
  return kExitOk;
}

int run_qmb(Context& ctx) {
  announce_qmb(ctx, ctx.params);
  bhc::StepControl c;
  c.sample_count = ctx.options.value("sample_count", 500);
  const int levels = ctx.options.value("levels", 0);
  if (levels > 0) c.snapshot_thetas = bhc::theta_grid(levels);
  const auto run = bhc::run_qmb(ctx.params, ctx.protocol(), ctx.scan_options(), c);
  {
    auto out = ctx.open("qmb.csv");
    bhc::write_quantum_csv(out, run, ctx.params.sites);
  }
  if (levels > 0) {
    const bhc::FockBasis basis = bhc::build_basis(ctx.params.sites, ctx.params.particles);
    const auto ops = bhc::assemble_operators(basis, ctx.params);
    const auto trace =
        bhc::level_overlap_trace(run, ops, ctx.options.value("threshold", 1e-3));
    auto out = ctx.open("level_trace.csv");
    bhc::write_level_trace_csv(out, trace);
  }
  std::cout << "P_drain " << bhc::csv::num(bhc::transfer_efficiency_q(run)) << "\n";
  return kExitOk;
}

int run_stability(Context& ctx) {
  const auto profile = bhc::stability_profile(ctx.params, ctx.options.value("grid", 501));
  const auto windows = bhc::instability_windows(profile, ctx.options.value("tol_im", 1e-6));
  const auto borders = bhc::regime_borders(profile);
  {
    auto out = ctx.open("stability.csv");
    bhc::write_stability_csv(out, profile);
  }
  {
    auto out = ctx.open("windows.jsonl");
    bhc::write_windows_jsonl(out, windows);
  }
  {
    auto out = ctx.open("borders.csv");
    bhc::csv::comment(out, "rates in K; borders are uniform-in-theta means of the max over k of "
                           "Re and Im omega; integrated_im is the theta integral of max Im omega");
    bhc::csv::header(out, {"rate_sudden_diabatic", "rate_diabatic_quasistatic", "integrated_im"});
    bhc::csv::row(out, {borders.rate_sudden_diabatic, borders.rate_diabatic_quasistatic,
                        borders.integrated_im});
  }
  for (const auto& w : windows)
    std::cout << "unstable " << bhc::csv::num(w.lo) << " " << bhc::csv::num(w.hi) << "\n";
  std::cout << "borders " << bhc::csv::num(borders.rate_sudden_diabatic) << " "
            << bhc::csv::num(borders.rate_diabatic_quasistatic) << "\n";
  return kExitOk;
}

int run_poincare(Context& ctx) {
  const double theta = ctx.options.at("theta").get<double>();
  const auto profile = bhc::continue_branch(ctx.params, {0.0, theta});
  const auto& sp = profile.points.back();
  const auto seeds = bhc::radial_fan(sp, ctx.params, double(sp.energy), ctx.options.value("count", 24));
  bhc::SectionControl c;
  c.workers = ctx.runtime.workers;
  c.max_crossings = ctx.options.value("crossings", std::size_t{0});
  const auto sections =
      bhc::poincare_section(theta, ctx.params, seeds, ctx.options.value("t_max", 1000.0), c);
  const auto at_sp = bhc::chart(sp.orbital());
  auto out = ctx.open("section.csv");
  bhc::write_section_csv(out, sections,
                         "theta " + bhc::csv::num(theta) + "; SP radius " +
                             bhc::csv::num(1.0 - at_sp.p1) + " angle " + bhc::csv::num(at_sp.q1) +
                             " energy " + bhc::csv::num(double(sp.energy)));
  std::size_t total = 0;
  for (const auto& s : sections) total += s.size();
  std::cout << seeds.size() << " seeds, " << total << " crossings\n";
  return kExitOk;
}

int run_chaos(Context& ctx) {
  const auto d = bhc::derive_dimensionless(ctx.params);
  std::vector<double> us = ctx.options.value("u_list", std::vector<double>{d.u});
  const int count = ctx.options.value("theta_count", 32);
  std::vector<double> thetas;
  for (int k = 1; k <= count; ++k) thetas.push_back(bhc::kHalfPi * k / count);
  bhc::ChaosMapControl mc;
  mc.r0 = ctx.options.value("r0", 0.05);
  mc.duration = ctx.options.value("duration", 2000.0);
  mc.workers = ctx.runtime.workers;
  const auto map = bhc::chaos_map(ctx.params.sites, ctx.params.particles, d.v, us, thetas, mc);
  {
    auto out = ctx.open("pn_map.csv");
    bhc::write_chaos_map_csv(out, map);
  }
  const int scatter = ctx.options.value("scatter_n_traj", 0);
  if (scatter > 0) {
    auto o = ctx.scan_options();
    ctx.seeds.push_back(o.seed);
    const auto protocol = ctx.protocol();
    const bhc::Cloud cloud = bhc::sample_cloud(ctx.params, scatter, o.width, o.seed);
    bhc::CloudControl c;
    c.workers = o.workers;
    c.sample_count = 1;
    const auto run = bhc::propagate_cloud(cloud, protocol, ctx.params, c);
    const auto es = bhc::energy_scatter(protocol, cloud, run, ctx.params);
    {
      auto out = ctx.open("scatter.csv");
      bhc::write_scatter_csv(out, es);
    }
    {
      auto out = ctx.open("final_section.csv");
      bhc::write_section_csv(out, {bhc::final_cloud_section(run.final_ensemble,
                                                            protocol.end_theta(), ctx.params)},
                             "end-of-sweep cloud snapshot; no crossing detection");
    }
    std::cout << "pearson " << bhc::csv::num(es.pearson) << "\n";
  }
  return kExitOk;
}

std::vector<bhc::Method> methods_of(const Context& ctx) {
  std::vector<bhc::Method> out;
  for (const auto& m : ctx.options.at("methods")) out.push_back(bhc::parse_method(m.get<std::string>()));
  return out;
}

int run_scan_rates(Context& ctx) {
  const auto methods = methods_of(ctx);
  const auto exps = ctx.options.at("rate_exps").get<std::vector<double>>();
  const auto o = ctx.scan_options();
  for (auto m : methods)
    if (m == bhc::Method::Twa) ctx.seeds.push_back(o.seed);
  const auto rows = bhc::scan_rates(ctx.params, methods, exps, o);
  auto out = ctx.open("rates.csv");
  bhc::write_rates_csv(out, rows);
  bool partial = false;
  for (const auto& r : rows) {
    std::cout << bhc::to_string(r.method) << " k=" << bhc::csv::num(r.exponent) << " "
              << (r.ok() ? bhc::csv::num(r.p_drain) : "FAILED: " + r.error) << "\n";
    partial = partial || !r.ok();
  }
  return partial ? kExitPartial : kExitOk;
}

int run_scan_eps(Context& ctx) {
  const auto eps = ctx.options.at("eps").get<std::vector<double>>();
  const auto ns = ctx.options.value("qmb_n", std::vector<int>{});
  const auto o = ctx.scan_options();
  ctx.seeds.push_back(o.seed);
  for (int n : ns) {
    bhc::ModelParams p = ctx.params;
    p.interaction = ctx.params.g() / n;
    p.particles = n;
    try {
      announce_qmb(ctx, p);
    } catch (const bhc::CapacityError& e) {
      std::cout << "N=" << n << ": " << e.what() << "\n";
    }
  }
  const auto scan = bhc::scan_epsilon(ctx.params, ctx.protocol(), eps, ns, o);
  {
    auto out = ctx.open("eps.csv");
    bhc::write_epsilon_csv(out, scan.twa);
    for (std::size_t i = 0; i < scan.twa_errors.size(); ++i)
      if (!scan.twa_errors[i].empty())
        bhc::csv::comment(out, "error epsilon=" + bhc::csv::num(eps[i]) + ": " + scan.twa_errors[i]);
  }
  {
    auto out = ctx.open("qmb_reference.csv");
    bhc::write_qmb_reference_csv(out, scan.qmb);
  }
  bool partial = false;
  for (const auto& e : scan.twa_errors) partial = partial || !e.empty();
  for (const auto& r : scan.qmb) partial = partial || !r.error.empty();
  return partial ? kExitPartial : kExitOk;
}

int run_trace(Context& ctx) {
  const auto methods = methods_of(ctx);
  const auto o = ctx.scan_options();
  for (auto m : methods) {
    if (m == bhc::Method::Qmb) announce_qmb(ctx, ctx.params);
    if (m == bhc::Method::Twa) ctx.seeds.push_back(o.seed);
  }
  const auto result = bhc::trace_run(ctx.params, ctx.protocol(), methods, o);
  if (result.mft) {
    auto out = ctx.open("trace_mft.csv");
    bhc::write_windows_comment(out, result.windows);
    bhc::write_classical_csv(out, *result.mft, ctx.params.sites);
  }
  if (result.twa) {
    auto out = ctx.open("trace_twa.csv");
    bhc::write_windows_comment(out, result.windows);
    bhc::write_twa_csv(out, *result.twa, ctx.params.sites);
    std::cout << "twa max drain jump " << bhc::csv::num(bhc::max_drain_jump(result.twa->samples)) << "\n";
  }
  if (result.qmb) {
    auto out = ctx.open("trace_qmb.csv");
    bhc::write_windows_comment(out, result.windows);
    bhc::write_quantum_csv(out, *result.qmb, ctx.params.sites);
  }
  {
    auto out = ctx.open("windows.jsonl");
    bhc::write_windows_jsonl(out, result.windows);
  }
  for (const auto& e : result.errors) std::cout << "FAILED: " << e << "\n";
  return result.errors.empty() ? kExitOk : kExitPartial;
}

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"mft", run_mft},           {"twa", run_twa},
      {"qmb", run_qmb},           {"stability", run_stability},
      {"poincare", run_poincare}, {"chaos", run_chaos},
      {"scan-rates", run_scan_rates}, {"scan-eps", run_scan_eps},
      {"trace", run_trace}};
  return table;
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

int execute(const std::string& command, const bhc::ModelParams& params, const json& options,
            const Runtime& runtime) {
  Context ctx;
  ctx.params = params;
  ctx.options = options;
  ctx.runtime = runtime;
  bhc::RunManifest manifest;
  manifest.command = command;
  manifest.params = bhc::params_json(params);
  manifest.options = options;
  manifest.version = BHC_VERSION;
  manifest.started = timestamp();
  const std::string hash = manifest.hash();
  ctx.dir = runtime.out_root / hash;
  std::cout << "run " << command << " " << bhc::describe(params) << "\n";

  const auto t0 = std::chrono::steady_clock::now();
  const int code = runners().at(command)(ctx);
  manifest.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest.outputs = ctx.outputs;
  manifest.seeds = ctx.seeds;
  manifest.exit_code = code;
  fs::create_directories(ctx.dir);
  bhc::write_manifest(ctx.dir / "manifest.jsonl", manifest);
  std::cout << "outputs in " << ctx.dir.string() << "\n";
  return code;
}

unsigned env_workers() {
  if (const char* env = std::getenv("BHC_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    throw bhc::ConfigError(std::string("BHC_WORKERS must be a positive integer, got '") + env + "'");
  }
  return 0;
}

struct ModelFlags {
  std::string config;
  std::optional<int> M, N;
  std::optional<double> U, V, K, u, v, rate_exp;
  std::uint64_t seed = 1;
  bool deterministic = false;
  int sample_count = 500;
};

void add_model_flags(CLI::App* sub, ModelFlags& f, bool with_rate, bool with_seed) {
  sub->add_option("--config", f.config, "key = value model file");
  sub->add_option("-M,--sites", f.M, "site count");
  sub->add_option("-N,--particles", f.N, "particle number");
  sub->add_option("-U,--interaction", f.U, "on-site interaction U");
  sub->add_option("-V,--detuning", f.V, "middle-site detuning V");
  sub->add_option("-K,--hopping", f.K, "hopping scale K");
  sub->add_option("-u", f.u, "dimensionless interaction sqrt(2) N U / K");
  sub->add_option("-v", f.v, "dimensionless detuning sqrt(2) V / K");
  if (with_rate) sub->add_option("--rate-exp", f.rate_exp, "sweep rate (pi/2) 10^-k");
  if (with_seed) sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_flag("--deterministic", f.deterministic, "record deterministic mode in the manifest");
  sub->add_option("--samples", f.sample_count, "uniform samples per trajectory")->check(CLI::PositiveNumber);
}

std::pair<bhc::ModelParams, json> resolve(const ModelFlags& f, bool with_rate, bool with_seed) {
  bhc::ModelConfig file;
  if (!f.config.empty()) file = bhc::load_model_config(f.config);
  bhc::ModelConfig over;
  over.M = f.M;
  over.N = f.N;
  over.U = f.U;
  over.V = f.V;
  over.K = f.K;
  over.u = f.u;
  over.v = f.v;
  over.rate_exponent = f.rate_exp;
  const bhc::ModelConfig merged = bhc::merge_config(file, over);
  json opts;
  if (with_rate && merged.rate_exponent) opts["rate_exp"] = *merged.rate_exponent;
  if (with_seed) opts["seed"] = f.seed;
  opts["deterministic"] = f.deterministic;
  opts["sample_count"] = f.sample_count;
  return {bhc::resolve_params(merged), opts};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bose-Hubbard chain adiabatic-passage simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", BHC_VERSION);
  Runtime runtime;
  std::string out_root = "runs";
  unsigned workers = 0;
  bool yes = false;
  app.add_option("--out", out_root, "root directory for run outputs");
  app.add_option("--workers", workers, "worker threads (default: BHC_WORKERS or all cores)");
  app.add_flag("--yes", yes, "allow quantum runs above 1e7 estimated steps");

  ModelFlags flags;
  std::string command;
  json extra = json::object();
  // Per-command options; each lambda copies its values into `extra`.
  std::vector<std::function<void()>> collect;

  auto sub = [&](const std::string& name, const std::string& help, bool rate, bool seed) {
    CLI::App* s = app.add_subcommand(name, help);
    add_model_flags(s, flags, rate, seed);
    s->callback([&, name] { command = name; });
    return s;
  };

  sub("mft", "mean-field trajectory", true, false);

  int n_traj = 1000;
  double width = 1.0;
  std::optional<double> epsilon;
  bool export_cloud = false;
  auto* twa = sub("twa", "truncated-Wigner cloud average", true, true);
  twa->add_option("--n-traj", n_traj)->check(CLI::PositiveNumber);
  twa->add_option("--width", width, "cloud width w (1 = w of the N-particle coherent state)");
  twa->add_option("--epsilon", epsilon, "calibrate w to this energy width instead");
  twa->add_flag("--export-cloud", export_cloud);
  collect.push_back([&] {
    if (command != "twa") return;
    extra["n_traj"] = n_traj;
    if (epsilon) extra["epsilon"] = *epsilon;
    else extra["width"] = width;
    extra["export_cloud"] = export_cloud;
  });

  int levels = 0;
  double threshold = 1e-3;
  auto* qmb = sub("qmb", "quantum many-body propagation", true, false);
  qmb->add_option("--levels", levels, "theta points for the adiabatic-level overlap trace (e.g. 200)");
  qmb->add_option("--threshold", threshold, "overlap weight threshold of the level trace");
  collect.push_back([&] {
    if (command != "qmb") return;
    extra["levels"] = levels;
    extra["threshold"] = threshold;
  });

  int grid = 501;
  double tol_im = 1e-6;
  auto* stab = sub("stability", "central stationary point and Bogoliubov stability", false, false);
  stab->add_option("--grid", grid)->check(CLI::Range(2, 1000000));
  stab->add_option("--tol-im", tol_im);
  collect.push_back([&] {
    if (command != "stability") return;
    extra["grid"] = grid;
    extra["tol_im"] = tol_im;
  });

  double theta = 0.0;
  double t_max = 1000.0;
  std::size_t crossings = 0;
  int count = 24;
  auto* poin = sub("poincare", "Poincare section at frozen theta (M = 3)", false, false);
  poin->add_option("--theta", theta)->required();
  poin->add_option("--t-max", t_max);
  poin->add_option("--crossings", crossings, "stop each seed after this many crossings");
  poin->add_option("--count", count, "seeds in the radial fan");
  collect.push_back([&] {
    if (command != "poincare") return;
    extra["theta"] = theta;
    extra["t_max"] = t_max;
    extra["crossings"] = crossings;
    extra["count"] = count;
  });

  std::vector<double> u_list;
  int theta_count = 32;
  double r0 = 0.05;
  double duration = 2000.0;
  int scatter = 0;
  auto* chaos = sub("chaos", "participation-number map and energy scatter", true, true);
  chaos->add_option("--u-list", u_list, "u values of the map (default: the model's u)");
  chaos->add_option("--theta-count", theta_count);
  chaos->add_option("--r0", r0);
  chaos->add_option("--duration", duration);
  chaos->add_option("--scatter-n-traj", scatter, "also sweep a cloud and report the energy scatter");
  chaos->add_option("--width", width);
  collect.push_back([&] {
    if (command != "chaos") return;
    if (!u_list.empty()) extra["u_list"] = u_list;
    extra["theta_count"] = theta_count;
    extra["r0"] = r0;
    extra["duration"] = duration;
    extra["scatter_n_traj"] = scatter;
    extra["width"] = width;
  });

  std::vector<std::string> methods{"mft"};
  std::vector<double> rate_exps;
  auto* rates = sub("scan-rates", "transfer efficiency vs sweep rate", false, true);
  rates->add_option("--methods", methods)->check(CLI::IsMember({"mft", "twa", "qmb"}));
  rates->add_option("--rate-exps", rate_exps)->required();
  rates->add_option("--n-traj", n_traj);
  rates->add_option("--width", width);
  collect.push_back([&] {
    if (command != "scan-rates") return;
    extra["methods"] = methods;
    extra["rate_exps"] = rate_exps;
    extra["n_traj"] = n_traj;
    extra["width"] = width;
  });

  std::vector<double> eps;
  std::vector<int> qmb_n;
  auto* seps = sub("scan-eps", "TWA efficiency vs cloud energy width", true, true);
  seps->add_option("--eps", eps)->required();
  seps->add_option("--qmb-n", qmb_n, "particle numbers of quantum reference rows");
  seps->add_option("--n-traj", n_traj);
  collect.push_back([&] {
    if (command != "scan-eps") return;
    extra["eps"] = eps;
    extra["qmb_n"] = qmb_n;
    extra["n_traj"] = n_traj;
  });

  std::vector<std::string> trace_methods{"mft", "twa"};
  auto* trace = sub("trace", "P_drain(theta) time traces with instability borders", true, true);
  trace->add_option("--methods", trace_methods)->check(CLI::IsMember({"mft", "twa", "qmb"}));
  trace->add_option("--n-traj", n_traj);
  trace->add_option("--width", width);
  collect.push_back([&] {
    if (command != "trace") return;
    extra["methods"] = trace_methods;
    extra["n_traj"] = n_traj;
    extra["width"] = width;
  });

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "re-run a manifest into --out");
  replay->add_option("manifest", manifest_path, "path to manifest.jsonl")->required();
  replay->callback([&] { command = "replay"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    runtime.out_root = out_root;
    runtime.yes = yes;
    runtime.workers = workers > 0 ? workers : env_workers();
    if (command == "replay") {
      const bhc::RunManifest m = bhc::read_manifest(manifest_path);
      if (!runners().count(m.command)) throw bhc::ConfigError("unknown command " + m.command);
      return execute(m.command, bhc::params_from_json(m.params), m.options, runtime);
    }
    const bool with_rate = command != "stability" && command != "poincare" && command != "scan-rates";
    const bool with_seed = command == "twa" || command == "chaos" || command == "scan-rates" ||
                           command == "scan-eps" || command == "trace";
    auto [params, opts] = resolve(flags, with_rate, with_seed);
    for (auto& f : collect) f();
    opts.update(extra);
    return execute(command, params, opts, runtime);
  } catch (const bhc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const bhc::InvalidParameter& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kExitConfig;
  } catch (const bhc::LongRunError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const bhc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
}
