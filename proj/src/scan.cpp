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

#include "bhc/scan.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bhc/csv.hpp"

namespace bhc {

std::string to_string(Method m) {
  switch (m) {
    case Method::Mft:
      return "mft";
    case Method::Twa:
      return "twa";
    case Method::Qmb:
      return "qmb";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "mft") return Method::Mft;
  if (name == "twa") return Method::Twa;
  if (name == "qmb") return Method::Qmb;
  throw ConfigError("unknown method '" + name + "' (expected mft, twa or qmb)");
}

double qmb_step_estimate(const ModelParams& params, const SweepProtocol& protocol,
                         const ScanOptions& opts) {
  const FockBasis basis = build_basis(params.sites, params.particles, opts.basis_cap);
  return estimate_quantum_steps(protocol, assemble_operators(basis, params));
}

QuantumRun run_qmb(const ModelParams& params, const SweepProtocol& protocol,
                   const ScanOptions& opts, StepControl ctrl) {
  const FockBasis basis = build_basis(params.sites, params.particles, opts.basis_cap);
  const FockOperatorSet ops = assemble_operators(basis, params);
  const double estimate = estimate_quantum_steps(protocol, ops, ctrl);
  if (estimate > opts.step_limit && !opts.allow_long) throw LongRunError(estimate, opts.step_limit);
  return propagate_quantum(source_state(basis), protocol, ops, ctrl);
}

namespace {

// Rows run in parallel; the trajectories inside a row then run serially.
ScanOptions inner_options(const ScanOptions& opts, std::size_t rows) {
  ScanOptions inner = opts;
  if (rows > 1 && resolve_workers(opts.workers) > 1) inner.workers = 1;
  return inner;
}

CloudControl cloud_control(const ScanOptions& opts) {
  CloudControl c;
  c.workers = opts.workers;
  c.sample_count = opts.sample_count;
  return c;
}

}  // namespace

std::vector<RateRow> scan_rates(const ModelParams& params, const std::vector<Method>& methods,
                                const std::vector<double>& exponents, const ScanOptions& opts) {
  params.validate();
  std::vector<RateRow> rows;
  for (Method m : methods)
    for (double k : exponents) {
      RateRow r;
      r.method = m;
      r.exponent = k;
      r.rate = rate_from_exponent(k);
      rows.push_back(r);
    }
  const ScanOptions inner = inner_options(opts, rows.size());
  parallel_for(rows.size(), opts.workers, [&](std::size_t i) {
    RateRow& row = rows[i];
    try {
      const SweepProtocol protocol = SweepProtocol::sweep(row.rate);
      switch (row.method) {
        case Method::Mft:
          row.p_drain = mft_efficiency(protocol, params);
          break;
        case Method::Twa: {
          const Cloud cloud = sample_cloud(params, inner.n_traj, inner.width, inner.seed);
          const CloudRun run = propagate_cloud(cloud, protocol, params, cloud_control(inner));
          row.p_drain = run.p_drain;
          row.stderr_drain = run.stderr_drain;
          break;
        }
        case Method::Qmb: {
          StepControl ctrl;
          ctrl.sample_count = 1;
          row.p_drain = transfer_efficiency_q(run_qmb(params, protocol, inner, ctrl));
          break;
        }
      }
    } catch (const Error& e) {
      row.error = e.what();
      row.p_drain = std::nan("");
      row.stderr_drain = std::nan("");
    }
  });
  return rows;
}

EpsilonScan scan_epsilon(const ModelParams& params, const SweepProtocol& protocol,
                         const std::vector<double>& epsilons, const std::vector<int>& qmb_particles,
                         const ScanOptions& opts) {
  params.validate();
  EpsilonScan scan;
  scan.twa.resize(epsilons.size());
  scan.twa_errors.resize(epsilons.size());
  scan.qmb.resize(qmb_particles.size());
  const std::size_t total = epsilons.size() + qmb_particles.size();
  const ScanOptions inner = inner_options(opts, total);
  parallel_for(total, opts.workers, [&](std::size_t i) {
    if (i < epsilons.size()) {
      EpsilonRow& row = scan.twa[i];
      row.target_epsilon = epsilons[i];
      try {
        row.width = calibrate_width(params, epsilons[i], inner.n_traj, inner.seed);
        const Cloud cloud = sample_cloud(params, inner.n_traj, row.width, inner.seed);
        row.epsilon = cloud.epsilon;
        const CloudRun run = propagate_cloud(cloud, protocol, params, cloud_control(inner));
        row.p_drain = run.p_drain;
        row.stderr_drain = run.stderr_drain;
      } catch (const Error& e) {
        scan.twa_errors[i] = e.what();
        row.p_drain = std::nan("");
        row.stderr_drain = std::nan("");
      }
      return;
    }
    QmbReference& ref = scan.qmb[i - epsilons.size()];
    ref.particles = qmb_particles[i - epsilons.size()];
    try {
      ModelParams p = params;
      // Keep g = N U fixed so that every reference shares the classical limit.
      p.interaction = params.g() / ref.particles;
      p.particles = ref.particles;
      StepControl ctrl;
      ctrl.sample_count = 1;
      ref.p_drain = transfer_efficiency_q(run_qmb(p, protocol, inner, ctrl));
    } catch (const Error& e) {
      ref.error = e.what();
      ref.p_drain = std::nan("");
    }
  });
  // Plateau flags compare successive successful rows in epsilon order.
  const EpsilonRow* prev = nullptr;
  for (std::size_t i = 0; i < scan.twa.size(); ++i) {
    if (!scan.twa_errors[i].empty()) continue;
    EpsilonRow& row = scan.twa[i];
    if (prev) {
      const double se = std::hypot(prev->stderr_drain, row.stderr_drain);
      row.plateau = std::abs(row.p_drain - prev->p_drain) < 2.0 * se;
    }
    prev = &row;
  }
  return scan;
}

TraceResult trace_run(const ModelParams& params, const SweepProtocol& protocol,
                      const std::vector<Method>& methods, const ScanOptions& opts) {
  TraceResult out;
  try {
    out.windows = instability_windows(stability_profile(params));
  } catch (const Error& e) {
    out.errors.push_back(std::string("stability: ") + e.what());
  }
  for (Method m : methods) {
    try {
      switch (m) {
        case Method::Mft: {
          IntegratorControl c;
          c.sample_count = opts.sample_count;
          out.mft = integrate_trajectory(source_orbital(params.sites), protocol, params, c);
          break;
        }
        case Method::Twa: {
          const Cloud cloud = sample_cloud(params, opts.n_traj, opts.width, opts.seed);
          out.twa = propagate_cloud(cloud, protocol, params, cloud_control(opts));
          break;
        }
        case Method::Qmb: {
          StepControl ctrl;
          ctrl.sample_count = opts.sample_count;
          out.qmb = run_qmb(params, protocol, opts, ctrl);
          break;
        }
      }
    } catch (const Error& e) {
      out.errors.push_back(to_string(m) + ": " + e.what());
    }
  }
  return out;
}

double max_drain_jump(const std::vector<CloudSample>& samples) {
  double jump = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    jump = std::max(jump, std::abs(samples[i].occupations.back() - samples[i - 1].occupations.back()));
  return jump;
}

void write_rates_csv(std::ostream& out, const std::vector<RateRow>& rows) {
  csv::comment(out, "transfer efficiency vs sweep rate; rate = (pi/2) 10^-k in K; stderr for twa only; "
                    "failed rows carry NaN and ok = 0");
  csv::header(out, {"method", "rate_exponent", "rate", "p_drain", "stderr", "ok"});
  for (const auto& r : rows) {
    out << to_string(r.method) << ',';
    csv::row(out, {r.exponent, r.rate, r.p_drain, r.stderr_drain, r.ok() ? 1.0 : 0.0});
  }
  for (const auto& r : rows)
    if (!r.ok()) csv::comment(out, "error " + to_string(r.method) + " k=" + csv::num(r.exponent) + ": " + r.error);
}

void write_qmb_reference_csv(std::ostream& out, const std::vector<QmbReference>& rows) {
  csv::comment(out, "quantum reference efficiencies at fixed g = N U");
  csv::header(out, {"N", "p_drain", "ok"});
  for (const auto& r : rows)
    csv::row(out, {static_cast<double>(r.particles), r.p_drain, r.error.empty() ? 1.0 : 0.0});
  for (const auto& r : rows)
    if (!r.error.empty()) csv::comment(out, "error N=" + std::to_string(r.particles) + ": " + r.error);
}

void write_windows_comment(std::ostream& out, const std::vector<Window>& windows) {
  for (const auto& w : windows)
    csv::comment(out, "instability_window " + csv::num(w.lo) + " " + csv::num(w.hi));
}

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  std::ostringstream hex;
  for (unsigned char c : digest) hex << std::hex << std::setw(2) << std::setfill('0') << int(c);
  return hex.str();
}

nlohmann::json params_json(const ModelParams& params) {
  const Dimensionless d = derive_dimensionless(params);
  return {{"M", params.sites}, {"N", params.particles}, {"U", params.interaction},
          {"V", params.detuning}, {"K", params.hopping}, {"g", params.g()},
          {"u", d.u}, {"v", d.v}};
}

ModelParams params_from_json(const nlohmann::json& j) {
  ModelParams p;
  p.sites = j.at("M").get<int>();
  p.particles = j.at("N").get<int>();
  p.interaction = j.at("U").get<double>();
  p.detuning = j.at("V").get<double>();
  p.hopping = j.at("K").get<double>();
  p.validate();
  return p;
}

std::string RunManifest::hash() const {
  const nlohmann::json key{{"command", command}, {"params", params}, {"options", options}};
  return git_blob_hash(key.dump());
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  const nlohmann::json run{{"record", "run"},        {"hash", m.hash()},
                           {"command", m.command},   {"params", m.params},
                           {"options", m.options},   {"seeds", m.seeds},
                           {"version", m.version},   {"started", m.started},
                           {"wall_clock_s", m.wall_clock_s}, {"exit_code", m.exit_code}};
  out << run.dump() << '\n';
  for (const auto& f : m.outputs) out << nlohmann::json{{"record", "output"}, {"file", f}}.dump() << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read manifest " + path.string());
  RunManifest m;
  std::string line;
  bool have_run = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      const std::string kind = j.at("record").get<std::string>();
      if (kind == "run") {
        m.command = j.at("command").get<std::string>();
        m.params = j.at("params");
        m.options = j.at("options");
        m.seeds = j.value("seeds", std::vector<std::uint64_t>{});
        m.version = j.value("version", std::string{});
        m.started = j.value("started", std::string{});
        m.wall_clock_s = j.value("wall_clock_s", 0.0);
        m.exit_code = j.value("exit_code", 0);
        have_run = true;
      } else if (kind == "output") {
        m.outputs.push_back(j.at("file").get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (!have_run) throw ConfigError("manifest " + path.string() + " has no run record");
  return m;
}

}  // namespace bhc
