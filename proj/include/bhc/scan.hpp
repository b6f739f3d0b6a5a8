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

#ifndef BHC_SCAN_HPP
#define BHC_SCAN_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "bhc/classical.hpp"
#include "bhc/error.hpp"
#include "bhc/fock.hpp"
#include "bhc/quantum.hpp"
#include "bhc/stability.hpp"
#include "bhc/twa.hpp"

namespace bhc {

enum class Method { Mft, Twa, Qmb };

std::string to_string(Method m);
Method parse_method(const std::string& name);

/// Raised when a quantum run would exceed the step budget without consent.
class LongRunError : public Error {
 public:
  LongRunError(double estimate, double limit)
      : Error("estimated " + std::to_string(static_cast<long long>(estimate)) +
              " Krylov steps exceeds " + std::to_string(static_cast<long long>(limit)) +
              "; pass --yes to run anyway"),
        estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

struct ScanOptions {
  int n_traj = 1000;
  double width = 1.0;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::size_t basis_cap = FockBasis::kDefaultCap;
  double step_limit = 1e7;
  bool allow_long = false;
  int sample_count = 500;
};

/// Quantum run from (N, 0, ..., 0) with the long-run guard applied.
QuantumRun run_qmb(const ModelParams& params, const SweepProtocol& protocol,
                   const ScanOptions& opts, StepControl ctrl = {});

/// Krylov step estimate for a full quantum sweep.
double qmb_step_estimate(const ModelParams& params, const SweepProtocol& protocol,
                         const ScanOptions& opts);

struct RateRow {
  Method method = Method::Mft;
  double exponent = 0.0;
  double rate = 0.0;
  double p_drain = 0.0;
  double stderr_drain = 0.0;  // TWA only
  std::string error;          // empty on success

  bool ok() const { return error.empty(); }
};

/// One row per (method, exponent), computed independently; a failing row
/// records its error and the scan goes on.
std::vector<RateRow> scan_rates(const ModelParams& params, const std::vector<Method>& methods,
                                const std::vector<double>& exponents, const ScanOptions& opts);

struct QmbReference {
  int particles = 0;
  double p_drain = 0.0;
  std::string error;
};

struct EpsilonScan {
  std::vector<EpsilonRow> twa;
  std::vector<std::string> twa_errors;  // parallel to twa; empty on success
  std::vector<QmbReference> qmb;
};

EpsilonScan scan_epsilon(const ModelParams& params, const SweepProtocol& protocol,
                         const std::vector<double>& epsilons, const std::vector<int>& qmb_particles,
                         const ScanOptions& opts);

struct TraceResult {
  std::optional<ClassicalRun> mft;
  std::optional<CloudRun> twa;
  std::optional<QuantumRun> qmb;
  std::vector<Window> windows;
  std::vector<std::string> errors;
};

TraceResult trace_run(const ModelParams& params, const SweepProtocol& protocol,
                      const std::vector<Method>& methods, const ScanOptions& opts);

/// Largest change of the drain population between consecutive samples.
double max_drain_jump(const std::vector<CloudSample>& samples);

void write_rates_csv(std::ostream& out, const std::vector<RateRow>& rows);
void write_qmb_reference_csv(std::ostream& out, const std::vector<QmbReference>& rows);
void write_windows_comment(std::ostream& out, const std::vector<Window>& windows);

/// SHA-1 of "blob <size>\0<content>", as git computes object ids.
std::string git_blob_hash(const std::string& content);

nlohmann::json params_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& j);

/// Reproducibility record. The hash covers the command, resolved parameters
/// and output-affecting options only.
struct RunManifest {
  std::string command;
  nlohmann::json params;
  nlohmann::json options;
  std::vector<std::uint64_t> seeds;
  std::string version;
  std::string started;
  double wall_clock_s = 0.0;
  std::vector<std::string> outputs;
  int exit_code = 0;

  std::string hash() const;
};

/// runs/<hash>/manifest.jsonl: one "run" record, then one "output" record per file.
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace bhc

#endif  // BHC_SCAN_HPP
