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

#ifndef BHC_TWA_HPP
#define BHC_TWA_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "bhc/classical.hpp"
#include "bhc/error.hpp"
#include "bhc/model.hpp"

namespace bhc {

/// A truncated-Wigner cloud around the condensate (1, 0, ..., 0).
///
/// Seeds are alpha_j = sqrt(N) psi0_j + w (xi_j + i eta_j) / sqrt(2), kept
/// here as psi = alpha / sqrt(N) so that they feed the mean-field equations
/// with g = N U directly. Each seed carries its own norm.
struct Cloud {
  std::vector<Orbital> seeds;
  double width = 0.0;    // w; 1 is the coherent-state Wigner width
  double epsilon = 0.0;  // std of E/N over the seeds at theta = 0
  std::uint64_t seed = 0;
  int particles = 1;

  std::size_t size() const { return seeds.size(); }
};

/// Trajectory `index` of the stream `seed`; independent of any other index.
Orbital sample_seed(const ModelParams& params, double width, std::uint64_t seed,
                    std::size_t index);

Cloud sample_cloud(const ModelParams& params, int n_traj, double width, std::uint64_t seed);

/// Sample standard deviation of energy_per_particle over the seeds at theta=0.
double cloud_epsilon(const std::vector<Orbital>& seeds, const ModelParams& params);

/// Width w in [0, w_max] whose cloud (same seed stream) has epsilon within 1%
/// of the target. Throws RangeError if epsilon(w_max) is still too small.
double calibrate_width(const ModelParams& params, double target_epsilon, int n_traj,
                       std::uint64_t seed, double w_max = 8.0);

/// A failed trajectory aborts the cloud; the index is kept.
class TrajectoryError : public IntegrationError {
 public:
  TrajectoryError(std::size_t index, const IntegrationError& cause)
      : IntegrationError("trajectory " + std::to_string(index) + ": " + cause.what(),
                         cause.theta()),
        index_(index) {}

  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct CloudControl {
  IntegratorControl integrator{};
  int sample_count = 500;   // uniform samples of the averaged trajectory
  unsigned workers = 0;     // 0: one per hardware thread
  std::size_t chunk = 64;   // trajectories per reduction block
};

struct CloudSample {
  double t = 0.0;
  double theta = 0.0;
  std::vector<double> occupations;  // mean of each trajectory's own n_j / sum n
  double energy_per_particle = 0.0;
  double norm_error = 0.0;          // worst trajectory
};

struct CloudRun {
  std::vector<CloudSample> samples;
  std::vector<Orbital> final_ensemble;
  std::vector<double> drain;  // per-trajectory final n_M / sum n
  double p_drain = 0.0;
  double stderr_drain = 0.0;
  double max_norm_error = 0.0;
};

/// Propagates every seed through the protocol and averages. Results do not
/// depend on the worker count: blocks of trajectories are reduced in index order.
CloudRun propagate_cloud(const Cloud& cloud, const SweepProtocol& protocol,
                         const ModelParams& params, const CloudControl& ctrl = {});

struct EpsilonRow {
  double target_epsilon = 0.0;
  double epsilon = 0.0;
  double width = 0.0;
  double p_drain = 0.0;
  double stderr_drain = 0.0;
  bool plateau = false;  // within 2 combined standard errors of the previous row
};

std::vector<EpsilonRow> efficiency_vs_epsilon(const ModelParams& params,
                                              const SweepProtocol& protocol,
                                              const std::vector<double>& epsilons, int n_traj,
                                              std::uint64_t seed, const CloudControl& ctrl = {});

/// Mean and standard error of the mean; stderr is 0 for a single value.
std::pair<double, double> mean_stderr(const std::vector<double>& values);

/// Runs f(i) for i in [0, n) on `workers` threads (0: hardware concurrency).
/// The exception from the smallest failing index is rethrown.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& f);

unsigned resolve_workers(unsigned requested);

void write_cloud_csv(std::ostream& out, const std::vector<Orbital>& ensemble, int particles);
void write_twa_csv(std::ostream& out, const CloudRun& run, int sites);
void write_epsilon_csv(std::ostream& out, const std::vector<EpsilonRow>& rows);

}  // namespace bhc

#endif  // BHC_TWA_HPP
