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

#ifndef BHC_QUANTUM_HPP
#define BHC_QUANTUM_HPP

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "bhc/fock.hpp"
#include "bhc/model.hpp"

namespace bhc {

struct QuantumState {
  ComplexVector amplitudes;
  double t = 0.0;
  double theta = 0.0;
};

/// All particles on site 1, the Fock state (N, 0, ..., 0) at basis index 0.
QuantumState source_state(const FockBasis& basis);

/// Step-size and accuracy controls of the Krylov propagator.
///
/// dt = min(norm_factor / ||H||, theta_step / rate); each step is accepted
/// only if the Lanczos error estimate is below `tolerance`, otherwise halved.
struct StepControl {
  double norm_factor = 0.5;
  double theta_step = 1e-3;
  int krylov_dim = 12;
  double tolerance = 1e-10;
  double min_dt = 1e-12;
  int sample_count = 500;               // uniform samples over the run
  std::vector<double> snapshot_thetas;  // full states kept at these angles
  double norm_drift_limit = 1e-9;
};

struct QuantumSample {
  double t = 0.0;
  double theta = 0.0;
  std::vector<double> occupations;  // <n_j>/N
  double energy_per_particle = 0.0;
  double norm_error = 0.0;
};

struct QuantumRun {
  std::vector<QuantumSample> samples;
  std::vector<QuantumState> snapshots;
  QuantumState final_state;
  bool completed = false;
  std::size_t steps = 0;
  double max_norm_error = 0.0;
};

/// One Krylov step psi <- exp(-i H(theta) dt) psi. Returns the a-posteriori
/// error estimate; psi is left untouched when it exceeds `tolerance`.
double krylov_step(const FockOperatorSet& ops, double theta, double dt, int krylov_dim,
                   double tolerance, ComplexVector& psi);

/// Time-dependent Schroedinger propagation with H(theta(t)) held constant
/// over each step at the step's midpoint angle. Throws IntegrationError on
/// step underflow or when the final norm drift exceeds the configured limit.
QuantumRun propagate_quantum(const QuantumState& initial, const SweepProtocol& protocol,
                             const FockOperatorSet& ops, const StepControl& ctrl = {});

/// Expected number of propagation steps (for long-run guards).
double estimate_quantum_steps(const SweepProtocol& protocol, const FockOperatorSet& ops,
                              const StepControl& ctrl = {});

/// <n_M>/N at the end of a completed run; PartialRunError otherwise.
double transfer_efficiency_q(const QuantumRun& run);

struct LevelEntry {
  int level = 0;
  double weight = 0.0;
  double energy_per_particle = 0.0;
  double drain_population = 0.0;
};

struct LevelTracePoint {
  double theta = 0.0;
  std::vector<LevelEntry> retained;
  double residual = 0.0;  // total weight of levels below threshold
};

struct LevelTrace {
  double threshold = 1e-3;
  std::vector<LevelTracePoint> points;
};

/// Uniform grid of `count` angles over [0, pi/2].
std::vector<double> theta_grid(int count);

/// Decomposes each snapshot of `run` over the instantaneous eigenbasis and
/// keeps the levels with weight >= threshold. The run must have been made
/// with StepControl::snapshot_thetas set to the desired grid.
LevelTrace level_overlap_trace(const QuantumRun& run, const FockOperatorSet& ops,
                               double threshold = 1e-3,
                               std::size_t cap = kDenseSpectrumCap);

void write_quantum_csv(std::ostream& out, const QuantumRun& run, int sites);
void write_level_trace_csv(std::ostream& out, const LevelTrace& trace);

}  // namespace bhc

#endif  // BHC_QUANTUM_HPP
