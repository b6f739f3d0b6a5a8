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

#ifndef BHC_CLASSICAL_HPP
#define BHC_CLASSICAL_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "bhc/model.hpp"

namespace bhc {

/// Orbital amplitudes psi_j = alpha_j / sqrt(N). Mean-field states carry unit
/// norm; Wigner-cloud members carry their own sampled norm.
using Orbital = std::vector<std::complex<double>>;

struct ClassicalState {
  Orbital psi;
  double t = 0.0;
  double theta = 0.0;
};

double orbital_norm2(const Orbital& psi);

/// The condensate (1, 0, ..., 0) on `sites` sites.
Orbital source_orbital(int sites);

/// Right-hand side of the discrete nonlinear Schroedinger equation
///   i dpsi_j/dt = (V_j + g |psi_j|^2) psi_j - Omega_j/2 psi_{j+1} - Omega_{j-1}/2 psi_{j-1}.
Orbital eom_rhs(const Orbital& psi, double theta, const ModelParams& params);

/// sum_j V_j |psi_j|^2 + g/2 sum_j |psi_j|^4 - sum_j Omega_j Re(psi*_{j+1} psi_j).
/// This is E/N for a unit-norm orbital.
double classical_energy(const Orbital& psi, double theta, const ModelParams& params);

/// classical_energy divided by the orbital's own norm: energy per particle
/// of a trajectory carrying N |psi|^2 particles.
double energy_per_particle(const Orbital& psi, double theta, const ModelParams& params);

/// |psi_j|^2 / sum_k |psi_k|^2.
std::vector<double> orbital_occupations(const Orbital& psi);

struct IntegratorControl {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double initial_dt = 1e-2;
  double min_dt = 1e-12;
  int sample_count = 500;          // uniform samples over the run; 0 keeps none
  double norm_drift_limit = 1e-9;  // relative, checked after every run
};

struct ClassicalSample {
  double t = 0.0;
  double theta = 0.0;
  std::vector<double> occupations;
  double energy_per_particle = 0.0;
  double norm_error = 0.0;
};

struct ClassicalRun {
  std::vector<ClassicalSample> samples;
  ClassicalState final_state;
  std::size_t steps = 0;
  double max_norm_error = 0.0;
};

/// Adaptive embedded Runge-Kutta 7(8) integration of the mean-field equations
/// under a sweep (or frozen) protocol.
class ClassicalIntegrator {
 public:
  using StepObserver = std::function<void(double t, const Orbital& psi)>;

  ClassicalIntegrator(ModelParams params, SweepProtocol protocol, IntegratorControl ctrl = {});

  const ModelParams& params() const { return params_; }
  const SweepProtocol& protocol() const { return protocol_; }
  const IntegratorControl& control() const { return ctrl_; }

  /// Advances psi from t to t_end with adaptive steps. `observer`, if set,
  /// sees every accepted step. Throws IntegrationError on step underflow.
  void advance(Orbital& psi, double& t, double t_end, const StepObserver& observer = {});

  /// One explicit 8th-order step of size dt from (t, psi), without error
  /// control; used to refine event times inside an accepted step.
  Orbital step_fixed(const Orbital& psi, double t, double dt) const;

  std::size_t steps() const { return steps_; }

 private:
  ModelParams params_;
  SweepProtocol protocol_;
  IntegratorControl ctrl_;
  double dt_;
  std::size_t steps_ = 0;
};

/// Integrates psi0 over the whole protocol, sampling observables. Throws
/// IntegrationError if the relative norm drift exceeds the control limit.
ClassicalRun integrate_trajectory(const Orbital& psi0, const SweepProtocol& protocol,
                                  const ModelParams& params, const IntegratorControl& ctrl = {});

/// |psi_M|^2 at the end of the sweep, starting from (1, 0, ..., 0).
double mft_efficiency(const SweepProtocol& protocol, const ModelParams& params,
                      const IntegratorControl& ctrl = {});

void write_classical_csv(std::ostream& out, const ClassicalRun& run, int sites);

}  // namespace bhc

#endif  // BHC_CLASSICAL_HPP
