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

#ifndef BHC_STABILITY_HPP
#define BHC_STABILITY_HPP

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <vector>

#include "bhc/classical.hpp"
#include "bhc/model.hpp"

namespace bhc {

// The stationary-point and Bogoliubov computations run in extended precision:
// the spectrum has defective (Jordan) pairs, at the zero mode always and at
// isolated exceptional points, where double rounding is amplified to ~1e-8.
using Real = long double;
using RealVec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using RealMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using Frequency = std::complex<Real>;

/// Real solution of (H0(theta) + g P) psi = mu psi with |psi| = 1.
struct StationaryPoint {
  double theta = 0.0;
  RealVec psi;  // gauge: psi_1 >= 0
  Real mu = 0;
  Real energy = 0;                      // E_SP / N
  std::vector<Frequency> frequencies;   // sorted by (Im, Re)
  Real residual = 0;

  Orbital orbital() const;
  Real max_im() const;
  Real max_re() const;
};

/// Single-particle matrix H0(theta): V on the middle site, -Omega_j/2 on bonds.
RealMat single_particle_matrix(double theta, const ModelParams& params);

/// Newton solve from a seed (mu taken from the seed's Rayleigh quotient).
/// Throws ConvergenceError after `max_iter` iterations without residual <= tol.
StationaryPoint find_sp(double theta, const ModelParams& params, const RealVec& seed,
                        int max_iter = 50, Real tol = 1e-13L);

/// [[A, -gP], [gP, -A]] with A = H0 + 2 g P - mu.
RealMat bogoliubov_matrix(const StationaryPoint& sp, const ModelParams& params);

/// Eigenvalues of the Bogoliubov matrix sorted by (Im, Re).
std::vector<Frequency> bogoliubov_frequencies(const StationaryPoint& sp,
                                              const ModelParams& params);

/// Nonzero closed-form trimer frequencies (omega_+, omega_-) at theta = pi/4,
/// in units of K. The expressions are written in units of the instantaneous
/// bond coupling Omega = K/sqrt(2).
struct TrimerFrequencies {
  Frequency plus;
  Frequency minus;
};
TrimerFrequencies closed_form_trimer_freqs(Real u, Real v, Real hopping = 1);

/// The v = 0 form +-(Omega / (2 sqrt 2)) [(4 + u^2) +- u sqrt(u^2 - 8)]^(1/2).
/// Returns the four values (+a, -a, +b, -b).
std::vector<Frequency> closed_form_trimer_freqs_v0(Real u, Real hopping = 1);

struct BranchControl {
  double initial_step = kHalfPi / 500.0;
  double min_step = 1e-6;
  double continuity = 0.1;  // max |psi(theta_i+1) - psi(theta_i)|
};

struct StabilityProfile {
  std::vector<StationaryPoint> points;
  ModelParams params;
};

/// Follows the branch connected to (1, 0, ..., 0) at theta = 0 onto the
/// increasing grid, refining the step where Newton fails or the branch
/// jumps. Throws BranchLossError below the minimum step.
StabilityProfile continue_branch(const ModelParams& params, const std::vector<double>& grid,
                                 const BranchControl& ctrl = {});

/// Uniform grid of `count` points on [0, pi/2].
StabilityProfile stability_profile(const ModelParams& params, int count = 501);

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

/// Intervals where max Im(omega) > tol_im, edges bisected to `edge_tol`.
std::vector<Window> instability_windows(const StabilityProfile& profile, double tol_im = 1e-6,
                                        double edge_tol = 1e-3);

struct RegimeBorders {
  double rate_sudden_diabatic = 0.0;        // uniform-in-theta mean of max Re(omega)
  double rate_diabatic_quasistatic = 0.0;   // uniform-in-theta mean of max Im(omega)
  double integrated_im = 0.0;               // trapezoid integral of max Im(omega) d theta
};

RegimeBorders regime_borders(const StabilityProfile& profile);

/// CSV: theta, E_SP/N, mu, then re_w<k>, im_w<k> for each sorted eigenvalue.
void write_stability_csv(std::ostream& out, const StabilityProfile& profile);
/// JSON lines {"theta_lo":..,"theta_hi":..}.
void write_windows_jsonl(std::ostream& out, const std::vector<Window>& windows);

}  // namespace bhc

#endif  // BHC_STABILITY_HPP
