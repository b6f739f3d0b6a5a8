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

#ifndef BHC_MODEL_HPP
#define BHC_MODEL_HPP

#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace bhc {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Bose-Hubbard chain parameters in energy units.
///
/// The interaction reaches every engine through g = N*U; the dimensionless
/// (u, v) pair is always derived, never stored.
struct ModelParams {
  int sites = 3;             // M
  int particles = 1;         // N
  double interaction = 0.0;  // U, on-site
  double detuning = 0.0;     // V, middle site
  double hopping = 1.0;      // K, sets energy and time units

  double g() const { return particles * interaction; }

  /// Throws InvalidParameter unless M >= 2, N >= 1, K > 0 and all finite.
  void validate() const;

  /// Builds (U, V) from the dimensionless pair u = sqrt(2) N U / K,
  /// v = sqrt(2) V / K.
  static ModelParams from_dimensionless(int sites, int particles, double u,
                                        double v, double hopping = 1.0);
};

struct Dimensionless {
  double u = 0.0;
  double v = 0.0;
};

/// u = sqrt(2) N U / K, v = sqrt(2) V / K. Throws InvalidParameter for K <= 0.
Dimensionless derive_dimensionless(const ModelParams& params);

/// 0-based index of the detuned site (M/2 + 1 in 1-based numbering for even M).
int middle_site(int sites);

/// Bond couplings Omega_j, j = 1..M-1: K sin(theta) on odd bonds, K cos(theta)
/// on even bonds (1-based bond numbering; element 0 is bond 1).
std::vector<double> hopping_profile(double theta, const ModelParams& params);

/// On-site potentials V_j (V on the middle site, zero elsewhere).
std::vector<double> site_potentials(const ModelParams& params);

/// Rate for the exponent notation theta_dot = (pi/2) * 10^-k.
double rate_from_exponent(double exponent);

/// Linear sweep theta(t) = theta_0 + rate * t, clamped to [0, pi/2].
///
/// A frozen protocol (rate 0) holds theta fixed for a given duration and is
/// used for stationary-Hamiltonian runs.
class SweepProtocol {
 public:
  static SweepProtocol sweep(double rate);
  static SweepProtocol from_exponent(double exponent);
  static SweepProtocol frozen(double theta, double duration);

  double rate() const { return rate_; }
  double start_theta() const { return start_theta_; }
  double duration() const { return duration_; }
  double end_theta() const { return theta_of(duration_); }
  bool is_frozen() const { return rate_ == 0.0; }

  double theta_of(double t) const;

 private:
  SweepProtocol(double start_theta, double rate, double duration)
      : start_theta_(start_theta), rate_(rate), duration_(duration) {}

  double start_theta_;
  double rate_;
  double duration_;
};

/// Flat key-value model configuration. Keys: M, N, U, V, K, u, v,
/// rate_exponent. Lines are `key = value`; `#` starts a comment.
struct ModelConfig {
  std::optional<int> M;
  std::optional<int> N;
  std::optional<double> U;
  std::optional<double> V;
  std::optional<double> K;
  std::optional<double> u;
  std::optional<double> v;
  std::optional<double> rate_exponent;
};

ModelConfig parse_model_config(const std::string& text);
ModelConfig load_model_config(const std::filesystem::path& path);

/// Layers command-line overrides on top of file values. An override of U (V)
/// drops a file-provided u (v) so that the explicit flag is honoured.
ModelConfig merge_config(const ModelConfig& file, const ModelConfig& overrides);

/// Resolves to ModelParams; when both (U, V) and (u, v) are present the
/// dimensionless pair wins. Throws ConfigError on missing M or N.
ModelParams resolve_params(const ModelConfig& config);

std::string describe(const ModelParams& params);

}  // namespace bhc

#endif  // BHC_MODEL_HPP
