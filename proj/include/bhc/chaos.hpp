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

#ifndef BHC_CHAOS_HPP
#define BHC_CHAOS_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "bhc/classical.hpp"
#include "bhc/model.hpp"
#include "bhc/stability.hpp"
#include "bhc/twa.hpp"

namespace bhc {

/// Canonical chart on sites 1, 2 and M:
///   p1 = n1/N, p2 = n2/N, q1 = phi1 - phiM, q2 = phi2 - phiM.
struct ChartPoint {
  double p1 = 0.0;
  double p2 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
};

ChartPoint chart(const Orbital& psi);

/// Inverse chart with phiM = 0 and unit norm; the remaining population goes
/// to site M (sites 3..M-1 must be empty, i.e. M = 3).
Orbital from_chart(const ChartPoint& c, int sites);

/// Angle wrapped to (-pi, pi].
double wrap_angle(double a);

struct SectionPoint {
  std::size_t seed_index = 0;
  double t = 0.0;
  double radius = 0.0;       // 1 - n1/N
  double angle = 0.0;        // q1, in (-pi, pi]
  double energy = 0.0;       // E/N of the source trajectory
  double color_value = 0.0;  // time-averaged n2/N of the source trajectory
};

struct SectionControl {
  IntegratorControl integrator{};
  double time_tol = 1e-8;   // bisection accuracy of crossing times
  std::size_t max_crossings = 0;  // 0: no limit
  unsigned workers = 0;
};

/// Crossings of q2 = q2(SP) with dq2/dt > 0 under the frozen H(theta), one
/// list per seed. Crossings where n2 or nM vanishes are skipped.
std::vector<std::vector<SectionPoint>> poincare_section(double theta, const ModelParams& params,
                                                        const std::vector<Orbital>& seeds,
                                                        double t_max,
                                                        const SectionControl& ctrl = {});

/// q2 of the central stationary point at theta (0 or pi for a real SP).
double section_cut(const StationaryPoint& sp);

/// Up to `count` seeds on the cut q2 = q2(SP) at energy `energy`, with
/// radii (k + 1/2)/count along the rays q1 = q1(SP) and q1(SP) + pi; p2 is
/// solved for the energy. Radii without a solution are skipped. M = 3 only.
std::vector<Orbital> radial_fan(const StationaryPoint& sp, const ModelParams& params,
                                double energy, int count = 24);

/// Instantaneous (radius, angle) of every cloud member; energies at theta,
/// color_value = n2/N of the member.
std::vector<SectionPoint> final_cloud_section(const std::vector<Orbital>& ensemble, double theta,
                                              const ModelParams& params);

/// Two-means split of a 1D sample: |m1 - m2| over the pooled within-cluster
/// standard deviation.
double two_cluster_separation(std::vector<double> values);

/// Median over points of the Cartesian distance to `reference` in the
/// (radius cos angle, radius sin angle) plane.
double median_section_distance(const std::vector<SectionPoint>& points, double radius,
                               double angle);

/// Thickness of the crossing set as a curve: the largest distance from a
/// crossing to the line through its two nearest neighbours, in the Cartesian
/// (radius cos angle, radius sin angle) plane. Small for points on a closed
/// curve, of the order of the point spacing for area-filling sets.
double closure_gap(const std::vector<SectionPoint>& points);

enum class SpectralWindow { Hann, Rectangular };

struct ChaosScore {
  double pn = 1.0;
  std::size_t bins = 0;  // one-sided spectrum length
  SpectralWindow window = SpectralWindow::Hann;
};

/// (sum S)^2 / sum S^2 over the one-sided power spectrum of the mean-removed,
/// tapered signal. Needs at least 1024 samples; a constant signal scores 1.
ChaosScore participation_number(const std::vector<double>& signal,
                                SpectralWindow window = SpectralWindow::Hann);

/// sqrt(1 - |<psi_sp|psi>|^2) for the normalized pair.
double distance_from_sp(const Orbital& psi, const Orbital& psi_sp);

/// psi_sp + r along a fixed direction orthogonal to psi_sp, renormalized, so
/// that distance_from_sp is r to leading order.
Orbital offset_from_sp(const Orbital& psi_sp, double r);

struct ScatterPoint {
  double e_initial = 0.0;
  double e_final = 0.0;
};

struct EnergyScatter {
  std::vector<ScatterPoint> points;
  double pearson = 0.0;
};

double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// E/N of each seed at the protocol's start angle against its final E/N at
/// the end angle. Throws StatisticsError below 10 trajectories.
EnergyScatter energy_scatter(const SweepProtocol& protocol, const Cloud& cloud,
                             const CloudRun& run, const ModelParams& params);

struct DivergenceFit {
  double rate = 0.0;       // fitted d log r / dt
  double max_im = 0.0;     // Bogoliubov prediction
  double fit_time = 0.0;   // length of the fit window
};

/// Seeds the frozen dynamics at distance r0 along the most unstable
/// Bogoliubov mode of `sp` and least-squares fits log r(t) over the first
/// `efoldings` e-foldings.
DivergenceFit divergence_rate(const StationaryPoint& sp, const ModelParams& params,
                              double r0 = 1e-6, double efoldings = 2.0);

struct ChaosMapPoint {
  double u = 0.0;
  double theta = 0.0;
  double max_im = 0.0;
  double pn = 1.0;
};

struct ChaosMapControl {
  double r0 = 0.05;
  double duration = 2000.0;
  std::size_t samples = 4096;
  unsigned workers = 0;
};

/// PN of r(t) for a trajectory started near the central SP, over a (u, theta)
/// grid at fixed v and N.
std::vector<ChaosMapPoint> chaos_map(int sites, int particles, double v,
                                     const std::vector<double>& us,
                                     const std::vector<double>& thetas,
                                     const ChaosMapControl& ctrl = {});

void write_section_csv(std::ostream& out, const std::vector<std::vector<SectionPoint>>& sections,
                       const std::string& note);
void write_scatter_csv(std::ostream& out, const EnergyScatter& scatter);
void write_chaos_map_csv(std::ostream& out, const std::vector<ChaosMapPoint>& map);

}  // namespace bhc

#endif  // BHC_CHAOS_HPP
