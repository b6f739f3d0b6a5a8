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

#include "bhc/chaos.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <unsupported/Eigen/FFT>

#include "bhc/csv.hpp"
#include "bhc/error.hpp"

namespace bhc {

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::remainder(a, 2.0 * pi);
  return a <= -pi ? a + 2.0 * pi : a;
}

ChartPoint chart(const Orbital& psi) {
  const double n = orbital_norm2(psi);
  const auto& last = psi.back();
  ChartPoint c;
  c.p1 = std::norm(psi[0]) / n;
  c.p2 = std::norm(psi[1]) / n;
  c.q1 = wrap_angle(std::arg(psi[0]) - std::arg(last));
  c.q2 = wrap_angle(std::arg(psi[1]) - std::arg(last));
  return c;
}

Orbital from_chart(const ChartPoint& c, int sites) {
  if (sites < 3) throw InvalidParameter("chart needs at least 3 sites");
  const double rest = 1.0 - c.p1 - c.p2;
  if (c.p1 < 0.0 || c.p2 < 0.0 || rest < -1e-15)
    throw InvalidParameter("chart populations out of range");
  Orbital psi(static_cast<std::size_t>(sites), 0.0);
  psi[0] = std::polar(std::sqrt(c.p1), c.q1);
  psi[1] = std::polar(std::sqrt(c.p2), c.q2);
  psi.back() = std::sqrt(std::max(rest, 0.0));
  return psi;
}

double section_cut(const StationaryPoint& sp) {
  const Orbital o = sp.orbital();
  if (o[1] == 0.0 || o.back() == 0.0) return 0.0;
  return chart(o).q2;
}

namespace {

struct SeedSection {
  std::vector<SectionPoint> points;
};

SeedSection section_of(double theta, const ModelParams& params, const Orbital& seed,
                       std::size_t seed_index, double cut, double t_max,
                       const SectionControl& ctrl) {
  const SweepProtocol frozen = SweepProtocol::frozen(theta, t_max);
  ClassicalIntegrator integrator(params, frozen, ctrl.integrator);
  const double energy = energy_per_particle(seed, theta, params);
  auto offset = [&](const Orbital& psi) -> std::optional<double> {
    if (psi[1] == 0.0 || psi.back() == 0.0) return std::nullopt;
    return wrap_angle(chart(psi).q2 - cut);
  };

  SeedSection out;
  Orbital psi = seed;
  Orbital prev = seed;
  double t = 0.0;
  double t_prev = 0.0;
  double n2_integral = 0.0;
  double p2_prev = chart(seed).p2;
  bool done = false;

  auto observer = [&](double t_now, const Orbital& now) {
    const double p2_now = chart(now).p2;
    n2_integral += 0.5 * (t_now - t_prev) * (p2_now + p2_prev);
    const auto f0 = offset(prev);
    const auto f1 = offset(now);
    if (!done && f0 && f1 && *f0 < 0.0 && *f1 >= 0.0 && *f1 - *f0 < std::numbers::pi) {
      double lo = 0.0;
      double hi = t_now - t_prev;
      while (hi - lo > ctrl.time_tol) {
        const double mid = 0.5 * (lo + hi);
        const auto fm = offset(integrator.step_fixed(prev, t_prev, mid));
        if (fm && *fm < 0.0) lo = mid;
        else hi = mid;
      }
      const double tau = 0.5 * (lo + hi);
      const ChartPoint c = chart(integrator.step_fixed(prev, t_prev, tau));
      SectionPoint p;
      p.seed_index = seed_index;
      p.t = t_prev + tau;
      p.radius = 1.0 - c.p1;
      p.angle = c.q1;
      p.energy = energy;
      out.points.push_back(p);
      if (ctrl.max_crossings > 0 && out.points.size() >= ctrl.max_crossings) done = true;
    }
    prev = now;
    t_prev = t_now;
    p2_prev = p2_now;
  };

  // Advance in slices so that a crossing budget can end the run early.
  const double slice = std::max(1.0, t_max / 1000.0);
  while (t < t_max && !done) integrator.advance(psi, t, std::min(t_max, t + slice), observer);
  const double average = t > 0.0 ? n2_integral / t : p2_prev;
  for (auto& p : out.points) p.color_value = average;
  return out;
}

}  // namespace

std::vector<std::vector<SectionPoint>> poincare_section(double theta, const ModelParams& params,
                                                        const std::vector<Orbital>& seeds,
                                                        double t_max,
                                                        const SectionControl& ctrl) {
  params.validate();
  if (params.sites < 3) throw InvalidParameter("sections need at least 3 sites");
  const StabilityProfile profile = continue_branch(params, {0.0, theta});
  const double cut = section_cut(profile.points.back());
  std::vector<std::vector<SectionPoint>> out(seeds.size());
  parallel_for(seeds.size(), ctrl.workers, [&](std::size_t i) {
    out[i] = section_of(theta, params, seeds[i], i, cut, t_max, ctrl).points;
  });
  return out;
}

std::vector<Orbital> radial_fan(const StationaryPoint& sp, const ModelParams& params,
                                double energy, int count) {
  if (params.sites != 3) throw InvalidParameter("radial_fan is defined for 3 sites");
  const double cut = section_cut(sp);
  const ChartPoint at_sp = chart(sp.orbital());
  auto energy_at = [&](double p1, double p2, double q1) {
    return energy_per_particle(from_chart({p1, p2, q1, cut}, 3), sp.theta, params) - energy;
  };
  std::vector<Orbital> seeds;
  for (int k = 0; k < count; ++k) {
    const double p1 = 1.0 - (k + 0.5) / count;
    for (double q1 : {at_sp.q1, wrap_angle(at_sp.q1 + std::numbers::pi)}) {
      constexpr int kScan = 200;
      const double top = 1.0 - p1;
      double best = -1.0;
      double prev_p2 = 0.0;
      double prev_f = energy_at(p1, 0.0, q1);
      for (int s = 1; s <= kScan; ++s) {
        const double p2 = top * s / kScan;
        const double f = energy_at(p1, p2, q1);
        if ((prev_f < 0.0) != (f < 0.0)) {
          double lo = prev_p2;
          double hi = p2;
          const bool lo_negative = prev_f < 0.0;
          for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            ((energy_at(p1, mid, q1) < 0.0) == lo_negative ? lo : hi) = mid;
          }
          const double root = 0.5 * (lo + hi);
          if (best < 0.0 || std::abs(root - at_sp.p2) < std::abs(best - at_sp.p2)) best = root;
        }
        prev_p2 = p2;
        prev_f = f;
      }
      if (best >= 0.0) {
        seeds.push_back(from_chart({p1, best, q1, cut}, 3));
        break;
      }
    }
  }
  return seeds;
}

std::vector<SectionPoint> final_cloud_section(const std::vector<Orbital>& ensemble, double theta,
                                              const ModelParams& params) {
  std::vector<SectionPoint> out;
  out.reserve(ensemble.size());
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const ChartPoint c = chart(ensemble[i]);
    SectionPoint p;
    p.seed_index = i;
    p.radius = 1.0 - c.p1;
    p.angle = c.q1;
    p.energy = energy_per_particle(ensemble[i], theta, params);
    p.color_value = c.p2;
    out.push_back(p);
  }
  return out;
}

double two_cluster_separation(std::vector<double> values) {
  const std::size_t n = values.size();
  if (n < 4) return 0.0;
  std::sort(values.begin(), values.end());
  std::vector<double> prefix(n + 1, 0.0);
  std::vector<double> prefix2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + values[i];
    prefix2[i + 1] = prefix2[i] + values[i] * values[i];
  }
  auto ss = [&](std::size_t a, std::size_t b) {
    const double k = static_cast<double>(b - a);
    const double s = prefix[b] - prefix[a];
    return std::max(0.0, prefix2[b] - prefix2[a] - s * s / k);
  };
  double best_ss = std::numeric_limits<double>::infinity();
  double gap = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double w = ss(0, i) + ss(i, n);
    if (w < best_ss) {
      best_ss = w;
      gap = (prefix[n] - prefix[i]) / static_cast<double>(n - i) - prefix[i] / static_cast<double>(i);
    }
  }
  const double pooled = std::sqrt(best_ss / static_cast<double>(n - 2));
  if (pooled == 0.0) return gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return gap / pooled;
}

double median_section_distance(const std::vector<SectionPoint>& points, double radius,
                               double angle) {
  if (points.empty()) throw StatisticsError("median of an empty section");
  const std::complex<double> ref = std::polar(radius, angle);
  std::vector<double> d;
  d.reserve(points.size());
  for (const auto& p : points) d.push_back(std::abs(std::polar(p.radius, p.angle) - ref));
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  return d[d.size() / 2];
}

double closure_gap(const std::vector<SectionPoint>& points) {
  const std::size_t n = points.size();
  if (n < 3) throw StatisticsError("closure gap needs at least 3 crossings");
  std::vector<std::complex<double>> z;
  z.reserve(n);
  for (const auto& p : points) z.push_back(std::polar(p.radius, p.angle));
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t a = n;
    std::size_t b = n;
    double da = std::numeric_limits<double>::infinity();
    double db = da;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = std::abs(z[j] - z[i]);
      if (d < da) {
        b = a;
        db = da;
        a = j;
        da = d;
      } else if (d < db) {
        b = j;
        db = d;
      }
    }
    const std::complex<double> chord = z[b] - z[a];
    const double len = std::abs(chord);
    const double off = len > 0.0 ? std::abs((std::conj(chord) * (z[i] - z[a])).imag()) / len : da;
    worst = std::max(worst, off);
  }
  return worst;
}

ChaosScore participation_number(const std::vector<double>& signal, SpectralWindow window) {
  const std::size_t n = signal.size();
  if (n < 1024) throw InvalidParameter("participation_number needs at least 1024 samples");
  double mean = 0.0;
  for (double x : signal) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> tapered(n);
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (window == SpectralWindow::Hann)
      w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n));
    tapered[i] = w * (signal[i] - mean);
  }
  ChaosScore score;
  score.window = window;
  score.bins = n / 2 + 1;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, tapered);
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::size_t k = 0; k < score.bins; ++k) {
    const double s = std::norm(spectrum[k]);
    sum += s;
    sum2 += s * s;
  }
  score.pn = sum2 > 0.0 ? sum * sum / sum2 : 1.0;
  return score;
}

double distance_from_sp(const Orbital& psi, const Orbital& psi_sp) {
  if (psi.size() != psi_sp.size()) throw InvalidParameter("distance_from_sp: length mismatch");
  std::complex<double> overlap = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) overlap += std::conj(psi_sp[j]) * psi[j];
  const double f = std::norm(overlap) / (orbital_norm2(psi) * orbital_norm2(psi_sp));
  return std::sqrt(std::max(0.0, 1.0 - f));
}

Orbital offset_from_sp(const Orbital& psi_sp, double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw InvalidParameter("offset radius must lie in [0, 1]");
  const double n = std::sqrt(orbital_norm2(psi_sp));
  Orbital base = psi_sp;
  for (auto& z : base) z /= n;
  for (std::size_t trial = 0; trial < base.size(); ++trial) {
    Orbital d(base.size());
    for (std::size_t j = 0; j < d.size(); ++j)
      d[j] = std::complex<double>(0.0, 1.0 + 0.5 * static_cast<double>((j + trial) % d.size()));
    std::complex<double> c = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) c += std::conj(base[j]) * d[j];
    for (std::size_t j = 0; j < d.size(); ++j) d[j] -= c * base[j];
    const double dn = std::sqrt(orbital_norm2(d));
    if (dn < 1e-8) continue;
    Orbital out(base.size());
    for (std::size_t j = 0; j < d.size(); ++j)
      out[j] = std::sqrt(1.0 - r * r) * base[j] + r * d[j] / dn;
    return out;
  }
  throw InvalidParameter("offset_from_sp: no orthogonal direction found");
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw StatisticsError("pearson needs paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw StatisticsError("pearson of a constant sample");
  return sxy / std::sqrt(sxx * syy);
}

EnergyScatter energy_scatter(const SweepProtocol& protocol, const Cloud& cloud,
                             const CloudRun& run, const ModelParams& params) {
  const std::size_t n = cloud.seeds.size();
  if (n < 10) throw StatisticsError("energy scatter needs at least 10 trajectories");
  if (run.final_ensemble.size() != n) throw InvalidParameter("cloud and run sizes differ");
  EnergyScatter out;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < n; ++i) {
    ScatterPoint p;
    p.e_initial = energy_per_particle(cloud.seeds[i], protocol.start_theta(), params);
    p.e_final = energy_per_particle(run.final_ensemble[i], protocol.end_theta(), params);
    out.points.push_back(p);
    x.push_back(p.e_initial);
    y.push_back(p.e_final);
  }
  out.pearson = pearson(x, y);
  return out;
}

DivergenceFit divergence_rate(const StationaryPoint& sp, const ModelParams& params, double r0,
                              double efoldings) {
  const int m = params.sites;
  Eigen::EigenSolver<RealMat> solver(bogoliubov_matrix(sp, params), true);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("Bogoliubov eigensolver failed", sp.theta);
  Eigen::Index k = 0;
  for (Eigen::Index i = 1; i < solver.eigenvalues().size(); ++i) {
    const auto& a = solver.eigenvalues()[i];
    const auto& b = solver.eigenvalues()[k];
    if (a.imag() > b.imag() || (a.imag() == b.imag() && a.real() > b.real())) k = i;
  }
  DivergenceFit fit;
  fit.max_im = double(solver.eigenvalues()[k].imag());
  if (!(fit.max_im > 0.0)) throw InvalidParameter("divergence_rate: stationary point is stable");

  // The Bogoliubov matrix is S L S with S = diag(1, -1) relative to the
  // linearized flow i d/dt (x, y) = L (x, y); a real perturbation is x + conj(y).
  const Eigen::Matrix<Frequency, Eigen::Dynamic, 1> vec = solver.eigenvectors().col(k);
  const Orbital base = sp.orbital();
  Orbital dir(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const std::complex<double> x(double(vec[j].real()), double(vec[j].imag()));
    const std::complex<double> y(double(-vec[m + j].real()), double(-vec[m + j].imag()));
    dir[static_cast<std::size_t>(j)] = x + std::conj(y);
  }
  auto seeded = [&](double s) {
    Orbital psi(base.size());
    for (std::size_t j = 0; j < psi.size(); ++j) psi[j] = base[j] + s * dir[j];
    const double n = std::sqrt(orbital_norm2(psi));
    for (auto& z : psi) z /= n;
    return psi;
  };
  const double dn = std::sqrt(orbital_norm2(dir));
  double s = r0 / dn;
  s *= r0 / distance_from_sp(seeded(s), base);
  Orbital psi = seeded(s);
  const double start = distance_from_sp(psi, base);

  const double t_max = 20.0 * efoldings / fit.max_im;
  const SweepProtocol frozen = SweepProtocol::frozen(sp.theta, t_max);
  ClassicalIntegrator integrator(params, frozen);
  const double dt = std::min(0.05, 0.01 / fit.max_im);
  std::vector<double> ts{0.0};
  std::vector<double> logs{std::log(start)};
  double t = 0.0;
  while (t < t_max) {
    integrator.advance(psi, t, t + dt);
    const double lr = std::log(distance_from_sp(psi, base));
    ts.push_back(t);
    logs.push_back(lr);
    if (lr - logs.front() >= efoldings) break;
  }
  if (logs.back() - logs.front() < efoldings)
    throw ConvergenceError("perturbation did not grow by the requested e-foldings", sp.theta);
  const double n = static_cast<double>(ts.size());
  double mt = 0.0;
  double ml = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    ml += logs[i];
  }
  mt /= n;
  ml /= n;
  double stl = 0.0;
  double stt = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stl += (ts[i] - mt) * (logs[i] - ml);
    stt += (ts[i] - mt) * (ts[i] - mt);
  }
  fit.rate = stl / stt;
  fit.fit_time = ts.back();
  return fit;
}

std::vector<ChaosMapPoint> chaos_map(int sites, int particles, double v,
                                     const std::vector<double>& us,
                                     const std::vector<double>& thetas,
                                     const ChaosMapControl& ctrl) {
  std::vector<double> grid{0.0};
  std::vector<double> sorted = thetas;
  std::sort(sorted.begin(), sorted.end());
  for (double th : sorted)
    if (th > grid.back()) grid.push_back(th);

  struct Job {
    double u;
    StationaryPoint sp;
    ModelParams params;
  };
  std::vector<Job> jobs;
  for (double u : us) {
    const ModelParams p = ModelParams::from_dimensionless(sites, particles, u, v);
    const StabilityProfile profile = continue_branch(p, grid);
    for (std::size_t i = 1; i < profile.points.size(); ++i) jobs.push_back({u, profile.points[i], p});
    if (grid.size() == 1) jobs.push_back({u, profile.points[0], p});
  }
  std::vector<ChaosMapPoint> out(jobs.size());
  parallel_for(jobs.size(), ctrl.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    const Orbital base = job.sp.orbital();
    Orbital psi = offset_from_sp(base, ctrl.r0);
    const SweepProtocol frozen = SweepProtocol::frozen(job.sp.theta, ctrl.duration);
    ClassicalIntegrator integrator(job.params, frozen);
    std::vector<double> r(ctrl.samples);
    double t = 0.0;
    for (std::size_t s = 0; s < ctrl.samples; ++s) {
      if (s > 0) integrator.advance(psi, t, ctrl.duration * static_cast<double>(s) / (ctrl.samples - 1));
      r[s] = distance_from_sp(psi, base);
    }
    out[i] = {job.u, job.sp.theta, double(job.sp.max_im()), participation_number(r).pn};
  });
  return out;
}

void write_section_csv(std::ostream& out, const std::vector<std::vector<SectionPoint>>& sections,
                       const std::string& note) {
  csv::comment(out, "Poincare section; cut q2 = q2(SP), crossings with dq2/dt > 0; radius = 1 - n1/N, "
                    "angle = phi1 - phiM in rad; energy per particle in K");
  if (!note.empty()) csv::comment(out, note);
  csv::header(out, {"seed_index", "crossing_time", "radius", "angle", "energy_per_particle",
                    "color_value"});
  for (const auto& seed : sections)
    for (const auto& p : seed)
      csv::row(out, {static_cast<double>(p.seed_index), p.t, p.radius, p.angle, p.energy,
                     p.color_value});
}

void write_scatter_csv(std::ostream& out, const EnergyScatter& scatter) {
  csv::comment(out, "energy scatter, E/N in K; pearson r = " + csv::num(scatter.pearson));
  csv::header(out, {"traj_index", "E_initial", "E_final"});
  for (std::size_t i = 0; i < scatter.points.size(); ++i)
    csv::row(out, {static_cast<double>(i), scatter.points[i].e_initial, scatter.points[i].e_final});
}

void write_chaos_map_csv(std::ostream& out, const std::vector<ChaosMapPoint>& map) {
  csv::comment(out, "participation number of r(t) near the central SP; Hann window; max_im in K");
  csv::header(out, {"u", "theta", "max_im", "pn"});
  for (const auto& p : map) csv::row(out, {p.u, p.theta, p.max_im, p.pn});
}

}  // namespace bhc
