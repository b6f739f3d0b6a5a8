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

#include "bhc/stability.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <ostream>

#include "bhc/csv.hpp"
#include "bhc/error.hpp"

namespace bhc {

namespace {

Real interaction(const ModelParams& p) { return static_cast<Real>(p.particles) * p.interaction; }

void fix_gauge(RealVec& psi, const RealVec& reference) {
  if (psi[0] < 0 || (psi[0] == 0 && psi.dot(reference) < 0)) psi = -psi;
}

Real sp_energy(const RealVec& psi, const RealMat& h0, Real g) {
  return psi.dot(h0 * psi) + 0.5L * g * psi.array().pow(4).sum();
}

}  // namespace

Orbital StationaryPoint::orbital() const {
  Orbital out(static_cast<std::size_t>(psi.size()));
  for (Eigen::Index j = 0; j < psi.size(); ++j) out[static_cast<std::size_t>(j)] = double(psi[j]);
  return out;
}

Real StationaryPoint::max_im() const {
  Real m = 0;
  for (const auto& w : frequencies) m = std::max(m, w.imag());
  return m;
}

Real StationaryPoint::max_re() const {
  Real m = 0;
  for (const auto& w : frequencies) m = std::max(m, w.real());
  return m;
}

RealMat single_particle_matrix(double theta, const ModelParams& params) {
  params.validate();
  const int m = params.sites;
  RealMat h = RealMat::Zero(m, m);
  const Real s = std::sin(static_cast<Real>(theta));
  const Real c = std::cos(static_cast<Real>(theta));
  for (int b = 0; b + 1 < m; ++b) {
    const Real omega = params.hopping * (b % 2 == 0 ? s : c);
    h(b, b + 1) = h(b + 1, b) = -0.5L * omega;
  }
  h(middle_site(m), middle_site(m)) = params.detuning;
  return h;
}

StationaryPoint find_sp(double theta, const ModelParams& params, const RealVec& seed,
                        int max_iter, Real tol) {
  const int m = params.sites;
  if (seed.size() != m) throw InvalidParameter("find_sp: seed length does not match site count");
  const RealMat h0 = single_particle_matrix(theta, params);
  const Real g = interaction(params);
  RealVec psi = seed / seed.norm();
  Real mu = psi.dot(h0 * psi) + g * psi.array().pow(4).sum();

  RealVec f(m + 1);
  RealMat jac(m + 1, m + 1);
  auto residual = [&] {
    f.head(m) = h0 * psi + g * psi.cwiseProduct(psi).cwiseProduct(psi) - mu * psi;
    f[m] = 0.5L * (psi.squaredNorm() - 1);
    return f.norm();
  };
  Real res = residual();
  for (int it = 0; it < max_iter && res > tol; ++it) {
    jac.topLeftCorner(m, m) = h0;
    jac.topLeftCorner(m, m).diagonal().array() += 3 * g * psi.array().square() - mu;
    jac.block(0, m, m, 1) = -psi;
    jac.block(m, 0, 1, m) = psi.transpose();
    jac(m, m) = 0;
    const RealVec dx = jac.fullPivLu().solve(f);
    psi -= dx.head(m);
    mu -= dx[m];
    if (!psi.allFinite() || !std::isfinite(mu))
      throw ConvergenceError("Newton iteration diverged", theta);
    res = residual();
  }
  if (!(res <= tol)) throw ConvergenceError("Newton did not converge", theta);
  fix_gauge(psi, seed);

  StationaryPoint sp;
  sp.theta = theta;
  sp.psi = psi;
  sp.mu = mu;
  sp.energy = sp_energy(psi, h0, g);
  sp.residual = (h0 * psi + g * psi.cwiseProduct(psi).cwiseProduct(psi) - mu * psi).norm();
  sp.frequencies = bogoliubov_frequencies(sp, params);
  return sp;
}

RealMat bogoliubov_matrix(const StationaryPoint& sp, const ModelParams& params) {
  const int m = params.sites;
  const Real g = interaction(params);
  RealMat a = single_particle_matrix(sp.theta, params);
  const RealVec p = sp.psi.cwiseProduct(sp.psi);
  a.diagonal().array() += 2 * g * p.array() - sp.mu;
  RealMat l = RealMat::Zero(2 * m, 2 * m);
  l.topLeftCorner(m, m) = a;
  l.bottomRightCorner(m, m) = -a;
  l.topRightCorner(m, m).diagonal() = -g * p;
  l.bottomLeftCorner(m, m).diagonal() = g * p;
  return l;
}

std::vector<Frequency> bogoliubov_frequencies(const StationaryPoint& sp,
                                              const ModelParams& params) {
  Eigen::EigenSolver<RealMat> solver(bogoliubov_matrix(sp, params), false);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("Bogoliubov eigensolver failed", sp.theta);
  std::vector<Frequency> w(solver.eigenvalues().data(),
                           solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(w.begin(), w.end(), [](const Frequency& a, const Frequency& b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  });
  return w;
}

TrimerFrequencies closed_form_trimer_freqs(Real u, Real v, Real hopping) {
  using C = Frequency;
  const Real omega = hopping / std::sqrt(Real(2));
  const Real scale = omega / (2 * std::sqrt(Real(2)));
  const Real d = u - 2 * v;
  const C inner_plus = std::sqrt(C((d * d + 4) * (d * d + 4) - 16 * (u * u - 2 * u * v + 1)));
  const C inner_minus =
      std::sqrt(C(d * (u * u * u - 6 * u * u * v + 4 * u * (3 * v * v - 2) - 8 * v * (v * v + 2))));
  TrimerFrequencies f;
  f.plus = scale * std::sqrt(inner_plus + (d * d + 4));
  f.minus = -scale * std::sqrt(-inner_minus + (d * d + 4));
  return f;
}

std::vector<Frequency> closed_form_trimer_freqs_v0(Real u, Real hopping) {
  using C = Frequency;
  const Real scale = hopping / std::sqrt(Real(2)) / (2 * std::sqrt(Real(2)));
  const C root = u * std::sqrt(C(u * u - 8));
  const C a = scale * std::sqrt((4 + u * u) + root);
  const C b = scale * std::sqrt((4 + u * u) - root);
  return {a, -a, b, -b};
}

StabilityProfile continue_branch(const ModelParams& params, const std::vector<double>& grid,
                                 const BranchControl& ctrl) {
  params.validate();
  if (grid.empty() || grid.front() != 0.0)
    throw InvalidParameter("continue_branch: grid must start at theta = 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InvalidParameter("continue_branch: grid must increase");

  StabilityProfile profile;
  profile.params = params;
  RealVec psi = RealVec::Zero(params.sites);
  psi[0] = 1;
  StationaryPoint current = find_sp(0.0, params, psi);
  profile.points.push_back(current);

  double step = ctrl.initial_step;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    while (current.theta < grid[i]) {
      const double h = std::min(step, grid[i] - current.theta);
      const double next = (h == grid[i] - current.theta) ? grid[i] : current.theta + h;
      bool ok = false;
      StationaryPoint trial;
      try {
        trial = find_sp(next, params, current.psi);
        ok = (trial.psi - current.psi).norm() <= ctrl.continuity;
      } catch (const ConvergenceError&) {
        ok = false;
      }
      if (!ok) {
        step = 0.5 * h;
        if (step < ctrl.min_step)
          throw BranchLossError("stationary-point branch lost", current.theta);
        continue;
      }
      current = std::move(trial);
      step = std::min(ctrl.initial_step, 2.0 * h);
    }
    profile.points.push_back(current);
  }
  return profile;
}

StabilityProfile stability_profile(const ModelParams& params, int count) {
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = kHalfPi * i / (count - 1);
  grid.back() = kHalfPi;
  return continue_branch(params, grid);
}

std::vector<Window> instability_windows(const StabilityProfile& profile, double tol_im,
                                        double edge_tol) {
  const auto& pts = profile.points;
  std::vector<Window> out;
  if (pts.empty()) return out;
  auto unstable = [&](const StationaryPoint& sp) { return sp.max_im() > tol_im; };
  // Bisects between a point on each side of an edge, following the branch.
  auto edge = [&](const StationaryPoint& a, const StationaryPoint& b) {
    const bool a_unstable = unstable(a);
    double lo = a.theta;
    double hi = b.theta;
    RealVec seed = a.psi;
    while (hi - lo > edge_tol) {
      const double mid = 0.5 * (lo + hi);
      const StationaryPoint sp = find_sp(mid, profile.params, seed);
      if (unstable(sp) == a_unstable) {
        lo = mid;
        seed = sp.psi;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  bool inside = unstable(pts.front());
  Window w{pts.front().theta, 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const bool now = unstable(pts[i]);
    if (now == inside) continue;
    if (now) {
      w.lo = edge(pts[i - 1], pts[i]);
    } else {
      w.hi = edge(pts[i - 1], pts[i]);
      out.push_back(w);
    }
    inside = now;
  }
  if (inside) {
    w.hi = pts.back().theta;
    out.push_back(w);
  }
  return out;
}

RegimeBorders regime_borders(const StabilityProfile& profile) {
  const auto& pts = profile.points;
  RegimeBorders b;
  if (pts.size() < 2) return b;
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dt = pts[i].theta - pts[i - 1].theta;
    re += 0.5 * dt * double(pts[i].max_re() + pts[i - 1].max_re());
    im += 0.5 * dt * double(pts[i].max_im() + pts[i - 1].max_im());
  }
  const double span = pts.back().theta - pts.front().theta;
  b.rate_sudden_diabatic = re / span;
  b.rate_diabatic_quasistatic = im / span;
  b.integrated_im = im;
  return b;
}

void write_stability_csv(std::ostream& out, const StabilityProfile& profile) {
  csv::comment(out, "central stationary point; energies and frequencies in K; " + describe(profile.params));
  csv::comment(out, "frequencies sorted by (Im, Re); borders use the max over k, uniform mean over theta");
  std::vector<std::string> cols{"theta", "energy_per_particle", "mu"};
  const std::size_t n = profile.points.empty() ? 0 : profile.points.front().frequencies.size();
  for (std::size_t k = 1; k <= n; ++k) {
    cols.push_back("re_w" + std::to_string(k));
    cols.push_back("im_w" + std::to_string(k));
  }
  csv::header(out, cols);
  for (const auto& sp : profile.points) {
    std::vector<double> row{sp.theta, double(sp.energy), double(sp.mu)};
    for (const auto& w : sp.frequencies) {
      row.push_back(double(w.real()));
      row.push_back(double(w.imag()));
    }
    csv::row(out, row);
  }
}

void write_windows_jsonl(std::ostream& out, const std::vector<Window>& windows) {
  for (const auto& w : windows)
    out << nlohmann::json{{"theta_lo", w.lo}, {"theta_hi", w.hi}}.dump() << '\n';
}

}  // namespace bhc
