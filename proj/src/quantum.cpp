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

#include "bhc/quantum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "bhc/csv.hpp"
#include "bhc/error.hpp"

namespace bhc {

namespace {

class Lanczos {
 public:
  Lanczos(Eigen::Index dim, int krylov_dim)
      : basis_(dim, krylov_dim), w_(dim), alpha_(krylov_dim), beta_(krylov_dim + 1) {}

  // Applies exp(-i H dt) to psi in place if the error estimate is below tol.
  double step(const FockOperatorSet& ops, double theta, double dt, double tol,
              ComplexVector& psi) {
    const int m = static_cast<int>(basis_.cols());
    const double norm0 = psi.norm();
    if (norm0 == 0.0) return 0.0;
    basis_.col(0) = psi / norm0;
    double err = std::numeric_limits<double>::infinity();
    int used = 0;
    for (int j = 0; j < m; ++j) {
      ops.apply(theta, basis_.col(j), w_);
      alpha_[j] = basis_.col(j).dot(w_).real();
      w_ -= alpha_[j] * basis_.col(j);
      if (j > 0) w_ -= beta_[j] * basis_.col(j - 1);
      // One local re-orthogonalization pass against the newest vector.
      const std::complex<double> c = basis_.col(j).dot(w_);
      w_ -= c * basis_.col(j);
      alpha_[j] += c.real();
      beta_[j + 1] = w_.norm();
      used = j + 1;

      const bool breakdown = beta_[j + 1] <= 1e-13 * std::max(1.0, std::abs(alpha_[j]));
      if (breakdown || used >= 4 || used == m) {
        exponentiate(used, dt);
        err = breakdown ? 0.0 : norm0 * beta_[j + 1] * std::abs(coeff_[used - 1]);
        if (err <= tol || breakdown) break;
      }
      if (j + 1 < m) basis_.col(j + 1) = w_ / beta_[j + 1];
    }
    if (err > tol) return err;
    psi = norm0 * (basis_.leftCols(used) * coeff_.head(used));
    return err;
  }

 private:
  void exponentiate(int k, double dt) {
    Eigen::VectorXd diag = alpha_.head(k);
    Eigen::VectorXd sub = beta_.segment(1, std::max(k - 1, 0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    if (k == 1) {
      coeff_.resize(1);
      coeff_[0] = std::exp(std::complex<double>(0.0, -diag[0] * dt));
      return;
    }
    eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXd& q = eig.eigenvectors();
    Eigen::VectorXcd phase(k);
    for (int i = 0; i < k; ++i)
      phase[i] = std::exp(std::complex<double>(0.0, -eig.eigenvalues()[i] * dt)) * q(0, i);
    coeff_ = q.cast<std::complex<double>>() * phase;
  }

  Eigen::MatrixXcd basis_;
  ComplexVector w_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd beta_;
  Eigen::VectorXcd coeff_;
};

QuantumSample measure(const ComplexVector& psi, double t, double theta,
                      const FockOperatorSet& ops, ComplexVector& work) {
  QuantumSample s;
  s.t = t;
  s.theta = theta;
  s.norm_error = std::abs(psi.norm() - 1.0);
  s.occupations = occupations(psi, ops);
  ops.apply(theta, psi, work);
  s.energy_per_particle = psi.dot(work).real() / (psi.squaredNorm() * ops.particles);
  return s;
}

}  // namespace

QuantumState source_state(const FockBasis& basis) {
  QuantumState s;
  s.amplitudes = ComplexVector::Zero(static_cast<Eigen::Index>(basis.size()));
  s.amplitudes[0] = 1.0;
  return s;
}

double krylov_step(const FockOperatorSet& ops, double theta, double dt, int krylov_dim,
                   double tolerance, ComplexVector& psi) {
  Lanczos lanczos(psi.size(), krylov_dim);
  return lanczos.step(ops, theta, dt, tolerance, psi);
}

namespace {

double max_step(const SweepProtocol& protocol, const FockOperatorSet& ops,
                const StepControl& ctrl, double theta) {
  double dt = ctrl.norm_factor / std::max(ops.norm_bound(theta), 1e-300);
  if (!protocol.is_frozen()) dt = std::min(dt, ctrl.theta_step / protocol.rate());
  return dt;
}

}  // namespace

double estimate_quantum_steps(const SweepProtocol& protocol, const FockOperatorSet& ops,
                              const StepControl& ctrl) {
  constexpr int kProbe = 64;
  double steps = 0.0;
  for (int i = 0; i < kProbe; ++i) {
    const double t = protocol.duration() * (i + 0.5) / kProbe;
    steps += (protocol.duration() / kProbe) / max_step(protocol, ops, ctrl, protocol.theta_of(t));
  }
  return steps;
}

QuantumRun propagate_quantum(const QuantumState& initial, const SweepProtocol& protocol,
                             const FockOperatorSet& ops, const StepControl& ctrl) {
  if (static_cast<std::size_t>(initial.amplitudes.size()) != ops.dimension())
    throw InvalidParameter("propagate_quantum: state dimension does not match operators");
  if (std::abs(initial.amplitudes.norm() - 1.0) > 1e-9)
    throw InvalidParameter("propagate_quantum: initial state is not normalized");
  if (!(ctrl.tolerance > 0.0)) throw InvalidParameter("propagate_quantum: tolerance must be > 0");
  if (ctrl.krylov_dim < 2) throw InvalidParameter("propagate_quantum: krylov_dim must be >= 2");
  if (ctrl.sample_count < 1) throw InvalidParameter("propagate_quantum: sample_count must be >= 1");

  const double total = protocol.duration();
  // Events: uniform samples plus requested snapshot angles, in time order.
  struct Event {
    double t;
    bool sample;
    bool snapshot;
  };
  std::vector<Event> events;
  for (int k = 0; k <= ctrl.sample_count; ++k)
    events.push_back({k == ctrl.sample_count ? total : total * k / ctrl.sample_count, true, false});
  if (!ctrl.snapshot_thetas.empty()) {
    if (protocol.is_frozen())
      throw InvalidParameter("propagate_quantum: snapshots need a sweeping protocol");
    for (double th : ctrl.snapshot_thetas) {
      const double t = std::clamp((th - protocol.start_theta()) / protocol.rate(), 0.0, total);
      events.push_back({t, false, true});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });

  QuantumRun run;
  ComplexVector psi = initial.amplitudes;
  ComplexVector work(psi.size());
  Lanczos lanczos(psi.size(), ctrl.krylov_dim);
  double t = 0.0;

  for (const Event& ev : events) {
    while (t < ev.t) {
      const double remaining = ev.t - t;
      const double limit = max_step(protocol, ops, ctrl, protocol.theta_of(t));
      double dt = remaining;
      if (remaining > 2.0 * limit) dt = limit;
      else if (remaining > limit) dt = 0.5 * remaining;
      for (;;) {
        const double theta_mid = protocol.theta_of(t + 0.5 * dt);
        const double err = lanczos.step(ops, theta_mid, dt, ctrl.tolerance, psi);
        if (err <= ctrl.tolerance) break;
        dt *= 0.5;
        if (dt < ctrl.min_dt)
          throw IntegrationError("Krylov step size underflow (||H|| estimate " +
                                     std::to_string(ops.norm_bound(theta_mid)) + ")",
                                 theta_mid);
      }
      t = (dt == remaining) ? ev.t : t + dt;
      ++run.steps;
    }
    const double theta = protocol.theta_of(t);
    if (ev.sample) {
      run.samples.push_back(measure(psi, t, theta, ops, work));
      run.max_norm_error = std::max(run.max_norm_error, run.samples.back().norm_error);
    }
    if (ev.snapshot) run.snapshots.push_back({psi, t, theta});
  }

  run.final_state = {psi, t, protocol.theta_of(t)};
  run.completed = true;
  const double drift = std::abs(psi.norm() - 1.0);
  run.max_norm_error = std::max(run.max_norm_error, drift);
  if (drift > ctrl.norm_drift_limit)
    throw IntegrationError("quantum norm drift " + std::to_string(drift) + " exceeds limit",
                           run.final_state.theta);
  return run;
}

double transfer_efficiency_q(const QuantumRun& run) {
  if (!run.completed || run.samples.empty())
    throw PartialRunError("transfer efficiency requested for an incomplete quantum run");
  return run.samples.back().occupations.back();
}

std::vector<double> theta_grid(int count) {
  if (count < 2) throw InvalidParameter("theta_grid needs at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = kHalfPi * i / (count - 1);
  return grid;
}

LevelTrace level_overlap_trace(const QuantumRun& run, const FockOperatorSet& ops,
                               double threshold, std::size_t cap) {
  if (ops.dimension() > cap)
    throw CapacityError("level trace needs dense spectra", ops.dimension(), cap);
  LevelTrace trace;
  trace.threshold = threshold;
  const Eigen::VectorXd& drain = ops.site_occupation.back();
  for (const QuantumState& snap : run.snapshots) {
    const Spectrum spec = instantaneous_spectrum(snap.theta, ops, cap);
    const Eigen::VectorXcd overlap = spec.vectors.transpose() * snap.amplitudes;
    const double norm2 = snap.amplitudes.squaredNorm();
    LevelTracePoint point;
    point.theta = snap.theta;
    for (Eigen::Index k = 0; k < overlap.size(); ++k) {
      const double w = std::norm(overlap[k]) / norm2;
      if (w >= threshold) {
        LevelEntry e;
        e.level = static_cast<int>(k);
        e.weight = w;
        e.energy_per_particle = spec.energies[k] / ops.particles;
        e.drain_population =
            spec.vectors.col(k).cwiseAbs2().dot(drain) / static_cast<double>(ops.particles);
        point.retained.push_back(e);
      } else {
        point.residual += w;
      }
    }
    trace.points.push_back(std::move(point));
  }
  return trace;
}

void write_quantum_csv(std::ostream& out, const QuantumRun& run, int sites) {
  csv::comment(out, "quantum many-body trajectory; time in 1/K, energy per particle in K");
  csv::header(out, csv::trajectory_columns(sites));
  for (const auto& s : run.samples) {
    std::vector<double> row{s.t, s.theta};
    row.insert(row.end(), s.occupations.begin(), s.occupations.end());
    row.push_back(s.energy_per_particle);
    row.push_back(s.norm_error);
    csv::row(out, row);
  }
}

void write_level_trace_csv(std::ostream& out, const LevelTrace& trace) {
  csv::comment(out, "adiabatic level overlaps; energy per particle in K; threshold " +
                        csv::num(trace.threshold) + "; level_index -1 is the residual bucket");
  csv::header(out, {"theta", "level_index", "energy_per_particle", "weight", "drain_population"});
  for (const auto& p : trace.points) {
    for (const auto& e : p.retained)
      csv::row(out, {p.theta, static_cast<double>(e.level), e.energy_per_particle, e.weight,
                     e.drain_population});
    csv::row(out, {p.theta, -1.0, std::nan(""), p.residual, std::nan("")});
  }
}

}  // namespace bhc
