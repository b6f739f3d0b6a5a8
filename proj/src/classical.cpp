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

#include "bhc/classical.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <ostream>

#include "bhc/csv.hpp"
#include "bhc/error.hpp"

namespace bhc {

namespace odeint = boost::numeric::odeint;

namespace {

// Interleaved (Re psi_0, Im psi_0, Re psi_1, ...) for the real-valued stepper.
using RealState = std::vector<double>;
using Stepper = odeint::runge_kutta_fehlberg78<RealState>;

RealState to_real(const Orbital& psi) {
  RealState x(2 * psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) {
    x[2 * j] = psi[j].real();
    x[2 * j + 1] = psi[j].imag();
  }
  return x;
}

void from_real(const RealState& x, Orbital& psi) {
  psi.resize(x.size() / 2);
  for (std::size_t j = 0; j < psi.size(); ++j) psi[j] = {x[2 * j], x[2 * j + 1]};
}

struct MeanFieldSystem {
  const ModelParams& params;
  const SweepProtocol& protocol;
  std::vector<double> potential;

  MeanFieldSystem(const ModelParams& p, const SweepProtocol& s)
      : params(p), protocol(s), potential(site_potentials(p)) {}

  void operator()(const RealState& x, RealState& dxdt, double t) const {
    const double theta = protocol.theta_of(t);
    const double odd = params.hopping * std::sin(theta);
    const double even = params.hopping * std::cos(theta);
    const double g = params.g();
    const std::size_t m = potential.size();
    for (std::size_t j = 0; j < m; ++j) {
      const double re = x[2 * j];
      const double im = x[2 * j + 1];
      const double onsite = potential[j] + g * (re * re + im * im);
      double ar = onsite * re;
      double ai = onsite * im;
      if (j + 1 < m) {
        const double w = 0.5 * ((j % 2 == 0) ? odd : even);
        ar -= w * x[2 * j + 2];
        ai -= w * x[2 * j + 3];
      }
      if (j > 0) {
        const double w = 0.5 * (((j - 1) % 2 == 0) ? odd : even);
        ar -= w * x[2 * j - 2];
        ai -= w * x[2 * j - 1];
      }
      // dpsi/dt = -i a
      dxdt[2 * j] = ai;
      dxdt[2 * j + 1] = -ar;
    }
  }
};

}  // namespace

double orbital_norm2(const Orbital& psi) {
  double s = 0.0;
  for (const auto& z : psi) s += std::norm(z);
  return s;
}

Orbital source_orbital(int sites) {
  Orbital psi(static_cast<std::size_t>(sites), 0.0);
  psi[0] = 1.0;
  return psi;
}

Orbital eom_rhs(const Orbital& psi, double theta, const ModelParams& params) {
  const SweepProtocol frozen = SweepProtocol::frozen(theta, 0.0);
  MeanFieldSystem sys(params, frozen);
  RealState dx(2 * psi.size());
  sys(to_real(psi), dx, 0.0);
  Orbital out;
  from_real(dx, out);
  return out;
}

double classical_energy(const Orbital& psi, double theta, const ModelParams& params) {
  const auto omega = hopping_profile(theta, params);
  const auto pot = site_potentials(params);
  double e = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double n = std::norm(psi[j]);
    e += pot[j] * n + 0.5 * params.g() * n * n;
  }
  for (std::size_t b = 0; b + 1 < psi.size(); ++b)
    e -= omega[b] * (std::conj(psi[b + 1]) * psi[b]).real();
  return e;
}

double energy_per_particle(const Orbital& psi, double theta, const ModelParams& params) {
  return classical_energy(psi, theta, params) / orbital_norm2(psi);
}

std::vector<double> orbital_occupations(const Orbital& psi) {
  const double total = orbital_norm2(psi);
  std::vector<double> out(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) out[j] = std::norm(psi[j]) / total;
  return out;
}

ClassicalIntegrator::ClassicalIntegrator(ModelParams params, SweepProtocol protocol,
                                         IntegratorControl ctrl)
    : params_(params), protocol_(protocol), ctrl_(ctrl), dt_(ctrl.initial_dt) {
  params_.validate();
  if (!(ctrl_.rel_tol > 0.0) || !(ctrl_.abs_tol > 0.0))
    throw InvalidParameter("integrator tolerances must be positive");
}

void ClassicalIntegrator::advance(Orbital& psi, double& t, double t_end,
                                  const StepObserver& observer) {
  if (psi.size() != static_cast<std::size_t>(params_.sites))
    throw InvalidParameter("orbital length does not match site count");
  MeanFieldSystem sys(params_, protocol_);
  auto stepper = odeint::make_controlled<Stepper>(ctrl_.abs_tol, ctrl_.rel_tol);
  RealState x = to_real(psi);
  Orbital view;
  while (t < t_end) {
    const double remaining = t_end - t;
    const bool clamped = dt_ >= remaining;
    double dt = clamped ? remaining : dt_;
    for (;;) {
      if (stepper.try_step(sys, x, t, dt) == odeint::success) break;
      if (dt < ctrl_.min_dt)
        throw IntegrationError("classical step size underflow", protocol_.theta_of(t));
    }
    if (!std::isfinite(x[0]))
      throw IntegrationError("non-finite classical state", protocol_.theta_of(t));
    // A step clamped to hit t_end keeps the previous natural step size.
    if (!clamped) dt_ = dt;
    if (t_end - t < 1e-12 * std::max(1.0, std::abs(t_end))) t = t_end;
    ++steps_;
    if (observer) {
      from_real(x, view);
      observer(t, view);
    }
  }
  from_real(x, psi);
}

Orbital ClassicalIntegrator::step_fixed(const Orbital& psi, double t, double dt) const {
  MeanFieldSystem sys(params_, protocol_);
  Stepper stepper;
  RealState in = to_real(psi);
  RealState out(in.size());
  stepper.do_step(sys, in, t, out, dt);
  Orbital res;
  from_real(out, res);
  return res;
}

namespace {

ClassicalSample sample_of(const Orbital& psi, double t, const SweepProtocol& protocol,
                          const ModelParams& params, double norm0) {
  ClassicalSample s;
  s.t = t;
  s.theta = protocol.theta_of(t);
  s.occupations = orbital_occupations(psi);
  s.energy_per_particle = energy_per_particle(psi, s.theta, params);
  s.norm_error = std::abs(std::sqrt(orbital_norm2(psi) / norm0) - 1.0);
  return s;
}

}  // namespace

ClassicalRun integrate_trajectory(const Orbital& psi0, const SweepProtocol& protocol,
                                  const ModelParams& params, const IntegratorControl& ctrl) {
  const double norm0 = orbital_norm2(psi0);
  if (!(norm0 > 0.0)) throw InvalidParameter("integrate_trajectory: zero initial orbital");
  ClassicalIntegrator integrator(params, protocol, ctrl);
  ClassicalRun run;
  Orbital psi = psi0;
  double t = 0.0;
  const double total = protocol.duration();
  auto check = [&](double err) {
    run.max_norm_error = std::max(run.max_norm_error, err);
    if (err > ctrl.norm_drift_limit)
      throw IntegrationError("classical norm drift " + std::to_string(err) + " exceeds limit",
                             protocol.theta_of(t));
  };
  if (ctrl.sample_count > 0) {
    run.samples.reserve(static_cast<std::size_t>(ctrl.sample_count) + 1);
    run.samples.push_back(sample_of(psi, t, protocol, params, norm0));
    for (int k = 1; k <= ctrl.sample_count; ++k) {
      const double target = k == ctrl.sample_count ? total : total * k / ctrl.sample_count;
      integrator.advance(psi, t, target);
      run.samples.push_back(sample_of(psi, t, protocol, params, norm0));
      check(run.samples.back().norm_error);
    }
  } else {
    integrator.advance(psi, t, total);
  }
  check(std::abs(std::sqrt(orbital_norm2(psi) / norm0) - 1.0));
  run.final_state = {psi, t, protocol.theta_of(t)};
  run.steps = integrator.steps();
  return run;
}

double mft_efficiency(const SweepProtocol& protocol, const ModelParams& params,
                      const IntegratorControl& ctrl) {
  IntegratorControl c = ctrl;
  c.sample_count = 0;
  const auto run = integrate_trajectory(source_orbital(params.sites), protocol, params, c);
  return orbital_occupations(run.final_state.psi).back();
}

void write_classical_csv(std::ostream& out, const ClassicalRun& run, int sites) {
  csv::comment(out, "mean-field trajectory; time in 1/K, energy per particle in K");
  csv::header(out, csv::trajectory_columns(sites));
  for (const auto& s : run.samples) {
    std::vector<double> row{s.t, s.theta};
    row.insert(row.end(), s.occupations.begin(), s.occupations.end());
    row.push_back(s.energy_per_particle);
    row.push_back(s.norm_error);
    csv::row(out, row);
  }
}

}  // namespace bhc
