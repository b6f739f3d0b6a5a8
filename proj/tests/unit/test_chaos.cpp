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


#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "bhc/chaos.hpp"
#include "bhc/error.hpp"

using namespace bhc;
using cd = std::complex<double>;

namespace {

std::vector<SectionPoint> ring(std::size_t n, double radius, double jitter, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  std::vector<SectionPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    SectionPoint p;
    // Shuffled angles, as crossings of a quasi-periodic orbit arrive.
    p.angle = wrap_angle(2.0 * std::numbers::pi * double((i * 389) % n) / double(n));
    p.radius = radius + u(rng);
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("chart coordinates") {
  const Orbital psi{std::polar(0.6, 0.4), std::polar(0.3, -1.0), std::polar(std::sqrt(1 - 0.36 - 0.09), 0.9)};
  const ChartPoint c = chart(psi);
  CHECK(c.p1 == doctest::Approx(0.36));
  CHECK(c.p2 == doctest::Approx(0.09));
  CHECK(c.q1 == doctest::Approx(0.4 - 0.9));
  CHECK(c.q2 == doctest::Approx(-1.9));
  const Orbital back = from_chart(c, 3);
  CHECK(distance_from_sp(back, psi) < 1e-7);
  CHECK(wrap_angle(3.0 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(0.5) == 0.5);
  CHECK_THROWS_AS(from_chart({0.8, 0.5, 0.0, 0.0}, 3), InvalidParameter);
}

TEST_CASE("distance from a stationary point") {
  const Orbital sp{0.8, cd(0.0, 0.6), 0.0};
  Orbital rotated = sp;
  for (auto& z : rotated) z *= std::polar(2.0, 1.3);
  CHECK(distance_from_sp(rotated, sp) < 1e-8);
  for (double r : {1e-6, 0.05, 0.5}) CHECK(distance_from_sp(offset_from_sp(sp, r), sp) == doctest::Approx(r).epsilon(1e-6));
  CHECK(orbital_norm2(offset_from_sp(sp, 0.3)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(offset_from_sp(sp, 1.5), InvalidParameter);
}

TEST_CASE("participation number of reference signals") {
  const std::size_t n = 4096;
  std::vector<double> tone(n);
  for (std::size_t i = 0; i < n; ++i) tone[i] = std::cos(2.0 * std::numbers::pi * 64.0 * double(i) / double(n));
  CHECK(participation_number(tone, SpectralWindow::Rectangular).pn == doctest::Approx(1.0).epsilon(1e-9));
  // Hann spreads an on-bin tone over three bins with weights 1/4, 1/2, 1/4.
  CHECK(participation_number(tone).pn == doctest::Approx(2.0).epsilon(1e-9));

  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> noise(n);
  for (auto& x : noise) x = g(rng);
  const auto s = participation_number(noise, SpectralWindow::Rectangular);
  CHECK(s.bins == n / 2 + 1);
  // Exponentially distributed periodogram: PN / bins -> 1/2.
  CHECK(s.pn / double(s.bins) == doctest::Approx(0.5).epsilon(0.1));
  CHECK_THROWS_AS(participation_number(std::vector<double>(512, 1.0)), InvalidParameter);
}

TEST_CASE("chaotic motion has a broader spectrum than regular motion") {
  ChaosMapControl c;
  c.duration = 2000.0;
  // Window at u = 0.6, v = 0.02 spans roughly 0.45 to 1.0.
  const std::vector<double> thetas{0.7, 0.8, 0.9, 1.1};
  const auto map = chaos_map(3, 30, 0.02, {0.0, 0.6}, thetas, c);
  REQUIRE(map.size() == 8);
  double linear_max = 0.0;
  double inside_max = 0.0;
  double regular = 0.0;
  for (const auto& pt : map) {
    if (pt.u == 0.0) {
      CHECK(pt.max_im < 1e-9);
      linear_max = std::max(linear_max, pt.pn);
    } else if (pt.theta < 1.0) {
      CHECK(pt.max_im > 0.01);
      inside_max = std::max(inside_max, pt.pn);
    } else {
      CHECK(pt.max_im < 1e-9);
      regular = pt.pn;
    }
  }
  CHECK(linear_max < 1.2);
  CHECK(regular < 3.0);
  CHECK(inside_max > 3.0 * regular);
}

TEST_CASE("section curve statistics") {
  const auto smooth = ring(800, 0.4, 0.0, 1);
  const auto noisy = ring(800, 0.4, 0.02, 1);
  CHECK(closure_gap(smooth) < 1e-4);
  CHECK(closure_gap(noisy) > 1e-2);
  CHECK_THROWS_AS(closure_gap(ring(2, 0.4, 0.0, 1)), StatisticsError);
  CHECK(median_section_distance(smooth, 0.0, 0.0) == doctest::Approx(0.4));

  std::vector<double> two{0.0, 0.01, 0.02, 1.0, 1.01, 1.02};
  // Gap between cluster means over the pooled within-cluster spread.
  CHECK(two_cluster_separation(two) == doctest::Approx(100.0));
}

TEST_CASE("pearson correlation") {
  std::vector<double> x, y, z, w;
  std::mt19937 rng(9);
  std::normal_distribution<double> g;
  for (int i = 0; i < 5000; ++i) {
    x.push_back(g(rng));
    y.push_back(3.0 * x.back() + 1.0);
    z.push_back(-x.back());
    w.push_back(g(rng));
  }
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  CHECK(pearson(x, z) == doctest::Approx(-1.0));
  CHECK(std::abs(pearson(x, w)) < 0.05);
}

TEST_CASE("linear sections are closed curves at the seed energy") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.0, 0.1);
  const double th = std::numbers::pi / 4;
  const auto sp = continue_branch(p, {0.0, th}).points.back();
  const double e = double(sp.energy);
  const auto seeds = radial_fan(sp, p, e, 6);
  REQUIRE(seeds.size() == 6);
  for (const auto& s : seeds) CHECK(std::abs(energy_per_particle(s, th, p) - e) < 1e-7);
  SectionControl c;
  c.max_crossings = 1000;
  const auto sec = poincare_section(th, p, seeds, 1e5, c);
  REQUIRE(sec.size() == seeds.size());
  for (std::size_t i = 0; i < sec.size(); ++i) {
    REQUIRE(sec[i].size() == 1000);
    const double seed_energy = energy_per_particle(seeds[i], th, p);
    CHECK(closure_gap(sec[i]) < 1e-3);
    for (std::size_t k = 0; k < sec[i].size(); ++k) {
      CHECK(sec[i][k].seed_index == i);
      CHECK(sec[i][k].energy == seed_energy);
      CHECK(sec[i][k].radius >= 0.0);
      CHECK(sec[i][k].radius <= 1.0);
      if (k > 0) CHECK(sec[i][k].t > sec[i][k - 1].t);
    }
  }

  // Above the dark-state energy q2 only winds downwards: no positive crossings.
  const auto above = poincare_section(th, p, radial_fan(sp, p, e + 0.02, 2), 500.0, c);
  for (const auto& s : above) CHECK(s.empty());

  CHECK_THROWS_AS(radial_fan(sp, ModelParams::from_dimensionless(5, 30, 0.0, 0.1), 0.0), InvalidParameter);
}

TEST_CASE("unstable stationary point diverges at the Bogoliubov rate") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.4, 0.1);
  const auto sp = continue_branch(p, {0.0, 0.8}).points.back();
  const auto fit = divergence_rate(sp, p);
  CHECK(fit.max_im == doctest::Approx(double(sp.max_im())));
  CHECK(fit.rate == doctest::Approx(fit.max_im).epsilon(0.1));
}

TEST_CASE("energy scatter and section writers") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.2, 0.1);
  const auto proto = SweepProtocol::from_exponent(0);
  const Cloud cloud = sample_cloud(p, 12, 1.0, 4);
  const CloudRun run = propagate_cloud(cloud, proto, p);
  const auto es = energy_scatter(proto, cloud, run, p);
  REQUIRE(es.points.size() == 12);
  CHECK(es.points[3].e_initial == doctest::Approx(energy_per_particle(cloud.seeds[3], 0.0, p)));
  CHECK(std::abs(es.pearson) <= 1.0);
  const Cloud small = sample_cloud(p, 5, 1.0, 4);
  CHECK_THROWS_AS(energy_scatter(proto, small, propagate_cloud(small, proto, p), p), StatisticsError);

  const auto fin = final_cloud_section(run.final_ensemble, proto.end_theta(), p);
  REQUIRE(fin.size() == 12);
  CHECK(fin[0].radius == doctest::Approx(1.0 - chart(run.final_ensemble[0]).p1));
  std::ostringstream a, b, m;
  write_section_csv(a, {fin}, "note");
  CHECK(a.str().find("seed_index,crossing_time,radius,angle,energy_per_particle,color_value") != std::string::npos);
  write_scatter_csv(b, es);
  CHECK(b.str().find("traj_index,E_initial,E_final") != std::string::npos);
  write_chaos_map_csv(m, {{0.4, 0.8, 0.02, 5.0}});
  CHECK(m.str().find("u,theta,max_im,pn") != std::string::npos);
}
