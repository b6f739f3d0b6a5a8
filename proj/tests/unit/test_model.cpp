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

#include "bhc/error.hpp"
#include "bhc/model.hpp"

using namespace bhc;

TEST_CASE("dimensionless round trip") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.4, 0.1, 2.0);
  CHECK(p.interaction == doctest::Approx(0.4 * 2.0 / (std::numbers::sqrt2 * 30)).epsilon(1e-14));
  CHECK(p.detuning == doctest::Approx(0.1 * 2.0 / std::numbers::sqrt2).epsilon(1e-14));
  CHECK(p.g() == doctest::Approx(30 * p.interaction));
  const auto d = derive_dimensionless(p);
  CHECK(d.u == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(d.v == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("validation rejects unphysical parameters") {
  ModelParams p;
  p.sites = 1;
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
  p = {};
  p.particles = 0;
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
  p = {};
  p.hopping = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
  p = {};
  p.interaction = std::nan("");
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
  p = {};
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("hopping profile alternates sin and cos") {
  ModelParams p;
  p.sites = 5;
  p.hopping = 1.5;
  const double th = 0.3;
  const auto om = hopping_profile(th, p);
  REQUIRE(om.size() == 4);
  CHECK(om[0] == doctest::Approx(1.5 * std::sin(th)));
  CHECK(om[1] == doctest::Approx(1.5 * std::cos(th)));
  CHECK(om[2] == doctest::Approx(1.5 * std::sin(th)));
  CHECK(om[3] == doctest::Approx(1.5 * std::cos(th)));
}

TEST_CASE("detuning sits on the middle site only") {
  for (int m : {3, 5, 7}) {
    ModelParams p;
    p.sites = m;
    p.detuning = 0.25;
    const auto v = site_potentials(p);
    REQUIRE(v.size() == static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) CHECK(v[j] == (j == (m - 1) / 2 ? 0.25 : 0.0));
    CHECK(middle_site(m) == (m - 1) / 2);
  }
}

TEST_CASE("sweep protocol covers a quarter turn") {
  const auto s = SweepProtocol::from_exponent(3);
  CHECK(s.rate() == doctest::Approx(std::numbers::pi / 2 * 1e-3));
  CHECK(s.duration() == doctest::Approx(1e3));
  CHECK(s.theta_of(0.0) == 0.0);
  CHECK(s.theta_of(500.0) == doctest::Approx(std::numbers::pi / 4));
  CHECK(s.end_theta() == doctest::Approx(std::numbers::pi / 2));
  CHECK_FALSE(s.is_frozen());

  const auto f = SweepProtocol::frozen(0.7, 10.0);
  CHECK(f.is_frozen());
  CHECK(f.theta_of(3.0) == 0.7);
  CHECK_THROWS_AS(SweepProtocol::frozen(2.0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(SweepProtocol::sweep(0.0), InvalidParameter);
}

TEST_CASE("config parsing and override precedence") {
  const auto file = parse_model_config("# chain\nM = 3\nN: 30\nu = 0.2  # weak\nv=0.1\nrate_exponent = 4\n");
  CHECK(*file.M == 3);
  CHECK(*file.N == 30);
  CHECK(*file.rate_exponent == 4.0);

  auto p = resolve_params(file);
  CHECK(derive_dimensionless(p).u == doctest::Approx(0.2));

  ModelConfig over;
  over.U = 0.01;
  p = resolve_params(merge_config(file, over));
  CHECK(p.interaction == 0.01);

  over = {};
  over.N = 10;
  p = resolve_params(merge_config(file, over));
  CHECK(p.particles == 10);
  CHECK(derive_dimensionless(p).u == doctest::Approx(0.2));

  CHECK_THROWS_AS(parse_model_config("M 3"), ConfigError);
  CHECK_THROWS_AS(parse_model_config("W = 3"), ConfigError);
  CHECK_THROWS_AS(parse_model_config("M = three"), ConfigError);
  CHECK_THROWS_AS(resolve_params(parse_model_config("N = 3")), ConfigError);
  CHECK_THROWS_AS(resolve_params(parse_model_config("M = 1\nN = 3")), ConfigError);
  CHECK_THROWS_AS(load_model_config("/nonexistent/bhc.cfg"), ConfigError);
}
