#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "cbho/errors.hpp"
#include "cbho/semiclassical.hpp"

using namespace cbho;

namespace {
constexpr double pi = std::numbers::pi;
const double T_B = 2.0 * pi / 0.0038;

std::pair<double, double> range(const std::vector<double>& x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return {*lo, *hi};
}

Eq7Params static_params() {
  Eq7Params p;
  p.k0 = 0.05;
  p.F_n0 = 0.0038;
  p.J = 0.024;
  return p;
}

std::vector<double> grid(double t_end, double h) {
  std::vector<double> t;
  for (double x = 0.0; x <= t_end + 1e-9; x += h) t.push_back(x);
  return t;
}
}  // namespace

TEST_CASE("local model without drive performs Bloch oscillations") {
  const ModelParams mp = canonical_model(0.0, 0.0);
  const auto tr = integrate_local_model(mp, 125.0, 0.0, 2.0 * T_B, 0.5);
  const auto [lo, hi] = range(tr.n);
  CHECK(hi - lo == doctest::Approx(2.0 * 0.024 / 0.0038).epsilon(0.1));
  CHECK(tr.n.front() == 125.0);
  // Energy conservation brings the packet back to its turning point, a little
  // later than T_B because the local force weakens along the orbit.
  double back = 0.0, t_back = 0.0;
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    if (tr.times[i] > 0.5 * T_B && tr.times[i] < 1.5 * T_B && tr.n[i] > back) {
      back = tr.n[i];
      t_back = tr.times[i];
    }
  CHECK(back == doctest::Approx(125.0).epsilon(1e-5));
  CHECK(t_back / T_B == doctest::Approx(1.055).epsilon(0.01));
  CHECK(tr.times.back() == doctest::Approx(2.0 * T_B).epsilon(1e-3));
}

TEST_CASE("local model without force is free motion") {
  ModelParams mp = canonical_model(0.0, 0.0);
  mp.K0 = 0.0;
  const auto tr = integrate_local_model(mp, 10.0, 0.3, 100.0, 0.1, 10);
  // k is given in zone units and stored as the phase 2 pi k.
  const double v = 0.024 * std::sin(2.0 * pi * 0.3);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    CHECK(tr.k_tilde[i] == doctest::Approx(2.0 * pi * 0.3));
    CHECK(tr.n[i] == doctest::Approx(10.0 + v * tr.times[i]).epsilon(1e-12));
    CHECK(tr.velocity(i, mp.J) == doctest::Approx(v));
  }
}

TEST_CASE("local model with resonant drive has a slow oscillation near the harmonic period") {
  const ModelParams mp = canonical_model(0.0, 1.0);
  const double T_HO = 2.0 * pi / std::sqrt(mp.J * mp.K0 * mp.alpha);
  const auto tr = integrate_local_model(mp, 125.0, 0.0, 30.0 * T_B, 0.5, 4);
  std::vector<double> at;
  const auto avg = cycle_average(tr.times, tr.n, T_B, at);
  const HarmonicFit f = fit_harmonic(tr.times, tr.n, T_B, mp.K0);
  CHECK(2.0 * pi / f.delta_omega == doctest::Approx(T_HO).epsilon(0.15));
  CHECK(f.delta_n > 5.0);
  CHECK_FALSE(avg.empty());
}

TEST_CASE("closed-form velocity") {
  SUBCASE("reduces to a static Bloch oscillation") {
    const Eq7Params p = static_params();
    for (double t : {0.0, 13.0, 700.0, 5000.0})
      CHECK(std::fabs(eval_eq7(p, t) - 0.024 * std::sin(2.0 * pi * 0.05 - 0.0038 * t)) < 1e-12);
  }
  SUBCASE("initial value depends only on k0") {
    Eq7Params p = static_params();
    p.alpha = 1.0;
    p.omega_D = 0.0038;
    p.phi = 0.7;
    p.delta_F = 2e-4;
    p.delta_omega = 6e-4;
    p.gamma = -1.1;
    CHECK(eval_eq7(p, 0.0) == doctest::Approx(0.024 * std::sin(2.0 * pi * 0.05)).epsilon(1e-14));
  }
  SUBCASE("phase derivative matches the driven force") {
    Eq7Params p = static_params();
    p.alpha = 1.0;
    p.omega_D = 0.0038;
    p.phi = 0.3;
    p.delta_F = 2e-4;
    p.delta_omega = 6e-4;
    p.gamma = 0.4;
    p.J = 1.0;
    // Phase via asin is ambiguous; compare V' = J cos(phase) phase' instead.
    const double h = 1e-3;
    for (double t : {100.0, 1234.5, 4000.0}) {
      const double dV = (eval_eq7(p, t + h) - eval_eq7(p, t - h)) / (2.0 * h);
      const double s = p.F_n0 + p.delta_F * std::sin(p.delta_omega * t + p.gamma);
      const double drive = p.F_n0 * p.alpha * std::sin(p.omega_D * t + p.phi);
      double side = 0.0;
      for (int sg : {1, -1})
        side += sg * p.delta_F * p.alpha *
                std::cos((p.omega_D + sg * p.delta_omega) * t + p.phi + sg * p.gamma);
      const double dphase = -s - drive + side;
      const double V = eval_eq7(p, t);
      const double cosphase = std::sqrt(std::max(0.0, 1.0 - V * V));
      CHECK(std::fabs(std::fabs(dV) - cosphase * std::fabs(dphase)) < 1e-8);
    }
  }
  SUBCASE("vanishing sideband denominator") {
    Eq7Params p = static_params();
    p.alpha = 1.0;
    p.omega_D = 6e-4;
    p.delta_F = 1e-4;
    p.delta_omega = 6e-4;
    CHECK_THROWS_AS(eval_eq7(p, 10.0), ResonanceError);
    p.alpha = 0.0;
    CHECK_NOTHROW(eval_eq7(p, 10.0));
    p.delta_F = 0.0;
    p.delta_omega = 0.0;
    CHECK_NOTHROW(eval_eq7(p, 10.0));
  }
  SUBCASE("span overload") {
    const Eq7Params p = static_params();
    const std::vector<double> t{0.0, 1.0, 2.0};
    const auto v = eval_eq7(p, t);
    REQUIRE(v.size() == 3);
    CHECK(v[2] == eval_eq7(p, 2.0));
  }
}

TEST_CASE("closed-form parameters from model and fit") {
  const ModelParams mp = canonical_model(0.5, 1.0);
  HarmonicFit f;
  f.delta_F = 1e-4;
  f.delta_omega = 5e-4;
  f.gamma = 0.2;
  const Eq7Params p = Eq7Params::from_model(mp, 125.0, to_velocity_k0(0.1), f);
  CHECK(p.k0 == -0.1);
  CHECK(p.F_n0 == doctest::Approx(0.0038));
  CHECK(p.phi == 0.5);
  CHECK(p.delta_F == 1e-4);
  CHECK(p.J == mp.J);
}

TEST_CASE("cycle average") {
  const double h = 1.0, T = 20.0;
  const auto t = grid(400.0, h);
  std::vector<double> x(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) x[i] = 3.0 + 0.1 * t[i] + std::sin(2.0 * pi * t[i] / T);
  std::vector<double> at;
  const auto avg = cycle_average(t, x, T, at);
  REQUIRE(avg.size() == at.size());
  REQUIRE(avg.size() == t.size() - 20);
  CHECK(at.front() == 10.0);
  for (std::size_t i = 0; i < avg.size(); ++i) CHECK(avg[i] == doctest::Approx(3.0 + 0.1 * at[i]).epsilon(1e-12));
  CHECK(cycle_average(std::span(t).first(5), std::span(x).first(5), T, at).empty());
}

TEST_CASE("harmonic fit on a synthetic centroid") {
  const double dn = 12.0, dw = 2.0 * pi / (6.29 * T_B), gamma = 0.8;
  const auto t = grid(20.0 * T_B, T_B / 200.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> n(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    n[i] = 125.0 + dn * std::sin(dw * t[i] + gamma) + 3.0 * std::sin(2.0 * pi * t[i] / T_B) + noise(rng);
  const HarmonicFit f = fit_harmonic(t, n, T_B, 1.52e-5);
  CHECK(f.delta_n == doctest::Approx(dn).epsilon(0.1 / dn));
  CHECK(f.delta_omega == doctest::Approx(dw).epsilon(0.01));
  CHECK(std::fabs(f.gamma - gamma) < 0.05);
  CHECK(f.delta_F == doctest::Approx(2.0 * 1.52e-5 * f.delta_n));
  CHECK(f.offset == doctest::Approx(125.0).epsilon(1e-3));

  SUBCASE("shifting the series in time shifts only the phase") {
    const double shift = 3.0 * T_B;
    std::vector<double> ts(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) ts[i] = t[i] + shift;
    const HarmonicFit g = fit_harmonic(ts, n, T_B, 1.52e-5);
    CHECK(g.delta_n == doctest::Approx(f.delta_n).epsilon(1e-6));
    CHECK(g.delta_omega == doctest::Approx(f.delta_omega).epsilon(1e-6));
    const double expect = std::remainder(f.gamma - g.delta_omega * shift, 2.0 * pi);
    CHECK(std::fabs(std::remainder(g.gamma - expect, 2.0 * pi)) < 1e-4);
  }
}

TEST_CASE("harmonic fit rejects a flat series") {
  const auto t = grid(20.0 * T_B, T_B / 100.0);
  std::vector<double> n(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) n[i] = 125.0 + 3.0 * std::sin(2.0 * pi * t[i] / T_B);
  CHECK_THROWS_AS(fit_harmonic(t, n, T_B, 1.52e-5), FitError);
  CHECK_THROWS_AS(fit_harmonic(std::span(t).first(10), std::span(n).first(10), T_B, 1.52e-5), FitError);
}

TEST_CASE("velocity comparison") {
  const auto t = grid(100.0, 1.0);
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = 0.024 * std::sin(0.1 * t[i]);
  const auto same = compare_velocities(t, v, t, v, 0.024);
  CHECK(same.rms_error == 0.0);
  std::vector<double> shifted(v);
  for (auto& x : shifted) x += 0.0024;
  const auto off = compare_velocities(t, v, t, shifted, 0.024);
  CHECK(off.rms_error == doctest::Approx(0.0024));
  CHECK(off.normalized_rms == doctest::Approx(0.1));
  // Only the overlapping range counts.
  const auto half = compare_velocities(t, v, std::span(t).first(50), std::span(v).first(50), 0.024);
  CHECK(half.rms_error < 1e-15);
}

TEST_CASE("zero crossings") {
  const std::vector<double> t{0, 1, 2, 3, 4};
  const std::vector<double> x{1, -1, -3, 1, 0.5};
  const auto z = zero_crossings(t, x);
  REQUIRE(z.size() == 2);
  CHECK(z[0] == doctest::Approx(0.5));
  CHECK(z[1] == doctest::Approx(2.75));
  const auto m = merge_crossings(std::vector<double>{1.0, 1.2, 1.4, 5.0, 9.0, 9.5}, 1.0);
  REQUIRE(m.size() == 3);
  CHECK(m[0] == doctest::Approx(1.2));
  CHECK(m[1] == 5.0);
  CHECK(m[2] == doctest::Approx(9.25));
}

TEST_CASE("local model energy drift shrinks with the step") {
  // Conserved quantity of the static local model: -J cos(k) + K0 n^2.
  const ModelParams mp = canonical_model(0.0, 0.0);
  std::vector<double> drift;
  for (double dt : {20.0, 10.0}) {
    const auto tr = integrate_local_model(mp, 125.0, 0.0, 5.0 * T_B, dt);
    const auto e = [&](std::size_t i) { return -mp.J * std::cos(tr.k_tilde[i]) + mp.K0 * tr.n[i] * tr.n[i]; };
    drift.push_back(std::fabs(e(tr.times.size() - 1) - e(0)));
  }
  CHECK(drift[0] / drift[1] > 12.0);
}

TEST_CASE("integrate_local_model argument checks") {
  const ModelParams mp = canonical_model();
  CHECK_THROWS_AS(integrate_local_model(mp, 125.0, 0.0, 10.0, 0.0), DomainError);
  CHECK_THROWS_AS(integrate_local_model(mp, 125.0, 0.0, 10.0, 0.1, 0), DomainError);
}
