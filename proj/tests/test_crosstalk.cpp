#include <doctest.h>

#include <cmath>

#include "ionctx/crosstalk.hpp"
#include "ionctx/errors.hpp"

using namespace ionctx;

namespace {

const CrosstalkTable& table() {
  static const CrosstalkTable t = CrosstalkTable::load(CrosstalkTable::default_path());
  return t;
}

// Rabi frequency straight from the level data, without the library helpers.
double rabi_oracle(double prefactor, double g1, double isat1, double d1_thz, double g2, double isat2, double d2_thz,
                   double intensity) {
  const double k1 = g1 * g1 / isat1;
  const double k2 = g2 * g2 / isat2;
  return std::abs(prefactor * intensity / 12.0 * (-k1 / (d1_thz * 1e6) + k2 / (d2_thz * 1e6)));
}

}  // namespace

TEST_CASE("level table loads and reproduces the listed k values") {
  const auto& t = table();
  CHECK_NOTHROW(t.check_k(0.01));
  CHECK(t.yb.p12.k() == doctest::Approx(7.61).epsilon(0.01));
  CHECK(t.yb.p32.k() == doctest::Approx(7.00).epsilon(0.01));
  CHECK(t.ba.p12.k() == doctest::Approx(13.90).epsilon(0.01));
  CHECK(t.ba.p32.k() == doctest::Approx(8.78).epsilon(0.01));
  CHECK(t.repetition_rate_mhz == 80.097);

  auto broken = t;
  broken.ba.p32.k_listed = 10.0;
  CHECK_THROWS_AS(broken.check_k(0.01), Error);
  CHECK_THROWS_AS(CrosstalkTable::from_json(nlohmann::json::object()), Error);
  CHECK_THROWS_AS(CrosstalkTable::load("/nonexistent/levels.json"), Error);
}

TEST_CASE("Raman Rabi frequencies") {
  const auto& t = table();
  CHECK(raman_rabi(t, Ion::Yb, Laser::nm532, 6.86e6) ==
        doctest::Approx(rabi_oracle(1.0, 19.7, 51.0, -248, 25.8, 95.1, -347, 6.86e6)).epsilon(1e-12));
  CHECK(raman_rabi(t, Ion::Ba, Laser::nm355, 6.37e6) ==
        doctest::Approx(rabi_oracle(std::sqrt(2.0), 15.1, 16.4, 238, 17.7, 35.7, 187, 6.37e6)).epsilon(1e-12));
  CHECK(raman_rabi(t, Ion::Yb, Laser::nm532, 6.86e6) == doctest::Approx(0.006).epsilon(0.05));
  CHECK(raman_rabi(t, Ion::Ba, Laser::nm355, 6.37e6) == doctest::Approx(0.009).epsilon(0.05));
  CHECK(raman_rabi(t, Ion::Ba, Laser::nm532, 0.0) == 0.0);
  CHECK_THROWS_AS(raman_rabi(t, Ion::Ba, Laser::nm532, -1.0), std::invalid_argument);

  auto zero = t;
  zero.yb.p12.detuning_thz[0] = 0.0;
  CHECK_THROWS_AS(raman_rabi(zero, Ion::Yb, Laser::nm355, 1e6), std::invalid_argument);
}

TEST_CASE("intensity for a target Rabi frequency") {
  const auto& t = table();
  CHECK(intensity_for_rabi(t, Ion::Ba, Laser::nm532, 0.18) == doctest::Approx(6.86e6).epsilon(0.01));
  const double i355 = intensity_for_rabi(t, Ion::Yb, Laser::nm355, 0.18);
  CHECK(intensity_for_rabi(t, Ion::Yb, Laser::nm355, 0.36) == doctest::Approx(2 * i355).epsilon(1e-12));
  for (Ion ion : {Ion::Yb, Ion::Ba}) {
    for (Laser laser : {Laser::nm355, Laser::nm532}) {
      for (double omega : {0.001, 0.18, 3.0}) {
        const double i = intensity_for_rabi(t, ion, laser, omega);
        REQUIRE(raman_rabi(t, ion, laser, i) == doctest::Approx(omega).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("maximum population transfer") {
  CHECK(max_population_transfer(0.006, 4.3) == doctest::Approx(1.9e-6).epsilon(0.05));
  CHECK(max_population_transfer(0.009, 4.3) == doctest::Approx(4.3e-6).epsilon(0.05));
  CHECK(max_population_transfer(0.2, 0.0) == 1.0);
  CHECK(max_population_transfer(0.0, 3.0) == 0.0);
  CHECK_THROWS_AS(max_population_transfer(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("population transfer is monotone") {
  double prev = 0.0;
  for (double omega = 0.001; omega < 2.0; omega *= 1.3) {
    const double p = max_population_transfer(omega, 4.3);
    REQUIRE(p > prev);
    prev = p;
  }
  prev = 1.0;
  for (double delta = 0.01; delta < 100.0; delta *= 1.5) {
    const double p = max_population_transfer(0.01, -delta);
    REQUIRE(p < prev);
    REQUIRE(p == max_population_transfer(0.01, delta));
    prev = p;
  }
}

TEST_CASE("comb detunings") {
  CHECK(comb_detuning(16.8, 12.5) == doctest::Approx(4.3));
  CHECK(comb_detuning(7.5, 7.5) == 0.0);
  // Beat notes sit at m·f_rep ± shift; brute force over m.
  auto brute = [](double split, double shift, double rep) {
    double best = 1e300;
    for (int m = -400; m <= 400; ++m)
      for (double s : {shift, -shift}) best = std::min(best, std::abs(split - (m * rep + s)));
    return best;
  };
  for (double split : {16.8, 12642.8, 1000.0, 40.0}) {
    for (double shift : {12.5, 16.3}) {
      CHECK(nearest_comb_detuning(split, shift, 80.097) == doctest::Approx(brute(split, shift, 80.097)));
    }
  }
  CHECK(nearest_comb_detuning(16.8, 12.5, 80.097) == doctest::Approx(4.3));
  // The 355 nm comb is tuned onto the Yb splitting it is meant to drive.
  CHECK(nearest_comb_detuning(12642.8, 12.5, 80.097) < 0.05);
  CHECK_THROWS_AS(nearest_comb_detuning(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("crosstalk budget") {
  const auto b = crosstalk_budget(table());
  CHECK(b.intensity_532 == doctest::Approx(6.86e6).epsilon(0.01));
  CHECK(b.lines[0].ion == Ion::Yb);
  CHECK(b.lines[0].laser == Laser::nm532);
  CHECK(b.lines[0].rabi_mhz == doctest::Approx(0.006).epsilon(0.05));
  CHECK(b.lines[0].max_transfer == doctest::Approx(1.9e-6).epsilon(0.05));
  CHECK(b.lines[1].ion == Ion::Ba);
  CHECK(b.lines[1].rabi_mhz == doctest::Approx(0.009).epsilon(0.05));
  CHECK(b.lines[1].max_transfer == doctest::Approx(4.3e-6).epsilon(0.05));
  CHECK(b.lines[1].comb_detuning_mhz == doctest::Approx(4.3));
  CHECK(b.negligible);
  const auto text = format_budget(b);
  CHECK(text.find("verdict: negligible") != std::string::npos);
}

TEST_CASE("laser names") {
  CHECK(parse_laser("355") == Laser::nm355);
  CHECK(parse_laser(laser_name(Laser::nm532)) == Laser::nm532);
  CHECK_THROWS_AS(parse_laser("1064"), std::invalid_argument);
}
