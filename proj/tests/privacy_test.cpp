#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <doctest.h>

#include "fedsim/dataset.hpp"
#include "fedsim/error.hpp"
#include "fedsim/privacy.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/tensor.hpp"

using fedsim::ConfigError;
using fedsim::ParameterSet;
using fedsim::PrivacyMode;
using fedsim::PrivacySpec;
using fedsim::PrivacyState;
using fedsim::Tensor;

TEST_SUITE_BEGIN("privacy");

namespace {

ParameterSet two_tensor_params(std::vector<double> a, std::vector<double> b) {
  ParameterSet p;
  Tensor ta;
  ta.name = "W";
  ta.shape = {a.size()};
  ta.data = std::move(a);
  Tensor tb;
  tb.name = "b";
  tb.shape = {b.size()};
  tb.data = std::move(b);
  p.tensors.push_back(std::move(ta));
  p.tensors.push_back(std::move(tb));
  return p;
}

bool bitwise_equal(const ParameterSet& a, const ParameterSet& b) {
  if (a.tensors.size() != b.tensors.size()) return false;
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    if (a.tensors[i].data != b.tensors[i].data) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("budget growth follows the exponential schedule") {
  PrivacySpec spec;
  spec.epsilon0 = 100.0;
  spec.decay_factor = 0.95;
  spec.mode = PrivacyMode::kAdaptive;
  CHECK(fedsim::epsilon_at(spec, 1) == 100.0);
  CHECK(fedsim::epsilon_at(spec, 2) ==
        doctest::Approx(105.26315789473684211).epsilon(1e-14));
  CHECK(fedsim::epsilon_at(spec, 10) ==
        doctest::Approx(158.66734416093384217).epsilon(1e-14));
  CHECK(fedsim::epsilon_at(spec, 50) ==
        doctest::Approx(1234.6485219906341772).epsilon(1e-13));
}

TEST_CASE("budget clamps at both ends") {
  PrivacySpec spec;
  spec.epsilon0 = 100.0;
  spec.decay_factor = 0.95;
  spec.epsilon_max = 120.0;
  CHECK(fedsim::epsilon_at(spec, 10) == 120.0);
  CHECK(fedsim::epsilon_at(spec, 1000) == 120.0);

  // A decay factor above 1 shrinks the budget; the floor catches it.
  spec.epsilon_max = std::numeric_limits<double>::infinity();
  spec.epsilon0 = 1.0;
  spec.decay_factor = 0.5;  // growth
  CHECK(fedsim::epsilon_at(spec, 3) == doctest::Approx(4.0).epsilon(1e-15));
  spec.epsilon_min = 50.0;
  CHECK(fedsim::epsilon_at(spec, 1) == 50.0);
}

TEST_CASE("gaussian noise scale matches the closed form") {
  // sqrt(2 ln(1.25/1e-5)) = sqrt(2 ln 125000) = 4.8448052626053894213.
  CHECK(fedsim::sigma_base(1.0, 100.0, 1e-5) ==
        doctest::Approx(0.048448052626053894213).epsilon(1e-12));
  CHECK(fedsim::sigma_base(1.0, 500.0, 1e-5) ==
        doctest::Approx(0.0096896105252107788425).epsilon(1e-12));
  CHECK(fedsim::sigma_base(1.0, 1000.0, 1e-5) ==
        doctest::Approx(0.0048448052626053894213).epsilon(1e-12));
  CHECK(fedsim::sigma_base(1.0, 2000.0, 1e-5) ==
        doctest::Approx(0.0024224026313026947106).epsilon(1e-12));
  // Linear in the clipping norm.
  CHECK(fedsim::sigma_base(3.0, 100.0, 1e-5) ==
        doctest::Approx(3.0 * 0.048448052626053894213).epsilon(1e-12));
}

TEST_CASE("per-tensor scales follow relative spread, clipped to [0.1, 1]") {
  // Tensors {-s, s} have population std s.  With stds 0.1 and 0.3 the mean
  // is 0.2, so raw ratios are 0.5 and 1.5 -> clipped to 0.5 and 1.0.
  const auto scales = fedsim::tensor_scales(
      two_tensor_params({-0.1, 0.1}, {-0.3, 0.3}));
  REQUIRE(scales.size() == 2);
  CHECK(scales[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(scales[1] == 1.0);
}

TEST_CASE("equal spreads get the full scale, zero tensors get the floor") {
  const auto equal = fedsim::tensor_scales(
      two_tensor_params({-2.0, 2.0}, {-2.0, 2.0}));
  CHECK(equal[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(equal[1] == doctest::Approx(1.0).epsilon(1e-12));

  // All-constant tensors have zero std everywhere; the 1e-12 floor in the
  // denominator avoids 0/0 and the lower clip takes over.
  const auto zero = fedsim::tensor_scales(
      two_tensor_params({5.0, 5.0}, {5.0, 5.0}));
  CHECK(zero[0] == 0.1);
  CHECK(zero[1] == 0.1);
}

TEST_CASE("scales never leave [0.1, 1] for random parameter sets") {
  fedsim::rng::Stream stream(404);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(3 + stream.next_below(20));
    std::vector<double> b(3 + stream.next_below(20));
    const double spread_a = std::exp(4.0 * (stream.next_unit() - 0.5));
    const double spread_b = std::exp(4.0 * (stream.next_unit() - 0.5));
    for (double& v : a) v = spread_a * stream.next_gaussian();
    for (double& v : b) v = spread_b * stream.next_gaussian();
    const auto scales =
        fedsim::tensor_scales(two_tensor_params(std::move(a), std::move(b)));
    for (double s : scales) {
      CHECK(s >= 0.1);
      CHECK(s <= 1.0);
    }
  }
}

TEST_CASE("norm clipping rescales exactly onto the ball surface") {
  // Flat norm of {3,4} plus {0} is 5.
  const auto clipped =
      fedsim::clip_to_norm(two_tensor_params({3.0, 4.0}, {0.0}), 1.0);
  CHECK(clipped.tensors[0].data[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(clipped.tensors[0].data[1] == doctest::Approx(0.8).epsilon(1e-12));
  const double norm = std::sqrt(fedsim::squared_norm(clipped));
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("updates already inside the ball pass through bitwise") {
  const ParameterSet inside = two_tensor_params({0.1, -0.2}, {0.05});
  const auto out = fedsim::clip_to_norm(inside, 1.0);
  CHECK(bitwise_equal(out, inside));
}

TEST_CASE("forcing zero noise makes the mechanism an exact clip") {
  PrivacySpec spec;
  spec.mode = PrivacyMode::kFixed;
  spec.clipping_norm = 1.0;
  spec.forced_sigma_base = 0.0;
  spec.seed = 3;

  const ParameterSet update = two_tensor_params({3.0, 4.0}, {0.0});
  PrivacyState state;
  state.client_id = 0;
  const auto noised = fedsim::apply_local_dp(update, spec, state);
  const auto clipped = fedsim::clip_to_norm(update, 1.0);
  CHECK(bitwise_equal(noised, clipped));
  CHECK(state.t == 1);
  REQUIRE(state.ledger.size() == 1);
  CHECK(state.ledger[0].sigma_base == 0.0);

  // Inside the ball with zero noise: the update is returned untouched.
  const ParameterSet small = two_tensor_params({0.01, -0.02}, {0.005});
  PrivacyState state2;
  const auto identity = fedsim::apply_local_dp(small, spec, state2);
  CHECK(bitwise_equal(identity, small));
}

TEST_CASE("clipping can be disabled while noise still applies") {
  PrivacySpec spec;
  spec.mode = PrivacyMode::kFixed;
  spec.clipping_norm = 1.0;
  spec.clip_update = false;
  spec.forced_sigma_base = 0.0;
  const ParameterSet update = two_tensor_params({3.0, 4.0}, {0.0});
  PrivacyState state;
  const auto out = fedsim::apply_local_dp(update, spec, state);
  CHECK(bitwise_equal(out, update));  // no clip, no noise
}

TEST_CASE("the mechanism is deterministic per (seed, client, round)") {
  PrivacySpec spec;
  spec.mode = PrivacyMode::kFixed;
  spec.epsilon0 = 100.0;
  spec.seed = 12;
  const ParameterSet update = two_tensor_params({0.3, -0.4}, {0.1});

  PrivacyState a;
  a.client_id = 1;
  PrivacyState b;
  b.client_id = 1;
  const auto out_a = fedsim::apply_local_dp(update, spec, a);
  const auto out_b = fedsim::apply_local_dp(update, spec, b);
  CHECK(bitwise_equal(out_a, out_b));

  // Different client, different noise.
  PrivacyState c;
  c.client_id = 2;
  const auto out_c = fedsim::apply_local_dp(update, spec, c);
  CHECK_FALSE(bitwise_equal(out_a, out_c));

  // Second round for the same client differs from the first.
  const auto out_a2 = fedsim::apply_local_dp(update, spec, a);
  CHECK_FALSE(bitwise_equal(out_a, out_a2));
  CHECK(a.t == 2);
}

TEST_CASE("fixed mode uses one sigma, adaptive mode scales per tensor") {
  const ParameterSet update = two_tensor_params({-0.1, 0.1}, {-0.3, 0.3});

  PrivacySpec fixed;
  fixed.mode = PrivacyMode::kFixed;
  fixed.epsilon0 = 100.0;
  fixed.clip_update = false;
  PrivacyState fs;
  fedsim::apply_local_dp(update, fixed, fs);
  REQUIRE(fs.ledger.size() == 1);
  const auto& frow = fs.ledger[0];
  REQUIRE(frow.tensor_sigmas.size() == 2);
  CHECK(frow.tensor_sigmas[0] == frow.sigma_base);
  CHECK(frow.tensor_sigmas[1] == frow.sigma_base);
  CHECK(frow.epsilon_t == 100.0);

  PrivacySpec adaptive = fixed;
  adaptive.mode = PrivacyMode::kAdaptive;
  PrivacyState as;
  fedsim::apply_local_dp(update, adaptive, as);
  const auto& arow = as.ledger[0];
  // Scales for stds {0.1, 0.3} are {0.5, 1.0}.
  CHECK(arow.tensor_sigmas[0] ==
        doctest::Approx(0.5 * arow.sigma_base).epsilon(1e-12));
  CHECK(arow.tensor_sigmas[1] ==
        doctest::Approx(arow.sigma_base).epsilon(1e-12));
}

TEST_CASE("adaptive budget grows across rounds and the ledger records it") {
  PrivacySpec spec;
  spec.mode = PrivacyMode::kAdaptive;
  spec.epsilon0 = 100.0;
  spec.decay_factor = 0.95;
  spec.epsilon_max = 140.0;
  const ParameterSet update = two_tensor_params({0.2, -0.2}, {0.1});
  PrivacyState state;
  for (int round = 0; round < 12; ++round) {
    fedsim::apply_local_dp(update, spec, state);
  }
  REQUIRE(state.ledger.size() == 12);
  CHECK(state.ledger[0].epsilon_t == 100.0);
  CHECK(state.ledger[1].epsilon_t ==
        doctest::Approx(105.26315789473684211).epsilon(1e-13));
  for (std::size_t i = 1; i < state.ledger.size(); ++i) {
    CHECK(state.ledger[i].epsilon_t >= state.ledger[i - 1].epsilon_t);
    CHECK(state.ledger[i].round == i + 1);
    // Larger budget, smaller noise.
    CHECK(state.ledger[i].sigma_base <= state.ledger[i - 1].sigma_base);
  }
  CHECK(state.ledger.back().epsilon_t == 140.0);
}

TEST_CASE("noised outputs stay near the clip ball and match sigma statistically") {
  // One long tensor so the empirical std of the added noise is tight.
  const std::size_t n = 100000;
  ParameterSet update;
  Tensor t;
  t.name = "W";
  t.shape = {n};
  t.data.assign(n, 0.0);
  update.tensors.push_back(t);

  PrivacySpec spec;
  spec.mode = PrivacyMode::kFixed;
  spec.epsilon0 = 10.0;
  spec.clipping_norm = 1.0;
  spec.seed = 99;
  PrivacyState state;
  const auto noised = fedsim::apply_local_dp(update, spec, state);

  const double sigma = fedsim::sigma_base(1.0, 10.0, 1e-5);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : noised.tensors[0].data) {
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  CHECK(std::abs(mean) < 5.0 * sigma / std::sqrt(static_cast<double>(n)));
  CHECK(std::sqrt(var) == doctest::Approx(sigma).epsilon(0.02));
}

TEST_CASE("spec validation names offending fields") {
  PrivacySpec spec;
  spec.epsilon0 = 0.0;
  CHECK_THROWS_WITH_AS(fedsim::validate(spec), doctest::Contains("epsilon"),
                       ConfigError);
  spec.epsilon0 = 10.0;
  spec.delta = 1.5;
  CHECK_THROWS_WITH_AS(fedsim::validate(spec), doctest::Contains("delta"),
                       ConfigError);
  spec.delta = 1e-5;
  spec.decay_factor = 0.0;
  CHECK_THROWS_WITH_AS(fedsim::validate(spec),
                       doctest::Contains("decay_factor"), ConfigError);
  spec.decay_factor = 0.95;
  spec.clipping_norm = -1.0;
  CHECK_THROWS_WITH_AS(fedsim::validate(spec),
                       doctest::Contains("clipping_norm"), ConfigError);
  spec.clipping_norm = 1.0;
  spec.epsilon_min = 5.0;
  spec.epsilon_max = 2.0;
  CHECK_THROWS_WITH_AS(fedsim::validate(spec),
                       doctest::Contains("max_epsilon"), ConfigError);
}

TEST_SUITE_END();
