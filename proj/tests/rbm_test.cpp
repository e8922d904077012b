#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "roaddbn/checkpoint.hpp"
#include "roaddbn/errors.hpp"
#include "roaddbn/random.hpp"
#include "roaddbn/rbm.hpp"

using namespace roaddbn;

namespace {

RbmParams random_params(Index I, Index J, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  RbmParams p = RbmParams::zeros(I, J);
  for (Index i = 0; i < I; ++i) p.b[i] = rng.uniform(-scale, scale);
  for (Index j = 0; j < J; ++j) p.c[j] = rng.uniform(-scale, scale);
  for (Index i = 0; i < I; ++i) {
    for (Index j = 0; j < J; ++j) p.W(i, j) = rng.uniform(-scale, scale);
  }
  return p;
}

}  // namespace

TEST_CASE("energy of the two-visible one-hidden example") {
  RbmParams p = RbmParams::zeros(2, 1);
  p.b << 1.0, -1.0;
  p.c << 0.5;
  p.W << 2.0, -1.0;
  CHECK(energy(p, {1, 0}, {1}) == doctest::Approx(-3.5).epsilon(1e-15));
  CHECK(energy(RbmParams::zeros(3, 2), {1, 0, 1}, {1, 1}) == 0.0);
}

TEST_CASE("energy agrees with the triple sum and flips sign with the parameters") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Index I = 1 + static_cast<Index>(seed % 6);
    const Index J = 1 + static_cast<Index>(seed % 5);
    RbmParams p = random_params(I, J, seed);
    Rng rng(seed + 1000);
    const auto v = rng.below(1ULL << I);
    const auto h = rng.below(1ULL << J);
    const double e = energy(p, BinaryVector::from_bits(v, static_cast<int>(I)),
                            BinaryVector::from_bits(h, static_cast<int>(J)));
    CHECK(std::abs(e - oracle::energy(p, v, h)) < 1e-12);
    RbmParams neg{-p.b, -p.c, -p.W};
    CHECK(energy(neg, BinaryVector::from_bits(v, static_cast<int>(I)), BinaryVector::from_bits(h, static_cast<int>(J))) ==
          doctest::Approx(-e));
  }
}

TEST_CASE("energy rejects mismatched layers") {
  CHECK_THROWS_AS(energy(RbmParams::zeros(2, 1), {1, 0, 1}, {1}), StructuralError);
  CHECK_THROWS_AS(energy(RbmParams::zeros(2, 1), {1, 0}, {1, 1}), StructuralError);
}

TEST_CASE("binary vectors hold only zeros and ones") {
  CHECK_THROWS_AS(BinaryVector({0, 2}), ArgumentError);
  const auto v = BinaryVector::from_bits(0b101, 3);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 0.0);
  CHECK(v[2] == 1.0);
}

TEST_CASE("partition function of zero models counts configurations") {
  CHECK(partition_exact(RbmParams::zeros(1, 1)) == 4.0);
  CHECK(partition_exact(RbmParams::zeros(2, 1)) == 8.0);
  CHECK(joint_prob_exact(RbmParams::zeros(1, 1), {0}, {1}) == 0.25);
  CHECK(joint_prob_exact(RbmParams::zeros(1, 1), {1}, {1}) == 0.25);
}

TEST_CASE("partition function matches the oracle and normalizes the joint") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RbmParams p = random_params(4, 3, seed);
    CHECK(partition_exact(p) == doctest::Approx(oracle::partition(p)).epsilon(1e-12));
    ExactDistribution dist(p);
    double total = 0.0;
    for (std::uint64_t v = 0; v < 16; ++v) {
      for (std::uint64_t h = 0; h < 8; ++h) total += dist.joint(BinaryVector::from_bits(v, 4), BinaryVector::from_bits(h, 3));
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("enumeration bound is enforced") {
  CHECK_THROWS_AS(partition_exact(RbmParams::zeros(12, 11)), CapacityError);
  CHECK_NOTHROW(partition_exact(RbmParams::zeros(2, 3)));
}

TEST_CASE("raising a visible bias raises that unit's marginal") {
  RbmParams p = random_params(3, 2, 7);
  auto marginal_on = [](const RbmParams& q) {
    const auto m = oracle::visible_marginals(q);
    double on = 0.0;
    for (std::uint64_t v = 0; v < m.size(); ++v) on += oracle::bit(v, 0) * m[v];
    return on;
  };
  ExactDistribution before(p);
  const double lib_before = before.marginal_visible(0b001) + before.marginal_visible(0b011) +
                            before.marginal_visible(0b101) + before.marginal_visible(0b111);
  CHECK(lib_before == doctest::Approx(marginal_on(p)));
  RbmParams q = p;
  q.b[0] += 0.5;
  CHECK(marginal_on(q) > marginal_on(p));
}

TEST_CASE("conditionals") {
  CHECK(hidden_conditional(RbmParams::zeros(3, 2), {1, 1, 0}).isApprox(Vector::Constant(2, 0.5)));
  CHECK(visible_conditional(RbmParams::zeros(3, 2), {1, 0}).isApprox(Vector::Constant(3, 0.5)));

  RbmParams p = RbmParams::zeros(1, 1);
  p.W(0, 0) = 2.0;
  CHECK(hidden_conditional(p, {1})[0] == doctest::Approx(0.8807970779778823).epsilon(1e-14));
  CHECK(visible_conditional(p, {1})[0] == doctest::Approx(0.8807970779778823).epsilon(1e-14));

  double last = 0.0;
  for (double c : {0.0, 1.0, 5.0, 20.0, 40.0}) {
    p.c[0] = c;
    const double value = hidden_conditional(p, {0})[0];
    CHECK(value >= last);
    CHECK(value < 1.0);
    last = value;
  }
  CHECK(last > 1.0 - 1e-12);
  CHECK(sigmoid(-1000.0) > 0.0);
}

TEST_CASE("conditionals agree with the oracle for random states") {
  const RbmParams p = random_params(5, 4, 11);
  for (std::uint64_t v = 0; v < 32; ++v) {
    const Vector ph = hidden_conditional(p, BinaryVector::from_bits(v, 5));
    for (int j = 0; j < 4; ++j) {
      double x = p.c[j];
      for (int i = 0; i < 5; ++i) x += oracle::bit(v, i) * p.W(i, j);
      CHECK(ph[j] == doctest::Approx(oracle::logistic(x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("cd_update is deterministic and inert at zero learning rate") {
  const RbmParams p = random_params(6, 4, 3, 0.1);
  const TrainBatch batch(std::vector<BinaryVector>{BinaryVector::from_bits(0b110011, 6), BinaryVector::from_bits(0b001100, 6)});
  CdOptions still{1, 0.0};
  const RbmParams same = cd_update(p, batch, still, 9);
  CHECK(same.W == p.W);
  CHECK(same.b == p.b);
  CHECK(same.c == p.c);

  CdOptions options{2, 0.1};
  const RbmParams a = cd_update(p, batch, options, 42);
  const RbmParams b = cd_update(p, batch, options, 42);
  CHECK(a.W == b.W);
  CHECK(a.b == b.b);
  CHECK(a.c == b.c);
  CHECK(a.W != p.W);
}

TEST_CASE("cd_update argument checks") {
  const RbmParams p = RbmParams::zeros(2, 2);
  CHECK_THROWS_AS(cd_update(p, TrainBatch(Matrix(0, 2)), {}, 1), ArgumentError);
  CHECK_THROWS_AS(cd_update(p, TrainBatch(Matrix::Constant(1, 2, 0.5)), {0, 0.1}, 1), ArgumentError);
  CHECK_THROWS_AS(TrainBatch(Matrix::Constant(1, 2, 1.5)), ArgumentError);
}

TEST_CASE("CD-1 lowers exact KL on a two-pattern task") {
  const std::vector<std::uint64_t> patterns{0b0011, 0b1100};
  Matrix data(20, 4);
  for (Index n = 0; n < 20; ++n) data.row(n) = BinaryVector::from_bits(patterns[n % 2], 4).values().transpose();
  const TrainBatch batch(data);
  RbmParams p = RbmParams::initialized(4, 3, 5);
  const double before = oracle::kl_uniform_patterns(p, patterns);
  for (int epoch = 0; epoch < 500; ++epoch) p = cd_update(p, batch, {1, 0.1}, mix_seed(5, epoch));
  CHECK(oracle::kl_uniform_patterns(p, patterns) < before);
}

TEST_CASE("reconstruction error") {
  CHECK_THROWS_AS(reconstruction_error(RbmParams::zeros(2, 1), TrainBatch(Matrix(0, 2))), ArgumentError);
  // A saturated identity-like model reconstructs its two patterns.
  RbmParams p = RbmParams::zeros(2, 2);
  p.W << 20.0, -20.0, -20.0, 20.0;
  p.b << -10.0, -10.0;
  p.c << -10.0, -10.0;
  const TrainBatch batch(std::vector<BinaryVector>{{1, 0}, {0, 1}});
  CHECK(reconstruction_error(p, batch) < 0.01);
  CHECK(reconstruction_error(RbmParams::zeros(2, 1), TrainBatch(Matrix::Constant(3, 2, 0.5))) == 0.0);
}

TEST_CASE("checkpoint round trip is lossless") {
  RbmParams p = random_params(5, 3, 21);
  p.W(1, 2) = 1e-300;
  p.b[0] = -0.1;
  std::stringstream buffer;
  write_rbm(buffer, p);
  const RbmParams q = read_rbm(buffer);
  CHECK(q.W == p.W);
  CHECK(q.b == p.b);
  CHECK(q.c == p.c);
}

TEST_CASE("checkpoint parse errors carry line numbers") {
  std::stringstream bad("RBMPARAMS 1 hexfloat\n2 1\nb 0x0p+0 0x0p+0\nc zz\n");
  try {
    read_rbm(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& error) {
    CHECK(error.line() == 4);
  }
  std::stringstream wrong("RBMPARAMS 2 hexfloat\n");
  CHECK_THROWS_AS(read_rbm(wrong), ParseError);
}
