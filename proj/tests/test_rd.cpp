#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wise/rd.hpp"

#include <cmath>
#include <map>
#include <random>

using namespace wise;

namespace {

struct Fixture {
  Ball ball;
  Development dev;
  BallLayout layout;
  explicit Fixture(int radius) : ball(radius), dev(), layout(dev, ball) {}
};

Fixture& fixture4() {
  static Fixture f(4);
  return f;
}

// Functions on G keyed by normal form, convolved by multiplying normal forms.
using Fn = std::map<std::string, double>;

Fn convolve(const Fn& f, const Fn& g) {
  Fn out;
  for (auto& [y, fy] : f)
    for (auto& [z, gz] : g) out[(NormalForm::fromKey(y) * NormalForm::fromKey(z)).key()] += fy * gz;
  return out;
}

double norm(const Fn& f) {
  double s = 0;
  for (auto& [k, v] : f) s += v * v;
  return std::sqrt(s);
}

Fn indicator(const Ball& ball, int r) {
  Fn f;
  for (std::uint32_t g = 0; g < ball.sizeAt(r); ++g) f[ball.normalForm(g).key()] = 1.0;
  return f;
}

}  // namespace

TEST_CASE("polyfit_loglog: exact, constant, noisy and degenerate data") {
  std::vector<std::pair<double, double>> cubic, flat, noisy;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0, 0.05);
  for (int r = 1; r <= 8; ++r) {
    cubic.emplace_back(r, 2.5 * r * r * r);
    flat.emplace_back(r, 4.0);
    noisy.emplace_back(r, 3.0 * std::pow(r, 2.0) * std::exp(noise(rng)));
  }
  const FitResult c = polyfit_loglog(cubic);
  CHECK(c.exponent == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(c.constant == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(c.residual < 1e-12);
  CHECK(std::abs(polyfit_loglog(flat).exponent) < 1e-12);
  CHECK(std::abs(polyfit_loglog(noisy).exponent - 2.0) < 0.1);
  CHECK_THROWS_AS(polyfit_loglog({{1, 1}, {2, 2}}), DegenerateData);
  CHECK_THROWS_AS(polyfit_loglog({{1, 1}, {2, 0}, {3, 3}}), DegenerateData);
  CHECK_THROWS_AS(polyfit_loglog({{2, 1}, {2, 2}, {2, 3}}), DegenerateData);
}

TEST_CASE("ball layout: products and inverses agree with normal forms") {
  Fixture& F = fixture4();
  const BallLayout& L = F.layout;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(F.ball.sizeAt(2) - 1));
  for (int k = 0; k < 300; ++k) {
    const std::uint32_t g = pick(rng), h = pick(rng);
    const auto gh = L.product(g, h);
    REQUIRE(gh);
    CHECK(F.ball.normalForm(*gh) == F.ball.normalForm(g) * F.ball.normalForm(h));
    CHECK(F.ball.normalForm(L.inverse(g)) == F.ball.normalForm(g).inverse());
  }
}

TEST_CASE("three_paths: identity, (8,0) condition, caps and envelope membership") {
  Fixture& F = fixture4();
  const BallLayout& L = F.layout;
  for (int r = 0; r <= 4; ++r) {
    const ThreePathFamily e = three_paths(L, 0, r);
    REQUIRE(e.members.size() == 1);
    CHECK(e.members[0] == ThreePath{0, 0, 0});
  }
  for (std::uint32_t z = 1; z < F.ball.sizeAt(1); ++z) {
    const Geodesic g = geodesic(F.dev, F.dev.base(), L.vertex(L.inverse(z)));
    const Envelope h = reduce_envelope(analytic_envelope(F.dev, g));
    for (int r = 1; r <= 3; ++r) {
      const ThreePathFamily fam = three_paths(L, z, r);
      CHECK(!fam.members.empty());
      for (const ThreePath& t : fam.members) {
        CHECK(isGeodesic80(L, t, z));
        CHECK(meetsCaps(L, t, z, r));
        const NormalForm prod = F.ball.normalForm(t.a3) * F.ball.normalForm(t.a2) * F.ball.normalForm(t.a1);
        CHECK(prod == F.ball.normalForm(z));
        // a1 and a2 a1 stand for the vertices of their inverses.
        const auto a2a1 = L.product(t.a2, t.a1);
        REQUIRE(a2a1);
        CHECK(h.containsPoint(F.dev, vertexPoint(F.dev, L.vertex(L.inverse(t.a1)))));
        CHECK(h.containsPoint(F.dev, vertexPoint(F.dev, L.vertex(L.inverse(*a2a1)))));
      }
    }
  }
}

TEST_CASE("three_paths: caps loosen monotonically up to l(z)") {
  Fixture& F = fixture4();
  const BallLayout& L = F.layout;
  for (std::uint32_t z = F.ball.sizeAt(1); z < F.ball.sizeAt(2); ++z) {
    const int lz = L.length(z);
    std::vector<ThreePath> prev;
    for (int r = 0; r <= lz; ++r) {
      const ThreePathFamily fam = three_paths(L, z, r, PatchPolicy::Restrict);
      CHECK(std::includes(fam.members.begin(), fam.members.end(), prev.begin(), prev.end()));
      prev = fam.members;
    }
  }
}

TEST_CASE("three_paths agrees with brute-force factorization over ball(4)") {
  Fixture& F = fixture4();
  const BallLayout& L = F.layout;
  std::size_t compared = 0;
  for (std::uint32_t z = 0; z < F.ball.sizeAt(2); z += (z < F.ball.sizeAt(1) ? 1 : 7)) {
    const auto brute = three_paths_bruteforce(L, z, 4);
    for (int r = 0; r <= 4; ++r) {
      CHECK(three_paths(L, z, r, PatchPolicy::Restrict).members == brute[r]);
      ++compared;
    }
  }
  CHECK(compared > 50);
}

TEST_CASE("strict policy refuses envelopes leaving the ball") {
  Fixture& F = fixture4();
  bool refused = false;
  for (std::uint32_t z = F.ball.sizeAt(3); z < F.ball.size() && !refused; ++z) {
    try {
      three_paths(F.layout, z, 1);
    } catch (const InsufficientPatch&) {
      refused = true;
    }
  }
  CHECK(refused);
}

TEST_CASE("growth audits tabulate nondecreasing maxima") {
  Fixture& F = fixture4();
  const GrowthAudit g = growth_audit(F.layout, 1, 6);
  REQUIRE(g.rows.size() == 6);
  CHECK(g.elements == F.ball.sizeAt(1));
  for (std::size_t k = 1; k < g.rows.size(); ++k) CHECK(g.rows[k].maxCount >= g.rows[k - 1].maxCount);
  CHECK(g.fit.exponent <= 6.5);

  std::vector<VertexId> targets;
  for (std::uint32_t z = 0; z < F.ball.sizeAt(3); z += 5) targets.push_back(F.layout.vertex(z));
  const GrowthAudit e = envelope_growth_audit(F.dev, targets, 6);
  for (std::size_t k = 1; k < e.rows.size(); ++k) CHECK(e.rows[k].maxCount >= e.rows[k - 1].maxCount);
  CHECK(e.rows[0].maxCount >= 2);
}

TEST_CASE("flat triangle census: off-flat zero, oracle agreement, bounded counts") {
  Fixture& F = fixture4();
  const BallLayout& L = F.layout;
  const FlatTriangleCensus c = flat_triangle_census(L, 2, 4);
  CHECK(c.oracleAgrees);
  CHECK(c.maxCount <= 2);
  for (const FlatTriangleRow& row : c.rows) {
    const Word& w = L.word(row.z);
    const bool stable = std::any_of(w.begin(), w.end(), [](Letter x) { return x.isStable(); });
    if (stable) CHECK(row.counts.back() == 0);
    if (row.z == 0) CHECK(row.counts == std::vector<std::size_t>(5, 1));
  }
  // z = a: corners e, a^-1 and the third corner of each of the two triangles on that edge.
  const auto a = F.ball.find(parseWord("a"));
  REQUIRE(a);
  CHECK(c.rows[*a].counts.back() == 2);
}

TEST_CASE("retract audit: witnesses replay through the normal form") {
  Fixture& F = fixture4();
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(F.ball.sizeAt(2) - 1));
  std::vector<std::pair<std::uint32_t, std::uint32_t>> xz;
  for (int k = 0; k < 40; ++k) xz.emplace_back(pick(rng), pick(rng));
  const RetractAudit a = retract_audit(F.layout, xz, 6);
  CHECK(a.failures == 0);
  CHECK(a.allReplay);
  CHECK(a.witnesses.size() + a.skipped == xz.size());
  CHECK(!a.witnesses.empty());
  for (const RetractWitness& w : a.witnesses) {
    CHECK(w.replayed);
    CHECK(w.lu >= 0);
  }
}

TEST_CASE("convolution probe: unit, bounds and monotonicity") {
  Fixture& F = fixture4();
  const BallLayout& L = F.layout;
  const RdEstimate unit = rd_constant_estimate(L, 0, 3);
  CHECK(unit.lowerBound == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(unit.powerIterBound == doctest::Approx(1.0).epsilon(1e-12));

  RdOptions random;
  random.weight = RdWeight::Random;
  for (const RdOptions& opts : {RdOptions{}, random}) {
    const RdScan s = rd_scan(L, 1, 3, 1, 4, opts, 2'000'000);
    CHECK(s.lowerBelowPower);
    CHECK(s.monotoneInR);
    CHECK(s.belowYoung);
    CHECK(s.beyondBudget.size() == 1);  // (3, 4)
    for (const RdScanRow& row : s.rows) {
      CHECK(row.estimate.converged);
      if (opts.weight == RdWeight::Characteristic)
        CHECK(row.estimate.youngCeiling == doctest::Approx(std::sqrt(double(F.ball.sizeAt(row.r)))));
    }
  }
}

TEST_CASE("characteristic quotient matches normal-form convolution") {
  Fixture& F = fixture4();
  RdOptions opts;
  opts.method = RdMethod::Characteristic;
  for (auto [r, R] : {std::pair{1, 1}, {1, 2}, {2, 2}, {2, 1}}) {
    const Fn f = indicator(F.ball, r), g = indicator(F.ball, R);
    const double oracle = norm(convolve(f, g)) / (norm(f) * norm(g));
    CHECK(rd_constant_estimate(F.layout, r, R, opts).lowerBound == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("convolution is associative with unit delta_e; Young bound on samples") {
  Fixture& F = fixture4();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  auto randomFn = [&](int r) {
    Fn f;
    for (std::uint32_t g = 0; g < F.ball.sizeAt(r); ++g) f[F.ball.normalForm(g).key()] = normal(rng);
    return f;
  };
  const Fn f = randomFn(1), g = randomFn(2), h = randomFn(1);
  const Fn left = convolve(convolve(f, g), h), right = convolve(f, convolve(g, h));
  REQUIRE(left.size() == right.size());
  for (auto& [k, v] : left) CHECK(v == doctest::Approx(right.at(k)).epsilon(1e-12));
  const Fn delta{{NormalForm().key(), 1.0}};
  CHECK(convolve(delta, g) == g);
  CHECK(convolve(g, delta) == g);
  double l1 = 0;
  for (auto& [k, v] : f) l1 += std::abs(v);
  CHECK(norm(convolve(f, g)) <= l1 * norm(g) + 1e-12);
}
