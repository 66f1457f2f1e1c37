#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wise/link.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

using namespace wise;

namespace {

// Independent cycle oracle: an edge subset is a simple cycle iff it is
// connected and every touched vertex has degree 2.
std::vector<AngleValue> cycleLengthsBySubsets(const LinkGraph& g) {
  const auto& edges = g.edges();
  const int m = static_cast<int>(edges.size());
  std::vector<AngleValue> out;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> deg(g.germs().size(), 0);
    for (int e = 0; e < m; ++e)
      if (mask >> e & 1) ++deg[edges[e].v0], ++deg[edges[e].v1];
    if (std::any_of(deg.begin(), deg.end(), [](int d) { return d != 0 && d != 2; })) continue;
    // Connectivity by union-find over the chosen edges.
    std::vector<int> parent(g.germs().size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (int e = 0; e < m; ++e)
      if (mask >> e & 1) parent[find(edges[e].v0)] = find(edges[e].v1);
    std::set<int> roots;
    for (std::size_t v = 0; v < deg.size(); ++v)
      if (deg[v]) roots.insert(find(static_cast<int>(v)));
    if (roots.size() != 1) continue;
    AngleValue len;
    for (int e = 0; e < m; ++e)
      if (mask >> e & 1) len = len + edges[e].length;
    out.push_back(len);
  }
  return out;
}

// Shortest walk between vertices using at most `depth` edges.
std::optional<AngleValue> walkDistance(const LinkGraph& g, int from, int to, int depth) {
  std::optional<AngleValue> best;
  if (from == to) return AngleValue::zero();
  auto rec = [&](auto&& self, int v, AngleValue acc, int left) -> void {
    if (v == to) {
      if (!best || acc < *best) best = acc;
      return;
    }
    if (!left) return;
    for (const LinkEdge& e : g.edges()) {
      if (e.v0 == v) self(self, e.v1, acc + e.length, left - 1);
      if (e.v1 == v) self(self, e.v0, acc + e.length, left - 1);
    }
  };
  rec(rec, from, AngleValue::zero(), depth);
  return best;
}

std::map<CycleKind, int> census(const LinkGraph& g) {
  std::map<CycleKind, int> out;
  for (const auto& c : g.enumerate2PiCycles()) ++out[c.kind];
  return out;
}

}  // namespace

TEST_CASE("angle identity from the law of cosines") {
  // Sides 1, 1, 1/2: the apex angle faces the short side.
  long double apex = std::acos((1.0L + 1.0L - 0.25L) / 2.0L);
  long double base = std::acos((1.0L + 0.25L - 1.0L) / (2.0L * 1.0L * 0.5L));
  CHECK(std::fabs(apex - angleU()) < 1e-15L);
  CHECK(std::fabs(base - angleV()) < 1e-15L);
  CHECK(std::fabs(angleU() + 2 * angleV() - std::acos(-1.0L)) < 1e-12L);
  CHECK(std::fabs(AngleValue::u().value() - angleU()) < 1e-12L);
  CHECK(AngleValue::u() + AngleValue::v() * Rational(2) == AngleValue::pi());
}

TEST_CASE("faces: corner angles sum to (k-2)pi") {
  for (const FaceShape& f : presentationFaces()) {
    AngleValue sum;
    for (const auto& a : f.corners) sum = sum + a;
    CHECK(sum == AngleValue::pi() * Rational(static_cast<std::int64_t>(f.boundary.size()) - 2));
  }
}

TEST_CASE("build_link: 10 germs, 16 corners") {
  LinkGraph L = build_link();
  CHECK(L.germs().size() == 10);
  std::size_t corners = 0;
  for (const FaceShape& f : presentationFaces()) corners += f.boundary.size();
  CHECK(L.edges().size() == corners);
  CHECK(L.edges().size() == 16);
  int bold = 0;
  for (const LinkEdge& e : L.edges()) {
    bool isBold = e.length == AngleValue::u() || e.length == AngleValue::v();
    CHECK(e.bold == isBold);
    if (e.bold) {
      ++bold;
      CHECK(e.face < 2);
    } else {
      CHECK((e.length == AngleValue::halfPi() || e.length == AngleValue::pi()));
    }
  }
  CHECK(bold == 6);
}

TEST_CASE("simple cycles agree with the edge-subset oracle") {
  LinkGraph L = build_link();
  auto oracle = cycleLengthsBySubsets(L);
  CHECK(L.simpleCycles().size() == oracle.size());
  std::multiset<std::string> a, b;
  for (const auto& c : L.simpleCycles()) a.insert(c.length.str());
  for (const auto& len : oracle) b.insert(len.str());
  CHECK(a == b);
}

TEST_CASE("girth is exactly 2pi and no shorter cycle exists") {
  LinkGraph L = build_link();
  CHECK(L.girth() == AngleValue::twoPi());
  for (const auto& len : cycleLengthsBySubsets(L)) CHECK(!(len < AngleValue::twoPi()));
  for (std::size_t e = 0; e < L.edges().size(); ++e) {
    if (!L.edges()[e].bold) continue;
    LinkGraph cut = L.withoutEdge(static_cast<int>(e));
    CHECK(!(cut.girth() < L.girth()));
  }
}

TEST_CASE("2pi-cycle census") {
  LinkGraph L = build_link();
  auto c = census(L);
  CHECK(c[CycleKind::Bold] == 1);
  CHECK(c[CycleKind::NonBoldPiPi] == 1);
  CHECK(c[CycleKind::NonBoldHalfHalfPi] == 4);
  CHECK(c[CycleKind::NonBoldFourHalves] == 1);
  // Frozen: two bold half-hexagons per antipodal pair, times the non-bold
  // pi-paths joining it (1 for a, 1 for b, 4 for c).
  CHECK(c[CycleKind::Mixed] == 12);
  for (const auto& cc : L.enumerate2PiCycles()) CHECK(cc.length == AngleValue::twoPi());
}

TEST_CASE("census is invariant under relabeling the vertices") {
  LinkGraph L = build_link();
  auto base = census(L);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Letter> germs(10);
    for (int v = 0; v < 10; ++v) germs[perm[v]] = L.germs()[v];
    std::vector<LinkEdge> edges = L.edges();
    std::shuffle(edges.begin(), edges.end(), rng);
    for (auto& e : edges) e.v0 = perm[e.v0], e.v1 = perm[e.v1];
    LinkGraph R = LinkGraph::fromEdges(germs, edges);
    CHECK(census(R) == base);
    CHECK(R.sameAs(L));
  }
}

TEST_CASE("link distances: exact Dijkstra against walk enumeration") {
  LinkGraph L = build_link();
  for (int p = 0; p < 10; ++p)
    for (int q = 0; q < 10; ++q) {
      AngleValue d = L.distance(LinkPoint::atVertex(p), LinkPoint::atVertex(q));
      auto w = walkDistance(L, p, q, 6);
      REQUIRE(w);
      CHECK(d == *w);
      CHECK(d.m.denominator() == 1);
      CHECK(d.n.denominator() == 1);
      CHECK(std::abs(d.m.numerator()) <= 8);
      CHECK(std::abs(d.n.numerator()) <= 8);
      CHECK(d == L.distance(LinkPoint::atVertex(q), LinkPoint::atVertex(p)));
    }
  CHECK(L.distance(LinkPoint::atVertex(3), LinkPoint::atVertex(3)) == AngleValue::zero());
}

TEST_CASE("link distances satisfy the triangle inequality on sampled points") {
  LinkGraph L = build_link();
  std::vector<LinkPoint> pts;
  for (int v = 0; v < 10; ++v) pts.push_back(LinkPoint::atVertex(v));
  for (int e = 0; e < 16; ++e)
    for (int k = 1; k < 8; k += 2) pts.push_back(LinkPoint::onEdge(e, Rational(k, 8)));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  for (int n = 0; n < 3000; ++n) {
    const auto &p = pts[pick(rng)], &q = pts[pick(rng)], &w = pts[pick(rng)];
    CHECK(!(L.distance(p, w) + L.distance(w, q) < L.distance(p, q)));
  }
}

TEST_CASE("numeric order never contradicts coefficient equality") {
  std::vector<AngleValue> vals;
  for (int m = -12; m <= 12; ++m)
    for (int n = -12; n <= 12; ++n) vals.push_back({Rational(m), Rational(n)});
  long double minGap = 1;
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = i + 1; j < vals.size(); ++j)
      minGap = std::min(minGap, std::fabs(vals[i].value() - vals[j].value()));
  CHECK(minGap > 1e-12L);
}

TEST_CASE("points at distance > pi lie on a unique smallest cycle of length 2pi+2u or 2pi+2v") {
  LinkGraph L = build_link();
  const AngleValue withU = AngleValue::twoPi() + AngleValue::u() * Rational(2);
  const AngleValue withV = AngleValue::twoPi() + AngleValue::v() * Rational(2);
  std::vector<LinkPoint> pts;
  for (int v = 0; v < 10; ++v) pts.push_back(LinkPoint::atVertex(v));
  for (int e = 0; e < 16; ++e)
    for (int k = 1; k < 8; ++k) pts.push_back(LinkPoint::onEdge(e, Rational(k, 8)));
  int far = 0, vertexFar = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (!(L.distance(pts[i], pts[j]) > AngleValue::pi())) {
        CHECK_THROWS_AS(L.smallestCommonCycle(pts[i], pts[j]), std::invalid_argument);
        continue;
      }
      ++far;
      if (i < 10 && j < 10) ++vertexFar;
      CommonCycle c = L.smallestCommonCycle(pts[i], pts[j]);
      CHECK((c.length == withU || c.length == withV));
      CHECK(c.unique);
      CHECK(c.runnerUp > c.length);
      CommonCycle back = L.smallestCommonCycle(pts[j], pts[i]);
      CHECK(back.length == c.length);
    }
  CHECK(vertexFar == 5);
  CHECK(far > vertexFar);
}
