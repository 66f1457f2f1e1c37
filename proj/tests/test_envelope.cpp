#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wise/envelope.hpp"

#include <cmath>
#include <random>

using namespace wise;

namespace {

Word parse(const char* s) {
  Word w;
  for (const char* p = s; *p; ++p)
    for (Letter l : kAllLetters)
      if (l.symbol() == *p) w.push_back(l);
  return w;
}

VertexId randomVertex(Development& dev, std::mt19937_64& rng, int maxLen) {
  std::uniform_int_distribution<int> len(0, maxLen), pick(0, kLetterCount - 1);
  Word w;
  for (int k = len(rng); k > 0; --k) w.push_back(kAllLetters[pick(rng)]);
  return dev.walk(dev.base(), w);
}

// Unfolding condition at every gluing line: the two sub-segments make the
// same angle with the line.
bool locallyStraight(const Development& dev, const Geodesic& g) {
  for (std::size_t k = 0; k + 1 < g.pieces.size(); ++k) {
    Vec2 d0 = g.end[k] - g.start[k], d1 = g.end[k + 1] - g.start[k + 1];
    if (d0.norm() < 1e-9 || d1.norm() < 1e-9) continue;
    // The band parameter runs along the line direction on both sides.
    double a0, a1;
    if (g.pieces[k].band) {
      a0 = d0.y() / d0.norm();
      LatticeLine l = lineIn(dev, g.pieces[k].id, g.pieces[k + 1].id);
      a1 = d1.dot(lineDirection(l)) / d1.norm();
    } else {
      LatticeLine l = lineIn(dev, g.pieces[k + 1].id, g.pieces[k].id);
      a0 = d0.dot(lineDirection(l)) / d0.norm();
      a1 = d1.y() / d1.norm();
    }
    if (std::abs(a0 - a1) > 1e-6) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("geodesic: trivial cases") {
  Development dev;
  VertexId e = dev.base();
  Geodesic g = geodesic(dev, e, e);
  CHECK(g.degenerate());
  CHECK(g.length == 0);
  CHECK(geodesic(dev, e, dev.walk(e, parse("a"))).length == doctest::Approx(1).epsilon(1e-12));
  CHECK(geodesic(dev, e, dev.walk(e, parse("B"))).length == doctest::Approx(1).epsilon(1e-12));
  CHECK(geodesic(dev, e, dev.walk(e, parse("c"))).length == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(geodesic(dev, e, dev.walk(e, parse("s"))).length == doctest::Approx(1).epsilon(1e-9));
  CHECK(geodesic(dev, e, dev.walk(e, parse("T"))).length == doctest::Approx(1).epsilon(1e-9));
  // s a s^-1 = c^2: two c-edges along one line.
  CHECK(geodesic(dev, e, dev.walk(e, parse("saS"))).length == doctest::Approx(1).epsilon(1e-9));
  // Lattice point (2, 1): |2A + B|^2 = 4 - 7/2 + 1.
  CHECK(geodesic(dev, e, dev.vertexAt(0, 2, 1)).length == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
}

TEST_CASE("geodesic: bounded by the refined graph and close to the k = 32 oracle") {
  Development dev;
  std::mt19937_64 rng(11);
  const double pi = std::acos(-1.0);
  for (int n = 0; n < 40; ++n) {
    VertexId x = randomVertex(dev, rng, 5), y = randomVertex(dev, rng, 5);
    Geodesic g = geodesic(dev, x, y);
    double r8 = refinedGraphLength(dev, x, y, 8);
    CHECK(g.length <= r8 + 1e-9);
    CHECK(r8 <= g.length * (1 + pi * pi / 128) + 1e-9);
    if (n % 4 == 0) {
      double r32 = refinedGraphLength(dev, x, y, 32);
      CHECK(g.length <= r32 + 1e-9);
      CHECK(r32 <= r8 + 1e-9);
      CHECK(r32 <= g.length * (1 + pi * pi / 2048) + 1e-9);
    }
    CHECK(locallyStraight(dev, g));
  }
}

TEST_CASE("geodesic: the length does not depend on the verifying subdivision") {
  Development dev;
  std::mt19937_64 rng(12);
  for (int n = 0; n < 10; ++n) {
    VertexId x = randomVertex(dev, rng, 5), y = randomVertex(dev, rng, 5);
    double a = geodesic(dev, x, y, {8}).length, b = geodesic(dev, x, y, {32}).length;
    CHECK(std::abs(a - b) < 1e-9);
    CHECK(std::abs(catDistance(dev, vertexPoint(dev, x), vertexPoint(dev, y)) - a) < 1e-9);
  }
}

TEST_CASE("bands met: interior contact only") {
  Development dev;
  VertexId e = dev.base();
  CHECK(geodesic(dev, e, dev.vertexAt(0, 3, 1)).bandsMet().empty());
  CHECK(geodesic(dev, e, dev.walk(e, parse("s"))).bandsMet().size() == 1);
  // Along a c-line: four bands are glued there but none is entered.
  Geodesic along = geodesic(dev, e, dev.vertexAt(0, 3, 3));
  CHECK(along.bandsMet().empty());
  CHECK(along.singular());
  CHECK(!geodesic(dev, e, dev.vertexAt(0, 3, 1)).singular());
  Geodesic two = geodesic(dev, e, dev.walk(e, parse("sasS")));
  CHECK(two.bandsMet().size() == 1);
}

TEST_CASE("analytic envelope: flat cases") {
  Development dev;
  VertexId e = dev.base();
  Geodesic g = geodesic(dev, e, dev.vertexAt(0, 3, 1));
  Envelope h = analytic_envelope(dev, g);
  REQUIRE(h.pieces.size() == 1);
  CHECK(h.pieces[0].tag == PieceTag::FlatRegion);
  // Simplicial hull: 0 <= i <= 3, 0 <= j <= 1, 0 <= i - j <= 2.
  CHECK(h.inSurface(dev, vertexPoint(dev, dev.vertexAt(0, 1, 0))));
  CHECK(h.inSurface(dev, vertexPoint(dev, dev.vertexAt(0, 2, 1))));
  CHECK(!h.inSurface(dev, vertexPoint(dev, dev.vertexAt(0, 3, 0))));
  CHECK(h.inSurface(dev, vertexPoint(dev, dev.vertexAt(0, 1, 1))));

  // Singular: the glued chromosomes along the c-line, i.e. its four bands.
  Geodesic s = geodesic(dev, e, dev.vertexAt(0, 2, 2));
  Envelope hs = analytic_envelope(dev, s);
  CHECK(hs.bands().size() == 4);
  for (const EnvelopePiece& p : hs.pieces) CHECK(p.tag == PieceTag::GluedChromosome);
  CHECK(hs.inSurface(dev, vertexPoint(dev, dev.vertexAt(0, 7, 7))));
  CHECK(!hs.inSurface(dev, vertexPoint(dev, dev.vertexAt(0, 1, 0))));
  CHECK(glued_reading_divergence(dev, s) == 0);
}

TEST_CASE("analytic envelope: strips between parallel bands and sectors at centromeres") {
  Development dev;
  std::mt19937_64 rng(21);
  int strips = 0, sectors = 0;
  for (int n = 0; n < 400 && (strips < 3 || sectors < 3); ++n) {
    VertexId x = randomVertex(dev, rng, 6), y = randomVertex(dev, rng, 6);
    Geodesic g = geodesic(dev, x, y);
    Envelope h = analytic_envelope(dev, g);
    for (std::size_t k = 1; k + 1 < g.pieces.size(); ++k) {
      if (g.pieces[k].band || !g.pieces[k - 1].band || !g.pieces[k + 1].band) continue;
      const int flat = g.pieces[k].id;
      LatticeLine l1 = lineIn(dev, g.pieces[k - 1].id, flat), l2 = lineIn(dev, g.pieces[k + 1].id, flat);
      int regions = 0, secs = 0;
      for (const EnvelopePiece& p : h.pieces) {
        if (p.flat != flat) continue;
        regions += p.tag == PieceTag::FlatRegion;
        secs += p.tag == PieceTag::ChromosomeSector;
      }
      if (l1.dir == l2.dir && l1.c != l2.c) {
        ++strips;
        CHECK(regions == 1);
      } else if (l1.dir != l2.dir) {
        ++sectors;
        CHECK(secs >= 2);
      }
      // The crossing segment lies in the envelope.
      XPoint mid = XPoint::inFlat(flat, (g.start[k] + g.end[k]) / 2);
      CHECK(h.inSurface(dev, mid));
    }
  }
  CHECK(strips >= 3);
  CHECK(sectors >= 3);
}

TEST_CASE("envelopes: containment and monotonicity") {
  Development dev;
  std::mt19937_64 rng(31);
  for (int n = 0; n < 40; ++n) {
    VertexId x = randomVertex(dev, rng, 5), y = randomVertex(dev, rng, 5);
    Geodesic g = geodesic(dev, x, y);
    Envelope h = analytic_envelope(dev, g);
    Envelope r = reduce_envelope(h);
    Envelope s = saturate_envelope(dev, h);
    Envelope sr = reduce_envelope(s);
    CHECK(r.kind == EnvelopeKind::Reduced);
    CHECK(sr.kind == EnvelopeKind::SaturatedReduced);
    for (int q = 0; q <= 16; ++q) {
      XPoint p = g.pointAt(g.length * q / 16);
      CHECK(h.inSurface(dev, p));
      CHECK(r.containsPoint(dev, p));
    }
    std::vector<VertexId> vr = envelope_vertices(dev, r), vs = envelope_vertices(dev, sr);
    CHECK(std::includes(vs.begin(), vs.end(), vr.begin(), vr.end()));
    for (VertexId v : vr) {
      XPoint p = vertexPoint(dev, v);
      CHECK(h.inSurface(dev, p));
      CHECK(s.inSurface(dev, p));
      CHECK(catDistance(dev, r.center, p) <= r.radius + 1e-9);
    }
  }
}

TEST_CASE("envelopes: degenerate and saturated flat cases") {
  Development dev;
  VertexId e = dev.base();
  Envelope r = reduce_envelope(analytic_envelope(dev, geodesic(dev, e, e)));
  CHECK(envelope_vertices(dev, r) == std::vector<VertexId>{e});
  Envelope h = analytic_envelope(dev, geodesic(dev, e, dev.vertexAt(0, 2, 1)));
  Envelope s = saturate_envelope(dev, h);
  CHECK(s.inSurface(dev, vertexPoint(dev, dev.vertexAt(0, -40, 17))));
  CHECK(!h.inSurface(dev, vertexPoint(dev, dev.vertexAt(0, -40, 17))));
}

TEST_CASE("triangle reduction: degenerate and flat cases") {
  Development dev;
  VertexId e = dev.base();
  ReductionOutcome o = triangle_reduce(dev, Triangle{e, e, e});
  CHECK(o.kind == ReductionOutcome::Kind::TripleIntersection);
  CHECK(o.witness.flat == 0);
  // Sides along the three singular directions leave the open triangle.
  o = triangle_reduce(dev, Triangle{e, dev.vertexAt(0, 6, 0), dev.vertexAt(0, 6, 6)});
  REQUIRE(o.kind == ReductionOutcome::Kind::ResidualTriangle);
  CHECK(o.residual.n == 6);
  CHECK(o.residual.i == 0);
  CHECK(o.residual.j == 0);
  CHECK(!o.residual.upper);
  o = triangle_reduce(dev, Triangle{e, dev.vertexAt(0, 0, 5), dev.vertexAt(0, 5, 5)});
  REQUIRE(o.kind == ReductionOutcome::Kind::ResidualTriangle);
  CHECK(o.residual.upper);
  CHECK(o.residual.n == 5);
}

TEST_CASE("triangle lemmas on random triples") {
  Development dev;
  std::mt19937_64 rng(41);
  for (int n = 0; n < 60; ++n) {
    Triangle t{randomVertex(dev, rng, 5), randomVertex(dev, rng, 5), randomVertex(dev, rng, 5)};
    CHECK(check_frizes(dev, t));
    CHECK(check_frizes(dev, Triangle{t.C, t.A, t.B}) == check_frizes(dev, Triangle{t.B, t.C, t.A}));
    CHECK(check_midpoint_balls(dev, t));
    TriangleEnvelopes te = triangle_envelopes(dev, t);
    ReductionOutcome o = triangle_reduce(dev, te);
    CHECK(o.kind != ReductionOutcome::Kind::Violation);
    XPoint w = triangle_reduce_saturated(dev, te);
    for (int k = 0; k < 3; ++k) {
      CHECK(te.saturatedReduced[k].containsPoint(dev, w));
      CHECK(catDistance(dev, te.side[k].midpoint(), w) <= 2 * te.side[k].length + 1e-9);
    }
  }
}

TEST_CASE("margin check rejects envelopes leaving the patch ball") {
  Development dev;
  Ball ball(3);
  PatchMargin small(dev, ball, 3);
  VertexId e = dev.base();
  Envelope r = reduce_envelope(analytic_envelope(dev, geodesic(dev, e, dev.vertexAt(0, 5, 2))));
  CHECK_THROWS_AS(small.require(r), InsufficientPatch);
  PatchMargin wide(dev, ball, 12);
  CHECK_NOTHROW(wide.require(r));
  CHECK(small.inside(e));
}
