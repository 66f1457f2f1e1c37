#include "wise/envelope.hpp"

#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace wise {

const char* str(EnvelopeKind k) {
  switch (k) {
    case EnvelopeKind::Analytic: return "analytic";
    case EnvelopeKind::Reduced: return "reduced";
    case EnvelopeKind::Saturated: return "saturated";
    case EnvelopeKind::SaturatedReduced: return "saturated-reduced";
  }
  return "?";
}

const char* str(PieceTag t) {
  switch (t) {
    case PieceTag::Band: return "band";
    case PieceTag::FlatRegion: return "flat-region";
    case PieceTag::ChromosomeSector: return "chromosome-sector";
    case PieceTag::HalfPlane: return "half-plane";
    case PieceTag::GluedChromosome: return "glued-chromosome";
    case PieceTag::Flat: return "flat";
    case PieceTag::Point: return "point";
  }
  return "?";
}

double lineValue(const LatticeLine& line, double i, double j) {
  if (line.dir == La) return j - line.c;
  if (line.dir == Lb) return i - line.c;
  return i - j - line.c;
}

namespace {

std::pair<int, int> functional(Letter dir) {
  if (dir == La) return {0, 1};
  if (dir == Lb) return {1, 0};
  return {1, -1};
}

// Half-plane {sign * (f - c) >= 0} bounded by a lattice line.
LatticeHalfPlane sideOf(const LatticeLine& line, int sign) {
  auto [a, b] = functional(line.dir);
  return {-sign * a, -sign * b, -sign * static_cast<std::int64_t>(line.c)};
}

Vec2 ijOf(const Vec2& planar) { return latticeCoords(planar); }

bool onLine(const LatticeLine& line, const Vec2& ij, double tol) { return std::abs(lineValue(line, ij.x(), ij.y())) <= tol; }

bool satisfies(const std::vector<LatticeHalfPlane>& cs, const Vec2& ij, double tol) {
  for (const LatticeHalfPlane& h : cs)
    if (!h.holds(ij.x(), ij.y(), tol)) return false;
  return true;
}

// Arc-length intervals of the geodesic lying in the closed band.
std::vector<std::pair<double, double>> bandContact(const Development& dev, const Geodesic& g, int band) {
  std::vector<std::pair<double, double>> out;
  BandGeometry geo = bandGeometry(dev, band);
  double cum = 0;
  for (std::size_t k = 0; k < g.pieces.size(); ++k) {
    const GeodesicPiece& p = g.pieces[k];
    const double len = g.segment[k];
    if (p.band && p.id == band) {
      out.push_back({cum, cum + len});
    } else if (!p.band && (p.id == geo.cFlat || p.id == geo.otherFlat)) {
      LatticeLine line = lineIn(dev, band, p.id);
      Vec2 a = ijOf(g.start[k]), b = ijOf(g.end[k]);
      double v0 = lineValue(line, a.x(), a.y()), v1 = lineValue(line, b.x(), b.y());
      const double tol = 1e-9;
      if (std::abs(v0) <= tol && std::abs(v1) <= tol) {
        out.push_back({cum, cum + len});
      } else if (std::abs(v0) <= tol) {
        out.push_back({cum, cum});
      } else if (std::abs(v1) <= tol) {
        out.push_back({cum + len, cum + len});
      } else if ((v0 < 0) != (v1 < 0)) {
        double s = cum + len * v0 / (v0 - v1);
        out.push_back({s, s});
      }
    }
    cum += len;
  }
  return out;
}

// Whether the union of contact intervals holds at least two points.
bool twoPoints(const std::vector<std::pair<double, double>>& iv, double length, bool endpoints) {
  const double tol = 1e-9;
  std::vector<double> points;
  for (auto [a, b] : iv) {
    a = std::max(a, 0.0);
    b = std::min(b, length);
    if (b - a > tol) return true;
    if (b < a - tol) continue;
    double s = (a + b) / 2;
    if (!endpoints && (s <= tol || s >= length - tol)) continue;
    points.push_back(s);
  }
  std::sort(points.begin(), points.end());
  for (std::size_t k = 1; k < points.size(); ++k)
    if (points[k] - points[k - 1] > tol) return true;
  return false;
}

// c-lines that may carry a collé chromosome touching the geodesic.
std::vector<LatticeLine> candidateCLines(Development& dev, const Geodesic& g) {
  std::vector<LatticeLine> out;
  auto add = [&](const LatticeLine& l) {
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  };
  for (const GeodesicPiece& p : g.pieces)
    if (p.band) add(cLineOf(dev, p.id));
  for (std::size_t k = 0; k < g.pieces.size(); ++k) {
    if (g.pieces[k].band) continue;
    const int flat = g.pieces[k].id;
    Vec2 a = ijOf(g.start[k]), b = ijOf(g.end[k]);
    auto range = [](double x, double y) {
      return std::pair<std::int32_t, std::int32_t>{static_cast<std::int32_t>(std::ceil(std::min(x, y) - 1e-9)),
                                                  static_cast<std::int32_t>(std::floor(std::max(x, y) + 1e-9))};
    };
    auto [j0, j1] = range(a.y(), b.y());
    for (std::int32_t c = j0; c <= j1; ++c)
      for (int band : bandsOnLine(dev, {flat, La, c})) add(cLineOf(dev, band));
    auto [i0, i1] = range(a.x(), b.x());
    for (std::int32_t c = i0; c <= i1; ++c)
      for (int band : bandsOnLine(dev, {flat, Lb, c})) add(cLineOf(dev, band));
    auto [d0, d1] = range(a.x() - a.y(), b.x() - b.y());
    for (std::int32_t c = d0; c <= d1; ++c) add({flat, Lc, c});
  }
  return out;
}

std::vector<int> gluedChromosomes(Development& dev, const Geodesic& g, bool endpoints) {
  std::set<int> q;
  for (const LatticeLine& line : candidateCLines(dev, g)) {
    std::vector<int> bands = bandsOnLine(dev, line);
    std::vector<std::vector<std::pair<double, double>>> contact;
    for (int b : bands) contact.push_back(bandContact(dev, g, b));
    for (std::size_t x = 0; x < bands.size(); ++x)
      for (std::size_t y = x + 1; y < bands.size(); ++y) {
        auto both = contact[x];
        both.insert(both.end(), contact[y].begin(), contact[y].end());
        if (twoPoints(both, g.length, endpoints)) {
          q.insert(bands[x]);
          q.insert(bands[y]);
        }
      }
  }
  return {q.begin(), q.end()};
}

// Simplicial convex hull of a segment of a flat: the intersection of the
// lattice half-planes containing it.
std::vector<LatticeHalfPlane> simplicialHull(const Vec2& a, const Vec2& b) {
  auto lo = [](double x, double y) { return static_cast<std::int64_t>(std::floor(std::min(x, y) + 1e-9)); };
  auto hi = [](double x, double y) { return static_cast<std::int64_t>(std::ceil(std::max(x, y) - 1e-9)); };
  return {{1, 0, hi(a.x(), b.x())},  {-1, 0, -lo(a.x(), b.x())},
          {0, 1, hi(a.y(), b.y())},  {0, -1, -lo(a.y(), b.y())},
          {1, -1, hi(a.x() - a.y(), b.x() - b.y())}, {-1, 1, -lo(a.x() - a.y(), b.x() - b.y())}};
}

Vec2 intersection(const LatticeLine& l1, const LatticeLine& l2) {
  // Solve the two functionals; both lines are lattice lines of distinct directions.
  auto [a1, b1] = functional(l1.dir);
  auto [a2, b2] = functional(l2.dir);
  double det = a1 * b2 - a2 * b1;
  double i = (l1.c * b2 - l2.c * b1) / det;
  double j = (a1 * l2.c - a2 * l1.c) / det;
  return Vec2(i, j);
}

// The sector at x between the rays x + s*e1 (on l1) and x + t*e2 (on l2).
std::vector<LatticeHalfPlane> sector(const LatticeLine& l1, const Vec2& e1, const LatticeLine& l2, const Vec2& e2) {
  // Points of the sector lie on the side of l2 where e1 points, and vice versa.
  auto [a1, b1] = functional(l1.dir);
  auto [a2, b2] = functional(l2.dir);
  int s1 = (a2 * e1.x() + b2 * e1.y()) > 0 ? 1 : -1;
  int s2 = (a1 * e2.x() + b1 * e2.y()) > 0 ? 1 : -1;
  return {sideOf(l2, s1), sideOf(l1, s2)};
}

// Lattice direction of a line, in lattice coordinates.
Vec2 latticeDir(const LatticeLine& l) {
  if (l.dir == La) return Vec2(1, 0);
  if (l.dir == Lb) return Vec2(0, 1);
  return Vec2(1, 1);
}

Vec2 planarOf(const Vec2& ij) { return latticePoint(ij.x(), ij.y()); }

EnvelopePiece regionPiece(PieceTag tag, int flat, std::vector<LatticeHalfPlane> cs) {
  EnvelopePiece p;
  p.tag = tag;
  p.flat = flat;
  p.constraints = std::move(cs);
  return p;
}

EnvelopePiece bandPiece(PieceTag tag, int band) {
  EnvelopePiece p;
  p.tag = tag;
  p.band = band;
  return p;
}

}  // namespace

bool Envelope::hasBand(int band) const {
  for (const EnvelopePiece& p : pieces)
    if (p.band == band) return true;
  return false;
}

std::vector<int> Envelope::bands() const {
  std::vector<int> out;
  for (const EnvelopePiece& p : pieces)
    if (p.isBand()) out.push_back(p.band);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> Envelope::flatsTouched(const Development& dev) const {
  std::vector<int> out;
  for (const EnvelopePiece& p : pieces) {
    if (p.isBand()) {
      BandGeometry g = bandGeometry(dev, p.band);
      out.push_back(g.cFlat);
      out.push_back(g.otherFlat);
    } else if (p.tag == PieceTag::Point) {
      if (p.point.band < 0) out.push_back(p.point.flat);
    } else {
      out.push_back(p.flat);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool Envelope::inSurface(const Development& dev, const XPoint& p0, double tol) const {
  const XPoint p = canonical(dev, p0);
  if (p.band >= 0) {
    for (const EnvelopePiece& e : pieces) {
      if (e.band == p.band) return true;
      if (e.tag == PieceTag::Point && e.point.band == p.band && (e.point.pos - p.pos).norm() <= tol) return true;
    }
    return false;
  }
  const Vec2 ij = ijOf(p.pos);
  for (const EnvelopePiece& e : pieces) {
    if (e.isBand()) {
      BandGeometry g = bandGeometry(dev, e.band);
      if ((g.cFlat == p.flat || g.otherFlat == p.flat) && onLine(lineIn(dev, e.band, p.flat), ij, tol)) return true;
    } else if (e.tag == PieceTag::Point) {
      if (e.point.band < 0 && e.point.flat == p.flat && (e.point.pos - p.pos).norm() <= tol) return true;
    } else if (e.flat == p.flat && satisfies(e.constraints, ij, tol)) {
      return true;
    }
  }
  return false;
}

bool Envelope::containsPoint(const Development& dev, const XPoint& p, double tol) const {
  if (!inSurface(dev, p, tol)) return false;
  if (!reduced()) return true;
  return catDistance(dev, center, p) <= radius + tol;
}

Envelope analytic_envelope(Development& dev, const Geodesic& g, const EnvelopeOptions& opts) {
  Envelope h;
  h.kind = EnvelopeKind::Analytic;
  h.source = g;
  if (g.degenerate()) {
    EnvelopePiece p;
    p.tag = PieceTag::Point;
    p.point = g.from;
    h.pieces.push_back(p);
    return h;
  }
  std::vector<int> met = g.bandsMet();
  std::vector<int> glued = gluedChromosomes(dev, g, opts.endpointContacts);
  if (met.empty()) {
    if (!g.singular()) {
      h.pieces.push_back(regionPiece(PieceTag::FlatRegion, g.pieces[0].id, simplicialHull(ijOf(g.start[0]), ijOf(g.end[0]))));
    }
    for (int b : glued) h.pieces.push_back(bandPiece(PieceTag::GluedChromosome, b));
    return h;
  }
  for (int b : met) h.pieces.push_back(bandPiece(PieceTag::Band, b));
  // Pairs of successive bands and the flat between them.
  for (std::size_t k = 1; k + 1 < g.pieces.size(); ++k) {
    if (g.pieces[k].band || !g.pieces[k - 1].band || !g.pieces[k + 1].band) continue;
    const int flat = g.pieces[k].id;
    LatticeLine l1 = lineIn(dev, g.pieces[k - 1].id, flat), l2 = lineIn(dev, g.pieces[k + 1].id, flat);
    if (l1.dir == l2.dir) {
      if (l1.c == l2.c) continue;  // shared boundary line: nothing to add
      const LatticeLine& lo = l1.c < l2.c ? l1 : l2;
      const LatticeLine& hi = l1.c < l2.c ? l2 : l1;
      h.pieces.push_back(regionPiece(PieceTag::FlatRegion, flat, {sideOf(lo, 1), sideOf(hi, -1)}));
      continue;
    }
    // Single common point x: the two opposite acute sectors at x.
    const Vec2 x = intersection(l1, l2);
    Vec2 d1 = latticeDir(l1), d2 = latticeDir(l2);
    if (planarOf(d1).dot(planarOf(d2)) < 0) d2 = -d2;
    h.pieces.push_back(regionPiece(PieceTag::ChromosomeSector, flat, sector(l1, d1, l2, d2)));
    h.pieces.push_back(regionPiece(PieceTag::ChromosomeSector, flat, sector(l1, -d1, l2, -d2)));
    // When the geodesic crosses x through an obtuse sector, that sector is
    // added too so that the envelope still contains the geodesic.
    const Vec2 p = ijOf(g.start[k]) - x, q = ijOf(g.end[k]) - x;
    if (p.norm() > 1e-9 && q.norm() > 1e-9) {
      Vec2 e1 = p.dot(d1) > 0 ? d1 : Vec2(-d1), e2 = q.dot(d2) > 0 ? d2 : Vec2(-d2);
      if (planarOf(e1).dot(planarOf(e2)) < 0)
        h.pieces.push_back(regionPiece(PieceTag::ChromosomeSector, flat, sector(l1, e1, l2, e2)));
    }
  }
  // Endpoint half-planes bordering the first and the last band.
  if (!g.pieces.front().band) {
    const int flat = g.pieces.front().id;
    LatticeLine l = lineIn(dev, met.front(), flat);
    Vec2 ij = ijOf(g.start.front());
    double v = lineValue(l, ij.x(), ij.y());
    if (std::abs(v) > 1e-9) h.pieces.push_back(regionPiece(PieceTag::HalfPlane, flat, {sideOf(l, v > 0 ? 1 : -1)}));
  }
  if (!g.pieces.back().band) {
    const int flat = g.pieces.back().id;
    LatticeLine l = lineIn(dev, met.back(), flat);
    Vec2 ij = ijOf(g.end.back());
    double v = lineValue(l, ij.x(), ij.y());
    if (std::abs(v) > 1e-9) h.pieces.push_back(regionPiece(PieceTag::HalfPlane, flat, {sideOf(l, v > 0 ? 1 : -1)}));
  }
  for (int b : glued)
    if (!h.hasBand(b)) h.pieces.push_back(bandPiece(PieceTag::GluedChromosome, b));
  return h;
}

int glued_reading_divergence(Development& dev, const Geodesic& g) {
  if (g.degenerate()) return 0;
  std::vector<int> a = gluedChromosomes(dev, g, false), b = gluedChromosomes(dev, g, true);
  std::vector<int> diff;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
  return static_cast<int>(diff.size());
}

Envelope reduce_envelope(const Envelope& h) {
  Envelope r = h;
  r.kind = h.kind == EnvelopeKind::Saturated || h.kind == EnvelopeKind::SaturatedReduced ? EnvelopeKind::SaturatedReduced
                                                                                         : EnvelopeKind::Reduced;
  r.center = h.source.degenerate() ? h.source.from : h.source.midpoint();
  r.radius = 2 * h.source.length;
  return r;
}

Envelope saturate_envelope(const Development& dev, const Envelope& h) {
  Envelope s = h;
  s.kind = h.reduced() ? EnvelopeKind::SaturatedReduced : EnvelopeKind::Saturated;
  for (int f : h.flatsTouched(dev)) s.pieces.push_back(regionPiece(PieceTag::Flat, f, {}));
  return s;
}

namespace {

// Pieces of an envelope inside one flat: regions (possibly the whole flat)
// and band sides.
struct FlatSets {
  std::vector<const std::vector<LatticeHalfPlane>*> regions;
  std::vector<LatticeLine> lines;
  std::vector<Vec2> points;  // lattice coordinates

  bool contains(const Vec2& ij, double tol = 1e-9) const {
    for (auto* r : regions)
      if (satisfies(*r, ij, tol)) return true;
    for (const LatticeLine& l : lines)
      if (onLine(l, ij, tol)) return true;
    for (const Vec2& p : points)
      if ((p - ij).norm() <= tol) return true;
    return false;
  }
};

FlatSets flatSets(const Development& dev, const Envelope& h, int flat) {
  FlatSets s;
  for (const EnvelopePiece& e : h.pieces) {
    if (e.isBand()) {
      BandGeometry g = bandGeometry(dev, e.band);
      if (g.cFlat == flat || g.otherFlat == flat) s.lines.push_back(lineIn(dev, e.band, flat));
    } else if (e.tag == PieceTag::Point) {
      if (e.point.band < 0 && e.point.flat == flat) s.points.push_back(ijOf(e.point.pos));
    } else if (e.flat == flat) {
      s.regions.push_back(&e.constraints);
    }
  }
  return s;
}

// Golden-section minimization of a convex function on [lo, hi].
template <class F>
std::pair<double, double> goldenMin(F&& f, double lo, double hi, int iterations = 60) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iterations && b - a > 1e-10; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

// Convex minimization on an unbounded line: bracket by doubling, then golden.
template <class F>
std::pair<double, double> lineMin(F&& f, double t0) {
  double step = 1;
  double f0 = f(t0);
  double lo = t0 - step, hi = t0 + step;
  while (f(hi) < f0 && step < 1e6) {
    step *= 2;
    hi = t0 + step;
  }
  step = 1;
  while (f(lo) < f0 && step < 1e6) {
    step *= 2;
    lo = t0 - step;
  }
  return goldenMin(f, lo, hi, 80);
}

}  // namespace

// The point of a flat closest to a source point, found on the gluing line
// through which every path from the source enters the flat.
std::pair<Vec2, double> nearestInFlat(const Development& dev, DistanceField& df, int flat) {
  const XPoint& src = df.source();
  if (src.band < 0 && src.flat == flat) return {src.pos, 0.0};
  std::vector<int> path = dev.flatPath(src.band >= 0 ? src.band : src.flat, flat);
  int band;
  if (src.band >= 0 && path.size() == 1) {
    band = src.band;
  } else if (src.band >= 0 && path.size() == 2 && path[1] == dev.flat(src.band).parent) {
    band = src.band;
  } else {
    const int prev = path[path.size() - 2];
    band = dev.flat(flat).parent == prev ? flat : prev;
  }
  LatticeLine line = lineIn(dev, band, flat);
  const Vec2 o = lineOrigin(line), d = lineDirection(line);
  auto f = [&](double t) { return df.toFlat(flat, o + t * d); };
  const Vec2 ref = src.band < 0 ? src.pos : Vec2::Zero();
  auto [t, v] = lineMin(f, (ref - o).dot(d));
  return {o + t * d, v};
}

bool for_each_envelope_vertex(Development& dev, const Envelope& h, const std::function<bool(VertexId)>& visit) {
  if (!h.reduced()) throw std::invalid_argument("vertex enumeration needs a reduced envelope");
  DistanceField df(dev, h.center);
  const double R = h.radius + 1e-9;
  const double By = latticeB().y(), Bx = latticeB().x();
  for (int flat : h.flatsTouched(dev)) {
    FlatSets sets = flatSets(dev, h, flat);
    auto [p0, d0] = nearestInFlat(dev, df, flat);
    if (d0 > R) continue;
    const double rho = R + d0 + 1e-6;
    const std::int64_t jlo = static_cast<std::int64_t>(std::floor((p0.y() - rho) / By));
    const std::int64_t jhi = static_cast<std::int64_t>(std::ceil((p0.y() + rho) / By));
    for (std::int64_t j = jlo; j <= jhi; ++j) {
      double y = j * By - p0.y();
      if (y * y > rho * rho) continue;
      double half = std::sqrt(rho * rho - y * y);
      double cx = p0.x() - j * Bx;
      for (auto i = static_cast<std::int64_t>(std::ceil(cx - half)); i <= cx + half; ++i) {
        if (!sets.contains(Vec2(static_cast<double>(i), static_cast<double>(j)))) continue;
        if (df.toFlat(flat, latticePoint(i, j)) > R) continue;
        if (!visit(dev.vertexAt(flat, static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)))) return false;
      }
    }
  }
  return true;
}

std::vector<VertexId> envelope_vertices(Development& dev, const Envelope& h) {
  std::vector<VertexId> out;
  for_each_envelope_vertex(dev, h, [&](VertexId v) {
    out.push_back(v);
    return true;
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace wise
