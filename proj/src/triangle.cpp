#include "wise/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace wise {

std::pair<Vec2, double> nearestInFlat(const Development& dev, DistanceField& df, int flat);

const char* str(ReductionOutcome::Kind k) {
  switch (k) {
    case ReductionOutcome::Kind::TripleIntersection: return "triple-intersection";
    case ReductionOutcome::Kind::ResidualTriangle: return "residual-triangle";
    case ReductionOutcome::Kind::Violation: return "violation";
  }
  return "?";
}

std::vector<std::array<std::int64_t, 2>> FlatTriangle::corners() const {
  if (upper) return {{{i, j}}, {{i, j + n}}, {{i + n, j + n}}};
  return {{{i, j}}, {{i + n, j}}, {{i + n, j + n}}};
}

double TriangleEnvelopes::shortest() const {
  return std::min({side[0].length, side[1].length, side[2].length});
}

TriangleEnvelopes triangle_envelopes(Development& dev, const Triangle& t, const TriangleOptions& opts) {
  TriangleEnvelopes te;
  te.t = t;
  const VertexId ends[3][2] = {{t.A, t.B}, {t.B, t.C}, {t.A, t.C}};
  for (int k = 0; k < 3; ++k) {
    te.side[k] = geodesic(dev, ends[k][0], ends[k][1]);
    Envelope h = analytic_envelope(dev, te.side[k], opts.envelope);
    te.reduced[k] = reduce_envelope(h);
    te.saturatedReduced[k] = reduce_envelope(saturate_envelope(dev, h));
  }
  return te;
}

bool PatchMargin::inside(VertexId v) {
  auto it = cache_.find(v);
  if (it != cache_.end()) return it->second;
  bool ok = dev_.lengthUpperBound(v) <= radius_ ||
            ball_.lengthOf(NormalForm(dev_.wordOf(v)), radius_).has_value();
  cache_[v] = ok;
  return ok;
}

void PatchMargin::require(const Envelope& h) {
  if (!for_each_envelope_vertex(dev_, h, [&](VertexId v) { return inside(v); }))
    throw InsufficientPatch("envelope vertex outside the patch ball");
}

void PatchMargin::require(const TriangleEnvelopes& te, bool saturated) {
  // The reduced envelopes lie in the saturated ones and are cheaper to rule out.
  for (int k = 0; k < 3; ++k) require(te.reduced[k]);
  if (saturated)
    for (int k = 0; k < 3; ++k) require(te.saturatedReduced[k]);
}

namespace {

struct Member {
  const Development& dev;
  const Envelope& env;
  DistanceField df;

  Member(const Development& d, const Envelope& e) : dev(d), env(e), df(d, e.center) {}
  double excess(const XPoint& p) { return df.to(p) - env.radius; }
  bool contains(const XPoint& p) { return env.inSurface(dev, p) && excess(p) <= 1e-9; }
};

template <class F>
std::pair<double, double> golden(F&& f, double lo, double hi, int iterations) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  if (hi - lo < 1e-12) return {lo, f(lo)};
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iterations && b - a > 1e-10; ++it) {
    if (f1 <= f2) {
      b = x2, x2 = x1, f2 = f1, x1 = b - r * (b - a), f1 = f(x1);
    } else {
      a = x1, x1 = x2, f1 = f2, x2 = a + r * (b - a), f2 = f(x2);
    }
  }
  std::pair<double, double> best = f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
  for (double e : {lo, hi}) {
    double v = f(e);
    if (v < best.second) best = {e, v};
  }
  return best;
}

// Interval of t with base + t*dir satisfying all constraints.
bool clipInterval(const std::vector<LatticeHalfPlane>& cs, const Vec2& base, const Vec2& dir, double& lo, double& hi) {
  for (const LatticeHalfPlane& h : cs) {
    double a = h.a * dir.x() + h.b * dir.y();
    double rest = h.c - (h.a * base.x() + h.b * base.y());
    if (std::abs(a) < 1e-12) {
      if (rest < -1e-9) return false;
    } else if (a > 0) {
      hi = std::min(hi, rest / a);
    } else {
      lo = std::max(lo, rest / a);
    }
  }
  return lo <= hi + 1e-12;
}

struct Cell {
  std::vector<LatticeHalfPlane> cs;
  std::vector<LatticeLine> lines;
  std::vector<Vec2> points;
};

Vec2 lineBase(const LatticeLine& l) {
  if (l.dir == La) return Vec2(0, l.c);
  return Vec2(l.c, 0);
}

Vec2 lineDirIJ(const LatticeLine& l) {
  if (l.dir == La) return Vec2(1, 0);
  if (l.dir == Lb) return Vec2(0, 1);
  return Vec2(1, 1);
}

class CommonPointSearch {
 public:
  CommonPointSearch(const Development& dev, const Envelope* env[3]) : dev_(dev) {
    for (int k = 0; k < 3; ++k) members_.push_back(std::make_unique<Member>(dev, *env[k]));
  }

  bool containsAll(const XPoint& p) {
    for (auto& m : members_)
      if (!m->contains(p)) return false;
    return true;
  }

  double excess(const XPoint& p) {
    double e = -1e300;
    for (auto& m : members_) e = std::max(e, m->excess(p));
    return e;
  }

  std::optional<XPoint> onSides(const Geodesic* sides[3], int samples) {
    for (int k = 0; k < 3; ++k) {
      const Geodesic& g = *sides[k];
      std::vector<double> at;
      for (int s = 0; s <= samples; ++s) at.push_back(g.length * s / samples);
      double cum = 0;
      for (double seg : g.segment) at.push_back(cum += seg);
      for (double s : at) {
        XPoint p = g.pointAt(s);
        if (containsAll(p)) return p;
      }
    }
    return std::nullopt;
  }

  std::optional<XPoint> atVertices(Development& dev) {
    for (auto& m : members_) {
      for (VertexId v : envelope_vertices(dev, m->env)) {
        XPoint p = vertexPoint(dev, v);
        if (containsAll(p)) return p;
      }
    }
    return std::nullopt;
  }

  std::optional<XPoint> inBands() {
    std::vector<int> common = members_[0]->env.bands();
    for (int k = 1; k < 3; ++k) {
      std::vector<int> b = members_[k]->env.bands(), keep;
      std::set_intersection(common.begin(), common.end(), b.begin(), b.end(), std::back_inserter(keep));
      common = keep;
    }
    for (int band : common) {
      // Minimize the excess over the strip; the band chart is Euclidean.
      auto inner = [&](double p) {
        return golden([&](double w) { return excess(XPoint::inBand(band, w, p)); }, 0.0, 1.0, 40).second;
      };
      double p0 = 0;
      const XPoint& c = members_[0]->env.center;
      if (c.band == band) p0 = c.pos.y();
      else {
        BandGeometry g = bandGeometry(dev_, band);
        if (c.band < 0 && (c.flat == g.cFlat || c.flat == g.otherFlat))
          p0 = bandSideParam(dev_, band, c.flat == g.cFlat, c.pos);
      }
      const double span = members_[0]->env.radius + 4;
      auto [p, v] = golden(inner, p0 - span, p0 + span, 50);
      if (v <= 1e-9) {
        auto [w, vw] = golden([&](double w) { return excess(XPoint::inBand(band, w, p)); }, 0.0, 1.0, 40);
        XPoint x = XPoint::inBand(band, w, p);
        if (containsAll(x)) return x;
      }
    }
    return std::nullopt;
  }

  std::optional<XPoint> inFlats(Development& dev) {
    std::vector<int> common = members_[0]->env.flatsTouched(dev);
    for (int k = 1; k < 3; ++k) {
      std::vector<int> f = members_[k]->env.flatsTouched(dev), keep;
      std::set_intersection(common.begin(), common.end(), f.begin(), f.end(), std::back_inserter(keep));
      common = keep;
    }
    for (int flat : common) {
      auto [p0, d0] = nearestInFlat(dev, members_[0]->df, flat);
      if (d0 > members_[0]->env.radius + 1e-9) continue;
      const Vec2 c = latticeCoords(p0);
      const double box = 2.1 * (members_[0]->env.radius + d0) + 2;
      std::vector<LatticeHalfPlane> boxCs = {
          {1, 0, static_cast<std::int64_t>(std::ceil(c.x() + box))},
          {-1, 0, -static_cast<std::int64_t>(std::floor(c.x() - box))},
          {0, 1, static_cast<std::int64_t>(std::ceil(c.y() + box))},
          {0, -1, -static_cast<std::int64_t>(std::floor(c.y() - box))}};
      std::vector<std::vector<Cell>> options(3);
      for (int k = 0; k < 3; ++k) options[k] = cellsOf(dev, members_[k]->env, flat);
      for (const Cell& x : options[0])
        for (const Cell& y : options[1])
          for (const Cell& z : options[2]) {
            Cell cell{boxCs, {}, {}};
            for (const Cell* part : {&x, &y, &z}) {
              cell.cs.insert(cell.cs.end(), part->cs.begin(), part->cs.end());
              cell.lines.insert(cell.lines.end(), part->lines.begin(), part->lines.end());
              cell.points.insert(cell.points.end(), part->points.begin(), part->points.end());
            }
            if (auto p = minimizeCell(flat, cell)) return p;
          }
    }
    return std::nullopt;
  }

 private:
  static std::vector<Cell> cellsOf(const Development& dev, const Envelope& env, int flat) {
    std::vector<Cell> out;
    for (const EnvelopePiece& e : env.pieces) {
      if (e.isBand()) {
        BandGeometry g = bandGeometry(dev, e.band);
        if (g.cFlat == flat || g.otherFlat == flat) out.push_back({{}, {lineIn(dev, e.band, flat)}, {}});
      } else if (e.tag == PieceTag::Point) {
        if (e.point.band < 0 && e.point.flat == flat) out.push_back({{}, {}, {latticeCoords(e.point.pos)}});
      } else if (e.flat == flat) {
        out.push_back({e.constraints, {}, {}});
      }
    }
    return out;
  }

  XPoint at(int flat, const Vec2& ij) { return XPoint::inFlat(flat, latticePoint(ij.x(), ij.y())); }

  std::optional<XPoint> accept(int flat, const Vec2& ij, const Cell& cell) {
    for (const LatticeHalfPlane& h : cell.cs)
      if (!h.holds(ij.x(), ij.y())) return std::nullopt;
    for (const LatticeLine& l : cell.lines)
      if (std::abs(lineValue(l, ij.x(), ij.y())) > 1e-9) return std::nullopt;
    XPoint p = at(flat, ij);
    if (containsAll(p)) return p;
    return std::nullopt;
  }

  std::optional<XPoint> minimizeCell(int flat, const Cell& cell) {
    if (!cell.points.empty()) return accept(flat, cell.points.front(), cell);
    if (!cell.lines.empty()) {
      const LatticeLine& l = cell.lines.front();
      for (std::size_t k = 1; k < cell.lines.size(); ++k) {
        const LatticeLine& m = cell.lines[k];
        if (m.dir == l.dir) {
          if (m.c != l.c) return std::nullopt;
          continue;
        }
        // Two crossing lines: a single candidate point.
        Vec2 base = lineBase(l), dir = lineDirIJ(l);
        double va = lineValue(m, base.x(), base.y());
        double vb = lineValue(m, base.x() + dir.x(), base.y() + dir.y());
        return accept(flat, base + dir * (va / (va - vb)), cell);
      }
      Vec2 base = lineBase(l), dir = lineDirIJ(l);
      double lo = -1e18, hi = 1e18;
      if (!clipInterval(cell.cs, base, dir, lo, hi)) return std::nullopt;
      auto [t, v] = golden([&](double t) { return excess(at(flat, base + t * dir)); }, lo, hi, 80);
      if (v > 1e-9) return std::nullopt;
      return accept(flat, base + t * dir, cell);
    }
    // Polygon: nested minimization over rows j and positions i.
    double jlo = -1e18, jhi = 1e18;
    for (const LatticeHalfPlane& h : cell.cs) {
      if (h.a != 0 || h.b == 0) continue;
      if (h.b > 0) jhi = std::min(jhi, static_cast<double>(h.c) / h.b);
      else jlo = std::max(jlo, static_cast<double>(h.c) / h.b);
    }
    if (jlo > jhi) return std::nullopt;
    auto rowRange = [&](double j, double& lo, double& hi) {
      lo = -1e18, hi = 1e18;
      return clipInterval(cell.cs, Vec2(0, j), Vec2(1, 0), lo, hi);
    };
    auto rowMin = [&](double j) -> std::pair<double, double> {
      double lo, hi;
      if (!rowRange(j, lo, hi)) return {0, 1e300};
      return golden([&](double i) { return excess(at(flat, Vec2(i, j))); }, lo, hi, 40);
    };
    // Rows where the polygon is nonempty form an interval; shrink to it.
    auto feasible = [&](double j) {
      double lo, hi;
      return rowRange(j, lo, hi);
    };
    double a = jlo, b = jhi;
    {
      double mid = (a + b) / 2;
      if (!feasible(mid)) {
        // Scan for a feasible row.
        bool found = false;
        for (int s = 1; s < 64 && !found; ++s) {
          double t = a + (b - a) * s / 64.0;
          if (feasible(t)) {
            mid = t;
            found = true;
          }
        }
        if (!found) return std::nullopt;
      }
      double l = a, r = mid;
      for (int it = 0; it < 60; ++it) {
        double m = (l + r) / 2;
        (feasible(m) ? r : l) = m;
      }
      double lo2 = r;
      l = mid, r = b;
      for (int it = 0; it < 60; ++it) {
        double m = (l + r) / 2;
        (feasible(m) ? l : r) = m;
      }
      a = lo2, b = l;
    }
    auto [j, v] = golden([&](double j) { return rowMin(j).second; }, a, b, 40);
    if (v > 1e-9) return std::nullopt;
    auto [i, vi] = rowMin(j);
    return accept(flat, Vec2(i, j), cell);
  }

  const Development& dev_;
  std::vector<std::unique_ptr<Member>> members_;
};

// Whether a lattice point is strictly inside the triangle with corners a, b, c.
bool strictlyInside(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
  double d1 = cross(b - a, p - a), d2 = cross(c - b, p - b), d3 = cross(a - c, p - c);
  const double tol = 1e-9;
  return (d1 > tol && d2 > tol && d3 > tol) || (d1 < -tol && d2 < -tol && d3 < -tol);
}

bool insideK(const FlatTriangle& k, const Vec2& p) {
  auto cs = k.corners();
  return strictlyInside(p, Vec2(cs[0][0], cs[0][1]), Vec2(cs[1][0], cs[1][1]), Vec2(cs[2][0], cs[2][1]));
}

}  // namespace

std::optional<XPoint> common_point(Development& dev, const Envelope* env[3], const Geodesic* sides[3], int sideSamples) {
  CommonPointSearch search(dev, env);
  if (auto p = search.onSides(sides, sideSamples)) return p;
  if (auto p = search.atVertices(dev)) return p;
  if (auto p = search.inBands()) return p;
  return search.inFlats(dev);
}

namespace {

// Residual D0 of a triangle lying in one flat, tested on a grid of points
// that avoid every lattice line.
ReductionOutcome residualTriangle(Development& dev, const TriangleEnvelopes& te) {
  ReductionOutcome out;
  const int flat = te.side[0].pieces[0].id;
  const Vec2 a = latticeCoords(vertexPoint(dev, te.t.A).pos), b = latticeCoords(vertexPoint(dev, te.t.B).pos),
             c = latticeCoords(vertexPoint(dev, te.t.C).pos);
  auto inH = [&](int k, const Vec2& ij) {
    const Envelope& e = te.reduced[k];
    if (!e.inSurface(dev, XPoint::inFlat(flat, latticePoint(ij.x(), ij.y())))) return false;
    const XPoint cc = canonical(dev, e.center);
    return (latticePoint(ij.x(), ij.y()) - cc.pos).norm() <= e.radius + 1e-9;
  };
  const int den = 7;
  const double imin = std::floor(std::min({a.x(), b.x(), c.x()})), imax = std::ceil(std::max({a.x(), b.x(), c.x()}));
  const double jmin = std::floor(std::min({a.y(), b.y(), c.y()})), jmax = std::ceil(std::max({a.y(), b.y(), c.y()}));
  std::vector<std::pair<Vec2, bool>> samples;  // point of D, whether in D0
  double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {-1e300, -1e300, -1e300};
  for (double i = imin; i < imax; ++i)
    for (double j = jmin; j < jmax; ++j)
      for (int p = 1; p < den; ++p)
        for (int q = 1; q < den; ++q) {
          if (p == q) continue;
          Vec2 x(i + static_cast<double>(p) / den, j + static_cast<double>(q) / den);
          if (!strictlyInside(x, a, b, c)) continue;
          bool inD0 = !inH(0, x) && !inH(1, x) && !inH(2, x);
          samples.push_back({x, inD0});
          if (!inD0) continue;
          double v[3] = {x.x(), x.y(), x.x() - x.y()};
          for (int t = 0; t < 3; ++t) lo[t] = std::min(lo[t], v[t]), hi[t] = std::max(hi[t], v[t]);
        }
  if (lo[0] > hi[0]) {
    out.kind = ReductionOutcome::Kind::Violation;
    out.detail = "residual set is empty and no common point was found";
    return out;
  }
  // Lower orientation: j >= j0, i <= i1, i - j >= d0. Upper: i >= i0, j <= j1, i - j <= d1.
  std::vector<FlatTriangle> candidates;
  {
    auto j0 = static_cast<std::int64_t>(std::floor(lo[1])), i1 = static_cast<std::int64_t>(std::ceil(hi[0]));
    auto d0 = static_cast<std::int64_t>(std::floor(lo[2]));
    candidates.push_back({flat, d0 + j0, j0, i1 - d0 - j0, false});
    auto i0 = static_cast<std::int64_t>(std::floor(lo[0])), j1 = static_cast<std::int64_t>(std::ceil(hi[1]));
    auto d1 = static_cast<std::int64_t>(std::ceil(hi[2]));
    candidates.push_back({flat, i0, i0 - d1, j1 - i0 + d1, true});
  }
  auto inClosedD = [&](const Vec2& p) {
    auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
    double d1 = cross(b - a, p - a), d2 = cross(c - b, p - b), d3 = cross(a - c, p - c);
    return (d1 >= -1e-9 && d2 >= -1e-9 && d3 >= -1e-9) || (d1 <= 1e-9 && d2 <= 1e-9 && d3 <= 1e-9);
  };
  for (const FlatTriangle& k : candidates) {
    if (k.n <= 0) continue;
    bool inside = true;
    for (auto [ci, cj] : k.corners()) inside = inside && inClosedD(Vec2(ci, cj));
    if (!inside) continue;
    bool match = true;
    for (auto& [x, inD0] : samples)
      if (inD0 != insideK(k, x)) {
        match = false;
        break;
      }
    if (match) {
      out.kind = ReductionOutcome::Kind::ResidualTriangle;
      out.residual = k;
      return out;
    }
  }
  out.kind = ReductionOutcome::Kind::Violation;
  out.detail = "residual set is not a simplicial isosceles triangle";
  return out;
}

}  // namespace

ReductionOutcome triangle_reduce(Development& dev, const TriangleEnvelopes& te, const TriangleOptions& opts) {
  ReductionOutcome out;
  const Envelope* env[3] = {&te.reduced[0], &te.reduced[1], &te.reduced[2]};
  const Geodesic* sides[3] = {&te.side[0], &te.side[1], &te.side[2]};
  if (auto p = common_point(dev, env, sides, opts.sideSamples)) {
    out.kind = ReductionOutcome::Kind::TripleIntersection;
    out.witness = *p;
    return out;
  }
  bool flatCase = true;
  for (const Geodesic& g : te.side)
    flatCase = flatCase && g.bandsMet().empty() && g.pieces.size() == 1 && !g.pieces[0].band &&
               g.pieces[0].id == te.side[0].pieces[0].id;
  if (flatCase) return residualTriangle(dev, te);
  out.kind = ReductionOutcome::Kind::Violation;
  out.detail = "sides meet bands but no common point was found";
  return out;
}

ReductionOutcome triangle_reduce(Development& dev, const Triangle& t, const TriangleOptions& opts) {
  return triangle_reduce(dev, triangle_envelopes(dev, t, opts), opts);
}

XPoint triangle_reduce_saturated(Development& dev, const TriangleEnvelopes& te, const TriangleOptions& opts) {
  const Envelope* env[3] = {&te.saturatedReduced[0], &te.saturatedReduced[1], &te.saturatedReduced[2]};
  const Geodesic* sides[3] = {&te.side[0], &te.side[1], &te.side[2]};
  if (auto p = common_point(dev, env, sides, opts.sideSamples)) return *p;
  throw LemmaError("saturated reduced envelopes have no common point");
}

bool check_frizes(Development& dev, const Triangle& t) {
  const VertexId ends[3][2] = {{t.A, t.B}, {t.B, t.C}, {t.A, t.C}};
  std::vector<int> met[3];
  for (int k = 0; k < 3; ++k) {
    met[k] = geodesic(dev, ends[k][0], ends[k][1]).bandsMet();
    std::sort(met[k].begin(), met[k].end());
  }
  for (int k = 0; k < 3; ++k)
    for (int b : met[k]) {
      bool other = false;
      for (int m = 0; m < 3; ++m)
        if (m != k && std::binary_search(met[m].begin(), met[m].end(), b)) other = true;
      if (!other) return false;
    }
  return true;
}

bool check_midpoint_balls(Development& dev, const Triangle& t, int samples) {
  const VertexId ends[3][2] = {{t.A, t.B}, {t.B, t.C}, {t.A, t.C}};
  Geodesic g[3];
  for (int k = 0; k < 3; ++k) g[k] = geodesic(dev, ends[k][0], ends[k][1]);
  int s = 0;
  for (int k = 1; k < 3; ++k)
    if (g[k].length < g[s].length) s = k;
  for (int k = 0; k < 3; ++k) {
    DistanceField df(dev, g[k].midpoint());
    const double R = 2 * g[k].length + 1e-9;
    for (int q = 0; q <= samples; ++q)
      if (df.to(g[s].pointAt(g[s].length * q / samples)) > R) return false;
  }
  return true;
}

}  // namespace wise
