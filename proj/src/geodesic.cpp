#include "wise/geodesic.hpp"

#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

namespace wise {

namespace {

const double kSqrt15 = std::sqrt(15.0);

struct LineMap {
  Vec2 o, d;  // chart point o + t*d
};

// A gluing line between consecutive pieces, as seen from each side.
struct Gluing {
  LineMap before, after;
};

struct Chain {
  std::vector<GeodesicPiece> pieces;
  std::vector<Gluing> lines;  // lines[k] joins pieces[k] and pieces[k+1]
  std::int64_t key = 0;
};

int bandParent(const Development& dev, int band) { return dev.flat(band).parent; }

int bandBetween(const Development& dev, int f, int g) { return dev.flat(g).parent == f ? g : f; }

LineMap flatSide(const Development& dev, int band, int flat) {
  BandGeometry g = bandGeometry(dev, band);
  if (g.cFlat == flat) return {latticePoint(g.ci, g.cj), 2 * latticeC()};
  return {latticePoint(g.oi, g.oj), g.stable == Ls ? latticeA() : latticeB()};
}

LineMap bandSide(const Development& dev, int band, int flat) {
  BandGeometry g = bandGeometry(dev, band);
  return {Vec2(g.cFlat == flat ? 0.0 : 1.0, 0.0), Vec2(0.0, 1.0)};
}

Chain chainBetween(const Development& dev, const XPoint& p, const XPoint& q) {
  Chain c;
  if (p.band >= 0 && p.band == q.band) {
    c.pieces.push_back({true, p.band});
    c.key = -2 - p.band;
    return c;
  }
  int sf = p.band >= 0 ? p.band : p.flat;
  int tf = q.band >= 0 ? q.band : q.flat;
  std::vector<int> path = dev.flatPath(sf, tf);
  if (p.band >= 0 && path.size() >= 2 && path[1] == bandParent(dev, p.band)) path.erase(path.begin());
  if (q.band >= 0 && path.size() >= 2 && path[path.size() - 2] == bandParent(dev, q.band)) path.pop_back();
  if (p.band >= 0) c.pieces.push_back({true, p.band});
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (k > 0) c.pieces.push_back({true, bandBetween(dev, path[k - 1], path[k])});
    c.pieces.push_back({false, path[k]});
  }
  if (q.band >= 0) c.pieces.push_back({true, q.band});
  for (std::size_t k = 0; k + 1 < c.pieces.size(); ++k) {
    const GeodesicPiece &a = c.pieces[k], &b = c.pieces[k + 1];
    if (a.band)
      c.lines.push_back({bandSide(dev, a.id, b.id), flatSide(dev, a.id, b.id)});
    else
      c.lines.push_back({flatSide(dev, b.id, a.id), bandSide(dev, b.id, a.id)});
  }
  c.key = q.band >= 0 ? -2 - q.band : q.flat;
  return c;
}

struct Solution {
  std::vector<double> t;
  std::vector<Vec2> start, end;
  std::vector<double> segment;
  double length = 0;
  int iterations = 0;
};

// Minimizes the total chart length over the crossing parameters.
class ChainSolver {
 public:
  ChainSolver(const Chain& c, const Vec2& p, const Vec2& q) : c_(c), p_(p), q_(q), m_(c.lines.size()) {}

  Solution solve(std::vector<double> t) {
    Solution s;
    if (t.size() != m_) t = initial();
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10}) s.iterations += newton(t, eps);
    s.t = t;
    for (std::size_t k = 0; k <= m_; ++k) {
      Vec2 a = startOf(k, t), b = endOf(k, t);
      s.start.push_back(a);
      s.end.push_back(b);
      s.segment.push_back((b - a).norm());
      s.length += s.segment.back();
    }
    return s;
  }

 private:
  Vec2 startOf(std::size_t k, const std::vector<double>& t) const {
    if (k == 0) return p_;
    const LineMap& l = c_.lines[k - 1].after;
    return l.o + t[k - 1] * l.d;
  }
  Vec2 endOf(std::size_t k, const std::vector<double>& t) const {
    if (k == m_) return q_;
    const LineMap& l = c_.lines[k].before;
    return l.o + t[k] * l.d;
  }

  std::vector<double> initial() const {
    // Greedy: project the current point onto the next gluing line.
    std::vector<double> t(m_);
    Vec2 cur = p_;
    for (std::size_t k = 0; k < m_; ++k) {
      const LineMap& l = c_.lines[k].before;
      t[k] = (cur - l.o).dot(l.d) / l.d.squaredNorm();
      cur = c_.lines[k].after.o + t[k] * c_.lines[k].after.d;
    }
    return t;
  }

  double value(const std::vector<double>& t, double eps) const {
    double f = 0;
    for (std::size_t k = 0; k <= m_; ++k) f += std::sqrt((endOf(k, t) - startOf(k, t)).squaredNorm() + eps * eps);
    return f;
  }

  int newton(std::vector<double>& t, double eps) {
    int it = 0;
    std::vector<double> g(m_), diag(m_), off(m_ > 0 ? m_ - 1 : 0), step(m_), trial(m_);
    for (; it < 200 && m_ > 0; ++it) {
      std::fill(g.begin(), g.end(), 0.0);
      std::fill(diag.begin(), diag.end(), 0.0);
      std::fill(off.begin(), off.end(), 0.0);
      for (std::size_t k = 0; k <= m_; ++k) {
        Vec2 D = endOf(k, t) - startOf(k, t);
        double phi = std::sqrt(D.squaredNorm() + eps * eps);
        Eigen::Matrix2d M = (Eigen::Matrix2d::Identity() - D * D.transpose() / (phi * phi)) / phi;
        if (k >= 1) {
          const Vec2& d = c_.lines[k - 1].after.d;
          g[k - 1] -= d.dot(D) / phi;
          diag[k - 1] += d.dot(M * d);
        }
        if (k < m_) {
          const Vec2& d = c_.lines[k].before.d;
          g[k] += d.dot(D) / phi;
          diag[k] += d.dot(M * d);
          if (k >= 1) off[k - 1] -= c_.lines[k - 1].after.d.dot(M * d);
        }
      }
      // Thomas algorithm for the tridiagonal system H step = -g.
      std::vector<double> cp(m_), dp(m_);
      for (std::size_t k = 0; k < m_; ++k) {
        double lower = k > 0 ? off[k - 1] : 0.0;
        double denom = diag[k] - (k > 0 ? lower * cp[k - 1] : 0.0);
        cp[k] = k + 1 < m_ ? off[k] / denom : 0.0;
        dp[k] = (-g[k] - (k > 0 ? lower * dp[k - 1] : 0.0)) / denom;
      }
      for (std::size_t k = m_; k-- > 0;) step[k] = dp[k] - (k + 1 < m_ ? cp[k] * step[k + 1] : 0.0);
      double slope = 0, maxStep = 0;
      for (std::size_t k = 0; k < m_; ++k) {
        slope += g[k] * step[k];
        maxStep = std::max(maxStep, std::abs(step[k]));
      }
      if (maxStep < 1e-13 || -slope < 1e-24) break;
      double f0 = value(t, eps), alpha = 1;
      for (int ls = 0; ls < 60; ++ls, alpha /= 2) {
        for (std::size_t k = 0; k < m_; ++k) trial[k] = t[k] + alpha * step[k];
        if (value(trial, eps) <= f0 + 1e-4 * alpha * slope) break;
      }
      t = trial;
      if (alpha * maxStep < 1e-13) break;
    }
    return it;
  }

  const Chain& c_;
  Vec2 p_, q_;
  std::size_t m_;
};

Vec2 chartOf(const XPoint& p) { return p.pos; }

Geodesic assemble(const Chain& chain, const XPoint& p, const XPoint& q, const Solution& s) {
  Geodesic g;
  g.from = p;
  g.to = q;
  g.pieces = chain.pieces;
  g.cross = s.t;
  g.start = s.start;
  g.end = s.end;
  g.segment = s.segment;
  g.length = s.length;
  g.iterations = s.iterations;
  return g;
}

}  // namespace

Vec2 latticeA() { return Vec2(1.0, 0.0); }
Vec2 latticeB() { return Vec2(-7.0 / 8.0, kSqrt15 / 8.0); }
Vec2 latticeC() { return latticeA() + latticeB(); }
Vec2 latticePoint(double i, double j) { return i * latticeA() + j * latticeB(); }

Vec2 latticeCoords(const Vec2& p) {
  // Solve i*A + j*B = p; A = (1, 0).
  const Vec2 B = latticeB();
  double j = p.y() / B.y();
  return Vec2(p.x() - j * B.x(), j);
}

XPoint vertexPoint(const Development& dev, VertexId v) {
  return XPoint::inFlat(dev.flatOf(v), latticePoint(dev.coordI(v), dev.coordJ(v)));
}

Vec2 bandSidePoint(const Development& dev, int band, bool cSide, double t) {
  BandGeometry g = bandGeometry(dev, band);
  LineMap l = flatSide(dev, band, cSide ? g.cFlat : g.otherFlat);
  return l.o + t * l.d;
}

double bandSideParam(const Development& dev, int band, bool cSide, const Vec2& p) {
  BandGeometry g = bandGeometry(dev, band);
  LineMap l = flatSide(dev, band, cSide ? g.cFlat : g.otherFlat);
  return (p - l.o).dot(l.d);
}

XPoint canonical(const Development& dev, const XPoint& p) {
  if (p.band < 0) return p;
  BandGeometry g = bandGeometry(dev, p.band);
  if (p.pos.x() <= 0) return XPoint::inFlat(g.cFlat, bandSidePoint(dev, p.band, true, p.pos.y()));
  if (p.pos.x() >= 1) return XPoint::inFlat(g.otherFlat, bandSidePoint(dev, p.band, false, p.pos.y()));
  return p;
}

Vec2 lineDirection(const LatticeLine& line) {
  if (line.dir == La) return latticeA();
  if (line.dir == Lb) return latticeB();
  return 2 * latticeC();
}

Vec2 lineOrigin(const LatticeLine& line) {
  if (line.dir == La) return latticePoint(0, line.c);
  return latticePoint(line.c, 0);
}

double lineFunctional(const LatticeLine& line, const Vec2& ij) {
  if (line.dir == La) return ij.y();
  if (line.dir == Lb) return ij.x();
  return ij.x() - ij.y();
}

XPoint Geodesic::pointAt(double s) const {
  s = std::clamp(s, 0.0, length);
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    if (s <= segment[k] || k + 1 == pieces.size()) {
      double f = segment[k] > 0 ? std::min(1.0, s / segment[k]) : 0.0;
      Vec2 pos = start[k] + f * (end[k] - start[k]);
      return pieces[k].band ? XPoint::inBand(pieces[k].id, pos.x(), pos.y()) : XPoint::inFlat(pieces[k].id, pos);
    }
    s -= segment[k];
  }
  return to;
}

std::vector<int> Geodesic::bandsMet() const {
  std::vector<int> out;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    if (!pieces[k].band || segment[k] <= 1e-12) continue;
    // An interior point needs 0 < w < 1 somewhere along the sub-segment.
    double w0 = start[k].x(), w1 = end[k].x();
    if (std::max(w0, w1) > 1e-12 && std::min(w0, w1) < 1 - 1e-12) out.push_back(pieces[k].id);
  }
  return out;
}

bool Geodesic::singular() const {
  if (pieces.size() != 1 || pieces[0].band || length <= 0) return false;
  Vec2 a = latticeCoords(start[0]), b = latticeCoords(end[0]);
  auto integral = [](double x) { return std::abs(x - std::round(x)) < 1e-9; };
  Vec2 d = b - a;
  if (std::abs(d.y()) < 1e-9 && integral(a.y())) return true;
  if (std::abs(d.x()) < 1e-9 && integral(a.x())) return true;
  return std::abs(d.x() - d.y()) < 1e-9 && integral(a.x() - a.y());
}

Geodesic geodesic(Development& dev, const XPoint& p0, const XPoint& q0, const GeodesicOptions& opts) {
  const XPoint p = canonical(dev, p0), q = canonical(dev, q0);
  Chain chain = chainBetween(dev, p, q);
  ChainSolver solver(chain, chartOf(p), chartOf(q));
  (void)opts;
  return assemble(chain, p, q, solver.solve({}));
}

Geodesic geodesic(Development& dev, VertexId x, VertexId y, const GeodesicOptions& opts) {
  Geodesic g = geodesic(dev, vertexPoint(dev, x), vertexPoint(dev, y), opts);
  if (opts.refine > 0 && g.length > 0) {
    // Graph paths are paths in X, so a shorter one means the solver stopped early.
    double graph = refinedGraphLength(dev, x, y, opts.refine, 0.5);
    if (graph < g.length - 1e-9) throw std::logic_error("geodesic solver did not converge");
  }
  return g;
}

double catDistance(const Development& dev, const XPoint& p0, const XPoint& q0) {
  const XPoint p = canonical(dev, p0), q = canonical(dev, q0);
  Chain chain = chainBetween(dev, p, q);
  ChainSolver solver(chain, chartOf(p), chartOf(q));
  return solver.solve({}).length;
}

DistanceField::DistanceField(const Development& dev, const XPoint& source)
    : dev_(&dev), source_(canonical(dev, source)) {}

double DistanceField::to(const XPoint& q0) {
  const XPoint q = canonical(*dev_, q0);
  Chain chain = chainBetween(*dev_, source_, q);
  ChainSolver solver(chain, chartOf(source_), chartOf(q));
  auto it = warm_.find(chain.key);
  Solution s = solver.solve(it == warm_.end() ? std::vector<double>{} : it->second.t);
  warm_[chain.key].t = s.t;
  return s.length;
}

namespace {

// Node identity in the refined graph: lattice vertices, or interior
// subdivision points of flat edges (flat, i, j, dir) and band rungs.
struct NodeKey {
  std::int64_t a, b, c, d, e;
  bool operator==(const NodeKey&) const = default;
  template <class H>
  friend H AbslHashValue(H h, const NodeKey& k) {
    return H::combine(std::move(h), k.a, k.b, k.c, k.d, k.e);
  }
};

class RefinedGraph {
 public:
  explicit RefinedGraph(int k) : k_(k) {}

  int node(const NodeKey& key) {
    auto [it, inserted] = index_.try_emplace(key, static_cast<int>(adj_.size()));
    if (inserted) adj_.emplace_back();
    return it->second;
  }
  int vertex(int flat, std::int64_t i, std::int64_t j) { return node({0, flat, i, j, 0}); }

  // Subdivision points of the flat edge from (i, j) in direction dir.
  void flatEdge(int flat, std::int64_t i, std::int64_t j, int dir, std::vector<std::pair<int, Vec2>>& out) {
    static const int di[3] = {1, 0, 1}, dj[3] = {0, 1, 1};
    Vec2 a = latticePoint(i, j), b = latticePoint(i + di[dir], j + dj[dir]);
    for (int q = 0; q <= k_; ++q) {
      int id = q == 0 ? vertex(flat, i, j)
                      : q == k_ ? vertex(flat, i + di[dir], j + dj[dir]) : node({1, flat, i, j, dir * 1000 + q});
      out.push_back({id, a + (b - a) * (static_cast<double>(q) / k_)});
    }
  }

  void face(const std::vector<std::pair<int, Vec2>>& pts) {
    for (std::size_t x = 0; x < pts.size(); ++x)
      for (std::size_t y = x + 1; y < pts.size(); ++y) {
        if (pts[x].first == pts[y].first) continue;
        double w = (pts[x].second - pts[y].second).norm();
        adj_[pts[x].first].push_back({pts[y].first, w});
        adj_[pts[y].first].push_back({pts[x].first, w});
      }
  }

  void triangle(int flat, std::int64_t i, std::int64_t j, bool ab) {
    std::vector<std::pair<int, Vec2>> pts;
    flatEdge(flat, i, j, 2, pts);  // the c-side
    if (ab) {
      flatEdge(flat, i, j, 0, pts);
      flatEdge(flat, i + 1, j, 1, pts);
    } else {
      flatEdge(flat, i, j, 1, pts);
      flatEdge(flat, i, j + 1, 0, pts);
    }
    face(pts);
  }

  // Square k of a band, in the band chart (w, p).
  void square(const Development& dev, int band, std::int64_t k) {
    BandGeometry g = bandGeometry(dev, band);
    std::vector<std::pair<int, Vec2>> pts;
    // c-side: two c-edges of the c-line, parameter p in [k, k+1].
    for (int e = 0; e < 2; ++e) {
      std::vector<std::pair<int, Vec2>> side;
      flatEdge(g.cFlat, g.ci + 2 * k + e, g.cj + 2 * k + e, 2, side);
      for (std::size_t q = 0; q < side.size(); ++q)
        pts.push_back({side[q].first, Vec2(0.0, k + 0.5 * e + 0.5 * static_cast<double>(q) / k_)});
    }
    std::vector<std::pair<int, Vec2>> other;
    const int dir = g.stable == Ls ? 0 : 1;
    flatEdge(g.otherFlat, g.oi + (dir == 0 ? k : 0), g.oj + (dir == 1 ? k : 0), dir, other);
    for (std::size_t q = 0; q < other.size(); ++q)
      pts.push_back({other[q].first, Vec2(1.0, k + static_cast<double>(q) / k_)});
    for (std::int64_t r = k; r <= k + 1; ++r)
      for (int q = 1; q < k_; ++q) pts.push_back({node({2, band, r, q, 0}), Vec2(static_cast<double>(q) / k_, r)});
    face(pts);
  }

  double shortest(int s, int t) const {
    std::vector<double> dist(adj_.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[s] = 0;
    pq.push({0, s});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > dist[v]) continue;
      if (v == t) return d;
      for (auto [w, len] : adj_[v])
        if (d + len < dist[w]) {
          dist[w] = d + len;
          pq.push({dist[w], w});
        }
    }
    return dist[t];
  }

 private:
  int k_;
  absl::flat_hash_map<NodeKey, int> index_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

}  // namespace

double refinedGraphLength(Development& dev, VertexId x, VertexId y, int k, double slack) {
  if (k < 1) throw std::invalid_argument("subdivision must be positive");
  const XPoint px = vertexPoint(dev, x), py = vertexPoint(dev, y);
  const double L = catDistance(dev, px, py);
  const double bound = L + slack;
  DistanceField fx(dev, px), fy(dev, py);
  RefinedGraph graph(k);
  std::vector<int> path = dev.flatPath(dev.flatOf(x), dev.flatOf(y));
  // Lattice points of each path flat inside the inflated ellipse, by flood
  // fill from the flat's points nearest to the chain.
  Geodesic g = geodesic(dev, px, py, GeodesicOptions{0});
  absl::flat_hash_set<std::array<std::int64_t, 3>> inside;
  auto keep = [&](int flat, std::int64_t i, std::int64_t j) {
    Vec2 pos = latticePoint(i, j);
    return fx.toFlat(flat, pos) + fy.toFlat(flat, pos) <= bound + 2.0;
  };
  for (std::size_t p = 0; p < g.pieces.size(); ++p) {
    if (g.pieces[p].band) continue;
    const int flat = g.pieces[p].id;
    std::vector<std::array<std::int64_t, 2>> stack;
    for (const Vec2& seed : {g.start[p], g.end[p]}) {
      Vec2 ij = latticeCoords(seed);
      for (int di = -1; di <= 2; ++di)
        for (int dj = -1; dj <= 2; ++dj) {
          std::int64_t i = static_cast<std::int64_t>(std::floor(ij.x())) + di;
          std::int64_t j = static_cast<std::int64_t>(std::floor(ij.y())) + dj;
          if (keep(flat, i, j) && inside.insert({flat, i, j}).second) stack.push_back({i, j});
        }
    }
    while (!stack.empty()) {
      auto [i, j] = stack.back();
      stack.pop_back();
      static const int ni[6] = {1, -1, 0, 0, 1, -1}, nj[6] = {0, 0, 1, -1, 1, -1};
      for (int n = 0; n < 6; ++n)
        if (keep(flat, i + ni[n], j + nj[n]) && inside.insert({flat, i + ni[n], j + nj[n]}).second)
          stack.push_back({i + ni[n], j + nj[n]});
    }
  }
  for (const auto& v : inside) {
    const int flat = static_cast<int>(v[0]);
    for (int di = -1; di <= 0; ++di)
      for (int dj = -1; dj <= 0; ++dj) {
        graph.triangle(flat, v[1] + di, v[2] + dj, true);
        graph.triangle(flat, v[1] + di, v[2] + dj, false);
      }
  }
  // Squares of the crossed bands whose corners lie in the region.
  for (std::size_t p = 0; p < g.pieces.size(); ++p) {
    if (!g.pieces[p].band) continue;
    const int band = g.pieces[p].id;
    BandGeometry geo = bandGeometry(dev, band);
    double t = g.start[p].y();
    for (std::int64_t kk = static_cast<std::int64_t>(std::floor(t - bound)) - 1; kk <= t + bound + 1; ++kk) {
      bool any = inside.contains({geo.cFlat, geo.ci + 2 * kk, geo.cj + 2 * kk}) ||
                 inside.contains({geo.cFlat, geo.ci + 2 * kk + 2, geo.cj + 2 * kk + 2});
      if (any) graph.square(dev, band, kk);
    }
  }
  int s = graph.vertex(dev.flatOf(x), dev.coordI(x), dev.coordJ(x));
  int t = graph.vertex(dev.flatOf(y), dev.coordI(y), dev.coordJ(y));
  return graph.shortest(s, t);
}

}  // namespace wise
