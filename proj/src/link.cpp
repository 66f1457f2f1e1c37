#include "wise/link.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace wise {

namespace {

std::string ratStr(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

long double ratValue(const Rational& r) {
  return static_cast<long double>(r.numerator()) / static_cast<long double>(r.denominator());
}

// A corner between two sides of a triangle opposite the c-side has angle u,
// the two corners touching the c-side have angle v. For the subdivided
// squares the corner between the two half c-sides is pi, all others pi/2.
FaceShape makeFace(const char* boundary) {
  FaceShape f;
  f.boundary = parseWord(boundary);
  const std::size_t n = f.boundary.size();
  for (std::size_t k = 0; k < n; ++k) {
    Letter x = f.boundary[k], y = f.boundary[(k + 1) % n];
    f.sides.push_back(edgeLength(x));
    if (n == 3) {
      Letter z = f.boundary[(k + 2) % n];
      f.corners.push_back(z.gen() == 2 ? AngleValue::u() : AngleValue::v());
    } else {
      f.corners.push_back(x.gen() == 2 && y.gen() == 2 ? AngleValue::pi() : AngleValue::halfPi());
    }
  }
  return f;
}

}  // namespace

long double angleV() { return std::acos(0.25L); }
long double angleU() { return std::acos(0.875L); }

long double AngleValue::value() const {
  return ratValue(m) * angleV() + ratValue(n) * (std::acos(-1.0L) / 2);
}

std::string AngleValue::str() const {
  return "(" + ratStr(m) + "," + ratStr(n) + ")";
}

std::partial_ordering AngleValue::operator<=>(const AngleValue& o) const {
  if (*this == o) return std::partial_ordering::equivalent;
  return value() <=> o.value();
}

double edgeLength(Letter x) { return x.gen() == 2 ? 0.5 : 1.0; }

const std::vector<FaceShape>& presentationFaces() {
  static const std::vector<FaceShape> faces{makeFace("abC"), makeFace("baC"), makeFace("saSCC"),
                                            makeFace("tbTCC")};
  return faces;
}

const char* str(CycleKind kind) {
  switch (kind) {
    case CycleKind::Bold:
      return "bold";
    case CycleKind::Mixed:
      return "mixed";
    case CycleKind::NonBoldPiPi:
      return "pi+pi";
    case CycleKind::NonBoldHalfHalfPi:
      return "(pi/2+pi/2)+pi";
    default:
      return "(pi/2+pi/2)+(pi/2+pi/2)";
  }
}

LinkGraph LinkGraph::build() {
  std::vector<Letter> germs(kAllLetters.begin(), kAllLetters.end());
  std::vector<LinkEdge> edges;
  const auto& faces = presentationFaces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Word& w = faces[f].boundary;
    for (std::size_t k = 0; k < w.size(); ++k) {
      LinkEdge e;
      e.v0 = w[k].inv().code;
      e.v1 = w[(k + 1) % w.size()].code;
      e.length = faces[f].corners[k];
      e.face = static_cast<int>(f);
      e.corner = static_cast<int>(k);
      e.bold = e.length == AngleValue::u() || e.length == AngleValue::v();
      edges.push_back(e);
    }
  }
  return fromEdges(std::move(germs), std::move(edges));
}

LinkGraph LinkGraph::fromEdges(std::vector<Letter> germs, std::vector<LinkEdge> edges) {
  LinkGraph g;
  g.germs_ = std::move(germs);
  g.edges_ = std::move(edges);
  return g;
}

LinkGraph build_link() { return LinkGraph::build(); }

int LinkGraph::vertexOf(Letter germ) const {
  auto it = std::find(germs_.begin(), germs_.end(), germ);
  return it == germs_.end() ? -1 : static_cast<int>(it - germs_.begin());
}

AngleValue LinkGraph::distance(const LinkPoint& p, const LinkPoint& q) const {
  const std::size_t n = germs_.size();
  std::vector<std::optional<AngleValue>> dist(n);
  auto relax = [&](int v, const AngleValue& d) {
    if (!dist[v] || d < *dist[v]) dist[v] = d;
  };
  if (p.edge < 0) {
    relax(p.vertex, AngleValue::zero());
  } else {
    const LinkEdge& e = edges_[p.edge];
    relax(e.v0, e.length * p.t);
    relax(e.v1, e.length * (Rational(1) - p.t));
  }
  std::vector<bool> done(n, false);
  while (true) {
    int best = -1;
    for (std::size_t v = 0; v < n; ++v)
      if (!done[v] && dist[v] && (best < 0 || *dist[v] < *dist[best])) best = static_cast<int>(v);
    if (best < 0) break;
    done[best] = true;
    for (const LinkEdge& e : edges_) {
      if (e.v0 == best) relax(e.v1, *dist[best] + e.length);
      if (e.v1 == best) relax(e.v0, *dist[best] + e.length);
    }
  }
  std::optional<AngleValue> out;
  auto take = [&](const std::optional<AngleValue>& d) {
    if (d && (!out || *d < *out)) out = d;
  };
  if (q.edge < 0) {
    take(dist[q.vertex]);
  } else {
    const LinkEdge& e = edges_[q.edge];
    if (dist[e.v0]) take(*dist[e.v0] + e.length * q.t);
    if (dist[e.v1]) take(*dist[e.v1] + e.length * (Rational(1) - q.t));
    if (p.edge == q.edge) {
      Rational dt = p.t > q.t ? p.t - q.t : q.t - p.t;
      take(e.length * dt);
    }
  }
  if (!out) throw std::invalid_argument("points lie in different components");
  return *out;
}

const std::vector<LinkCycle>& LinkGraph::simpleCycles() const {
  if (cyclesReady_) return cycles_;
  const int n = static_cast<int>(germs_.size());
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (edge, neighbour)
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    adj[edges_[k].v0].push_back({static_cast<int>(k), edges_[k].v1});
    adj[edges_[k].v1].push_back({static_cast<int>(k), edges_[k].v0});
  }
  std::vector<std::uint64_t> seen;
  std::vector<int> pathEdges, pathVerts;
  std::vector<bool> onPath(n, false);
  auto dfs = [&](auto&& self, int start, int v) -> void {
    for (auto [e, w] : adj[v]) {
      if (!pathEdges.empty() && e == pathEdges.back()) continue;
      if (w == start && !pathEdges.empty()) {
        std::uint64_t mask = 1ull << e;
        for (int pe : pathEdges) mask |= 1ull << pe;
        if (std::find(seen.begin(), seen.end(), mask) != seen.end()) continue;
        seen.push_back(mask);
        LinkCycle c;
        c.edges = pathEdges;
        c.edges.push_back(e);
        c.vertices = pathVerts;
        for (int ce : c.edges) c.length = c.length + edges_[ce].length;
        cycles_.push_back(std::move(c));
        continue;
      }
      if (w > start && !onPath[w]) {
        onPath[w] = true;
        pathEdges.push_back(e);
        pathVerts.push_back(w);
        self(self, start, w);
        pathVerts.pop_back();
        pathEdges.pop_back();
        onPath[w] = false;
      }
    }
  };
  for (int s = 0; s < n; ++s) {
    onPath.assign(n, false);
    onPath[s] = true;
    pathVerts = {s};
    dfs(dfs, s, s);
  }
  cyclesReady_ = true;
  return cycles_;
}

AngleValue LinkGraph::girth() const {
  std::optional<AngleValue> best;
  for (const LinkCycle& c : simpleCycles())
    if (!best || c.length < *best) best = c.length;
  return best.value_or(AngleValue::zero());
}

std::vector<CycleClass> LinkGraph::enumerate2PiCycles() const {
  std::vector<CycleClass> out;
  const AngleValue u = AngleValue::u(), v = AngleValue::v(), half = AngleValue::halfPi(), pi = AngleValue::pi();
  for (const LinkCycle& c : simpleCycles()) {
    if (!(c.length == AngleValue::twoPi())) continue;
    const std::size_t n = c.edges.size();
    std::vector<AngleValue> len;
    std::vector<bool> bold;
    for (int e : c.edges) {
      len.push_back(edges_[e].length);
      bold.push_back(edges_[e].bold);
    }
    const auto boldCount = std::count(bold.begin(), bold.end(), true);
    std::optional<CycleKind> kind;
    if (boldCount == static_cast<long>(n)) {
      const std::vector<AngleValue> pattern{u, v, v, u, v, v};
      if (n == 6) {
        for (std::size_t r = 0; r < 6 && !kind; ++r) {
          bool fwd = true, bwd = true;
          for (std::size_t k = 0; k < 6; ++k) {
            fwd = fwd && len[(r + k) % 6] == pattern[k];
            bwd = bwd && len[(r + 6 - k) % 6] == pattern[k];
          }
          if (fwd || bwd) kind = CycleKind::Bold;
        }
      }
    } else if (boldCount == 0) {
      auto pis = std::count(len.begin(), len.end(), pi);
      auto halves = std::count(len.begin(), len.end(), half);
      if (n == 2 && pis == 2) kind = CycleKind::NonBoldPiPi;
      if (n == 3 && pis == 1 && halves == 2) kind = CycleKind::NonBoldHalfHalfPi;
      if (n == 4 && halves == 4) kind = CycleKind::NonBoldFourHalves;
    } else {
      // One contiguous bold run u+2v and a non-bold remainder of length pi.
      std::size_t starts = 0, first = 0;
      for (std::size_t k = 0; k < n; ++k)
        if (bold[k] && !bold[(k + n - 1) % n]) ++starts, first = k;
      if (starts == 1 && boldCount == 3) {
        AngleValue run;
        int us = 0;
        for (std::size_t k = 0; k < 3; ++k) {
          run = run + len[(first + k) % n];
          if (len[(first + k) % n] == u) ++us;
        }
        if (run == pi && us == 1) kind = CycleKind::Mixed;
      }
    }
    if (!kind) throw ClassificationError("a 2pi-cycle matches no census pattern");
    out.push_back(CycleClass{*kind, c, c.length});
  }
  return out;
}

bool LinkGraph::cycleContains(const LinkCycle& c, const LinkPoint& p) const {
  if (p.edge < 0) return std::find(c.vertices.begin(), c.vertices.end(), p.vertex) != c.vertices.end();
  if (p.t == Rational(0)) return cycleContains(c, LinkPoint::atVertex(edges_[p.edge].v0));
  if (p.t == Rational(1)) return cycleContains(c, LinkPoint::atVertex(edges_[p.edge].v1));
  return std::find(c.edges.begin(), c.edges.end(), p.edge) != c.edges.end();
}

CommonCycle LinkGraph::smallestCommonCycle(const LinkPoint& p, const LinkPoint& q) const {
  if (!(distance(p, q) > AngleValue::pi()))
    throw std::invalid_argument("smallest common cycle needs two points at distance > pi");
  std::vector<const LinkCycle*> common;
  for (const LinkCycle& c : simpleCycles())
    if (cycleContains(c, p) && cycleContains(c, q)) common.push_back(&c);
  if (common.empty()) throw std::invalid_argument("no cycle through both points");
  std::sort(common.begin(), common.end(), [](const LinkCycle* x, const LinkCycle* y) {
    return x->length < y->length;
  });
  CommonCycle out;
  out.cycle = *common[0];
  out.length = common[0]->length;
  out.unique = common.size() == 1 || !(common[1]->length == out.length);
  for (const LinkCycle* c : common)
    if (!(c->length == out.length)) {
      out.runnerUp = c->length;
      break;
    }
  return out;
}

LinkGraph LinkGraph::withoutEdge(int e) const {
  std::vector<LinkEdge> edges = edges_;
  edges.erase(edges.begin() + e);
  return fromEdges(germs_, std::move(edges));
}

bool LinkGraph::sameAs(const LinkGraph& other) const {
  auto signature = [](const LinkGraph& g) {
    std::vector<std::tuple<int, int, std::string>> sig;
    for (const LinkEdge& e : g.edges_) {
      int a = g.germs_[e.v0].code, b = g.germs_[e.v1].code;
      sig.emplace_back(std::min(a, b), std::max(a, b), e.length.str());
    }
    std::sort(sig.begin(), sig.end());
    return sig;
  };
  auto mine = germs_, theirs = other.germs_;
  std::sort(mine.begin(), mine.end());
  std::sort(theirs.begin(), theirs.end());
  return mine == theirs && signature(*this) == signature(other);
}

}  // namespace wise
