#include "wise/cover.hpp"

#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <set>

namespace wise {

namespace {

std::int32_t floorHalf(std::int32_t x) { return x >= 0 ? x / 2 : -((-x + 1) / 2); }

constexpr std::int32_t kCoordLimit = 1 << 29;

void checkCoord(std::int64_t v) {
  if (v > kCoordLimit || v < -kCoordLimit) throw ResourceLimit("flat coordinate overflow");
}

Word prefixInverse(const Word& w, int p) { return inverse(Word(w.begin(), w.begin() + p)); }

}  // namespace

Development::Development() {
  flats_.push_back(Flat{});
  vertexAt(0, 0, 0);
}

Development::Target Development::resolve(VertexId v, Letter x) const {
  const int f = vflat_[v];
  const std::int32_t i = vi_[v], j = vj_[v];
  const Flat& F = flats_[f];
  Target t{false, f, x, 0, 0, i, j};
  switch (x.gen()) {
    case 0:
      t.i += x.sign();
      return t;
    case 1:
      t.j += x.sign();
      return t;
    case 2:
      t.i += x.sign();
      t.j += x.sign();
      return t;
    default:
      break;
  }
  if (x == Ls || x == Lt) {
    // The c-line class of (i,j) modulo (2,2); square index m along it.
    const std::int32_t m = floorHalf(j), ri = i - 2 * m, rj = j - 2 * m;
    if (F.entry == x.inv() && ri == 0 && rj == 0) {
      t.toParent = true;
      t.flat = F.parent;
      t.i = x == Ls ? F.ci + m : F.ci;
      t.j = x == Ls ? F.cj : F.cj + m;
      return t;
    }
    t.flat = -1;
    t.ci = ri;
    t.cj = rj;
    t.i = x == Ls ? m : 0;
    t.j = x == Ls ? 0 : m;
    return t;
  }
  // S leaves along the a-line through (i,j), T along the b-line.
  const std::int32_t k = x == LS ? i : j;
  const bool back = x == LS ? (F.entry == Ls && j == 0) : (F.entry == Lt && i == 0);
  checkCoord(2ll * k);
  if (back) {
    t.toParent = true;
    t.flat = F.parent;
    t.i = F.ci + 2 * k;
    t.j = F.cj + 2 * k;
    return t;
  }
  t.flat = -1;
  t.ci = x == LS ? 0 : i;
  t.cj = x == LS ? j : 0;
  t.i = t.j = 2 * k;
  return t;
}

int Development::child(int flat, Letter x, std::int32_t i, std::int32_t j) {
  auto [it, inserted] = children_.try_emplace({flat, x.code, i, j}, static_cast<int>(flats_.size()));
  if (inserted) {
    if (flats_.size() >= maxElements()) throw ResourceLimit("development exceeds flat cap");
    flats_.push_back(Flat{flat, x, i, j, flats_[flat].depth + 1});
  }
  return it->second;
}

int Development::peekChild(int flat, Letter x, std::int32_t i, std::int32_t j) const {
  auto it = children_.find(std::array<std::int32_t, 4>{flat, x.code, i, j});
  return it == children_.end() ? -1 : it->second;
}

VertexId Development::vertexAt(int flat, std::int32_t i, std::int32_t j) {
  auto [it, inserted] = vindex_.try_emplace({flat, i, j}, static_cast<VertexId>(vflat_.size()));
  if (inserted) {
    if (vflat_.size() >= maxElements()) throw ResourceLimit("development exceeds vertex cap");
    vflat_.push_back(flat);
    vi_.push_back(i);
    vj_.push_back(j);
  }
  return it->second;
}

VertexId Development::findVertex(int flat, std::int32_t i, std::int32_t j) const {
  auto it = vindex_.find(std::array<std::int32_t, 3>{flat, i, j});
  return it == vindex_.end() ? kNoVertex : it->second;
}

VertexId Development::step(VertexId v, Letter x) {
  Target t = resolve(v, x);
  int f = t.flat < 0 ? child(vflat_[v], x, t.ci, t.cj) : t.flat;
  return vertexAt(f, t.i, t.j);
}

VertexId Development::peek(VertexId v, Letter x) const {
  if (v == kNoVertex) return kNoVertex;
  Target t = resolve(v, x);
  int f = t.flat < 0 ? peekChild(vflat_[v], x, t.ci, t.cj) : t.flat;
  return f < 0 ? kNoVertex : findVertex(f, t.i, t.j);
}

VertexId Development::walk(VertexId v, const Word& w) {
  for (Letter x : w) v = step(v, x);
  return v;
}

VertexId Development::peekWalk(VertexId v, const Word& w) const {
  for (Letter x : w) v = peek(v, x);
  return v;
}

std::vector<int> Development::flatPath(int f, int g) const {
  std::vector<int> up, down;
  while (flats_[f].depth > flats_[g].depth) up.push_back(f), f = flats_[f].parent;
  while (flats_[g].depth > flats_[f].depth) down.push_back(g), g = flats_[g].parent;
  while (f != g) {
    up.push_back(f), f = flats_[f].parent;
    down.push_back(g), g = flats_[g].parent;
  }
  up.push_back(f);
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

Word Development::wordOf(VertexId v) const {
  std::vector<Word> parts;
  int f = vflat_[v];
  std::int64_t i = vi_[v], j = vj_[v];
  for (;;) {
    Word w = concat(power(La, i), power(Lb, j));
    if (flats_[f].parent < 0) {
      parts.push_back(std::move(w));
      break;
    }
    w.insert(w.begin(), flats_[f].entry);
    parts.push_back(std::move(w));
    i = flats_[f].ci;
    j = flats_[f].cj;
    f = flats_[f].parent;
  }
  Word out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) out.insert(out.end(), it->begin(), it->end());
  return out;
}

namespace {

// Word length of a^i b^j in Z^2 = <a, b> with c = ab available.
std::int64_t flatLength(std::int64_t i, std::int64_t j) {
  if ((i >= 0) == (j >= 0)) return std::max(std::abs(i), std::abs(j));
  return std::abs(i) + std::abs(j);
}

}  // namespace

int Development::lengthUpperBound(VertexId v) const {
  std::int64_t total = 0;
  int f = vflat_[v];
  std::int64_t i = vi_[v], j = vj_[v];
  for (;;) {
    total += flatLength(i, j);
    if (flats_[f].parent < 0) break;
    total += 1;
    i = flats_[f].ci;
    j = flats_[f].cj;
    f = flats_[f].parent;
  }
  return static_cast<int>(std::min<std::int64_t>(total, 1 << 30));
}

LatticeLine cLineOf(const Development& dev, int band) {
  BandGeometry g = bandGeometry(dev, band);
  return {g.cFlat, Lc, g.ci - g.cj};
}

LatticeLine otherLineOf(const Development& dev, int band) {
  BandGeometry g = bandGeometry(dev, band);
  if (g.stable == Ls) return {g.otherFlat, La, g.oj};
  return {g.otherFlat, Lb, g.oi};
}

LatticeLine lineIn(const Development& dev, int band, int flat) {
  BandGeometry g = bandGeometry(dev, band);
  if (g.cFlat == flat) return cLineOf(dev, band);
  if (g.otherFlat == flat) return otherLineOf(dev, band);
  throw std::invalid_argument("band does not touch this flat");
}

std::vector<int> bandsOnLine(Development& dev, const LatticeLine& line) {
  const auto& F = dev.flat(line.flat);
  auto own = [&](Letter entry, bool here, Letter x, std::int32_t ri, std::int32_t rj) {
    if (F.parent >= 0 && F.entry == entry && here) return line.flat;
    return dev.child(line.flat, x, ri, rj);
  };
  std::vector<int> out;
  if (line.dir == Lc) {
    const std::int32_t d = line.c;
    for (Letter x : {Ls, Lt}) {
      out.push_back(own(x.inv(), d == 0, x, d, 0));
      out.push_back(own(x.inv(), false, x, d + 1, 1));
    }
  } else if (line.dir == La) {
    out.push_back(own(Ls, line.c == 0, LS, 0, line.c));
  } else {
    out.push_back(own(Lt, line.c == 0, LT, line.c, 0));
  }
  return out;
}

ComplexPatch::ComplexPatch(std::shared_ptr<Development> dev, int radius) : dev_(std::move(dev)), radius_(radius) {
  if (radius < 0 || radius > 100) throw std::invalid_argument("patch radius out of range");
  auto setDist = [&](VertexId v, int d) {
    if (v >= dist_.size()) dist_.resize(std::max<std::size_t>(v + 1, dist_.size() * 2), -1);
    dist_[v] = static_cast<std::int8_t>(d);
  };
  VertexId b = dev_->base();
  setDist(b, 0);
  order_.push_back(b);
  std::size_t layerStart = 0;
  for (int r = 1; r <= radius; ++r) {
    std::size_t layerEnd = order_.size();
    for (std::size_t k = layerStart; k < layerEnd; ++k) {
      for (Letter x : kAllLetters) {
        VertexId w = dev_->step(order_[k], x);
        if (distance(w) >= 0) continue;
        setDist(w, r);
        order_.push_back(w);
      }
    }
    layerStart = layerEnd;
  }
}

ComplexPatch build_patch(int radius) { return ComplexPatch(std::make_shared<Development>(), radius); }

std::vector<VertexId> ComplexPatch::faceVertices(FaceRef f) const {
  const Word& w = presentationFaces()[f.type].boundary;
  std::vector<VertexId> out{f.base};
  for (std::size_t k = 0; k + 1 < w.size(); ++k) out.push_back(dev_->peek(out.back(), w[k]));
  return out;
}

bool ComplexPatch::containsFace(FaceRef f) const {
  if (!contains(f.base)) return false;
  const Word& w = presentationFaces()[f.type].boundary;
  VertexId v = f.base;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    v = dev_->peek(v, w[k]);
    if (v == kNoVertex || !contains(v)) return false;
  }
  return true;
}

std::vector<Corner> ComplexPatch::patchCornersAt(VertexId v) const {
  std::vector<Corner> out;
  const auto& faces = presentationFaces();
  for (std::uint8_t t = 0; t < faces.size(); ++t) {
    const Word& w = faces[t].boundary;
    for (int p = 0; p < static_cast<int>(w.size()); ++p) {
      VertexId base = dev_->peekWalk(v, prefixInverse(w, p));
      if (base == kNoVertex) continue;
      FaceRef f{base, t};
      if (containsFace(f)) out.push_back(Corner{f, p});
    }
  }
  return out;
}

bool ComplexPatch::isInterior(VertexId v) const { return contains(v) && patchCornersAt(v).size() == 16; }

LocalLink ComplexPatch::linkAt(VertexId v) const {
  LocalLink out;
  std::vector<LinkEdge> edges;
  const auto& faces = presentationFaces();
  for (const Corner& c : patchCornersAt(v)) {
    const FaceShape& shape = faces[c.face.type];
    const int n = static_cast<int>(shape.boundary.size());
    const int before = (c.position + n - 1) % n;
    LinkEdge e;
    e.v0 = shape.boundary[before].inv().code;
    e.v1 = shape.boundary[c.position].code;
    e.length = shape.corners[before];
    e.face = c.face.type;
    e.corner = before;
    e.bold = e.length == AngleValue::u() || e.length == AngleValue::v();
    edges.push_back(e);
    out.corners.push_back(c);
  }
  out.graph = LinkGraph::fromEdges(std::vector<Letter>(kAllLetters.begin(), kAllLetters.end()), std::move(edges));
  return out;
}

std::vector<FaceRef> ComplexPatch::facesOnEdge(EdgeRef e) const {
  std::vector<FaceRef> out;
  const VertexId to = dev_->peek(e.from, e.label);
  const auto& faces = presentationFaces();
  for (std::uint8_t t = 0; t < faces.size(); ++t) {
    const Word& w = faces[t].boundary;
    for (int p = 0; p < static_cast<int>(w.size()); ++p) {
      VertexId start = w[p] == e.label ? e.from : (w[p] == e.label.inv() ? to : kNoVertex);
      if (start == kNoVertex) continue;
      VertexId base = dev_->peekWalk(start, prefixInverse(w, p));
      if (base != kNoVertex) out.push_back(FaceRef{base, t});
    }
  }
  return out;
}

std::size_t ComplexPatch::faceCount() const {
  std::size_t n = 0;
  forEachFace([&](FaceRef) { ++n; });
  return n;
}

int fullIncidence(Letter label) {
  int n = 0;
  for (const FaceShape& f : presentationFaces())
    for (Letter x : f.boundary)
      if (x.gen() == label.gen()) ++n;
  return n;
}

SingularLocus singular_locus(const ComplexPatch& patch) {
  SingularLocus out;
  for (VertexId v : patch.vertices()) {
    for (int g = 0; g < 5; ++g) {
      EdgeRef e{v, Letter::make(g, false)};
      VertexId w = patch.dev().peek(v, e.label);
      if (!patch.contains(w)) continue;
      int inPatch = 0;
      for (FaceRef f : patch.facesOnEdge(e))
        if (patch.containsFace(f)) ++inPatch;
      if (inPatch >= 3)
        out.singular.push_back(e);
      else if (inPatch < fullIncidence(e.label))
        out.truncated.push_back(e);
      else
        out.nonsingular.push_back(e);
    }
    if (patch.isInterior(v)) out.singularVertices.push_back(v);
  }
  return out;
}

BandGeometry bandGeometry(const Development& dev, int band) {
  const auto& C = dev.flat(band);
  if (C.parent < 0) throw std::invalid_argument("the base flat is not a band");
  BandGeometry g;
  g.band = band;
  g.stable = Letter::make(C.entry.gen(), false);
  if (!C.entry.inverse()) {
    g.cFlat = C.parent;
    g.ci = C.ci;
    g.cj = C.cj;
    g.otherFlat = band;
  } else {
    g.cFlat = band;
    g.otherFlat = C.parent;
    g.oi = C.ci;
    g.oj = C.cj;
  }
  return g;
}

std::pair<int, std::int64_t> bandOfSquare(Development& dev, FaceRef square) {
  const Letter x = square.type == kSquareS ? Ls : Lt;
  const VertexId v = square.base;
  const VertexId w = dev.step(v, x);
  const int f = dev.flatOf(v), g = dev.flatOf(w);
  if (dev.flat(g).parent == f && dev.flat(g).entry == x)
    return {g, (dev.coordI(v) - dev.flat(g).ci) / 2};
  return {f, dev.coordI(v) / 2};
}

BandFragment fragmentOf(const ComplexPatch& patch, int band, std::int64_t k) {
  Development& dev = patch.dev();
  const BandGeometry g = bandGeometry(dev, band);
  const FaceType type = g.stable == Ls ? kSquareS : kSquareT;
  auto square = [&](std::int64_t q) {
    VertexId v = dev.findVertex(g.cFlat, static_cast<std::int32_t>(g.ci + 2 * q), static_cast<std::int32_t>(g.cj + 2 * q));
    return FaceRef{v, type};
  };
  auto present = [&](std::int64_t q) {
    FaceRef f = square(q);
    return f.base != kNoVertex && patch.containsFace(f);
  };
  BandFragment b;
  b.band = band;
  b.stable = g.stable;
  if (!present(k)) return b;
  b.k0 = b.k1 = k;
  while (present(b.k0 - 1)) --b.k0;
  while (present(b.k1 + 1)) ++b.k1;
  b.truncated = true;  // bands are unbounded, so a finite run always stops at the patch boundary
  for (std::int64_t q = b.k0; q <= b.k1; ++q) b.squares.push_back(square(q));
  for (std::int64_t m = 2 * b.k0; m <= 2 * b.k1 + 2; ++m)
    b.cLine.push_back(dev.findVertex(g.cFlat, static_cast<std::int32_t>(g.ci + m), static_cast<std::int32_t>(g.cj + m)));
  const std::int32_t di = g.stable == Ls ? 1 : 0, dj = g.stable == Ls ? 0 : 1;
  for (std::int64_t q = b.k0; q <= b.k1 + 1; ++q)
    b.otherLine.push_back(dev.findVertex(g.otherFlat, static_cast<std::int32_t>(g.oi + q * di),
                                         static_cast<std::int32_t>(g.oj + q * dj)));
  return b;
}

std::vector<BandFragment> detect_bands(const ComplexPatch& patch) {
  std::vector<std::pair<int, std::int64_t>> squares;
  patch.forEachFace([&](FaceRef f) {
    if (f.type >= kSquareS) squares.push_back(bandOfSquare(patch.dev(), f));
  });
  std::sort(squares.begin(), squares.end());
  std::vector<BandFragment> out;
  for (std::size_t k = 0; k < squares.size();) {
    out.push_back(fragmentOf(patch, squares[k].first, squares[k].second));
    std::size_t n = out.back().squares.size();
    k += n;
  }
  return out;
}

std::vector<VertexId> fragmentVertices(const BandFragment& b) {
  std::vector<VertexId> out = b.cLine;
  out.insert(out.end(), b.otherLine.begin(), b.otherLine.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// Triangles sharing an edge with a triangle of a flat (lattice description).
std::array<FaceRef, 3> triangleNeighbours(const Development& dev, FaceRef t) {
  const int f = dev.flatOf(t.base);
  const std::int32_t i = dev.coordI(t.base), j = dev.coordJ(t.base);
  auto at = [&](std::int32_t di, std::int32_t dj, std::uint8_t type) {
    return FaceRef{dev.findVertex(f, i + di, j + dj), type};
  };
  if (t.type == kTriAB) return {at(0, -1, kTriBA), at(1, 0, kTriBA), at(0, 0, kTriBA)};
  return {at(-1, 0, kTriAB), at(0, 1, kTriAB), at(0, 0, kTriAB)};
}

}  // namespace

DiskGrowth grow_flat_disk(const ComplexPatch& patch, VertexId v, int maxRadius) {
  DiskGrowth out;
  std::set<FaceRef> disk;
  std::set<VertexId> completed;
  std::vector<VertexId> frontier{v};
  for (int k = 1; k <= maxRadius; ++k) {
    std::vector<FaceRef> added;
    for (VertexId x : frontier) {
      if (completed.count(x)) continue;
      if (!patch.isInterior(x)) {
        ++out.failures;
        return out;
      }
      LocalLink link = patch.linkAt(x);
      // Bold edges of the link already realized by the disk form a path; it
      // must complete to exactly one bold cycle of length 2pi.
      std::vector<int> have;
      for (std::size_t e = 0; e < link.corners.size(); ++e)
        if (link.graph.edges()[e].bold && disk.count(link.corners[e].face)) have.push_back(static_cast<int>(e));
      int completions = 0;
      for (const LinkCycle& c : link.graph.simpleCycles()) {
        if (!(c.length == AngleValue::twoPi())) continue;
        bool allBold = std::all_of(c.edges.begin(), c.edges.end(), [&](int e) { return link.graph.edges()[e].bold; });
        bool covers = std::all_of(have.begin(), have.end(), [&](int e) {
          return std::find(c.edges.begin(), c.edges.end(), e) != c.edges.end();
        });
        if (allBold && covers) {
          ++completions;
          for (int e : c.edges) added.push_back(link.corners[e].face);
        }
      }
      if (completions != 1) out.unique_extensions = false;
      completed.insert(x);
    }
    std::set<VertexId> next;
    for (FaceRef f : added) {
      if (!disk.insert(f).second) continue;
      for (VertexId w : patch.faceVertices(f))
        if (!completed.count(w)) next.insert(w);
    }
    out.triangles.push_back(disk.size());
    frontier.assign(next.begin(), next.end());
  }
  return out;
}

std::vector<FlatFragment> detect_flats(const ComplexPatch& patch) {
  const Development& dev = patch.dev();
  std::set<FaceRef> triangles;
  patch.forEachFace([&](FaceRef f) {
    if (f.type <= kTriBA) triangles.insert(f);
  });
  std::vector<FlatFragment> out;
  std::set<FaceRef> seen;
  for (FaceRef start : triangles) {
    if (seen.count(start)) continue;
    FlatFragment frag;
    frag.flat = dev.flatOf(start.base);
    std::deque<FaceRef> queue{start};
    seen.insert(start);
    while (!queue.empty()) {
      FaceRef t = queue.front();
      queue.pop_front();
      frag.triangles.push_back(t);
      for (FaceRef n : triangleNeighbours(dev, t))
        if (n.base != kNoVertex && triangles.count(n) && seen.insert(n).second) queue.push_back(n);
    }
    std::sort(frag.triangles.begin(), frag.triangles.end());
    VertexId best = kNoVertex;
    for (FaceRef t : frag.triangles)
      for (VertexId w : patch.faceVertices(t))
        if (best == kNoVertex || patch.distance(w) < patch.distance(best) ||
            (patch.distance(w) == patch.distance(best) && w < best))
          best = w;
    frag.center = best;
    DiskGrowth g = grow_flat_disk(patch, best, patch.radius());
    frag.disk_radius = static_cast<int>(g.triangles.size());
    out.push_back(std::move(frag));
  }
  return out;
}

const char* str(PairKind kind) {
  switch (kind) {
    case PairKind::Disjoint:
      return "disjoint";
    case PairKind::Colle:
      return "colle";
    case PairKind::TypeU:
      return "type-u";
    case PairKind::TypeV:
      return "type-v";
    default:
      return "unclassified";
  }
}

namespace {

std::vector<std::pair<VertexId, VertexId>> fragmentEdges(const ComplexPatch& patch, const BandFragment& b) {
  std::vector<std::pair<VertexId, VertexId>> out;
  for (FaceRef sq : b.squares) {
    auto vs = patch.faceVertices(sq);
    for (std::size_t k = 0; k < vs.size(); ++k) {
      VertexId x = vs[k], y = vs[(k + 1) % vs.size()];
      out.emplace_back(std::min(x, y), std::max(x, y));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

PairClass classify_band_pair(const ComplexPatch& patch, const BandFragment& b1, const BandFragment& b2) {
  if (b1.band == b2.band) throw std::invalid_argument("classify_band_pair needs two different bands");
  PairClass out;
  out.truncated = b1.truncated || b2.truncated;
  auto v1 = fragmentVertices(b1), v2 = fragmentVertices(b2);
  std::vector<VertexId> common;
  std::set_intersection(v1.begin(), v1.end(), v2.begin(), v2.end(), std::back_inserter(common));
  out.commonVertices = common.size();
  if (common.empty()) return out;
  auto e1 = fragmentEdges(patch, b1), e2 = fragmentEdges(patch, b2);
  std::vector<std::pair<VertexId, VertexId>> shared;
  std::set_intersection(e1.begin(), e1.end(), e2.begin(), e2.end(), std::back_inserter(shared));
  if (!shared.empty()) {
    // Glued along a boundary line: every common vertex lies on the c-line of both.
    bool onLines = std::all_of(common.begin(), common.end(), [&](VertexId v) {
      return std::find(b1.cLine.begin(), b1.cLine.end(), v) != b1.cLine.end() &&
             std::find(b2.cLine.begin(), b2.cLine.end(), v) != b2.cLine.end();
    });
    out.kind = onLines ? PairKind::Colle : PairKind::Unclassified;
    return out;
  }
  if (common.size() != 1) {
    out.kind = PairKind::Unclassified;
    return out;
  }
  const VertexId x = common[0];
  out.centromere = x;
  if (!patch.isInterior(x)) {
    out.truncated = true;
    out.kind = PairKind::Unclassified;
    return out;
  }
  LocalLink link = patch.linkAt(x);
  std::set<FaceRef> sq1(b1.squares.begin(), b1.squares.end()), sq2(b2.squares.begin(), b2.squares.end());
  std::vector<int> trace1, trace2;
  AngleValue len1, len2;
  for (std::size_t e = 0; e < link.corners.size(); ++e) {
    if (sq1.count(link.corners[e].face)) trace1.push_back(static_cast<int>(e)), len1 = len1 + link.graph.edges()[e].length;
    if (sq2.count(link.corners[e].face)) trace2.push_back(static_cast<int>(e)), len2 = len2 + link.graph.edges()[e].length;
  }
  if (!(len1 == AngleValue::pi()) || !(len2 == AngleValue::pi())) {
    out.kind = PairKind::Unclassified;
    return out;
  }
  std::optional<AngleValue> best;
  for (const LinkCycle& c : link.graph.simpleCycles()) {
    auto has = [&](int e) { return std::find(c.edges.begin(), c.edges.end(), e) != c.edges.end(); };
    if (std::all_of(trace1.begin(), trace1.end(), has) && std::all_of(trace2.begin(), trace2.end(), has))
      if (!best || c.length < *best) best = c.length;
  }
  out.cycleLength = best;
  const AngleValue withU = AngleValue::twoPi() + AngleValue::u() * Rational(2);
  const AngleValue withV = AngleValue::twoPi() + AngleValue::v() * Rational(2);
  if (best && *best == withU)
    out.kind = PairKind::TypeU;
  else if (best && *best == withV)
    out.kind = PairKind::TypeV;
  else
    out.kind = PairKind::Unclassified;
  return out;
}

Segment band_flat_intersection(const ComplexPatch& patch, const BandFragment& b, int flat) {
  const Development& dev = patch.dev();
  const BandGeometry g = bandGeometry(dev, b.band);
  Segment s;
  if (g.cFlat == flat) {
    s.vertices = b.cLine;
    s.direction = Lc;
  } else if (g.otherFlat == flat) {
    s.vertices = b.otherLine;
    s.direction = b.stable == Ls ? La : Lb;
  } else {
    return s;
  }
  s.straight = true;
  for (std::size_t k = 0; k + 1 < s.vertices.size(); ++k) {
    VertexId x = s.vertices[k], y = s.vertices[k + 1];
    if (x == kNoVertex || y == kNoVertex || dev.flatOf(x) != flat || dev.flatOf(y) != flat ||
        dev.peek(x, s.direction) != y)
      s.straight = false;
  }
  return s;
}

ChromosomeCensus chromosome_census(const ComplexPatch& patch) {
  ChromosomeCensus out;
  std::vector<BandFragment> frags;
  absl::flat_hash_map<int, std::vector<int>> byBand;
  auto fragmentFor = [&](int band, std::int64_t k) {
    auto& list = byBand[band];
    for (int idx : list)
      if (frags[idx].k0 <= k && k <= frags[idx].k1) return idx;
    frags.push_back(fragmentOf(patch, band, k));
    list.push_back(static_cast<int>(frags.size() - 1));
    return static_cast<int>(frags.size() - 1);
  };
  absl::flat_hash_set<std::uint64_t> donePairs;
  for (VertexId x : patch.vertices()) {
    auto corners = patch.patchCornersAt(x);
    if (corners.size() != 16) continue;
    ++out.verticesChecked;
    std::vector<int> here;
    for (const Corner& c : corners) {
      if (c.face.type < kSquareS) continue;
      auto [band, k] = bandOfSquare(patch.dev(), c.face);
      int idx = fragmentFor(band, k);
      if (std::find(here.begin(), here.end(), idx) == here.end()) here.push_back(idx);
    }
    for (std::size_t p = 0; p < here.size(); ++p)
      for (std::size_t q = p + 1; q < here.size(); ++q) {
        int i = std::min(here[p], here[q]), j = std::max(here[p], here[q]);
        if (frags[i].band == frags[j].band) continue;
        if (!donePairs.insert((static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j)).second) continue;
        PairClass c = classify_band_pair(patch, frags[i], frags[j]);
        ++out.pairs;
        switch (c.kind) {
          case PairKind::Colle:
            ++out.colle;
            break;
          case PairKind::TypeU:
            ++out.typeU;
            break;
          case PairKind::TypeV:
            ++out.typeV;
            break;
          default:
            ++out.unclassified;
            if (c.truncated) ++out.truncated;
            break;
        }
      }
  }
  return out;
}

}  // namespace wise
