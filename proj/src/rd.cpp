#include "wise/rd.hpp"

#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace wise {

BallLayout::BallLayout(Development& dev, const Ball& ball) : dev_(&dev), ball_(&ball) {
  const std::size_t n = ball.size();
  vertex_.resize(n);
  words_.resize(n);
  inverse_.resize(n);
  at_.reserve(n);
  vertex_[0] = dev.base();
  at_[dev.base()] = 0;
  for (std::uint32_t g = 1; g < n; ++g) {
    const std::uint32_t p = ball.parent(g);
    const Letter x = ball.lastLetter(g);
    vertex_[g] = dev.step(vertex_[p], x);
    words_[g] = words_[p];
    words_[g].push_back(x);
    at_[vertex_[g]] = g;
  }
  for (std::uint32_t g = 0; g < n; ++g) {
    const auto inv = elementAt(dev.walk(dev.base(), wise::inverse(words_[g])));
    if (!inv) throw std::logic_error("ball not closed under inversion");
    inverse_[g] = *inv;
  }
}

std::optional<std::uint32_t> BallLayout::elementAt(VertexId v) const {
  auto it = at_.find(v);
  if (it == at_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> BallLayout::product(std::uint32_t g, std::uint32_t h) const {
  return elementAt(dev_->walk(vertex_[g], words_[h]));
}

bool isGeodesic80(const BallLayout& L, const ThreePath& p, std::uint32_t z) {
  return L.length(p.a1) + L.length(p.a2) + L.length(p.a3) <= 8 * L.length(z);
}

bool meetsCaps(const BallLayout& L, const ThreePath& p, std::uint32_t z, int r) {
  if (L.length(z) < r) return true;
  return L.length(p.a1) <= 3 * r && L.length(p.a2) <= r;
}

namespace {

Envelope reducedEnvelopeOf(const BallLayout& L, std::uint32_t z) {
  Development& dev = L.dev();
  const Geodesic g = geodesic(dev, dev.base(), L.vertex(L.inverse(z)));
  return reduce_envelope(analytic_envelope(dev, g));
}

}  // namespace

std::vector<VertexId> envelopeOf(const BallLayout& L, std::uint32_t z) {
  return envelope_vertices(L.dev(), reducedEnvelopeOf(L, z));
}

std::vector<ThreePath> three_path_candidates(const BallLayout& L, std::uint32_t z, PatchPolicy policy,
                                             ThreePathFamily* stats) {
  const std::vector<VertexId> verts = envelopeOf(L, z);
  // Element at each envelope vertex: P = p^-1 for the candidate p.
  std::vector<std::uint32_t> at;
  at.reserve(verts.size());
  for (VertexId v : verts) {
    if (auto g = L.elementAt(v)) {
      at.push_back(*g);
    } else if (policy == PatchPolicy::Strict) {
      throw InsufficientPatch("envelope vertex outside the ball");
    }
  }
  const int budget = 8 * L.length(z);
  std::size_t dropped = 0;
  std::vector<ThreePath> out;
  for (std::uint32_t Q : at) {
    // a3 = z q^-1 = z Q
    const auto a3 = L.product(z, Q);
    const std::uint32_t q = L.inverse(Q);
    for (std::uint32_t P : at) {
      const std::uint32_t a1 = L.inverse(P);
      // a2 = q p^-1 = q P
      const auto a2 = L.product(q, P);
      if (!a2 || !a3) {
        ++dropped;
        continue;
      }
      ThreePath t{*a3, *a2, a1};
      if (L.length(t.a1) + L.length(t.a2) + L.length(t.a3) <= budget) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  if (stats) {
    stats->envelopeVertices = verts.size();
    stats->outsidePatch = dropped;
  }
  return out;
}

ThreePathFamily three_paths(const BallLayout& L, std::uint32_t z, int r, PatchPolicy policy) {
  ThreePathFamily fam;
  fam.z = z;
  fam.r = r;
  for (const ThreePath& t : three_path_candidates(L, z, policy, &fam))
    if (meetsCaps(L, t, z, r)) fam.members.push_back(t);
  return fam;
}

std::vector<std::vector<ThreePath>> three_paths_bruteforce(const BallLayout& L, std::uint32_t z, int rMax) {
  Development& dev = L.dev();
  const Envelope h = reducedEnvelopeOf(L, z);
  absl::flat_hash_map<VertexId, bool> inside;
  auto member = [&](VertexId v) {
    auto [it, fresh] = inside.try_emplace(v, false);
    if (fresh) it->second = h.containsPoint(dev, vertexPoint(dev, v));
    return it->second;
  };
  const int budget = 8 * L.length(z);
  std::vector<ThreePath> all;
  for (std::uint32_t a1 = 0; a1 < L.size(); ++a1) {
    const int l1 = L.length(a1);
    if (l1 > budget) break;
    // Vertex standing for a1 is the vertex of a1^-1.
    const VertexId v1 = L.vertex(L.inverse(a1));
    if (!member(v1)) continue;
    for (std::uint32_t a2 = 0; a2 < L.size(); ++a2) {
      const int l2 = L.length(a2);
      if (l1 + l2 > budget) break;
      // (a2 a1)^-1 = a1^-1 a2^-1
      const VertexId v2 = dev.walk(v1, L.word(L.inverse(a2)));
      if (!member(v2)) continue;
      const auto m = L.elementAt(v2);  // (a2 a1)^-1
      if (!m) continue;
      const auto a3 = L.product(z, *m);
      if (!a3) continue;
      if (l1 + l2 + L.length(*a3) <= budget) all.push_back({*a3, a2, a1});
    }
  }
  std::sort(all.begin(), all.end());
  std::vector<std::vector<ThreePath>> fams(rMax + 1);
  for (int r = 0; r <= rMax; ++r)
    for (const ThreePath& t : all)
      if (meetsCaps(L, t, z, r)) fams[r].push_back(t);
  return fams;
}

FitResult polyfit_loglog(const std::vector<std::pair<double, double>>& table) {
  if (table.size() < 3) throw DegenerateData("need at least three points");
  std::vector<double> xs, ys;
  for (auto [r, v] : table) {
    if (!(r > 0) || !(v > 0)) throw DegenerateData("nonpositive value in log-log fit");
    xs.push_back(std::log(r));
    ys.push_back(std::log(v));
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (sxx == 0) throw DegenerateData("all radii equal");
  FitResult f;
  f.exponent = sxy / sxx;
  const double intercept = my - f.exponent * mx;
  f.constant = std::exp(intercept);
  double ss = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double e = ys[k] - (intercept + f.exponent * xs[k]);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

namespace {

FitResult fitRows(const std::vector<GrowthRow>& rows) {
  std::vector<std::pair<double, double>> t;
  for (const GrowthRow& g : rows) t.emplace_back(g.r, static_cast<double>(g.maxCount));
  return polyfit_loglog(t);
}

}  // namespace

GrowthAudit growth_audit(const BallLayout& L, int zRadius, int rMax) {
  GrowthAudit audit;
  audit.rows.resize(rMax);
  for (int r = 1; r <= rMax; ++r) audit.rows[r - 1].r = r;
  const std::size_t n = L.ball().sizeAt(zRadius);
  for (std::uint32_t z = 0; z < n; ++z) {
    ++audit.elements;
    ThreePathFamily stats;
    std::vector<ThreePath> cand;
    try {
      cand = three_path_candidates(L, z, PatchPolicy::Strict, &stats);
    } catch (const InsufficientPatch&) {
      ++audit.skipped;
      continue;
    }
    audit.outsidePatch += stats.outsidePatch;
    for (GrowthRow& row : audit.rows) {
      const auto c = static_cast<std::size_t>(
          std::count_if(cand.begin(), cand.end(), [&](const ThreePath& t) { return meetsCaps(L, t, z, row.r); }));
      if (c > row.maxCount) {
        row.maxCount = c;
        row.argmax = z;
      }
    }
  }
  audit.fit = fitRows(audit.rows);
  return audit;
}

GrowthAudit envelope_growth_audit(Development& dev, const std::vector<VertexId>& targets, int rMax) {
  GrowthAudit audit;
  audit.rows.resize(rMax);
  for (int r = 1; r <= rMax; ++r) audit.rows[r - 1].r = r;
  DistanceField fromBase(dev, vertexPoint(dev, dev.base()));
  for (std::size_t k = 0; k < targets.size(); ++k) {
    ++audit.elements;
    const Geodesic g = geodesic(dev, dev.base(), targets[k]);
    const std::vector<VertexId> verts = envelope_vertices(dev, reduce_envelope(analytic_envelope(dev, g)));
    std::vector<double> d;
    d.reserve(verts.size());
    for (VertexId v : verts) d.push_back(fromBase.toVertex(v));
    for (GrowthRow& row : audit.rows) {
      const auto c = static_cast<std::size_t>(
          std::count_if(d.begin(), d.end(), [&](double x) { return x <= row.r + 1e-9; }));
      if (c > row.maxCount) {
        row.maxCount = c;
        row.argmax = static_cast<std::uint32_t>(k);
      }
    }
  }
  audit.fit = fitRows(audit.rows);
  return audit;
}

namespace {

using Cell = std::array<std::int64_t, 2>;

// Corner offsets of the simplicial isosceles triangle of size n.
std::array<Cell, 3> shape(std::int64_t n, bool upper) {
  if (upper) return {Cell{0, 0}, Cell{0, n}, Cell{n, n}};
  return {Cell{0, 0}, Cell{n, 0}, Cell{n, n}};
}

// Third corners X of the triangles having 0 and Z as two of their corners.
std::vector<Cell> thirdCorners(const Cell& Z) {
  std::vector<Cell> out;
  const std::int64_t n = std::max(std::abs(Z[0]), std::abs(Z[1]));
  if (n == 0) return {Cell{0, 0}};  // the point triangle
  for (bool upper : {false, true}) {
    const auto c = shape(n, upper);
    for (int s = 0; s < 3; ++s)
      for (int t = 0; t < 3; ++t) {
        if (s == t) continue;
        if (c[t][0] - c[s][0] != Z[0] || c[t][1] - c[s][1] != Z[1]) continue;
        const int u = 3 - s - t;
        out.push_back({c[u][0] - c[s][0], c[u][1] - c[s][1]});
      }
  }
  return out;
}

// Direct test: are p, q, w the corners of one simplicial triangle (or one point)?
bool simplicialCorners(const Cell& p, const Cell& q, const Cell& w) {
  if (p == q && q == w) return true;
  std::array<Cell, 3> pts{p, q, w};
  std::sort(pts.begin(), pts.end());
  for (bool upper : {false, true})
    for (std::int64_t n = 1; n <= std::abs(q[0] - p[0]) + std::abs(q[1] - p[1]) + std::abs(w[0] - p[0]) +
                                      std::abs(w[1] - p[1]);
         ++n)
      for (const Cell& P : pts) {
        auto c = shape(n, upper);
        for (Cell& x : c) x = {x[0] + P[0], x[1] + P[1]};
        std::sort(c.begin(), c.end());
        if (c == pts) return true;
      }
  return false;
}

}  // namespace

FlatTriangleCensus flat_triangle_census(const BallLayout& L, int zRadius, int rMax) {
  Development& dev = L.dev();
  FlatTriangleCensus census;
  const std::size_t n = L.ball().sizeAt(zRadius);
  // Elements whose vertex lies in the flat through the base, for the oracle.
  std::vector<std::uint32_t> flatElems;
  for (std::uint32_t g = 0; g < L.size(); ++g)
    if (dev.flatOf(L.vertex(g)) == 0) flatElems.push_back(g);
  auto lengthAt = [&](const Cell& X) -> int {
    const VertexId v = dev.findVertex(0, static_cast<std::int32_t>(X[0]), static_cast<std::int32_t>(X[1]));
    if (v == kNoVertex) return -1;
    const auto g = L.elementAt(v);
    return g ? L.length(*g) : -1;  // -1: beyond the ball
  };
  for (std::uint32_t z = 0; z < n; ++z) {
    FlatTriangleRow row;
    row.z = z;
    row.counts.assign(rMax + 1, 0);
    std::vector<std::size_t> oracle(rMax + 1, 0);
    const VertexId zv = L.vertex(L.inverse(z));
    if (dev.flatOf(zv) == 0) {
      const Cell Z{dev.coordI(zv), dev.coordJ(zv)};
      for (const Cell& X : thirdCorners(Z)) {
        const int l = lengthAt(X);
        if (l < 0) continue;
        for (int r = l; r <= rMax; ++r) ++row.counts[r];
      }
      for (std::uint32_t g : flatElems) {
        const VertexId v = L.vertex(g);
        const Cell X{dev.coordI(v), dev.coordJ(v)};
        if (!simplicialCorners(Cell{0, 0}, X, Z)) continue;
        for (int r = L.length(g); r <= rMax; ++r) ++oracle[r];
      }
    }
    row.oracleAgrees = oracle == row.counts;
    row.saturation = rMax;
    while (row.saturation > 0 && row.counts[row.saturation - 1] == row.counts[rMax]) --row.saturation;
    census.oracleAgrees = census.oracleAgrees && row.oracleAgrees;
    census.maxCount = std::max(census.maxCount, row.counts[rMax]);
    census.maxSaturation = std::max(census.maxSaturation, row.saturation);
    census.rows.push_back(std::move(row));
  }
  // Constant over at least the last two radii for every z.
  census.constantBeyondSaturation = census.maxSaturation <= rMax - 2;
  return census;
}

namespace {

// Word of the element standing for vertex v (the inverse of the word read to v).
Word standingFor(const Development& dev, VertexId v) { return inverse(dev.wordOf(v)); }

std::vector<VertexId> commonVertices(Development& dev, const Envelope* env[3]) {
  std::vector<VertexId> acc = envelope_vertices(dev, *env[0]);
  for (int k = 1; k < 3; ++k) {
    const std::vector<VertexId> next = envelope_vertices(dev, *env[k]);
    std::vector<VertexId> keep;
    std::set_intersection(acc.begin(), acc.end(), next.begin(), next.end(), std::back_inserter(keep));
    acc.swap(keep);
  }
  return acc;
}

bool inVertexSet(Development& dev, const Envelope& h, VertexId v) {
  return h.containsPoint(dev, vertexPoint(dev, v));
}

}  // namespace

RetractAudit retract_audit(const BallLayout& L, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& xz,
                           int patchRadius) {
  Development& dev = L.dev();
  RetractAudit audit;
  PatchMargin margin(dev, L.ball(), patchRadius);
  TriangleOptions opts;
  opts.patchRadius = patchRadius;
  std::map<int, int> maxU;
  for (auto [x, z] : xz) {
    const Triangle t{dev.base(), L.vertex(L.inverse(x)), L.vertex(L.inverse(z))};
    TriangleEnvelopes te = triangle_envelopes(dev, t, opts);
    try {
      margin.require(te, true);
    } catch (const InsufficientPatch&) {
      ++audit.skipped;
      continue;
    }
    RetractWitness w;
    w.x = L.word(x);
    w.z = L.word(z);
    w.lx = L.length(x);
    // Corners standing for P (near e), Q (near x) and R (near z).
    VertexId K[3] = {kNoVertex, kNoVertex, kNoVertex};
    const ReductionOutcome out = triangle_reduce(dev, te, opts);
    if (out.kind == ReductionOutcome::Kind::ResidualTriangle) {
      const auto cs = out.residual.corners();
      VertexId cv[3];
      for (int k = 0; k < 3; ++k)
        cv[k] = dev.vertexAt(out.residual.flat, static_cast<std::int32_t>(cs[k][0]),
                             static_cast<std::int32_t>(cs[k][1]));
      const VertexId tv[3] = {t.A, t.B, t.C};
      std::array<int, 3> perm{0, 1, 2}, best = perm;
      double bestCost = std::numeric_limits<double>::infinity();
      do {
        double cost = 0;
        for (int k = 0; k < 3; ++k) cost += catDistance(dev, vertexPoint(dev, tv[k]), vertexPoint(dev, cv[perm[k]]));
        if (cost < bestCost - 1e-12) {
          bestCost = cost;
          best = perm;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      for (int k = 0; k < 3; ++k) K[k] = cv[best[k]];
      w.route = "residual";
    } else {
      const Envelope* red[3] = {&te.reduced[0], &te.reduced[1], &te.reduced[2]};
      std::vector<VertexId> common = commonVertices(dev, red);
      w.route = "point";
      if (common.empty()) {
        const Envelope* sat[3] = {&te.saturatedReduced[0], &te.saturatedReduced[1], &te.saturatedReduced[2]};
        common = commonVertices(dev, sat);
        w.route = "saturated-point";
      }
      if (common.empty()) {
        ++audit.failures;
        continue;
      }
      K[0] = K[1] = K[2] = common.front();
    }
    const Word P = standingFor(dev, K[0]), Q = standingFor(dev, K[1]), R = standingFor(dev, K[2]);
    w.u = free_reduce(concat(Q, inverse(P)));
    w.v = free_reduce(concat(R, inverse(Q)));
    w.w = free_reduce(concat(R, inverse(P)));
    w.a = free_reduce(P);
    w.b = free_reduce(concat(Q, inverse(w.x)));
    w.c = free_reduce(concat(R, inverse(w.z)));
    const NormalForm lhsX(concat(concat(inverse(w.b), w.u), w.a));
    const NormalForm lhsZ(concat(concat(inverse(w.c), w.w), w.a));
    const NormalForm vu(concat(w.v, w.u));
    w.replayed = lhsX == NormalForm(w.x) && lhsZ == NormalForm(w.z) && vu == NormalForm(w.w);
    // AB, BC, AC: P on AB and AC, Q on AB and BC, R on BC and AC.
    w.legsInEnvelopes = inVertexSet(dev, te.saturatedReduced[0], K[0]) &&
                        inVertexSet(dev, te.saturatedReduced[2], K[0]) &&
                        inVertexSet(dev, te.saturatedReduced[0], K[1]) &&
                        inVertexSet(dev, te.saturatedReduced[1], K[1]) &&
                        inVertexSet(dev, te.saturatedReduced[1], K[2]) &&
                        inVertexSet(dev, te.saturatedReduced[2], K[2]);
    const auto lu = L.ball().lengthOf(NormalForm(w.u), L.ball().radius() + 2);
    w.lu = lu ? *lu : -1;
    audit.allReplay = audit.allReplay && w.replayed;
    if (w.lx > 0 && w.lu >= 0) {
      audit.maxRatio = std::max(audit.maxRatio, static_cast<double>(w.lu) / w.lx);
      int& m = maxU[w.lx];
      m = std::max(m, w.lu);
    }
    audit.witnesses.push_back(std::move(w));
  }
  std::vector<std::pair<double, double>> table;
  for (auto [lx, lu] : maxU)
    if (lu > 0) table.emplace_back(lx, lu);
  if (table.size() >= 3) audit.fit = polyfit_loglog(table);
  return audit;
}

std::vector<double> rdWeights(const BallLayout& L, int r, RdWeight weight, std::uint64_t seed) {
  const std::size_t n = L.ball().sizeAt(r);
  std::vector<double> f(n, 1.0);
  if (weight == RdWeight::Random) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (double& x : f) x = normal(rng);
  }
  const double norm = std::sqrt(std::inner_product(f.begin(), f.end(), f.begin(), 0.0));
  for (double& x : f) x /= norm;
  return f;
}

namespace {

double norm2(const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

// Truncated convolution by f: rows[y * nR + z] is the codomain index of yz.
struct Convolution {
  std::vector<double> f;
  std::size_t nR = 0, nCod = 0;
  std::vector<std::uint32_t> rows;

  void apply(const std::vector<double>& g, std::vector<double>& out) const {
    out.assign(nCod, 0.0);
    for (std::size_t y = 0; y < f.size(); ++y) {
      const double fy = f[y];
      if (fy == 0) continue;
      const std::uint32_t* row = &rows[y * nR];
      for (std::size_t z = 0; z < nR; ++z) out[row[z]] += fy * g[z];
    }
  }
  void adjoint(const std::vector<double>& h, std::vector<double>& out) const {
    out.assign(nR, 0.0);
    for (std::size_t y = 0; y < f.size(); ++y) {
      const double fy = f[y];
      if (fy == 0) continue;
      const std::uint32_t* row = &rows[y * nR];
      for (std::size_t z = 0; z < nR; ++z) out[z] += fy * h[row[z]];
    }
  }
  double gain(const std::vector<double>& g) const {
    std::vector<double> h;
    apply(g, h);
    return norm2(h);
  }
};

Convolution buildConvolution(const BallLayout& L, int R, const std::vector<double>& f) {
  Development& dev = L.dev();
  const Ball& ball = L.ball();
  Convolution c;
  c.f = f;
  c.nR = ball.sizeAt(R);
  const std::size_t nr = f.size();
  c.rows.resize(nr * c.nR);
  for (std::size_t y = 0; y < nr; ++y) {
    std::uint32_t* row = &c.rows[y * c.nR];
    row[0] = L.vertex(static_cast<std::uint32_t>(y));
    for (std::uint32_t z = 1; z < c.nR; ++z) row[z] = dev.step(row[ball.parent(z)], ball.lastLetter(z));
  }
  // Vertices to dense codomain indices, in order of first appearance.
  std::vector<std::uint32_t> index(dev.vertexCount(), 0xFFFFFFFFu);
  for (std::uint32_t& v : c.rows) {
    if (index[v] == 0xFFFFFFFFu) index[v] = static_cast<std::uint32_t>(c.nCod++);
    v = index[v];
  }
  return c;
}

}  // namespace

RdEstimate rd_constant_estimate(const BallLayout& L, int r, int R, const RdOptions& opts,
                                const std::vector<double>* warm) {
  if (r < 0 || R < 0 || std::max(r, R) > L.ball().radius()) throw std::out_of_range("radius beyond the ball");
  RdEstimate e;
  e.r = r;
  e.R = R;
  const std::vector<double> f = rdWeights(L, r, opts.weight, opts.seed);
  double l1 = 0;
  for (double x : f) l1 += std::abs(x);
  e.youngCeiling = l1;  // f is a unit vector
  const Convolution conv = buildConvolution(L, R, f);
  e.products = conv.rows.size();
  std::vector<double> chi(conv.nR, 1.0 / std::sqrt(static_cast<double>(conv.nR)));
  e.lowerBound = conv.gain(chi);
  if (opts.method == RdMethod::Characteristic) return e;

  // Start from the better of chi_R and the warm vector; the power iteration on
  // the normal operator never decreases ||T g|| from there.
  std::vector<double> g = chi;
  double sigma = e.lowerBound;
  if (warm && !warm->empty() && warm->size() <= conv.nR) {
    std::vector<double> w(conv.nR, 0.0);
    std::copy(warm->begin(), warm->end(), w.begin());
    const double nw = norm2(w);
    if (nw > 0) {
      for (double& x : w) x /= nw;
      const double s = conv.gain(w);
      if (s > sigma) {
        sigma = s;
        g = std::move(w);
      }
    }
  }
  std::vector<double> h, next;
  e.converged = false;
  for (e.iterations = 1; e.iterations <= opts.maxIterations; ++e.iterations) {
    conv.apply(g, h);
    conv.adjoint(h, next);
    const double nn = norm2(next);
    if (nn == 0) break;
    for (double& x : next) x /= nn;
    const double s = conv.gain(next);
    const bool done = s - sigma <= opts.tolerance * s;
    if (s >= sigma) {
      sigma = s;
      g.swap(next);
    }
    if (done) {
      e.converged = true;
      break;
    }
  }
  e.iterations = std::min(e.iterations, opts.maxIterations);
  e.powerIterBound = sigma;
  e.topVector = std::move(g);
  return e;
}

RdScan rd_scan(const BallLayout& L, int rMin, int rMax, int RMin, int RMax, const RdOptions& opts,
               std::size_t maxProducts) {
  RdScan scan;
  const Ball& ball = L.ball();
  const double slack = 1e-12;
  for (int r = rMin; r <= rMax; ++r) {
    std::vector<double> warm;
    double prev = -1;
    for (int R = RMin; R <= RMax; ++R) {
      if (std::max(r, R) > ball.radius() ||
          static_cast<double>(ball.sizeAt(r)) * static_cast<double>(ball.sizeAt(R)) > static_cast<double>(maxProducts)) {
        scan.beyondBudget.emplace_back(r, R);
        continue;
      }
      RdScanRow row;
      row.r = r;
      row.R = R;
      row.estimate = rd_constant_estimate(L, r, R, opts, warm.empty() ? nullptr : &warm);
      const RdEstimate& e = row.estimate;
      if (opts.method == RdMethod::PowerIteration) {
        scan.lowerBelowPower = scan.lowerBelowPower && e.lowerBound <= e.powerIterBound * (1 + slack);
        scan.belowYoung = scan.belowYoung && e.powerIterBound <= e.youngCeiling * (1 + slack);
        if (prev >= 0) scan.monotoneInR = scan.monotoneInR && e.powerIterBound >= prev * (1 - slack);
        prev = e.powerIterBound;
        warm = e.topVector;
      } else {
        scan.belowYoung = scan.belowYoung && e.lowerBound <= e.youngCeiling * (1 + slack);
      }
      row.estimate.topVector.clear();
      row.estimate.topVector.shrink_to_fit();
      scan.rows.push_back(std::move(row));
    }
  }
  // Slope in r at each R over the rows computed there.
  std::map<int, std::vector<std::pair<double, double>>> byR;
  for (const RdScanRow& row : scan.rows) {
    const double v = opts.method == RdMethod::PowerIteration ? row.estimate.powerIterBound : row.estimate.lowerBound;
    if (row.r >= 1) byR[row.R].emplace_back(row.r, v);
  }
  for (RdScanRow& row : scan.rows) {
    const auto& t = byR[row.R];
    if (t.size() >= 3) row.fitSlope = polyfit_loglog(t).exponent;
  }
  std::sort(scan.rows.begin(), scan.rows.end(),
            [](const RdScanRow& a, const RdScanRow& b) { return std::pair(a.r, a.R) < std::pair(b.r, b.R); });
  return scan;
}

}  // namespace wise
