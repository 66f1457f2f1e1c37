#include "wise/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace wise {

// ---- Configuration ----

Json RunConfig::toJson() const {
  Json j;
  j["subcommand"] = subcommand;
  j["radius"] = radius;
  j["z_radius"] = zRadius;
  j["sample"] = sample;
  j["seed"] = seed;
  j["area_constant"] = areaConstant;
  j["subdivision"] = subdivision;
  j["rmax"] = rmax;
  j["domain"] = domain;
  j["method"] = method;
  j["from"] = from;
  j["to"] = to;
  j["a"] = a;
  j["b"] = b;
  j["c"] = c;
  j["format"] = format;
  return j;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"build-ball",      "link-audit", "envelope", "triangle-reduce",
                                              "branching-audit", "rd-scan",    "report"};
  return names;
}

namespace {

void need(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

Word wordOrThrow(const std::string& text, const char* name) {
  try {
    return parseWord(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

void validate(RunConfig& cfg) {
  const auto& names = subcommands();
  need(std::find(names.begin(), names.end(), cfg.subcommand) != names.end(),
       "unknown subcommand '" + cfg.subcommand + "'");
  const std::string& sc = cfg.subcommand;
  if (cfg.radius < 0) {
    if (sc == "build-ball") cfg.radius = 2;
    else if (sc == "branching-audit") cfg.radius = 6;
    else if (sc == "report") cfg.radius = 4;
    else if (sc == "triangle-reduce") cfg.radius = 10;
    else cfg.radius = 0;
  }
  if (cfg.format.empty()) cfg.format = sc == "rd-scan" ? "csv" : "json";
  need(cfg.format == "json" || cfg.format == "csv", "format must be json or csv");
  need(cfg.format == "json" || sc == "rd-scan" || sc == "branching-audit",
       "csv output is available for rd-scan and branching-audit");
  need(cfg.radius <= 12, "radius must be at most 12");
  need(sc != "build-ball" || cfg.radius <= 7, "build-ball radius must be at most 7");
  need(sc != "report" || cfg.radius <= 6, "report radius must be at most 6");
  need(sc != "branching-audit" || (cfg.radius >= 2 && cfg.radius <= 8), "branching-audit radius must be in [2, 8]");
  need(cfg.zRadius >= 0 && cfg.zRadius <= 4, "z-radius must be in [0, 4]");
  need(sc != "branching-audit" || cfg.zRadius < cfg.radius, "z-radius must be below the radius");
  need(cfg.sample >= 1 && cfg.sample <= 100000, "sample must be in [1, 100000]");
  need(cfg.subdivision >= 1 && cfg.subdivision <= 64, "subdivision must be in [1, 64]");
  need(std::isfinite(cfg.areaConstant) && cfg.areaConstant > 0, "area constant must be positive");
  need(cfg.rmax >= 1 && cfg.rmax <= 8, "rmax must be in [1, 8]");
  need(sc != "branching-audit" || cfg.rmax >= 3, "branching-audit needs rmax >= 3 for a fit");
  need(sc != "rd-scan" || cfg.rmax <= 7, "rd-scan rmax must be at most 7");
  need(cfg.domain >= 0 && cfg.domain <= 7, "domain must be in [0, 7]");
  need(cfg.method == "power" || cfg.method == "characteristic", "method must be power or characteristic");
  wordOrThrow(cfg.from, "from");
  wordOrThrow(cfg.to, "to");
  wordOrThrow(cfg.a, "a");
  wordOrThrow(cfg.b, "b");
  wordOrThrow(cfg.c, "c");
}

std::string configHash(const RunConfig& cfg) {
  const std::string text = cfg.toJson().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ResourceCaps resourceCaps() {
  ResourceCaps caps;
  caps.maxElements = maxElements();
  if (const char* env = std::getenv("WISE_MAX_MEMORY_MB")) caps.memoryHintMB = std::strtoull(env, nullptr, 10);
  return caps;
}

double projectedBallSize(int radius) {
  static const double sizes[] = {1, 11, 83, 569, 3781, 24917, 163911, 1077547, 7083177};
  if (radius <= 8) return sizes[std::max(radius, 0)];
  return sizes[8] * std::pow(sizes[8] / sizes[7], radius - 8);
}

void requireBall(int radius) {
  const ResourceCaps caps = resourceCaps();
  const double n = projectedBallSize(radius);
  if (n > static_cast<double>(caps.maxElements))
    throw ResourceLimit("ball(" + std::to_string(radius) + ") exceeds WISE_MAX_ELEMENTS");
  // Measured footprint of a ball and its layout: about 500 bytes per element.
  if (caps.memoryHintMB > 0 && n * 500.0 / (1 << 20) > static_cast<double>(caps.memoryHintMB))
    throw ResourceLimit("ball(" + std::to_string(radius) + ") exceeds WISE_MAX_MEMORY_MB");
}

const char* str(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Skipped: return "skipped";
  }
  return "?";
}

void AuditReport::check(const std::string& name, bool pass, const std::string& reason) {
  verdicts.push_back({name, pass ? Status::Pass : Status::Fail, reason});
}

void AuditReport::skip(const std::string& name, const std::string& reason) {
  verdicts.push_back({name, Status::Skipped, reason});
}

bool AuditReport::allPass() const {
  return std::none_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.status == Status::Fail; });
}

// ---- Plot data ----

namespace {

std::string csvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

std::string emit_plot_data(const Table& t) {
  if (t.columns.empty() || t.rows.empty()) throw std::invalid_argument("empty table");
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    if (cells.size() != t.columns.size()) throw std::invalid_argument("ragged table row");
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += csvField(cells[k]);
    }
    out += '\n';
  };
  line(t.columns);
  for (const auto& row : t.rows) line(row);
  return out;
}

Table parse_plot_data(const std::string& csv) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t k = 0; k < csv.size(); ++k) {
    const char ch = csv[k];
    if (quoted) {
      if (ch == '"' && k + 1 < csv.size() && csv[k + 1] == '"') {
        cell += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
      continue;
    }
    any = true;
    if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch == '\n') {
      cells.push_back(std::move(cell));
      cell.clear();
      lines.push_back(std::move(cells));
      cells.clear();
      any = false;
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quote");
  if (any) {
    cells.push_back(std::move(cell));
    lines.push_back(std::move(cells));
  }
  if (lines.empty()) throw std::invalid_argument("empty CSV");
  Table t;
  t.columns = std::move(lines.front());
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].size() != t.columns.size()) throw std::invalid_argument("ragged CSV row");
    t.rows.push_back(std::move(lines[k]));
  }
  return t;
}

std::string formatNumber(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

Table growthTable(const GrowthAudit& g) {
  Table t;
  t.columns = {"r", "max_count", "fit"};
  for (const GrowthRow& row : g.rows)
    t.rows.push_back({std::to_string(row.r), std::to_string(row.maxCount),
                      formatNumber(g.fit.constant * std::pow(row.r, g.fit.exponent))});
  return t;
}

Table rdTable(const RdScan& s, int onlyR) {
  Table t;
  t.columns = {"r", "R", "lower_bound", "power_bound", "fit_slope"};
  for (const RdScanRow& row : s.rows) {
    if (onlyR >= 0 && row.R != onlyR) continue;
    t.rows.push_back({std::to_string(row.r), std::to_string(row.R), formatNumber(row.estimate.lowerBound),
                      formatNumber(row.estimate.powerIterBound), formatNumber(row.fitSlope)});
  }
  return t;
}

// ---- Shared audits ----

Word randomWord(std::mt19937_64& rng, int maxLength) {
  std::uniform_int_distribution<int> len(0, maxLength), pick(0, kLetterCount - 1);
  Word w;
  for (int k = len(rng); k > 0; --k) w.push_back(kAllLetters[pick(rng)]);
  return w;
}

EqualityAudit equality_audit(int pairs, std::uint64_t seed, double areaConstant) {
  EqualityAudit a;
  std::mt19937_64 rng(seed);
  const auto& rel = RelatorSet::instance().words();
  Development dev;
  for (int n = 0; n < pairs; ++n) {
    Word w1 = randomWord(rng, 10), w2;
    if (n % 2) {
      w2 = w1;
      for (int k = 0; k < 3; ++k) {
        const std::size_t pos = std::uniform_int_distribution<std::size_t>(0, w2.size())(rng);
        const Word& r = rel[std::uniform_int_distribution<std::size_t>(0, rel.size() - 1)(rng)];
        w2.insert(w2.begin() + static_cast<std::ptrdiff_t>(pos), r.begin(), r.end());
      }
    } else {
      w2 = randomWord(rng, 10);
    }
    ++a.pairs;
    const std::int64_t bound = areaBoundFor(w1, w2, areaConstant);
    const EqualityVerdict v = equal_in_G(w1, w2, bound), back = equal_in_G(w2, w1, bound);
    const bool same = dev.walk(dev.base(), w1) == dev.walk(dev.base(), w2);
    using K = EqualityVerdict::Kind;
    switch (v.kind) {
      case K::Equal:
        ++a.equal;
        if (!replay(v.witness, w1, w2)) ++a.replayFailures;
        if (!same) ++a.contradictions;
        break;
      case K::DistinctCertified:
        ++a.distinct;
        if (same) ++a.contradictions;
        break;
      case K::UnknownWithinBound:
        ++a.unknown;
        break;
    }
    if ((v.kind == K::Equal && back.kind == K::DistinctCertified) ||
        (v.kind == K::DistinctCertified && back.kind == K::Equal))
      ++a.contradictions;
  }
  return a;
}

Json TriangleSuite::toJson() const {
  Json j;
  j["triangles"] = triangles;
  j["skipped_margin"] = skipped;
  j["frizes_pass"] = frizes;
  j["midpoint_balls_pass"] = midpoint;
  j["reduce_pass"] = reduce;
  j["saturated_pass"] = saturated;
  Json o = Json::object();
  for (auto& [k, n] : outcomes) o[k] = n;
  j["outcomes"] = o;
  j["failures"] = failures;
  return j;
}

bool triangle_suite_add(TriangleSuite& s, Development& dev, PatchMargin* margin, const Triangle& t,
                        const TriangleOptions& opts) {
  TriangleEnvelopes te = triangle_envelopes(dev, t, opts);
  if (margin) {
    try {
      margin->require(te, true);
    } catch (const InsufficientPatch&) {
      ++s.skipped;
      return false;
    }
  }
  ++s.triangles;
  auto fail = [&](const std::string& what) {
    if (s.failures.size() < 10)
      s.failures.push_back(what + " at (" + str(dev.wordOf(t.A)) + ", " + str(dev.wordOf(t.B)) + ", " +
                           str(dev.wordOf(t.C)) + ")");
  };
  if (check_frizes(dev, t)) ++s.frizes;
  else fail("frizes");
  if (check_midpoint_balls(dev, t)) ++s.midpoint;
  else fail("midpoint balls");
  const ReductionOutcome o = triangle_reduce(dev, te, opts);
  ++s.outcomes[str(o.kind)];
  if (o.kind != ReductionOutcome::Kind::Violation) ++s.reduce;
  else fail("reduction: " + o.detail);
  try {
    triangle_reduce_saturated(dev, te, opts);
    ++s.saturated;
  } catch (const LemmaError& e) {
    fail(std::string("saturated: ") + e.what());
  }
  return true;
}

// ---- Subcommands ----

namespace {

Json fitJson(const FitResult& f) {
  Json j;
  j["exponent"] = f.exponent;
  j["constant"] = f.constant;
  j["residual"] = f.residual;
  return j;
}

Json angleJson(const AngleValue& a) {
  Json j;
  j["m"] = a.m.numerator() * 1.0 / a.m.denominator();
  j["n"] = a.n.numerator() * 1.0 / a.n.denominator();
  j["text"] = a.str();
  return j;
}

Json growthJson(const GrowthAudit& g) {
  Json j;
  Json rows = Json::array();
  for (const GrowthRow& row : g.rows) rows.push_back({{"r", row.r}, {"max_count", row.maxCount}});
  j["rows"] = rows;
  j["fit"] = fitJson(g.fit);
  j["elements"] = g.elements;
  j["skipped_patch"] = g.skipped;
  j["dropped_outside_patch"] = g.outsidePatch;
  return j;
}

VertexId vertexOfWord(Development& dev, const std::string& w) { return dev.walk(dev.base(), parseWord(w)); }

Json pieceJson(const EnvelopePiece& p) {
  Json j;
  j["tag"] = str(p.tag);
  if (p.flat >= 0) j["flat"] = p.flat;
  if (p.band >= 0) j["band"] = p.band;
  if (!p.constraints.empty()) {
    Json cs = Json::array();
    for (const LatticeHalfPlane& h : p.constraints) cs.push_back({h.a, h.b, h.c});
    j["constraints"] = cs;
  }
  return j;
}

}  // namespace

AuditReport link_audit(const RunConfig& cfg) {
  AuditReport r;
  r.kind = "link-audit";
  const LinkGraph L = build_link();
  r.body["vertices"] = L.germs().size();
  r.body["edges"] = L.edges().size();
  r.check("link.size", L.germs().size() == 10 && L.edges().size() == 16, "10 germs and 16 corners");
  const AngleValue girth = L.girth();
  r.body["girth"] = angleJson(girth);
  r.check("link.girth", girth == AngleValue::twoPi(), "girth 2pi, coefficients (0,4)");

  std::map<CycleKind, int> census;
  for (const CycleClass& c : L.enumerate2PiCycles()) ++census[c.kind];
  Json cj = Json::object();
  for (CycleKind k : {CycleKind::Bold, CycleKind::Mixed, CycleKind::NonBoldPiPi, CycleKind::NonBoldHalfHalfPi,
                      CycleKind::NonBoldFourHalves})
    cj[str(k)] = census[k];
  r.body["cycles_2pi"] = cj;
  const int bold = census[CycleKind::Bold], pp = census[CycleKind::NonBoldPiPi],
            hhp = census[CycleKind::NonBoldHalfHalfPi], fh = census[CycleKind::NonBoldFourHalves];
  r.check("link.census", bold == 1 && pp == 1 && hhp == 4 && fh == 1, "1 bold; non-bold split 1/4/1");

  // Lemma: points at distance > pi lie on a unique smallest cycle of length 2pi+2u or 2pi+2v.
  const AngleValue withU = AngleValue::twoPi() + AngleValue::u() * Rational(2);
  const AngleValue withV = AngleValue::twoPi() + AngleValue::v() * Rational(2);
  std::vector<LinkPoint> pts;
  for (int v = 0; v < static_cast<int>(L.germs().size()); ++v) pts.push_back(LinkPoint::atVertex(v));
  for (int e = 0; e < static_cast<int>(L.edges().size()); ++e)
    for (int k = 1; k < cfg.subdivision; ++k) pts.push_back(LinkPoint::onEdge(e, Rational(k, cfg.subdivision)));
  int far = 0, good = 0, lenU = 0, lenV = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (!(L.distance(pts[i], pts[j]) > AngleValue::pi())) continue;
      ++far;
      const CommonCycle c = L.smallestCommonCycle(pts[i], pts[j]);
      const bool ok = c.unique && (c.length == withU || c.length == withV);
      good += ok;
      lenU += c.length == withU;
      lenV += c.length == withV;
    }
  r.body["lemma_pairs"] = far;
  r.body["lemma_2pi_plus_2u"] = lenU;
  r.body["lemma_2pi_plus_2v"] = lenV;
  r.check("link.lemma", far > 0 && good == far,
          std::to_string(good) + "/" + std::to_string(far) + " far pairs on a unique cycle of length 2pi+2u or 2pi+2v");
  const long double gap = std::abs(angleU() + 2 * angleV() - std::acos(-1.0L));
  r.body["angle_identity_error"] = static_cast<double>(gap);
  r.check("link.angle_identity", gap < 1e-12L, "arccos(7/8) + 2 arccos(1/4) = pi");
  return r;
}

AuditReport build_ball(const RunConfig& cfg) {
  AuditReport r;
  r.kind = "patch";
  requireBall(cfg.radius);
  const Ball ball(cfg.radius);
  const ComplexPatch patch = build_patch(cfg.radius);
  Development& dev = patch.dev();
  const auto& verts = patch.vertices();
  absl::flat_hash_map<VertexId, std::size_t> index;
  for (std::size_t k = 0; k < verts.size(); ++k) index[verts[k]] = k;
  r.body["radius"] = cfg.radius;
  r.body["ball_size"] = ball.size();
  Json vj = Json::array();
  for (std::size_t k = 0; k < verts.size(); ++k) {
    const VertexId v = verts[k];
    vj.push_back({{"id", k},
                  {"flat", dev.flatOf(v)},
                  {"i", dev.coordI(v)},
                  {"j", dev.coordJ(v)},
                  {"distance", patch.distance(v)},
                  {"word", str(dev.wordOf(v))}});
  }
  Json ej = Json::array();
  for (std::size_t k = 0; k < verts.size(); ++k)
    for (Letter x : kAllLetters) {
      if (x.inverse()) continue;
      const VertexId w = dev.peek(verts[k], x);
      if (w == kNoVertex || !patch.contains(w)) continue;
      ej.push_back({{"from", k}, {"to", index.at(w)}, {"label", std::string(1, x.symbol())}});
    }
  Json fj = Json::array();
  patch.forEachFace([&](FaceRef f) {
    Json ids = Json::array();
    for (VertexId v : patch.faceVertices(f)) ids.push_back(index.at(v));
    fj.push_back({{"type", static_cast<int>(f.type)}, {"vertices", ids}});
  });
  r.body["vertices"] = vj;
  r.body["edges"] = ej;
  r.body["faces"] = fj;
  const SingularLocus locus = singular_locus(patch);
  Json ann;
  ann["singular_edges"] = locus.singular.size();
  ann["nonsingular_edges"] = locus.nonsingular.size();
  ann["truncated_edges"] = locus.truncated.size();
  ann["singular_vertices"] = locus.singularVertices.size();
  ann["band_fragments"] = detect_bands(patch).size();
  ann["flat_fragments"] = detect_flats(patch).size();
  r.body["annotations"] = ann;
  r.check("ball.patch_vertex_count", ball.size() == verts.size(),
          std::to_string(ball.size()) + " group elements, " + std::to_string(verts.size()) + " patch vertices");
  return r;
}

AuditReport envelope_report(const RunConfig& cfg) {
  AuditReport r;
  r.kind = "envelope";
  Development dev;
  const VertexId x = vertexOfWord(dev, cfg.from), y = vertexOfWord(dev, cfg.to);
  GeodesicOptions gopts;
  gopts.refine = cfg.subdivision;
  const Geodesic g = geodesic(dev, x, y, gopts);
  const Envelope h = analytic_envelope(dev, g);
  const Envelope red = reduce_envelope(h);
  const Envelope sat = saturate_envelope(dev, h);
  r.body["from"] = str(dev.wordOf(x));
  r.body["to"] = str(dev.wordOf(y));
  r.body["length"] = g.length;
  r.body["bands_met"] = g.bandsMet();
  Json pieces = Json::array();
  for (const EnvelopePiece& p : h.pieces) pieces.push_back(pieceJson(p));
  r.body["analytic_pieces"] = pieces;
  r.body["saturated_pieces"] = sat.pieces.size();
  const std::vector<VertexId> verts = envelope_vertices(dev, red);
  r.body["reduced_vertices"] = verts.size();
  r.body["reduced_radius"] = red.radius;
  bool contains = true;
  for (int k = 0; k <= 32; ++k) contains = contains && h.containsPoint(dev, g.pointAt(g.length * k / 32.0));
  r.check("envelope.contains_geodesic", contains, "33 points of the geodesic lie in H");
  bool inside = true;
  for (VertexId v : verts) {
    const XPoint p = vertexPoint(dev, v);
    inside = inside && h.containsPoint(dev, p) && sat.containsPoint(dev, p) &&
             catDistance(dev, red.center, p) <= red.radius + 1e-9;
  }
  r.check("envelope.reduced_in_analytic", inside, "vertices of H' lie in H, in the saturation and in the ball");
  const double refined = x == y ? 0.0 : refinedGraphLength(dev, x, y, cfg.subdivision);
  r.body["refined_graph_length"] = refined;
  r.check("envelope.refined_bound", g.length <= refined + 1e-9, "geodesic no longer than the refined graph path");
  r.body["glued_reading_divergence"] = glued_reading_divergence(dev, g);
  return r;
}

AuditReport triangle_report(const RunConfig& cfg) {
  AuditReport r;
  r.kind = "triangle-reduce";
  Development dev;
  const Triangle t{vertexOfWord(dev, cfg.a), vertexOfWord(dev, cfg.b), vertexOfWord(dev, cfg.c)};
  TriangleOptions opts;
  opts.patchRadius = cfg.radius;
  const TriangleEnvelopes te = triangle_envelopes(dev, t, opts);
  const ReductionOutcome o = triangle_reduce(dev, te, opts);
  r.body["corners"] = {str(dev.wordOf(t.A)), str(dev.wordOf(t.B)), str(dev.wordOf(t.C))};
  r.body["sides"] = {te.side[0].length, te.side[1].length, te.side[2].length};
  r.body["outcome"] = str(o.kind);
  if (o.kind == ReductionOutcome::Kind::ResidualTriangle) {
    Json cs = Json::array();
    for (auto c : o.residual.corners()) cs.push_back({c[0], c[1]});
    r.body["residual"] = {{"flat", o.residual.flat}, {"n", o.residual.n}, {"upper", o.residual.upper}, {"corners", cs}};
  }
  if (!o.detail.empty()) r.body["detail"] = o.detail;
  r.check("triangle.frizes", check_frizes(dev, t));
  r.check("triangle.midpoint_balls", check_midpoint_balls(dev, t));
  r.check("triangle.reduce", o.kind != ReductionOutcome::Kind::Violation, o.detail);
  try {
    triangle_reduce_saturated(dev, te, opts);
    r.check("triangle.reduce_saturated", true);
  } catch (const LemmaError& e) {
    r.check("triangle.reduce_saturated", false, e.what());
  }
  return r;
}

AuditReport branching_audit(const RunConfig& cfg) {
  AuditReport r;
  r.kind = "branching-audit";
  requireBall(cfg.radius);
  const Ball ball(cfg.radius);
  Development dev;
  const BallLayout L(dev, ball);
  r.body["patch_radius"] = cfg.radius;
  r.body["z_radius"] = cfg.zRadius;

  const GrowthAudit growth = growth_audit(L, cfg.zRadius, cfg.rmax);
  r.body["three_path_growth"] = growthJson(growth);
  r.check("branching.p1_exponent", growth.fit.exponent <= 6.5,
          "fitted exponent " + formatNumber(growth.fit.exponent) + " <= 6.5");

  std::mt19937_64 rng(cfg.seed);
  std::vector<VertexId> targets;
  for (int k = 0; k < cfg.sample; ++k) targets.push_back(dev.walk(dev.base(), randomWord(rng, 10)));
  const GrowthAudit env = envelope_growth_audit(dev, targets, cfg.rmax);
  r.body["envelope_growth"] = growthJson(env);
  r.check("branching.envelope_exponent", env.fit.exponent <= 3.5,
          "fitted exponent " + formatNumber(env.fit.exponent) + " <= 3.5");

  const int censusR = std::min(cfg.rmax, cfg.radius);
  const FlatTriangleCensus census = flat_triangle_census(L, cfg.zRadius, censusR);
  r.body["flat_triangles"] = {{"z_count", census.rows.size()},
                              {"max_count", census.maxCount},
                              {"max_saturation", census.maxSaturation},
                              {"r_max", censusR}};
  r.check("branching.p3_oracle", census.oracleAgrees, "census equals the per-flat enumeration");
  r.check("branching.p3_constant", census.constantBeyondSaturation,
          "counts constant from r = " + std::to_string(census.maxSaturation));

  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(ball.sizeAt(cfg.zRadius) - 1));
  std::vector<std::pair<std::uint32_t, std::uint32_t>> xz;
  for (int k = 0; k < cfg.sample; ++k) xz.emplace_back(pick(rng), pick(rng));
  const RetractAudit ret = retract_audit(L, xz, cfg.radius + 4);
  Json wj = Json::array();
  std::map<std::string, int> routes;
  for (const RetractWitness& w : ret.witnesses) {
    ++routes[w.route];
    wj.push_back({{"x", str(w.x)}, {"z", str(w.z)}, {"route", w.route}, {"u", str(w.u)}, {"a", str(w.a)},
                  {"lx", w.lx}, {"lu", w.lu}, {"replayed", w.replayed}, {"legs_in_envelopes", w.legsInEnvelopes}});
  }
  Json rj;
  rj["triangles"] = xz.size();
  rj["witnesses"] = ret.witnesses.size();
  rj["skipped_margin"] = ret.skipped;
  rj["failures"] = ret.failures;
  rj["max_ratio_u_over_x"] = ret.maxRatio;
  rj["fit"] = fitJson(ret.fit);
  Json rt = Json::object();
  for (auto& [k, n] : routes) rt[k] = n;
  rj["routes"] = rt;
  rj["records"] = wj;
  r.body["retract"] = rj;
  r.check("branching.retract", ret.failures == 0, std::to_string(ret.failures) + " retract failures");
  r.check("branching.retract_replay", ret.allReplay, "b^-1 u a = x and c^-1 w a = z for every witness");
  if (cfg.format == "csv") r.csv = emit_plot_data(growthTable(growth));
  return r;
}

AuditReport rd_scan_report(const RunConfig& cfg) {
  AuditReport r;
  r.kind = "rd-scan";
  const int radius = std::max(cfg.rmax, cfg.domain);
  requireBall(radius);
  const Ball ball(radius);
  Development dev;
  const BallLayout L(dev, ball);
  RdOptions opts;
  opts.method = cfg.method == "power" ? RdMethod::PowerIteration : RdMethod::Characteristic;
  opts.seed = cfg.seed;
  const RdScan scan = rd_scan(L, 1, cfg.rmax, std::min(1, cfg.domain), cfg.domain, opts, 30'000'000);
  Json rows = Json::array();
  bool converged = true;
  for (const RdScanRow& row : scan.rows) {
    converged = converged && row.estimate.converged;
    rows.push_back({{"r", row.r},
                    {"R", row.R},
                    {"lower_bound", row.estimate.lowerBound},
                    {"power_bound", row.estimate.powerIterBound},
                    {"young", row.estimate.youngCeiling},
                    {"iterations", row.estimate.iterations},
                    {"fit_slope", row.fitSlope}});
  }
  r.body["rows"] = rows;
  Json beyond = Json::array();
  for (auto [a, b] : scan.beyondBudget) beyond.push_back({a, b});
  r.body["beyond_budget"] = beyond;
  if (opts.method == RdMethod::PowerIteration) {
    r.check("rd.lower_below_power", scan.lowerBelowPower);
    r.check("rd.monotone_in_R", scan.monotoneInR);
    r.check("rd.converged", converged, "relative tolerance 1e-8 within 10^4 iterations");
  } else {
    r.skip("rd.lower_below_power", "characteristic method computes no operator norm");
    r.skip("rd.monotone_in_R", "characteristic method computes no operator norm");
  }
  r.check("rd.young_ceiling", scan.belowYoung);
  r.check("rd.coverage", scan.beyondBudget.empty(), std::to_string(scan.beyondBudget.size()) + " pairs beyond budget");
  if (cfg.format == "csv") r.csv = emit_plot_data(rdTable(scan, cfg.domain));
  return r;
}

AuditReport full_report(const RunConfig& cfg) {
  AuditReport r;
  r.kind = "report";
  auto absorb = [&](const std::string& key, AuditReport part) {
    r.body[key] = part.body;
    for (Verdict& v : part.verdicts) r.verdicts.push_back(std::move(v));
  };
  absorb("link", link_audit(cfg));

  Json balls = Json::array();
  bool agree = true;
  for (int k = 0; k <= cfg.radius; ++k) {
    const Ball ball(k);
    const ComplexPatch patch = build_patch(k);
    agree = agree && ball.size() == patch.vertices().size();
    balls.push_back({{"r", k}, {"ball", ball.size()}, {"patch", patch.vertices().size()}});
  }
  r.body["ball_vs_patch"] = balls;
  r.check("cover.ball_equals_patch", agree, "r <= " + std::to_string(cfg.radius));

  const EqualityAudit eq = equality_audit(cfg.sample * 5, cfg.seed, cfg.areaConstant);
  r.body["equality"] = {{"pairs", eq.pairs},
                        {"equal", eq.equal},
                        {"distinct", eq.distinct},
                        {"unknown", eq.unknown},
                        {"contradictions", eq.contradictions},
                        {"replay_failures", eq.replayFailures}};
  r.check("group.no_contradictions", eq.contradictions == 0 && eq.replayFailures == 0);

  {
    Development dev;
    std::mt19937_64 rng(cfg.seed);
    TriangleSuite suite;
    for (int k = 0; k < cfg.sample; ++k) {
      const Triangle t{dev.walk(dev.base(), randomWord(rng, 5)), dev.walk(dev.base(), randomWord(rng, 5)),
                       dev.walk(dev.base(), randomWord(rng, 5))};
      triangle_suite_add(suite, dev, nullptr, t);
    }
    r.body["triangles"] = suite.toJson();
    r.check("envelope.frizes", suite.frizes == suite.triangles);
    r.check("envelope.midpoint_balls", suite.midpoint == suite.triangles);
    r.check("envelope.reduce", suite.reduce == suite.triangles);
    r.check("envelope.reduce_saturated", suite.saturated == suite.triangles);
  }

  RunConfig sub = cfg;
  sub.radius = std::max(cfg.radius, 3);
  sub.zRadius = 1;
  sub.rmax = 6;
  sub.sample = std::min(cfg.sample, 20);
  sub.format = "json";
  absorb("branching", branching_audit(sub));
  sub.rmax = 3;
  sub.domain = 2;
  sub.method = "power";
  absorb("rd", rd_scan_report(sub));
  return r;
}

AuditReport run_subcommand(const RunConfig& cfg) {
  const std::string& sc = cfg.subcommand;
  if (sc == "build-ball") return build_ball(cfg);
  if (sc == "link-audit") return link_audit(cfg);
  if (sc == "envelope") return envelope_report(cfg);
  if (sc == "triangle-reduce") return triangle_report(cfg);
  if (sc == "branching-audit") return branching_audit(cfg);
  if (sc == "rd-scan") return rd_scan_report(cfg);
  if (sc == "report") return full_report(cfg);
  throw ConfigError("unknown subcommand '" + sc + "'");
}

std::string render(const AuditReport& r, const RunConfig& cfg) {
  if (cfg.format == "csv") return r.csv;
  Json j;
  j["schema"] = "wise." + r.kind + "/1";
  Json prov;
  prov["tool"] = "wisetool";
  prov["version"] = kToolVersion;
  prov["json_library"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  prov["config"] = cfg.toJson();
  prov["config_hash"] = configHash(cfg);
  prov["seed"] = cfg.seed;
  j["provenance"] = prov;
  Json vs = Json::array();
  for (const Verdict& v : r.verdicts) vs.push_back({{"name", v.name}, {"status", str(v.status)}, {"reason", v.reason}});
  j["verdicts"] = vs;
  j["all_pass"] = r.allPass();
  for (auto& [k, v] : r.body.items()) j[k] = v;
  return j.dump(2) + "\n";
}

int run(RunConfig cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  AuditReport report;
  try {
    report = run_subcommand(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceLimit& e) {
    err << "resource limit: " << e.what() << "\n";
    return 3;
  } catch (const InsufficientPatch& e) {
    err << "resource limit: " << e.what() << "\n";
    return 3;
  } catch (const LemmaError& e) {
    err << "lemma violation: " << e.what() << "\n";
    return 1;
  } catch (const RetractFailure& e) {
    err << "lemma violation: " << e.what() << "\n";
    return 1;
  }
  const std::string text = render(report, cfg);
  const std::string& path = cfg.subcommand == "build-ball" && !cfg.emit.empty() ? cfg.emit : cfg.out;
  if (path.empty() || path == "-") {
    out << text;
  } else {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) {
      err << "config error: cannot write " << path << "\n";
      return 2;
    }
  }
  for (const Verdict& v : report.verdicts)
    if (v.status == Status::Fail) err << "FAIL " << v.name << (v.reason.empty() ? "" : ": " + v.reason) << "\n";
  return report.exitCode();
}

}  // namespace wise
