#pragma once

#include "wise/geodesic.hpp"

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wise {

// a*i + b*j <= c in lattice coordinates of a flat.
struct LatticeHalfPlane {
  int a = 0, b = 0;
  std::int64_t c = 0;
  bool holds(double i, double j, double tol = 1e-9) const { return a * i + b * j <= c + tol; }
  bool operator==(const LatticeHalfPlane&) const = default;
};

enum class EnvelopeKind { Analytic, Reduced, Saturated, SaturatedReduced };
enum class PieceTag { Band, FlatRegion, ChromosomeSector, HalfPlane, GluedChromosome, Flat, Point };

const char* str(EnvelopeKind k);
const char* str(PieceTag t);

struct EnvelopePiece {
  PieceTag tag = PieceTag::Band;
  int flat = -1;  // flat pieces
  int band = -1;  // Band and GluedChromosome
  std::vector<LatticeHalfPlane> constraints;  // empty for a whole flat
  XPoint point;  // Point

  bool isBand() const { return band >= 0; }
};

struct Envelope {
  EnvelopeKind kind = EnvelopeKind::Analytic;
  std::vector<EnvelopePiece> pieces;
  Geodesic source;
  // Reduced kinds: closed ball about the midpoint of the source.
  XPoint center;
  double radius = std::numeric_limits<double>::infinity();

  bool reduced() const { return kind == EnvelopeKind::Reduced || kind == EnvelopeKind::SaturatedReduced; }
  bool hasBand(int band) const;
  std::vector<int> bands() const;
  // Flats carrying a region, a whole-flat piece or a side of a band.
  std::vector<int> flatsTouched(const Development& dev) const;
  // Membership in the underlying (untruncated) set.
  bool inSurface(const Development& dev, const XPoint& p, double tol = 1e-9) const;
  bool containsPoint(const Development& dev, const XPoint& p, double tol = 1e-9) const;
};

struct EnvelopeOptions {
  // Whether a contact at an endpoint of the geodesic counts toward the "two
  // points" defining the glued chromosomes Q. Off: interior points only.
  bool endpointContacts = false;
};

Envelope analytic_envelope(Development& dev, const Geodesic& g, const EnvelopeOptions& opts = {});
Envelope reduce_envelope(const Envelope& h);
Envelope saturate_envelope(const Development& dev, const Envelope& h);

// Vertices of X in a reduced envelope, sorted.
std::vector<VertexId> envelope_vertices(Development& dev, const Envelope& h);
// Same vertices, unsorted and possibly repeated; stops when visit returns false.
// Returns false when stopped early.
bool for_each_envelope_vertex(Development& dev, const Envelope& h, const std::function<bool(VertexId)>& visit);

// Number of collé chromosomes whose membership in Q differs between the two
// contact readings.
int glued_reading_divergence(Development& dev, const Geodesic& g);

// Signed offset of a lattice point from a line's functional (j, i or i - j).
double lineValue(const LatticeLine& line, double i, double j);

// ---- Triangle reduction ----

struct Triangle {
  VertexId A = kNoVertex, B = kNoVertex, C = kNoVertex;
};

struct FlatTriangle {
  int flat = -1;
  std::int64_t i = 0, j = 0;  // corner P; the corners are P, P+nA, P+n(A+B) or P, P+nB, P+n(A+B)
  std::int64_t n = 0;
  bool upper = false;  // second orientation
  std::vector<std::array<std::int64_t, 2>> corners() const;
};

struct ReductionOutcome {
  enum class Kind { TripleIntersection, ResidualTriangle, Violation };
  Kind kind = Kind::Violation;
  XPoint witness;              // TripleIntersection
  FlatTriangle residual;       // ResidualTriangle
  std::string detail;
};

const char* str(ReductionOutcome::Kind k);

struct TriangleOptions {
  int patchRadius = 10;   // margin: every envelope vertex has word length <= this
  int sideSamples = 48;
  EnvelopeOptions envelope;
};

struct LemmaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Envelopes of the three sides of a triangle, computed once.
struct TriangleEnvelopes {
  Triangle t;
  Geodesic side[3];  // [AB], [BC], [AC]
  Envelope reduced[3];
  Envelope saturatedReduced[3];
  double shortest() const;
};

TriangleEnvelopes triangle_envelopes(Development& dev, const Triangle& t, const TriangleOptions& opts = {});

// Margin check against the patch ball: cheap flat-path bound first, exact
// word length otherwise. Lengths are cached across calls.
class PatchMargin {
 public:
  PatchMargin(Development& dev, const Ball& ball, int radius) : dev_(dev), ball_(ball), radius_(radius) {}
  int radius() const { return radius_; }
  bool inside(VertexId v);
  // Throws InsufficientPatch when a vertex of the envelope leaves the ball.
  void require(const Envelope& h);
  void require(const TriangleEnvelopes& te, bool saturated);

 private:
  Development& dev_;
  const Ball& ball_;
  int radius_;
  absl::flat_hash_map<VertexId, bool> cache_;
};

ReductionOutcome triangle_reduce(Development& dev, const TriangleEnvelopes& te, const TriangleOptions& opts = {});
ReductionOutcome triangle_reduce(Development& dev, const Triangle& t, const TriangleOptions& opts = {});
// Every band met by one side is met by one of the other two.
bool check_frizes(Development& dev, const Triangle& t);
// The balls about the side midpoints, of radius twice the side, share the shortest side.
bool check_midpoint_balls(Development& dev, const Triangle& t, int samples = 32);
// Throws LemmaError when no common point of the saturated reduced envelopes is found.
XPoint triangle_reduce_saturated(Development& dev, const TriangleEnvelopes& te, const TriangleOptions& opts = {});

// A point common to the three envelopes, if the search finds one.
std::optional<XPoint> common_point(Development& dev, const Envelope* env[3], const Geodesic* sides[3],
                                   int sideSamples);

}  // namespace wise
