#pragma once

#include "wise/cover.hpp"

#include <Eigen/Core>

#include <absl/container/flat_hash_map.h>

#include <stdexcept>
#include <vector>

namespace wise {

using Vec2 = Eigen::Vector2d;

// Planar chart of a flat: vertex (i, j) sits at i*A + j*B with |A| = |B| = 1
// and |A + B| = 1/2, so a-, b- and c-edges have lengths 1, 1 and 1/2.
Vec2 latticeA();
Vec2 latticeB();
Vec2 latticeC();
Vec2 latticePoint(double i, double j);
// Lattice coordinates (i, j) of a planar point.
Vec2 latticeCoords(const Vec2& p);

// A point of X. Flat points carry planar chart coordinates; band points use
// (w, p) with w in (0, 1) across the band (0 on the c-side) and p along it,
// p = k on the rung between squares k-1 and k.
struct XPoint {
  int flat = -1;
  int band = -1;
  Vec2 pos = Vec2::Zero();

  static XPoint inFlat(int f, const Vec2& p) { return {f, -1, p}; }
  static XPoint inBand(int b, double w, double p) { return {-1, b, Vec2(w, p)}; }
  bool inBandInterior() const { return band >= 0; }
};

XPoint vertexPoint(const Development& dev, VertexId v);
// Moves band points with w = 0 or w = 1 to the flat chart.
XPoint canonical(const Development& dev, const XPoint& p);
// Planar position of band parameter t on the given side of a band.
Vec2 bandSidePoint(const Development& dev, int band, bool cSide, double t);
// Parameter t of a planar point lying on a line of the band.
double bandSideParam(const Development& dev, int band, bool cSide, const Vec2& p);
// Planar unit direction of a lattice line and a point on it.
Vec2 lineDirection(const LatticeLine& line);
Vec2 lineOrigin(const LatticeLine& line);
// Signed lattice functional whose level set is the line (j, i, or i - j).
double lineFunctional(const LatticeLine& line, const Vec2& latticeCoords);

struct GeodesicPiece {
  bool band = false;
  int id = -1;
};

// A CAT(0) geodesic: the chain of flats and bands it crosses, the crossing
// parameters on the gluing lines, and per-piece chart segments.
struct Geodesic {
  XPoint from, to;
  std::vector<GeodesicPiece> pieces;
  std::vector<double> cross;  // band parameter at the k-th gluing line
  std::vector<Vec2> start, end;  // chart coordinates of the sub-segment in each piece
  std::vector<double> segment;
  double length = 0;
  int iterations = 0;

  XPoint pointAt(double s) const;
  XPoint midpoint() const { return pointAt(length / 2); }
  // Bands containing an interior point of the geodesic, from the origin on.
  std::vector<int> bandsMet() const;
  // Inside one flat and along a singular line of it.
  bool singular() const;
  bool degenerate() const { return length == 0; }
};

struct GeodesicOptions {
  // When positive, the solved length is checked against the refined graph
  // with this subdivision (an upper bound); 0 skips the check.
  int refine = 0;
};

// Exact geodesic between two points of X (always unique: X is CAT(0)).
Geodesic geodesic(Development& dev, const XPoint& p, const XPoint& q, const GeodesicOptions& opts = {});
Geodesic geodesic(Development& dev, VertexId x, VertexId y, const GeodesicOptions& opts = {});
double catDistance(const Development& dev, const XPoint& p, const XPoint& q);

// Distances from a fixed point, reusing the solved chains between queries.
class DistanceField {
 public:
  DistanceField(const Development& dev, const XPoint& source);
  const XPoint& source() const { return source_; }
  double to(const XPoint& q);
  double toVertex(VertexId v) { return to(vertexPoint(*dev_, v)); }
  double toFlat(int flat, const Vec2& planar) { return to(XPoint::inFlat(flat, planar)); }

 private:
  const Development* dev_;
  XPoint source_;
  struct Warm {
    std::vector<double> t;
  };
  absl::flat_hash_map<std::int64_t, Warm> warm_;
};

struct InsufficientPatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Length of the shortest path in the graph whose nodes are the points at
// parameter j/k on the edges of the faces meeting the region
// {p : d(x, p) + d(p, y) <= d(x, y) + slack}, joined by straight chords
// inside each face.
double refinedGraphLength(Development& dev, VertexId x, VertexId y, int k, double slack = 1.0);

}  // namespace wise
