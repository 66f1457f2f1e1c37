#pragma once

#include "wise/group.hpp"

#include <boost/rational.hpp>

#include <compare>
#include <string>
#include <vector>

namespace wise {

using Rational = boost::rational<std::int64_t>;

// v = arccos(1/4) and u = arccos(7/8) = pi - 2v.
long double angleV();
long double angleU();

// m*v + n*(pi/2). Equality is coefficient equality (v/pi is irrational);
// ordering uses the numeric value.
struct AngleValue {
  Rational m{0}, n{0};

  static AngleValue zero() { return {}; }
  static AngleValue u() { return {Rational(-2), Rational(2)}; }
  static AngleValue v() { return {Rational(1), Rational(0)}; }
  static AngleValue halfPi() { return {Rational(0), Rational(1)}; }
  static AngleValue pi() { return {Rational(0), Rational(2)}; }
  static AngleValue twoPi() { return {Rational(0), Rational(4)}; }

  long double value() const;
  std::string str() const;

  AngleValue operator+(const AngleValue& o) const { return {m + o.m, n + o.n}; }
  AngleValue operator-(const AngleValue& o) const { return {m - o.m, n - o.n}; }
  AngleValue operator*(const Rational& k) const { return {m * k, n * k}; }
  bool operator==(const AngleValue& o) const { return m == o.m && n == o.n; }
  std::partial_ordering operator<=>(const AngleValue& o) const;
};

// The four 2-cells of the presentation complex. Squares keep their
// subdivided c-side, so they are pentagons with one corner of angle pi.
struct FaceShape {
  Word boundary;
  std::vector<AngleValue> corners;  // corner k sits between boundary[k] and boundary[k+1]
  std::vector<double> sides;        // side k is boundary[k]
};
const std::vector<FaceShape>& presentationFaces();
double edgeLength(Letter x);  // 1 for a, b, s, t and 1/2 for c

struct LinkEdge {
  int v0 = 0, v1 = 0;
  AngleValue length;
  int face = 0, corner = 0;
  bool bold = false;
};

// A point of L: a vertex, or the point at parameter t from v0 on an edge.
struct LinkPoint {
  int vertex = -1;
  int edge = -1;
  Rational t{0};
  static LinkPoint atVertex(int v) { return LinkPoint{v, -1, Rational(0)}; }
  static LinkPoint onEdge(int e, Rational t) { return LinkPoint{-1, e, t}; }
  bool operator==(const LinkPoint&) const = default;
};

struct LinkCycle {
  std::vector<int> edges;     // in cyclic order
  std::vector<int> vertices;  // vertices[k] is the start of edges[k]
  AngleValue length;
};

enum class CycleKind { Bold, Mixed, NonBoldPiPi, NonBoldHalfHalfPi, NonBoldFourHalves };
const char* str(CycleKind kind);

struct CycleClass {
  CycleKind kind;
  LinkCycle cycle;
  AngleValue length;
};

struct CommonCycle {
  LinkCycle cycle;
  AngleValue length;
  bool unique = false;
  AngleValue runnerUp;  // length of the next common cycle (zero if none)
};

struct ClassificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Metric graph on germs. The germ of letter x at a vertex p is the edge from
// p to p*x; a face corner between boundary letters x, y joins germs x^-1 and y.
class LinkGraph {
 public:
  static LinkGraph build();
  static LinkGraph fromEdges(std::vector<Letter> germs, std::vector<LinkEdge> edges);

  const std::vector<Letter>& germs() const { return germs_; }
  const std::vector<LinkEdge>& edges() const { return edges_; }
  int vertexOf(Letter germ) const;

  AngleValue distance(const LinkPoint& p, const LinkPoint& q) const;
  // Every vertex-simple cycle, parallel edges giving 2-cycles.
  const std::vector<LinkCycle>& simpleCycles() const;
  // Zero coefficients if the graph is a forest.
  AngleValue girth() const;
  std::vector<CycleClass> enumerate2PiCycles() const;
  // Throws std::invalid_argument unless distance(p, q) > pi.
  CommonCycle smallestCommonCycle(const LinkPoint& p, const LinkPoint& q) const;
  bool cycleContains(const LinkCycle& c, const LinkPoint& p) const;

  LinkGraph withoutEdge(int e) const;
  // Label-preserving isomorphism of metric graphs (edge multisets agree).
  bool sameAs(const LinkGraph& other) const;

 private:
  std::vector<Letter> germs_;
  std::vector<LinkEdge> edges_;
  mutable std::vector<LinkCycle> cycles_;
  mutable bool cyclesReady_ = false;
};

LinkGraph build_link();

}  // namespace wise
