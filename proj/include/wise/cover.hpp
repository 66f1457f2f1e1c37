#pragma once

#include "wise/group.hpp"
#include "wise/link.hpp"

#include <absl/container/flat_hash_map.h>

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace wise {

using VertexId = std::uint32_t;
inline constexpr VertexId kNoVertex = 0xFFFFFFFFu;

// The universal cover X developed lazily as a tree of flats. Each flat is a
// copy of the lattice Z^2 = <a,b> tiled by the two triangles; the bands of
// squares glue a c-line of one flat to an a-line (s-bands) or a b-line
// (t-bands) of a neighbouring flat. Flat 0 contains the base vertex.
class Development {
 public:
  struct Flat {
    int parent = -1;
    Letter entry{0xFF};  // letter of the edges from the parent into this flat
    std::int32_t ci = 0, cj = 0;  // attaching line: class representative in the parent
    int depth = 0;
  };

  Development();

  VertexId base() const { return 0; }
  VertexId step(VertexId v, Letter x);
  VertexId walk(VertexId v, const Word& w);
  // Like step/walk, but never creates flats or vertices.
  VertexId peek(VertexId v, Letter x) const;
  VertexId peekWalk(VertexId v, const Word& w) const;

  VertexId vertexAt(int flat, std::int32_t i, std::int32_t j);
  VertexId findVertex(int flat, std::int32_t i, std::int32_t j) const;

  std::size_t vertexCount() const { return vflat_.size(); }
  std::size_t flatCount() const { return flats_.size(); }
  const Flat& flat(int f) const { return flats_[f]; }
  int flatOf(VertexId v) const { return vflat_[v]; }
  std::int32_t coordI(VertexId v) const { return vi_[v]; }
  std::int32_t coordJ(VertexId v) const { return vj_[v]; }

  // Child flat across the band of squares leaving `flat` by letter x from the
  // class representative (i, j); -1 if not developed yet (peek) or created.
  int child(int flat, Letter x, std::int32_t i, std::int32_t j);
  int peekChild(int flat, Letter x, std::int32_t i, std::int32_t j) const;

  // Flats on the tree path from f to g, both included.
  std::vector<int> flatPath(int f, int g) const;
  // A word read along a path from the base to v.
  Word wordOf(VertexId v) const;
  // Upper bound on the 1-skeleton distance from the base: exact inside each
  // flat, plus one edge per band crossed on the way from flat 0.
  int lengthUpperBound(VertexId v) const;

 private:
  struct Target {
    bool toParent;
    int flat;  // when toParent
    Letter x;
    std::int32_t ci, cj;  // child class when !toParent
    std::int32_t i, j;    // coordinates in the target flat
  };
  Target resolve(VertexId v, Letter x) const;

  std::vector<Flat> flats_;
  std::vector<std::int32_t> vflat_, vi_, vj_;
  absl::flat_hash_map<std::array<std::int32_t, 3>, VertexId> vindex_;
  absl::flat_hash_map<std::array<std::int32_t, 4>, int> children_;
};

enum FaceType : std::uint8_t { kTriAB = 0, kTriBA = 1, kSquareS = 2, kSquareT = 3 };

// The face of type `type` whose boundary word is read from `base`.
struct FaceRef {
  VertexId base = kNoVertex;
  std::uint8_t type = 0;
  bool operator==(const FaceRef&) const = default;
  auto operator<=>(const FaceRef&) const = default;
};

struct Corner {
  FaceRef face;
  int position = 0;  // vertex index along the boundary word
};

// An edge with positive label from `from` to from*label.
struct EdgeRef {
  VertexId from = kNoVertex;
  Letter label;
  bool operator==(const EdgeRef&) const = default;
};

struct LocalLink {
  LinkGraph graph;              // germs are the 10 letters
  std::vector<Corner> corners;  // corners[k] realizes graph.edges()[k]
};

class ComplexPatch {
 public:
  // Vertices at 1-skeleton distance <= radius from the base vertex; a face
  // belongs to the patch when all its vertices do.
  ComplexPatch(std::shared_ptr<Development> dev, int radius);

  int radius() const { return radius_; }
  Development& dev() const { return *dev_; }
  std::shared_ptr<Development> devPtr() const { return dev_; }
  const std::vector<VertexId>& vertices() const { return order_; }
  int distance(VertexId v) const { return v < dist_.size() ? dist_[v] : -1; }
  bool contains(VertexId v) const { return distance(v) >= 0; }

  // kNoVertex entries when a vertex of the face is not developed yet.
  std::vector<VertexId> faceVertices(FaceRef f) const;
  bool containsFace(FaceRef f) const;
  // Corners at v of the faces lying in the patch; 16 when the star of v is inside.
  std::vector<Corner> patchCornersAt(VertexId v) const;
  bool isInterior(VertexId v) const;
  LocalLink linkAt(VertexId v) const;

  // Faces of X having the edge as a side, and how many of them lie in the patch.
  std::vector<FaceRef> facesOnEdge(EdgeRef e) const;

  std::size_t faceCount() const;
  template <class F>
  void forEachFace(F&& fn) const {
    for (VertexId v : order_)
      for (std::uint8_t t = 0; t < 4; ++t)
        if (containsFace(FaceRef{v, t})) fn(FaceRef{v, t});
  }

 private:
  std::shared_ptr<Development> dev_;
  int radius_;
  std::vector<std::int8_t> dist_;
  std::vector<VertexId> order_;
};

ComplexPatch build_patch(int radius);

struct SingularLocus {
  std::vector<EdgeRef> singular;     // >= 3 incident faces
  std::vector<EdgeRef> nonsingular;  // exactly 2 incident faces
  std::vector<EdgeRef> truncated;    // some incident face is outside the patch
  std::vector<VertexId> singularVertices;  // vertices whose full link is L
};
SingularLocus singular_locus(const ComplexPatch& patch);
// Number of faces of X on an edge of the given label (counting each face once).
int fullIncidence(Letter label);

// A band of X is a tree edge between two flats; it is named by the deeper flat.
struct BandGeometry {
  int band = -1;
  Letter stable;         // s or t
  int cFlat = -1;        // flat containing the c-line side
  std::int32_t ci = 0, cj = 0;   // square k is based at (ci, cj) + 2k(1,1) in cFlat
  int otherFlat = -1;    // flat containing the a-line (s) or b-line (t) side
  std::int32_t oi = 0, oj = 0;   // vertex k of that side is (oi, oj) + k*dir
};
BandGeometry bandGeometry(const Development& dev, int band);
// A singular line of a flat in lattice coordinates: j = c (a-line),
// i = c (b-line) or i - j = c (c-line).
struct LatticeLine {
  int flat = -1;
  Letter dir;  // a, b or c
  std::int32_t c = 0;
  bool operator==(const LatticeLine&) const = default;
};
LatticeLine cLineOf(const Development& dev, int band);
LatticeLine otherLineOf(const Development& dev, int band);
// The side of the band lying in `flat` (which must be one of its two flats).
LatticeLine lineIn(const Development& dev, int band, int flat);
// Every band glued along the line: four on a c-line, one on an a- or b-line.
std::vector<int> bandsOnLine(Development& dev, const LatticeLine& line);

// Band and square index of a square face.
std::pair<int, std::int64_t> bandOfSquare(Development& dev, FaceRef square);

struct BandFragment {
  int band = -1;
  Letter stable;
  std::int64_t k0 = 0, k1 = -1;  // square indices, inclusive
  std::vector<FaceRef> squares;
  std::vector<VertexId> cLine;      // 2(k1-k0)+3 vertices along the c-line side
  std::vector<VertexId> otherLine;  // (k1-k0)+2 vertices along the a- or b-line side
  bool truncated = false;           // a neighbouring square is missing from the patch
  double width = 1.0;
};

// Maximal run of squares of `band` in the patch containing square k.
BandFragment fragmentOf(const ComplexPatch& patch, int band, std::int64_t k);
std::vector<BandFragment> detect_bands(const ComplexPatch& patch);
std::vector<VertexId> fragmentVertices(const BandFragment& b);

struct FlatFragment {
  int flat = -1;
  std::vector<FaceRef> triangles;
  std::optional<VertexId> center;
  int disk_radius = 0;  // simplicial radius of the largest disk around center
};
std::vector<FlatFragment> detect_flats(const ComplexPatch& patch);

// Simplicial disk growth D1, D2, ... around v inside the patch. Records the
// triangle count of each disk and whether every extension was forced.
struct DiskGrowth {
  std::vector<std::size_t> triangles;  // triangles[k-1] = |D_k|
  bool unique_extensions = true;
  int failures = 0;
};
DiskGrowth grow_flat_disk(const ComplexPatch& patch, VertexId v, int maxRadius);

enum class PairKind { Disjoint, Colle, TypeU, TypeV, Unclassified };
const char* str(PairKind kind);

struct PairClass {
  PairKind kind = PairKind::Disjoint;
  VertexId centromere = kNoVertex;
  std::optional<AngleValue> cycleLength;
  bool truncated = false;
  std::size_t commonVertices = 0;
};

struct Chromosome {
  BandFragment b1, b2;
  PairKind kind;
  VertexId centromere = kNoVertex;
};

// Throws std::invalid_argument if both fragments come from the same band.
PairClass classify_band_pair(const ComplexPatch& patch, const BandFragment& b1, const BandFragment& b2);

// Vertices of B on flat F, in order along the line; empty when B misses F.
struct Segment {
  std::vector<VertexId> vertices;
  bool straight = false;  // constant lattice step
  Letter direction;       // a, b or c
};
Segment band_flat_intersection(const ComplexPatch& patch, const BandFragment& b, int flat);

struct ChromosomeCensus {
  std::size_t pairs = 0, colle = 0, typeU = 0, typeV = 0, unclassified = 0, truncated = 0;
  std::size_t verticesChecked = 0;
};
// Classifies every pair of band fragments meeting at an interior vertex.
ChromosomeCensus chromosome_census(const ComplexPatch& patch);

}  // namespace wise
