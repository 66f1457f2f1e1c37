#pragma once

#include "wise/envelope.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wise {

// Elements of a certified ball placed in the development: element g sits at
// the vertex reached by reading its word from the base, so edges join g and gx.
class BallLayout {
 public:
  BallLayout(Development& dev, const Ball& ball);

  Development& dev() const { return *dev_; }
  const Ball& ball() const { return *ball_; }
  std::size_t size() const { return vertex_.size(); }
  int length(std::uint32_t g) const { return ball_->length(g); }
  const Word& word(std::uint32_t g) const { return words_[g]; }
  VertexId vertex(std::uint32_t g) const { return vertex_[g]; }
  std::uint32_t inverse(std::uint32_t g) const { return inverse_[g]; }
  std::optional<std::uint32_t> elementAt(VertexId v) const;
  // gh, or nullopt when it leaves the ball.
  std::optional<std::uint32_t> product(std::uint32_t g, std::uint32_t h) const;

 private:
  Development* dev_;
  const Ball* ball_;
  std::vector<VertexId> vertex_;
  std::vector<std::uint32_t> inverse_;
  std::vector<Word> words_;
  absl::flat_hash_map<VertexId, std::uint32_t> at_;
};

// 3-paths use the convention under which the path e, a1, a2a1, a3a2a1 has
// steps of lengths l(a1), l(a2), l(a3): the point of X standing for g is the
// vertex of g^-1. H'[z] is the reduced envelope of the geodesic from the base
// to the vertex of z^-1.
struct ThreePath {
  std::uint32_t a3 = 0, a2 = 0, a1 = 0;  // ball ids
  auto operator<=>(const ThreePath&) const = default;
};

enum class PatchPolicy {
  Strict,    // envelope vertices outside the ball raise InsufficientPatch
  Restrict,  // keep only triples whose three elements lie in the ball
};

struct ThreePathFamily {
  std::uint32_t z = 0;
  int r = 0;
  std::vector<ThreePath> members;  // sorted
  std::size_t envelopeVertices = 0;
  std::size_t outsidePatch = 0;  // candidate pairs dropped because an element left the ball
};

bool isGeodesic80(const BallLayout& L, const ThreePath& p, std::uint32_t z);
bool meetsCaps(const BallLayout& L, const ThreePath& p, std::uint32_t z, int r);

// Vertices of H'[z] (vertices of the development).
std::vector<VertexId> envelopeOf(const BallLayout& L, std::uint32_t z);

ThreePathFamily three_paths(const BallLayout& L, std::uint32_t z, int r, PatchPolicy policy = PatchPolicy::Strict);

// All 3-paths satisfying the (8,0) condition with a1, a2a1 in H'[z], no caps.
// three_paths filters these by the caps of a given r.
std::vector<ThreePath> three_path_candidates(const BallLayout& L, std::uint32_t z, PatchPolicy policy,
                                             ThreePathFamily* stats = nullptr);

// Oracle: a1 and a2 run over the whole ball, membership in H'[z] is tested
// pointwise on the envelope, a3 = z (a2 a1)^-1. Families for r = 0..rMax.
std::vector<std::vector<ThreePath>> three_paths_bruteforce(const BallLayout& L, std::uint32_t z, int rMax);

struct FitResult {
  double exponent = 0, constant = 0, residual = 0;
};

struct DegenerateData : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Least squares of log(value) against log(r).
FitResult polyfit_loglog(const std::vector<std::pair<double, double>>& table);

struct GrowthRow {
  int r = 0;
  std::size_t maxCount = 0;
  std::uint32_t argmax = 0;
};

struct GrowthAudit {
  std::vector<GrowthRow> rows;
  FitResult fit;
  std::size_t elements = 0;       // z examined
  std::size_t skipped = 0;        // z whose envelope leaves the patch
  std::size_t outsidePatch = 0;   // candidate pairs dropped
};

// max_z |C_z^r| over the z of word length <= zRadius, r = 1..rMax.
GrowthAudit growth_audit(const BallLayout& L, int zRadius, int rMax);

// max over geodesics from the base to the given vertices of the number of
// vertices of H'(gamma) within CAT(0) distance r of the base.
GrowthAudit envelope_growth_audit(Development& dev, const std::vector<VertexId>& targets, int rMax);

struct FlatTriangleRow {
  std::uint32_t z = 0;
  std::vector<std::size_t> counts;  // counts[r] for r = 0..rMax
  bool oracleAgrees = true;
  int saturation = 0;               // least r from which the count no longer changes
};

struct FlatTriangleCensus {
  std::vector<FlatTriangleRow> rows;
  std::size_t maxCount = 0;
  int maxSaturation = 0;
  bool oracleAgrees = true;
  bool constantBeyondSaturation = true;
};

// Simplicial isosceles triangles of the flat through the base with corners
// e, x, z (vertices of e, x^-1, z^-1), counted by l(x) <= r, for every z of the
// ball with l(z) <= zRadius.
FlatTriangleCensus flat_triangle_census(const BallLayout& L, int zRadius, int rMax);

struct RetractWitness {
  Word x, z;
  Word u, v, w, a, b, c;
  std::string route;  // "point", "residual", "saturated-point"
  int lx = 0, lu = 0;
  bool replayed = false;
  bool legsInEnvelopes = false;
};

struct RetractAudit {
  std::vector<RetractWitness> witnesses;
  std::size_t failures = 0;
  std::size_t skipped = 0;  // triangles outside the patch margin
  FitResult fit;            // log-log of max |u| against |x|
  double maxRatio = 0;      // max |u| / |x|
  bool allReplay = true;
};

struct RetractFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Triangles (e, x, z) for pairs of ball elements; lengths of u use the ball.
RetractAudit retract_audit(const BallLayout& L, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& xz,
                           int patchRadius);

// ---- Convolution probe ----

enum class RdMethod { Characteristic, PowerIteration };
enum class RdWeight { Characteristic, Random };

struct RdOptions {
  RdMethod method = RdMethod::PowerIteration;
  RdWeight weight = RdWeight::Characteristic;
  std::uint64_t seed = 20240917;
  double tolerance = 1e-8;
  int maxIterations = 10000;
};

struct RdEstimate {
  int r = 0, R = 0;
  double lowerBound = 0;   // ||f * chi_R|| / (||f|| ||chi_R||)
  double powerIterBound = std::numeric_limits<double>::quiet_NaN();  // ||g -> f*g|| / ||f||
  double youngCeiling = 0;  // ||f||_1 / ||f||_2
  int iterations = 0;
  bool converged = true;  // false: iteration cap reached, powerIterBound is the best value seen
  std::size_t products = 0;
  std::vector<double> topVector;  // on B_R, reused as a warm start for larger R
};

// Convolution operator g -> f*g from functions on B_R to functions on
// B_r * B_R, products read off the development. `warm` is a unit vector on a
// smaller ball (a prefix of B_R) that starts the iteration.
RdEstimate rd_constant_estimate(const BallLayout& L, int r, int R, const RdOptions& opts = {},
                                const std::vector<double>* warm = nullptr);

// Weights of f on B_r, ordered as the ball.
std::vector<double> rdWeights(const BallLayout& L, int r, RdWeight weight, std::uint64_t seed);

struct RdScanRow {
  int r = 0, R = 0;
  RdEstimate estimate;
  double fitSlope = std::numeric_limits<double>::quiet_NaN();  // slope in r at this R
};

struct RdScan {
  std::vector<RdScanRow> rows;
  std::vector<std::pair<int, int>> beyondBudget;  // (r, R) not computed
  bool lowerBelowPower = true, monotoneInR = true, belowYoung = true;
};

// (r, R) in [rMin, rMax] x [RMin, RMax]; pairs with more than maxProducts
// products (or outside the layout's ball) are listed in beyondBudget.
RdScan rd_scan(const BallLayout& L, int rMin, int rMax, int RMin, int RMax, const RdOptions& opts,
               std::size_t maxProducts);

}  // namespace wise
