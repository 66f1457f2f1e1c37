#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wise {

// Generators a, b, c, s, t and their inverses. The code is 2*gen + inverse,
// which makes code order the shortlex letter order a < A < b < B < ... < T.
struct Letter {
  std::uint8_t code = 0;

  static constexpr Letter make(int gen, bool inverse) {
    return Letter{static_cast<std::uint8_t>(2 * gen + (inverse ? 1 : 0))};
  }
  constexpr int gen() const { return code >> 1; }
  constexpr bool inverse() const { return code & 1; }
  constexpr int sign() const { return inverse() ? -1 : 1; }
  constexpr Letter inv() const { return Letter{static_cast<std::uint8_t>(code ^ 1)}; }
  constexpr bool isStable() const { return gen() >= 3; }
  char symbol() const { return "aAbBcCsStT"[code]; }

  constexpr auto operator<=>(const Letter&) const = default;
};

inline constexpr int kLetterCount = 10;
inline constexpr Letter La{0}, LA{1}, Lb{2}, LB{3}, Lc{4}, LC{5}, Ls{6}, LS{7}, Lt{8}, LT{9};
inline constexpr std::array<Letter, kLetterCount> kAllLetters{La, LA, Lb, LB, Lc, LC, Ls, LS, Lt, LT};

using Word = std::vector<Letter>;

// Lower case is the generator, upper case its inverse. "e" or "" is the identity.
// Whitespace, '.' and '*' are ignored.
Word parseWord(std::string_view text);
std::string str(const Word& w);
Word inverse(const Word& w);
Word concat(const Word& u, const Word& v);
Word power(Letter x, std::int64_t k);  // x^k, using x.inv() for k < 0
bool shortlexLess(const Word& u, const Word& v);

Word free_reduce(const Word& w);
Word cyclically_reduce(const Word& w);

// Image in G^ab. The relations force a = b = 2c and 3c = 0, so G^ab is
// Z/3 + Z^2; coordinates are (c mod 3, s, t), the first one in {0, 1, 2}.
using AbVector = std::array<std::int64_t, 3>;
AbVector abelianize(const Word& w);

// c=ab, c=ba, c^2=sas^-1, c^2=tbt^-1 as cyclic relators.
const std::array<Word, 4>& relators();

class RelatorSet {
 public:
  static const RelatorSet& instance();
  // All cyclic rotations of the relators and of their inverses.
  const std::vector<Word>& words() const { return words_; }
  bool contains(const Word& w) const;

 private:
  RelatorSet();
  std::vector<Word> words_;
};

struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UncertifiedElement : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cap on stored elements/vertices; WISE_MAX_ELEMENTS overrides the default.
std::size_t maxElements();

// Britton normal form of G viewed as a double HNN extension of Z^2 = <a,b>
// with s<a>s^-1 = <c^2> and t<b>t^-1 = <c^2>. A piece holds a stable letter
// (absent for the first piece) followed by a^i b^j. All pieces but the last
// carry the fixed coset representative.
struct Piece {
  Letter stable{0xFF};
  std::int64_t i = 0;
  std::int64_t j = 0;
  bool operator==(const Piece&) const = default;
};

class NormalForm {
 public:
  NormalForm() : pieces_(1) {}
  explicit NormalForm(const Word& w) : NormalForm() { mul(w); }

  void mul(Letter x);
  void mul(const Word& w) {
    for (Letter x : w) mul(x);
  }

  const std::vector<Piece>& pieces() const { return pieces_; }
  std::size_t depth() const { return pieces_.size() - 1; }
  bool isIdentity() const { return pieces_.size() == 1 && pieces_[0].i == 0 && pieces_[0].j == 0; }

  // The word a^i0 b^j0 e1 a^i1 b^j1 ...
  Word word() const;
  NormalForm inverse() const { return NormalForm(wise::inverse(word())); }

  std::string key() const;
  static NormalForm fromKey(std::string_view key);

  bool operator==(const NormalForm&) const = default;

 private:
  std::vector<Piece> pieces_;
};

NormalForm operator*(const NormalForm& x, const NormalForm& y);

// A rewriting chain. Relator steps replace a subword u by v where u v^-1 is
// cyclically a relator or its inverse; free steps insert or delete a freely
// trivial word.
struct RewriteStep {
  std::size_t pos = 0;
  Word removed;
  Word inserted;
  bool relator = false;
};

struct Witness {
  std::vector<RewriteStep> steps;
  std::size_t area() const;
};

// Checks every step and that the chain turns `from` into `to`.
bool replay(const Witness& witness, const Word& from, const Word& to, std::string* why = nullptr);

// Chain from w to NormalForm(w).word(); nullopt if it needs more than
// areaCap relator steps.
std::optional<Witness> normalizationChain(const Word& w, std::size_t areaCap);

enum class DistinctReason { Abelianization, NormalForm };

struct EqualityVerdict {
  enum class Kind { Equal, DistinctCertified, UnknownWithinBound };
  Kind kind = Kind::UnknownWithinBound;
  Witness witness;                 // Equal
  DistinctReason reason{};         // DistinctCertified
  std::int64_t areaBound = 0;      // UnknownWithinBound
};

// Quadratic area bound C * n^2 with n = |w1| + |w2|.
std::int64_t areaBoundFor(const Word& w1, const Word& w2, double constant = 16.0);

EqualityVerdict equal_in_G(const Word& w1, const Word& w2, std::int64_t areaBound);
const char* str(EqualityVerdict::Kind kind);
const char* str(DistinctReason reason);

struct GroupElement {
  Word canonical;
  int length = 0;
};

// Breadth-first ball of the Cayley graph. Elements are numbered in shortlex
// order of their canonical words, so id order is length-then-lex order.
class Ball {
 public:
  explicit Ball(int radius, std::size_t cap = maxElements());

  int radius() const { return radius_; }
  std::size_t size() const { return parent_.size(); }
  // Number of elements of length <= r (r <= radius).
  std::size_t sizeAt(int r) const;
  bool complete() const { return true; }

  int length(std::uint32_t id) const { return length_[id]; }
  std::uint32_t parent(std::uint32_t id) const { return parent_[id]; }
  Letter lastLetter(std::uint32_t id) const { return last_[id]; }
  Word word(std::uint32_t id) const;
  NormalForm normalForm(std::uint32_t id) const { return NormalForm(word(id)); }
  GroupElement element(std::uint32_t id) const { return {word(id), length(id)}; }

  std::optional<std::uint32_t> find(const NormalForm& x) const;
  std::optional<std::uint32_t> find(const Word& w) const { return find(NormalForm(w)); }
  // Throws UncertifiedElement when w is outside the ball.
  GroupElement certify(const Word& w) const;

  // Exact word length of any element: table lookup inside the ball, and a
  // breadth-first search towards the ball outside it. nullopt if > maxLength.
  std::optional<int> lengthOf(const NormalForm& x, int maxLength) const;

 private:
  int radius_;
  std::vector<std::uint32_t> parent_;
  std::vector<Letter> last_;
  std::vector<std::uint8_t> length_;
  std::vector<std::size_t> layerEnd_;
  struct Index;
  std::shared_ptr<Index> index_;
};

int word_length(const GroupElement& g);

// Letters of a word interpreted as a path from the identity.
std::vector<NormalForm> pathVertices(const Word& w);

}  // namespace wise
