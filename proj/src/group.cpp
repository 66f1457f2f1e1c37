#include "wise/group.hpp"

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <cmath>

namespace wise {

namespace {

std::int64_t floorHalf(std::int64_t x) { return x >= 0 ? x / 2 : -((-x + 1) / 2); }

void putVarint(std::string& out, std::int64_t v) {
  std::uint64_t z = (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
  while (z >= 0x80) {
    out.push_back(static_cast<char>((z & 0x7F) | 0x80));
    z >>= 7;
  }
  out.push_back(static_cast<char>(z));
}

std::int64_t getVarint(std::string_view in, std::size_t& pos) {
  std::uint64_t z = 0;
  int shift = 0;
  while (true) {
    if (pos >= in.size()) throw std::invalid_argument("truncated normal form key");
    auto byte = static_cast<std::uint8_t>(in[pos++]);
    z |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
    if (!(byte & 0x80)) break;
    shift += 7;
  }
  return static_cast<std::int64_t>(z >> 1) ^ -static_cast<std::int64_t>(z & 1);
}

struct ChainOverflow {};

// Rewrites a word into the word of its normal form, one letter at a time,
// recording every relator application. The word at any moment is done_
// followed by the reverse of todo_.
class Rewriter {
 public:
  Rewriter(const Word& w, std::size_t areaCap) : areaCap_(areaCap) {
    todo_.assign(w.rbegin(), w.rend());
  }

  Witness run() {
    while (!todo_.empty()) {
      pull();
      Letter x = done_.back();
      if (x.isStable())
        appendStable(x);
      else
        appendFlat();
    }
    return Witness{std::move(steps_)};
  }

  const std::vector<Piece>& pieces() const { return pcs_; }
  const Word& result() const { return done_; }

 private:
  Word done_;
  Word todo_;
  std::vector<Piece> pcs_{Piece{}};
  std::vector<RewriteStep> steps_;
  std::size_t area_ = 0;
  std::size_t areaCap_;

  void replace(std::size_t pos, std::size_t len, const Word& ins, bool relator) {
    RewriteStep step;
    step.pos = pos;
    step.removed.assign(done_.begin() + pos, done_.begin() + pos + len);
    step.inserted = ins;
    step.relator = relator;
    done_.erase(done_.begin() + pos, done_.begin() + pos + len);
    done_.insert(done_.begin() + pos, ins.begin(), ins.end());
    steps_.push_back(std::move(step));
    if (relator && ++area_ > areaCap_) throw ChainOverflow{};
  }

  void pull() {
    done_.push_back(todo_.back());
    todo_.pop_back();
  }
  void pushBack(std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      todo_.push_back(done_.back());
      done_.pop_back();
    }
  }

  // Swaps done_[p] (an a-letter or b-letter) with done_[p+1] (one of the other kind).
  void swapAt(std::size_t p) {
    Letter x = done_[p], y = done_[p + 1];
    if (x.inverse() == y.inverse()) {
      replace(p, 2, {x.inverse() ? LC : Lc}, true);
      replace(p, 1, {y, x}, true);
      return;
    }
    replace(p, 0, {y, y.inv()}, false);
    swapAt(p + 1);
    replace(p + 2, 2, {}, false);
  }

  // done_ = word(pcs_) followed by one letter of a, b or c.
  void appendFlat() {
    Letter x = done_.back();
    Piece& g = pcs_.back();
    switch (x.gen()) {
      case 0: {
        std::size_t p = done_.size() - 1;
        for (std::int64_t k = 0; k < std::llabs(g.j); ++k) swapAt(--p);
        if (g.i * x.sign() < 0) replace(p - 1, 2, {}, false);
        g.i += x.sign();
        break;
      }
      case 1:
        if (g.j * x.sign() < 0) replace(done_.size() - 2, 2, {}, false);
        g.j += x.sign();
        break;
      case 2:
        replace(done_.size() - 1, 1, x.inverse() ? Word{LB, LA} : Word{La, Lb}, true);
        pushBack(1);
        appendFlat();
        pull();
        appendFlat();
        break;
    }
  }

  // done_ ends with a^k b^k; turns that into c^k.
  void toC(std::int64_t k) {
    std::size_t n = static_cast<std::size_t>(std::llabs(k)), trailing = 0;
    for (std::size_t r = n; r > 0; --r) {
      std::size_t p = done_.size() - trailing - 2 * r + r - 1;
      for (std::size_t q = 0; q + 1 < r; ++q) swapAt(p++);
      replace(p, 2, {k > 0 ? Lc : LC}, true);
      ++trailing;
    }
  }

  // Free insertion of x^-k x^k; appendFlat absorbs x^-k and x^k is left
  // right after done_.
  void absorb(Letter x, std::int64_t k) {
    Word in = concat(power(x, -k), power(x, k));
    std::size_t n = static_cast<std::size_t>(std::llabs(k));
    replace(done_.size(), 0, in, false);
    pushBack(in.size());
    for (std::size_t q = 0; q < n; ++q) {
      pull();
      appendFlat();
    }
  }

  void appendStable(Letter x) {
    const Piece g = pcs_.back();
    const bool hasStable = pcs_.size() > 1;
    const Letter e = g.stable;

    // s a^i S = c^2i and t b^j T = c^2j.
    if (hasStable && e == x.inv() && (x == LS || x == LT)) {
      std::int64_t k = x == LS ? g.i : g.j;
      if ((x == LS && g.j == 0) || (x == LT && g.i == 0)) {
        for (std::int64_t q = 0; q < std::llabs(k); ++q) {
          replace(done_.size() - 2, 2, {x, k > 0 ? Lc : LC, k > 0 ? Lc : LC}, true);
          pushBack(2);
        }
        replace(done_.size() - 2, 2, {}, false);
        pcs_.pop_back();
        return;
      }
    }
    // S c^2m s = a^m and T c^2m t = b^m.
    if (hasStable && e == x.inv() && (x == Ls || x == Lt) && g.i == g.j && g.i % 2 == 0) {
      pushBack(1);
      toC(g.i);
      pull();
      Letter out = Letter::make(x == Ls ? 0 : 1, g.i < 0);
      for (std::int64_t q = 0; q < std::llabs(g.i) / 2; ++q) {
        replace(done_.size() - 3, 3, {x, out}, true);
        pushBack(1);
      }
      replace(done_.size() - 2, 2, {}, false);
      pcs_.pop_back();
      return;
    }
    if (x == Ls || x == Lt) {
      // c^2m e = e a^m (or b^m): split off c^2m with m = floor(j/2).
      std::int64_t m = floorHalf(g.j);
      if (m != 0) {
        pushBack(1);
        absorb(Lc, 2 * m);
        for (std::int64_t q = 0; q < 2 * std::llabs(m) + 1; ++q) pull();
        Letter out = Letter::make(x == Ls ? 0 : 1, m < 0);
        for (std::int64_t q = 0; q < std::llabs(m); ++q) {
          replace(done_.size() - 3, 3, {x, out}, true);
          pushBack(1);
        }
      }
    } else {
      // a^i S = S c^2i and b^j T = T c^2j.
      std::int64_t k = x == LS ? g.i : g.j;
      if (k != 0) {
        if (x == LS) {
          pushBack(1);
          absorb(La, k);
          for (std::int64_t q = 0; q < std::llabs(k) + 1; ++q) pull();
        } else {
          pcs_.back().j = 0;
        }
        for (std::int64_t q = 0; q < std::llabs(k); ++q) {
          replace(done_.size() - 2, 2, {x, k > 0 ? Lc : LC, k > 0 ? Lc : LC}, true);
          pushBack(2);
        }
      }
    }
    pcs_.push_back(Piece{x, 0, 0});
  }
};

}  // namespace

Word parseWord(std::string_view text) {
  Word w;
  if (text == "e") return w;
  for (char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '.' || ch == '*') continue;
    const char* letters = "aAbBcCsStT";
    const char* hit = ch ? std::strchr(letters, ch) : nullptr;
    if (!hit) throw std::invalid_argument(std::string("bad letter '") + ch + "' in word");
    w.push_back(Letter{static_cast<std::uint8_t>(hit - letters)});
  }
  return w;
}

std::string str(const Word& w) {
  if (w.empty()) return "e";
  std::string out;
  for (Letter x : w) out.push_back(x.symbol());
  return out;
}

Word inverse(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(it->inv());
  return out;
}

Word concat(const Word& u, const Word& v) {
  Word out = u;
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

Word power(Letter x, std::int64_t k) {
  return Word(static_cast<std::size_t>(std::llabs(k)), k < 0 ? x.inv() : x);
}

bool shortlexLess(const Word& u, const Word& v) {
  if (u.size() != v.size()) return u.size() < v.size();
  return u < v;
}

Word free_reduce(const Word& w) {
  Word out;
  for (Letter x : w) {
    if (!out.empty() && out.back() == x.inv())
      out.pop_back();
    else
      out.push_back(x);
  }
  return out;
}

Word cyclically_reduce(const Word& w) {
  Word r = free_reduce(w);
  std::size_t lo = 0, hi = r.size();
  while (hi - lo >= 2 && r[lo] == r[hi - 1].inv()) {
    ++lo;
    --hi;
  }
  return Word(r.begin() + lo, r.begin() + hi);
}

AbVector abelianize(const Word& w) {
  static constexpr std::array<AbVector, 5> image{{{2, 0, 0}, {-1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  AbVector v{0, 0, 0};
  for (Letter x : w)
    for (int k = 0; k < 3; ++k) v[k] += x.sign() * image[x.gen()][k];
  v[0] = ((v[0] % 3) + 3) % 3;
  return v;
}

const std::array<Word, 4>& relators() {
  static const std::array<Word, 4> r{parseWord("abC"), parseWord("baC"), parseWord("saSCC"),
                                     parseWord("tbTCC")};
  return r;
}

RelatorSet::RelatorSet() {
  for (const Word& r : relators()) {
    for (const Word& base : {r, inverse(r)}) {
      for (std::size_t k = 0; k < base.size(); ++k) {
        Word rot(base.begin() + k, base.end());
        rot.insert(rot.end(), base.begin(), base.begin() + k);
        if (std::find(words_.begin(), words_.end(), rot) == words_.end()) words_.push_back(rot);
      }
    }
  }
  std::sort(words_.begin(), words_.end(), shortlexLess);
}

const RelatorSet& RelatorSet::instance() {
  static const RelatorSet set;
  return set;
}

bool RelatorSet::contains(const Word& w) const {
  return std::find(words_.begin(), words_.end(), w) != words_.end();
}

std::size_t maxElements() {
  if (const char* env = std::getenv("WISE_MAX_ELEMENTS")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 16'000'000;
}

void NormalForm::mul(Letter x) {
  Piece& g = pieces_.back();
  switch (x.gen()) {
    case 0:
      g.i += x.sign();
      return;
    case 1:
      g.j += x.sign();
      return;
    case 2:
      g.i += x.sign();
      g.j += x.sign();
      return;
    default:
      break;
  }
  if (pieces_.size() > 1 && g.stable == x.inv()) {
    const Piece last = g;
    bool pinch = false;
    std::int64_t di = 0, dj = 0;
    if (x == LS && last.j == 0) {
      pinch = true;
      di = dj = 2 * last.i;
    } else if (x == LT && last.i == 0) {
      pinch = true;
      di = dj = 2 * last.j;
    } else if ((x == Ls || x == Lt) && last.i == last.j && last.i % 2 == 0) {
      pinch = true;
      (x == Ls ? di : dj) = last.i / 2;
    }
    if (pinch) {
      pieces_.pop_back();
      pieces_.back().i += di;
      pieces_.back().j += dj;
      return;
    }
  }
  Piece next{x, 0, 0};
  if (x == Ls || x == Lt) {
    std::int64_t m = floorHalf(g.j);
    g.i -= 2 * m;
    g.j -= 2 * m;
    (x == Ls ? next.i : next.j) = m;
  } else if (x == LS) {
    next.i = next.j = 2 * g.i;
    g.i = 0;
  } else {
    next.i = next.j = 2 * g.j;
    g.j = 0;
  }
  pieces_.push_back(next);
}

Word NormalForm::word() const {
  Word w;
  for (const Piece& p : pieces_) {
    if (p.stable.code != 0xFF) w.push_back(p.stable);
    Word ai = power(La, p.i), bj = power(Lb, p.j);
    w.insert(w.end(), ai.begin(), ai.end());
    w.insert(w.end(), bj.begin(), bj.end());
  }
  return w;
}

std::string NormalForm::key() const {
  std::string out;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    if (k) out.push_back(static_cast<char>(pieces_[k].stable.code));
    putVarint(out, pieces_[k].i);
    putVarint(out, pieces_[k].j);
  }
  return out;
}

NormalForm NormalForm::fromKey(std::string_view key) {
  NormalForm nf;
  nf.pieces_.clear();
  std::size_t pos = 0;
  while (pos < key.size()) {
    Piece p;
    if (!nf.pieces_.empty()) p.stable = Letter{static_cast<std::uint8_t>(key[pos++])};
    p.i = getVarint(key, pos);
    p.j = getVarint(key, pos);
    nf.pieces_.push_back(p);
  }
  if (nf.pieces_.empty()) nf.pieces_.emplace_back();
  return nf;
}

NormalForm operator*(const NormalForm& x, const NormalForm& y) {
  NormalForm r = x;
  r.mul(y.word());
  return r;
}

std::size_t Witness::area() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const RewriteStep& s) { return s.relator; }));
}

bool replay(const Witness& witness, const Word& from, const Word& to, std::string* why) {
  auto fail = [&](std::size_t k, const char* msg) {
    if (why) *why = "step " + std::to_string(k) + ": " + msg;
    return false;
  };
  Word w = from;
  const RelatorSet& rel = RelatorSet::instance();
  for (std::size_t k = 0; k < witness.steps.size(); ++k) {
    const RewriteStep& st = witness.steps[k];
    if (st.pos + st.removed.size() > w.size()) return fail(k, "out of range");
    if (!std::equal(st.removed.begin(), st.removed.end(), w.begin() + st.pos))
      return fail(k, "removed subword not present");
    if (st.relator) {
      if (!rel.contains(cyclically_reduce(concat(st.removed, inverse(st.inserted)))))
        return fail(k, "not a relator application");
    } else {
      const Word& nonEmpty = st.removed.empty() ? st.inserted : st.removed;
      if (!(st.removed.empty() || st.inserted.empty()) || !free_reduce(nonEmpty).empty())
        return fail(k, "not a free move");
    }
    w.erase(w.begin() + st.pos, w.begin() + st.pos + st.removed.size());
    w.insert(w.begin() + st.pos, st.inserted.begin(), st.inserted.end());
  }
  if (w != to) {
    if (why) *why = "chain ends at " + str(w) + ", expected " + str(to);
    return false;
  }
  return true;
}

std::optional<Witness> normalizationChain(const Word& w, std::size_t areaCap) {
  Rewriter rw(w, areaCap);
  try {
    return rw.run();
  } catch (const ChainOverflow&) {
    return std::nullopt;
  }
}

std::int64_t areaBoundFor(const Word& w1, const Word& w2, double constant) {
  double n = static_cast<double>(w1.size() + w2.size());
  return static_cast<std::int64_t>(std::ceil(constant * n * n));
}

EqualityVerdict equal_in_G(const Word& w1, const Word& w2, std::int64_t areaBound) {
  if (areaBound < 0) throw std::invalid_argument("areaBound must be nonnegative");
  EqualityVerdict v;
  if (abelianize(w1) != abelianize(w2)) {
    v.kind = EqualityVerdict::Kind::DistinctCertified;
    v.reason = DistinctReason::Abelianization;
    return v;
  }
  if (!(NormalForm(w1) == NormalForm(w2))) {
    v.kind = EqualityVerdict::Kind::DistinctCertified;
    v.reason = DistinctReason::NormalForm;
    return v;
  }
  auto cap = static_cast<std::size_t>(areaBound);
  auto c1 = normalizationChain(w1, cap);
  std::optional<Witness> c2;
  if (c1) c2 = normalizationChain(w2, cap - c1->area());
  if (!c1 || !c2) {
    v.kind = EqualityVerdict::Kind::UnknownWithinBound;
    v.areaBound = areaBound;
    return v;
  }
  v.kind = EqualityVerdict::Kind::Equal;
  v.witness = std::move(*c1);
  for (auto it = c2->steps.rbegin(); it != c2->steps.rend(); ++it)
    v.witness.steps.push_back(RewriteStep{it->pos, it->inserted, it->removed, it->relator});
  return v;
}

const char* str(EqualityVerdict::Kind kind) {
  switch (kind) {
    case EqualityVerdict::Kind::Equal:
      return "Equal";
    case EqualityVerdict::Kind::DistinctCertified:
      return "DistinctCertified";
    default:
      return "UnknownWithinBound";
  }
}

const char* str(DistinctReason reason) {
  return reason == DistinctReason::Abelianization ? "abelianization" : "normal-form";
}

struct Ball::Index {
  absl::flat_hash_map<std::string, std::uint32_t> map;
};

Ball::Ball(int radius, std::size_t cap) : radius_(radius), index_(std::make_shared<Index>()) {
  if (radius < 0) throw std::invalid_argument("radius must be nonnegative");
  auto& map = index_->map;
  parent_.push_back(0);
  last_.push_back(Letter{0xFF});
  length_.push_back(0);
  map.emplace(NormalForm().key(), 0);
  layerEnd_.push_back(1);
  std::vector<NormalForm> frontier{NormalForm()};
  std::size_t frontierStart = 0;
  for (int r = 1; r <= radius; ++r) {
    std::vector<NormalForm> next;
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      auto id = static_cast<std::uint32_t>(frontierStart + k);
      for (Letter x : kAllLetters) {
        if (id != 0 && x == last_[id].inv()) continue;
        NormalForm y = frontier[k];
        y.mul(x);
        auto [it, inserted] = map.try_emplace(y.key(), static_cast<std::uint32_t>(size()));
        if (!inserted) continue;
        if (size() >= cap) throw ResourceLimit("ball exceeds element cap " + std::to_string(cap));
        parent_.push_back(id);
        last_.push_back(x);
        length_.push_back(static_cast<std::uint8_t>(r));
        next.push_back(std::move(y));
      }
    }
    frontierStart = layerEnd_.back();
    layerEnd_.push_back(size());
    frontier = std::move(next);
  }
}

std::size_t Ball::sizeAt(int r) const {
  if (r < 0) return 0;
  if (r > radius_) throw std::out_of_range("radius beyond ball");
  return layerEnd_[r];
}

Word Ball::word(std::uint32_t id) const {
  Word w(length_[id]);
  for (std::size_t k = w.size(); k > 0; --k) {
    w[k - 1] = last_[id];
    id = parent_[id];
  }
  return w;
}

std::optional<std::uint32_t> Ball::find(const NormalForm& x) const {
  auto it = index_->map.find(x.key());
  if (it == index_->map.end()) return std::nullopt;
  return it->second;
}

GroupElement Ball::certify(const Word& w) const {
  auto id = find(w);
  if (!id) throw UncertifiedElement(str(w) + " is not in the ball of radius " + std::to_string(radius_));
  return element(*id);
}

std::optional<int> Ball::lengthOf(const NormalForm& x, int maxLength) const {
  if (auto id = find(x)) {
    if (length_[*id] <= maxLength) return length_[*id];
    return std::nullopt;
  }
  absl::flat_hash_set<std::string> seen{x.key()};
  std::vector<NormalForm> layer{x};
  for (int d = 1; radius_ + d <= maxLength; ++d) {
    std::vector<NormalForm> next;
    for (const NormalForm& y : layer) {
      for (Letter l : kAllLetters) {
        NormalForm z = y;
        z.mul(l);
        std::string key = z.key();
        if (index_->map.contains(key)) return radius_ + d;
        if (seen.insert(std::move(key)).second) next.push_back(std::move(z));
      }
    }
    if (seen.size() > maxElements()) throw ResourceLimit("length search exceeds element cap");
    layer = std::move(next);
  }
  return std::nullopt;
}

int word_length(const GroupElement& g) { return g.length; }

std::vector<NormalForm> pathVertices(const Word& w) {
  std::vector<NormalForm> out{NormalForm()};
  for (Letter x : w) {
    out.push_back(out.back());
    out.back().mul(x);
  }
  return out;
}

}  // namespace wise
