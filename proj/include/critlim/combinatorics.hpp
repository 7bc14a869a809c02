#ifndef CRITLIM_COMBINATORICS_HPP
#define CRITLIM_COMBINATORICS_HPP

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include <boost/rational.hpp>

namespace critlim {

using Rational = boost::rational<long long>;

/// Permutation of {1, ..., m}, stored one-based.
struct Perm {
  std::vector<int> map;

  explicit Perm(std::vector<int> values) : map(std::move(values)) {
    const int m = static_cast<int>(map.size());
    std::vector<bool> seen(static_cast<std::size_t>(m) + 1, false);
    for (int v : map) {
      if (v < 1 || v > m || seen[static_cast<std::size_t>(v)])
        throw std::invalid_argument("Perm: not a bijection on {1..m}");
      seen[static_cast<std::size_t>(v)] = true;
    }
  }

  int size() const { return static_cast<int>(map.size()); }
  int operator()(int i) const { return map[static_cast<std::size_t>(i - 1)]; }

  static Perm identity(int m) {
    std::vector<int> v(static_cast<std::size_t>(m));
    std::iota(v.begin(), v.end(), 1);
    return Perm(std::move(v));
  }
};

template <typename Fn>
void for_each_perm(int m, Fn&& fn) {
  std::vector<int> v(static_cast<std::size_t>(m));
  std::iota(v.begin(), v.end(), 1);
  do {
    fn(Perm(v));
  } while (std::next_permutation(v.begin(), v.end()));
}

// m minus the number of left-to-right maxima of sigma(1), ..., sigma(m).
inline int sigma_stat(const Perm& p) {
  int records = 0, best = 0;
  for (int i = 1; i <= p.size(); ++i)
    if (p(i) > best) {
      best = p(i);
      ++records;
    }
  return p.size() - records;
}

struct IdentityCheck {
  Rational lhs;
  Rational rhs;
  bool equal;
};

/// Exact check of sum over all permutations of A^(m - stat) against the
/// rising factorial A (A+1) ... (A+m-1).
inline IdentityCheck product_identity(int m, const Rational& a) {
  if (m < 1 || m > 8)
    throw std::invalid_argument("product_identity: m must be in [1, 8]");
  auto rpow = [](const Rational& base, int e) {
    Rational v(1);
    for (int i = 0; i < e; ++i) v *= base;
    return v;
  };
  Rational lhs(0);
  for_each_perm(m, [&](const Perm& p) { lhs += rpow(a, m - sigma_stat(p)); });
  Rational rhs(1);
  for (int i = 1; i <= m; ++i) rhs *= a + Rational(i - 1);
  return {lhs, rhs, lhs == rhs};
}

// True iff every adjacent pair {sigma(2k-1), sigma(2k)} is one of the
// blocks {2j-1, 2j}.
inline bool classify_P1(const Perm& p) {
  const int m = p.size();
  if (m % 2 != 0) throw std::invalid_argument("classify_P1: m must be even");
  for (int k = 1; k <= m / 2; ++k) {
    const int a = p(2 * k - 1), b = p(2 * k);
    if (std::abs(a - b) != 1 || std::min(a, b) % 2 == 0) return false;
  }
  return true;
}

// A_i = {sigma(i..m)} symmetric-difference {sigma(i)+1, ..., sigma(m)+1};
// may contain m+1.
inline std::vector<int> tail_diff_set(const Perm& p, int i) {
  std::set<int> s1, s2;
  for (int j = i; j <= p.size(); ++j) {
    s1.insert(p(j));
    s2.insert(p(j) + 1);
  }
  std::vector<int> out;
  std::set_symmetric_difference(s1.begin(), s1.end(), s2.begin(), s2.end(),
                                std::back_inserter(out));
  return out;
}

namespace detail {

// Kuhn's augmenting-path matching: position slot -> candidate values.
inline bool try_augment(int slot, const std::vector<std::vector<int>>& cand,
                        std::vector<int>& match_of_value,
                        std::vector<bool>& used) {
  for (int v : cand[static_cast<std::size_t>(slot)]) {
    if (used[static_cast<std::size_t>(v)]) continue;
    used[static_cast<std::size_t>(v)] = true;
    if (match_of_value[static_cast<std::size_t>(v)] < 0 ||
        try_augment(match_of_value[static_cast<std::size_t>(v)], cand,
                    match_of_value, used)) {
      match_of_value[static_cast<std::size_t>(v)] = slot;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// For p in the pair-preserving class, builds a parity-preserving bijection
/// sigma~ with sigma~(i) in A_i for every i: at even i the unique even
/// element of A_i, at odd i an odd element chosen by bipartite matching so
/// that the odd values 1, 3, ..., m-1 are each used once.
inline Perm build_pairing(const Perm& p) {
  const int m = p.size();
  if (m % 2 != 0 || !classify_P1(p))
    throw std::invalid_argument("build_pairing: permutation not in the "
                                "pair-preserving class");
  std::vector<int> result(static_cast<std::size_t>(m), 0);

  std::vector<std::vector<int>> cand(static_cast<std::size_t>(m / 2));
  for (int i = 1; i <= m; ++i) {
    const auto a = tail_diff_set(p, i);
    if (i % 2 == 0) {
      int even_elem = 0, count = 0;
      for (int v : a)
        if (v <= m && v % 2 == 0) {
          even_elem = v;
          ++count;
        }
      if (count != 1)
        throw std::logic_error("build_pairing: expected one even element");
      result[static_cast<std::size_t>(i - 1)] = even_elem;
    } else {
      for (int v : a)
        if (v <= m && v % 2 == 1)
          cand[static_cast<std::size_t>((i - 1) / 2)].push_back(v);
    }
  }

  // match odd slots (i = 2k-1) to odd values
  std::vector<int> match_of_value(static_cast<std::size_t>(m) + 2, -1);
  for (int slot = 0; slot < m / 2; ++slot) {
    std::vector<bool> used(static_cast<std::size_t>(m) + 2, false);
    if (!detail::try_augment(slot, cand, match_of_value, used))
      throw std::logic_error("build_pairing: no parity-preserving matching");
  }
  for (int v = 1; v <= m; v += 2) {
    const int slot = match_of_value[static_cast<std::size_t>(v)];
    if (slot >= 0) result[static_cast<std::size_t>(2 * slot)] = v;
  }
  return Perm(std::move(result));
}

}  // namespace critlim

#endif  // CRITLIM_COMBINATORICS_HPP
