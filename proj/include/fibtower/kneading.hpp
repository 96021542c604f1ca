#pragma once

// Cutting times, kneading map and kneading sequence of the Fibonacci-like
// combinatorics Q(k) = max(0, k - d).

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fibtower {

class Combinatorics {
 public:
  explicit Combinatorics(int d) : d_(d) {
    if (d < 2) throw std::domain_error("combinatorics need d >= 2, got " + std::to_string(d));
    min_index_ = -3 * static_cast<std::int64_t>(d) + 3;
    // S(j) = 0 on [-3d+3, -2d], S(-2d+1) = 1, S(-2d+2) = 0; recursion from -2d+3 on.
    for (std::int64_t j = min_index_; j <= -2 * d; ++j) table_.push_back(0);
    table_.push_back(1);
    table_.push_back(0);
    for (std::int64_t k = -2 * d + 3;; ++k) {
      std::int64_t v;
      if (k >= 0 && k <= d) {
        v = k + 1;
      } else {
        std::int64_t x = at(k - 1), y = at(k - d);
        if (x > std::numeric_limits<std::int64_t>::max() - y) break;
        v = x + y;
      }
      table_.push_back(v);
    }
  }

  int d() const { return d_; }
  std::int64_t min_index() const { return min_index_; }
  std::int64_t max_index() const { return min_index_ + static_cast<std::int64_t>(table_.size()) - 1; }

  std::int64_t S(std::int64_t k) const {
    if (k < min_index_)
      throw std::domain_error("cutting time index " + std::to_string(k) + " below " +
                              std::to_string(min_index_));
    if (k > max_index())
      throw std::overflow_error("cutting time S_" + std::to_string(d_) + "(" + std::to_string(k) +
                                ") exceeds 64 bits");
    return at(k);
  }

  std::int64_t Q(std::int64_t k) const {
    if (k < 1) throw std::domain_error("kneading map is defined for k >= 1");
    return k > d_ ? k - d_ : 0;
  }

  // Largest k with S(k) <= n (n >= 1).
  std::int64_t level_of(std::int64_t n) const {
    std::int64_t k = 0;
    while (k + 1 <= max_index() && at(k + 1) <= n) ++k;
    return k;
  }
  bool is_cutting_time(std::int64_t n) const {
    for (std::int64_t k = 0; k <= max_index() && at(k) <= n; ++k)
      if (at(k) == n) return true;
    return false;
  }

 private:
  std::int64_t at(std::int64_t k) const { return table_[static_cast<std::size_t>(k - min_index_)]; }

  int d_;
  std::int64_t min_index_ = 0;
  std::vector<std::int64_t> table_;
};

// Shared immutable tables, one per d.
inline const Combinatorics& combinatorics(int d) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Combinatorics>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, std::make_unique<Combinatorics>(d)).first;
  return *it->second;
}

inline std::int64_t cutting_time(int d, std::int64_t k) { return combinatorics(d).S(k); }
inline std::int64_t kneading_map(int d, std::int64_t k) { return combinatorics(d).Q(k); }

// Symbols e_1..e_n (index 0 holds e_1) with 1 for right of the turning point.
inline std::vector<bool> kneading_sequence(int d, std::size_t n) {
  const Combinatorics& c = combinatorics(d);
  std::vector<bool> e;
  e.reserve(n + 1);
  e.push_back(true);
  for (std::int64_t k = 1; e.size() < n; ++k) {
    std::size_t block = static_cast<std::size_t>(c.S(c.Q(k)));
    for (std::size_t i = 0; i + 1 < block; ++i) e.push_back(e[i]);
    e.push_back(!e[block - 1]);
  }
  e.resize(n);
  return e;
}

inline std::string to_string(const std::vector<bool>& bits) {
  std::string s;
  s.reserve(bits.size());
  for (bool b : bits) s.push_back(b ? '1' : '0');
  return s;
}

inline std::vector<bool> parse_itinerary(const std::string& s) {
  std::vector<bool> out;
  for (char ch : s) {
    if (ch != '0' && ch != '1') throw std::invalid_argument("itinerary must be a 0/1 string");
    out.push_back(ch == '1');
  }
  return out;
}

// Cutting times readable from a finite itinerary; stops once the prefix no
// longer decides the next one.
inline std::vector<std::int64_t> cutting_times_from_itinerary(const std::vector<bool>& e) {
  if (e.size() < 2 || !e[0] || e[1]) throw std::invalid_argument("itinerary must start with 1,0");
  std::vector<std::int64_t> s{1};
  const std::int64_t n = static_cast<std::int64_t>(e.size());
  for (;;) {
    std::int64_t prev = s.back(), next = -1;
    for (std::int64_t m = prev + 1; m <= n; ++m)
      if (e[m - 1] != e[m - prev - 1]) {
        next = m;
        break;
      }
    if (next < 0) break;
    s.push_back(next);
  }
  return s;
}

inline bool verify_sum_identity(int d, std::int64_t j) {
  const Combinatorics& c = combinatorics(d);
  std::int64_t sum = 0;
  for (std::int64_t i = 0; i <= j; ++i) sum += c.S(i);
  return sum == c.S(j + d) - c.S(d - 1);
}

}  // namespace fibtower
