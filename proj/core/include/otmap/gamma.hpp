#pragma once

#include <optional>
#include <string>
#include <vector>

#include "otmap/common.hpp"

namespace otmap {

// Sparse dyadic scale s: entries (axis, scale) with axis >= 1 strictly
// increasing and scale >= 1; absent axes mean s_i = 0. The all-zero scale is
// the empty list.
struct DyadicScale {
  struct Entry {
    int axis;
    int scale;
    friend auto operator<=>(const Entry&, const Entry&) = default;
  };
  std::vector<Entry> entries;

  DyadicScale() = default;
  explicit DyadicScale(std::vector<Entry> e);

  bool empty() const { return entries.empty(); }
  int scale_at(int axis) const;
  int max_axis() const { return entries.empty() ? 0 : entries.back().axis; }
  int sum() const;

  friend auto operator<=>(const DyadicScale&, const DyadicScale&) = default;
  std::string str() const;
};

// Sparse frequency multi-index l: entries (axis, freq) with freq != 0.
struct FrequencyIndex {
  struct Entry {
    int axis;
    int freq;
    friend auto operator<=>(const Entry&, const Entry&) = default;
  };
  std::vector<Entry> entries;

  FrequencyIndex() = default;
  explicit FrequencyIndex(std::vector<Entry> e);

  bool zero() const { return entries.empty(); }
  int max_axis() const { return entries.empty() ? 0 : entries.back().axis; }
  double norm() const;

  friend auto operator<=>(const FrequencyIndex&, const FrequencyIndex&) = default;
  std::string str() const;
};

// Closed-form frequency-weight rule i -> a_i, so that arbitrarily many axes
// are addressable without storing arrays.
struct WeightRule {
  enum class Kind { Power, Geometric };
  Kind kind = Kind::Power;
  // Power:     a_i = c * (i + offset)^q
  // Geometric: a_i = c * ratio^i
  double c = 1.0;
  double q = 1.0;
  double offset = 0.0;
  double ratio = 2.0;

  static WeightRule power(double c, double q, double offset = 0.0);
  static WeightRule geometric(double c, double ratio);

  double at(int i) const;  // a_i, i >= 1
  bool nondecreasing() const;
  // sum_{i>=1} 1/a_i, or +infinity when the series diverges. Truncation rule:
  // terms are added until the closed-form tail bound drops below 1e-12.
  double inverse_sum() const;
};

// The three smoothness-map families gamma(.).
class SmoothnessMap {
 public:
  enum class Family { SobolevDK, Mixed, Anisotropic };

  static SmoothnessMap sobolev(int d, int k);
  static SmoothnessMap mixed(WeightRule a);
  static SmoothnessMap anisotropic(WeightRule a);

  Family family() const { return family_; }
  int sobolev_d() const { return d_; }
  int sobolev_k() const { return k_; }
  const WeightRule& weights() const { return weights_; }

  // gamma(s); 0 for the empty scale. SobolevDK rejects axes beyond d.
  double gamma(const DyadicScale& s) const;
  // Inverse smoothness index: d/k, 1/a_1 or sum 1/a_i (+infinity possible).
  double alpha() const;

  std::string str() const;

 private:
  SmoothnessMap() = default;
  Family family_ = Family::Mixed;
  int d_ = 0, k_ = 0;
  WeightRule weights_;
};

inline constexpr std::size_t kDefaultEnumerationCap = 1000000;

// All nonzero scales s with (1+2*alpha)*gamma(s) <= budget, canonically
// ordered (lexicographic on the sparse entry lists). axis_limit > 0 restricts
// the enumeration to the first axis_limit coordinates.
std::vector<DyadicScale> enumerate_scales(const SmoothnessMap& map, double budget,
                                          std::size_t cap = kDefaultEnumerationCap,
                                          int axis_limit = 0);

// All l with |l_i| in [floor(2^{s_i-1}), 2^{s_i}) on the stored axes of s and
// l_i = 0 elsewhere; both signs, deterministic order.
std::vector<FrequencyIndex> enumerate_frequencies(const DyadicScale& s,
                                                  std::size_t cap = kDefaultEnumerationCap);

// Truncation budget J = floor(((1+2a)/(2+a)) * log2 n), at least 1.
int select_J(const SmoothnessMap& map, std::size_t n);

// Largest axis i whose single-axis scale e_i satisfies
// (1+2*alpha)*gamma(e_i) < J; 1 if no axis qualifies.
int d_max(const SmoothnessMap& map, double J, std::size_t cap = kDefaultEnumerationCap);

}  // namespace otmap
