#include "otmap/gamma.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace otmap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sparse_axes(const auto& entries, const char* what) {
  int prev = 0;
  for (const auto& e : entries) {
    if (e.axis < 1) throw UsageError(std::string(what) + ": axes must be >= 1");
    if (e.axis <= prev) throw UsageError(std::string(what) + ": axes must be strictly increasing");
    prev = e.axis;
  }
}

}  // namespace

DyadicScale::DyadicScale(std::vector<Entry> e) : entries(std::move(e)) {
  check_sparse_axes(entries, "DyadicScale");
  for (const auto& en : entries)
    if (en.scale < 1) throw UsageError("DyadicScale: stored scales must be >= 1");
}

int DyadicScale::scale_at(int axis) const {
  for (const auto& e : entries)
    if (e.axis == axis) return e.scale;
  return 0;
}

int DyadicScale::sum() const {
  int s = 0;
  for (const auto& e : entries) s += e.scale;
  return s;
}

std::string DyadicScale::str() const {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < entries.size(); ++i)
    os << (i ? "," : "") << "(" << entries[i].axis << "," << entries[i].scale << ")";
  os << "}";
  return os.str();
}

FrequencyIndex::FrequencyIndex(std::vector<Entry> e) : entries(std::move(e)) {
  check_sparse_axes(entries, "FrequencyIndex");
  for (const auto& en : entries)
    if (en.freq == 0) throw UsageError("FrequencyIndex: stored frequencies must be nonzero");
}

double FrequencyIndex::norm() const {
  double s = 0;
  for (const auto& e : entries) s += double(e.freq) * double(e.freq);
  return std::sqrt(s);
}

std::string FrequencyIndex::str() const {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < entries.size(); ++i)
    os << (i ? "," : "") << "(" << entries[i].axis << "," << entries[i].freq << ")";
  os << "}";
  return os.str();
}

WeightRule WeightRule::power(double c, double q, double offset) {
  if (c <= 0) throw UsageError("WeightRule: c must be positive");
  if (q < 0) throw UsageError("WeightRule: power exponent must be >= 0");
  if (offset < 0) throw UsageError("WeightRule: offset must be >= 0");
  WeightRule r;
  r.kind = Kind::Power;
  r.c = c;
  r.q = q;
  r.offset = offset;
  return r;
}

WeightRule WeightRule::geometric(double c, double ratio) {
  if (c <= 0) throw UsageError("WeightRule: c must be positive");
  if (ratio < 1.0) throw UsageError("WeightRule: geometric ratio must be >= 1");
  WeightRule r;
  r.kind = Kind::Geometric;
  r.c = c;
  r.ratio = ratio;
  return r;
}

double WeightRule::at(int i) const {
  if (i < 1) throw UsageError("WeightRule: axis must be >= 1");
  switch (kind) {
    case Kind::Power:
      return c * std::pow(double(i) + offset, q);
    case Kind::Geometric:
      return c * std::pow(ratio, double(i));
  }
  return 0;  // unreachable
}

bool WeightRule::nondecreasing() const {
  // Both closed forms are nondecreasing under the constructor constraints.
  return true;
}

double WeightRule::inverse_sum() const {
  constexpr double kTailTol = 1e-12;
  if (kind == Kind::Geometric) {
    if (ratio == 1.0) return kInf;
    // sum_{i>=1} (c r^i)^{-1} = 1 / (c (r-1))
    return 1.0 / (c * (ratio - 1.0));
  }
  // Power rule: diverges unless q > 1 (integral comparison). Explicit terms
  // are summed until the midpoint-rule error bound q/(24 c (i+1/2+offset)^{q+1})
  // drops below tolerance, then the remaining tail is the integral
  // int_{i+1/2}^inf dx / (c (x+offset)^q).
  if (q <= 1.0) return kInf;
  double sum = 0;
  for (int i = 1;; ++i) {
    sum += 1.0 / at(i);
    const double edge = double(i) + 0.5 + offset;
    const double err_bound = q / (24.0 * c * std::pow(edge, q + 1.0));
    if (err_bound < kTailTol) {
      sum += std::pow(edge, 1.0 - q) / (c * (q - 1.0));
      break;
    }
    if (i > 100000000) throw NumericalError("WeightRule: inverse_sum failed to converge");
  }
  return sum;
}

SmoothnessMap SmoothnessMap::sobolev(int d, int k) {
  if (d < 1 || k < 1) throw UsageError("SmoothnessMap: SobolevDK requires d >= 1 and k >= 1");
  SmoothnessMap m;
  m.family_ = Family::SobolevDK;
  m.d_ = d;
  m.k_ = k;
  return m;
}

SmoothnessMap SmoothnessMap::mixed(WeightRule a) {
  SmoothnessMap m;
  m.family_ = Family::Mixed;
  m.weights_ = a;
  return m;
}

SmoothnessMap SmoothnessMap::anisotropic(WeightRule a) {
  SmoothnessMap m;
  m.family_ = Family::Anisotropic;
  m.weights_ = a;
  return m;
}

double SmoothnessMap::gamma(const DyadicScale& s) const {
  if (s.empty()) return 0.0;
  switch (family_) {
    case Family::SobolevDK: {
      int mx = 0;
      for (const auto& e : s.entries) {
        if (e.axis > d_)
          throw UsageError("SmoothnessMap: scale touches axis " + std::to_string(e.axis) +
                           " beyond SobolevDK dimension " + std::to_string(d_));
        mx = std::max(mx, e.scale);
      }
      return double(k_) * double(mx);
    }
    case Family::Mixed: {
      double acc = 0;
      for (const auto& e : s.entries) acc += weights_.at(e.axis) * double(e.scale);
      return acc;
    }
    case Family::Anisotropic: {
      double mx = 0;
      for (const auto& e : s.entries) mx = std::max(mx, weights_.at(e.axis) * double(e.scale));
      return mx;
    }
  }
  return 0;  // unreachable
}

double SmoothnessMap::alpha() const {
  switch (family_) {
    case Family::SobolevDK:
      return double(d_) / double(k_);
    case Family::Mixed:
      return 1.0 / weights_.at(1);
    case Family::Anisotropic:
      return weights_.inverse_sum();
  }
  return 0;  // unreachable
}

std::string SmoothnessMap::str() const {
  std::ostringstream os;
  switch (family_) {
    case Family::SobolevDK:
      os << "sobolev(d=" << d_ << ",k=" << k_ << ")";
      break;
    case Family::Mixed:
    case Family::Anisotropic:
      os << (family_ == Family::Mixed ? "mixed" : "anisotropic");
      if (weights_.kind == WeightRule::Kind::Power)
        os << "(a_i=" << weights_.c << "*(i+" << weights_.offset << ")^" << weights_.q << ")";
      else
        os << "(a_i=" << weights_.c << "*" << weights_.ratio << "^i)";
      break;
  }
  return os.str();
}

namespace {

// DFS over axes. gamma is nondecreasing in every component, so a partial
// assignment already over budget cannot be extended.
void enumerate_rec(const SmoothnessMap& map, double factor, double budget, int axis, int max_axis,
                   std::vector<DyadicScale::Entry>& prefix, std::vector<DyadicScale>& out,
                   std::size_t cap) {
  if (axis > max_axis) return;
  // s_axis = 0 branch.
  enumerate_rec(map, factor, budget, axis + 1, max_axis, prefix, out, cap);
  for (int v = 1;; ++v) {
    prefix.push_back({axis, v});
    DyadicScale partial(prefix);
    if (factor * map.gamma(partial) > budget) {
      prefix.pop_back();
      break;
    }
    if (out.size() >= cap)
      throw EnumerationCapError("enumerate_scales: cap of " + std::to_string(cap) + " exceeded");
    out.push_back(partial);
    enumerate_rec(map, factor, budget, axis + 1, max_axis, prefix, out, cap);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<DyadicScale> enumerate_scales(const SmoothnessMap& map, double budget,
                                          std::size_t cap, int axis_limit) {
  if (budget <= 0) throw UsageError("enumerate_scales: budget must be positive");
  const double a = map.alpha();
  if (!std::isfinite(a))
    throw UsageError("enumerate_scales: alpha(gamma) is infinite; refuse to enumerate");
  const double factor = 1.0 + 2.0 * a;

  // Axes beyond this cannot appear in any admissible scale.
  int max_axis = 0;
  for (int i = 1;; ++i) {
    if (axis_limit > 0 && i > axis_limit) break;
    DyadicScale e({{i, 1}});
    if (map.family() == SmoothnessMap::Family::SobolevDK && i > map.sobolev_d()) break;
    if (factor * map.gamma(e) > budget) break;
    max_axis = i;
    if (std::size_t(i) > cap)
      throw EnumerationCapError("enumerate_scales: admissible axis count exceeds cap");
  }

  std::vector<DyadicScale> out;
  std::vector<DyadicScale::Entry> prefix;
  enumerate_rec(map, factor, budget, 1, max_axis, prefix, out, cap);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<FrequencyIndex> enumerate_frequencies(const DyadicScale& s, std::size_t cap) {
  if (s.empty()) throw UsageError("enumerate_frequencies: scale must be nonzero");
  // Admissible |l| per axis: [floor(2^{s-1}), 2^s).
  std::vector<std::vector<int>> per_axis;
  per_axis.reserve(s.entries.size());
  std::size_t total = 1;
  for (const auto& e : s.entries) {
    if (e.scale > 30) throw EnumerationCapError("enumerate_frequencies: scale too large");
    const int lo = 1 << (e.scale - 1);  // floor(2^{s-1}) with s >= 1
    const int hi = 1 << e.scale;
    std::vector<int> vals;
    for (int m = hi - 1; m >= lo; --m) vals.push_back(-m);
    for (int m = lo; m < hi; ++m) vals.push_back(m);
    total *= vals.size();
    if (total > cap) throw EnumerationCapError("enumerate_frequencies: cap exceeded");
    per_axis.push_back(std::move(vals));
  }

  std::vector<FrequencyIndex> out;
  out.reserve(total);
  std::vector<std::size_t> idx(per_axis.size(), 0);
  for (;;) {
    std::vector<FrequencyIndex::Entry> entries;
    entries.reserve(per_axis.size());
    for (std::size_t a = 0; a < per_axis.size(); ++a)
      entries.push_back({s.entries[a].axis, per_axis[a][idx[a]]});
    out.push_back(FrequencyIndex(std::move(entries)));
    // Odometer increment, last axis fastest.
    std::size_t a = per_axis.size();
    while (a > 0) {
      --a;
      if (++idx[a] < per_axis[a].size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
  }
}

int select_J(const SmoothnessMap& map, std::size_t n) {
  if (n < 1) throw UsageError("select_J: n must be >= 1");
  const double a = map.alpha();
  if (!std::isfinite(a)) throw UsageError("select_J: alpha(gamma) is infinite");
  const double j = (1.0 + 2.0 * a) / (2.0 + a) * std::log2(double(n));
  return std::max(1, int(std::floor(j)));
}

int d_max(const SmoothnessMap& map, double J, std::size_t cap) {
  const double a = map.alpha();
  if (!std::isfinite(a)) throw UsageError("d_max: alpha(gamma) is infinite");
  const double factor = 1.0 + 2.0 * a;
  int best = 1;  // degenerate floor when no axis qualifies
  for (int i = 1;; ++i) {
    if (map.family() == SmoothnessMap::Family::SobolevDK && i > map.sobolev_d()) break;
    DyadicScale e({{i, 1}});
    if (factor * map.gamma(e) < J)
      best = i;
    else if (map.family() != SmoothnessMap::Family::SobolevDK)
      break;  // weights nondecreasing, later axes only grow
    if (std::size_t(i) > cap) throw EnumerationCapError("d_max: axis scan exceeds cap");
  }
  return best;
}

}  // namespace otmap
