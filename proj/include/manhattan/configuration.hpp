#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "manhattan/geometry.hpp"
#include "manhattan/philox.hpp"

namespace manhattan {

// Raised when a requested field would exceed the memory budget.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Default budget: 2^31 sites (256 MiB of bits), comfortably above M = 4000.
inline constexpr std::uint64_t kDefaultMaxSites = std::uint64_t(1) << 31;

inline std::uint64_t site_count(int extent) {
  const std::uint64_t side = 2 * std::uint64_t(extent) + 1;
  return side * side;
}

inline void check_extent(int extent, std::uint64_t max_sites = kDefaultMaxSites) {
  if (extent < 1) throw std::invalid_argument("extent must be >= 1, got " + std::to_string(extent));
  if (site_count(extent) > max_sites)
    throw ResourceLimitError("extent " + std::to_string(extent) + " needs " +
                             std::to_string(site_count(extent)) + " sites, budget is " +
                             std::to_string(max_sites));
}

// One bit per site over [-M, M]^2, row-major by b from (-M, -M).
class BitGrid {
 public:
  BitGrid() = default;
  explicit BitGrid(int extent) : extent_(extent), side_(2 * extent + 1), words_((site_count(extent) + 63) / 64, 0) {}

  int extent() const { return extent_; }
  bool contains(Site s) const { return std::abs(s.a) <= extent_ && std::abs(s.b) <= extent_; }
  std::size_t index(Site s) const { return std::size_t(s.b + extent_) * side_ + std::size_t(s.a + extent_); }

  bool get(Site s) const {
    const std::size_t k = index(s);
    return (words_[k >> 6] >> (k & 63)) & 1u;
  }
  void set(Site s, bool v) {
    const std::size_t k = index(s);
    const std::uint64_t bit = std::uint64_t(1) << (k & 63);
    if (v)
      words_[k >> 6] |= bit;
    else
      words_[k >> 6] &= ~bit;
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += std::size_t(__builtin_popcountll(w));
    return c;
  }

  friend bool operator==(const BitGrid&, const BitGrid&) = default;

 private:
  int extent_ = 0;
  std::size_t side_ = 0;
  std::vector<std::uint64_t> words_;
};

enum class Provenance : std::uint8_t { sampled, enhanced, hybrid, explicit_ };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::sampled: return "sampled";
    case Provenance::enhanced: return "enhanced";
    case Provenance::hybrid: return "hybrid";
    case Provenance::explicit_: return "explicit";
  }
  return "?";
}

inline Provenance parse_provenance(const std::string& s) {
  if (s == "sampled") return Provenance::sampled;
  if (s == "enhanced") return Provenance::enhanced;
  if (s == "hybrid") return Provenance::hybrid;
  if (s == "explicit") return Provenance::explicit_;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

// A finite mirror field: closed(s) means the tilted edge with midpoint s
// carries a mirror.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(int extent, std::uint64_t max_sites = kDefaultMaxSites) {
    check_extent(extent, max_sites);
    grid_ = BitGrid(extent);
  }

  static Configuration all_closed(int extent) {
    Configuration c(extent);
    for (int b = -extent; b <= extent; ++b)
      for (int a = -extent; a <= extent; ++a) c.grid_.set({a, b}, true);
    return c;
  }

  int extent() const { return grid_.extent(); }
  bool contains(Site s) const { return grid_.contains(s); }
  bool closed(Site s) const { return grid_.get(s); }
  // Sites outside the extent read as open.
  bool closed_or_open(Site s) const { return contains(s) && grid_.get(s); }
  void set_closed(Site s, bool v) {
    if (!contains(s))
      throw std::out_of_range("site (" + std::to_string(s.a) + "," + std::to_string(s.b) +
                              ") outside extent " + std::to_string(extent()));
    grid_.set(s, v);
  }
  std::size_t closed_count() const { return grid_.count(); }
  std::uint64_t size() const { return site_count(extent()); }

  const BitGrid& grid() const { return grid_; }

  std::optional<double> p;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> stream_index;
  Provenance provenance = Provenance::explicit_;
  std::string generator = kGeneratorId;

  // Field equality; metadata is compared separately where it matters.
  bool same_field(const Configuration& o) const { return grid_ == o.grid_; }
  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  BitGrid grid_;
};

// Per-site uniforms keyed by (seed, stream, a, b). Values are computed on
// demand, so fields can be coupled across p and across extents.
class UniformField {
 public:
  UniformField(int extent, std::uint64_t seed, std::uint64_t stream_index)
      : extent_(extent), seed_(seed), stream_(stream_index) {}

  int extent() const { return extent_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }
  double operator()(Site s) const { return site_uniform(seed_, stream_, s.a, s.b); }

 private:
  int extent_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

inline UniformField uniforms(int extent, std::uint64_t seed, std::uint64_t stream_index,
                             std::uint64_t max_sites = kDefaultMaxSites) {
  check_extent(extent, max_sites);
  return UniformField(extent, seed, stream_index);
}

inline void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1], got " + std::to_string(p));
}

inline Configuration threshold(const UniformField& f, double p, std::uint64_t max_sites = kDefaultMaxSites) {
  check_probability(p);
  Configuration c(f.extent(), max_sites);
  const int m = f.extent();
  for (int b = -m; b <= m; ++b)
    for (int a = -m; a <= m; ++a)
      if (f({a, b}) < p) c.set_closed({a, b}, true);
  c.p = p;
  c.seed = f.seed();
  c.stream_index = f.stream_index();
  c.provenance = Provenance::sampled;
  return c;
}

inline Configuration sample(double p, int extent, std::uint64_t seed, std::uint64_t stream_index,
                            std::uint64_t max_sites = kDefaultMaxSites) {
  return threshold(uniforms(extent, seed, stream_index, max_sites), p, max_sites);
}

// inner on edges inside Q_k, outer elsewhere.
inline Configuration hybrid(const Configuration& inner, const Configuration& outer, int k) {
  if (inner.extent() != outer.extent())
    throw std::invalid_argument("hybrid: extent mismatch (" + std::to_string(inner.extent()) + " vs " +
                                std::to_string(outer.extent()) + ")");
  if (k < 1) throw std::invalid_argument("hybrid: radius must be >= 1");
  Configuration c = outer;
  const int m = c.extent();
  const int r = k / 2;
  // Only sites within |a|,|b| <= 2r+1 can belong to edges inside Q_k.
  const int lim = std::min(m, 2 * r + 1);
  for (int b = -lim; b <= lim; ++b)
    for (int a = -lim; a <= lim; ++a)
      if (edge_inside_q({a, b}, k)) c.set_closed({a, b}, inner.closed({a, b}));
  c.provenance = Provenance::hybrid;
  c.p = inner.p;
  c.seed = inner.seed;
  c.stream_index = inner.stream_index;
  return c;
}

}  // namespace manhattan
