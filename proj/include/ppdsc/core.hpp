#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ppdsc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---- error types -----------------------------------------------------------

/// Mismatched or invalid operand shapes.
struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Privacy parameters outside the domain an operation needs (e.g. q+q' <= 1).
struct degenerate_parameters : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An aggregated basis lost column rank and cannot be orthonormalized.
struct degenerate_aggregate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file; message carries path, 1-based line and reason.
struct parse_error : std::runtime_error {
  parse_error(const std::string& path, std::size_t line_no, const std::string& reason)
      : std::runtime_error(path + ":" + std::to_string(line_no) + ": " + reason),
        line(line_no) {}
  std::size_t line;
};

// ---- seeded randomness ------------------------------------------------------
//
// Every random operation takes an explicit 64-bit seed. Stream seeds for
// layers, replicates and restarts are derived from a master seed with a
// SplitMix64 avalanche, so independent streams never share RNG state and
// whole runs replay bit-identically from one integer.

namespace rng {

/// SplitMix64 finalizer; a bijective avalanche on 64-bit values.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Seed of substream `index` of `master`: mix64(master ^ mix64(index + phi64)).
constexpr std::uint64_t derive(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

constexpr std::uint64_t derive(std::uint64_t master, std::uint64_t a,
                               std::uint64_t b) noexcept {
  return derive(derive(master, a), b);
}

using engine = std::mt19937_64;

/// Uniform double in [0,1) from the top 53 bits of one engine draw. Used
/// instead of std::uniform_real_distribution so streams are bit-identical
/// across standard libraries.
inline double unit_double(engine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// One Bernoulli(p) draw; consumes exactly one engine step.
inline bool bernoulli(engine& g, double p) { return unit_double(g) < p; }

}  // namespace rng

/// FNV-1a over a dense matrix's shape and raw bytes (column-major).
inline std::uint64_t fingerprint(const Matrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto absorb = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t rows = m.rows(), cols = m.cols();
  absorb(&rows, sizeof rows);
  absorb(&cols, sizeof cols);
  absorb(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  return h;
}

}  // namespace ppdsc
