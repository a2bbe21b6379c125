#pragma once

#include "ppdsc/core.hpp"
#include "ppdsc/model.hpp"

#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace ppdsc::io {

// Edge-list file, one per layer:
//   n=<int>
//   i<TAB>j        one line per undirected edge, 0 <= i < j < n
//
// Membership file: CSV "node,community" with 0-based nodes and 1-based
// communities.

namespace detail {

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

inline bool parse_int(std::string_view s, long& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

}  // namespace detail

inline void write_edge_list(const model::Adjacency& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const auto n = a.n();
  out << "n=" << n << "\n";
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (a.matrix()(i, j) == 1.0) out << i << "\t" << j << "\n";
  if (!out) throw std::runtime_error("short write: " + path);
}

inline model::Adjacency read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw parse_error(path, line_no, "missing header line");
  const auto header = detail::strip_cr(line);
  long n = 0;
  if (header.substr(0, 2) != "n=" || !detail::parse_int(header.substr(2), n) || n < 1)
    throw parse_error(path, line_no, "header must be n=<positive int>");
  Matrix m = Matrix::Zero(n, n);
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::strip_cr(line);
    if (body.empty()) throw parse_error(path, line_no, "empty line");
    const auto tab = body.find('\t');
    if (tab == std::string_view::npos) throw parse_error(path, line_no, "expected i<TAB>j");
    long i = 0, j = 0;
    if (!detail::parse_int(body.substr(0, tab), i) || !detail::parse_int(body.substr(tab + 1), j))
      throw parse_error(path, line_no, "endpoints must be integers");
    if (i < 0 || j >= n) throw parse_error(path, line_no, "endpoint out of range [0, n)");
    if (i >= j) throw parse_error(path, line_no, "edges must satisfy i < j");
    if (m(i, j) == 1.0) throw parse_error(path, line_no, "duplicate edge");
    m(i, j) = 1.0;
    m(j, i) = 1.0;
  }
  return model::Adjacency(std::move(m));
}

inline void write_membership(const std::vector<int>& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "node,community\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << "," << labels[i] + 1 << "\n";
  if (!out) throw std::runtime_error("short write: " + path);
}

/// Reads "node,community" rows; every node in [0, n) must appear exactly
/// once. Returns 0-based labels.
inline std::vector<int> read_membership(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || detail::strip_cr(line) != "node,community")
    throw parse_error(path, line_no, "expected header node,community");
  std::vector<long> communities;
  std::vector<char> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::strip_cr(line);
    if (body.empty()) throw parse_error(path, line_no, "empty line");
    const auto comma = body.find(',');
    if (comma == std::string_view::npos) throw parse_error(path, line_no, "expected node,community");
    long node = 0, community = 0;
    if (!detail::parse_int(body.substr(0, comma), node) ||
        !detail::parse_int(body.substr(comma + 1), community))
      throw parse_error(path, line_no, "fields must be integers");
    if (node < 0) throw parse_error(path, line_no, "node index must be nonnegative");
    if (community < 1) throw parse_error(path, line_no, "communities are 1-based");
    if (static_cast<std::size_t>(node) >= communities.size()) {
      communities.resize(static_cast<std::size_t>(node) + 1, 0);
      seen.resize(static_cast<std::size_t>(node) + 1, 0);
    }
    if (seen[static_cast<std::size_t>(node)])
      throw parse_error(path, line_no, "node listed twice");
    seen[static_cast<std::size_t>(node)] = 1;
    communities[static_cast<std::size_t>(node)] = community;
  }
  if (communities.empty()) throw parse_error(path, line_no, "no membership rows");
  std::vector<int> labels(communities.size());
  for (std::size_t i = 0; i < communities.size(); ++i) {
    if (!seen[i])
      throw parse_error(path, line_no, "node " + std::to_string(i) + " missing");
    labels[i] = static_cast<int>(communities[i]) - 1;
  }
  return labels;
}

}  // namespace ppdsc::io
