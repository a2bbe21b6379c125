#pragma once

#include "ppdsc/clustering.hpp"
#include "ppdsc/core.hpp"
#include "ppdsc/debias.hpp"
#include "ppdsc/model.hpp"
#include "ppdsc/privacy.hpp"
#include "ppdsc/spectral.hpp"

#include <cstring>
#include <utility>
#include <vector>

namespace ppdsc::federation {

// Substream tags hung off a pipeline's master seed. Layer l perturbs with
// derive(master, kStreamPerturb, l); clustering uses derive(master,
// kStreamCluster). run_ppdsc and run_oracle share these derivations, so one
// master seed gives every method the same perturbed layers.
inline constexpr std::uint64_t kStreamPerturb = 0x7065727475726231ULL;
inline constexpr std::uint64_t kStreamCluster = 0x636c757374657231ULL;

/// The only message a local machine sends: its id and the top-K eigenpairs of
/// its corrected layer. No raw or debiased network ever crosses this boundary.
struct LocalReport {
  std::uint32_t machine_id = 0;
  spectral::Subspace subspace;  // basis n×K, eigenvalues length K descending
};

/// Values-on-the-wire bookkeeping for one run.
struct CommunicationLedger {
  std::uint64_t values_sent_per_machine = 0;
  std::uint64_t values_sent_total = 0;
  std::uint64_t centralized_equivalent = 0;  // L * n(n+1)/2 dense upper triangles
};

enum class Scheme { ppdsc, centralized };

inline CommunicationLedger communication_cost(std::uint64_t n, std::uint64_t k,
                                              std::uint64_t l, Scheme scheme) {
  if (n == 0 || k == 0 || l == 0)
    throw dimension_error("communication_cost: arguments must be positive");
  CommunicationLedger ledger;
  ledger.centralized_equivalent = l * (n * (n + 1) / 2);
  ledger.values_sent_per_machine = scheme == Scheme::ppdsc ? n * k : n * (n + 1) / 2;
  ledger.values_sent_total = l * ledger.values_sent_per_machine;
  return ledger;
}

struct PipelineResult {
  spectral::Subspace subspace;       // the approximated eigen-space
  std::vector<int> labels;           // estimated communities, 0-based
  std::vector<LocalReport> reports;  // empty for the centralized baseline
  CommunicationLedger ledger;
  std::vector<std::uint64_t> layer_fingerprints;  // FNV-1a of each perturbed layer
};

// ---- report wire format -----------------------------------------------------
//
//   machine_id : uint32 LE
//   n, K       : uint32 LE
//   eigenvalues: K float64 LE
//   basis      : n*K float64 LE, column-major
//
// 12 + 8*K + 8*n*K bytes total; alternate-language workers can interoperate.

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

inline double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_report(const LocalReport& report) {
  const auto n = report.subspace.n();
  const auto k = report.subspace.k();
  if (k < 1 || n < k || report.subspace.eigenvalues.size() != k)
    throw dimension_error("serialize_report: malformed report");
  std::vector<std::uint8_t> out;
  out.reserve(12 + 8 * static_cast<std::size_t>(k + n * k));
  detail::put_u32(out, report.machine_id);
  detail::put_u32(out, static_cast<std::uint32_t>(n));
  detail::put_u32(out, static_cast<std::uint32_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) detail::put_f64(out, report.subspace.eigenvalues(j));
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) detail::put_f64(out, report.subspace.basis(i, j));
  return out;
}

inline LocalReport deserialize_report(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12) throw parse_error("<report>", 1, "truncated header");
  LocalReport report;
  report.machine_id = detail::get_u32(bytes.data());
  const auto n = static_cast<Eigen::Index>(detail::get_u32(bytes.data() + 4));
  const auto k = static_cast<Eigen::Index>(detail::get_u32(bytes.data() + 8));
  if (k < 1 || n < k) throw parse_error("<report>", 1, "invalid dimensions");
  const std::size_t want = 12 + 8 * static_cast<std::size_t>(k + n * k);
  if (bytes.size() != want) throw parse_error("<report>", 1, "payload size mismatch");
  report.subspace.eigenvalues.resize(k);
  report.subspace.basis.resize(n, k);
  const std::uint8_t* p = bytes.data() + 12;
  for (Eigen::Index j = 0; j < k; ++j, p += 8)
    report.subspace.eigenvalues(j) = detail::get_f64(p);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i, p += 8) report.subspace.basis(i, j) = detail::get_f64(p);
  return report;
}

// ---- pipeline stages --------------------------------------------------------

/// Everything a machine does after randomized response: bias correction and
/// the top-K eigen-decomposition. Pure post-processing of the perturbed layer.
inline LocalReport local_stage_perturbed(const model::Adjacency& a_tilde,
                                         const privacy::PrivacyParams& params, int k,
                                         debias::DebiasMode mode, std::uint32_t machine_id) {
  const Matrix corrected = debias::variant_matrix(a_tilde, params, mode);
  return LocalReport{machine_id, spectral::top_k_eigenvectors(corrected, k)};
}

/// Full local stage: perturb the private layer, then correct and decompose.
/// The raw layer influences the report only through its perturbed version.
inline LocalReport local_stage(const model::Adjacency& a, const privacy::PrivacyParams& params,
                               int k, debias::DebiasMode mode, std::uint64_t seed,
                               std::uint32_t machine_id = 0) {
  return local_stage_perturbed(privacy::rr_perturb(a, params, seed), params, k, mode, machine_id);
}

/// Coordinator stage: Procrustes-align every report onto the reference one,
/// average, re-orthonormalize, cluster. Consumes only LocalReport values;
/// each payload is checked to be an orthonormal eigenvector block.
inline PipelineResult coordinate(const std::vector<LocalReport>& reports, int reference, int k,
                                 const clustering::KMeansConfig& kconfig, std::uint64_t seed) {
  if (reports.empty()) throw dimension_error("coordinate: no reports");
  if (reference < 0 || reference >= static_cast<int>(reports.size()))
    throw dimension_error("coordinate: reference index out of range");
  const auto n = reports.front().subspace.n();
  for (const auto& rep : reports) {
    if (rep.subspace.n() != n || rep.subspace.k() != k)
      throw dimension_error("coordinate: report shapes differ");
    spectral::detail::require_orthonormal(rep.subspace, "coordinate");
  }
  const auto& ref = reports[static_cast<std::size_t>(reference)].subspace;
  Matrix mean = Matrix::Zero(n, k);
  for (const auto& rep : reports)
    mean += rep.subspace.basis * spectral::procrustes_align(rep.subspace, ref);
  mean /= static_cast<double>(reports.size());

  PipelineResult result;
  result.subspace = spectral::orthonormalize(mean);
  result.labels = clustering::kmeans(result.subspace.basis, k, kconfig, seed).labels;
  result.reports = reports;
  result.ledger = communication_cost(static_cast<std::uint64_t>(n),
                                     static_cast<std::uint64_t>(k),
                                     static_cast<std::uint64_t>(reports.size()), Scheme::ppdsc);
  return result;
}

/// The simulated distributed pipeline: every layer runs its local stage with
/// the substream derive(master_seed, kStreamPerturb, l), the coordinator then
/// aligns, averages and clusters.
inline PipelineResult run_ppdsc(const std::vector<model::Adjacency>& layers,
                                const privacy::PrivacyParams& params, int k,
                                debias::DebiasMode mode, int reference,
                                const clustering::KMeansConfig& kconfig,
                                std::uint64_t master_seed) {
  if (layers.empty()) throw dimension_error("run_ppdsc: no layers");
  const auto n = layers.front().n();
  std::vector<LocalReport> reports;
  std::vector<std::uint64_t> fingerprints;
  reports.reserve(layers.size());
  fingerprints.reserve(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].n() != n) throw dimension_error("run_ppdsc: layer sizes differ");
    const auto a_tilde = privacy::rr_perturb(layers[l], params,
                                             rng::derive(master_seed, kStreamPerturb, l));
    fingerprints.push_back(fingerprint(a_tilde.matrix()));
    reports.push_back(local_stage_perturbed(a_tilde, params, k, mode,
                                            static_cast<std::uint32_t>(l)));
  }
  PipelineResult result = coordinate(reports, reference, k, kconfig,
                                     rng::derive(master_seed, kStreamCluster));
  result.layer_fingerprints = std::move(fingerprints);
  return result;
}

/// The distributed pipeline on layers that were already perturbed elsewhere
/// (say by a data-collection party): skips randomized response and runs the
/// correction, eigen-decomposition and coordinator stages with the stated
/// parameters.
inline PipelineResult run_ppdsc_perturbed(const std::vector<model::Adjacency>& perturbed_layers,
                                          const privacy::PrivacyParams& params, int k,
                                          debias::DebiasMode mode, int reference,
                                          const clustering::KMeansConfig& kconfig,
                                          std::uint64_t master_seed) {
  if (perturbed_layers.empty()) throw dimension_error("run_ppdsc: no layers");
  const auto n = perturbed_layers.front().n();
  std::vector<LocalReport> reports;
  std::vector<std::uint64_t> fingerprints;
  reports.reserve(perturbed_layers.size());
  for (std::size_t l = 0; l < perturbed_layers.size(); ++l) {
    if (perturbed_layers[l].n() != n) throw dimension_error("run_ppdsc: layer sizes differ");
    fingerprints.push_back(fingerprint(perturbed_layers[l].matrix()));
    reports.push_back(local_stage_perturbed(perturbed_layers[l], params, k, mode,
                                            static_cast<std::uint32_t>(l)));
  }
  PipelineResult result = coordinate(reports, reference, k, kconfig,
                                     rng::derive(master_seed, kStreamCluster));
  result.layer_fingerprints = std::move(fingerprints);
  return result;
}

/// Centralized baseline: aggregate the fully debiased layers into one matrix,
/// eigen-decompose, cluster. Uses the same perturbation substreams as
/// run_ppdsc so the two can be compared on paired draws.
inline PipelineResult run_oracle(const std::vector<model::Adjacency>& layers,
                                 const privacy::PrivacyParams& params, int k,
                                 const clustering::KMeansConfig& kconfig,
                                 std::uint64_t master_seed) {
  if (layers.empty()) throw dimension_error("run_oracle: no layers");
  const auto n = layers.front().n();
  std::vector<Matrix> debiased;
  std::vector<std::uint64_t> fingerprints;
  debiased.reserve(layers.size());
  fingerprints.reserve(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].n() != n) throw dimension_error("run_oracle: layer sizes differ");
    const auto a_tilde = privacy::rr_perturb(layers[l], params,
                                             rng::derive(master_seed, kStreamPerturb, l));
    fingerprints.push_back(fingerprint(a_tilde.matrix()));
    debiased.push_back(debias::variant_matrix(a_tilde, params, debias::DebiasMode::full));
  }
  PipelineResult result;
  result.subspace = spectral::top_k_eigenvectors(debias::aggregate(debiased), k);
  result.labels = clustering::kmeans(result.subspace.basis, k, kconfig,
                                     rng::derive(master_seed, kStreamCluster)).labels;
  result.ledger = communication_cost(static_cast<std::uint64_t>(n),
                                     static_cast<std::uint64_t>(k),
                                     static_cast<std::uint64_t>(layers.size()),
                                     Scheme::centralized);
  result.layer_fingerprints = std::move(fingerprints);
  return result;
}

}  // namespace ppdsc::federation
