#include "ppdsc/federation.hpp"

#include "ppdsc/experiments.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <type_traits>
#include <vector>

using namespace ppdsc;
using debias::DebiasMode;
using federation::LocalReport;
using federation::PipelineResult;
using federation::Scheme;
using privacy::PrivacyParams;

// The coordinator's interface accepts eigenvector reports only; there is no
// way to hand it raw or debiased network matrices.
static_assert(!std::is_invocable_v<decltype(&federation::coordinate),
                                   const std::vector<model::Adjacency>&, int, int,
                                   const clustering::KMeansConfig&, std::uint64_t>);
static_assert(!std::is_invocable_v<decltype(&federation::coordinate),
                                   const std::vector<debias::DebiasedSquare>&, int, int,
                                   const clustering::KMeansConfig&, std::uint64_t>);
static_assert(!std::is_constructible_v<LocalReport, model::Adjacency>);

namespace {

model::MultiLayerSBM two_block_model(int n, double in_p, double out_p) {
  Matrix b(2, 2);
  b << in_p, out_p, out_p, in_p;
  return model::MultiLayerSBM(model::balanced_assignment(n, 2), {model::LinkMatrix(b)});
}

spectral::Subspace population_subspace(const model::MultiLayerSBM& sbm) {
  std::vector<Matrix> ps;
  for (int l = 0; l < sbm.l(); ++l) ps.push_back(sbm.link_probability_of(l));
  return spectral::top_k_eigenvectors(model::population_target(ps), sbm.k());
}

}  // namespace

TEST_CASE("local stage recovers the population eigenspace on a strong model") {
  const auto sbm = two_block_model(80, 0.7, 0.1);
  const auto a = sbm.sample(4).front();
  const auto report = federation::local_stage(a, PrivacyParams(1.0, 1.0), 2, DebiasMode::full, 9, 0);
  CHECK(spectral::projection_distance(report.subspace, population_subspace(sbm)) < 0.2);
}

TEST_CASE("modes none and full differ only on the diagonal at q = q' = 1") {
  const auto a = two_block_model(40, 0.6, 0.2).sample(8).front();
  const PrivacyParams params(1.0, 1.0);
  const Matrix raw = debias::variant_matrix(a, params, DebiasMode::none);
  const Matrix corrected = debias::variant_matrix(a, params, DebiasMode::full);
  Matrix diff = raw - corrected;
  const Vector diag = diff.diagonal();
  diff.diagonal().setZero();
  CHECK(diff.isZero(0.0));
  CHECK((diag - a.matrix().rowwise().sum() / 40.0).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("local stage is deterministic and factors through the perturbed layer") {
  const auto a = two_block_model(30, 0.6, 0.2).sample(2).front();
  const PrivacyParams params(0.8, 0.9);
  const auto r1 = federation::local_stage(a, params, 2, DebiasMode::full, 33, 7);
  const auto r2 = federation::local_stage(a, params, 2, DebiasMode::full, 33, 7);
  CHECK(federation::serialize_report(r1) == federation::serialize_report(r2));

  const auto perturbed = privacy::rr_perturb(a, params, 33);
  const auto r3 = federation::local_stage_perturbed(perturbed, params, 2, DebiasMode::full, 7);
  CHECK(r1.subspace.basis == r3.subspace.basis);
  CHECK(r1.subspace.eigenvalues == r3.subspace.eigenvalues);
}

TEST_CASE("coordinate with a single report keeps its subspace") {
  const auto a = two_block_model(30, 0.7, 0.1).sample(3).front();
  const auto report = federation::local_stage(a, PrivacyParams(1.0, 1.0), 2, DebiasMode::full, 1, 0);
  const auto result = federation::coordinate({report}, 0, 2, {}, 5);
  CHECK(spectral::projection_distance(result.subspace, report.subspace) <= 1e-10);
}

TEST_CASE("coordinate cancels orthogonal rotations of a common subspace") {
  const auto a = two_block_model(24, 0.7, 0.1).sample(6).front();
  const auto base = federation::local_stage(a, PrivacyParams(1.0, 1.0), 2, DebiasMode::full, 1, 0);
  Matrix rot(2, 2);
  const double t = 0.83;
  rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  LocalReport rotated{1, {base.subspace.basis * rot, base.subspace.eigenvalues}};
  LocalReport flipped{2, {-base.subspace.basis, base.subspace.eigenvalues}};
  const auto result = federation::coordinate({base, rotated, flipped}, 0, 2, {}, 5);
  CHECK(spectral::projection_distance(result.subspace, base.subspace) <= 1e-10);
}

TEST_CASE("coordinate validates its inputs") {
  const auto a = two_block_model(20, 0.7, 0.1).sample(1).front();
  const auto report = federation::local_stage(a, PrivacyParams(1.0, 1.0), 2, DebiasMode::full, 1, 0);
  CHECK_THROWS_AS(federation::coordinate(std::vector<LocalReport>{}, 0, 2, {}, 1),
                  dimension_error);
  CHECK_THROWS_AS(federation::coordinate(std::vector<LocalReport>{report}, 1, 2, {}, 1),
                  dimension_error);
  LocalReport junk = report;
  junk.subspace.basis = Matrix::Ones(20, 2);  // not an eigenvector payload
  CHECK_THROWS_AS(federation::coordinate(std::vector<LocalReport>{junk}, 0, 2, {}, 1),
                  dimension_error);
}

TEST_CASE("averaging reports beats the worst single machine on the simulation config") {
  const auto assignment = model::balanced_assignment(210, 3);
  const model::MultiLayerSBM sbm(assignment, experiments::fig1_link_matrices(10));
  const auto v_pop = population_subspace(sbm);
  const PrivacyParams params(0.9, 0.9);
  int improved = 0;
  for (std::uint64_t seedling = 0; seedling < 20; ++seedling) {
    const auto layers = sbm.sample(rng::derive(1000, seedling));
    const auto result = federation::run_ppdsc(layers, params, 3, DebiasMode::full, 0, {},
                                              rng::derive(2000, seedling));
    double worst = 0.0;
    for (const auto& report : result.reports)
      worst = std::max(worst, spectral::projection_distance(report.subspace, v_pop));
    if (spectral::projection_distance(result.subspace, v_pop) < worst) ++improved;
  }
  CHECK(improved >= 16);
}

TEST_CASE("single-layer pipeline equals the centralized baseline") {
  const auto sbm = two_block_model(40, 0.6, 0.2);
  const auto layers = sbm.sample(12);
  const PrivacyParams params(0.9, 0.8);
  const auto distributed =
      federation::run_ppdsc(layers, params, 2, DebiasMode::full, 0, {}, 77);
  const auto central = federation::run_oracle(layers, params, 2, {}, 77);
  CHECK(spectral::projection_distance(distributed.subspace, central.subspace) <= 1e-10);
  CHECK(distributed.layer_fingerprints == central.layer_fingerprints);
  CHECK(clustering::misclassification_rate(distributed.labels, central.labels) == 0.0);
}

TEST_CASE("strong-signal pipeline classifies perfectly without privacy") {
  const auto sbm = two_block_model(100, 0.7, 0.05);
  Matrix b = sbm.layers.front().matrix();
  std::vector<model::LinkMatrix> bs(4, model::LinkMatrix(b));
  const model::MultiLayerSBM multi(model::balanced_assignment(100, 2), bs);
  for (std::uint64_t seedling = 0; seedling < 20; ++seedling) {
    const auto layers = multi.sample(rng::derive(31, seedling));
    const auto result = federation::run_ppdsc(layers, PrivacyParams(1.0, 1.0), 2,
                                              DebiasMode::full, 0, {}, rng::derive(32, seedling));
    CHECK(clustering::misclassification_rate(result.labels, multi.assignment.labels()) == 0.0);
  }
}

TEST_CASE("oracle without privacy is classical debiased spectral clustering") {
  const auto sbm = two_block_model(50, 0.7, 0.1);
  const auto layers = sbm.sample(9);
  const auto result = federation::run_oracle(layers, PrivacyParams(1.0, 1.0), 2, {}, 41);
  Matrix expected = layers.front().matrix() * layers.front().matrix();
  expected.diagonal() -= layers.front().matrix().rowwise().sum();
  expected /= 50.0;
  const auto direct = spectral::top_k_eigenvectors(expected, 2);
  CHECK(spectral::projection_distance(result.subspace, direct) < 1e-12);
  CHECK(result.reports.empty());
}

TEST_CASE("oracle on a signal-free model sits at the random-guess level") {
  const int n = 90, k = 3;
  const auto assignment = model::balanced_assignment(n, k);
  const Matrix p = Matrix::Constant(n, n, 0.25);
  double total = 0.0;
  for (std::uint64_t seedling = 0; seedling < 20; ++seedling) {
    std::vector<model::Adjacency> layers;
    for (int l = 0; l < 3; ++l)
      layers.push_back(model::sample_adjacency(p, rng::derive(seedling, l)));
    const auto result = federation::run_oracle(layers, PrivacyParams(0.9, 0.9), k, {},
                                               rng::derive(60, seedling));
    total += clustering::misclassification_rate(result.labels, assignment.labels());
  }
  CHECK(std::abs(total / 20.0 - 2.0 / 3.0) <= 0.15);
}

TEST_CASE("pipeline results are reproducible and order-insensitive") {
  const auto assignment = model::balanced_assignment(60, 3);
  const model::MultiLayerSBM sbm(assignment, experiments::fig1_link_matrices(6));
  const auto layers = sbm.sample(5);
  const PrivacyParams params(0.9, 0.9);

  const auto r1 = federation::run_ppdsc(layers, params, 3, DebiasMode::full, 0, {}, 123);
  const auto r2 = federation::run_ppdsc(layers, params, 3, DebiasMode::full, 0, {}, 123);
  CHECK(r1.labels == r2.labels);
  CHECK(r1.subspace.basis == r2.subspace.basis);
  CHECK(r1.layer_fingerprints == r2.layer_fingerprints);

  // permute the machine reports and remap the reference
  std::vector<LocalReport> shuffled{r1.reports[3], r1.reports[0], r1.reports[5],
                                    r1.reports[1], r1.reports[4], r1.reports[2]};
  const auto permuted = federation::coordinate(shuffled, 1, 3, {}, rng::derive(123, federation::kStreamCluster));
  const auto original = federation::coordinate(r1.reports, 0, 3, {}, rng::derive(123, federation::kStreamCluster));
  CHECK(spectral::projection_distance(permuted.subspace, original.subspace) <= 1e-10);
  CHECK(clustering::misclassification_rate(permuted.labels, original.labels) == 0.0);
}

TEST_CASE("pipeline factors through externally perturbed layers") {
  const auto sbm = two_block_model(30, 0.6, 0.2);
  const model::MultiLayerSBM multi(model::balanced_assignment(30, 2),
                                   {sbm.layers.front(), sbm.layers.front(),
                                    sbm.layers.front()});
  const auto layers = multi.sample(44);
  const PrivacyParams params(0.8, 0.85);
  const std::uint64_t master = 91;
  const auto direct = federation::run_ppdsc(layers, params, 2, DebiasMode::full, 0, {}, master);
  std::vector<model::Adjacency> perturbed;
  for (std::size_t l = 0; l < layers.size(); ++l)
    perturbed.push_back(privacy::rr_perturb(layers[l], params,
                                            rng::derive(master, federation::kStreamPerturb, l)));
  const auto staged = federation::run_ppdsc_perturbed(perturbed, params, 2, DebiasMode::full, 0,
                                                      {}, master);
  CHECK(direct.labels == staged.labels);
  CHECK(direct.subspace.basis == staged.subspace.basis);
  CHECK(direct.layer_fingerprints == staged.layer_fingerprints);
}

TEST_CASE("communication ledger") {
  const auto ledger = federation::communication_cost(210, 3, 10, Scheme::ppdsc);
  CHECK(ledger.values_sent_per_machine == 630);
  CHECK(ledger.values_sent_total == 6300);
  CHECK(ledger.centralized_equivalent == 221550);

  const auto central = federation::communication_cost(210, 3, 10, Scheme::centralized);
  CHECK(central.values_sent_total == 221550);

  // K = n: eigenvector payloads exceed the dense upper triangle
  const auto square = federation::communication_cost(8, 8, 2, Scheme::ppdsc);
  CHECK(square.values_sent_total == 2 * 8 * 8);
  CHECK(square.centralized_equivalent == 2 * 36);
  CHECK(square.values_sent_total > square.centralized_equivalent);

  const auto tiny = federation::communication_cost(5, 1, 1, Scheme::ppdsc);
  CHECK(tiny.values_sent_per_machine == 5);
  CHECK(tiny.centralized_equivalent == 15);

  CHECK_THROWS_AS(federation::communication_cost(0, 1, 1, Scheme::ppdsc), dimension_error);
}

TEST_CASE("report wire format is exactly the documented flat record") {
  const auto a = two_block_model(11, 0.7, 0.1).sample(14).front();
  const auto report = federation::local_stage(a, PrivacyParams(1.0, 1.0), 2, DebiasMode::full, 3, 42);
  const auto bytes = federation::serialize_report(report);
  CHECK(bytes.size() == 12 + 8 * (2 + 11 * 2));
  CHECK(federation::detail::get_u32(bytes.data()) == 42);
  CHECK(federation::detail::get_u32(bytes.data() + 4) == 11);
  CHECK(federation::detail::get_u32(bytes.data() + 8) == 2);
  CHECK(federation::detail::get_f64(bytes.data() + 12) == report.subspace.eigenvalues(0));
  CHECK(federation::detail::get_f64(bytes.data() + 12 + 16) == report.subspace.basis(0, 0));

  const auto back = federation::deserialize_report(bytes);
  CHECK(back.machine_id == report.machine_id);
  CHECK(back.subspace.basis == report.subspace.basis);
  CHECK(back.subspace.eigenvalues == report.subspace.eigenvalues);

  auto corrupt = bytes;
  corrupt.pop_back();
  CHECK_THROWS_AS(federation::deserialize_report(corrupt), parse_error);
}
