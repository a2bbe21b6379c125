#pragma once

#include "ppdsc/clustering.hpp"
#include "ppdsc/core.hpp"
#include "ppdsc/debias.hpp"
#include "ppdsc/federation.hpp"
#include "ppdsc/io.hpp"
#include "ppdsc/model.hpp"
#include "ppdsc/privacy.hpp"
#include "ppdsc/spectral.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ppdsc::experiments {

enum class Method { ppdsc, ppdsc_1b, ppdsc_2b, oracle };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::ppdsc: return "ppdsc";
    case Method::ppdsc_1b: return "ppdsc_1b";
    case Method::ppdsc_2b: return "ppdsc_2b";
    case Method::oracle: return "oracle";
  }
  return "?";
}

inline std::optional<Method> method_from_name(const std::string& name) {
  if (name == "ppdsc") return Method::ppdsc;
  if (name == "ppdsc_1b") return Method::ppdsc_1b;
  if (name == "ppdsc_2b") return Method::ppdsc_2b;
  if (name == "oracle") return Method::oracle;
  return std::nullopt;
}

struct ExperimentConfig {
  std::string preset;       // generator family: fig1_* or model1/model2
  std::string sweep_param;  // "q" | "n" | "L" | "alpha"
  std::vector<double> grid;
  int n = 210;
  int layers = 10;
  int k = 3;
  double q = 0.9;
  double qprime = 0.9;
  double alpha = 1.0;  // heterogeneity scale, model presets only
  int replicates = 20;
  std::vector<Method> methods{Method::ppdsc, Method::ppdsc_1b, Method::ppdsc_2b,
                              Method::oracle};
  std::uint64_t master_seed = 1;
  clustering::KMeansConfig kmeans;
  int reference = 0;  // reference machine for Procrustes alignment

  void validate() const {
    if (grid.empty()) throw std::invalid_argument("experiment grid must be nonempty");
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (methods.empty()) throw std::invalid_argument("methods list must be nonempty");
    if (sweep_param != "q" && sweep_param != "n" && sweep_param != "L" &&
        sweep_param != "alpha")
      throw std::invalid_argument("sweep_param must be one of q, n, L, alpha");
    kmeans.validate();
  }
};

struct MetricRow {
  std::string method;
  std::string sweep_param;
  double sweep_value = 0.0;
  int n = 0;
  int layers = 0;
  int k = 0;
  double q = 0.0;
  double qprime = 0.0;
  double alpha = 0.0;
  int replicate = 0;
  double projection_distance = 0.0;
  double misclassification_rate = 0.0;
  double wall_time_s = 0.0;
};

// ---- link-matrix generators --------------------------------------------------

/// The two 3-community link matrices behind the simulation presets, built
/// from the shared eigenvector frame W with spectra (1.5, 0.2, 0.4) and
/// (1.5, 0.2, -0.4).
inline std::pair<model::LinkMatrix, model::LinkMatrix> simulation_link_pair() {
  const double r = std::sqrt(2.0) / 2.0;
  Matrix w(3, 3);
  w << 0.5, 0.5, -r,
       0.5, 0.5, r,
       r, -r, 0.0;
  const Vector d1 = (Vector(3) << 1.5, 0.2, 0.4).finished();
  const Vector d2 = (Vector(3) << 1.5, 0.2, -0.4).finished();
  return {model::LinkMatrix(w * d1.asDiagonal() * w.transpose()),
          model::LinkMatrix(w * d2.asDiagonal() * w.transpose())};
}

/// fig1 presets: the first floor(L/2) layers use 0.8*B1, the rest 0.6*B2.
inline std::vector<model::LinkMatrix> fig1_link_matrices(int layers) {
  if (layers < 1) throw dimension_error("need at least one layer");
  const auto [b1, b2] = simulation_link_pair();
  std::vector<model::LinkMatrix> out;
  out.reserve(static_cast<std::size_t>(layers));
  for (int l = 0; l < layers; ++l) {
    if (l < layers / 2)
      out.emplace_back(0.8 * b1.matrix());
    else
      out.emplace_back(0.6 * b2.matrix());
  }
  return out;
}

/// model1 / model2 presets: layers cycle through four 2-community classes
/// base + alpha*C_k. model1 uses a diagonal base (heterogeneity hurts);
/// model2 a rank-one base (heterogeneity helps).
inline std::vector<model::LinkMatrix> heterogeneity_link_matrices(const std::string& which,
                                                                  double alpha, int layers) {
  if (layers < 1) throw dimension_error("need at least one layer");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  Matrix base(2, 2);
  std::vector<Matrix> classes(4, Matrix::Zero(2, 2));
  if (which == "model1") {
    base << 0.25, 0.0, 0.0, 0.25;
    classes[0] << 0.1, 0.0, 0.0, 0.1;
    classes[1] = -classes[0];
    classes[2] << -0.1, 0.0, 0.0, 0.0;
    classes[3] << 0.0, 0.0, 0.0, -0.1;
  } else if (which == "model2") {
    base << 0.25, 0.25, 0.25, 0.25;
    classes[0] << 0.1, 0.0, 0.0, 0.1;
    classes[1] = -classes[0];
    classes[2] << 0.1, 0.0, 0.0, 0.0;
    classes[3] << 0.0, 0.0, 0.0, 0.1;
  } else {
    throw std::invalid_argument("unknown heterogeneity model: " + which);
  }
  std::vector<model::LinkMatrix> out;
  out.reserve(static_cast<std::size_t>(layers));
  for (int l = 0; l < layers; ++l)
    out.emplace_back(base + alpha * classes[static_cast<std::size_t>(l % 4)]);
  return out;
}

inline model::MultiLayerSBM instantiate(const ExperimentConfig& config) {
  auto assignment = model::balanced_assignment(config.n, config.k);
  auto bs = (config.preset == "model1" || config.preset == "model2")
                ? heterogeneity_link_matrices(config.preset, config.alpha, config.layers)
                : fig1_link_matrices(config.layers);
  return model::MultiLayerSBM(std::move(assignment), std::move(bs));
}

// ---- presets ------------------------------------------------------------------

/// Named sweeps. Grid steps where only ranges are given: q in steps of 0.05,
/// n over {15,30,60,120,210,300}, L over even values 2..20, model n over
/// {20,50,100,200,400}.
inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  if (name == "fig1_q") {
    c.sweep_param = "q";
    for (int i = 0; i <= 8; ++i) c.grid.push_back(0.60 + 0.05 * i);
    c.grid.back() = 1.0;
    c.alpha = 0.0;
  } else if (name == "fig1_n") {
    c.sweep_param = "n";
    c.grid = {15, 30, 60, 120, 210, 300};
    c.alpha = 0.0;
  } else if (name == "fig1_L") {
    c.sweep_param = "L";
    for (int l = 2; l <= 20; l += 2) c.grid.push_back(l);
    c.alpha = 0.0;
  } else if (name == "model1" || name == "model2") {
    c.sweep_param = "n";
    c.grid = {20, 50, 100, 200, 400};
    c.k = 2;
    c.layers = 12;
    c.q = c.qprime = 0.8;
    c.n = 200;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return c;
}

// ---- sweep execution -----------------------------------------------------------

namespace detail {

inline constexpr std::uint64_t kStreamSample = 0x73616d706c653031ULL;
inline constexpr std::uint64_t kStreamPipeline = 0x706970656c696e65ULL;

inline ExperimentConfig at_grid_point(ExperimentConfig c, double value) {
  if (c.sweep_param == "q") {
    c.q = c.qprime = value;
  } else if (c.sweep_param == "n") {
    c.n = static_cast<int>(value);
  } else if (c.sweep_param == "L") {
    c.layers = static_cast<int>(value);
  } else {
    c.alpha = value;
  }
  return c;
}

}  // namespace detail

/// Executes the full grid × replicate × method sweep. Within one (point,
/// replicate) every method runs from the same pipeline seed, so all methods
/// consume identical perturbed layers; this is asserted by comparing the
/// layer fingerprints across methods.
inline std::vector<MetricRow> run_sweep(const ExperimentConfig& config) {
  config.validate();
  std::vector<MetricRow> rows;
  rows.reserve(config.grid.size() * static_cast<std::size_t>(config.replicates) *
               config.methods.size());
  for (std::size_t ip = 0; ip < config.grid.size(); ++ip) {
    const ExperimentConfig pt = detail::at_grid_point(config, config.grid[ip]);
    const model::MultiLayerSBM sbm = instantiate(pt);
    std::vector<Matrix> p_list;
    for (int l = 0; l < sbm.l(); ++l) p_list.push_back(sbm.link_probability_of(l));
    const auto v_pop = spectral::top_k_eigenvectors(model::population_target(p_list), pt.k);
    const privacy::PrivacyParams params(pt.q, pt.qprime);
    for (int rep = 0; rep < pt.replicates; ++rep) {
      const std::uint64_t rep_master = rng::derive(rng::derive(config.master_seed, ip),
                                                   static_cast<std::uint64_t>(rep));
      const auto layers = sbm.sample(rng::derive(rep_master, detail::kStreamSample));
      const std::uint64_t pipe_seed = rng::derive(rep_master, detail::kStreamPipeline);
      std::vector<std::uint64_t> expected_fp;
      for (const Method m : pt.methods) {
        const auto t0 = std::chrono::steady_clock::now();
        federation::PipelineResult result;
        switch (m) {
          case Method::ppdsc:
            result = federation::run_ppdsc(layers, params, pt.k, debias::DebiasMode::full,
                                           pt.reference, pt.kmeans, pipe_seed);
            break;
          case Method::ppdsc_1b:
            result = federation::run_ppdsc(layers, params, pt.k, debias::DebiasMode::diag_only,
                                           pt.reference, pt.kmeans, pipe_seed);
            break;
          case Method::ppdsc_2b:
            result = federation::run_ppdsc(layers, params, pt.k, debias::DebiasMode::none,
                                           pt.reference, pt.kmeans, pipe_seed);
            break;
          case Method::oracle:
            result = federation::run_oracle(layers, params, pt.k, pt.kmeans, pipe_seed);
            break;
        }
        const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
        if (expected_fp.empty())
          expected_fp = result.layer_fingerprints;
        else if (expected_fp != result.layer_fingerprints)
          throw std::logic_error("run_sweep: methods consumed different perturbed layers");
        MetricRow row;
        row.method = method_name(m);
        row.sweep_param = pt.sweep_param;
        row.sweep_value = config.grid[ip];
        row.n = pt.n;
        row.layers = pt.layers;
        row.k = pt.k;
        row.q = pt.q;
        row.qprime = pt.qprime;
        row.alpha = pt.alpha;
        row.replicate = rep;
        row.projection_distance = spectral::projection_distance(result.subspace, v_pop);
        row.misclassification_rate =
            clustering::misclassification_rate(result.labels, sbm.assignment.labels());
        row.wall_time_s = wall.count();
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

// ---- population parameter curves ------------------------------------------------

struct PopulationCurveRow {
  double alpha = 0.0;
  double heterogeneity = 0.0;
  double eigengap = 0.0;
  double ratio = 0.0;  // heterogeneity / eigengap; +inf for a rank-deficient target
};

/// Deterministic heterogeneity/eigengap curves for the model presets at
/// balanced community sizes. When the target matrix is rank deficient the
/// eigengap is zero and the scaled heterogeneity is reported as infinite.
inline std::vector<PopulationCurveRow> population_curves(const std::string& which,
                                                         const std::vector<double>& alpha_grid,
                                                         int n = 400, int layers = 12) {
  std::vector<PopulationCurveRow> out;
  out.reserve(alpha_grid.size());
  const auto assignment = model::balanced_assignment(n, 2);
  const auto sizes = assignment.community_sizes();
  for (const double alpha : alpha_grid) {
    const auto bs = heterogeneity_link_matrices(which, alpha, layers);
    std::vector<Matrix> p_list;
    for (const auto& b : bs) p_list.push_back(model::link_probability(assignment, b));
    const Matrix q = model::population_target(p_list);
    PopulationCurveRow row;
    row.alpha = alpha;
    row.heterogeneity = model::heterogeneity_measure(bs, sizes);
    row.eigengap = model::eigengap(q, 2);
    const double top = model::eigengap(q, 1);
    row.ratio = row.eigengap > 1e-10 * std::max(1.0, top)
                    ? row.heterogeneity / row.eigengap
                    : std::numeric_limits<double>::infinity();
    out.push_back(row);
  }
  return out;
}

// ---- CSV and layer loading --------------------------------------------------------

inline void emit_csv(const std::vector<MetricRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "method,sweep_param,sweep_value,n,L,K,q,qprime,alpha,replicate,"
         "projection_distance,misclassification_rate,wall_time_s\n";
  char buf[512];
  for (const MetricRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.12g,%d,%d,%d,%.12g,%.12g,%.12g,%d,%.12g,%.12g,%.6g\n",
                  r.method.c_str(), r.sweep_param.c_str(), r.sweep_value, r.n, r.layers, r.k,
                  r.q, r.qprime, r.alpha, r.replicate, r.projection_distance,
                  r.misclassification_rate, r.wall_time_s);
    out << buf;
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

/// Loads one edge-list file per layer; all layers must agree on n.
inline std::vector<model::Adjacency> load_layers(const std::vector<std::string>& paths) {
  if (paths.empty()) throw std::invalid_argument("load_layers: no paths given");
  std::vector<model::Adjacency> out;
  out.reserve(paths.size());
  for (const auto& path : paths) {
    out.push_back(io::read_edge_list(path));
    if (out.back().n() != out.front().n())
      throw std::runtime_error("load_layers: " + path + " has n=" +
                               std::to_string(out.back().n()) + ", expected " +
                               std::to_string(out.front().n()));
  }
  return out;
}

}  // namespace ppdsc::experiments
