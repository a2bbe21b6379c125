// Command-line front end: generate preset networks, perturb stored layers,
// run the distributed pipeline on edge-list files, and execute named
// experiment sweeps.

#include "ppdsc/ppdsc.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ppdsc::debias::DebiasMode parse_mode(const std::string& mode) {
  if (mode == "full") return ppdsc::debias::DebiasMode::full;
  if (mode == "diag") return ppdsc::debias::DebiasMode::diag_only;
  if (mode == "none") return ppdsc::debias::DebiasMode::none;
  throw std::invalid_argument("mode must be full, diag or none");
}

// JSON overrides use the ExperimentConfig field names.
void apply_overrides(ppdsc::experiments::ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json doc = json::parse(in);
  for (const auto& [key, value] : doc.items()) {
    if (key == "n") config.n = value.get<int>();
    else if (key == "L" || key == "layers") config.layers = value.get<int>();
    else if (key == "K" || key == "k") config.k = value.get<int>();
    else if (key == "q") config.q = value.get<double>();
    else if (key == "qprime") config.qprime = value.get<double>();
    else if (key == "alpha") config.alpha = value.get<double>();
    else if (key == "replicates") config.replicates = value.get<int>();
    else if (key == "master_seed") config.master_seed = value.get<std::uint64_t>();
    else if (key == "reference") config.reference = value.get<int>();
    else if (key == "sweep_param") config.sweep_param = value.get<std::string>();
    else if (key == "grid") config.grid = value.get<std::vector<double>>();
    else if (key == "methods") {
      config.methods.clear();
      for (const auto& name : value) {
        auto m = ppdsc::experiments::method_from_name(name.get<std::string>());
        if (!m) throw std::invalid_argument("unknown method: " + name.get<std::string>());
        config.methods.push_back(*m);
      }
    } else if (key == "kmeans") {
      if (value.contains("restarts")) config.kmeans.restarts = value["restarts"].get<int>();
      if (value.contains("max_iters")) config.kmeans.max_iters = value["max_iters"].get<int>();
      if (value.contains("tol")) config.kmeans.tol = value["tol"].get<double>();
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
}

std::string layer_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "layer_%02d.tsv", index);
  return buf;
}

int cmd_generate(const std::string& preset_name, const std::string& out_dir,
                 std::uint64_t seed, const std::string& config_path) {
  auto config = ppdsc::experiments::preset(preset_name);
  if (!config_path.empty()) apply_overrides(config, config_path);
  const auto sbm = ppdsc::experiments::instantiate(config);
  const auto layers = sbm.sample(seed);
  fs::create_directories(out_dir);
  for (std::size_t l = 0; l < layers.size(); ++l)
    ppdsc::io::write_edge_list(layers[l], (fs::path(out_dir) / layer_filename(static_cast<int>(l))).string());
  ppdsc::io::write_membership(sbm.assignment.labels(),
                              (fs::path(out_dir) / "membership.csv").string());
  std::cout << "wrote " << layers.size() << " layers (n=" << sbm.n() << ", K=" << sbm.k()
            << ") and membership.csv to " << out_dir << "\n";
  return 0;
}

int cmd_perturb(const std::string& in_dir, double q, double qprime, std::uint64_t seed,
                const std::string& out_dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("layer_", 0) == 0 && entry.path().extension() == ".tsv")
      names.push_back(name);
  }
  if (names.empty()) throw std::runtime_error("no layer_*.tsv files in " + in_dir);
  std::sort(names.begin(), names.end());
  const ppdsc::privacy::PrivacyParams params(q, qprime);
  fs::create_directories(out_dir);
  for (std::size_t l = 0; l < names.size(); ++l) {
    const auto a = ppdsc::io::read_edge_list((fs::path(in_dir) / names[l]).string());
    const auto perturbed = ppdsc::privacy::rr_perturb(a, params, ppdsc::rng::derive(seed, l));
    ppdsc::io::write_edge_list(perturbed, (fs::path(out_dir) / names[l]).string());
  }
  std::cout << "perturbed " << names.size() << " layers (q=" << q << ", qprime=" << qprime
            << ", epsilon=" << ppdsc::privacy::min_budget(params).epsilon << ") into "
            << out_dir << "\n";
  return 0;
}

int cmd_run(const std::vector<std::string>& layer_paths, int k, double q, double qprime,
            const std::string& mode, int ref_one_based, std::uint64_t seed,
            const std::string& out_path, const std::string& truth_path, bool perturbed) {
  const auto layers = ppdsc::experiments::load_layers(layer_paths);
  if (ref_one_based < 1 || ref_one_based > static_cast<int>(layers.size()))
    throw std::invalid_argument("--ref must be in [1, L]");
  const ppdsc::privacy::PrivacyParams params(q, qprime);
  const auto result =
      perturbed ? ppdsc::federation::run_ppdsc_perturbed(layers, params, k, parse_mode(mode),
                                                         ref_one_based - 1, {}, seed)
                : ppdsc::federation::run_ppdsc(layers, params, k, parse_mode(mode),
                                               ref_one_based - 1, {}, seed);
  ppdsc::io::write_membership(result.labels, out_path);
  std::cout << "clustered n=" << result.subspace.n() << " nodes into K=" << k
            << " communities using L=" << layers.size() << " layers\n";
  std::cout << "values sent per machine: " << result.ledger.values_sent_per_machine
            << ", total: " << result.ledger.values_sent_total
            << ", centralized equivalent: " << result.ledger.centralized_equivalent << "\n";
  if (!truth_path.empty()) {
    const auto truth = ppdsc::io::read_membership(truth_path);
    std::cout << "misclassification rate vs " << truth_path << ": "
              << ppdsc::clustering::misclassification_rate(result.labels, truth) << "\n";
  }
  std::cout << "labels written to " << out_path << "\n";
  return 0;
}

int cmd_experiment(const std::string& preset_name, int reps, std::uint64_t seed,
                   const std::string& out_path, const std::string& config_path) {
  auto config = ppdsc::experiments::preset(preset_name);
  if (reps > 0) config.replicates = reps;
  config.master_seed = seed;
  if (!config_path.empty()) apply_overrides(config, config_path);
  const auto rows = ppdsc::experiments::run_sweep(config);
  ppdsc::experiments::emit_csv(rows, out_path);
  std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privacy-preserving distributed spectral clustering toolkit"};
  app.require_subcommand(1);

  std::string preset_name, out_dir = "data", in_dir, config_path, truth_path;
  std::string mode = "full", out_path = "result.csv";
  std::vector<std::string> layer_paths;
  double q = 1.0, qprime = 1.0;
  int k = 2, ref = 1, reps = 0;
  std::uint64_t seed = 1;

  auto* generate = app.add_subcommand("generate", "sample a preset's networks to edge-list files");
  generate->add_option("--preset", preset_name, "preset name")->required();
  generate->add_option("--out", out_dir, "output directory")->required();
  generate->add_option("--seed", seed, "master seed");
  generate->add_option("--config", config_path, "JSON overrides for the preset");

  auto* perturb = app.add_subcommand("perturb", "randomized-response perturb stored layers");
  perturb->add_option("--in", in_dir, "directory with layer_*.tsv")->required();
  perturb->add_option("--q", q, "retention probability for 1-edges")->required();
  perturb->add_option("--qprime", qprime, "retention probability for 0-edges")->required();
  perturb->add_option("--seed", seed, "master seed");
  perturb->add_option("--out", out_dir, "output directory")->required();

  auto* run = app.add_subcommand("run", "run the distributed pipeline on edge-list layers");
  run->add_option("--layers", layer_paths, "comma-separated layer files")
      ->required()
      ->delimiter(',');
  run->add_option("--k", k, "number of communities")->required();
  run->add_option("--q", q, "retention probability for 1-edges");
  run->add_option("--qprime", qprime, "retention probability for 0-edges");
  run->add_option("--mode", mode, "bias correction: full|diag|none");
  run->add_option("--ref", ref, "reference machine, 1-based");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--out", out_path, "output membership CSV");
  run->add_option("--truth", truth_path, "ground-truth membership CSV (reports misclassification)");
  bool perturbed = false;
  run->add_flag("--perturbed", perturbed,
                "layers are already randomized-response outputs at (q, qprime); "
                "skip the perturbation step");

  auto* experiment = app.add_subcommand("experiment", "run a named sweep and emit metrics CSV");
  experiment->add_option("--preset", preset_name, "fig1_q|fig1_n|fig1_L|model1|model2")->required();
  experiment->add_option("--reps", reps, "replicates per grid point");
  experiment->add_option("--seed", seed, "master seed");
  experiment->add_option("--out", out_path, "output CSV")->required();
  experiment->add_option("--config", config_path, "JSON overrides for the preset");

  try {
    app.parse(argc, argv);
    if (generate->parsed())
      return cmd_generate(preset_name, out_dir, seed, config_path);
    if (perturb->parsed()) return cmd_perturb(in_dir, q, qprime, seed, out_dir);
    if (run->parsed())
      return cmd_run(layer_paths, k, q, qprime, mode, ref, seed, out_path, truth_path,
                     perturbed);
    if (experiment->parsed())
      return cmd_experiment(preset_name, reps, seed, out_path, config_path);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
