#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logeuc/data.hpp"
#include "logeuc/feature_maps.hpp"

namespace logeuc {

/// Benchmark grid: holdout accuracy of every scheme across feature dimensions
/// against a single exact-kernel reference.
struct SweepConfig {
  std::vector<std::size_t> nu_grid = {10, 20, 50, 100, 200, 500, 1000, 2000, 5000};
  int repetitions = 10;
  std::vector<Scheme> schemes = {Scheme::Rgw, Scheme::TrigRff, Scheme::MacLaurin,
                                 Scheme::HadamardFastfood};
  double sigma = 1.0;
  std::vector<double> sigma_cv_grid;  // nonempty: pick sigma by k-fold CV on the training half
  int cv_folds = 5;
  double train_fraction = 0.5;
  double c_param = 10.0;
  double theta = 0.5;
  std::uint64_t seed = 1;
};

struct SweepCell {
  Scheme scheme = Scheme::Rgw;
  std::size_t nu = 0;            // requested feature dimension
  std::size_t nu_effective = 0;  // fastfood rounds to the nearest power of two
  int repetitions = 0;
  double mean_accuracy = 0.0;
  double accuracy_sd = 0.0;
};

struct StageTimings {
  double descriptors_s = 0.0;  // filled by the CLI, not run_sweep
  double cv_s = 0.0;
  double gram_s = 0.0;
  double map_s = 0.0;       // summed across cells
  double features_s = 0.0;  // summed across cells
  double train_s = 0.0;     // summed across cells
};

struct SweepResult {
  std::vector<SweepCell> cells;  // scheme-major, nu ascending; failed cells omitted
  double exact_accuracy = 0.0;
  double chosen_sigma = 1.0;
  StageTimings timings;
  std::string error;  // nonempty when a cell failed; completed cells are still present
};

/// Splits once (stratified), trains the exact-kernel reference once, then
/// runs repetitions x schemes x nu_grid linear-SVM cells with per-cell map
/// seeds derived from config.seed. Output is independent of thread count.
SweepResult run_sweep(const DescriptorSet& set, const SweepConfig& config);

/// Canonical CSV (header scheme,nu,nu_effective,repetitions,mean_accuracy,
/// accuracy_sd; first data row is the exact reference) and the companion
/// accuracy-vs-log-nu chart.
std::string sweep_csv(const SweepResult& result);
std::string sweep_svg(const SweepResult& result);

/// Requested nu -> nearest power of two (ties downward), the dimension the
/// stacked-block Walsh-Hadamard construction actually emits.
std::size_t fastfood_effective_nu(std::size_t nu);

/// Full command-line front end. Exit codes: 0 ok, 1 unexpected, 2 parse,
/// 3 pipeline/dimension, 4 lab assertion, 5 training.
int run_cli(int argc, const char* const* argv);

}  // namespace logeuc
