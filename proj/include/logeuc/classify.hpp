#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "logeuc/matrix.hpp"

namespace logeuc {

/// Training set for the linear path: rows of `features` are samples, labels
/// are dense in 0..class_count-1 with every class populated.
struct LabeledSet {
  Matrix features;  // n x nu
  std::vector<int> labels;
  int class_count = 0;
};

struct TrainOptions {
  double c_param = 10.0;
  int max_epochs = 1000;
  double tol = 1e-4;    // projected-gradient gap stopping threshold
  std::uint64_t seed = 1;
  bool use_bias = false;  // linear mode only: augments features with 1
};

/// One-vs-rest SVM in either of two representations. Primal keeps per-class
/// weight vectors; Dual keeps per-class alphas over the training samples and
/// predicts from kernel rows against those samples.
struct SvmModel {
  enum class Mode { Primal, Dual };
  Mode mode = Mode::Primal;
  int class_count = 0;
  std::size_t feature_dim = 0;  // Primal: nu; Dual: training sample count
  double c_param = 10.0;
  bool use_bias = false;

  Matrix weights;              // Primal: class_count x nu
  std::vector<double> biases;  // class_count, zero unless use_bias

  Matrix alphas;                      // Dual: class_count x n, 0 <= alpha <= C
  std::vector<int> train_labels;     // Dual: labels of the training samples
  std::vector<std::size_t> support;  // Dual: samples with alpha > 0 in any class

  std::vector<double> final_dual_objective;  // per class
  std::vector<int> epochs_run;               // per class
};

/// Dual coordinate descent on the L1-loss SVM dual, one binary problem per
/// class. The per-epoch dual objective is checked to be nondecreasing and a
/// violation throws (it would mean a solver bug, not bad data).
SvmModel train_linear(const LabeledSet& set, const TrainOptions& opt);

/// Same solver walking Gram rows instead of features. Requires a symmetric
/// PSD gram (checked via Cholesky with a small shift; NotPsd otherwise).
SvmModel train_kernel(const Matrix& gram, const std::vector<int>& labels,
                      const TrainOptions& opt);

struct Prediction {
  int label = 0;
  std::vector<double> scores;  // one per class
};

/// input: Primal mode a feature vector of length feature_dim; Dual mode a
/// kernel row against the training samples. Ties go to the lowest class.
Prediction predict(const SvmModel& model, const double* input, std::size_t len);

/// Row-per-sample convenience wrapper.
std::vector<int> predict_batch(const SvmModel& model, const Matrix& rows);

struct SigmaCvResult {
  double best_sigma = 0.0;
  std::vector<double> sigma_grid;      // ascending
  std::vector<double> mean_accuracy;   // aligned with sigma_grid
  Matrix fold_accuracy;                // grid x folds
};

/// Stratified k-fold accuracy of the exact-kernel SVM per bandwidth; the
/// pairwise inner products are computed once and reused for every sigma.
/// Ties select the smaller sigma.
SigmaCvResult cross_validate_sigma(const std::vector<Matrix>& descriptors,
                                   const std::vector<int>& labels,
                                   const std::vector<double>& sigma_grid, int folds,
                                   double c_param, std::uint64_t seed);

/// Deterministic per-class shuffle split; both sides keep at least one sample
/// of every class. Returns (train indices, holdout indices), each ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<int>& labels, double train_fraction, std::uint64_t seed);

/// Deterministic stratified fold assignment; every fold nonempty.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, int folds,
                                                       std::uint64_t seed);

/// Validates density of labels in 0..C-1 and returns C; throws SingleClass
/// when fewer than two classes are present.
int infer_class_count(const std::vector<int>& labels);

}  // namespace logeuc
