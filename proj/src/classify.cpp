#include "logeuc/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "logeuc/errors.hpp"
#include "logeuc/kernels.hpp"
#include "logeuc/parallel.hpp"
#include "logeuc/rng.hpp"

namespace logeuc {

namespace {

struct BinaryResult {
  std::vector<double> alpha;
  std::vector<double> w;  // linear mode only
  double dual_objective = 0.0;
  int epochs = 0;
};

// Dual coordinate descent for the L1-loss SVM dual
//   min_a 0.5 a^T Q a - e^T a,  0 <= a_i <= C,  Q_ij = y_i y_j k(x_i, x_j).
// grad(i) must return y_i * f_i - 1 and bump(i, delta) must fold
// delta * y_i * (column i of the kernel) into that state. The dual objective
// is recomputed each epoch and required to be nondecreasing.
template <typename Grad, typename Bump, typename Objective>
BinaryResult coordinate_descent(std::size_t n, const std::vector<double>& qd, double c_param,
                                int max_epochs, double tol, std::uint64_t seed, Grad grad,
                                Bump bump, Objective objective) {
  BinaryResult res;
  res.alpha.assign(n, 0.0);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);

  double prev_obj = 0.0;  // objective at alpha = 0
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    rng.shuffle(order);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();

    for (std::size_t i : order) {
      const double g = grad(i);
      double pg;
      if (res.alpha[i] <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (res.alpha[i] >= c_param) {
        pg = std::max(g, 0.0);
      } else {
        pg = g;
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) <= 1e-12) continue;

      double a_new;
      if (qd[i] > 0.0) {
        a_new = std::min(std::max(res.alpha[i] - g / qd[i], 0.0), c_param);
      } else {
        // Zero diagonal: the dual is linear in this coordinate.
        a_new = g < 0.0 ? c_param : 0.0;
      }
      const double delta = a_new - res.alpha[i];
      if (delta != 0.0) {
        res.alpha[i] = a_new;
        bump(i, delta);
      }
    }

    res.epochs = epoch + 1;
    const double obj = objective(res.alpha);
    if (obj < prev_obj - 1e-9 * (1.0 + std::abs(prev_obj))) {
      throw Error("coordinate_descent: dual objective decreased from " +
                  std::to_string(prev_obj) + " to " + std::to_string(obj));
    }
    prev_obj = obj;
    if (pg_max - pg_min < tol) break;
  }
  res.dual_objective = prev_obj;
  return res;
}

void validate_options(const TrainOptions& opt) {
  if (!(opt.c_param > 0.0)) throw InvalidRange("train: c_param must be positive");
  if (opt.max_epochs < 1) throw InvalidRange("train: max_epochs must be >= 1");
  if (!(opt.tol > 0.0)) throw InvalidRange("train: tol must be positive");
}

}  // namespace

int infer_class_count(const std::vector<int>& labels) {
  if (labels.empty()) throw SingleClass("training set is empty");
  int max_label = 0;
  for (int l : labels) {
    if (l < 0) throw InvalidRange("labels must be nonnegative");
    max_label = std::max(max_label, l);
  }
  const int c = max_label + 1;
  std::vector<std::size_t> counts(static_cast<std::size_t>(c), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  for (int k = 0; k < c; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0) {
      throw InvalidRange("labels must be dense: class " + std::to_string(k) + " is empty");
    }
  }
  if (c < 2) throw SingleClass("training needs at least 2 classes");
  return c;
}

SvmModel train_linear(const LabeledSet& set, const TrainOptions& opt) {
  validate_options(opt);
  const std::size_t n = set.features.rows();
  const std::size_t nu = set.features.cols();
  if (set.labels.size() != n) throw LengthMismatch("train_linear: labels/features mismatch");
  if (nu == 0) throw DimensionMismatch("train_linear: zero-dimensional features");
  check_finite(set.features, "train_linear");
  const int class_count = infer_class_count(set.labels);
  if (set.class_count != 0 && set.class_count != class_count) {
    throw InvalidRange("train_linear: class_count disagrees with labels");
  }

  const std::size_t dim = nu + (opt.use_bias ? 1 : 0);
  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = set.features.data() + i * nu;
    double s = opt.use_bias ? 1.0 : 0.0;
    for (std::size_t k = 0; k < nu; ++k) s += xi[k] * xi[k];
    qd[i] = s;
  }

  SvmModel model;
  model.mode = SvmModel::Mode::Primal;
  model.class_count = class_count;
  model.feature_dim = nu;
  model.c_param = opt.c_param;
  model.use_bias = opt.use_bias;
  model.weights = Matrix(static_cast<std::size_t>(class_count), nu);
  model.biases.assign(static_cast<std::size_t>(class_count), 0.0);
  model.final_dual_objective.assign(static_cast<std::size_t>(class_count), 0.0);
  model.epochs_run.assign(static_cast<std::size_t>(class_count), 0);

  parallel_for(0, static_cast<std::size_t>(class_count), [&](std::size_t c) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = set.labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
    }
    std::vector<double> w(dim, 0.0);
    auto grad = [&](std::size_t i) {
      const double* xi = set.features.data() + i * nu;
      double s = 0.0;
      for (std::size_t k = 0; k < nu; ++k) s += w[k] * xi[k];
      if (opt.use_bias) s += w[nu];
      return y[i] * s - 1.0;
    };
    auto bump = [&](std::size_t i, double delta) {
      const double* xi = set.features.data() + i * nu;
      const double f = delta * y[i];
      for (std::size_t k = 0; k < nu; ++k) w[k] += f * xi[k];
      if (opt.use_bias) w[nu] += f;
    };
    auto objective = [&](const std::vector<double>& alpha) {
      double sum_a = 0.0;
      for (double a : alpha) sum_a += a;
      double w_sq = 0.0;
      for (double v : w) w_sq += v * v;
      return sum_a - 0.5 * w_sq;
    };
    const BinaryResult r = coordinate_descent(n, qd, opt.c_param, opt.max_epochs, opt.tol,
                                              derive(opt.seed, {c}), grad, bump, objective);
    double* wrow = model.weights.data() + c * nu;
    for (std::size_t k = 0; k < nu; ++k) wrow[k] = w[k];
    if (opt.use_bias) model.biases[c] = w[nu];
    model.final_dual_objective[c] = r.dual_objective;
    model.epochs_run[c] = r.epochs;
  });
  return model;
}

SvmModel train_kernel(const Matrix& gram, const std::vector<int>& labels,
                      const TrainOptions& opt) {
  validate_options(opt);
  const std::size_t n = gram.rows();
  if (gram.cols() != n || n == 0) throw DimensionMismatch("train_kernel: gram must be square");
  if (labels.size() != n) throw LengthMismatch("train_kernel: labels/gram mismatch");
  check_finite(gram, "train_kernel");
  if (!is_symmetric(gram, 1e-12)) throw NotPsd("train_kernel: gram is not symmetric");

  // Cholesky with a relative shift as the PSD certificate.
  {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, gram(i, i));
    const double shift = 1e-8 * std::max(1.0, max_diag);
    Matrix l = gram;
    for (std::size_t i = 0; i < n; ++i) l(i, i) += shift;
    for (std::size_t j = 0; j < n; ++j) {
      double diag = l(j, j);
      for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
      if (!(diag > 0.0)) {
        throw NotPsd("train_kernel: gram failed the shifted Cholesky check at pivot " +
                     std::to_string(j));
      }
      const double root = std::sqrt(diag);
      l(j, j) = root;
      for (std::size_t i = j + 1; i < n; ++i) {
        double v = l(i, j);
        for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
        l(i, j) = v / root;
      }
    }
  }

  const int class_count = infer_class_count(labels);

  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) qd[i] = gram(i, i);

  SvmModel model;
  model.mode = SvmModel::Mode::Dual;
  model.class_count = class_count;
  model.feature_dim = n;
  model.c_param = opt.c_param;
  model.use_bias = false;
  model.alphas = Matrix(static_cast<std::size_t>(class_count), n);
  model.train_labels = labels;
  model.final_dual_objective.assign(static_cast<std::size_t>(class_count), 0.0);
  model.epochs_run.assign(static_cast<std::size_t>(class_count), 0);

  parallel_for(0, static_cast<std::size_t>(class_count), [&](std::size_t c) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
    std::vector<double> f(n, 0.0);  // f_j = sum_i alpha_i y_i K_ij
    auto grad = [&](std::size_t i) { return y[i] * f[i] - 1.0; };
    auto bump = [&](std::size_t i, double delta) {
      const double* row = gram.data() + i * n;
      const double scale = delta * y[i];
      for (std::size_t j = 0; j < n; ++j) f[j] += scale * row[j];
    };
    auto objective = [&](const std::vector<double>& alpha) {
      double sum_a = 0.0, quad = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sum_a += alpha[i];
        quad += alpha[i] * y[i] * f[i];
      }
      return sum_a - 0.5 * quad;
    };
    const BinaryResult r = coordinate_descent(n, qd, opt.c_param, opt.max_epochs, opt.tol,
                                              derive(opt.seed, {c}), grad, bump, objective);
    double* arow = model.alphas.data() + c * n;
    for (std::size_t i = 0; i < n; ++i) arow[i] = r.alpha[i];
    model.final_dual_objective[c] = r.dual_objective;
    model.epochs_run[c] = r.epochs;
  });

  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < class_count; ++c) {
      if (model.alphas(static_cast<std::size_t>(c), i) > 0.0) {
        model.support.push_back(i);
        break;
      }
    }
  }
  return model;
}

Prediction predict(const SvmModel& model, const double* input, std::size_t len) {
  if (len != model.feature_dim) {
    throw DimensionMismatch("predict: input length " + std::to_string(len) +
                            " does not match model dimension " +
                            std::to_string(model.feature_dim));
  }
  Prediction p;
  p.scores.resize(static_cast<std::size_t>(model.class_count));
  for (int c = 0; c < model.class_count; ++c) {
    const std::size_t cc = static_cast<std::size_t>(c);
    double s = 0.0;
    if (model.mode == SvmModel::Mode::Primal) {
      const double* w = model.weights.data() + cc * model.feature_dim;
      for (std::size_t k = 0; k < len; ++k) s += w[k] * input[k];
      s += model.biases[cc];
    } else {
      const double* a = model.alphas.data() + cc * model.feature_dim;
      for (std::size_t j = 0; j < len; ++j) {
        if (a[j] == 0.0) continue;
        s += a[j] * (model.train_labels[j] == c ? 1.0 : -1.0) * input[j];
      }
    }
    p.scores[cc] = s;
  }
  p.label = 0;
  for (int c = 1; c < model.class_count; ++c) {
    if (p.scores[static_cast<std::size_t>(c)] > p.scores[static_cast<std::size_t>(p.label)]) {
      p.label = c;
    }
  }
  return p;
}

std::vector<int> predict_batch(const SvmModel& model, const Matrix& rows) {
  std::vector<int> out(rows.rows());
  parallel_for(0, rows.rows(), [&](std::size_t i) {
    out[i] = predict(model, rows.data() + i * rows.cols(), rows.cols()).label;
  });
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<int>& labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw InvalidRange("stratified_split: train_fraction must be in (0, 1)");
  }
  const int class_count = infer_class_count(labels);
  std::vector<std::size_t> train, holdout;
  for (int c = 0; c < class_count; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) idx.push_back(i);
    }
    if (idx.size() < 2) {
      throw TooFewSamplesPerClass("stratified_split: class " + std::to_string(c) +
                                  " has fewer than 2 samples");
    }
    Rng rng(derive(seed, {0xF01Du, static_cast<std::uint64_t>(c)}));
    rng.shuffle(idx);
    const double want = train_fraction * static_cast<double>(idx.size());
    std::size_t take = static_cast<std::size_t>(std::llround(want));
    take = std::max<std::size_t>(1, std::min(idx.size() - 1, take));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      (k < take ? train : holdout).push_back(idx[k]);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(holdout.begin(), holdout.end());
  return {train, holdout};
}

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, int folds,
                                                       std::uint64_t seed) {
  if (folds < 2) throw InvalidRange("stratified_folds: need at least 2 folds");
  if (static_cast<std::size_t>(folds) > labels.size()) {
    throw InvalidRange("stratified_folds: more folds than samples");
  }
  const int class_count = infer_class_count(labels);
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  // A single fold counter running across classes spreads every class over
  // consecutive folds and leaves no fold empty.
  std::size_t next_fold = 0;
  for (int c = 0; c < class_count; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) idx.push_back(i);
    }
    Rng rng(derive(seed, {0xF05Du, static_cast<std::uint64_t>(c)}));
    rng.shuffle(idx);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out[next_fold % static_cast<std::size_t>(folds)].push_back(idx[k]);
      ++next_fold;
    }
  }
  for (auto& fold : out) std::sort(fold.begin(), fold.end());
  return out;
}

SigmaCvResult cross_validate_sigma(const std::vector<Matrix>& descriptors,
                                   const std::vector<int>& labels,
                                   const std::vector<double>& sigma_grid, int folds,
                                   double c_param, std::uint64_t seed) {
  if (sigma_grid.empty()) throw InvalidRange("cross_validate_sigma: empty sigma grid");
  if (descriptors.size() != labels.size()) {
    throw LengthMismatch("cross_validate_sigma: descriptors/labels mismatch");
  }
  const int class_count = infer_class_count(labels);
  for (int c = 0; c < class_count; ++c) {
    std::size_t count = 0;
    for (int l : labels) count += l == c ? 1 : 0;
    if (count < 2) {
      throw TooFewSamplesPerClass("cross_validate_sigma: class " + std::to_string(c) +
                                  " has fewer than 2 samples");
    }
  }

  SigmaCvResult res;
  res.sigma_grid = sigma_grid;
  std::sort(res.sigma_grid.begin(), res.sigma_grid.end());

  const Matrix dots = pairwise_frobenius_dots(descriptors);
  const auto fold_sets = stratified_folds(labels, folds, derive(seed, {0xCFu}));
  const std::size_t n = labels.size();

  res.fold_accuracy = Matrix(res.sigma_grid.size(), fold_sets.size());
  res.mean_accuracy.assign(res.sigma_grid.size(), 0.0);

  for (std::size_t s = 0; s < res.sigma_grid.size(); ++s) {
    const GramMatrix gram = gram_from_dots(dots, res.sigma_grid[s]);
    for (std::size_t f = 0; f < fold_sets.size(); ++f) {
      const std::vector<std::size_t>& val = fold_sets[f];
      std::vector<std::size_t> train;
      train.reserve(n - val.size());
      for (std::size_t i = 0, v = 0; i < n; ++i) {
        if (v < val.size() && val[v] == i) {
          ++v;
        } else {
          train.push_back(i);
        }
      }
      std::vector<int> train_labels(train.size());
      for (std::size_t i = 0; i < train.size(); ++i) train_labels[i] = labels[train[i]];

      TrainOptions opt;
      opt.c_param = c_param;
      opt.seed = derive(seed, {s, f});
      const SvmModel model =
          train_kernel(gram_submatrix(gram.entries, train, train), train_labels, opt);

      const Matrix val_rows = gram_submatrix(gram.entries, val, train);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < val.size(); ++i) {
        const Prediction p = predict(model, val_rows.data() + i * train.size(), train.size());
        correct += p.label == labels[val[i]] ? 1 : 0;
      }
      const double acc = static_cast<double>(correct) / static_cast<double>(val.size());
      res.fold_accuracy(s, f) = acc;
      res.mean_accuracy[s] += acc;
    }
    res.mean_accuracy[s] /= static_cast<double>(fold_sets.size());
  }

  std::size_t best = 0;
  for (std::size_t s = 1; s < res.sigma_grid.size(); ++s) {
    if (res.mean_accuracy[s] > res.mean_accuracy[best]) best = s;
  }
  res.best_sigma = res.sigma_grid[best];
  return res;
}

}  // namespace logeuc
