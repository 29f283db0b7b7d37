#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <doctest.h>

#include "logeuc/classify.hpp"
#include "logeuc/errors.hpp"
#include "logeuc/kernels.hpp"
#include "logeuc/rng.hpp"
#include "logeuc/spd_core.hpp"

using namespace logeuc;

namespace {

struct Blobs {
  Matrix x;
  std::vector<int> y;
};

// Well-separated Gaussian blobs, one center per class along the axes.
Blobs blobs(int classes, std::size_t per_class, std::size_t nu, double spread,
            std::uint64_t seed) {
  Rng rng(seed);
  Blobs b;
  b.x = Matrix(static_cast<std::size_t>(classes) * per_class, nu);
  for (int c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t row = static_cast<std::size_t>(c) * per_class + i;
      for (std::size_t k = 0; k < nu; ++k) {
        const double center = k == static_cast<std::size_t>(c) % nu ? 3.0 : 0.0;
        b.x(row, k) = center + spread * rng.normal();
      }
      b.y.push_back(c);
    }
  }
  return b;
}

// Unit-norm symmetric log descriptors clustered around per-class centers.
void descriptor_clusters(int classes, std::size_t per_class, std::size_t d, double spread,
                         std::uint64_t seed, std::vector<Matrix>& descs, std::vector<int>& labels) {
  descs.clear();
  labels.clear();
  for (int c = 0; c < classes; ++c) {
    Rng center_rng(derive(seed, {static_cast<std::uint64_t>(c)}));
    Matrix center(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) center(i, j) = center(j, i) = center_rng.normal();
    for (std::size_t s = 0; s < per_class; ++s) {
      Rng rng(derive(seed, {static_cast<std::uint64_t>(c), 100 + s}));
      Matrix m = center;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
          const double noise = spread * rng.normal();
          m(i, j) += noise;
          if (i != j) m(j, i) += noise;
        }
      descs.push_back(normalize_log(m));
      labels.push_back(c);
    }
  }
}

double disagreement(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i] ? 1 : 0;
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

}  // namespace

TEST_SUITE_BEGIN("classify");

TEST_CASE("kernel training satisfies the box and KKT conditions") {
  const Blobs b = blobs(3, 20, 5, 0.6, 101);
  const GramMatrix gram = induced_gram(b.x, GramSource{});
  TrainOptions opt;
  opt.c_param = 10.0;
  opt.seed = 7;
  const SvmModel model = train_kernel(gram.entries, b.y, opt);
  REQUIRE(model.mode == SvmModel::Mode::Dual);
  REQUIRE(model.class_count == 3);
  const std::size_t n = b.y.size();
  REQUIRE(model.alphas.rows() == 3);
  REQUIRE(model.alphas.cols() == n);

  for (int c = 0; c < 3; ++c) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = b.y[i] == c ? 1.0 : -1.0;
    // Exact box constraint: the solver clamps, so no tolerance here.
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(model.alphas(static_cast<std::size_t>(c), i) >= 0.0);
      CHECK(model.alphas(static_cast<std::size_t>(c), i) <= opt.c_param);
    }
    // KKT with slack: at the stopping threshold the projected gradient is
    // small but not zero.
    const double slack = 1e-2;
    for (std::size_t i = 0; i < n; ++i) {
      double f = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        f += model.alphas(static_cast<std::size_t>(c), j) * y[j] * gram.entries(i, j);
      }
      const double g = y[i] * f - 1.0;
      const double a = model.alphas(static_cast<std::size_t>(c), i);
      if (a <= 0.0) {
        CHECK(g >= -slack);
      } else if (a >= opt.c_param) {
        CHECK(g <= slack);
      } else {
        CHECK(std::abs(g) <= slack);
      }
    }
    // Reported dual objective equals the one recomputed from the alphas.
    double sum_a = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ai = model.alphas(static_cast<std::size_t>(c), i);
      sum_a += ai;
      for (std::size_t j = 0; j < n; ++j) {
        quad += ai * model.alphas(static_cast<std::size_t>(c), j) * y[i] * y[j] *
                gram.entries(i, j);
      }
    }
    CHECK(model.final_dual_objective[static_cast<std::size_t>(c)] ==
          doctest::Approx(sum_a - 0.5 * quad).epsilon(1e-8));
    CHECK(model.epochs_run[static_cast<std::size_t>(c)] >= 1);
  }

  // Support set recomputed from the alphas, ascending.
  std::vector<std::size_t> expect;
  for (std::size_t i = 0; i < n; ++i) {
    bool active = false;
    for (int c = 0; c < 3; ++c) active = active || model.alphas(static_cast<std::size_t>(c), i) > 0.0;
    if (active) expect.push_back(i);
  }
  CHECK(model.support == expect);
}

TEST_CASE("linear and kernel solvers agree on identical problems") {
  const Blobs train = blobs(3, 50, 6, 0.7, 103);
  const Blobs test = blobs(3, 50, 6, 0.7, 104);
  TrainOptions opt;
  opt.c_param = 10.0;
  opt.seed = 5;

  LabeledSet set;
  set.features = train.x;
  set.labels = train.y;
  const SvmModel linear = train_linear(set, opt);
  const GramMatrix gram = induced_gram(train.x, GramSource{});
  const SvmModel kernel = train_kernel(gram.entries, train.y, opt);

  const std::vector<int> lin_pred = predict_batch(linear, test.x);
  const Matrix rows = test.x * transpose(train.x);
  const std::vector<int> ker_pred = predict_batch(kernel, rows);
  CHECK(disagreement(lin_pred, ker_pred) <= 0.01);

  // Both should solve this easy problem essentially perfectly.
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.y.size(); ++i) correct += lin_pred[i] == test.y[i] ? 1 : 0;
  CHECK(static_cast<double>(correct) / static_cast<double>(test.y.size()) > 0.95);
}

TEST_CASE("training is deterministic in the seed") {
  const Blobs b = blobs(2, 25, 4, 0.8, 105);
  LabeledSet set;
  set.features = b.x;
  set.labels = b.y;
  TrainOptions opt;
  opt.seed = 11;
  const SvmModel m1 = train_linear(set, opt);
  const SvmModel m2 = train_linear(set, opt);
  REQUIRE(m1.weights.size() == m2.weights.size());
  for (std::size_t k = 0; k < m1.weights.size(); ++k)
    CHECK(m1.weights.data()[k] == m2.weights.data()[k]);
  CHECK(m1.final_dual_objective == m2.final_dual_objective);
}

TEST_CASE("bias term separates clusters the origin-bound model cannot") {
  // One-dimensional positive features: argmax of two through-origin scores
  // is constant in x, so the no-bias model cannot split them.
  Rng rng(107);
  const std::size_t per = 30;
  LabeledSet set;
  set.features = Matrix(2 * per, 1);
  for (std::size_t i = 0; i < per; ++i) {
    set.features(i, 0) = 2.0 + 0.2 * rng.normal();
    set.labels.push_back(0);
  }
  for (std::size_t i = 0; i < per; ++i) {
    set.features(per + i, 0) = 4.0 + 0.2 * rng.normal();
    set.labels.push_back(1);
  }
  TrainOptions opt;
  opt.seed = 3;
  opt.use_bias = true;
  const SvmModel with_bias = train_linear(set, opt);
  opt.use_bias = false;
  const SvmModel without = train_linear(set, opt);

  const std::vector<int> pred_bias = predict_batch(with_bias, set.features);
  const std::vector<int> pred_plain = predict_batch(without, set.features);
  std::size_t ok_bias = 0, ok_plain = 0;
  for (std::size_t i = 0; i < set.labels.size(); ++i) {
    ok_bias += pred_bias[i] == set.labels[i] ? 1 : 0;
    ok_plain += pred_plain[i] == set.labels[i] ? 1 : 0;
  }
  CHECK(ok_bias == set.labels.size());
  CHECK(ok_plain <= set.labels.size() / 2);
  CHECK(with_bias.biases[0] != 0.0);
  CHECK(without.biases[0] == 0.0);
  CHECK(without.biases[1] == 0.0);
}

TEST_CASE("prediction ties resolve to the lowest class") {
  SvmModel m;
  m.mode = SvmModel::Mode::Primal;
  m.class_count = 3;
  m.feature_dim = 2;
  m.weights = Matrix(3, 2);  // all-zero scores for every input
  m.biases.assign(3, 0.0);
  const double x[2] = {1.0, -2.0};
  const Prediction p = predict(m, x, 2);
  CHECK(p.label == 0);
  REQUIRE(p.scores.size() == 3);
  CHECK(p.scores[0] == p.scores[1]);
  CHECK(p.scores[1] == p.scores[2]);

  // Partial tie between classes 1 and 2.
  m.weights(1, 0) = 1.0;
  m.weights(2, 0) = 1.0;
  const Prediction q = predict(m, x, 2);
  CHECK(q.label == 1);
}

TEST_CASE("predict_batch matches per-row predict") {
  const Blobs b = blobs(3, 10, 4, 0.5, 109);
  LabeledSet set;
  set.features = b.x;
  set.labels = b.y;
  TrainOptions opt;
  const SvmModel model = train_linear(set, opt);
  const std::vector<int> batch = predict_batch(model, b.x);
  REQUIRE(batch.size() == b.y.size());
  for (std::size_t i = 0; i < b.y.size(); ++i) {
    const Prediction p = predict(model, b.x.data() + i * 4, 4);
    CHECK(batch[i] == p.label);
  }
}

TEST_CASE("training input validation") {
  const Blobs b = blobs(2, 5, 3, 0.5, 111);
  LabeledSet set;
  set.features = b.x;
  set.labels = b.y;

  TrainOptions bad;
  bad.c_param = 0.0;
  CHECK_THROWS_AS((void)train_linear(set, bad), InvalidRange);
  bad = TrainOptions{};
  bad.max_epochs = 0;
  CHECK_THROWS_AS((void)train_linear(set, bad), InvalidRange);
  bad = TrainOptions{};
  bad.tol = 0.0;
  CHECK_THROWS_AS((void)train_linear(set, bad), InvalidRange);

  LabeledSet wrong = set;
  wrong.labels.pop_back();
  CHECK_THROWS_AS((void)train_linear(wrong, TrainOptions{}), LengthMismatch);

  LabeledSet sparse = set;
  for (auto& l : sparse.labels) l *= 2;  // classes {0, 2}: class 1 empty
  CHECK_THROWS_AS((void)train_linear(sparse, TrainOptions{}), InvalidRange);

  LabeledSet single = set;
  for (auto& l : single.labels) l = 0;
  CHECK_THROWS_AS((void)train_linear(single, TrainOptions{}), SingleClass);

  Matrix asym(4, 4);
  for (std::size_t i = 0; i < 4; ++i) asym(i, i) = 1.0;
  asym(0, 1) = 0.5;  // no mirror entry
  CHECK_THROWS_AS((void)train_kernel(asym, {0, 1, 0, 1}, TrainOptions{}), NotPsd);

  Matrix indefinite(2, 2);
  indefinite(0, 1) = indefinite(1, 0) = 1.0;  // eigenvalues +-1
  CHECK_THROWS_AS((void)train_kernel(indefinite, {0, 1}, TrainOptions{}), NotPsd);

  const GramMatrix gram = induced_gram(b.x, GramSource{});
  CHECK_THROWS_AS((void)train_kernel(gram.entries, {0, 1}, TrainOptions{}), LengthMismatch);

  const SvmModel model = train_linear(set, TrainOptions{});
  const double x[5] = {0, 0, 0, 0, 0};
  CHECK_THROWS_AS((void)predict(model, x, 5), DimensionMismatch);
}

TEST_CASE("infer_class_count requires dense nonnegative labels") {
  CHECK(infer_class_count({0, 1, 2, 1, 0}) == 3);
  CHECK(infer_class_count({1, 0}) == 2);
  CHECK_THROWS_AS((void)infer_class_count({0, 0, 0}), SingleClass);
  CHECK_THROWS_AS((void)infer_class_count({}), SingleClass);
  CHECK_THROWS_AS((void)infer_class_count({0, -1, 1}), InvalidRange);
  CHECK_THROWS_AS((void)infer_class_count({0, 2}), InvalidRange);
}

TEST_CASE("stratified split partitions and keeps every class on both sides") {
  std::vector<int> labels;
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 9 + c; ++i) labels.push_back(c);

  const auto [train, hold] = stratified_split(labels, 0.5, 21);
  CHECK(std::is_sorted(train.begin(), train.end()));
  CHECK(std::is_sorted(hold.begin(), hold.end()));
  std::set<std::size_t> all(train.begin(), train.end());
  for (std::size_t i : hold) CHECK(all.insert(i).second);
  CHECK(all.size() == labels.size());

  for (int c = 0; c < 4; ++c) {
    std::size_t in_train = 0, in_hold = 0;
    for (std::size_t i : train) in_train += labels[i] == c ? 1 : 0;
    for (std::size_t i : hold) in_hold += labels[i] == c ? 1 : 0;
    CHECK(in_train >= 1);
    CHECK(in_hold >= 1);
    // 50/50 split of n_c samples: sides differ by at most one.
    CHECK(in_train + in_hold == static_cast<std::size_t>(9 + c));
    CHECK((in_train > in_hold ? in_train - in_hold : in_hold - in_train) <= 1);
  }

  const auto again = stratified_split(labels, 0.5, 21);
  CHECK(again.first == train);
  CHECK(again.second == hold);
  const auto other = stratified_split(labels, 0.5, 22);
  CHECK(other.first != train);

  CHECK_THROWS_AS((void)stratified_split(labels, 0.0, 1), InvalidRange);
  CHECK_THROWS_AS((void)stratified_split(labels, 1.0, 1), InvalidRange);
  CHECK_THROWS_AS((void)stratified_split({0, 0, 1}, 0.5, 1), TooFewSamplesPerClass);
}

TEST_CASE("stratified folds balance classes and partition the indices") {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 10; ++i) labels.push_back(c);

  const auto folds = stratified_folds(labels, 5, 33);
  REQUIRE(folds.size() == 5);
  std::set<std::size_t> all;
  for (const auto& fold : folds) {
    CHECK(!fold.empty());
    CHECK(std::is_sorted(fold.begin(), fold.end()));
    for (std::size_t i : fold) CHECK(all.insert(i).second);
    // 10 samples per class over 5 folds: exactly 2 of each class per fold.
    for (int c = 0; c < 3; ++c) {
      std::size_t count = 0;
      for (std::size_t i : fold) count += labels[i] == c ? 1 : 0;
      CHECK(count == 2);
    }
  }
  CHECK(all.size() == labels.size());

  CHECK(stratified_folds(labels, 5, 33) == folds);
  CHECK(stratified_folds(labels, 5, 34) != folds);
  CHECK_THROWS_AS((void)stratified_folds(labels, 1, 1), InvalidRange);
  CHECK_THROWS_AS((void)stratified_folds({0, 1}, 3, 1), InvalidRange);
}

TEST_CASE("sigma cross-validation picks the best grid point, smaller on ties") {
  std::vector<Matrix> descs;
  std::vector<int> labels;
  descriptor_clusters(3, 8, 4, 0.25, 115, descs, labels);

  const std::vector<double> grid = {2.0, 0.5, 1.0};  // deliberately unsorted
  const SigmaCvResult res = cross_validate_sigma(descs, labels, grid, 4, 10.0, 9);
  REQUIRE(res.sigma_grid.size() == 3);
  CHECK(std::is_sorted(res.sigma_grid.begin(), res.sigma_grid.end()));
  REQUIRE(res.mean_accuracy.size() == 3);
  REQUIRE(res.fold_accuracy.rows() == 3);
  REQUIRE(res.fold_accuracy.cols() == 4);

  // mean_accuracy is the fold average, and best_sigma is the first argmax.
  std::size_t best = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    double m = 0.0;
    for (std::size_t f = 0; f < 4; ++f) m += res.fold_accuracy(s, f);
    m /= 4.0;
    CHECK(res.mean_accuracy[s] == doctest::Approx(m).epsilon(1e-12));
    if (res.mean_accuracy[s] > res.mean_accuracy[best]) best = s;
  }
  CHECK(res.best_sigma == res.sigma_grid[best]);
  // Clusters this tight are easy at any reasonable bandwidth.
  CHECK(res.mean_accuracy[best] > 0.9);

  CHECK_THROWS_AS((void)cross_validate_sigma(descs, labels, {}, 4, 10.0, 9), InvalidRange);
  std::vector<int> lone = labels;
  lone.back() = 7;  // sparse labels
  CHECK_THROWS_AS((void)cross_validate_sigma(descs, lone, {1.0}, 4, 10.0, 9), InvalidRange);
  std::vector<int> thin = labels;
  for (auto& l : thin)
    if (l == 2) l = 0;
  thin.back() = 2;  // dense again, but class 2 has a single sample
  CHECK_THROWS_AS((void)cross_validate_sigma(descs, thin, {1.0}, 4, 10.0, 9),
                  TooFewSamplesPerClass);
}

TEST_SUITE_END();
