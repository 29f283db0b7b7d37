#include "logeuc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "logeuc/classify.hpp"
#include "logeuc/errors.hpp"
#include "logeuc/estimator_lab.hpp"
#include "logeuc/kernels.hpp"
#include "logeuc/parallel.hpp"
#include "logeuc/rng.hpp"
#include "logeuc/serialize.hpp"
#include "logeuc/spd_core.hpp"
#include "logeuc/svg.hpp"

namespace logeuc {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitParse = 2;
constexpr int kExitPipeline = 3;
constexpr int kExitLab = 4;
constexpr int kExitTrain = 5;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void ensure_parent(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

void write_file(const std::string& path, const std::string& content) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

std::string join_path(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

template <typename T>
std::vector<T> take(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw LengthMismatch("accuracy: prediction/label count mismatch");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == truth[i];
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

std::vector<Scheme> parse_schemes(const std::string& name) {
  if (name == "all") {
    return {Scheme::Rgw, Scheme::TrigRff, Scheme::MacLaurin, Scheme::HadamardFastfood};
  }
  return {scheme_from_name(name)};
}

const char* scheme_color(Scheme s) {
  switch (s) {
    case Scheme::Rgw: return "#d62728";
    case Scheme::TrigRff: return "#1f77b4";
    case Scheme::MacLaurin: return "#2ca02c";
    case Scheme::HadamardFastfood: return "#9467bd";
  }
  return "#000000";
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::size_t fastfood_effective_nu(std::size_t nu) {
  if (nu == 0) throw InvalidRange("fastfood_effective_nu: nu must be positive");
  const std::size_t up = next_pow2(nu);
  if (up == nu) return nu;
  const std::size_t down = up / 2;
  return nu - down <= up - nu ? down : up;
}

SweepResult run_sweep(const DescriptorSet& set, const SweepConfig& config) {
  if (set.descriptors.empty()) throw InvalidRange("run_sweep: empty descriptor set");
  if (config.nu_grid.empty()) throw InvalidRange("run_sweep: empty nu grid");
  if (config.repetitions < 1) throw InvalidRange("run_sweep: repetitions must be >= 1");
  if (config.schemes.empty()) throw InvalidRange("run_sweep: no schemes selected");
  const int class_count = infer_class_count(set.labels);

  std::vector<std::size_t> grid = config.nu_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  SweepResult result;
  const auto [train_idx, test_idx] =
      stratified_split(set.labels, config.train_fraction, derive(config.seed, {0x5917}));
  const std::vector<Matrix> train_x = take(set.descriptors, train_idx);
  const std::vector<Matrix> test_x = take(set.descriptors, test_idx);
  const std::vector<int> train_y = take(set.labels, train_idx);
  const std::vector<int> test_y = take(set.labels, test_idx);

  Timer t_cv;
  double sigma = config.sigma;
  if (!config.sigma_cv_grid.empty()) {
    const SigmaCvResult cv = cross_validate_sigma(train_x, train_y, config.sigma_cv_grid,
                                                  config.cv_folds, config.c_param,
                                                  derive(config.seed, {0xCF}));
    sigma = cv.best_sigma;
  }
  result.chosen_sigma = sigma;
  result.timings.cv_s = t_cv.seconds();

  // The run's single quadratic-cost Gram; reference model and its holdout
  // kernel rows are both sliced from it.
  Timer t_gram;
  const GramMatrix gram = exact_gram(set.descriptors, sigma);
  const SvmModel exact_model =
      train_kernel(gram_submatrix(gram.entries, train_idx, train_idx), train_y,
                   TrainOptions{.c_param = config.c_param,
                                .seed = derive(config.seed, {0x7124, 0xE}),
                                .use_bias = false});
  Matrix test_rows(test_idx.size(), train_idx.size());
  for (std::size_t i = 0; i < test_idx.size(); ++i) {
    for (std::size_t j = 0; j < train_idx.size(); ++j) {
      test_rows(i, j) = gram.entries(test_idx[i], train_idx[j]);
    }
  }
  result.exact_accuracy = accuracy(predict_batch(exact_model, test_rows), test_y);
  result.timings.gram_s = t_gram.seconds();

  const std::size_t reps = static_cast<std::size_t>(config.repetitions);
  const std::size_t total = config.schemes.size() * grid.size() * reps;
  std::vector<double> cell_acc(total, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> t_map(total, 0.0), t_feat(total, 0.0), t_train(total, 0.0);

  try {
    parallel_for(0, total, [&](std::size_t job) {
      const std::size_t rep = job % reps;
      const std::size_t nu_i = (job / reps) % grid.size();
      const std::size_t scheme_i = job / (reps * grid.size());
      const Scheme scheme = config.schemes[scheme_i];
      const std::size_t nu = grid[nu_i];
      const std::size_t nu_eff =
          scheme == Scheme::HadamardFastfood ? fastfood_effective_nu(nu) : nu;
      // Cell seeds depend on (scheme, requested nu, rep) only, so a subset
      // rerun reproduces the same cells.
      const std::uint64_t scheme_tag = static_cast<std::uint64_t>(scheme);

      Timer tm;
      const FeatureMap map =
          sample_feature_map(scheme, set.d, nu_eff, sigma,
                             DegreeDistribution::geometric(config.theta, 64),
                             derive(config.seed, {0x5EE9, scheme_tag, nu, rep}));
      t_map[job] = tm.seconds();

      Timer tf;
      Matrix f_train = apply_feature_map_batch(map, train_x);
      const Matrix f_test = apply_feature_map_batch(map, test_x);
      t_feat[job] = tf.seconds();

      Timer tt;
      const SvmModel model =
          train_linear(LabeledSet{std::move(f_train), train_y, class_count},
                       TrainOptions{.c_param = config.c_param,
                                    .seed = derive(config.seed, {0x7124, scheme_tag, nu, rep}),
                                    .use_bias = false});
      cell_acc[job] = accuracy(predict_batch(model, f_test), test_y);
      t_train[job] = tt.seconds();
    });
  } catch (const Error& e) {
    result.error = e.what();
  }

  for (std::size_t scheme_i = 0; scheme_i < config.schemes.size(); ++scheme_i) {
    for (std::size_t nu_i = 0; nu_i < grid.size(); ++nu_i) {
      const std::size_t base = (scheme_i * grid.size() + nu_i) * reps;
      bool complete = true;
      double mean = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        if (!std::isfinite(cell_acc[base + r])) complete = false;
        mean += cell_acc[base + r];
      }
      if (!complete) continue;
      mean /= static_cast<double>(reps);
      double ss = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double d = cell_acc[base + r] - mean;
        ss += d * d;
      }
      const double sd = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;
      const Scheme scheme = config.schemes[scheme_i];
      result.cells.push_back(SweepCell{
          scheme, grid[nu_i],
          scheme == Scheme::HadamardFastfood ? fastfood_effective_nu(grid[nu_i]) : grid[nu_i],
          config.repetitions, mean, sd});
    }
  }
  for (std::size_t j = 0; j < total; ++j) {
    result.timings.map_s += t_map[j];
    result.timings.features_s += t_feat[j];
    result.timings.train_s += t_train[j];
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "scheme,nu,nu_effective,repetitions,mean_accuracy,accuracy_sd\n";
  out << "exact,0,0,1," << format_double(result.exact_accuracy) << ",0\n";
  for (const SweepCell& c : result.cells) {
    out << scheme_name(c.scheme) << "," << c.nu << "," << c.nu_effective << "," << c.repetitions
        << "," << format_double(c.mean_accuracy) << "," << format_double(c.accuracy_sd) << "\n";
  }
  return out.str();
}

std::string sweep_svg(const SweepResult& result) {
  std::vector<SvgSeries> series;
  for (const SweepCell& c : result.cells) {
    SvgSeries* line = nullptr;
    for (SvgSeries& s : series) {
      if (s.name == scheme_name(c.scheme)) line = &s;
    }
    if (!line) {
      series.push_back(SvgSeries{scheme_name(c.scheme), scheme_color(c.scheme), false, {}});
      line = &series.back();
    }
    line->points.emplace_back(static_cast<double>(c.nu), c.mean_accuracy);
  }
  double x_lo = 10.0, x_hi = 5000.0;
  if (!result.cells.empty()) {
    x_lo = static_cast<double>(result.cells.front().nu);
    x_hi = x_lo;
    for (const SweepCell& c : result.cells) {
      x_lo = std::min(x_lo, static_cast<double>(c.nu));
      x_hi = std::max(x_hi, static_cast<double>(c.nu));
    }
  }
  series.push_back(SvgSeries{"exact",
                             "#444444",
                             true,
                             {{x_lo, result.exact_accuracy}, {x_hi, result.exact_accuracy}}});
  return render_line_chart("Holdout accuracy vs feature dimension", "feature dimension (log scale)",
                           "holdout accuracy", series, true);
}

namespace {

// ---- shared dataset plumbing -----------------------------------------------

struct DatasetArgs {
  bool synthetic = false;
  std::string input;
  std::string format = "csv";
  int classes = 5;
  int per_class = 20;
  std::size_t joints = 15;
  std::size_t frames_min = 40;
  std::size_t frames_max = 80;
  double gain = kSyntheticGain;
  std::size_t hip_index = 0;
  double ridge = -1.0;  // negative: adaptive per-sequence default
};

void add_dataset_flags(CLI::App* cmd, DatasetArgs& a) {
  auto* syn = cmd->add_flag("--synthetic", a.synthetic, "generate the synthetic action set");
  auto* inp = cmd->add_option("--input", a.input, "sequence file (csv or jsonl)");
  syn->excludes(inp);
  inp->excludes(syn);
  cmd->add_option("--format", a.format, "input file format")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--classes", a.classes, "synthetic: number of classes");
  cmd->add_option("--per-class", a.per_class, "synthetic: sequences per class");
  cmd->add_option("--joints", a.joints, "synthetic: joints per skeleton");
  cmd->add_option("--frames-min", a.frames_min, "synthetic: minimum frames");
  cmd->add_option("--frames-max", a.frames_max, "synthetic: maximum frames");
  cmd->add_option("--gain", a.gain, "synthetic: dynamics noise gain");
  cmd->add_option("--hip-index", a.hip_index, "joint used as the reference center");
  cmd->add_option("--ridge", a.ridge, "covariance ridge; negative selects the adaptive default");
}

PipelineResult build_descriptors(const DatasetArgs& a, std::uint64_t seed) {
  std::vector<SkeletonSequence> seqs;
  if (a.synthetic) {
    seqs = generate_synthetic(a.classes, a.per_class, a.joints, a.frames_min, a.frames_max,
                              derive(seed, {0xDA7A}), a.gain);
  } else {
    seqs = load_sequences(a.input, a.format == "csv" ? SeqFormat::Csv : SeqFormat::Jsonl);
  }
  std::optional<double> ridge;
  if (a.ridge >= 0.0) ridge = a.ridge;
  PipelineResult result = descriptor_pipeline(seqs, a.hip_index, ridge);
  for (const PipelineFailure& f : result.rejected) {
    std::cout << "rejected sequence " << f.index << ": " << f.message << "\n";
  }
  return result;
}

// ---- extract ----------------------------------------------------------------

int cmd_extract(const DatasetArgs& data, std::uint64_t seed, const std::string& out_path) {
  const PipelineResult pr = build_descriptors(data, seed);
  ensure_parent(out_path);
  save_descriptor_set(out_path, pr.set, pr.rejected);
  std::cout << "descriptors: " << pr.set.descriptors.size() << " written to " << out_path << " ("
            << pr.rejected.size() << " rejected)\n";
  return kExitOk;
}

// ---- lab ---------------------------------------------------------------------

struct LabArgs {
  std::string descriptors;
  std::vector<std::size_t> pair = {0, 1};
  std::size_t dim = 10;
  std::string scheme = "all";
  std::size_t nu = 8;
  std::size_t trials = 100000;
  std::size_t variance_trials = 20000;
  std::vector<std::size_t> variance_grid = {16, 32, 64, 128, 256};
  double sigma = 1.0;
  double theta = 0.5;
  std::uint64_t seed = 1;
  std::string out = ".";
};

// Unit-norm symmetric matrix, the descriptor domain, synthesized directly.
Matrix random_log_descriptor(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      const double v = rng.normal();
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return normalize_log(m);
}

int cmd_lab(const LabArgs& a) {
  Matrix x, y;
  if (!a.descriptors.empty()) {
    const DescriptorSet set = load_descriptor_set(a.descriptors);
    if (a.pair.size() != 2 || a.pair[0] >= set.descriptors.size() ||
        a.pair[1] >= set.descriptors.size()) {
      throw IndexOutOfRange("lab: --pair indices out of range");
    }
    x = set.descriptors[a.pair[0]];
    y = set.descriptors[a.pair[1]];
  } else {
    x = random_log_descriptor(a.dim, derive(a.seed, {0xAB, 0}));
    y = random_log_descriptor(a.dim, derive(a.seed, {0xAB, 1}));
  }
  const DegreeDistribution dist = DegreeDistribution::geometric(a.theta, 64);
  const std::vector<Scheme> schemes = parse_schemes(a.scheme);

  std::ostringstream bias_csv, var_csv, cheb_csv;
  bias_csv << "pair_id,scheme,nu,trials,exact_value,sample_mean,sample_variance,standard_error,"
              "z_score,bound_value\n";
  var_csv << "pair_id,scheme,nu,trials,exact_value,sample_variance,standard_error,bound_value\n";
  cheb_csv << "scheme,nu,epsilon,empirical_tail,measured_bound,analytic_bound,binomial_se\n";

  Json summary;
  summary["format"] = "logeuc-lab-summary";
  summary["version"] = 1;
  summary["sigma"] = a.sigma;
  summary["theta"] = a.theta;
  summary["bias_nu"] = a.nu;
  summary["bias_trials"] = a.trials;
  summary["variance_trials"] = a.variance_trials;
  summary["exact_value"] = log_euclidean_kernel(x, y, a.sigma);
  Json per_scheme = Json::object();

  double worst_z = 0.0;
  for (const Scheme scheme : schemes) {
    const std::uint64_t tag = static_cast<std::uint64_t>(scheme);
    const EstimatorReport bias =
        run_bias_trial(x, y, scheme, a.nu, a.sigma, dist, a.trials, derive(a.seed, {0xB1A5, tag}));
    bias_csv << bias.pair_id << "," << scheme_name(scheme) << "," << bias.nu << "," << bias.trials
             << "," << format_double(bias.exact_value) << "," << format_double(bias.sample_mean)
             << "," << format_double(bias.sample_variance) << ","
             << format_double(bias.standard_error) << "," << format_double(bias.z_score) << ","
             << format_double(bias.bound_value) << "\n";
    worst_z = std::max(worst_z, std::abs(bias.z_score));

    const VarianceSweep sweep = run_variance_sweep(x, y, scheme, a.variance_grid, a.sigma, dist,
                                                   a.variance_trials, derive(a.seed, {0x7A81, tag}));
    for (const EstimatorReport& r : sweep.reports) {
      var_csv << r.pair_id << "," << scheme_name(scheme) << "," << r.nu << "," << r.trials << ","
              << format_double(r.exact_value) << "," << format_double(r.sample_variance) << ","
              << format_double(r.standard_error) << "," << format_double(r.bound_value) << "\n";
      if (r.trial_values.size() >= 10000) {
        const ChebyshevTable tail = chebyshev_curve(r);
        for (std::size_t e = 0; e < tail.epsilons.size(); ++e) {
          cheb_csv << scheme_name(scheme) << "," << r.nu << ","
                   << format_double(tail.epsilons[e]) << ","
                   << format_double(tail.empirical_tail[e]) << ","
                   << format_double(tail.measured_bound[e]) << ","
                   << format_double(tail.analytic_bound[e]) << ","
                   << format_double(tail.binomial_se[e]) << "\n";
        }
      }
    }

    Json row;
    row["max_abs_z"] = std::abs(bias.z_score);
    row["bias_mean"] = bias.sample_mean;
    row["variance_slope"] = sweep.slope;
    per_scheme[scheme_name(scheme)] = std::move(row);
    std::cout << "scheme " << scheme_name(scheme) << ": max |z| = " << fixed(std::abs(bias.z_score), 3)
              << ", variance slope = " << fixed(sweep.slope, 3)
              << " (reference rates: -1 averaging, -3 bound)\n";
  }
  summary["schemes"] = std::move(per_scheme);

  write_file(join_path(a.out, "bias.csv"), bias_csv.str());
  write_file(join_path(a.out, "variance.csv"), var_csv.str());
  write_file(join_path(a.out, "chebyshev.csv"), cheb_csv.str());
  write_file(join_path(a.out, "summary.json"), summary.dump(2) + "\n");

  if (worst_z > 4.0) {
    std::cerr << "lab assertion failed: max |z| = " << fixed(worst_z, 3) << " exceeds 4\n";
    return kExitLab;
  }
  return kExitOk;
}

// ---- sweep --------------------------------------------------------------------

int cmd_sweep(const DatasetArgs& data, SweepConfig config, const std::string& out_dir) {
  Timer t_desc;
  const PipelineResult pr = build_descriptors(data, config.seed);
  const double descriptors_s = t_desc.seconds();

  SweepResult result = run_sweep(pr.set, config);
  result.timings.descriptors_s = descriptors_s;

  write_file(join_path(out_dir, "sweep.csv"), sweep_csv(result));
  write_file(join_path(out_dir, "sweep.svg"), sweep_svg(result));

  std::cout << "sigma: " << format_double(result.chosen_sigma) << "\n";
  std::cout << "exact reference accuracy: " << format_double(result.exact_accuracy) << "\n";
  for (const SweepCell& c : result.cells) {
    std::cout << scheme_name(c.scheme) << " nu=" << c.nu << " (effective " << c.nu_effective
              << "): mean=" << fixed(c.mean_accuracy, 4) << " sd=" << fixed(c.accuracy_sd, 4)
              << "\n";
  }
  const StageTimings& t = result.timings;
  std::cout << "[timing] descriptors: " << fixed(t.descriptors_s, 3) << " s\n";
  if (!config.sigma_cv_grid.empty()) {
    std::cout << "[timing] sigma cv: " << fixed(t.cv_s, 3) << " s\n";
  }
  std::cout << "[timing] exact gram + reference: " << fixed(t.gram_s, 3) << " s\n";
  std::cout << "[timing] map sampling: " << fixed(t.map_s, 3) << " s\n";
  std::cout << "[timing] feature application: " << fixed(t.features_s, 3) << " s\n";
  std::cout << "[timing] linear training: " << fixed(t.train_s, 3) << " s\n";

  if (!result.error.empty()) {
    std::cerr << "error: sweep cell failed: " << result.error
              << " (completed cells were written)\n";
    return kExitTrain;
  }
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string descriptors;
  bool exact = false;
  std::string scheme = "rgw";
  std::size_t nu = 1000;
  double sigma = 1.0;
  double theta = 0.5;
  double c_param = 10.0;
  bool bias = false;
  std::uint64_t seed = 1;
  std::string out = "model.json";
};

int cmd_train(const TrainArgs& a) {
  const DescriptorSet set = load_descriptor_set(a.descriptors);
  const int classes = infer_class_count(set.labels);
  const TrainOptions opt{.c_param = a.c_param, .seed = derive(a.seed, {0x7124}),
                         .use_bias = a.bias};

  ModelContainer container;
  if (a.exact) {
    const GramMatrix gram = exact_gram(set.descriptors, a.sigma);
    container.kind = "exact";
    container.model = train_kernel(gram.entries, set.labels, opt);
    container.sigma = a.sigma;
    container.train_descriptors = set.descriptors;
  } else {
    MapSpec spec;
    spec.scheme = scheme_from_name(a.scheme);
    spec.d = set.d;
    spec.nu = a.nu;
    spec.sigma = a.sigma;
    spec.seed = derive(a.seed, {0x3A9});
    spec.theta = a.theta;
    const FeatureMap map = instantiate_map(spec);
    Matrix features = apply_feature_map_batch(map, set.descriptors);
    container.kind = "features";
    container.model = train_linear(LabeledSet{std::move(features), set.labels, classes}, opt);
    container.map = spec;
  }
  ensure_parent(a.out);
  save_model(a.out, container);
  std::cout << "trained " << container.kind << " model on " << set.descriptors.size()
            << " samples, " << classes << " classes -> " << a.out << "\n";
  return kExitOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string model;
  std::string descriptors;
  std::string out = ".";
};

int cmd_eval(const EvalArgs& a) {
  const ModelContainer container = load_model(a.model);
  const DescriptorSet set = load_descriptor_set(a.descriptors);
  for (int label : set.labels) {
    if (label < 0) throw InvalidRange("eval: negative label in descriptor set");
  }

  std::vector<int> predicted;
  if (container.kind == "features") {
    if (set.d != container.map.d) {
      throw DimensionMismatch("eval: model expects " + std::to_string(container.map.d) + "x" +
                              std::to_string(container.map.d) + " descriptors, got " +
                              std::to_string(set.d) + "x" + std::to_string(set.d));
    }
    const FeatureMap map = instantiate_map(container.map);
    const Matrix features = apply_feature_map_batch(map, set.descriptors);
    predicted = predict_batch(container.model, features);
  } else {
    const std::size_t train_d = container.train_descriptors.front().rows();
    if (set.d != train_d) {
      throw DimensionMismatch("eval: model expects " + std::to_string(train_d) + "x" +
                              std::to_string(train_d) + " descriptors, got " +
                              std::to_string(set.d) + "x" + std::to_string(set.d));
    }
    Matrix rows(set.descriptors.size(), container.train_descriptors.size());
    parallel_for(0, set.descriptors.size(), [&](std::size_t i) {
      for (std::size_t j = 0; j < container.train_descriptors.size(); ++j) {
        rows(i, j) = log_euclidean_kernel_dot_form(set.descriptors[i],
                                                   container.train_descriptors[j],
                                                   container.sigma);
      }
    });
    predicted = predict_batch(container.model, rows);
  }

  int side = container.model.class_count;
  for (int label : set.labels) side = std::max(side, label + 1);
  Matrix confusion(static_cast<std::size_t>(side), static_cast<std::size_t>(side));
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    confusion(static_cast<std::size_t>(set.labels[i]), static_cast<std::size_t>(predicted[i])) +=
        1.0;
  }
  std::cout << "accuracy: " << format_double(accuracy(predicted, set.labels)) << "\n";
  for (int c = 0; c < side; ++c) {
    double row_total = 0.0;
    for (int p = 0; p < side; ++p) row_total += confusion(c, p);
    if (row_total == 0.0) continue;
    std::cout << "recall class " << c << ": " << format_double(confusion(c, c) / row_total)
              << "\n";
  }

  std::ostringstream csv;
  csv << "true_label";
  for (int p = 0; p < side; ++p) csv << ",pred_" << p;
  csv << "\n";
  for (int c = 0; c < side; ++c) {
    csv << c;
    for (int p = 0; p < side; ++p) {
      csv << "," << static_cast<long long>(confusion(c, p));
    }
    csv << "\n";
  }
  write_file(join_path(a.out, "confusion.csv"), csv.str());
  return kExitOk;
}

// ---- gram --------------------------------------------------------------------

struct GramArgs {
  std::string descriptors;
  bool exact = false;
  std::string scheme = "rgw";
  std::size_t nu = 100;
  double sigma = 1.0;
  double theta = 0.5;
  std::uint64_t seed = 1;
  std::string out = "gram.csv";
};

int cmd_gram(const GramArgs& a) {
  const DescriptorSet set = load_descriptor_set(a.descriptors);
  GramMatrix gram;
  if (a.exact) {
    gram = exact_gram(set.descriptors, a.sigma);
  } else {
    const std::uint64_t map_seed = derive(a.seed, {0x3A9});
    const FeatureMap map =
        sample_feature_map(scheme_from_name(a.scheme), set.d, a.nu, a.sigma,
                           DegreeDistribution::geometric(a.theta, 64), map_seed);
    const Matrix features = apply_feature_map_batch(map, set.descriptors);
    gram = induced_gram(features, GramSource{.kind = GramSource::Kind::Induced,
                                             .sigma = a.sigma,
                                             .scheme = a.scheme,
                                             .nu = a.nu,
                                             .seed = map_seed});
  }
  ensure_parent(a.out);
  save_gram_csv(a.out, gram);
  std::cout << "gram: " << gram.n << " x " << gram.n << " -> " << a.out << "\n";
  return kExitOk;
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const SingleClass& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTrain;
  } catch (const TooFewSamplesPerClass& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTrain;
  } catch (const NotPsd& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTrain;
  } catch (const NotConverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTrain;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitUnexpected;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Log-Euclidean kernel approximation: descriptors, feature maps, estimator lab, "
               "SVM benchmark"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads; env LOGEUC_THREADS is the fallback, hardware otherwise");

  const std::vector<std::string> scheme_names = {"rgw", "rff", "maclaurin", "fastfood"};
  std::vector<std::string> scheme_names_all = scheme_names;
  scheme_names_all.push_back("all");

  // extract
  auto* ex = app.add_subcommand("extract", "sequences -> unit-norm covariance log descriptors");
  DatasetArgs ex_data;
  std::uint64_t ex_seed = 1;
  std::string ex_out = "descriptors.json";
  add_dataset_flags(ex, ex_data);
  ex->add_option("--seed", ex_seed, "master seed");
  ex->add_option("--out", ex_out, "output descriptor container");

  // lab
  auto* lb = app.add_subcommand("lab", "estimator bias, variance decay, and tail tables");
  LabArgs lab;
  auto* lb_desc = lb->add_option("--descriptors", lab.descriptors, "descriptor container");
  lb->add_option("--pair", lab.pair, "descriptor indices to compare")
      ->expected(2)
      ->needs(lb_desc);
  lb->add_option("--dim", lab.dim, "synthesized pair dimension when no container is given");
  lb->add_option("--scheme", lab.scheme)->check(CLI::IsMember(scheme_names_all));
  lb->add_option("--nu", lab.nu, "feature dimension for the bias trial");
  lb->add_option("--trials", lab.trials, "bias trial count");
  lb->add_option("--variance-trials", lab.variance_trials, "trials per variance grid point");
  lb->add_option("--variance-grid", lab.variance_grid, "nu grid for the variance sweep")
      ->delimiter(',');
  lb->add_option("--sigma", lab.sigma, "kernel bandwidth");
  lb->add_option("--theta", lab.theta, "degree distribution parameter");
  lb->add_option("--seed", lab.seed, "master seed");
  lb->add_option("--out", lab.out, "output directory");

  // sweep
  auto* sw = app.add_subcommand("sweep", "accuracy benchmark across schemes and nu");
  DatasetArgs sw_data;
  SweepConfig sw_cfg;
  std::string sw_scheme = "all";
  std::string sw_out = ".";
  add_dataset_flags(sw, sw_data);
  sw->add_option("--nu-grid", sw_cfg.nu_grid, "feature dimensions to benchmark")->delimiter(',');
  sw->add_option("--repetitions", sw_cfg.repetitions, "independent map seeds per cell");
  sw->add_option("--scheme", sw_scheme)->check(CLI::IsMember(scheme_names_all));
  auto* sw_sigma = sw->add_option("--sigma", sw_cfg.sigma, "kernel bandwidth");
  auto* sw_sigma_cv =
      sw->add_option("--sigma-cv", sw_cfg.sigma_cv_grid, "bandwidth grid; picks sigma by CV")
          ->delimiter(',');
  sw_sigma->excludes(sw_sigma_cv);
  sw_sigma_cv->excludes(sw_sigma);
  sw->add_option("--cv-folds", sw_cfg.cv_folds, "folds for --sigma-cv");
  sw->add_option("--train-fraction", sw_cfg.train_fraction, "stratified holdout split");
  sw->add_option("--c-param", sw_cfg.c_param, "SVM C");
  sw->add_option("--theta", sw_cfg.theta, "degree distribution parameter");
  sw->add_option("--seed", sw_cfg.seed, "master seed");
  sw->add_option("--out", sw_out, "output directory");

  // train
  auto* tr = app.add_subcommand("train", "fit a one-vs-rest SVM and save it");
  TrainArgs train;
  tr->add_option("--descriptors", train.descriptors, "descriptor container")->required();
  auto* tr_exact = tr->add_flag("--exact", train.exact, "exact-kernel dual model");
  auto* tr_scheme = tr->add_option("--scheme", train.scheme)->check(CLI::IsMember(scheme_names));
  auto* tr_nu = tr->add_option("--nu", train.nu, "feature dimension");
  tr_exact->excludes(tr_scheme);
  tr_exact->excludes(tr_nu);
  tr->add_option("--sigma", train.sigma, "kernel bandwidth");
  tr->add_option("--theta", train.theta, "degree distribution parameter");
  tr->add_option("--c-param", train.c_param, "SVM C");
  auto* tr_bias = tr->add_flag("--bias", train.bias, "augment features with a bias coordinate");
  tr_exact->excludes(tr_bias);
  tr->add_option("--seed", train.seed, "master seed");
  tr->add_option("--out", train.out, "model file");

  // eval
  auto* ev = app.add_subcommand("eval", "score a saved model on a descriptor set");
  EvalArgs eval;
  ev->add_option("--model", eval.model, "model file")->required();
  ev->add_option("--descriptors", eval.descriptors, "descriptor container")->required();
  ev->add_option("--out", eval.out, "output directory for confusion.csv");

  // gram
  auto* gr = app.add_subcommand("gram", "write an exact or feature-induced Gram matrix");
  GramArgs gram;
  gr->add_option("--descriptors", gram.descriptors, "descriptor container")->required();
  auto* gr_exact = gr->add_flag("--exact", gram.exact, "exact kernel instead of features");
  auto* gr_scheme = gr->add_option("--scheme", gram.scheme)->check(CLI::IsMember(scheme_names));
  auto* gr_nu = gr->add_option("--nu", gram.nu, "feature dimension");
  gr_exact->excludes(gr_scheme);
  gr_exact->excludes(gr_nu);
  gr->add_option("--sigma", gram.sigma, "kernel bandwidth");
  gr->add_option("--theta", gram.theta, "degree distribution parameter");
  gr->add_option("--seed", gram.seed, "master seed");
  gr->add_option("--out", gram.out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  if (threads > 0) set_thread_count(static_cast<std::size_t>(threads));

  return run_guarded([&]() -> int {
    if (ex->parsed()) {
      if (!ex_data.synthetic && ex_data.input.empty()) {
        std::cerr << "error: extract needs --synthetic or --input\n";
        return kExitParse;
      }
      return cmd_extract(ex_data, ex_seed, ex_out);
    }
    if (lb->parsed()) return cmd_lab(lab);
    if (sw->parsed()) {
      if (!sw_data.synthetic && sw_data.input.empty()) {
        std::cerr << "error: sweep needs --synthetic or --input\n";
        return kExitParse;
      }
      sw_cfg.schemes = parse_schemes(sw_scheme);
      return cmd_sweep(sw_data, sw_cfg, sw_out);
    }
    if (tr->parsed()) return cmd_train(train);
    if (ev->parsed()) return cmd_eval(eval);
    if (gr->parsed()) return cmd_gram(gram);
    return kExitParse;
  });
}

}  // namespace logeuc
