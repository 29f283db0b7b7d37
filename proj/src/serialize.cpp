#include "logeuc/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "logeuc/errors.hpp"

namespace logeuc {

namespace {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::string& path, const char* expected_format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid JSON in '" + path + "': " + e.what(), 1);
  }
  if (!j.is_object() || j.value("format", "") != expected_format) {
    throw ParseError("'" + path + "' is not a " + std::string(expected_format) + " file", 1);
  }
  if (j.value("version", 0) != 1) {
    throw ParseError("unsupported container version in '" + path + "'", 1);
  }
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ParseError(what + " must be a nonempty array", 1);
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ParseError(what + " rows must be nonempty arrays", 1);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ParseError(what + " rows have inconsistent lengths", 1);
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) throw ParseError(what + " entries must be numbers", 1);
      m(i, c) = j[i][c].get<double>();
    }
  }
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

MapSpec map_spec_of(const FeatureMap& map) {
  MapSpec spec;
  if (const RgwMap* rgw = std::get_if<RgwMap>(&map)) {
    spec.scheme = Scheme::Rgw;
    spec.d = rgw->d;
    spec.nu = rgw->nu;
    spec.sigma = rgw->sigma;
    spec.seed = rgw->seed;
    spec.theta = rgw->dist.theta;
    spec.n_max = rgw->dist.n_max;
    return spec;
  }
  const BaselineMap& base = std::get<BaselineMap>(map);
  spec.scheme = base.scheme;
  spec.d = base.d;
  spec.nu = base.nu;
  spec.sigma = base.sigma;
  spec.seed = base.seed;
  return spec;
}

FeatureMap instantiate_map(const MapSpec& spec) {
  return sample_feature_map(spec.scheme, spec.d, spec.nu, spec.sigma,
                            DegreeDistribution::geometric(spec.theta, spec.n_max), spec.seed);
}

namespace {

Json map_spec_to_json(const MapSpec& spec) {
  Json j;
  j["scheme"] = scheme_name(spec.scheme);
  j["d"] = spec.d;
  j["nu"] = spec.nu;
  j["sigma"] = spec.sigma;
  j["seed"] = spec.seed;
  j["theta"] = spec.theta;
  j["n_max"] = spec.n_max;
  return j;
}

MapSpec map_spec_from_json(const Json& j) {
  MapSpec spec;
  spec.scheme = scheme_from_name(j.at("scheme").get<std::string>());
  spec.d = j.at("d").get<std::size_t>();
  spec.nu = j.at("nu").get<std::size_t>();
  spec.sigma = j.at("sigma").get<double>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.theta = j.at("theta").get<double>();
  spec.n_max = j.at("n_max").get<int>();
  return spec;
}

}  // namespace

void save_map_spec(const std::string& path, const MapSpec& spec) {
  Json j;
  j["format"] = "logeuc-map";
  j["version"] = 1;
  j.update(map_spec_to_json(spec));
  write_json_file(path, j);
}

MapSpec load_map_spec(const std::string& path) {
  const Json j = read_json_file(path, "logeuc-map");
  try {
    return map_spec_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad map container '" + path + "': " + e.what(), 1);
  }
}

void save_descriptor_set(const std::string& path, const DescriptorSet& set,
                         const std::vector<PipelineFailure>& rejected) {
  Json j;
  j["format"] = "logeuc-descriptors";
  j["version"] = 1;
  j["d"] = set.d;
  j["labels"] = set.labels;
  Json descs = Json::array();
  for (const Matrix& m : set.descriptors) {
    Json flat = Json::array();
    for (std::size_t k = 0; k < m.size(); ++k) flat.push_back(m.data()[k]);
    descs.push_back(std::move(flat));
  }
  j["descriptors"] = std::move(descs);
  Json rej = Json::array();
  for (const PipelineFailure& f : rejected) {
    Json r;
    r["index"] = f.index;
    r["message"] = f.message;
    rej.push_back(std::move(r));
  }
  j["rejected"] = std::move(rej);
  write_json_file(path, j);
}

DescriptorSet load_descriptor_set(const std::string& path) {
  const Json j = read_json_file(path, "logeuc-descriptors");
  DescriptorSet set;
  try {
    set.d = j.at("d").get<std::size_t>();
    set.labels = j.at("labels").get<std::vector<int>>();
    const Json& descs = j.at("descriptors");
    if (!descs.is_array()) throw ParseError("'descriptors' must be an array", 1);
    for (const auto& flat : descs) {
      if (!flat.is_array() || flat.size() != set.d * set.d) {
        throw ParseError("descriptor length does not match d*d", 1);
      }
      Matrix m(set.d, set.d);
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (!flat[k].is_number()) throw ParseError("descriptor entries must be numbers", 1);
        m.data()[k] = flat[k].get<double>();
      }
      set.descriptors.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad descriptor container '" + path + "': " + e.what(), 1);
  }
  if (set.labels.size() != set.descriptors.size()) {
    throw ParseError("labels and descriptors are misaligned in '" + path + "'", 1);
  }
  for (const Matrix& m : set.descriptors) {
    if (std::abs(frobenius_norm(m) - 1.0) > 1e-6) {
      throw ParseError("descriptor in '" + path + "' is not unit Frobenius norm", 1);
    }
  }
  return set;
}

void save_model(const std::string& path, const ModelContainer& container) {
  if (container.kind != "features" && container.kind != "exact") {
    throw InvalidRange("save_model: kind must be 'features' or 'exact'");
  }
  Json j;
  j["format"] = "logeuc-model";
  j["version"] = 1;
  j["kind"] = container.kind;

  const SvmModel& m = container.model;
  Json jm;
  jm["mode"] = m.mode == SvmModel::Mode::Primal ? "primal" : "dual";
  jm["class_count"] = m.class_count;
  jm["feature_dim"] = m.feature_dim;
  jm["c_param"] = m.c_param;
  jm["use_bias"] = m.use_bias;
  if (m.mode == SvmModel::Mode::Primal) {
    jm["weights"] = matrix_to_json(m.weights);
    jm["biases"] = m.biases;
  } else {
    jm["alphas"] = matrix_to_json(m.alphas);
    jm["train_labels"] = m.train_labels;
    jm["support"] = m.support;
  }
  jm["final_dual_objective"] = m.final_dual_objective;
  jm["epochs_run"] = m.epochs_run;
  j["model"] = std::move(jm);

  if (container.kind == "features") {
    j["map"] = map_spec_to_json(container.map);
  } else {
    j["sigma"] = container.sigma;
    Json descs = Json::array();
    for (const Matrix& d : container.train_descriptors) {
      Json flat = Json::array();
      for (std::size_t k = 0; k < d.size(); ++k) flat.push_back(d.data()[k]);
      descs.push_back(std::move(flat));
    }
    j["train_descriptors"] = std::move(descs);
    j["descriptor_dim"] = container.train_descriptors.empty()
                              ? std::size_t{0}
                              : container.train_descriptors.front().rows();
  }
  write_json_file(path, j);
}

ModelContainer load_model(const std::string& path) {
  const Json j = read_json_file(path, "logeuc-model");
  ModelContainer c;
  try {
    c.kind = j.at("kind").get<std::string>();
    const Json& jm = j.at("model");
    const std::string mode = jm.at("mode").get<std::string>();
    if (mode != "primal" && mode != "dual") throw ParseError("unknown model mode", 1);
    c.model.mode = mode == "primal" ? SvmModel::Mode::Primal : SvmModel::Mode::Dual;
    c.model.class_count = jm.at("class_count").get<int>();
    c.model.feature_dim = jm.at("feature_dim").get<std::size_t>();
    c.model.c_param = jm.at("c_param").get<double>();
    c.model.use_bias = jm.at("use_bias").get<bool>();
    if (c.model.mode == SvmModel::Mode::Primal) {
      c.model.weights = matrix_from_json(jm.at("weights"), "weights");
      c.model.biases = jm.at("biases").get<std::vector<double>>();
      if (c.model.weights.rows() != static_cast<std::size_t>(c.model.class_count) ||
          c.model.weights.cols() != c.model.feature_dim ||
          c.model.biases.size() != static_cast<std::size_t>(c.model.class_count)) {
        throw ParseError("primal model shapes are inconsistent", 1);
      }
    } else {
      c.model.alphas = matrix_from_json(jm.at("alphas"), "alphas");
      c.model.train_labels = jm.at("train_labels").get<std::vector<int>>();
      c.model.support = jm.at("support").get<std::vector<std::size_t>>();
      if (c.model.alphas.rows() != static_cast<std::size_t>(c.model.class_count) ||
          c.model.alphas.cols() != c.model.feature_dim ||
          c.model.train_labels.size() != c.model.feature_dim) {
        throw ParseError("dual model shapes are inconsistent", 1);
      }
    }
    c.model.final_dual_objective = jm.at("final_dual_objective").get<std::vector<double>>();
    c.model.epochs_run = jm.at("epochs_run").get<std::vector<int>>();

    if (c.kind == "features") {
      c.map = map_spec_from_json(j.at("map"));
    } else if (c.kind == "exact") {
      c.sigma = j.at("sigma").get<double>();
      const std::size_t dim = j.at("descriptor_dim").get<std::size_t>();
      for (const auto& flat : j.at("train_descriptors")) {
        if (!flat.is_array() || flat.size() != dim * dim) {
          throw ParseError("train descriptor length does not match dim*dim", 1);
        }
        Matrix m(dim, dim);
        for (std::size_t k = 0; k < m.size(); ++k) m.data()[k] = flat[k].get<double>();
        c.train_descriptors.push_back(std::move(m));
      }
      if (c.train_descriptors.size() != c.model.feature_dim) {
        throw ParseError("exact model training descriptors misaligned with alphas", 1);
      }
    } else {
      throw ParseError("unknown model kind '" + c.kind + "'", 1);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad model container '" + path + "': " + e.what(), 1);
  }
  return c;
}

void save_gram_csv(const std::string& path, const GramMatrix& gram) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  if (gram.source.kind == GramSource::Kind::Exact) {
    out << "# gram n=" << gram.n << " source=exact sigma=" << format_double(gram.source.sigma)
        << "\n";
  } else {
    out << "# gram n=" << gram.n << " source=induced scheme=" << gram.source.scheme
        << " nu=" << gram.source.nu << " seed=" << gram.source.seed << "\n";
  }
  for (std::size_t i = 0; i < gram.n; ++i) {
    for (std::size_t j = 0; j < gram.n; ++j) {
      if (j) out << ",";
      out << format_double(gram.entries(i, j));
    }
    out << "\n";
  }
}

}  // namespace logeuc
