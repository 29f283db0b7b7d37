#include "logeuc/data.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "logeuc/errors.hpp"
#include "logeuc/parallel.hpp"
#include "logeuc/rng.hpp"
#include "logeuc/spd_core.hpp"

namespace logeuc {

namespace {

// Random orthogonal matrix via Gram-Schmidt on a Gaussian square matrix.
Matrix random_orthogonal(Rng& rng, std::size_t f) {
  Matrix q(f, f);
  for (std::size_t k = 0; k < q.size(); ++k) q.data()[k] = rng.normal();
  for (std::size_t c = 0; c < f; ++c) {
    for (std::size_t prev = 0; prev < c; ++prev) {
      double dot = 0.0;
      for (std::size_t i = 0; i < f; ++i) dot += q(i, c) * q(i, prev);
      for (std::size_t i = 0; i < f; ++i) q(i, c) -= dot * q(i, prev);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < f; ++i) norm += q(i, c) * q(i, c);
    norm = std::sqrt(norm);
    if (!(norm > 1e-12)) throw DegenerateSeries("random_orthogonal: collapsed column");
    for (std::size_t i = 0; i < f; ++i) q(i, c) /= norm;
  }
  return q;
}

void matvec(const Matrix& a, const std::vector<double>& x, std::vector<double>& out) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* row = a.data() + i * a.cols();
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * x[j];
    out[i] = s;
  }
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

long long parse_int_token(const std::string& tok, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (errno != 0 || end == tok.c_str() || *end != '\0') {
    throw ParseError("expected integer, got '" + tok + "'", line);
  }
  return v;
}

double parse_double_token(const std::string& tok, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (errno != 0 || end == tok.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw ParseError("expected finite number, got '" + tok + "'", line);
  }
  return v;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

void validate_sequence(const SkeletonSequence& seq, std::size_t start_line) {
  if (seq.coords.rows() < 2) {
    throw ParseError("sequence has fewer than 2 frames", start_line);
  }
  if (seq.joints < 2) throw ParseError("sequence has fewer than 2 joints", start_line);
}

std::vector<SkeletonSequence> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);

  std::vector<SkeletonSequence> out;
  std::string line;
  std::size_t lineno = 0;

  // Header.
  std::size_t joints = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cols = split_csv_row(line);
    if (cols.size() < 9 || cols[0] != "seq_id" || cols[1] != "frame" || cols[2] != "label") {
      throw ParseError("header must start with seq_id,frame,label and joint columns", lineno);
    }
    if ((cols.size() - 3) % 3 != 0) {
      throw ParseError("joint columns must come in x,y,z triples", lineno);
    }
    joints = (cols.size() - 3) / 3;
    break;
  }
  if (joints == 0) return out;  // empty file

  const std::size_t ncols = 3 + 3 * joints;
  bool have_current = false;
  long long current_id = 0;
  long long last_frame = 0;
  int current_label = -1;
  std::size_t seq_start_line = 0;
  std::vector<double> rows;  // staged coords of the current sequence

  auto flush = [&]() {
    if (!have_current) return;
    SkeletonSequence seq;
    seq.joints = joints;
    seq.label = current_label;
    const std::size_t t = rows.size() / (3 * joints);
    seq.coords = Matrix(t, 3 * joints);
    std::memcpy(seq.coords.data(), rows.data(), sizeof(double) * rows.size());
    validate_sequence(seq, seq_start_line);
    out.push_back(std::move(seq));
    rows.clear();
    have_current = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cols = split_csv_row(line);
    if (cols.size() != ncols) {
      throw ParseError("expected " + std::to_string(ncols) + " columns, got " +
                       std::to_string(cols.size()), lineno);
    }
    const long long id = parse_int_token(cols[0], lineno);
    const long long frame = parse_int_token(cols[1], lineno);
    const long long label = parse_int_token(cols[2], lineno);

    if (!have_current || id != current_id) {
      flush();
      have_current = true;
      current_id = id;
      current_label = static_cast<int>(label);
      seq_start_line = lineno;
    } else {
      if (frame <= last_frame) {
        throw ParseError("frame numbers must strictly increase within a sequence", lineno);
      }
      if (static_cast<int>(label) != current_label) {
        throw ParseError("label changed within a sequence", lineno);
      }
    }
    last_frame = frame;
    for (std::size_t k = 3; k < ncols; ++k) rows.push_back(parse_double_token(cols[k], lineno));
  }
  flush();
  return out;
}

void save_csv(const std::string& path, const std::vector<SkeletonSequence>& seqs) {
  std::ofstream outf(path);
  if (!outf) throw Error("cannot write '" + path + "'");
  std::size_t joints = seqs.empty() ? 0 : seqs.front().joints;
  outf << "seq_id,frame,label";
  for (std::size_t j = 0; j < joints; ++j) {
    outf << ",j" << j << "x,j" << j << "y,j" << j << "z";
  }
  outf << "\n";
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    const SkeletonSequence& seq = seqs[s];
    if (seq.joints != joints) {
      throw InconsistentJointCount("save_sequences: sequence " + std::to_string(s) +
                                   " joint count differs from the first sequence");
    }
    for (std::size_t t = 0; t < seq.coords.rows(); ++t) {
      outf << s << "," << t << "," << seq.label;
      for (std::size_t k = 0; k < seq.coords.cols(); ++k) {
        outf << "," << format_g17(seq.coords(t, k));
      }
      outf << "\n";
    }
  }
}

std::vector<SkeletonSequence> load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::vector<SkeletonSequence> out;
  std::string line;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    ++record;
    if (line.empty() || line == "\r") continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), record);
    }
    if (!j.is_object() || !j.contains("label") || !j.contains("coords")) {
      throw ParseError("record must be an object with 'label' and 'coords'", record);
    }
    if (!j["label"].is_number_integer()) throw ParseError("'label' must be an integer", record);
    const auto& coords = j["coords"];
    if (!coords.is_array() || coords.empty()) {
      throw ParseError("'coords' must be a nonempty array of frames", record);
    }
    SkeletonSequence seq;
    seq.label = j["label"].get<int>();
    if (j.contains("subject")) {
      if (!j["subject"].is_number_integer()) {
        throw ParseError("'subject' must be an integer", record);
      }
      seq.subject = j["subject"].get<int>();
    }
    const std::size_t t = coords.size();
    std::size_t joints = 0;
    for (std::size_t fi = 0; fi < t; ++fi) {
      const auto& frame = coords[fi];
      if (!frame.is_array()) throw ParseError("frame must be an array of joints", record);
      if (fi == 0) {
        joints = frame.size();
        if (joints < 2) throw ParseError("need at least 2 joints", record);
        seq.joints = joints;
        seq.coords = Matrix(t, 3 * joints);
      } else if (frame.size() != joints) {
        throw InconsistentJointCount("record " + std::to_string(record) + " frame " +
                                     std::to_string(fi) + " has " +
                                     std::to_string(frame.size()) + " joints, expected " +
                                     std::to_string(joints));
      }
      for (std::size_t ji = 0; ji < joints; ++ji) {
        const auto& joint = frame[ji];
        if (!joint.is_array() || joint.size() != 3) {
          throw ParseError("joint must be an [x,y,z] triple", record);
        }
        for (std::size_t a = 0; a < 3; ++a) {
          if (!joint[a].is_number()) throw ParseError("coordinate must be a number", record);
          const double v = joint[a].get<double>();
          if (!std::isfinite(v)) throw ParseError("coordinate must be finite", record);
          seq.coords(fi, 3 * ji + a) = v;
        }
      }
    }
    if (t < 2) throw ParseError("sequence has fewer than 2 frames", record);
    out.push_back(std::move(seq));
  }
  return out;
}

void save_jsonl(const std::string& path, const std::vector<SkeletonSequence>& seqs) {
  std::ofstream outf(path);
  if (!outf) throw Error("cannot write '" + path + "'");
  for (const SkeletonSequence& seq : seqs) {
    nlohmann::ordered_json j;
    j["label"] = seq.label;
    if (seq.subject >= 0) j["subject"] = seq.subject;
    nlohmann::ordered_json frames = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < seq.coords.rows(); ++t) {
      nlohmann::ordered_json frame = nlohmann::ordered_json::array();
      for (std::size_t ji = 0; ji < seq.joints; ++ji) {
        frame.push_back({seq.coords(t, 3 * ji), seq.coords(t, 3 * ji + 1),
                         seq.coords(t, 3 * ji + 2)});
      }
      frames.push_back(std::move(frame));
    }
    j["coords"] = std::move(frames);
    outf << j.dump() << "\n";
  }
}

}  // namespace

std::vector<SkeletonSequence> generate_synthetic(int classes, int per_class, std::size_t joints,
                                                 std::size_t frames_min, std::size_t frames_max,
                                                 std::uint64_t seed, double gain) {
  if (classes < 2) throw InvalidRange("generate_synthetic: need at least 2 classes");
  if (per_class < 2) throw InvalidRange("generate_synthetic: need at least 2 per class");
  if (joints < 3) throw InvalidRange("generate_synthetic: need at least 3 joints");
  if (frames_min < 2 || frames_max < frames_min) {
    throw InvalidRange("generate_synthetic: need 2 <= frames_min <= frames_max");
  }
  if (!(gain > 0.0)) throw InvalidRange("generate_synthetic: gain must be positive");

  const std::size_t f = 3 * (joints - 1);

  // Shared rest pose so skeletons look alike across classes; it is constant
  // per joint and therefore invisible to the covariance descriptor.
  std::vector<double> rest(f);
  {
    Rng rng(derive(seed, {0x9E57u}));
    for (std::size_t k = 0; k < f; ++k) rest[k] = rng.uniform(-0.5, 0.5);
  }

  std::vector<Matrix> dynamics(static_cast<std::size_t>(classes));
  std::vector<Matrix> mixing(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    Rng rng(derive(seed, {0xC1A5u, static_cast<std::uint64_t>(c)}));
    const Matrix r = random_orthogonal(rng, f);
    std::vector<double> decay(f);
    for (std::size_t k = 0; k < f; ++k) decay[k] = rng.uniform(0.5, 0.9);
    Matrix a(f, f);
    for (std::size_t i = 0; i < f; ++i)
      for (std::size_t k = 0; k < f; ++k) {
        const double rik = r(i, k) * decay[k];
        for (std::size_t j = 0; j < f; ++j) a(i, j) += rik * r(j, k);
      }
    dynamics[static_cast<std::size_t>(c)] = std::move(a);

    Matrix m(f, f);
    const double scale = 1.0 / std::sqrt(static_cast<double>(f));
    for (std::size_t k = 0; k < m.size(); ++k) m.data()[k] = scale * rng.normal();
    mixing[static_cast<std::size_t>(c)] = std::move(m);
  }

  constexpr int kBurnIn = 30;
  std::vector<SkeletonSequence> out;
  out.reserve(static_cast<std::size_t>(classes) * static_cast<std::size_t>(per_class));
  std::vector<double> offsets(f), noise(f), mixed(f), next(f);
  for (int c = 0; c < classes; ++c) {
    const Matrix& a = dynamics[static_cast<std::size_t>(c)];
    const Matrix& m = mixing[static_cast<std::size_t>(c)];
    for (int k = 0; k < per_class; ++k) {
      Rng rng(derive(seed, {0x5E9u, static_cast<std::uint64_t>(c),
                            static_cast<std::uint64_t>(k)}));
      const std::size_t frames =
          frames_min + rng.uniform_below(frames_max - frames_min + 1);

      auto advance = [&]() {
        for (std::size_t i = 0; i < f; ++i) noise[i] = rng.normal();
        matvec(m, noise, mixed);
        matvec(a, offsets, next);
        for (std::size_t i = 0; i < f; ++i) offsets[i] = next[i] + gain * mixed[i];
      };

      for (std::size_t i = 0; i < f; ++i) noise[i] = rng.normal();
      matvec(m, noise, mixed);
      for (std::size_t i = 0; i < f; ++i) offsets[i] = gain * mixed[i];
      for (int b = 0; b < kBurnIn; ++b) advance();

      SkeletonSequence seq;
      seq.joints = joints;
      seq.label = c;
      seq.coords = Matrix(frames, 3 * joints);
      double hip[3] = {0.0, 0.0, 0.0};
      for (std::size_t t = 0; t < frames; ++t) {
        for (int axis = 0; axis < 3; ++axis) seq.coords(t, axis) = hip[axis];
        for (std::size_t j = 1; j < joints; ++j) {
          for (int axis = 0; axis < 3; ++axis) {
            const std::size_t oi = 3 * (j - 1) + static_cast<std::size_t>(axis);
            seq.coords(t, 3 * j + static_cast<std::size_t>(axis)) =
                hip[axis] + rest[oi] + offsets[oi];
          }
        }
        advance();
        for (int axis = 0; axis < 3; ++axis) hip[axis] += 0.02 * rng.normal();
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

Matrix preprocess(const SkeletonSequence& seq, std::size_t hip_index) {
  if (hip_index >= seq.joints) {
    throw IndexOutOfRange("preprocess: hip index " + std::to_string(hip_index) +
                          " out of range for " + std::to_string(seq.joints) + " joints");
  }
  const std::size_t t = seq.coords.rows();
  const std::size_t f = 3 * (seq.joints - 1);
  Matrix out(t, f);
  for (std::size_t r = 0; r < t; ++r) {
    std::size_t col = 0;
    for (std::size_t j = 0; j < seq.joints; ++j) {
      if (j == hip_index) continue;
      for (std::size_t axis = 0; axis < 3; ++axis) {
        out(r, col++) = seq.coords(r, 3 * j + axis) - seq.coords(r, 3 * hip_index + axis);
      }
    }
  }
  return out;
}

PipelineResult descriptor_pipeline(const std::vector<SkeletonSequence>& seqs,
                                   std::size_t hip_index, std::optional<double> ridge) {
  PipelineResult result;
  if (seqs.empty()) return result;
  const std::size_t joints = seqs.front().joints;
  for (std::size_t i = 1; i < seqs.size(); ++i) {
    if (seqs[i].joints != joints) {
      throw InconsistentJointCount("descriptor_pipeline: sequence " + std::to_string(i) +
                                   " has " + std::to_string(seqs[i].joints) +
                                   " joints, expected " + std::to_string(joints));
    }
  }

  std::vector<Matrix> slots(seqs.size());
  std::vector<std::string> failures(seqs.size());
  parallel_for(0, seqs.size(), [&](std::size_t i) {
    try {
      const Matrix series = preprocess(seqs[i], hip_index);
      Matrix cov;
      if (ridge.has_value()) {
        cov = covariance_descriptor(series, *ridge);
      } else {
        cov = covariance_descriptor(series, 0.0);
        double trace = 0.0;
        for (std::size_t k = 0; k < cov.rows(); ++k) trace += cov(k, k);
        const double eps = 1e-4 * trace / static_cast<double>(cov.rows());
        for (std::size_t k = 0; k < cov.rows(); ++k) cov(k, k) += eps;
      }
      slots[i] = normalize_log(matrix_log(cov));
    } catch (const Error& e) {
      failures[i] = e.what();
      if (failures[i].empty()) failures[i] = "unknown pipeline error";
    }
  });

  result.set.d = 3 * (joints - 1);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (failures[i].empty()) {
      result.set.descriptors.push_back(std::move(slots[i]));
      result.set.labels.push_back(seqs[i].label);
    } else {
      result.rejected.push_back({i, failures[i]});
    }
  }
  return result;
}

std::vector<SkeletonSequence> load_sequences(const std::string& path, SeqFormat format) {
  return format == SeqFormat::Csv ? load_csv(path) : load_jsonl(path);
}

void save_sequences(const std::string& path, const std::vector<SkeletonSequence>& seqs,
                    SeqFormat format) {
  if (format == SeqFormat::Csv) {
    save_csv(path, seqs);
  } else {
    save_jsonl(path, seqs);
  }
}

}  // namespace logeuc
