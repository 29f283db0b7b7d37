#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logeuc/classify.hpp"
#include "logeuc/data.hpp"
#include "logeuc/feature_maps.hpp"
#include "logeuc/kernels.hpp"

namespace logeuc {

/// %.17g rendering; round-trips any finite double exactly.
std::string format_double(double v);

/// All parameters needed to re-derive a sampled map. Factors, frequencies,
/// and diagonals are never stored: loading re-samples them from the seed.
struct MapSpec {
  Scheme scheme = Scheme::Rgw;
  std::size_t d = 0;
  std::size_t nu = 0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  double theta = 0.5;  // used by rgw
  int n_max = 64;      // used by rgw and maclaurin
};

MapSpec map_spec_of(const FeatureMap& map);
FeatureMap instantiate_map(const MapSpec& spec);

void save_map_spec(const std::string& path, const MapSpec& spec);
MapSpec load_map_spec(const std::string& path);

void save_descriptor_set(const std::string& path, const DescriptorSet& set,
                         const std::vector<PipelineFailure>& rejected = {});
DescriptorSet load_descriptor_set(const std::string& path);

/// A saved classifier plus whatever it needs at prediction time: a MapSpec
/// for feature-scheme models, or the training descriptors and bandwidth for
/// exact-kernel models.
struct ModelContainer {
  std::string kind;  // "features" or "exact"
  SvmModel model;
  MapSpec map;                             // kind == "features"
  double sigma = 1.0;                      // kind == "exact"
  std::vector<Matrix> train_descriptors;   // kind == "exact"
};

void save_model(const std::string& path, const ModelContainer& container);
ModelContainer load_model(const std::string& path);

/// Row-major numeric CSV prefixed by one `#` metadata line naming the source.
void save_gram_csv(const std::string& path, const GramMatrix& gram);

}  // namespace logeuc
