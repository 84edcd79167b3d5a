#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccf/matrix.hpp"

namespace ccf {

enum class Split : std::uint8_t { base = 0, val = 1, novel = 2 };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

// Immutable store of labeled feature vectors. Class ids are dense
// integers 0..n_classes-1 and every class belongs to exactly one split.
// Banks persist with f32 feature storage; in memory features are f64.
class FeatureBank {
 public:
  FeatureBank() = default;
  FeatureBank(Matrix features, std::vector<std::uint32_t> sample_classes,
              std::vector<Split> class_splits,
              std::vector<std::string> class_names = {});

  std::size_t feature_dim() const noexcept { return features_.cols(); }
  std::size_t n_samples() const noexcept { return features_.rows(); }
  std::size_t n_classes() const noexcept { return class_splits_.size(); }

  const Matrix& features() const noexcept { return features_; }
  std::span<const double> sample(std::size_t i) const { return features_.row(i); }
  std::uint32_t label(std::size_t i) const { return sample_classes_[i]; }
  const std::vector<std::uint32_t>& labels() const noexcept { return sample_classes_; }

  Split class_split(std::uint32_t class_id) const;
  const std::vector<std::uint32_t>& class_samples(std::uint32_t class_id) const;
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }

  // Class ids of a split, ascending.
  std::vector<std::uint32_t> classes_of(Split s) const;
  // Sample indices of a split, ascending.
  std::vector<std::uint32_t> samples_of(Split s) const;

  bool operator==(const FeatureBank& other) const;

 private:
  Matrix features_;                              // n_samples x feature_dim
  std::vector<std::uint32_t> sample_classes_;    // per sample
  std::vector<Split> class_splits_;              // per class
  std::vector<std::string> class_names_;         // empty or per class
  std::vector<std::vector<std::uint32_t>> by_class_;
};

enum class BankFormat { binary, csv };

// Binary container: magic "FBK1", little-endian, f32 features.
// CSV container: header class_id,f0,...,f{d-1} plus a companion
// "<stem>.splits.json" file carrying the class-to-split map.
FeatureBank load_bank(const std::filesystem::path& path, BankFormat format);
void save_bank(const FeatureBank& bank, const std::filesystem::path& path,
               BankFormat format);
BankFormat bank_format_from_extension(const std::filesystem::path& path);
std::filesystem::path csv_splits_path(const std::filesystem::path& csv_path);

struct SyntheticSpec {
  std::size_t n_base_classes = 64;
  std::size_t n_val_classes = 16;
  std::size_t n_novel_classes = 20;
  std::size_t feature_dim = 64;
  std::size_t samples_per_class = 100;
  double centroid_scale = 1.0;
  double within_class_stddev = 1.2;
  // Blend between a convex mixture of 2-3 base centroids (1.0) and a
  // fresh random direction (0.0) when placing val/novel centroids.
  double novel_correlation = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

// Gaussian clusters around per-class centroids; val/novel centroids are
// centered on mixtures of base centroids so base-to-novel transfer exists
// by construction. Pure function of the spec. Features are quantized to
// f32 granularity to match the on-disk container precision.
FeatureBank generate_synthetic(const SyntheticSpec& spec);

// Row c = mean feature of the c-th class of the split (classes ascending
// by id, matching classes_of(split)).
Matrix class_centroids(const FeatureBank& bank, Split split);

}  // namespace ccf
