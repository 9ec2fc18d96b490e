#pragma once

// Tabular data model: schema, CSV ingestion, seeded splitting, synthetic
// biased datasets and perturbation utilities.
//
// Encoding convention used throughout the library:
//   a = 1 privileged, a = 0 unprivileged; y = 1 favorable, y = 0 unfavorable.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cot {

struct SensitiveAttribute {
  std::string column;
  std::string privileged_value;
  // Raw token written back for a = 0. Filled in from the data by load_csv when
  // the schema does not name it.
  std::string unprivileged_value = "0";

  bool operator==(const SensitiveAttribute&) const = default;
};

struct Schema {
  std::string label_column;
  std::string favorable_value;
  std::string unfavorable_value = "0";
  std::vector<SensitiveAttribute> sensitive_attributes;
  std::vector<std::string> feature_columns;

  // Throws kSchema when the column sets overlap, a name repeats, or no
  // sensitive attribute is declared.
  void validate() const;

  std::vector<std::string> sensitive_names() const;
  bool has_sensitive(std::string_view name) const;

  bool operator==(const Schema&) const = default;
};

Schema schema_from_json(const nlohmann::json& doc);
nlohmann::json schema_to_json(const Schema& schema);
Schema load_schema(const std::filesystem::path& path);
void save_schema(const Schema& schema, const std::filesystem::path& path);

// Immutable n x d feature matrix (row-major) with binary sensitive columns and
// binary labels. row_ids() records each row's index in the dataset it was
// originally loaded or synthesized as; it survives split/subsample and is the
// basis of leakage audits, but it is not part of value equality.
class Dataset {
 public:
  using Binary = std::vector<std::uint8_t>;

  Dataset(Schema schema, std::vector<double> features,
          std::map<std::string, Binary> sensitive, Binary labels,
          std::vector<std::size_t> row_ids = {});

  std::size_t rows() const { return labels_.size(); }
  std::size_t feature_dim() const { return schema_.feature_columns.size(); }

  const Schema& schema() const { return schema_; }
  std::span<const double> features() const { return features_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(features_).subspan(r * feature_dim(), feature_dim());
  }
  double feature(std::size_t r, std::size_t c) const { return features_[r * feature_dim() + c]; }
  std::span<const std::uint8_t> labels() const { return labels_; }
  std::span<const std::uint8_t> sensitive(std::string_view name) const;
  const std::map<std::string, Binary>& sensitive_columns() const { return sensitive_; }
  std::span<const std::size_t> row_ids() const { return row_ids_; }

  // Rows at `indices`, in that order.
  Dataset select(std::span<const std::size_t> indices) const;
  Dataset with_sensitive(std::string_view name, Binary values) const;
  Dataset with_features(std::vector<double> features) const;

  bool operator==(const Dataset& other) const;

 private:
  Schema schema_;
  std::vector<double> features_;
  std::map<std::string, Binary> sensitive_;
  Binary labels_;
  std::vector<std::size_t> row_ids_;
};

Dataset load_csv(const std::filesystem::path& path, const Schema& schema);
Dataset parse_csv(std::string_view text, const Schema& schema);
// Writes features, then sensitive columns, then the label using the schema's
// raw tokens; numbers use shortest round-trip formatting.
void write_csv(const Dataset& data, const std::filesystem::path& path);
std::string format_csv(const Dataset& data);

// Seeded shuffle then prefix split: floor(train_fraction * n) rows go to the
// first part. Rows of both parts keep the shuffled order.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed);

struct SynthSpec {
  std::int64_t n11 = 0;  // a=1, y=1
  std::int64_t n10 = 0;  // a=1, y=0
  std::int64_t n01 = 0;  // a=0, y=1
  std::int64_t n00 = 0;  // a=0, y=0
  int feature_dim = 5;
  double group_signal = 1.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

SynthSpec synth_spec_from_json(const nlohmann::json& doc);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

// Dataset with exactly the requested contingency counts on the single
// sensitive column "a" (label "y", features "x0".."x{d-1}"). Each feature is
// N(group_signal * (2y - 1) / sqrt(d), noise_sd^2), so the class means sit
// 2 * group_signal apart (in noise units when noise_sd = 1) and features
// carry no information about a beyond what y carries.
Dataset synthesize(const SynthSpec& spec);

// Uniform sample of n_keep rows without replacement, original order kept.
Dataset subsample(const Dataset& data, std::size_t n_keep, std::uint64_t seed);

struct ContaminationConfig {
  double missing_rate = 0.0;
  double noise_sd = 0.0;
  double outlier_rate = 0.0;
};

// Per feature cell, independently: with probability missing_rate the value is
// replaced by the column median (imputation of an injected missing value);
// Gaussian noise of noise_sd * column sd is added; with probability
// outlier_rate the value is multiplied by 10. Labels and sensitive columns are
// never touched.
Dataset contaminate(const Dataset& data, const ContaminationConfig& config,
                    std::uint64_t seed);

}  // namespace cot
