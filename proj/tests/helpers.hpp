#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cot/random.hpp"
#include "cot/tabular.hpp"

namespace testing_support {

// One sensitive column "a", label "y" and the given feature columns.
inline cot::Dataset make_dataset(const std::vector<std::uint8_t>& a,
                                 const std::vector<std::uint8_t>& y,
                                 std::vector<double> features = {}, std::size_t dim = 0) {
  cot::Schema s;
  s.label_column = "y";
  s.favorable_value = "1";
  s.sensitive_attributes.push_back({"a", "1", "0"});
  for (std::size_t c = 0; c < dim; ++c) s.feature_columns.push_back("x" + std::to_string(c));
  return cot::Dataset(s, std::move(features), {{"a", a}}, y);
}

inline cot::Dataset synth(std::int64_t n11, std::int64_t n10, std::int64_t n01, std::int64_t n00,
                          double group_signal = 1.0, std::uint64_t seed = 0) {
  cot::SynthSpec spec;
  spec.n11 = n11;
  spec.n10 = n10;
  spec.n01 = n01;
  spec.n00 = n00;
  spec.group_signal = group_signal;
  spec.seed = seed;
  return cot::synthesize(spec);
}

// Adds a second sensitive column "b" drawn per row with P(b=1) depending on y.
inline cot::Dataset with_second_attribute(const cot::Dataset& d, double p_y1, double p_y0,
                                          std::uint64_t seed) {
  cot::Rng rng(seed);
  cot::Dataset::Binary b(d.rows());
  for (std::size_t r = 0; r < d.rows(); ++r) {
    b[r] = rng.uniform() < (d.labels()[r] ? p_y1 : p_y0) ? 1 : 0;
  }
  cot::Schema s = d.schema();
  s.sensitive_attributes.push_back({"b", "1", "0"});
  auto cols = d.sensitive_columns();
  cols["b"] = std::move(b);
  std::vector<double> f(d.features().begin(), d.features().end());
  std::vector<std::uint8_t> y(d.labels().begin(), d.labels().end());
  return cot::Dataset(s, std::move(f), std::move(cols), std::move(y));
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cot_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing_support
