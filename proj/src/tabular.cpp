#include "cot/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "cot/error.hpp"
#include "cot/random.hpp"

namespace cot {

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

// RFC-4180 record splitter: quoted fields, doubled quotes, CRLF or LF.
std::vector<std::vector<std::string>> parse_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && trim(record.front()).empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started || trim(field).empty()) {
          field.clear();
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorKind::kParse, "unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();
  return records;
}

std::string quote_if_needed(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct BinaryColumn {
  Dataset::Binary values;
  std::string other_token;
};

// Maps `positive` to 1 and at most one other token to 0.
BinaryColumn encode_binary(const std::vector<std::string_view>& cells,
                           const std::string& column, const std::string& positive,
                           const std::string& fallback_other) {
  std::set<std::string_view> distinct(cells.begin(), cells.end());
  if (distinct.size() > 2) {
    std::string listed;
    for (auto tok : distinct) listed += (listed.empty() ? "" : ", ") + std::string(tok);
    throw Error(ErrorKind::kCardinality, "column '" + column + "' has " +
                                             std::to_string(distinct.size()) +
                                             " distinct values {" + listed +
                                             "}; a binary column allows two");
  }
  std::string other;
  for (auto tok : distinct) {
    if (tok != positive) other = std::string(tok);
  }
  if (distinct.size() == 2 && !distinct.contains(positive)) {
    throw Error(ErrorKind::kSchema, "column '" + column + "' does not contain the value '" +
                                        positive + "' named by the schema");
  }
  if (other.empty()) other = fallback_other != positive ? fallback_other : "not_" + positive;
  BinaryColumn out{Dataset::Binary(cells.size()), other};
  for (std::size_t i = 0; i < cells.size(); ++i) out.values[i] = cells[i] == positive ? 1 : 0;
  return out;
}

}  // namespace

void Schema::validate() const {
  if (label_column.empty()) throw Error(ErrorKind::kSchema, "label_column is empty");
  if (sensitive_attributes.empty()) {
    throw Error(ErrorKind::kSchema, "at least one sensitive attribute must be declared");
  }
  std::set<std::string> seen{label_column};
  auto claim = [&](const std::string& name, std::string_view role) {
    if (name.empty()) throw Error(ErrorKind::kSchema, std::string(role) + " column name is empty");
    if (!seen.insert(name).second) {
      throw Error(ErrorKind::kSchema,
                  "column '" + name + "' is used more than once in the schema");
    }
  };
  for (const auto& attr : sensitive_attributes) claim(attr.column, "sensitive");
  for (const auto& f : feature_columns) claim(f, "feature");
}

std::vector<std::string> Schema::sensitive_names() const {
  std::vector<std::string> names;
  names.reserve(sensitive_attributes.size());
  for (const auto& attr : sensitive_attributes) names.push_back(attr.column);
  return names;
}

bool Schema::has_sensitive(std::string_view name) const {
  return std::any_of(sensitive_attributes.begin(), sensitive_attributes.end(),
                     [&](const auto& a) { return a.column == name; });
}

Schema schema_from_json(const nlohmann::json& doc) {
  Schema schema;
  try {
    schema.label_column = doc.at("label_column").get<std::string>();
    schema.favorable_value = doc.at("favorable_value").get<std::string>();
    if (doc.contains("unfavorable_value")) {
      schema.unfavorable_value = doc["unfavorable_value"].get<std::string>();
    }
    for (const auto& item : doc.at("sensitive_attributes")) {
      SensitiveAttribute attr;
      attr.column = item.at("column").get<std::string>();
      attr.privileged_value = item.at("privileged_value").get<std::string>();
      if (item.contains("unprivileged_value")) {
        attr.unprivileged_value = item["unprivileged_value"].get<std::string>();
      }
      schema.sensitive_attributes.push_back(std::move(attr));
    }
    if (doc.contains("feature_columns")) {
      schema.feature_columns = doc["feature_columns"].get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed schema document: ") + e.what());
  }
  if (schema.sensitive_attributes.empty()) {
    throw Error(ErrorKind::kSchema, "at least one sensitive attribute must be declared");
  }
  return schema;
}

nlohmann::json schema_to_json(const Schema& schema) {
  nlohmann::ordered_json doc;
  doc["label_column"] = schema.label_column;
  doc["favorable_value"] = schema.favorable_value;
  doc["unfavorable_value"] = schema.unfavorable_value;
  auto attrs = nlohmann::ordered_json::array();
  for (const auto& a : schema.sensitive_attributes) {
    attrs.push_back({{"column", a.column},
                     {"privileged_value", a.privileged_value},
                     {"unprivileged_value", a.unprivileged_value}});
  }
  doc["sensitive_attributes"] = attrs;
  doc["feature_columns"] = schema.feature_columns;
  return nlohmann::json::parse(doc.dump());
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open schema file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, "schema file " + path.string() + " is not valid JSON: " + e.what());
  }
  return schema_from_json(doc);
}

void save_schema(const Schema& schema, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write schema file " + path.string());
  nlohmann::ordered_json doc = nlohmann::ordered_json::parse(schema_to_json(schema).dump());
  // Keep the field order of the document format rather than alphabetical.
  nlohmann::ordered_json ordered;
  for (const char* key : {"label_column", "favorable_value", "unfavorable_value",
                          "sensitive_attributes", "feature_columns"}) {
    ordered[key] = doc[key];
  }
  out << ordered.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

Dataset::Dataset(Schema schema, std::vector<double> features,
                 std::map<std::string, Binary> sensitive, Binary labels,
                 std::vector<std::size_t> row_ids)
    : schema_(std::move(schema)),
      features_(std::move(features)),
      sensitive_(std::move(sensitive)),
      labels_(std::move(labels)),
      row_ids_(std::move(row_ids)) {
  schema_.validate();
  const std::size_t n = labels_.size();
  if (n == 0) throw Error(ErrorKind::kSize, "a dataset needs at least one row");
  if (features_.size() != n * feature_dim()) {
    throw Error(ErrorKind::kShape, "feature matrix holds " + std::to_string(features_.size()) +
                                       " values, expected " + std::to_string(n) + " x " +
                                       std::to_string(feature_dim()));
  }
  auto check_binary = [n](const Binary& v, const std::string& name) {
    if (v.size() != n) {
      throw Error(ErrorKind::kShape, "column '" + name + "' has " + std::to_string(v.size()) +
                                         " rows, expected " + std::to_string(n));
    }
    for (auto x : v) {
      if (x > 1) throw Error(ErrorKind::kCardinality, "column '" + name + "' is not binary");
    }
  };
  check_binary(labels_, schema_.label_column);
  if (sensitive_.size() != schema_.sensitive_attributes.size()) {
    throw Error(ErrorKind::kSchema, "sensitive columns do not match the schema");
  }
  for (const auto& attr : schema_.sensitive_attributes) {
    auto it = sensitive_.find(attr.column);
    if (it == sensitive_.end()) {
      throw Error(ErrorKind::kSchema, "missing sensitive column '" + attr.column + "'");
    }
    check_binary(it->second, attr.column);
  }
  if (row_ids_.empty()) {
    row_ids_.resize(n);
    std::iota(row_ids_.begin(), row_ids_.end(), std::size_t{0});
  } else if (row_ids_.size() != n) {
    throw Error(ErrorKind::kShape, "row id vector length does not match row count");
  }
}

std::span<const std::uint8_t> Dataset::sensitive(std::string_view name) const {
  auto it = sensitive_.find(std::string(name));
  if (it == sensitive_.end()) {
    throw Error(ErrorKind::kSchema, "unknown sensitive attribute '" + std::string(name) + "'");
  }
  return it->second;
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  const std::size_t d = feature_dim();
  std::vector<double> feats;
  feats.reserve(indices.size() * d);
  Binary labels;
  labels.reserve(indices.size());
  std::vector<std::size_t> ids;
  ids.reserve(indices.size());
  std::map<std::string, Binary> sens;
  for (const auto& [name, col] : sensitive_) sens[name].reserve(indices.size());
  for (auto i : indices) {
    if (i >= rows()) throw Error(ErrorKind::kShape, "row index out of range");
    auto r = row(i);
    feats.insert(feats.end(), r.begin(), r.end());
    labels.push_back(labels_[i]);
    ids.push_back(row_ids_[i]);
    for (const auto& [name, col] : sensitive_) sens[name].push_back(col[i]);
  }
  return Dataset(schema_, std::move(feats), std::move(sens), std::move(labels), std::move(ids));
}

Dataset Dataset::with_sensitive(std::string_view name, Binary values) const {
  auto sens = sensitive_;
  auto it = sens.find(std::string(name));
  if (it == sens.end()) {
    throw Error(ErrorKind::kSchema, "unknown sensitive attribute '" + std::string(name) + "'");
  }
  it->second = std::move(values);
  return Dataset(schema_, features_, std::move(sens), labels_, row_ids_);
}

Dataset Dataset::with_features(std::vector<double> features) const {
  return Dataset(schema_, std::move(features), sensitive_, labels_, row_ids_);
}

bool Dataset::operator==(const Dataset& other) const {
  return schema_ == other.schema_ && features_ == other.features_ &&
         sensitive_ == other.sensitive_ && labels_ == other.labels_;
}

// ---------------------------------------------------------------------------

Dataset parse_csv(std::string_view text, const Schema& schema_in) {
  Schema schema = schema_in;
  const auto records = parse_records(text);
  if (records.empty()) throw Error(ErrorKind::kSchema, "CSV input is empty (no header row)");
  std::vector<std::string> header;
  for (const auto& h : records.front()) header.emplace_back(trim(h));

  auto column_index = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorKind::kSchema, "column '" + name + "' named by the schema is not in the CSV header");
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  if (schema.feature_columns.empty()) {
    std::set<std::string> taken{schema.label_column};
    for (const auto& a : schema.sensitive_attributes) taken.insert(a.column);
    for (const auto& h : header) {
      if (!taken.contains(h)) schema.feature_columns.push_back(h);
    }
  }
  schema.validate();

  const std::size_t label_idx = column_index(schema.label_column);
  std::vector<std::size_t> sens_idx;
  for (const auto& a : schema.sensitive_attributes) sens_idx.push_back(column_index(a.column));
  std::vector<std::size_t> feat_idx;
  for (const auto& f : schema.feature_columns) feat_idx.push_back(column_index(f));

  const std::size_t n = records.size() - 1;
  if (n == 0) throw Error(ErrorKind::kSize, "CSV has a header but no data rows");
  const std::size_t d = feat_idx.size();

  std::vector<double> features(n * d);
  std::vector<std::string_view> label_cells(n);
  std::vector<std::vector<std::string_view>> sens_cells(sens_idx.size(),
                                                        std::vector<std::string_view>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    if (rec.size() != header.size()) {
      throw Error(ErrorKind::kParse, "row " + std::to_string(r) + " has " +
                                         std::to_string(rec.size()) + " fields, header has " +
                                         std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < d; ++c) {
      auto cell = trim(rec[feat_idx[c]]);
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorKind::kParse, "row " + std::to_string(r) + ", column '" +
                                           schema.feature_columns[c] + "': cannot parse '" +
                                           std::string(cell) + "' as a number");
      }
      features[r * d + c] = value;
    }
    label_cells[r] = trim(rec[label_idx]);
    for (std::size_t s = 0; s < sens_idx.size(); ++s) sens_cells[s][r] = trim(rec[sens_idx[s]]);
  }

  auto label = encode_binary(label_cells, schema.label_column, schema.favorable_value,
                             schema.unfavorable_value);
  schema.unfavorable_value = label.other_token;
  std::map<std::string, Dataset::Binary> sensitive;
  for (std::size_t s = 0; s < sens_idx.size(); ++s) {
    auto& attr = schema.sensitive_attributes[s];
    auto col = encode_binary(sens_cells[s], attr.column, attr.privileged_value,
                             attr.unprivileged_value);
    attr.unprivileged_value = col.other_token;
    sensitive[attr.column] = std::move(col.values);
  }
  return Dataset(std::move(schema), std::move(features), std::move(sensitive),
                 std::move(label.values));
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open CSV file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema);
}

std::string format_csv(const Dataset& data) {
  const auto& schema = data.schema();
  std::string out;
  bool first = true;
  auto cell = [&](std::string_view s) {
    if (!first) out.push_back(',');
    out += quote_if_needed(s);
    first = false;
  };
  for (const auto& f : schema.feature_columns) cell(f);
  for (const auto& a : schema.sensitive_attributes) cell(a.column);
  cell(schema.label_column);
  out.push_back('\n');
  for (std::size_t r = 0; r < data.rows(); ++r) {
    first = true;
    for (double v : data.row(r)) cell(format_double(v));
    for (const auto& a : schema.sensitive_attributes) {
      cell(data.sensitive(a.column)[r] ? a.privileged_value : a.unprivileged_value);
    }
    cell(data.labels()[r] ? schema.favorable_value : schema.unfavorable_value);
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write CSV file " + path.string());
  out << format_csv(data);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed) {
  const std::size_t n = data.rows();
  if (n < 2) throw Error(ErrorKind::kSize, "split needs at least two rows");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::kConfig, "train fraction must lie in (0, 1)");
  }
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw Error(ErrorKind::kSize, "split of " + std::to_string(n) + " rows at fraction " +
                                      std::to_string(train_fraction) + " leaves an empty part");
  }
  Rng rng(seed);
  const auto order = rng.permutation(n);
  std::span<const std::size_t> all(order);
  return {data.select(all.first(n_train)), data.select(all.subspan(n_train))};
}

void SynthSpec::validate() const {
  if (n11 < 0 || n10 < 0 || n01 < 0 || n00 < 0) {
    throw Error(ErrorKind::kConfig, "contingency counts must be non-negative");
  }
  const int nonzero = (n11 > 0) + (n10 > 0) + (n01 > 0) + (n00 > 0);
  if (nonzero == 0) throw Error(ErrorKind::kSize, "all contingency counts are zero");
  if (nonzero < 2) throw Error(ErrorKind::kSize, "at least two contingency counts must be positive");
  if (feature_dim < 1) throw Error(ErrorKind::kConfig, "feature_dim must be >= 1");
  if (!(noise_sd > 0.0)) throw Error(ErrorKind::kConfig, "noise_sd must be > 0");
}

SynthSpec synth_spec_from_json(const nlohmann::json& doc) {
  SynthSpec spec;
  try {
    const auto& counts = doc.at("counts");
    if (counts.is_array()) {
      if (counts.size() != 4) throw Error(ErrorKind::kConfig, "counts must have four entries");
      spec.n11 = counts[0].get<std::int64_t>();
      spec.n10 = counts[1].get<std::int64_t>();
      spec.n01 = counts[2].get<std::int64_t>();
      spec.n00 = counts[3].get<std::int64_t>();
    } else {
      spec.n11 = counts.at("n11").get<std::int64_t>();
      spec.n10 = counts.at("n10").get<std::int64_t>();
      spec.n01 = counts.at("n01").get<std::int64_t>();
      spec.n00 = counts.at("n00").get<std::int64_t>();
    }
    spec.feature_dim = doc.value("feature_dim", spec.feature_dim);
    spec.group_signal = doc.value("group_signal", spec.group_signal);
    spec.noise_sd = doc.value("noise_sd", spec.noise_sd);
    spec.seed = doc.value("seed", spec.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed synth spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

nlohmann::json synth_spec_to_json(const SynthSpec& spec) {
  return {{"counts", {{"n11", spec.n11}, {"n10", spec.n10}, {"n01", spec.n01}, {"n00", spec.n00}}},
          {"feature_dim", spec.feature_dim},
          {"group_signal", spec.group_signal},
          {"noise_sd", spec.noise_sd},
          {"seed", spec.seed}};
}

Dataset synthesize(const SynthSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n11 + spec.n10 + spec.n01 + spec.n00);
  const auto d = static_cast<std::size_t>(spec.feature_dim);

  Schema schema;
  schema.label_column = "y";
  schema.favorable_value = "1";
  schema.unfavorable_value = "0";
  schema.sensitive_attributes.push_back({"a", "1", "0"});
  for (std::size_t j = 0; j < d; ++j) schema.feature_columns.push_back("x" + std::to_string(j));

  // Cells enumerated in (a,y) order, then shuffled so row order carries nothing.
  std::vector<std::pair<std::uint8_t, std::uint8_t>> cells;
  cells.reserve(n);
  cells.insert(cells.end(), static_cast<std::size_t>(spec.n11), {1, 1});
  cells.insert(cells.end(), static_cast<std::size_t>(spec.n10), {1, 0});
  cells.insert(cells.end(), static_cast<std::size_t>(spec.n01), {0, 1});
  cells.insert(cells.end(), static_cast<std::size_t>(spec.n00), {0, 0});

  Rng rng(spec.seed);
  const auto order = rng.permutation(n);
  const double offset = spec.group_signal / std::sqrt(static_cast<double>(d));

  std::vector<double> features(n * d);
  Dataset::Binary a(n), y(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto [av, yv] = cells[order[r]];
    a[r] = av;
    y[r] = yv;
    const double mean = offset * (yv ? 1.0 : -1.0);
    for (std::size_t j = 0; j < d; ++j) features[r * d + j] = mean + spec.noise_sd * rng.normal();
  }
  std::map<std::string, Dataset::Binary> sensitive;
  sensitive["a"] = std::move(a);
  return Dataset(std::move(schema), std::move(features), std::move(sensitive), std::move(y));
}

Dataset subsample(const Dataset& data, std::size_t n_keep, std::uint64_t seed) {
  if (n_keep < 1 || n_keep > data.rows()) {
    throw Error(ErrorKind::kSize, "subsample size " + std::to_string(n_keep) +
                                      " outside [1, " + std::to_string(data.rows()) + "]");
  }
  Rng rng(seed);
  auto order = rng.permutation(data.rows());
  order.resize(n_keep);
  std::sort(order.begin(), order.end());
  return data.select(order);
}

Dataset contaminate(const Dataset& data, const ContaminationConfig& config,
                    std::uint64_t seed) {
  if (!(config.missing_rate >= 0.0 && config.missing_rate < 1.0)) {
    throw Error(ErrorKind::kConfig, "missing_rate must lie in [0, 1)");
  }
  if (!(config.outlier_rate >= 0.0 && config.outlier_rate < 1.0)) {
    throw Error(ErrorKind::kConfig, "outlier_rate must lie in [0, 1)");
  }
  if (!(config.noise_sd >= 0.0)) throw Error(ErrorKind::kConfig, "noise_sd must be >= 0");

  const std::size_t n = data.rows();
  const std::size_t d = data.feature_dim();
  std::vector<double> medians(d), sds(d);
  std::vector<double> column(n);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < n; ++r) column[r] = data.feature(r, c);
    const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    sds[c] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    std::sort(column.begin(), column.end());
    medians[c] = n % 2 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
  }

  Rng rng(seed);
  std::vector<double> out(data.features().begin(), data.features().end());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      // Three draws per cell regardless of the rates keep streams aligned.
      const double u_missing = rng.uniform();
      const double z = rng.normal();
      const double u_outlier = rng.uniform();
      double& v = out[r * d + c];
      if (u_missing < config.missing_rate) v = medians[c];
      if (config.noise_sd > 0.0) v += config.noise_sd * sds[c] * z;
      if (u_outlier < config.outlier_rate) v *= 10.0;
    }
  }
  return data.with_features(std::move(out));
}

}  // namespace cot
