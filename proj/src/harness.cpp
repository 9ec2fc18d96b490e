#include "cot/harness.hpp"

#include <charconv>
#include <exception>
#include <fstream>
#include <sstream>

#include "cot/correlation.hpp"
#include "cot/error.hpp"
#include "cot/random.hpp"

namespace cot {

std::string to_string(Method m) {
  switch (m) {
    case Method::kOriginal: return "original";
    case Method::kCotPhi: return "phi";
    case Method::kCotOpt: return "opt";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  if (name == "original") return Method::kOriginal;
  if (name == "phi") return Method::kCotPhi;
  if (name == "opt") return Method::kCotOpt;
  throw Error(ErrorKind::kConfig, "unknown method '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (attrs.empty()) throw Error(ErrorKind::kConfig, "experiment needs at least one attribute");
  if (runs < 1) throw Error(ErrorKind::kConfig, "runs must be at least 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::kConfig, "train_fraction must lie in (0, 1)");
  }
  classifier.validate();
  opt.validate();
  if (baseline_repeats < 1) throw Error(ErrorKind::kConfig, "baseline repeats must be at least 1");
  double prev = 0.0;
  for (double r : baseline_rates) {
    if (!(r > prev && r <= 1.0)) {
      throw Error(ErrorKind::kConfig, "mutation rates must increase strictly within (0, 1]");
    }
    prev = r;
  }
  if (baseline_rates.empty()) throw Error(ErrorKind::kConfig, "baseline needs mutation rates");
}

nlohmann::ordered_json experiment_config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["data_path"] = c.data_path.generic_string();
  j["schema_path"] = c.schema_path.generic_string();
  j["method"] = to_string(c.method);
  j["attrs"] = c.attrs;
  j["runs"] = c.runs;
  j["seed_base"] = c.seed_base;
  j["train_fraction"] = c.train_fraction;
  j["classifier"] = classifier_config_to_json(c.classifier);
  j["opt"] = opt_config_to_json(c.opt);
  j["baseline"] = {{"rates", c.baseline_rates}, {"repeats", c.baseline_repeats}};
  j["output_path"] = c.output_path.generic_string();
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, ExperimentConfig c) {
  try {
    if (!doc.is_object()) throw Error(ErrorKind::kConfig, "experiment config must be an object");
    if (doc.contains("data_path")) c.data_path = doc["data_path"].get<std::string>();
    if (doc.contains("schema_path")) c.schema_path = doc["schema_path"].get<std::string>();
    if (doc.contains("method")) c.method = method_from_string(doc["method"].get<std::string>());
    if (doc.contains("attrs")) c.attrs = doc["attrs"].get<std::vector<std::string>>();
    c.runs = doc.value("runs", c.runs);
    c.seed_base = doc.value("seed_base", c.seed_base);
    c.train_fraction = doc.value("train_fraction", c.train_fraction);
    if (doc.contains("classifier")) {
      c.classifier = classifier_config_from_json(doc["classifier"], c.classifier);
    }
    if (doc.contains("opt")) c.opt = opt_config_from_json(doc["opt"], c.opt);
    if (doc.contains("baseline")) {
      const auto& b = doc["baseline"];
      if (b.contains("rates")) c.baseline_rates = b["rates"].get<std::vector<double>>();
      c.baseline_repeats = b.value("repeats", c.baseline_repeats);
    }
    if (doc.contains("output_path")) c.output_path = doc["output_path"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed experiment config: ") + e.what());
  }
  return c;
}

std::vector<std::string> fairness_metric_names(std::size_t attribute_count) {
  std::vector<std::string> names{"spd", "aod", "eod"};
  if (attribute_count >= 2) names.insert(names.end(), {"ispd", "iaod", "ieod"});
  return names;
}

namespace {

template <typename F>
auto in_stage(int run_index, const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_context("run " + std::to_string(run_index) + ", " + stage);
  }
}

std::optional<double> phi_of(const Dataset& data, const std::string& attr) {
  const auto t = contingency(data, attr);
  if (!phi_defined(t)) return std::nullopt;
  return phi(t);
}

}  // namespace

RunArtifacts execute_run(const Dataset& data, const ExperimentConfig& config, int run_index) {
  const std::uint64_t seed = config.seed_base + static_cast<std::uint64_t>(run_index);
  const auto& attrs = config.attrs;

  auto parts = in_stage(run_index, "split",
                        [&] { return split(data, config.train_fraction, seed); });
  const Dataset& train = parts.first;
  const Dataset& test = parts.second;

  const auto original_model =
      in_stage(run_index, "fit original", [&] { return fit(train, config.classifier, seed); });
  const auto pred_original = predict(original_model, test);

  OptConfig opt = config.opt;
  opt.classifier = config.classifier;
  const auto tuned = in_stage(run_index, "tune", [&]() -> TuneResult {
    switch (config.method) {
      case Method::kOriginal: {
        const auto p = phi_of(train, attrs.front());
        return {train, {}, 0.0, p, p, {}};
      }
      case Method::kCotPhi:
        return attrs.size() == 1 ? cot_phi(train, attrs.front(), seed)
                                 : cot_multi(train, attrs, TuneMethod::kPhi, opt, seed);
      case Method::kCotOpt:
        return attrs.size() == 1 ? cot_opt(train, attrs.front(), opt, seed)
                                 : cot_multi(train, attrs, TuneMethod::kOpt, opt, seed);
    }
    throw Error(ErrorKind::kConfig, "unknown method");
  });

  Dataset::Binary pred_method = pred_original;
  if (config.method != Method::kOriginal) {
    const auto model = in_stage(run_index, "fit tuned",
                                [&] { return fit(tuned.dataset, config.classifier, seed); });
    pred_method = predict(model, test);
  }

  RunArtifacts out;
  auto& rec = out.record;
  rec.run_index = run_index;
  rec.seed = seed;
  in_stage(run_index, "evaluate", [&] {
    rec.original = evaluate(pred_original, test, attrs);
    rec.method = evaluate(pred_method, test, attrs);
    return 0;
  });
  rec.flips = tuned.flipped_indices.size();
  rec.proportion = tuned.proportion_applied;
  rec.phi_before = tuned.phi_before;
  rec.phi_after = tuned.phi_after;

  const auto curves = in_stage(run_index, "baseline", [&] {
    return build_baselines(test.labels(), pred_original, test.sensitive(attrs.front()),
                           config.baseline_rates, config.baseline_repeats,
                           derive_seed(seed, 0xFA1EA));
  });
  for (const auto& curve : curves) {
    const TradeoffPoint candidate{fairness_value(rec.method, curve.fairness_metric),
                                  performance_value(rec.method, curve.performance_metric)};
    rec.tradeoffs.push_back({curve.fairness_metric, curve.performance_metric, candidate.fairness,
                             candidate.performance, classify(candidate, curve)});
  }

  const auto ids = [](const Dataset& d) {
    return std::vector<std::size_t>(d.row_ids().begin(), d.row_ids().end());
  };
  out.train_row_ids = ids(train);
  out.test_row_ids = ids(test);
  out.tuned_row_ids = ids(tuned.dataset);
  for (auto i : tuned.flipped_indices) out.flipped_row_ids.push_back(tuned.dataset.row_ids()[i]);
  return out;
}

ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& config,
                                Execution execution) {
  config.validate();
  for (const auto& a : config.attrs) {
    if (!data.schema().has_sensitive(a)) {
      throw Error(ErrorKind::kSchema, "unknown sensitive attribute '" + a + "'");
    }
  }
  const auto runs = static_cast<std::size_t>(config.runs);
  std::vector<RunRecord> records(runs);
  std::vector<std::exception_ptr> failures(runs);
  auto one = [&](std::size_t i) {
    try {
      records[i] = execute_run(data, config, static_cast<int>(i)).record;
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };
  if (execution == Execution::kSerial) {
    for (std::size_t i = 0; i < runs; ++i) one(i);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(runs); ++i) {
      one(static_cast<std::size_t>(i));
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  ExperimentReport report;
  report.config = config;
  report.per_run = std::move(records);

  const bool inter = config.attrs.size() >= 2;
  const double n = static_cast<double>(runs);
  for (const auto& name : metric_names(inter)) {
    AggregateEntry e;
    e.metric = name;
    for (const auto& r : report.per_run) {
      e.mean_original += metric_value(r.original, name);
      e.mean_method += metric_value(r.method, name);
    }
    e.mean_original /= n;
    e.mean_method /= n;
    e.absolute_change = e.mean_method - e.mean_original;
    if (e.mean_original == 0.0) {
      e.relative_change = e.absolute_change;
      e.relative_is_absolute = true;
    } else {
      e.relative_change = e.absolute_change / e.mean_original;
    }
    report.aggregate.push_back(std::move(e));
  }
  for (const auto& name : fairness_metric_names(config.attrs.size())) {
    StatisticsEntry s;
    s.metric = name;
    if (runs < 2) {
      s.insufficient_sample = true;
    } else {
      std::vector<double> x, y;
      for (const auto& r : report.per_run) {
        x.push_back(metric_value(r.original, name));
        y.push_back(metric_value(r.method, name));
      }
      s.result = compare(x, y);
    }
    report.statistics.push_back(std::move(s));
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config, Execution execution) {
  config.validate();
  const auto schema = load_schema(config.schema_path);
  const auto data = load_csv(config.data_path, schema);
  return run_experiment(data, config, execution);
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from(const nlohmann::json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json doc;
  doc["config_echo"] = experiment_config_to_json(report.config);

  auto runs = nlohmann::ordered_json::array();
  for (const auto& r : report.per_run) {
    nlohmann::ordered_json j;
    j["run_index"] = r.run_index;
    j["seed"] = r.seed;
    j["flips"] = r.flips;
    j["proportion"] = r.proportion;
    j["phi_before"] = optional_json(r.phi_before);
    j["phi_after"] = optional_json(r.phi_after);
    j["original"] = metrics_to_json(r.original);
    j["method"] = metrics_to_json(r.method);
    auto trade = nlohmann::ordered_json::array();
    for (const auto& t : r.tradeoffs) {
      nlohmann::ordered_json tj;
      tj["fairness_metric"] = to_string(t.fairness_metric);
      tj["performance_metric"] = to_string(t.performance_metric);
      tj["fairness"] = t.fairness;
      tj["performance"] = t.performance;
      tj["region"] = to_string(t.region);
      trade.push_back(std::move(tj));
    }
    j["tradeoff"] = std::move(trade);
    runs.push_back(std::move(j));
  }
  doc["per_run"] = std::move(runs);

  auto agg = nlohmann::ordered_json::array();
  for (const auto& e : report.aggregate) {
    nlohmann::ordered_json j;
    j["metric"] = e.metric;
    j["mean_original"] = e.mean_original;
    j["mean_method"] = e.mean_method;
    j["absolute_change"] = e.absolute_change;
    j["relative_change"] = e.relative_change;
    j["relative_is_absolute"] = e.relative_is_absolute;
    agg.push_back(std::move(j));
  }
  doc["aggregate"] = std::move(agg);

  auto stats = nlohmann::ordered_json::array();
  for (const auto& s : report.statistics) {
    nlohmann::ordered_json j;
    j["metric"] = s.metric;
    j["insufficient_sample"] = s.insufficient_sample;
    j["result"] = s.result ? nlohmann::ordered_json(test_result_to_json(*s.result))
                           : nlohmann::ordered_json(nullptr);
    stats.push_back(std::move(j));
  }
  doc["statistics"] = std::move(stats);
  doc["versions"] = {{"library", kLibraryVersion}, {"report_format", kReportFormat}};
  return doc;
}

ExperimentReport report_from_json(const nlohmann::json& doc) {
  ExperimentReport report;
  try {
    report.config = experiment_config_from_json(doc.at("config_echo"));
    for (const auto& j : doc.at("per_run")) {
      RunRecord r;
      r.run_index = j.at("run_index").get<int>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.flips = j.at("flips").get<std::size_t>();
      r.proportion = j.at("proportion").get<double>();
      r.phi_before = optional_from(j.at("phi_before"));
      r.phi_after = optional_from(j.at("phi_after"));
      r.original = metrics_from_json(j.at("original"));
      r.method = metrics_from_json(j.at("method"));
      for (const auto& t : j.at("tradeoff")) {
        r.tradeoffs.push_back(
            {fairness_metric_from_string(t.at("fairness_metric").get<std::string>()),
             performance_metric_from_string(t.at("performance_metric").get<std::string>()),
             t.at("fairness").get<double>(), t.at("performance").get<double>(),
             tradeoff_region_from_string(t.at("region").get<std::string>())});
      }
      report.per_run.push_back(std::move(r));
    }
    for (const auto& j : doc.at("aggregate")) {
      report.aggregate.push_back({j.at("metric").get<std::string>(),
                                  j.at("mean_original").get<double>(),
                                  j.at("mean_method").get<double>(),
                                  j.at("absolute_change").get<double>(),
                                  j.at("relative_change").get<double>(),
                                  j.at("relative_is_absolute").get<bool>()});
    }
    for (const auto& j : doc.at("statistics")) {
      StatisticsEntry s;
      s.metric = j.at("metric").get<std::string>();
      s.insufficient_sample = j.at("insufficient_sample").get<bool>();
      if (!j.at("result").is_null()) s.result = test_result_from_json(j.at("result"));
      report.statistics.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed report: ") + e.what());
  }
  return report;
}

std::string format_report(const ExperimentReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

std::string format_tradeoff_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "run_index,fairness_metric,performance_metric,fairness,performance,region\n";
  for (const auto& r : report.per_run) {
    for (const auto& t : r.tradeoffs) {
      os << r.run_index << ',' << to_string(t.fairness_metric) << ','
         << to_string(t.performance_metric) << ',' << format_number(t.fairness) << ','
         << format_number(t.performance) << ',' << to_string(t.region) << '\n';
    }
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

}  // namespace

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "report.json", format_report(report));
  write_file(dir / "tradeoff.csv", format_tradeoff_csv(report));
}

nlohmann::ordered_json phi_report(const Dataset& data, const std::vector<std::string>& attrs) {
  auto list = nlohmann::ordered_json::array();
  for (const auto& a : attrs) {
    const auto t = contingency(data, a);
    nlohmann::ordered_json j;
    j["attribute"] = a;
    j["contingency"] = {{"n11", t.n11}, {"n10", t.n10}, {"n01", t.n01}, {"n00", t.n00}};
    if (phi_defined(t)) {
      j["phi"] = phi(t);
      j["k"] = adjustment_count(t);
      j["proportion"] = t.n11 > 0 ? nlohmann::ordered_json(adjustment_proportion(t))
                                  : nlohmann::ordered_json(nullptr);
    } else {
      j["phi"] = nullptr;
      j["k"] = nullptr;
      j["proportion"] = nullptr;
    }
    list.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["rows"] = data.rows();
  doc["attributes"] = std::move(list);
  return doc;
}

}  // namespace cot
