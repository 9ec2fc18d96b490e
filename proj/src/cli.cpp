#include "cot/cli.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cot/cot.hpp"
#include "cot/error.hpp"
#include "cot/fairea.hpp"
#include "cot/harness.hpp"
#include "cot/metrics.hpp"
#include "cot/tabular.hpp"

namespace cot {

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

// Writes to `path`, or to `out` when path is empty.
void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
  } else {
    write_text(path, text);
  }
}

// 0/1 columns of a predictions file: label, one or more prediction columns and
// the sensitive attributes.
struct Predictions {
  Dataset::Binary y_true;
  std::vector<Dataset::Binary> y_pred;
  std::vector<Dataset::Binary> sensitive;
};

Predictions load_predictions(const std::string& path, const std::string& label,
                             const std::vector<std::string>& pred_columns,
                             const std::vector<std::string>& attrs) {
  Schema schema;
  schema.label_column = label;
  schema.favorable_value = "1";
  for (const auto& a : attrs) schema.sensitive_attributes.push_back({a, "1", "0"});
  schema.feature_columns = pred_columns;
  const auto data = load_csv(path, schema);

  Predictions p;
  p.y_true.assign(data.labels().begin(), data.labels().end());
  for (std::size_t c = 0; c < pred_columns.size(); ++c) {
    Dataset::Binary col(data.rows());
    for (std::size_t r = 0; r < data.rows(); ++r) {
      const double v = data.feature(r, c);
      if (v != 0.0 && v != 1.0) {
        throw Error(ErrorKind::kParse, "column '" + pred_columns[c] + "' row " +
                                           std::to_string(r + 1) + " is not 0 or 1");
      }
      col[r] = static_cast<std::uint8_t>(v);
    }
    p.y_pred.push_back(std::move(col));
  }
  for (const auto& a : attrs) {
    const auto s = data.sensitive(a);
    p.sensitive.emplace_back(s.begin(), s.end());
  }
  return p;
}

std::vector<std::string> attrs_or_all(const std::vector<std::string>& attrs, const Schema& s) {
  return attrs.empty() ? s.sensitive_names() : attrs;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Correlation tuning for fair binary classification"};
  app.name("cot");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with exact group counts");
  std::string synth_spec, synth_out, synth_schema;
  std::vector<std::int64_t> counts;
  SynthSpec spec_flags;
  synth->add_option("--spec", synth_spec, "SynthSpec JSON file");
  auto* counts_opt = synth->add_option("--counts", counts, "n11,n10,n01,n00")->delimiter(',')->expected(4);
  synth->add_option("--feature-dim", spec_flags.feature_dim);
  synth->add_option("--group-signal", spec_flags.group_signal);
  synth->add_option("--noise-sd", spec_flags.noise_sd);
  synth->add_option("--seed", spec_flags.seed);
  synth->add_option("--out", synth_out, "CSV output")->required();
  synth->add_option("--schema-out", synth_schema, "schema JSON output (default: <out>.schema.json)");
  synth->get_option("--spec")->excludes(counts_opt);

  // phi
  auto* phi_cmd = app.add_subcommand("phi", "Report contingency, phi and analytic flip count");
  std::string phi_data, phi_schema, phi_out;
  std::vector<std::string> phi_attrs;
  phi_cmd->add_option("--data", phi_data)->required();
  phi_cmd->add_option("--schema", phi_schema)->required();
  phi_cmd->add_option("--attrs", phi_attrs)->delimiter(',');
  phi_cmd->add_option("--out", phi_out, "JSON output (default: stdout)");

  // tune
  auto* tune = app.add_subcommand("tune", "Tune a dataset and write it with a JSON sidecar");
  std::string tune_data, tune_schema, tune_out, tune_sidecar, tune_method = "phi", tune_config,
                                                                 tune_loss;
  std::vector<std::string> tune_attrs;
  std::uint64_t tune_seed = 0;
  tune->add_option("--data", tune_data)->required();
  tune->add_option("--schema", tune_schema)->required();
  tune->add_option("--method", tune_method)->check(CLI::IsMember({"phi", "opt"}));
  tune->add_option("--attrs", tune_attrs)->delimiter(',');
  tune->add_option("--seed", tune_seed);
  tune->add_option("--config", tune_config, "search settings JSON");
  tune->add_option("--loss", tune_loss)->check(CLI::IsMember({"single", "intersectional"}));
  tune->add_option("--out", tune_out, "tuned CSV output")->required();
  tune->add_option("--sidecar", tune_sidecar, "JSON summary (default: <out>.json)");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Metrics of a predictions file");
  std::string m_data, m_label = "y_true", m_pred = "y_pred", m_out;
  std::vector<std::string> m_attrs;
  metrics_cmd->add_option("--data", m_data)->required();
  metrics_cmd->add_option("--label", m_label);
  metrics_cmd->add_option("--pred", m_pred);
  metrics_cmd->add_option("--attrs", m_attrs)->delimiter(',')->required();
  metrics_cmd->add_option("--out", m_out, "JSON output (default: stdout)");

  // baseline
  auto* base_cmd = app.add_subcommand("baseline", "Trade-off baseline curves of a predictions file");
  std::string b_data, b_label = "y_true", b_pred = "y_pred", b_candidate, b_attr, b_json, b_csv;
  std::vector<double> b_rates = default_rates();
  int b_repeats = 10;
  std::uint64_t b_seed = 0;
  base_cmd->add_option("--data", b_data)->required();
  base_cmd->add_option("--label", b_label);
  base_cmd->add_option("--pred", b_pred);
  base_cmd->add_option("--candidate", b_candidate, "prediction column of a mitigated model to classify");
  base_cmd->add_option("--attr", b_attr)->required();
  base_cmd->add_option("--rates", b_rates)->delimiter(',');
  base_cmd->add_option("--repeats", b_repeats);
  base_cmd->add_option("--seed", b_seed);
  base_cmd->add_option("--out-json", b_json, "JSON output (default: stdout)");
  base_cmd->add_option("--out-csv", b_csv, "flat CSV of curve points");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Repeated runs and report");
  std::string e_config, e_data, e_schema, e_method, e_out, e_loss;
  std::vector<std::string> e_attrs;
  int e_runs = 0;
  std::uint64_t e_seed_base = 0;
  double e_train_fraction = 0.0;
  bool e_serial = false;
  exp->add_option("--config", e_config, "ExperimentConfig JSON; flags override its fields");
  auto* o_data = exp->add_option("--data", e_data);
  auto* o_schema = exp->add_option("--schema", e_schema);
  auto* o_method = exp->add_option("--method", e_method)->check(CLI::IsMember({"original", "phi", "opt"}));
  auto* o_attrs = exp->add_option("--attrs", e_attrs)->delimiter(',');
  auto* o_runs = exp->add_option("--runs", e_runs);
  auto* o_seed = exp->add_option("--seed-base", e_seed_base);
  auto* o_frac = exp->add_option("--train-fraction", e_train_fraction);
  auto* o_out = exp->add_option("--out", e_out, "output directory");
  auto* o_loss = exp->add_option("--loss", e_loss)->check(CLI::IsMember({"single", "intersectional"}));
  exp->add_flag("--serial", e_serial, "run repetitions one after another");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      SynthSpec spec = spec_flags;
      if (!synth_spec.empty()) {
        spec = synth_spec_from_json(read_json(synth_spec));
      } else if (counts.size() == 4) {
        spec.n11 = counts[0];
        spec.n10 = counts[1];
        spec.n01 = counts[2];
        spec.n00 = counts[3];
      } else {
        err << "synth: give --spec or --counts\n";
        return 1;
      }
      const auto data = synthesize(spec);
      write_csv(data, synth_out);
      save_schema(data.schema(), synth_schema.empty() ? synth_out + ".schema.json" : synth_schema);
    } else if (phi_cmd->parsed()) {
      const auto data = load_csv(phi_data, load_schema(phi_schema));
      emit(out, phi_out, phi_report(data, attrs_or_all(phi_attrs, data.schema())).dump(2) + "\n");
    } else if (tune->parsed()) {
      const auto data = load_csv(tune_data, load_schema(tune_schema));
      const auto attrs = attrs_or_all(tune_attrs, data.schema());
      OptConfig opt;
      if (!tune_config.empty()) opt = opt_config_from_json(read_json(tune_config));
      if (tune_loss == "intersectional") opt.loss_kind = LossKind::kIntersectional;
      if (tune_loss == "single") opt.loss_kind = LossKind::kSingle;
      const auto method = tune_method == "opt" ? TuneMethod::kOpt : TuneMethod::kPhi;
      TuneResult result = [&] {
        if (attrs.size() > 1) return cot_multi(data, attrs, method, opt, tune_seed);
        return method == TuneMethod::kPhi ? cot_phi(data, attrs.front(), tune_seed)
                                          : cot_opt(data, attrs.front(), opt, tune_seed);
      }();
      write_csv(result.dataset, tune_out);
      write_text(tune_sidecar.empty() ? tune_out + ".json" : tune_sidecar,
                 tune_result_summary(result, method).dump(2) + "\n");
    } else if (metrics_cmd->parsed()) {
      const auto p = load_predictions(m_data, m_label, {m_pred}, m_attrs);
      std::vector<std::span<const std::uint8_t>> groups(p.sensitive.begin(), p.sensitive.end());
      const auto m = evaluate(p.y_true, p.y_pred.front(), groups);
      emit(out, m_out, metrics_to_json(m).dump(2) + "\n");
    } else if (base_cmd->parsed()) {
      std::vector<std::string> cols{b_pred};
      if (!b_candidate.empty()) cols.push_back(b_candidate);
      const auto p = load_predictions(b_data, b_label, cols, {b_attr});
      const auto curves =
          build_baselines(p.y_true, p.y_pred[0], p.sensitive[0], b_rates, b_repeats, b_seed);
      std::optional<MetricsBundle> candidate;
      if (!b_candidate.empty()) {
        candidate = evaluate(p.y_true, p.y_pred[1], {std::span<const std::uint8_t>(p.sensitive[0])});
      }
      nlohmann::ordered_json doc;
      doc["curves"] = nlohmann::ordered_json::array();
      std::ostringstream csv;
      csv << "fairness_metric,performance_metric,mutation_rate,fairness,performance\n";
      for (const auto& c : curves) {
        nlohmann::ordered_json j = baseline_to_json(c);
        if (candidate) {
          const TradeoffPoint pt{fairness_value(*candidate, c.fairness_metric),
                                 performance_value(*candidate, c.performance_metric)};
          j["candidate"] = {{"fairness", pt.fairness},
                            {"performance", pt.performance},
                            {"region", to_string(classify(pt, c))}};
        }
        doc["curves"].push_back(std::move(j));
        for (const auto& pt : c.points) {
          csv << to_string(c.fairness_metric) << ',' << to_string(c.performance_metric) << ','
              << nlohmann::json(pt.mutation_rate).dump() << ',' << nlohmann::json(pt.fairness).dump()
              << ',' << nlohmann::json(pt.performance).dump() << '\n';
        }
      }
      emit(out, b_json, doc.dump(2) + "\n");
      if (!b_csv.empty()) write_text(b_csv, csv.str());
    } else if (exp->parsed()) {
      ExperimentConfig cfg;
      if (!e_config.empty()) cfg = experiment_config_from_json(read_json(e_config));
      if (o_data->count()) cfg.data_path = e_data;
      if (o_schema->count()) cfg.schema_path = e_schema;
      if (o_method->count()) cfg.method = method_from_string(e_method);
      if (o_attrs->count()) cfg.attrs = e_attrs;
      if (o_runs->count()) cfg.runs = e_runs;
      if (o_seed->count()) cfg.seed_base = e_seed_base;
      if (o_frac->count()) cfg.train_fraction = e_train_fraction;
      if (o_out->count()) cfg.output_path = e_out;
      if (o_loss->count()) {
        cfg.opt.loss_kind = e_loss == "single" ? LossKind::kSingle : LossKind::kIntersectional;
      }
      if (cfg.data_path.empty() || cfg.schema_path.empty() || cfg.output_path.empty()) {
        err << "experiment: --data, --schema and --out are required (flags or --config)\n"
            << exp->help();
        return 1;
      }
      if (cfg.attrs.empty()) cfg.attrs = load_schema(cfg.schema_path).sensitive_names();
      const auto report =
          run_experiment(cfg, e_serial ? Execution::kSerial : Execution::kParallel);
      emit_report(report, cfg.output_path);
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace cot
