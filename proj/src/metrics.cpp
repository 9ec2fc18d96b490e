#include "cot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cot/error.hpp"

namespace cot {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

void check_lengths(std::size_t a, std::size_t b, std::string_view what) {
  if (a != b) {
    throw Error(ErrorKind::kShape, std::string(what) + ": vectors differ in length (" +
                                       std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
  if (a == 0) throw Error(ErrorKind::kShape, std::string(what) + ": empty input");
}

struct GroupRates {
  std::int64_t size = 0;
  std::int64_t predicted_positive = 0;
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
  std::int64_t true_positive = 0;
  std::int64_t false_positive = 0;

  void add(std::uint8_t y, std::uint8_t yhat) {
    ++size;
    predicted_positive += yhat;
    if (y) {
      ++positives;
      true_positive += yhat;
    } else {
      ++negatives;
      false_positive += yhat;
    }
  }
  double selection_rate() const { return ratio(predicted_positive, size); }
  double tpr() const { return ratio(true_positive, positives); }
  double fpr() const { return ratio(false_positive, negatives); }
};

void require_support(const GroupRates& g, const std::string& name) {
  if (g.size == 0) throw Error(ErrorKind::kGroupSupport, name + " is empty");
  if (g.positives == 0) {
    throw Error(ErrorKind::kGroupSupport, name + " has no favorable-label rows (TPR undefined)");
  }
  if (g.negatives == 0) {
    throw Error(ErrorKind::kGroupSupport, name + " has no unfavorable-label rows (FPR undefined)");
  }
}

std::map<std::uint32_t, GroupRates> tally_subgroups(std::span<const std::uint8_t> y_true,
                                                    std::span<const std::uint8_t> y_pred,
                                                    std::span<const std::uint32_t> ids) {
  std::map<std::uint32_t, GroupRates> groups;
  for (std::size_t i = 0; i < ids.size(); ++i) groups[ids[i]].add(y_true[i], y_pred[i]);
  return groups;
}

}  // namespace

ConfusionCounts ConfusionCounts::tally(std::span<const std::uint8_t> y_true,
                                       std::span<const std::uint8_t> y_pred) {
  check_lengths(y_true.size(), y_pred.size(), "confusion counts");
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i]) {
      (y_pred[i] ? c.tp : c.fn) += 1;
    } else {
      (y_pred[i] ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

PerformanceMetrics performance(const ConfusionCounts& c) {
  const auto tp = static_cast<double>(c.tp);
  const auto fp = static_cast<double>(c.fp);
  const auto tn = static_cast<double>(c.tn);
  const auto fn = static_cast<double>(c.fn);
  PerformanceMetrics m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.accuracy = ratio(tp + tn, tp + fp + tn + fn);
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  const double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  m.mcc = std::clamp(ratio(tp * tn - fp * fn, den), -1.0, 1.0);
  return m;
}

PerformanceMetrics performance(std::span<const std::uint8_t> y_true,
                               std::span<const std::uint8_t> y_pred) {
  return performance(ConfusionCounts::tally(y_true, y_pred));
}

void check_group_support(std::span<const std::uint8_t> y_true,
                         std::span<const std::uint8_t> sensitive) {
  check_lengths(y_true.size(), sensitive.size(), "group fairness");
  GroupRates groups[2];
  for (std::size_t i = 0; i < y_true.size(); ++i) groups[sensitive[i] ? 1 : 0].add(y_true[i], 0);
  require_support(groups[0], "unprivileged group (a=0)");
  require_support(groups[1], "privileged group (a=1)");
}

GroupFairness group_fairness(std::span<const std::uint8_t> y_true,
                             std::span<const std::uint8_t> y_pred,
                             std::span<const std::uint8_t> sensitive) {
  check_lengths(y_true.size(), y_pred.size(), "group fairness");
  check_group_support(y_true, sensitive);
  GroupRates groups[2];
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    groups[sensitive[i] ? 1 : 0].add(y_true[i], y_pred[i]);
  }
  const auto& u = groups[0];
  const auto& p = groups[1];
  GroupFairness f;
  f.spd = std::fabs(u.selection_rate() - p.selection_rate());
  f.eod = std::fabs(u.tpr() - p.tpr());
  // Signed differences are summed before the magnitude is taken, grouped as
  // (FPR0 + TPR0) - (FPR1 + TPR1) so the two-subgroup IAOD matches bit for bit.
  f.aod = 0.5 * std::fabs((u.fpr() + u.tpr()) - (p.fpr() + p.tpr()));
  f.tpr_unprivileged = u.tpr();
  f.tpr_privileged = p.tpr();
  return f;
}

void check_subgroup_support(std::span<const std::uint8_t> y_true,
                            std::span<const std::uint32_t> subgroup_ids) {
  check_lengths(y_true.size(), subgroup_ids.size(), "intersectional fairness");
  std::vector<std::uint8_t> zeros(y_true.size(), 0);
  const auto groups = tally_subgroups(y_true, zeros, subgroup_ids);
  if (groups.size() < 2) {
    throw Error(ErrorKind::kGroupSupport, "intersectional fairness needs at least two subgroups");
  }
  for (const auto& [id, g] : groups) require_support(g, "subgroup " + std::to_string(id));
}

IntersectionalFairness intersectional_fairness(std::span<const std::uint8_t> y_true,
                                               std::span<const std::uint8_t> y_pred,
                                               std::span<const std::uint32_t> subgroup_ids) {
  check_lengths(y_true.size(), y_pred.size(), "intersectional fairness");
  check_subgroup_support(y_true, subgroup_ids);
  const auto groups = tally_subgroups(y_true, y_pred, subgroup_ids);
  double sel_min = 2.0, sel_max = -1.0;
  double odds_min = 3.0, odds_max = -1.0;
  double tpr_min = 2.0, tpr_max = -1.0;
  for (const auto& [id, g] : groups) {
    const double sel = g.selection_rate();
    const double odds = g.fpr() + g.tpr();
    const double tpr = g.tpr();
    sel_min = std::min(sel_min, sel);
    sel_max = std::max(sel_max, sel);
    odds_min = std::min(odds_min, odds);
    odds_max = std::max(odds_max, odds);
    tpr_min = std::min(tpr_min, tpr);
    tpr_max = std::max(tpr_max, tpr);
  }
  return {sel_max - sel_min, 0.5 * (odds_max - odds_min), tpr_max - tpr_min};
}

std::vector<std::uint32_t> subgroups(const Dataset& data, std::span<const std::string> attributes) {
  if (attributes.empty()) throw Error(ErrorKind::kSchema, "subgroups need at least one attribute");
  if (attributes.size() > 31) throw Error(ErrorKind::kConfig, "too many attributes for subgroup ids");
  std::vector<std::uint32_t> ids(data.rows(), 0);
  for (const auto& name : attributes) {
    const auto col = data.sensitive(name);
    for (std::size_t r = 0; r < ids.size(); ++r) ids[r] = (ids[r] << 1) | col[r];
  }
  return ids;
}

MetricsBundle evaluate(std::span<const std::uint8_t> y_true, std::span<const std::uint8_t> y_pred,
                       const std::vector<std::span<const std::uint8_t>>& sensitive) {
  if (sensitive.empty()) throw Error(ErrorKind::kSchema, "evaluation needs at least one attribute");
  const auto perf = performance(y_true, y_pred);
  const auto fair = group_fairness(y_true, y_pred, sensitive.front());
  MetricsBundle m;
  m.precision = perf.precision;
  m.recall = perf.recall;
  m.accuracy = perf.accuracy;
  m.f1 = perf.f1;
  m.mcc = perf.mcc;
  m.spd = fair.spd;
  m.aod = fair.aod;
  m.eod = fair.eod;
  m.tpr_unprivileged = fair.tpr_unprivileged;
  m.tpr_privileged = fair.tpr_privileged;
  if (sensitive.size() >= 2) {
    std::vector<std::uint32_t> ids(y_true.size(), 0);
    for (const auto& col : sensitive) {
      check_lengths(y_true.size(), col.size(), "evaluation");
      for (std::size_t r = 0; r < ids.size(); ++r) ids[r] = (ids[r] << 1) | col[r];
    }
    const auto inter = intersectional_fairness(y_true, y_pred, ids);
    m.ispd = inter.ispd;
    m.iaod = inter.iaod;
    m.ieod = inter.ieod;
  }
  return m;
}

MetricsBundle evaluate(std::span<const std::uint8_t> y_pred, const Dataset& data,
                       std::span<const std::string> attributes) {
  std::vector<std::span<const std::uint8_t>> cols;
  for (const auto& a : attributes) cols.push_back(data.sensitive(a));
  return evaluate(data.labels(), y_pred, cols);
}

std::vector<std::string> metric_names(bool has_intersectional) {
  std::vector<std::string> names{"precision", "recall",          "accuracy",
                                 "f1",        "mcc",             "spd",
                                 "aod",       "eod",             "tpr_unprivileged",
                                 "tpr_privileged"};
  if (has_intersectional) names.insert(names.end(), {"ispd", "iaod", "ieod"});
  return names;
}

double metric_value(const MetricsBundle& m, const std::string& name) {
  if (name == "precision") return m.precision;
  if (name == "recall") return m.recall;
  if (name == "accuracy") return m.accuracy;
  if (name == "f1") return m.f1;
  if (name == "mcc") return m.mcc;
  if (name == "spd") return m.spd;
  if (name == "aod") return m.aod;
  if (name == "eod") return m.eod;
  if (name == "tpr_unprivileged") return m.tpr_unprivileged;
  if (name == "tpr_privileged") return m.tpr_privileged;
  auto opt = [&](const std::optional<double>& v) {
    if (!v) throw Error(ErrorKind::kConfig, "metric '" + name + "' was not computed");
    return *v;
  };
  if (name == "ispd") return opt(m.ispd);
  if (name == "iaod") return opt(m.iaod);
  if (name == "ieod") return opt(m.ieod);
  throw Error(ErrorKind::kConfig, "unknown metric '" + name + "'");
}

nlohmann::json metrics_to_json(const MetricsBundle& m) {
  nlohmann::json j;
  for (const auto& name : metric_names(m.ispd.has_value())) j[name] = metric_value(m, name);
  return j;
}

MetricsBundle metrics_from_json(const nlohmann::json& doc) {
  MetricsBundle m;
  try {
    m.precision = doc.at("precision").get<double>();
    m.recall = doc.at("recall").get<double>();
    m.accuracy = doc.at("accuracy").get<double>();
    m.f1 = doc.at("f1").get<double>();
    m.mcc = doc.at("mcc").get<double>();
    m.spd = doc.at("spd").get<double>();
    m.aod = doc.at("aod").get<double>();
    m.eod = doc.at("eod").get<double>();
    m.tpr_unprivileged = doc.at("tpr_unprivileged").get<double>();
    m.tpr_privileged = doc.at("tpr_privileged").get<double>();
    if (doc.contains("ispd")) {
      m.ispd = doc.at("ispd").get<double>();
      m.iaod = doc.at("iaod").get<double>();
      m.ieod = doc.at("ieod").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed metrics document: ") + e.what());
  }
  return m;
}

}  // namespace cot
