// eqlab: command-line front end. Every subcommand computes all of its
// outputs in memory and only then writes them into --out.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eqlab/allocation.hpp"
#include "eqlab/calibration.hpp"
#include "eqlab/error.hpp"
#include "eqlab/io.hpp"
#include "eqlab/policy.hpp"
#include "eqlab/population.hpp"
#include "eqlab/riskmodel.hpp"
#include "figures.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eqlab;

namespace {

constexpr const char* kVersion = "0.1.0";

bool svg_enabled() {
  const char* v = std::getenv("EQLAB_NO_SVG");
  return v == nullptr || std::string(v) != "1";
}

// Files for one output directory, committed together.
class Outputs {
 public:
  void add(std::string name, std::string contents) {
    files_.emplace_back(std::move(name), std::move(contents));
  }
  void add_svg(std::string name, const std::function<std::string()>& render) {
    if (svg_enabled()) add(std::move(name), render());
  }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : files_) out.push_back(name);
    return out;
  }

  // Stages every file as a temp sibling, then renames them into place.
  void commit(const fs::path& dir, const json& manifest) {
    add("manifest.json", manifest.dump(2) + "\n");
    fs::create_directories(dir);
    std::vector<fs::path> staged;
    try {
      for (const auto& [name, contents] : files_) {
        const fs::path tmp = dir / ("." + name + ".staging");
        io::write_file_atomic(tmp, contents);
        staged.push_back(tmp);
      }
    } catch (...) {
      for (const auto& p : staged) fs::remove(p);
      throw;
    }
    const auto stale = previous_outputs(dir);
    for (std::size_t i = 0; i < files_.size(); ++i) {
      fs::rename(staged[i], dir / files_[i].first);
    }
    // Drop artifacts an earlier run listed that this run did not produce,
    // so the directory matches its manifest.
    const auto current = names();
    for (const auto& name : stale) {
      if (std::find(current.begin(), current.end(), name) == current.end()) {
        fs::remove(dir / name);
      }
    }
  }

 private:
  static std::vector<std::string> previous_outputs(const fs::path& dir) {
    std::vector<std::string> names;
    const fs::path manifest = dir / "manifest.json";
    if (!fs::exists(manifest)) return names;
    try {
      const auto j = json::parse(io::read_file(manifest));
      for (const auto& n : j.at("outputs")) {
        const auto name = n.get<std::string>();
        if (fs::path(name).filename() == name) names.push_back(name);
      }
    } catch (const std::exception&) {
      // Unreadable manifest: leave the directory alone.
    }
    return names;
  }

  std::vector<std::pair<std::string, std::string>> files_;
};

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string data;
};

struct RunContext {
  std::string command;
  Common common;
  json parameters = json::object();
  std::vector<std::string> inputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::optional<PopulationConfig> effective_config;
  std::optional<std::uint64_t> seed_used;
};

json manifest_for(const RunContext& ctx, const Outputs& outputs) {
  json m;
  m["command"] = ctx.command;
  m["version"] = kVersion;
  m["config"] = ctx.common.config_path.empty() ? json(nullptr) : json(ctx.common.config_path);
  m["effective_config"] =
      ctx.effective_config ? config_to_json(*ctx.effective_config) : json(nullptr);
  m["seed"] = ctx.seed_used ? json(*ctx.seed_used) : json(nullptr);
  m["inputs"] = ctx.inputs;
  auto names = outputs.names();
  names.push_back("manifest.json");
  m["outputs"] = names;
  m["parameters"] = ctx.parameters;
  const auto elapsed = std::chrono::steady_clock::now() - ctx.start;
  m["duration_seconds"] = std::chrono::duration<double>(elapsed).count();
  return m;
}

void finish(RunContext& ctx, Outputs& outputs) {
  if (ctx.common.out.empty()) throw ValidationError("--out DIR is required");
  const json manifest = manifest_for(ctx, outputs);
  outputs.commit(ctx.common.out, manifest);
  std::cerr << ctx.command << ": wrote " << outputs.names().size() << " files to "
            << ctx.common.out << "\n";
}

std::optional<PopulationConfig> load_optional_config(RunContext& ctx) {
  if (ctx.common.config_path.empty()) return std::nullopt;
  ctx.inputs.push_back(ctx.common.config_path);
  auto cfg = load_config(ctx.common.config_path);
  if (ctx.common.seed) cfg.seed = *ctx.common.seed;
  ctx.effective_config = cfg;
  return cfg;
}

Dataset load_data(RunContext& ctx, const std::optional<PopulationConfig>& cfg) {
  if (ctx.common.data.empty()) throw ValidationError("--data PATH (a persons.csv) is required");
  ctx.inputs.push_back(ctx.common.data);
  return load_dataset(ctx.common.data, cfg ? cfg->group_set() : GroupSet::defaults());
}

// "name=path" or a bare path; a bare path/model.json is named after its
// directory, anything else after its file stem.
std::pair<std::string, std::string> model_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq != std::string::npos) return {spec.substr(0, eq), spec.substr(eq + 1)};
  const fs::path p(spec);
  if (p.filename() == "model.json" && p.has_parent_path()) {
    return {p.parent_path().filename().string(), spec};
  }
  return {p.stem().string(), spec};
}

FittedModel load_model_input(RunContext& ctx, const std::string& path) {
  if (!fs::exists(path)) throw SchemaError(path + ": model file not found");
  ctx.inputs.push_back(path);
  return load_model(path);
}

std::vector<double> risks_for(const PopulationConfig& cfg, const Dataset& data) {
  std::vector<double> risks;
  risks.reserve(data.size());
  for (const auto& p : data.persons()) {
    risks.push_back(true_risk(cfg, data.groups().label(p.group), p.age, p.bmi));
  }
  return risks;
}

std::string calibration_rows(const std::string& model,
                             const std::vector<CalibrationCurve>& curves) {
  std::ostringstream out;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << model << ',' << c.group << ',' << p.bin << ',' << io::format_double(p.mean_predicted)
          << ',' << io::format_double(p.observed_rate) << ',' << p.count << '\n';
    }
  }
  return out.str();
}

Binning parse_binning(const std::string& mode, std::size_t bins) {
  Binning b;
  b.bin_count = bins;
  b.mode = mode == "equal-width" ? BinningMode::EqualWidth : BinningMode::Quantile;
  return b;
}

std::map<std::string, double> parse_detection(const std::string& text) {
  std::map<std::string, double> out;
  if (text.empty()) return out;
  for (const auto item : io::split_csv_line(text)) {
    const auto eq = item.find('=');
    double value = 0.0;
    if (eq == std::string_view::npos || !io::parse_double(item.substr(eq + 1), value)) {
      throw ValidationError("--detect: expected Group=probability, got '" + std::string(item) +
                            "'");
    }
    std::string_view name = item.substr(0, eq);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    out[std::string(name)] = value;
  }
  return out;
}

// ---------------------------------------------------------------- commands

struct GenFlags {
  std::string preset = "screening";
};

void cmd_gen(RunContext& ctx, const GenFlags& opt) {
  PopulationConfig cfg;
  if (!ctx.common.config_path.empty()) {
    cfg = *load_optional_config(ctx);
  } else {
    cfg = opt.preset == "court" ? PopulationConfig::court_defaults() : PopulationConfig::defaults();
    if (ctx.common.seed) cfg.seed = *ctx.common.seed;
    ctx.effective_config = cfg;
    ctx.parameters["preset"] = opt.preset;
  }
  ctx.seed_used = cfg.seed;
  const auto data = generate_population(cfg);
  Outputs out;
  out.add("persons.csv", dataset_to_csv(data));
  std::cout << "generated " << data.size() << " persons\n";
  finish(ctx, out);
}

struct FitFlags {
  std::string features = "age,bmi,group";
  std::string label = "true";
  std::string reference = "White";
};

void cmd_fit(RunContext& ctx, const FitFlags& opt) {
  const auto cfg = load_optional_config(ctx);
  const auto data = load_data(ctx, cfg);
  auto features = parse_feature_list(opt.features);
  features.reference_group = opt.reference;
  const auto kind = label_kind_from_string(opt.label);
  const auto model = fit_logistic(data, features, kind);
  ctx.parameters["features"] = opt.features;
  ctx.parameters["label"] = opt.label;
  ctx.parameters["reference"] = opt.reference;
  Outputs out;
  out.add("model.json", model_to_json(model).dump(2) + "\n");
  std::cout << "fit " << opt.features << " on " << opt.label << " labels: "
            << (model.converged ? "converged" : "NOT converged") << " after " << model.iterations
            << " iterations\n";
  if (!model.converged) {
    std::cerr << "warning: the fit hit the iteration cap or lost curvature; "
                 "check for labels of a single class\n";
  }
  finish(ctx, out);
}

struct CalibrateFlags {
  std::vector<std::string> models;
  std::size_t bins = 10;
  std::string binning = "quantile";
};

void cmd_calibrate(RunContext& ctx, const CalibrateFlags& opt) {
  const auto cfg = load_optional_config(ctx);
  const auto data = load_data(ctx, cfg);
  if (opt.models.empty()) throw ValidationError("--model PATH is required (repeatable)");
  const auto binning = parse_binning(opt.binning, opt.bins);
  const auto labels = data.true_labels();
  const auto ids = data.group_ids();
  std::string csv = "model,group,bin,mean_predicted,observed_rate,count\n";
  std::vector<figures::NamedCurves> named;
  for (const auto& spec : opt.models) {
    const auto [name, path] = model_spec(spec);
    const auto model = load_model_input(ctx, path);
    const auto scores = predict_all(model, data);
    auto curves = calibration_curve(scores, labels, ids, data.groups(), binning);
    csv += calibration_rows(name, curves);
    std::cout << name << ":";
    for (const auto& c : curves) {
      std::cout << ' ' << c.group << " ece=" << io::format_double(expected_calibration_error(c))
                << " gap=" << io::format_double(signed_gap(c));
    }
    std::cout << "\n";
    named.push_back({name, std::move(curves)});
  }
  ctx.parameters["bins"] = opt.bins;
  ctx.parameters["binning"] = opt.binning;
  ctx.parameters["models"] = opt.models;
  Outputs out;
  out.add("calibration.csv", csv);
  out.add_svg("reliability.svg", [&] {
    return figures::reliability(named, data.groups(), "Observed rate against predicted risk");
  });
  finish(ctx, out);
}

struct PolicyFlags {
  std::string model;
  std::optional<double> uniform;
  std::optional<double> equal_rate;
  std::optional<double> equal_fnr;
  double t_star = 0.015;
};

void cmd_policy(RunContext& ctx, const PolicyFlags& opt) {
  const auto cfg = load_optional_config(ctx);
  const auto data = load_data(ctx, cfg);
  if (opt.model.empty()) throw ValidationError("--model PATH is required");
  if (!opt.uniform && !opt.equal_rate && !opt.equal_fnr) {
    throw ValidationError("give at least one of --uniform T, --equal-rate R, --equal-fnr F");
  }
  if (!(opt.t_star > 0.0 && opt.t_star < 1.0)) throw ValidationError("--t-star must lie in (0,1)");
  const auto model = load_model_input(ctx, opt.model);
  const auto scores = predict_all(model, data);
  const auto labels = data.true_labels();
  const auto ids = data.group_ids();
  // Synthetic data: welfare on the generating risk; otherwise on the scores.
  const auto risks = cfg ? risks_for(*cfg, data) : std::vector<double>{};

  std::vector<Policy> policies;
  if (opt.uniform) policies.push_back(uniform_policy(*opt.uniform, data.groups()));
  if (opt.equal_rate) {
    policies.push_back(equalize_decision_rates(scores, ids, data.groups(), *opt.equal_rate));
  }
  if (opt.equal_fnr) {
    policies.push_back(equalize_fnr(scores, labels, ids, data.groups(), *opt.equal_fnr));
  }

  std::string csv = "policy,group,threshold,decision_rate,fnr,fpr,screened_count,welfare_total\n";
  for (const auto& policy : policies) {
    const auto m = evaluate_policy(policy, scores, labels, ids, data.groups(),
                                   UtilityModel{opt.t_star}, risks);
    for (const auto& g : m.groups) {
      csv += m.policy + ',' + g.group + ',' + io::format_double(g.threshold) + ',' +
             io::format_double(g.decision_rate) + ',' + io::format_double(g.fnr) + ',' +
             io::format_double(g.fpr) + ',' + std::to_string(g.screened_count) + ',' +
             io::format_double(g.welfare) + '\n';
    }
    std::cout << m.policy << ": welfare " << io::format_double(m.welfare) << "\n";
  }
  if (opt.uniform) ctx.parameters["uniform"] = *opt.uniform;
  if (opt.equal_rate) ctx.parameters["equal_rate"] = *opt.equal_rate;
  if (opt.equal_fnr) ctx.parameters["equal_fnr"] = *opt.equal_fnr;
  ctx.parameters["t_star"] = opt.t_star;
  ctx.parameters["welfare_risk"] = cfg ? "true_risk" : "model_score";
  Outputs out;
  out.add("policy.csv", csv);
  out.add_svg("risk_distribution.svg", [&] {
    return figures::risk_distribution(scores, ids, data.groups(), policies, opt.t_star);
  });
  finish(ctx, out);
}

struct BlindingFlags {
  std::string blind;
  std::string aware;
  double t_star = 0.015;
};

void cmd_blinding(RunContext& ctx, const BlindingFlags& opt) {
  const auto cfg = load_optional_config(ctx);
  const auto data = load_data(ctx, cfg);
  if (opt.blind.empty() || opt.aware.empty()) {
    throw ValidationError("--blind PATH and --aware PATH are both required");
  }
  if (!(opt.t_star > 0.0 && opt.t_star < 1.0)) throw ValidationError("--t-star must lie in (0,1)");
  const auto blind = load_model_input(ctx, opt.blind);
  const auto aware = load_model_input(ctx, opt.aware);
  const auto report = blinding_cost(blind, aware, data, UtilityModel{opt.t_star});
  std::string csv = "group,under_screened_frac,over_screened_frac,welfare_delta\n";
  for (const auto& g : report.groups) {
    csv += g.group + ',' + io::format_double(g.under_screened_frac) + ',' +
           io::format_double(g.over_screened_frac) + ',' + io::format_double(g.welfare_delta) +
           '\n';
    std::cout << g.group << ": under " << io::format_double(g.under_screened_frac) << ", over "
              << io::format_double(g.over_screened_frac) << "\n";
  }
  ctx.parameters["t_star"] = opt.t_star;
  Outputs out;
  out.add("blinding_cost.csv", csv);
  out.add_svg("blinding.svg", [&] { return figures::blinding(report); });
  finish(ctx, out);
}

struct LabelBiasFlags {
  std::string detect;
  std::string features = "age,bmi,group";
  std::size_t bins = 10;
};

void cmd_labelbias(RunContext& ctx, const LabelBiasFlags& opt) {
  const auto cfg = load_optional_config(ctx);
  const auto data = load_data(ctx, cfg);
  const PopulationConfig base = cfg ? *cfg : PopulationConfig::defaults();
  std::map<std::string, double> detection;
  const auto counts = data.group_counts();
  for (std::size_t g = 0; g < data.groups().size(); ++g) {
    const auto& label = data.groups().labels()[g];
    if (counts[g] == 0) continue;
    const auto it = std::find(base.groups.begin(), base.groups.end(), label);
    if (it != base.groups.end()) {
      detection[label] = base.params[static_cast<std::size_t>(it - base.groups.begin())].detection_prob;
    }
  }
  for (const auto& [label, d] : parse_detection(opt.detect)) detection[label] = d;
  const std::uint64_t seed = ctx.common.seed.value_or(1);
  ctx.seed_used = seed;

  const auto proxy = apply_proxy_labels(data, detection, seed);
  const auto features = parse_feature_list(opt.features);
  const auto true_model = fit_logistic(proxy, features, LabelKind::True);
  const auto proxy_model = fit_logistic(proxy, features, LabelKind::Proxy);
  const Binning binning{BinningMode::Quantile, opt.bins};
  const auto labels = proxy.true_labels();
  const auto ids = proxy.group_ids();
  std::vector<figures::NamedCurves> named{
      {"true-label", calibration_curve(predict_all(true_model, proxy), labels, ids,
                                       proxy.groups(), binning)},
      {"proxy-label", calibration_curve(predict_all(proxy_model, proxy), labels, ids,
                                        proxy.groups(), binning)}};
  std::string csv = "model,group,bin,mean_predicted,observed_rate,count\n";
  for (const auto& n : named) csv += calibration_rows(n.name, n.curves);
  for (const auto& c : named[1].curves) {
    std::cout << c.group << ": detection " << io::format_double(detection.at(c.group))
              << ", proxy-model gap " << io::format_double(signed_gap(c)) << "\n";
  }

  json dj = json::object();
  for (const auto& [k, v] : detection) dj[k] = v;
  ctx.parameters["detection"] = dj;
  ctx.parameters["features"] = opt.features;
  ctx.parameters["bins"] = opt.bins;
  Outputs out;
  out.add("persons_proxy.csv", dataset_to_csv(proxy));
  out.add("model_true.json", model_to_json(true_model).dump(2) + "\n");
  out.add("model_proxy.json", model_to_json(proxy_model).dump(2) + "\n");
  out.add("calibration.csv", csv);
  out.add_svg("labelbias.svg", [&] {
    return figures::reliability(named, proxy.groups(), "Audit against true labels");
  });
  finish(ctx, out);
}

struct FrontierFlags {
  double budget = 10000.0;
  double cost_per_mile = 5.0;
  std::string shares;
  std::string options = "0.3,0.4,0.5,0.6,0.7";
  std::string focus = "Black";
};

void cmd_frontier(RunContext& ctx, const FrontierFlags& opt) {
  const auto cfg = load_optional_config(ctx);
  const auto data = load_data(ctx, cfg);
  const auto inst = make_instance(data, opt.budget, opt.cost_per_mile, opt.focus);
  const auto shares = opt.shares.empty() ? share_grid(51) : io::parse_double_list(opt.shares);
  const auto option_shares = io::parse_double_list(opt.options);
  for (const double s : shares) {
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("--shares: values must lie in [0,1]");
  }
  for (const double s : option_shares) {
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("--options: values must lie in [0,1]");
  }
  if (shares.empty()) throw ValidationError("--shares: empty list");

  const auto free = unconstrained_alloc(inst);
  const auto points = frontier(inst, shares);
  json skipped = json::array();
  std::string csv = "share,objective,spend,vouchers_black,vouchers_white,fractional_count\n";
  for (const auto& p : points) {
    if (p.status == PointStatus::SolverFailure) {
      throw std::runtime_error("solver failed at share " + io::format_double(p.share) + ": " +
                               p.message);
    }
    if (!p.ok()) {
      skipped.push_back({{"share", p.share}, {"reason", p.message}});
      std::cerr << "warning: share " << io::format_double(p.share) << " is infeasible\n";
      continue;
    }
    const auto& r = p.result;
    csv += io::format_double(p.share) + ',' + io::format_double(r.objective) + ',' +
           io::format_double(r.spend) + ',' + io::format_double(r.vouchers(inst.groups, "Black")) +
           ',' + io::format_double(r.vouchers(inst.groups, "White")) + ',' +
           std::to_string(r.fractional.size()) + '\n';
  }

  std::string options_csv = "option,share,total_appearances,black_missed,white_missed,spend\n";
  const auto black = inst.groups.find("Black");
  const auto white = inst.groups.find("White");
  for (const auto& row : option_table(inst, points, option_shares)) {
    const double bm = black ? row.missed[index(*black)] : 0.0;
    const double wm = white ? row.missed[index(*white)] : 0.0;
    options_csv += row.option + ',' + io::format_double(row.share) + ',' +
                   io::format_double(row.total_appearances) + ',' + io::format_double(bm) + ',' +
                   io::format_double(wm) + ',' + io::format_double(row.spend) + '\n';
  }
  std::cout << "unconstrained: " << io::format_double(free.objective) << " appearances, "
            << opt.focus << " share " << io::format_double(free.share) << "\n";

  ctx.parameters["budget"] = opt.budget;
  ctx.parameters["cost_per_mile"] = opt.cost_per_mile;
  ctx.parameters["shares"] = shares;
  ctx.parameters["options"] = option_shares;
  ctx.parameters["focus"] = opt.focus;
  ctx.parameters["infeasible_shares"] = skipped;
  ctx.parameters["unconstrained"] = {{"objective", free.objective}, {"share", free.share},
                                     {"spend", free.spend}};
  Outputs out;
  out.add("frontier.csv", csv);
  out.add("options.csv", options_csv);
  out.add_svg("frontier.svg", [&] { return figures::frontier(points, free); });
  finish(ctx, out);
}

std::string hint_for(const std::exception& e) {
  if (dynamic_cast<const SchemaError*>(&e)) {
    return std::string("persons.csv needs the header ") + std::string(kPersonsHeader) +
           "; binary fields are 0/1";
  }
  if (dynamic_cast<const ConfigError*>(&e)) {
    return "fix the config value named above; absent keys keep their defaults";
  }
  if (dynamic_cast<const EncodingError*>(&e)) {
    return "use group labels declared by the data (pass --config for custom groups)";
  }
  if (dynamic_cast<const InfeasibleError*>(&e)) {
    return "pick shares that both groups can reach, e.g. 0 < s < 1 with both groups present";
  }
  if (dynamic_cast<const EmptyDatasetError*>(&e)) return "supply at least one person";
  return "run with --help for the expected flags";
}

void add_common(CLI::App* sub, Common& c, bool data) {
  sub->add_option("--config", c.config_path, "population config JSON");
  sub->add_option("--seed", c.seed, "random seed (U64)");
  sub->add_option("--out", c.out, "output directory")->required();
  if (data) sub->add_option("--data", c.data, "persons.csv input");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eqlab: risk-model fairness audits and voucher allocation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  RunContext ctx;
  GenFlags gen;
  FitFlags fit;
  CalibrateFlags cal;
  PolicyFlags pol;
  BlindingFlags bl;
  LabelBiasFlags lb;
  FrontierFlags fr;

  auto* s_gen = app.add_subcommand("gen", "generate a synthetic population");
  add_common(s_gen, ctx.common, false);
  s_gen->add_option("--preset", gen.preset, "built-in config when --config is absent")
      ->check(CLI::IsMember({"screening", "court"}));

  auto* s_fit = app.add_subcommand("fit", "fit a logistic risk model");
  add_common(s_fit, ctx.common, true);
  s_fit->add_option("--features", fit.features, "comma list from age,bmi,group");
  s_fit->add_option("--label", fit.label, "training label")->check(CLI::IsMember({"true", "proxy"}));
  s_fit->add_option("--reference", fit.reference, "reference group for indicators");

  auto* s_cal = app.add_subcommand("calibrate", "per-group reliability curves");
  add_common(s_cal, ctx.common, true);
  s_cal->add_option("--model", cal.models, "model JSON, or name=path (repeatable)");
  s_cal->add_option("--bins", cal.bins, "bins per group")->check(CLI::PositiveNumber);
  s_cal->add_option("--binning", cal.binning)->check(CLI::IsMember({"quantile", "equal-width"}));

  auto* s_pol = app.add_subcommand("policy", "screening policies and their metrics");
  add_common(s_pol, ctx.common, true);
  s_pol->add_option("--model", pol.model, "model JSON used for scores");
  s_pol->add_option("--uniform", pol.uniform, "one threshold for every group");
  s_pol->add_option("--equal-rate", pol.equal_rate, "common decision rate");
  s_pol->add_option("--equal-fnr", pol.equal_fnr, "common false negative rate");
  s_pol->add_option("--t-star", pol.t_star, "utility threshold");

  auto* s_bl = app.add_subcommand("blinding", "cost of a group-blind model");
  add_common(s_bl, ctx.common, true);
  s_bl->add_option("--blind", bl.blind, "blind model JSON");
  s_bl->add_option("--aware", bl.aware, "group-aware model JSON");
  s_bl->add_option("--t-star", bl.t_star, "utility threshold");

  auto* s_lb = app.add_subcommand("labelbias", "train on proxy labels, audit on true labels");
  add_common(s_lb, ctx.common, true);
  s_lb->add_option("--detect", lb.detect, "detection overrides, e.g. Black=0.5,White=0.9");
  s_lb->add_option("--features", lb.features, "comma list from age,bmi,group");
  s_lb->add_option("--bins", lb.bins, "bins per group")->check(CLI::PositiveNumber);

  auto* s_fr = app.add_subcommand("frontier", "voucher allocation frontier");
  add_common(s_fr, ctx.common, true);
  s_fr->add_option("--budget", fr.budget, "dollars");
  s_fr->add_option("--cost-per-mile", fr.cost_per_mile, "dollars per mile");
  s_fr->add_option("--shares", fr.shares, "comma list of focus-group shares (default 51-point grid)");
  s_fr->add_option("--options", fr.options, "comma list of shares for options.csv");
  s_fr->add_option("--focus", fr.focus, "group whose voucher share is constrained");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (s_gen->parsed()) {
      ctx.command = "gen";
      cmd_gen(ctx, gen);
    } else if (s_fit->parsed()) {
      ctx.command = "fit";
      cmd_fit(ctx, fit);
    } else if (s_cal->parsed()) {
      ctx.command = "calibrate";
      cmd_calibrate(ctx, cal);
    } else if (s_pol->parsed()) {
      ctx.command = "policy";
      cmd_policy(ctx, pol);
    } else if (s_bl->parsed()) {
      ctx.command = "blinding";
      cmd_blinding(ctx, bl);
    } else if (s_lb->parsed()) {
      ctx.command = "labelbias";
      cmd_labelbias(ctx, lb);
    } else if (s_fr->parsed()) {
      ctx.command = "frontier";
      cmd_frontier(ctx, fr);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\nhint: " << hint_for(e) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
