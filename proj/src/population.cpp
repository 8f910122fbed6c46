#include "eqlab/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "eqlab/error.hpp"
#include "eqlab/io.hpp"
#include "eqlab/rng.hpp"

namespace eqlab {
namespace {

constexpr std::uint64_t kGenerationDomain = 0x67656e6572617465ULL;  // "generate"
constexpr int kMaxBmiDraws = 10000;

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

GroupSet::GroupSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::set<std::string> seen;
  for (const auto& label : labels_) {
    if (label.empty()) throw ConfigError("group label must be nonempty");
    if (label.find(',') != std::string::npos) {
      throw ConfigError("group label must not contain ',': " + label);
    }
    if (!seen.insert(label).second) {
      throw ConfigError("duplicate group label: " + label);
    }
  }
}

GroupSet GroupSet::defaults() {
  return GroupSet({"Asian", "Black", "Hispanic", "White"});
}

std::optional<GroupId> GroupSet::find(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return group_id(i);
  }
  return std::nullopt;
}

PopulationConfig PopulationConfig::defaults() {
  PopulationConfig cfg;
  cfg.groups = {"Asian", "Black", "Hispanic", "White"};
  // Intercepts put aggregate prevalence near 10% and order the share of
  // each group above 1.5% risk as Asian > Hispanic > Black > White.
  cfg.params = {
      {50000, -2.45, 0.55, std::log(3.4), 0.45},
      {50000, -2.90, 0.60, std::log(4.0), 0.45},
      {50000, -2.75, 0.72, std::log(3.6), 0.45},
      {50000, -3.20, 0.85, std::log(3.0), 0.45},
  };
  cfg.beta_age = 0.7;
  cfg.beta_bmi = 0.6;
  cfg.appear_beta_a = 2.5;
  cfg.appear_beta_b = 2.0;
  cfg.seed = 1;
  return cfg;
}

PopulationConfig PopulationConfig::court_defaults() {
  PopulationConfig cfg = defaults();
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    const bool court_group = cfg.groups[g] == "Black" || cfg.groups[g] == "White";
    cfg.params[g].size = court_group ? 5000 : 0;
  }
  return cfg;
}

void PopulationConfig::validate() const {
  if (groups.size() != params.size()) {
    throw ConfigError("config: groups and per-group parameters differ in length");
  }
  if (groups.empty()) throw ConfigError("config: no groups declared");
  GroupSet check(groups);  // rejects duplicates
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& p = params[g];
    const std::string where = "config: group " + groups[g] + ": ";
    if (!std::isfinite(p.intercept)) throw ConfigError(where + "intercept not finite");
    if (!is_probability(p.detection_prob)) {
      throw ConfigError(where + "detection_prob must be in [0,1]");
    }
    if (!std::isfinite(p.distance_log_mean)) {
      throw ConfigError(where + "distance_log_mean not finite");
    }
    if (!(std::isfinite(p.distance_log_sd) && p.distance_log_sd > 0.0)) {
      throw ConfigError(where + "distance_log_sd must be > 0");
    }
  }
  if (!std::isfinite(beta_age) || !std::isfinite(beta_bmi)) {
    throw ConfigError("config: beta_age/beta_bmi must be finite");
  }
  if (!(std::isfinite(appear_beta_a) && appear_beta_a > 0.0 &&
        std::isfinite(appear_beta_b) && appear_beta_b > 0.0)) {
    throw ConfigError("config: appear_beta_a/appear_beta_b must be > 0");
  }
  if (!(age_min >= kAgeMin && age_max <= kAgeMax && age_min <= age_max)) {
    throw ConfigError("config: age range must lie within [18, 70]");
  }
  if (!(bmi_mean >= kBmiMin && bmi_mean <= kBmiMax)) {
    throw ConfigError("config: bmi_mean must lie within [18.5, 50]");
  }
  if (!(std::isfinite(bmi_sd) && bmi_sd > 0.0)) {
    throw ConfigError("config: bmi_sd must be > 0");
  }
}

GroupSet PopulationConfig::group_set() const { return GroupSet(groups); }

const GroupParams& PopulationConfig::params_for(std::string_view group) const {
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g] == group) return params.at(g);
  }
  throw ConfigError("unknown group '" + std::string(group) + "'");
}

std::size_t PopulationConfig::total_size() const {
  std::size_t total = 0;
  for (const auto& p : params) total += p.size;
  return total;
}

// ---------------------------------------------------------------- JSON

nlohmann::json config_to_json(const PopulationConfig& cfg) {
  nlohmann::json j;
  j["groups"] = cfg.groups;
  nlohmann::json sizes, intercepts, detection, dist_mean, dist_sd;
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    const auto& label = cfg.groups[g];
    sizes[label] = cfg.params[g].size;
    intercepts[label] = cfg.params[g].intercept;
    detection[label] = cfg.params[g].detection_prob;
    dist_mean[label] = cfg.params[g].distance_log_mean;
    dist_sd[label] = cfg.params[g].distance_log_sd;
  }
  j["group_sizes"] = sizes;
  j["intercepts"] = intercepts;
  j["detection_prob"] = detection;
  j["distance_log_mean"] = dist_mean;
  j["distance_log_sd"] = dist_sd;
  j["beta_age"] = cfg.beta_age;
  j["beta_bmi"] = cfg.beta_bmi;
  j["appear_beta_a"] = cfg.appear_beta_a;
  j["appear_beta_b"] = cfg.appear_beta_b;
  j["age_min"] = cfg.age_min;
  j["age_max"] = cfg.age_max;
  j["bmi_mean"] = cfg.bmi_mean;
  j["bmi_sd"] = cfg.bmi_sd;
  j["seed"] = cfg.seed;
  return j;
}

PopulationConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::set<std::string> known = {
      "groups",         "group_sizes",   "intercepts", "detection_prob",
      "distance_log_mean", "distance_log_sd", "beta_age", "beta_bmi",
      "appear_beta_a",  "appear_beta_b", "age_min",    "age_max",
      "bmi_mean",       "bmi_sd",        "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("config: unknown field '" + key + "'");
  }

  PopulationConfig cfg = PopulationConfig::defaults();
  try {
    if (j.contains("groups")) {
      // Known labels keep their default parameters; new labels start neutral.
      auto labels = j.at("groups").get<std::vector<std::string>>();
      std::vector<GroupParams> params;
      for (const auto& label : labels) {
        auto it = std::find(cfg.groups.begin(), cfg.groups.end(), label);
        params.push_back(it != cfg.groups.end()
                             ? cfg.params[static_cast<std::size_t>(it - cfg.groups.begin())]
                             : GroupParams{});
      }
      cfg.groups = std::move(labels);
      cfg.params = std::move(params);
    }
    auto per_group = [&](const char* field, auto setter) {
      if (!j.contains(field)) return;
      const auto& obj = j.at(field);
      if (!obj.is_object()) {
        throw ConfigError(std::string("config: ") + field + " must be an object keyed by group");
      }
      for (const auto& [label, value] : obj.items()) {
        auto it = std::find(cfg.groups.begin(), cfg.groups.end(), label);
        if (it == cfg.groups.end()) {
          throw ConfigError(std::string("config: ") + field + ": undeclared group '" + label + "'");
        }
        setter(cfg.params[static_cast<std::size_t>(it - cfg.groups.begin())], value);
      }
    };
    per_group("group_sizes", [](GroupParams& p, const nlohmann::json& v) {
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError("config: group_sizes must be nonnegative integers");
      }
      p.size = v.get<std::size_t>();
    });
    per_group("intercepts", [](GroupParams& p, const nlohmann::json& v) { p.intercept = v.get<double>(); });
    per_group("detection_prob", [](GroupParams& p, const nlohmann::json& v) { p.detection_prob = v.get<double>(); });
    per_group("distance_log_mean", [](GroupParams& p, const nlohmann::json& v) { p.distance_log_mean = v.get<double>(); });
    per_group("distance_log_sd", [](GroupParams& p, const nlohmann::json& v) { p.distance_log_sd = v.get<double>(); });

    auto scalar = [&](const char* field, double& target) {
      if (j.contains(field)) target = j.at(field).get<double>();
    };
    scalar("beta_age", cfg.beta_age);
    scalar("beta_bmi", cfg.beta_bmi);
    scalar("appear_beta_a", cfg.appear_beta_a);
    scalar("appear_beta_b", cfg.appear_beta_b);
    scalar("age_min", cfg.age_min);
    scalar("age_max", cfg.age_max);
    scalar("bmi_mean", cfg.bmi_mean);
    scalar("bmi_sd", cfg.bmi_sd);
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) {
        throw ConfigError("config: seed must be a nonnegative integer");
      }
      cfg.seed = j.at("seed").get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PopulationConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------- Dataset

Dataset::Dataset(GroupSet groups, std::vector<Person> persons, Provenance provenance)
    : groups_(std::move(groups)),
      persons_(std::move(persons)),
      provenance_(std::move(provenance)) {
  for (std::size_t i = 0; i < persons_.size(); ++i) {
    if (persons_[i].id != static_cast<std::int64_t>(i)) {
      throw SchemaError("dataset ids must be dense from 0");
    }
    if (index(persons_[i].group) >= groups_.size()) {
      throw SchemaError("dataset person " + std::to_string(i) + " has an undeclared group");
    }
  }
}

std::vector<GroupId> Dataset::group_ids() const {
  std::vector<GroupId> ids;
  ids.reserve(persons_.size());
  for (const auto& p : persons_) ids.push_back(p.group);
  return ids;
}

std::vector<std::uint8_t> Dataset::true_labels() const {
  std::vector<std::uint8_t> labels;
  labels.reserve(persons_.size());
  for (const auto& p : persons_) labels.push_back(p.diabetes ? 1 : 0);
  return labels;
}

std::vector<std::uint8_t> Dataset::proxy_labels() const {
  std::vector<std::uint8_t> labels;
  labels.reserve(persons_.size());
  for (const auto& p : persons_) labels.push_back(p.doctor_diagnosis ? 1 : 0);
  return labels;
}

std::vector<std::size_t> Dataset::group_counts() const {
  std::vector<std::size_t> counts(groups_.size(), 0);
  for (const auto& p : persons_) ++counts[index(p.group)];
  return counts;
}

const PopulationConfig* Dataset::synthetic_config() const {
  if (const auto* s = std::get_if<SyntheticSource>(&provenance_)) return &s->config;
  return nullptr;
}

// ---------------------------------------------------------------- generation

namespace {

double linear_risk(const PopulationConfig& cfg, const GroupParams& params,
                   double age, double bmi) {
  return sigmoid(params.intercept + cfg.beta_age * standardized_age(age) +
                 cfg.beta_bmi * standardized_bmi(bmi));
}

Person draw_person(const PopulationConfig& cfg, std::size_t group,
                   std::size_t within_group) {
  const GroupParams& params = cfg.params[group];
  CounterStream rng(cfg.seed, kGenerationDomain, group, within_group);
  Person person;
  person.group = group_id(group);
  person.age = cfg.age_min + (cfg.age_max - cfg.age_min) * rng.uniform();
  double bmi = rng.normal(cfg.bmi_mean, cfg.bmi_sd);
  for (int draws = 1; bmi < kBmiMin || bmi > kBmiMax; ++draws) {
    if (draws >= kMaxBmiDraws) {
      throw ConfigError("config: BMI distribution has negligible mass in [18.5, 50]");
    }
    bmi = rng.normal(cfg.bmi_mean, cfg.bmi_sd);
  }
  person.bmi = bmi;
  person.diabetes = rng.bernoulli(linear_risk(cfg, params, person.age, person.bmi));
  const bool detected = rng.bernoulli(params.detection_prob);
  person.doctor_diagnosis = person.diabetes && detected;
  person.distance_miles = rng.lognormal(params.distance_log_mean, params.distance_log_sd);
  person.appear_prob = rng.beta(cfg.appear_beta_a, cfg.appear_beta_b);
  return person;
}

}  // namespace

double true_risk(const PopulationConfig& cfg, std::string_view group, double age,
                 double bmi) {
  return linear_risk(cfg, cfg.params_for(group), age, bmi);
}

std::vector<double> true_risks(const Dataset& data) {
  const PopulationConfig* cfg = data.synthetic_config();
  if (cfg == nullptr) {
    throw ValidationError("true risks are only available for synthetic datasets");
  }
  std::vector<const GroupParams*> by_group;
  for (const auto& label : data.groups().labels()) by_group.push_back(&cfg->params_for(label));
  std::vector<double> risks;
  risks.reserve(data.size());
  for (const auto& p : data.persons()) {
    risks.push_back(linear_risk(*cfg, *by_group[index(p.group)], p.age, p.bmi));
  }
  return risks;
}

Dataset generate_population(const PopulationConfig& cfg, unsigned threads) {
  cfg.validate();
  const std::size_t total = cfg.total_size();
  if (total == 0) throw EmptyDatasetError("config: every group size is zero");

  // Global position -> (group, within-group index).
  std::vector<std::size_t> offsets(cfg.groups.size() + 1, 0);
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    offsets[g + 1] = offsets[g] + cfg.params[g].size;
  }
  std::vector<Person> persons(total);
  auto fill = [&](std::size_t begin, std::size_t end) {
    std::size_t g = static_cast<std::size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), begin) - offsets.begin() - 1);
    for (std::size_t i = begin; i < end; ++i) {
      while (i >= offsets[g + 1]) ++g;
      persons[i] = draw_person(cfg, g, i - offsets[g]);
      persons[i].id = static_cast<std::int64_t>(i);
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, (total + 4095) / 4096));
  if (threads <= 1) {
    fill(0, total);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (total + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(total, t * chunk);
      const std::size_t end = std::min(total, begin + chunk);
      workers.emplace_back([&, t, begin, end] {
        try {
          fill(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return Dataset(cfg.group_set(), std::move(persons), SyntheticSource{cfg});
}

// ---------------------------------------------------------------- CSV

void write_dataset(const Dataset& data, std::ostream& out) {
  out << kPersonsHeader << '\n';
  for (const auto& p : data.persons()) {
    out << p.id << ',' << data.groups().label(p.group) << ','
        << io::format_double(p.age) << ',' << io::format_double(p.bmi) << ','
        << (p.diabetes ? 1 : 0) << ',' << (p.doctor_diagnosis ? 1 : 0) << ','
        << io::format_double(p.distance_miles) << ','
        << io::format_double(p.appear_prob) << '\n';
  }
}

std::string dataset_to_csv(const Dataset& data) {
  std::ostringstream out;
  write_dataset(data, out);
  return out.str();
}

namespace {

[[noreturn]] void schema_fail(const std::string& source, std::size_t line,
                              std::string_view column, const std::string& what) {
  throw SchemaError(source + ": row " + std::to_string(line) + ", column " +
                    std::string(column) + ": " + what);
}

}  // namespace

Dataset parse_dataset(std::string_view csv, const GroupSet& groups,
                      std::string source_name) {
  static constexpr std::string_view kColumns[] = {
      "id", "group", "age", "bmi", "diabetes", "doctor_diagnosis",
      "distance_miles", "appear_prob"};

  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < csv.size()) {
    std::size_t end = csv.find('\n', start);
    if (end == std::string_view::npos) end = csv.size();
    lines.push_back(csv.substr(start, end - start));
    start = end + 1;
  }
  if (lines.empty()) throw SchemaError(source_name + ": missing header row");

  const auto header = io::split_csv_line(lines[0]);
  std::size_t column_index[std::size(kColumns)];
  for (std::size_t c = 0; c < std::size(kColumns); ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) {
      throw SchemaError(source_name + ": row 1: missing column '" +
                        std::string(kColumns[c]) + "'");
    }
    column_index[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<Person> persons;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    std::string_view line = lines[l];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t row = l + 1;  // 1-based file line
    const auto fields = io::split_csv_line(line);
    if (fields.size() != header.size()) {
      schema_fail(source_name, row, "*", "expected " + std::to_string(header.size()) +
                                             " fields, found " + std::to_string(fields.size()));
    }
    auto field = [&](std::size_t c) { return fields[column_index[c]]; };
    auto real = [&](std::size_t c, double lo, double hi) {
      double value = 0.0;
      if (!io::parse_double(field(c), value) || !std::isfinite(value)) {
        schema_fail(source_name, row, kColumns[c], "not a number: '" + std::string(field(c)) + "'");
      }
      if (value < lo || value > hi) {
        schema_fail(source_name, row, kColumns[c],
                    "value " + std::string(field(c)) + " outside [" + io::format_double(lo) +
                        ", " + io::format_double(hi) + "]");
      }
      return value;
    };
    auto binary = [&](std::size_t c) {
      const auto text = field(c);
      if (text == "0") return false;
      if (text == "1") return true;
      schema_fail(source_name, row, kColumns[c], "expected 0 or 1, found '" + std::string(text) + "'");
    };

    std::int64_t raw_id = 0;
    if (!io::parse_int64(field(0), raw_id)) {
      schema_fail(source_name, row, "id", "not an integer: '" + std::string(field(0)) + "'");
    }
    Person p;
    p.id = static_cast<std::int64_t>(persons.size());
    const auto group = groups.find(field(1));
    if (!group) {
      schema_fail(source_name, row, "group", "undeclared group '" + std::string(field(1)) + "'");
    }
    p.group = *group;
    p.age = real(2, kAgeMin, kAgeMax);
    p.bmi = real(3, kBmiMin, kBmiMax);
    p.diabetes = binary(4);
    p.doctor_diagnosis = binary(5);
    if (p.doctor_diagnosis && !p.diabetes) {
      schema_fail(source_name, row, "doctor_diagnosis",
                  "doctor_diagnosis=1 requires diabetes=1");
    }
    p.distance_miles = real(6, 0.0, std::numeric_limits<double>::infinity());
    p.appear_prob = real(7, 0.0, 1.0);
    persons.push_back(p);
  }
  if (persons.empty()) throw EmptyDatasetError(source_name + ": no data rows");
  return Dataset(groups, std::move(persons), IngestedSource{std::move(source_name)});
}

Dataset load_dataset(const std::filesystem::path& path, const GroupSet& groups) {
  if (!std::filesystem::exists(path)) {
    throw SchemaError(path.string() + ": file not found");
  }
  return parse_dataset(io::read_file(path), groups, path.string());
}

}  // namespace eqlab
