#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace eqlab {

// Index of a group within a GroupSet's declared order.
enum class GroupId : std::uint32_t {};

constexpr std::size_t index(GroupId id) { return static_cast<std::size_t>(id); }
constexpr GroupId group_id(std::size_t i) {
  return static_cast<GroupId>(static_cast<std::uint32_t>(i));
}

// Ordered, duplicate-free set of group labels.
class GroupSet {
 public:
  GroupSet() = default;
  explicit GroupSet(std::vector<std::string> labels);

  // Asian, Black, Hispanic, White.
  static GroupSet defaults();

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(GroupId id) const { return labels_.at(index(id)); }
  std::optional<GroupId> find(std::string_view label) const;

  bool operator==(const GroupSet&) const = default;

 private:
  std::vector<std::string> labels_;
};

inline constexpr double kAgeMin = 18.0;
inline constexpr double kAgeMax = 70.0;
inline constexpr double kBmiMin = 18.5;
inline constexpr double kBmiMax = 50.0;

// Fixed standardization shared by the generative model and fitted models.
constexpr double standardized_age(double age) { return (age - 45.0) / 10.0; }
constexpr double standardized_bmi(double bmi) { return (bmi - 27.0) / 5.0; }

double sigmoid(double z);
double logit(double p);

struct Person {
  std::int64_t id = 0;
  GroupId group{};
  double age = 45.0;
  double bmi = 27.0;
  bool diabetes = false;
  bool doctor_diagnosis = false;
  // Round-trip miles to the service location.
  double distance_miles = 0.0;
  double appear_prob = 0.0;

  bool operator==(const Person&) const = default;
};

struct GroupParams {
  std::size_t size = 0;
  // Logit-scale risk at age 45, BMI 27.
  double intercept = 0.0;
  // P(doctor diagnosis | diabetes).
  double detection_prob = 1.0;
  // Log-normal location and scale of round-trip miles.
  double distance_log_mean = 0.0;
  double distance_log_sd = 0.5;

  bool operator==(const GroupParams&) const = default;
};

struct PopulationConfig {
  std::vector<std::string> groups;
  std::vector<GroupParams> params;  // parallel to groups
  double beta_age = 0.0;
  double beta_bmi = 0.0;
  double appear_beta_a = 2.0;
  double appear_beta_b = 2.0;
  // Covariates: age ~ U[age_min, age_max], BMI ~ N(bmi_mean, bmi_sd)
  // truncated to [18.5, 50].
  double age_min = kAgeMin;
  double age_max = kAgeMax;
  double bmi_mean = 28.0;
  double bmi_sd = 5.0;
  std::uint64_t seed = 1;

  // Screening population: 50,000 per group, ~10% prevalence.
  static PopulationConfig defaults();
  // Court-appearance population: 5,000 Black and 5,000 White.
  static PopulationConfig court_defaults();

  // Throws ConfigError.
  void validate() const;
  GroupSet group_set() const;
  const GroupParams& params_for(std::string_view group) const;
  std::size_t total_size() const;

  bool operator==(const PopulationConfig&) const = default;
};

nlohmann::json config_to_json(const PopulationConfig& cfg);
// Fields absent from `j` keep their default values; unknown keys are errors.
PopulationConfig config_from_json(const nlohmann::json& j);
PopulationConfig load_config(const std::filesystem::path& path);

struct SyntheticSource {
  PopulationConfig config;
};
struct IngestedSource {
  std::string path;
};
using Provenance = std::variant<SyntheticSource, IngestedSource>;

// Immutable collection of persons with dense ids 0..n-1.
class Dataset {
 public:
  Dataset(GroupSet groups, std::vector<Person> persons, Provenance provenance);

  const GroupSet& groups() const { return groups_; }
  const std::vector<Person>& persons() const { return persons_; }
  const Provenance& provenance() const { return provenance_; }
  std::size_t size() const { return persons_.size(); }
  bool empty() const { return persons_.empty(); }

  std::vector<GroupId> group_ids() const;
  std::vector<std::uint8_t> true_labels() const;
  std::vector<std::uint8_t> proxy_labels() const;
  std::vector<std::size_t> group_counts() const;
  // Only for synthetic provenance.
  const PopulationConfig* synthetic_config() const;

 private:
  GroupSet groups_;
  std::vector<Person> persons_;
  Provenance provenance_;
};

// sigmoid(b0_g + beta_age * (age-45)/10 + beta_bmi * (bmi-27)/5).
double true_risk(const PopulationConfig& cfg, std::string_view group,
                 double age, double bmi);
// Generating risk of every person; requires synthetic provenance.
std::vector<double> true_risks(const Dataset& data);

// Deterministic in cfg (including cfg.seed). `threads` = 0 uses all cores;
// the output does not depend on it.
Dataset generate_population(const PopulationConfig& cfg, unsigned threads = 0);

inline constexpr std::string_view kPersonsHeader =
    "id,group,age,bmi,diabetes,doctor_diagnosis,distance_miles,appear_prob";

void write_dataset(const Dataset& data, std::ostream& out);
std::string dataset_to_csv(const Dataset& data);
Dataset parse_dataset(std::string_view csv, const GroupSet& groups,
                      std::string source_name);
Dataset load_dataset(const std::filesystem::path& path,
                     const GroupSet& groups = GroupSet::defaults());

}  // namespace eqlab
