#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "eqlab/population.hpp"
#include "json.hpp"

namespace eqlab {

enum class LabelKind {
  True,   // blood test or doctor diagnosis (the `diabetes` field)
  Proxy,  // doctor diagnosis only
};

std::string_view to_string(LabelKind kind);
LabelKind label_kind_from_string(std::string_view text);

// Columns, in order: intercept, standardized age, standardized BMI, then one
// indicator per declared group other than `reference_group`.
struct FeatureSet {
  bool use_age = true;
  bool use_bmi = true;
  bool use_group = false;
  std::string reference_group = "White";

  static FeatureSet blind() { return {true, true, false, "White"}; }
  static FeatureSet aware() { return {true, true, true, "White"}; }

  bool operator==(const FeatureSet&) const = default;
};

// Parses "age,bmi,group" style lists; an empty list is intercept-only.
FeatureSet parse_feature_list(std::string_view list);

struct FittedModel {
  FeatureSet feature_set;
  LabelKind label_kind = LabelKind::True;
  // Non-reference groups, one indicator column each (empty unless use_group).
  std::vector<std::string> group_columns;
  // Logit units, intercept first.
  std::vector<double> coefficients;
  double ridge_penalty = 0.0;
  bool converged = false;
  int iterations = 0;

  // Diagnostics; not serialized.
  double gradient_max_norm = 0.0;
  std::vector<double> objective_trace;

  std::size_t feature_count() const { return coefficients.size() - 1; }
};

struct FitOptions {
  double ridge_penalty = 1e-6;
  double gradient_tolerance = 1e-8;
  int max_iterations = 100;
};

struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> group_columns;
};

Design build_design(const Dataset& data, const FeatureSet& features, LabelKind kind);

// Ridge-penalized Bernoulli log-likelihood; the intercept is not penalized.
double penalized_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta, double ridge);
Eigen::VectorXd penalized_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& beta, double ridge);

// Damped Newton ascent. Hitting the iteration cap is reported through
// `converged`, not thrown.
FittedModel fit_logistic(const Dataset& data, const FeatureSet& features,
                         LabelKind kind, const FitOptions& options = {});

double predict(const FittedModel& model, std::string_view group, double age, double bmi);
double predict(const FittedModel& model, const Dataset& data, const Person& person);
std::vector<double> predict_all(const FittedModel& model, const Dataset& data);

// Redraws doctor_diagnosis = diabetes * Bernoulli(d_g). Every group that has
// persons needs an entry; entries for undeclared groups are errors.
Dataset apply_proxy_labels(const Dataset& data,
                           const std::map<std::string, double>& detection,
                           std::uint64_t seed);

nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);
void save_model(const FittedModel& model, const std::filesystem::path& path);
FittedModel load_model(const std::filesystem::path& path);

}  // namespace eqlab
