#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eqlab/error.hpp"
#include "eqlab/population.hpp"

using namespace eqlab;

namespace {

PopulationConfig small_config(std::size_t per_group) {
  auto cfg = PopulationConfig::defaults();
  for (auto& p : cfg.params) p.size = per_group;
  return cfg;
}

// E[sigmoid(b0 + ba*(A-45)/10 + bb*(B-27)/5)] with A ~ U[18,70] and
// B ~ N(28, 5) truncated to [18.5, 50], by the midpoint rule.
double prevalence_by_quadrature(double b0, double ba, double bb) {
  const int na = 400, nb = 800;
  double num = 0.0, den = 0.0;
  for (int j = 0; j < nb; ++j) {
    const double b = 18.5 + (50.0 - 18.5) * (j + 0.5) / nb;
    const double w = std::exp(-0.5 * std::pow((b - 28.0) / 5.0, 2));
    double inner = 0.0;
    for (int i = 0; i < na; ++i) {
      const double a = 18.0 + 52.0 * (i + 0.5) / na;
      const double z = b0 + ba * (a - 45.0) / 10.0 + bb * (b - 27.0) / 5.0;
      inner += 1.0 / (1.0 + std::exp(-z));
    }
    num += w * inner / na;
    den += w;
  }
  return num / den;
}

}  // namespace

TEST(TrueRisk, ZeroCoefficientsGiveHalf) {
  auto cfg = PopulationConfig::defaults();
  cfg.beta_age = cfg.beta_bmi = 0.0;
  for (auto& p : cfg.params) p.intercept = 0.0;
  EXPECT_DOUBLE_EQ(true_risk(cfg, "Black", 63.0, 41.0), 0.5);
}

TEST(TrueRisk, InterceptAtReferencePoint) {
  auto cfg = PopulationConfig::defaults();
  cfg.params[0].intercept = std::log(0.015 / 0.985);
  EXPECT_NEAR(true_risk(cfg, "Asian", 45.0, 27.0), 0.015, 1e-15);
}

TEST(TrueRisk, AsianAboveWhiteAtSameCovariates) {
  const auto cfg = PopulationConfig::defaults();
  EXPECT_GT(true_risk(cfg, "Asian", 30.0, 21.5), true_risk(cfg, "White", 30.0, 21.5));
}

TEST(TrueRisk, UnknownGroupIsConfigError) {
  EXPECT_THROW(true_risk(PopulationConfig::defaults(), "Martian", 30, 25), ConfigError);
}

TEST(TrueRisk, MonotoneInAgeAndBmi) {
  const auto cfg = PopulationConfig::defaults();
  for (double bmi = 18.5; bmi < 50.0; bmi += 0.5) {
    EXPECT_LT(true_risk(cfg, "Hispanic", 40.0, bmi), true_risk(cfg, "Hispanic", 40.0, bmi + 0.5));
  }
  for (double age = 18.0; age < 70.0; age += 1.0) {
    EXPECT_LT(true_risk(cfg, "White", age, 30.0), true_risk(cfg, "White", age + 1.0, 30.0));
  }
}

TEST(Generate, DeterministicAndThreadInvariant) {
  const auto cfg = small_config(3000);
  const auto a = generate_population(cfg, 1);
  const auto b = generate_population(cfg, 7);
  const auto c = generate_population(cfg, 0);
  EXPECT_EQ(dataset_to_csv(a), dataset_to_csv(b));
  EXPECT_EQ(dataset_to_csv(a), dataset_to_csv(c));
}

TEST(Generate, SeedChangesOutput) {
  auto cfg = small_config(500);
  const auto a = generate_population(cfg);
  cfg.seed = 2;
  const auto b = generate_population(cfg);
  EXPECT_NE(dataset_to_csv(a), dataset_to_csv(b));
}

TEST(Generate, OtherGroupsUnchangedWhenOneGroupResized) {
  auto cfg = small_config(400);
  const auto a = generate_population(cfg);
  cfg.params[0].size = 950;  // Asian
  const auto b = generate_population(cfg);
  auto without_id = [](Person p) {
    p.id = 0;
    return p;
  };
  for (std::size_t g = 1; g < 4; ++g) {
    std::vector<Person> pa, pb;
    for (const auto& p : a.persons()) {
      if (index(p.group) == g) pa.push_back(without_id(p));
    }
    for (const auto& p : b.persons()) {
      if (index(p.group) == g) pb.push_back(without_id(p));
    }
    EXPECT_EQ(pa, pb) << "group " << g;
  }
}

TEST(Generate, SizesIdsAndRanges) {
  auto cfg = small_config(1000);
  cfg.params[2].size = 0;
  const auto data = generate_population(cfg);
  ASSERT_EQ(data.size(), 3000u);
  const auto counts = data.group_counts();
  EXPECT_EQ(counts[2], 0u);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& p = data.persons()[i];
    ASSERT_EQ(p.id, static_cast<std::int64_t>(i));
    ASSERT_GE(p.age, 18.0);
    ASSERT_LE(p.age, 70.0);
    ASSERT_GE(p.bmi, 18.5);
    ASSERT_LE(p.bmi, 50.0);
    ASSERT_GE(p.distance_miles, 0.0);
    ASSERT_GE(p.appear_prob, 0.0);
    ASSERT_LE(p.appear_prob, 1.0);
    ASSERT_TRUE(!p.doctor_diagnosis || p.diabetes);
  }
}

TEST(Generate, FullDetectionCopiesDiabetes) {
  auto cfg = small_config(2000);
  for (auto& p : cfg.params) p.detection_prob = 1.0;
  const auto data = generate_population(cfg);
  for (const auto& p : data.persons()) ASSERT_EQ(p.doctor_diagnosis, p.diabetes);
}

TEST(Generate, ZeroSizeIsEmptyDatasetError) {
  EXPECT_THROW(generate_population(small_config(0)), EmptyDatasetError);
}

TEST(Generate, InvalidConfigRejected) {
  auto cfg = small_config(10);
  cfg.params[1].detection_prob = 1.2;
  EXPECT_THROW(generate_population(cfg), ConfigError);
  cfg = small_config(10);
  cfg.params[1].distance_log_sd = 0.0;
  EXPECT_THROW(generate_population(cfg), ConfigError);
}

TEST(Generate, PrevalenceMatchesQuadrature) {
  const auto cfg = PopulationConfig::defaults();
  const auto data = generate_population(cfg);
  std::vector<double> positives(4, 0.0), counts(4, 0.0);
  std::vector<double> sampled_mean(4, 0.0);
  for (const auto& p : data.persons()) {
    positives[index(p.group)] += p.diabetes;
    counts[index(p.group)] += 1;
    sampled_mean[index(p.group)] += true_risk(cfg, cfg.groups[index(p.group)], p.age, p.bmi);
  }
  double overall = 0.0;
  for (std::size_t g = 0; g < 4; ++g) {
    const double expected =
        prevalence_by_quadrature(cfg.params[g].intercept, cfg.beta_age, cfg.beta_bmi);
    EXPECT_NEAR(positives[g] / counts[g], expected, 0.01) << cfg.groups[g];
    EXPECT_NEAR(positives[g] / counts[g], sampled_mean[g] / counts[g], 0.01) << cfg.groups[g];
    overall += expected / 4.0;
  }
  // Default population is tuned to about one in ten.
  EXPECT_NEAR(overall, 0.10, 0.01);
}

TEST(Csv, RoundTripIsExact) {
  const auto data = generate_population(small_config(500));
  const auto csv = dataset_to_csv(data);
  const auto back = parse_dataset(csv, data.groups(), "mem");
  EXPECT_EQ(back.persons(), data.persons());
  EXPECT_EQ(dataset_to_csv(back), csv);
}

TEST(Csv, SingleRow) {
  const std::string csv = std::string(kPersonsHeader) + "\n7,Black,30,22.5,1,0,4.5,0.25\n";
  const auto data = parse_dataset(csv, GroupSet::defaults(), "one.csv");
  ASSERT_EQ(data.size(), 1u);
  const auto& p = data.persons()[0];
  EXPECT_EQ(p.id, 0);  // ids are reassigned
  EXPECT_EQ(data.groups().label(p.group), "Black");
  EXPECT_EQ(p.age, 30.0);
  EXPECT_EQ(p.bmi, 22.5);
  EXPECT_TRUE(p.diabetes);
  EXPECT_FALSE(p.doctor_diagnosis);
  EXPECT_EQ(p.distance_miles, 4.5);
  EXPECT_EQ(p.appear_prob, 0.25);
}

TEST(Csv, HeaderOnlyIsEmptyDatasetError) {
  EXPECT_THROW(parse_dataset(std::string(kPersonsHeader) + "\n", GroupSet::defaults(), "h.csv"),
               EmptyDatasetError);
}

TEST(Csv, SchemaErrorsNameRowAndColumn) {
  const std::string h = std::string(kPersonsHeader) + "\n";
  auto message = [&](const std::string& row) -> std::string {
    try {
      parse_dataset(h + row, GroupSet::defaults(), "bad.csv");
    } catch (const SchemaError& e) {
      return e.what();
    }
    return "";
  };
  const auto bmi = message("0,White,30,60,0,0,1,0.5\n");
  EXPECT_NE(bmi.find("row 2"), std::string::npos) << bmi;
  EXPECT_NE(bmi.find("bmi"), std::string::npos) << bmi;
  EXPECT_NE(bmi.find("50"), std::string::npos) << bmi;
  EXPECT_NE(message("0,White,30,25,0,1,1,0.5\n").find("doctor_diagnosis"), std::string::npos);
  EXPECT_NE(message("0,Martian,30,25,0,0,1,0.5\n").find("group"), std::string::npos);
  EXPECT_NE(message("0,White,30,25,0,0,1\n").find("row 2"), std::string::npos);
  EXPECT_NE(message("0,White,30,25,0,0,-1,0.5\n").find("distance_miles"), std::string::npos);
  EXPECT_THROW(parse_dataset("id,group\n0,White\n", GroupSet::defaults(), "x"), SchemaError);
}

TEST(Config, JsonRoundTrip) {
  auto cfg = PopulationConfig::defaults();
  cfg.seed = 99;
  cfg.params[1].detection_prob = 0.4;
  EXPECT_EQ(config_from_json(config_to_json(cfg)), cfg);
}

TEST(Config, PartialJsonKeepsDefaults) {
  const auto cfg = config_from_json(nlohmann::json::parse(R"({"seed": 5, "group_sizes": {"White": 10}})"));
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.params_for("White").size, 10u);
  EXPECT_EQ(cfg.params_for("Asian").size, 50000u);
}

TEST(Config, CustomGroupLabels) {
  const auto cfg = config_from_json(nlohmann::json::parse(
      R"({"groups": ["North", "South"], "group_sizes": {"North": 20, "South": 30},
          "intercepts": {"North": -1.0, "South": -2.0}})"));
  const auto data = generate_population(cfg);
  EXPECT_EQ(data.size(), 50u);
  EXPECT_EQ(data.groups().labels(), (std::vector<std::string>{"North", "South"}));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"sede": 1})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"detection_prob": {"Asian": 2}})")),
               ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"group_sizes": {"Nobody": 2}})")),
               ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"seed": -1})")), ConfigError);
}
