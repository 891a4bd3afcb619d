#include <gtest/gtest.h>

#include "weldopt/serialize.hpp"

using namespace weldopt;
using namespace weldopt::ensemble;

namespace {

void expect_same_predictions(const Model& a, const Model& b, const Dataset& d) {
  for (const auto& r : d.runs()) {
    EXPECT_NEAR(predict_ensemble(a, r.factors), predict_ensemble(b, r.factors), 1e-12);
  }
  // Off-grid points exercise thresholds between training values.
  for (double rpm : {850.0, 1100.0, 1300.0}) {
    const std::vector<double> x{rpm, 55.0, 0.15};
    EXPECT_NEAR(predict_ensemble(a, x), predict_ensemble(b, x), 1e-12);
  }
}

}  // namespace

TEST(Serialize, ForestRoundTrip) {
  const Dataset d = builtin_aa6262();
  const Model m = fit_random_forest(d, ForestParams{30, {4, 1, 0.0}, 2, 7});
  const std::string text = serialize::dump_model(m);
  const Model back = serialize::load_model(text);
  expect_same_predictions(m, back, d);
  EXPECT_EQ(std::get<ForestModel>(back).trees, std::get<ForestModel>(m).trees);
  EXPECT_EQ(serialize::dump_model(back), text);
}

TEST(Serialize, BoostRoundTrip) {
  const Dataset d = builtin_aa6262();
  const Model m = fit_gbm(d, GbmParams{40, {3, 1, 0.0}, 0.3, 0.5, 11});
  const std::string text = serialize::dump_model(m);
  const Model back = serialize::load_model(text);
  expect_same_predictions(m, back, d);
  EXPECT_EQ(std::get<BoostModel>(back).training_mse, std::get<BoostModel>(m).training_mse);
  EXPECT_EQ(serialize::dump_model(back), text);
}

TEST(Serialize, RejectsForeignDocuments) {
  EXPECT_THROW(serialize::load_model("{\"format\": \"other\"}"), parse_error);
  EXPECT_THROW(serialize::load_model("not json"), parse_error);
  const Model m = fit_gbm(builtin_aa6262(), GbmParams{1});
  auto j = serialize::to_json(m);
  j["version"] = 99;
  EXPECT_THROW(serialize::model_from_json(j), parse_error);
  j = serialize::to_json(m);
  j["kind"] = "svm";
  EXPECT_THROW(serialize::model_from_json(j), parse_error);
}
