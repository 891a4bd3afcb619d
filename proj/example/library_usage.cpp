// Minimal use of the weldopt headers without the CLI: Taguchi optimum, ANOVA, and a
// cross-validated random forest on the embedded dataset.

#include <cstdio>

#include "weldopt/anova.hpp"
#include "weldopt/ensemble.hpp"
#include "weldopt/taguchi.hpp"

int main() {
  using namespace weldopt;
  const Dataset data = builtin_aa6262();

  const auto table = taguchi::response_table(data);
  std::printf("optimum settings:");
  for (const auto& c : taguchi::optimal_combination(table, taguchi::Basis::raw)) {
    std::printf(" %s=%g", c.factor.c_str(), c.setting);
  }
  std::printf("\n");

  const auto fit = anova::fit_glm(data);
  for (const auto& row : anova::anova_table(fit).sources) {
    std::printf("%-16s SS=%-10.4g F=%-8.4g p=%.4g\n", row.source.c_str(), row.ss, row.f, row.p);
  }

  const ensemble::ForestParams forest{200, {}, 3, 7};
  const auto cv = ensemble::cross_validate(data, forest, kfold_plan(data.size(), data.size(), 7));
  std::printf("leave-one-out MSE %.4g, MAE %.4g\n", cv.pooled.mse, cv.pooled.mae);

  const auto importance = ensemble::feature_importance(ensemble::fit_random_forest(data, forest));
  std::printf("most important factor: %s\n",
              data.factor_names()[importance.argmax()].c_str());
  return 0;
}
