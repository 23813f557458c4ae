#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "coreselect/error_bound.hpp"
#include "doctest.h"

namespace cs = coreselect;

namespace {

cs::WeightedCoreset coreset_with(std::vector<std::uint32_t> weights,
                                 std::uint64_t candidates) {
  cs::WeightedCoreset coreset;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    cs::CoresetEntry entry;
    entry.sample.epoch = static_cast<std::int64_t>(j);
    entry.sample.features = Eigen::VectorXd::Zero(1);
    entry.weight = weights[j];
    coreset.entries.push_back(entry);
  }
  coreset.total_candidates = candidates;
  return coreset;
}

}  // namespace

TEST_CASE("bound terms match the frozen reference decomposition") {
  // External reference used L=2, lambda_l=1.2, lambda_eta=0.7, C=1.5;
  // class counts are integers here, so the same product lambda_eta*L*C is
  // reached with lambda_regression = 0.7 * 1.5 and C = 1.
  cs::BoundParams params;
  params.loss_bound = 2.0;
  params.lambda_loss = 1.2;
  params.lambda_regression = 0.7 * 1.5;
  params.num_classes = 1;
  params.gamma = 0.1;
  params.n = 100;
  params.training_losses = std::vector<double>{0.05, 0.1, 0.0, 0.2};

  const auto coreset = coreset_with({3, 2, 1, 4}, 100);
  const auto terms = cs::bound_terms(coreset, 0.5, params);

  CHECK(terms.radius_term == doctest::Approx(1.65).epsilon(1e-14));
  CHECK(terms.hoeffding_term ==
        doctest::Approx(0.24477468306808165464).epsilon(1e-14));
  CHECK(terms.weight_term ==
        doctest::Approx(0.13406861542256616428).epsilon(1e-14));
  CHECK(terms.training_term == doctest::Approx(0.0115).epsilon(1e-14));
  CHECK(terms.total ==
        doctest::Approx(2.0403432984906478189).epsilon(1e-14));

  CHECK(cs::nu(params) ==
        doctest::Approx(0.74174146384267168072).epsilon(1e-14));
}

TEST_CASE("gamma = 2 removes both deviation terms") {
  cs::BoundParams params;
  params.loss_bound = 5.0;
  params.lambda_loss = 1.0;
  params.gamma = 2.0;
  params.n = 10;
  const auto terms = cs::bound_terms(coreset_with({1, 1}, 10), 1.0, params);
  CHECK(terms.hoeffding_term == 0.0);
  CHECK(terms.weight_term == 0.0);
  CHECK(terms.total == doctest::Approx(terms.radius_term));
  CHECK(cs::nu(params) == 0.0);
}

TEST_CASE("missing training losses contribute zero") {
  cs::BoundParams params;
  params.n = 50;
  const auto terms = cs::bound_terms(coreset_with({2, 3}, 50), 0.3, params);
  CHECK(terms.training_term == 0.0);
  CHECK(terms.total > 0.0);
}

TEST_CASE("parameter domain violations throw") {
  cs::BoundParams params;
  params.n = 10;
  const auto coreset = coreset_with({1}, 10);

  auto bad = params;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(cs::bound_terms(coreset, 1.0, bad), std::invalid_argument);
  bad = params;
  bad.gamma = 2.5;
  CHECK_THROWS_AS(cs::bound_terms(coreset, 1.0, bad), std::invalid_argument);
  bad = params;
  bad.loss_bound = 0.0;
  CHECK_THROWS_AS(cs::bound_terms(coreset, 1.0, bad), std::invalid_argument);
  bad = params;
  bad.n = 0;
  CHECK_THROWS_AS(cs::bound_terms(coreset, 1.0, bad), std::invalid_argument);
  bad = params;
  bad.training_losses = std::vector<double>{0.1, 0.2};  // size mismatch
  CHECK_THROWS_AS(cs::bound_terms(coreset, 1.0, bad), std::invalid_argument);
  CHECK_THROWS_AS(cs::bound_terms(coreset, -0.5, params),
                  std::invalid_argument);
}

TEST_CASE("objective combines radius and weight norm linearly") {
  const auto coreset = coreset_with({1, 3, 2}, 6);
  // ||u~|| = sqrt(14)/6; objective = delta + nu * that.
  const double objective = cs::coreset_objective(0.9, coreset, 2.0);
  CHECK(objective ==
        doctest::Approx(0.9 + 2.0 * 0.62360956446232356426).epsilon(1e-14));
  CHECK_THROWS_AS(
      cs::coreset_objective(std::numeric_limits<double>::infinity(), coreset,
                            1.0),
      std::invalid_argument);
}

TEST_CASE("larger confidence gamma can only shrink the bound") {
  cs::BoundParams params;
  params.n = 40;
  const auto coreset = coreset_with({4, 4, 1}, 40);
  double prev = 1e300;
  for (const double gamma : {0.05, 0.2, 0.8, 1.6, 2.0}) {
    params.gamma = gamma;
    const double total = cs::bound_terms(coreset, 0.2, params).total;
    CHECK(total <= prev);
    prev = total;
  }
}
