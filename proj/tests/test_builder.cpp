#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "coreselect/builder.hpp"
#include "coreselect/geometry.hpp"
#include "coreselect/rng.hpp"
#include "doctest.h"

namespace cs = coreselect;

namespace {

Eigen::VectorXd v1(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

cs::Sample s(std::int64_t epoch, double x) { return {epoch, v1(x)}; }

cs::CalibrationConfig toy_config() {
  // sigma2 = 0 keeps both radii at delta, so distances are exact.
  cs::CalibrationConfig config;
  config.delta = 1.0;
  config.epsilon = 0.05;
  config.window_n = 2;
  config.dims = 1;
  config.sigma2 = 0.0;
  config.kappa = cs::Capacity::bounded(3);
  return config;
}

}  // namespace

TEST_CASE("hand-traced two-window run") {
  // Seed {10, 0, 4}. Window 1 predicts {4.2, 3.9}: both within 1.0 of the
  // entry at 4, whose weight climbs 1 -> 3. Window 2 predicts {3.8, 12.5}:
  // the entry at 4 is full (kappa = 3) and 12.5 reaches nothing, so both
  // predictions become cover targets too far apart to share a pick.
  cs::CoresetBuilder builder(toy_config());
  builder.seed({s(0, 10.0), s(4, 0.0), s(5, 4.0)});

  const auto w1 = builder.process_window({s(6, 4.2), s(7, 3.9)});
  CHECK(w1.collect_epochs.empty());
  REQUIRE(w1.assignment.pairs.size() == 2);
  CHECK(w1.assignment.pairs[0].entry_id == 2);
  CHECK(w1.assignment.pairs[0].kind == cs::RepresentativeKind::Existing);
  CHECK(w1.assignment.pairs[1].entry_id == 2);
  builder.ingest_collected({});

  const auto w2 = builder.process_window({s(8, 3.8), s(9, 12.5)});
  REQUIRE(w2.collect_epochs.size() == 2);
  CHECK(w2.collect_epochs[0] == 8);
  CHECK(w2.collect_epochs[1] == 9);
  REQUIRE(w2.assignment.pairs.size() == 2);
  CHECK(w2.assignment.pairs[0].entry_id == 3);  // appended after the seed
  CHECK(w2.assignment.pairs[0].kind == cs::RepresentativeKind::New);
  CHECK(w2.assignment.pairs[1].entry_id == 4);
  builder.ingest_collected({s(8, 3.8), s(9, 12.5)});

  const auto coreset = builder.finalize();
  REQUIRE(coreset.entries.size() == 5);
  CHECK(coreset.entries[0].weight == 1);   // 10.0, untouched
  CHECK(coreset.entries[1].weight == 1);   // 0.0, untouched
  CHECK(coreset.entries[2].weight == 3);   // 4.0, saturated
  CHECK(coreset.entries[3].weight == 1);   // 3.8 absorbed itself only
  CHECK(coreset.entries[4].weight == 1);   // 12.5
  CHECK(coreset.total_candidates == 7);    // 3 seeded + 2 windows of 2
  CHECK(coreset.entries[3].origin.window == 1);
  CHECK(coreset.entries[0].origin.initial());
}

TEST_CASE("weight norm of a capped run stays under the capacity bound") {
  cs::CoresetBuilder builder(toy_config());
  builder.seed({s(0, 0.0)});
  builder.process_window({s(1, 0.1), s(2, 0.2)});
  builder.ingest_collected({});
  // The seed entry is saturated now; the close pair shares one new pick.
  const auto w = builder.process_window({s(3, 9.0), s(4, 9.05)});
  REQUIRE(w.collect_epochs == std::vector<std::int64_t>{3});
  builder.ingest_collected({s(3, 9.0)});

  const auto coreset = builder.finalize();
  const double norm = cs::weight_norm(coreset);
  const double cap = 3.0 / std::sqrt(static_cast<double>(
                               coreset.entries.size()));
  CHECK(norm <= cap);
}

TEST_CASE("collection protocol violations throw") {
  cs::CoresetBuilder builder(toy_config());
  builder.seed({s(0, 0.0)});

  SUBCASE("ingest before any window") {
    CHECK_THROWS_AS(builder.ingest_collected({}), std::logic_error);
  }
  SUBCASE("two windows without an ingest") {
    builder.process_window({s(1, 5.0), s(2, 6.0)});
    CHECK_THROWS_AS(builder.process_window({s(3, 7.0), s(4, 8.0)}),
                    std::logic_error);
  }
  SUBCASE("wrong epochs delivered") {
    builder.process_window({s(1, 5.0), s(2, 9.0)});
    CHECK_THROWS_AS(builder.ingest_collected({s(1, 5.0)}), std::logic_error);
  }
  SUBCASE("finalize mid-window") {
    builder.process_window({s(1, 5.0), s(2, 9.0)});
    CHECK_THROWS_AS(builder.finalize(), std::logic_error);
  }
  SUBCASE("seed after a window started") {
    builder.process_window({s(1, 5.0), s(2, 9.0)});
    CHECK_THROWS_AS(builder.seed({s(9, 1.0)}), std::logic_error);
  }
}

TEST_CASE("window input validation") {
  cs::CoresetBuilder builder(toy_config());
  CHECK_THROWS_AS(builder.process_window({s(1, 0.0)}),
                  std::invalid_argument);  // wrong window length
  CHECK_THROWS_AS(builder.process_window({s(2, 0.0), s(1, 0.0)}),
                  std::invalid_argument);  // epochs must ascend
  Eigen::VectorXd wrong(2);
  wrong << 0, 0;
  CHECK_THROWS_AS(builder.process_window({{1, wrong}, {2, wrong}}),
                  std::invalid_argument);  // dimension mismatch
}

TEST_CASE("threshold policy matches the window decision when n=1") {
  cs::CalibrationConfig config;
  config.delta = 0.8;
  config.epsilon = 0.1;
  config.window_n = 1;
  config.dims = 1;
  config.sigma2 = 0.01;
  config.kappa = cs::Capacity::unbounded();

  cs::Rng rng(99);
  for (int stream = 0; stream < 50; ++stream) {
    cs::CoresetBuilder builder(config);
    double x = 0.0;
    for (std::int64_t t = 0; t < 40; ++t) {
      x += 0.4 * rng.normal();
      const bool threshold = builder.threshold_decide(v1(x));
      const auto decision = builder.process_window({s(t, x)});
      const bool collected = !decision.collect_epochs.empty();
      CAPTURE(stream);
      CAPTURE(t);
      REQUIRE(threshold == collected);
      builder.ingest_collected(collected ? std::vector<cs::Sample>{s(t, x)}
                                         : std::vector<cs::Sample>{});
    }
  }
}

TEST_CASE("threshold policy needs the n=1 unbounded configuration") {
  cs::CoresetBuilder wide(toy_config());  // n = 2, kappa = 3
  CHECK_THROWS_AS(wide.threshold_decide(v1(0.0)), std::logic_error);
}

TEST_CASE("boundary prediction is covered, just beyond is collected") {
  cs::CalibrationConfig config;
  config.delta = 1.0;
  config.epsilon = 0.05;
  config.window_n = 1;
  config.dims = 1;
  config.sigma2 = 0.0;
  cs::CoresetBuilder builder(config);
  builder.seed({s(0, 0.0)});

  const auto at = builder.process_window({s(1, 1.0)});  // exactly delta0
  CHECK(at.collect_epochs.empty());
  builder.ingest_collected({});

  const double beyond = std::nextafter(1.0, 2.0);
  const auto out = builder.process_window({s(2, beyond)});
  CHECK(out.collect_epochs == std::vector<std::int64_t>{2});
  builder.ingest_collected({s(2, beyond)});
}

TEST_CASE("explicit radii bypass calibration, infinite radius collects never") {
  cs::CalibrationConfig config;
  config.delta = 0.1;     // would be infeasible with this sigma2
  config.epsilon = 0.05;
  config.window_n = 1;
  config.dims = 1;
  config.sigma2 = 4.0;
  const cs::RunRadii radii{std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
  cs::CoresetBuilder builder(config, radii);
  builder.seed({s(0, 0.0)});
  for (std::int64_t t = 1; t < 20; ++t) {
    const auto d = builder.process_window({s(t, 1000.0 * t)});
    CHECK(d.collect_epochs.empty());
    builder.ingest_collected({});
  }
  CHECK(builder.finalize().entries.size() == 1);
}

TEST_CASE("an empty coreset collects the whole first window") {
  cs::CoresetBuilder builder(toy_config());
  const auto d = builder.process_window({s(0, 1.0), s(1, 50.0)});
  CHECK(d.collect_epochs.size() == 2);
  builder.ingest_collected({s(0, 1.0), s(1, 50.0)});
  CHECK(builder.finalize().entries.size() == 2);
}
