#include "sectorcast/boosting.hpp"

#include <cmath>
#include <limits>

#include <catch2/catch_amalgamated.hpp>

#include "sectorcast/rng.hpp"

using namespace sectorcast;

// ---------------------------------------------------------------------------
// Straight-line reference implementation of the boosting pseudocode, written
// before the production code was wired in and kept deliberately naive: a
// brute-force depth-1 stump per iteration, no shared code with tree.hpp or
// boosting.hpp. The production model with depth-1 trees must agree with this
// to 1e-9.
namespace oracle {

struct Stump {
  bool is_leaf = true;
  double value = 0;  // leaf mean when is_leaf
  int feature = 0;
  double threshold = 0;
  double left = 0, right = 0;

  double operator()(const std::vector<double>& x) const {
    if (is_leaf) return value;
    return x[static_cast<std::size_t>(feature)] <= threshold ? left : right;
  }
};

inline Stump fit_stump(const std::vector<std::vector<double>>& xs, const std::vector<double>& rs) {
  const std::size_t n = rs.size();
  double mean = 0;
  for (double r : rs) mean += r;
  mean /= static_cast<double>(n);

  Stump best;
  best.value = mean;
  double parent_sse = 0;
  for (double r : rs) parent_sse += (r - mean) * (r - mean);
  double best_sse = parent_sse;

  const std::size_t dim = xs[0].size();
  for (std::size_t f = 0; f < dim; ++f) {
    std::vector<double> sorted;
    for (const auto& x : xs) sorted.push_back(x[f]);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t b = 1; b < n; ++b) {
      if (sorted[b - 1] == sorted[b]) continue;
      double thr = sorted[b - 1] + (sorted[b] - sorted[b - 1]) / 2;
      double ls = 0, rsum = 0;
      std::size_t ln = 0, rn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (xs[i][f] <= thr) {
          ls += rs[i];
          ++ln;
        } else {
          rsum += rs[i];
          ++rn;
        }
      }
      double lmean = ls / static_cast<double>(ln);
      double rmean = rsum / static_cast<double>(rn);
      double sse = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double fitv = xs[i][f] <= thr ? lmean : rmean;
        sse += (rs[i] - fitv) * (rs[i] - fitv);
      }
      if (sse < best_sse) {
        best_sse = sse;
        best.is_leaf = false;
        best.feature = static_cast<int>(f);
        best.threshold = thr;
        best.left = lmean;
        best.right = rmean;
      }
    }
  }
  return best;
}

// F_0 = mean(y); F_i = F_{i-1} + nu * h_i where h_i fits the residuals.
inline std::vector<double> boost_predict(const std::vector<std::vector<double>>& xs,
                                         const std::vector<double>& ys, double nu, int n_learners,
                                         const std::vector<std::vector<double>>& eval_points) {
  double f0 = 0;
  for (double y : ys) f0 += y;
  f0 /= static_cast<double>(ys.size());

  std::vector<double> current(ys.size(), f0);
  std::vector<Stump> stumps;
  for (int i = 0; i < n_learners; ++i) {
    std::vector<double> rs(ys.size());
    for (std::size_t p = 0; p < ys.size(); ++p) rs[p] = ys[p] - current[p];
    Stump s = fit_stump(xs, rs);
    for (std::size_t p = 0; p < ys.size(); ++p) current[p] += nu * s(xs[p]);
    stumps.push_back(s);
  }

  std::vector<double> out;
  for (const auto& x : eval_points) {
    double v = f0;
    for (const Stump& s : stumps) v += nu * s(x);
    out.push_back(v);
  }
  return out;
}

}  // namespace oracle
// ---------------------------------------------------------------------------

namespace {

BoostedModel leaf_model(double f0, double rho, double leaf_value) {
  BoostedModel m;
  m.schema.with_weather = false;
  m.input_dimension = m.schema.dimension();
  m.f0 = f0;
  TreeNode leaf;
  leaf.value = leaf_value;
  m.terms.push_back({RegressionTree::from_nodes({leaf}), rho});
  return m;
}

std::vector<double> any_time_features(SplitMix64& rng, const FeatureSchema& schema) {
  Timestamp t = day_start({2018, 3, 1}) + 60 * rng.next_int(0, 30 * kMinutesPerDay - 1);
  return encode_features(schema, t, std::nullopt);
}

}  // namespace

TEST_CASE("a constant target is a fixed point of training") {
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  SplitMix64 rng(3);
  for (int i = 0; i < 30; ++i) {
    xs.push_back({rng.next_double(0, 9)});
    ys.push_back(4.0);
  }
  BoostConfig cfg;
  cfg.n_learners = 12;
  cfg.tree.min_leaf = 1;
  BoostedModel m = train_boosted(xs, ys, cfg, FeatureSchema{false, false});
  REQUIRE(m.f0 == Catch::Approx(4.0));
  REQUIRE(m.terms.size() == 12);
  REQUIRE(m.predict({0.5}).raw == Catch::Approx(4.0).margin(1e-12));
  REQUIRE(m.predict({123.0}).raw == Catch::Approx(4.0).margin(1e-12));
}

TEST_CASE("zero learners predict the mean everywhere") {
  std::vector<std::vector<double>> xs{{0}, {1}, {2}};
  std::vector<double> ys{1, 2, 9};
  BoostConfig cfg;
  cfg.n_learners = 0;
  BoostedModel m = train_boosted(xs, ys, cfg, FeatureSchema{false, false});
  REQUIRE(m.terms.empty());
  REQUIRE(m.predict({7.0}).raw == Catch::Approx(4.0));
}

TEST_CASE("training an empty dataset fails") {
  REQUIRE_THROWS_AS(train_boosted({}, {}, {}), EmptyDataset);
}

TEST_CASE("a noiseless piecewise constant function is learned to numerical zero") {
  // Four plateaus over one feature, five points each.
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  const double levels[4] = {2, 7, 4, 9};
  for (int i = 0; i < 20; ++i) {
    xs.push_back({static_cast<double>(i)});
    ys.push_back(levels[i / 5]);
  }
  BoostConfig cfg;
  cfg.n_learners = 50;
  cfg.shrinkage = 1.0;
  cfg.tree = {3, 1};
  std::vector<double> trace;
  BoostedModel m = train_boosted(xs, ys, cfg, FeatureSchema{false, false}, "", &trace);
  REQUIRE(trace.back() < 1e-6);
  for (int i = 0; i < 20; ++i)
    REQUIRE(m.predict(xs[static_cast<std::size_t>(i)]).raw ==
            Catch::Approx(ys[static_cast<std::size_t>(i)]).margin(1e-3));
}

TEST_CASE("depth one boosting matches the straight line oracle") {
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    SplitMix64 rng(seed);
    std::size_t n = 40 + rng.next_below(61);  // up to ~100 samples
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back({rng.next_double(0, 10), rng.next_double(-3, 3)});
      ys.push_back(3 * std::sin(xs.back()[0]) + xs.back()[1] + rng.next_double(0, 0.5));
    }
    std::vector<std::vector<double>> fresh;
    for (int i = 0; i < 15; ++i) fresh.push_back({rng.next_double(0, 10), rng.next_double(-3, 3)});
    std::vector<std::vector<double>> eval = xs;
    eval.insert(eval.end(), fresh.begin(), fresh.end());

    BoostConfig cfg;
    cfg.n_learners = 25;
    cfg.shrinkage = 0.3;
    cfg.tree = {1, 1};
    BoostedModel m = train_boosted(xs, ys, cfg, FeatureSchema{false, false});
    std::vector<double> want = oracle::boost_predict(xs, ys, 0.3, 25, eval);

    INFO("seed " << seed << " n " << n);
    for (std::size_t i = 0; i < eval.size(); ++i)
      REQUIRE(m.predict(eval[i]).raw == Catch::Approx(want[i]).margin(1e-9));
  }
}

TEST_CASE("training loss never increases across 400 terms") {
  SplitMix64 rng(0xDEEDull);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 60; ++i) {
    xs.push_back({rng.next_double(0, 24), rng.next_double(0, 7)});
    ys.push_back(5 + 3 * std::cos(xs.back()[0] / 4) + rng.next_double(0, 2));
  }
  BoostConfig cfg;
  cfg.n_learners = 400;
  cfg.tree = {2, 2};
  std::vector<double> trace;
  train_boosted(xs, ys, cfg, FeatureSchema{false, false}, "", &trace);
  REQUIRE(trace.size() == 400);
  for (std::size_t i = 1; i < trace.size(); ++i) REQUIRE(trace[i] <= trace[i - 1] + 1e-12);
}

TEST_CASE("line search also converges monotonically") {
  SplitMix64 rng(0xF00Dull);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 50; ++i) {
    xs.push_back({rng.next_double(0, 10)});
    ys.push_back(xs.back()[0] * 1.5 + rng.next_double(0, 1));
  }
  BoostConfig cfg;
  cfg.n_learners = 80;
  cfg.line_search = true;
  cfg.tree = {2, 1};
  std::vector<double> trace;
  BoostedModel m = train_boosted(xs, ys, cfg, FeatureSchema{false, false}, "", &trace);
  for (std::size_t i = 1; i < trace.size(); ++i) REQUIRE(trace[i] <= trace[i - 1] + 1e-12);
  for (const BoostedTerm& t : m.terms) REQUIRE(std::isfinite(t.rho));
}

TEST_CASE("shifting all targets shifts f0 and nothing else") {
  SplitMix64 rng(0xC0DEull);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 40; ++i) {
    xs.push_back({rng.next_double(0, 8), rng.next_double(0, 8)});
    ys.push_back(rng.next_double(0, 10));
  }
  std::vector<double> shifted = ys;
  for (double& y : shifted) y += 100.0;

  BoostConfig cfg;
  cfg.n_learners = 20;
  cfg.tree = {3, 2};
  BoostedModel a = train_boosted(xs, ys, cfg, FeatureSchema{false, false});
  BoostedModel b = train_boosted(xs, shifted, cfg, FeatureSchema{false, false});

  REQUIRE(b.f0 == Catch::Approx(a.f0 + 100.0).margin(1e-9));
  REQUIRE(a.terms.size() == b.terms.size());
  for (std::size_t t = 0; t < a.terms.size(); ++t) {
    const auto& na = a.terms[t].tree.nodes();
    const auto& nb = b.terms[t].tree.nodes();
    REQUIRE(na.size() == nb.size());
    for (std::size_t i = 0; i < na.size(); ++i) {
      REQUIRE(na[i].feature == nb[i].feature);
      REQUIRE(na[i].threshold == nb[i].threshold);
      REQUIRE(na[i].value == Catch::Approx(nb[i].value).margin(1e-9));
    }
  }
  REQUIRE(b.predict(xs[0]).raw == Catch::Approx(a.predict(xs[0]).raw + 100.0).margin(1e-9));
}

TEST_CASE("negative raw predictions clamp to a zero count") {
  BoostedModel m = leaf_model(2.0, 0.5, -6.0);
  Prediction p = m.predict(encode_features(m.schema, day_start({2018, 3, 14}), std::nullopt));
  REQUIRE(p.raw == Catch::Approx(-1.0));
  REQUIRE(p.count == 0.0);

  BoostedModel pos = leaf_model(2.0, 0.5, 6.0);
  Prediction q = pos.predict(encode_features(pos.schema, day_start({2018, 3, 14}), std::nullopt));
  REQUIRE(q.raw == Catch::Approx(5.0));
  REQUIRE(q.count == Catch::Approx(5.0));
}

TEST_CASE("prediction is pure and schema checked") {
  BoostedModel m = leaf_model(1.0, 1.0, 0.5);
  std::vector<double> x = encode_features(m.schema, day_start({2018, 3, 14}), std::nullopt);
  REQUIRE(m.predict(x).raw == m.predict(x).raw);
  std::vector<double> wrong(x.size() + 3, 0.0);
  REQUIRE_THROWS_AS(m.predict(wrong), SchemaMismatch);
}

TEST_CASE("models survive serialization with bit identical predictions") {
  SplitMix64 rng(0xBEEFull);
  FeatureSchema schema{false, false};
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 200; ++i) {
    xs.push_back(any_time_features(rng, schema));
    ys.push_back(static_cast<double>(rng.next_below(15)));
  }
  BoostConfig cfg;
  cfg.n_learners = 30;
  BoostedModel m = train_boosted(xs, ys, cfg, schema, "ZNY01");

  std::string doc = serialize_model(m);
  BoostedModel back = parse_model(doc);
  REQUIRE(back.sector == "ZNY01");
  REQUIRE(back.schema == m.schema);
  REQUIRE(back.terms.size() == m.terms.size());
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x = any_time_features(rng, schema);
    REQUIRE(back.predict(x).raw == m.predict(x).raw);  // exact, not approximate
  }
  REQUIRE(serialize_model(back) == doc);
}

TEST_CASE("model documents validate on parse") {
  REQUIRE_THROWS_AS(parse_model("not json at all"), ModelParseError);
  REQUIRE_THROWS_AS(parse_model("{}"), ModelParseError);

  BoostedModel m = leaf_model(1.0, 1.0, 2.0);
  nlohmann::json j = nlohmann::json::parse(serialize_model(m));
  j["version"] = 99;
  REQUIRE_THROWS_AS(parse_model(j.dump()), ModelParseError);

  nlohmann::json broken = nlohmann::json::parse(serialize_model(m));
  broken["terms"][0]["nodes"][0]["left"] = 7;
  broken["terms"][0]["nodes"][0]["feature"] = 0;
  REQUIRE_THROWS_AS(parse_model(broken.dump()), ModelParseError);
}

TEST_CASE("encoded time features carry the calendar") {
  FeatureSchema schema;  // weather on
  Timestamp noon = require_timestamp("2018-03-14T12:00:00Z");
  std::vector<double> x = encode_features(schema, noon, std::nullopt);
  REQUIRE(x.size() == 19);
  REQUIRE(x[0] == 720.0);
  // 2018-03-14 is a Wednesday: one-hot slot 3 of Mon..Sun.
  REQUIRE(x[3] == 1.0);
  REQUIRE(x[1] + x[2] + x[3] + x[4] + x[5] + x[6] + x[7] == 1.0);
  REQUIRE(x[8] == 73.0);  // day of year
  for (std::size_t i = 9; i < 19; ++i) REQUIRE(x[i] == 0.0);  // no weather, masks off

  WeatherObs wx;
  wx.wind_speed_kts = 12.0;
  wx.wind_dir_deg = 90.0;
  std::vector<double> xw = encode_features(schema, noon, wx);
  REQUIRE(xw[11] == 12.0);
  REQUIRE(xw[12] == Catch::Approx(1.0).margin(1e-12));   // sin 90
  REQUIRE(xw[13] == Catch::Approx(0.0).margin(1e-12));   // cos 90
  REQUIRE(xw[14] == 1.0);
  REQUIRE(xw[9] == 0.0);   // temperature absent
  REQUIRE(xw[10] == 0.0);

  // Wind speed without direction cannot use the trio.
  WeatherObs partial;
  partial.wind_speed_kts = 8.0;
  std::vector<double> xp = encode_features(schema, noon, partial);
  REQUIRE(xp[11] == 0.0);
  REQUIRE(xp[14] == 0.0);

  REQUIRE_THROWS_AS(encode_features(schema, noon + 30, std::nullopt), std::invalid_argument);

  FeatureSchema with_u{true, true};
  std::vector<double> xu = encode_features(with_u, noon, std::nullopt, 3);
  REQUIRE(xu.size() == 20);
  REQUIRE(xu.back() == 3.0);
  REQUIRE_THROWS_AS(encode_features(with_u, noon, std::nullopt, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(encode_features(with_u, noon, std::nullopt, 0), std::invalid_argument);
}
