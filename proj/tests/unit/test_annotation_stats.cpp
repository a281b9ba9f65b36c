#include <cmath>
#include <random>

#include "doctest.h"

#include "hatelab/annotation_stats.hpp"
#include "hatelab/error.hpp"
#include "hatelab/meta_learner.hpp"

using namespace hatelab;

namespace {

PoolRow row(std::string lang, std::array<double, 4> p, std::optional<std::string> raw = std::nullopt) {
  return {std::move(lang), ProbabilityVector::from_hate(p), std::move(raw)};
}

}  // namespace

TEST_SUITE("annotation-stats") {
  TEST_CASE("four hand-set rows") {
    std::vector<PoolRow> pool{row("eng", {0.75, 0.5, 0.25, 1.0}), row("eng", {0.25, 0.5, 0.5, 0.0}),
                              row("deu", {1.0, 0.75, 0.75, 0.0}), row("deu", {0.0, 0.0, 0.5, 0.5})};
    const auto s = pool_statistics(pool);
    CHECK(s.columns == std::vector<std::string>{"deu", "eng", "All"});
    CHECK(s.counts.at("All") == 4);
    // m0: eng (0.75+0.25)/2, deu (1+0)/2, all 2/4
    CHECK(s.per_model_mean_phate.at("m0").at("eng") == 0.5);
    CHECK(s.per_model_mean_phate.at("m0").at("All") == 0.5);
    // m2: eng 0.375, deu 0.625, all 0.5; only 0.75 > 0.5
    CHECK(s.per_model_mean_phate.at("m2").at("eng") == 0.375);
    CHECK(s.per_model_pct_hate.at("m2").at("deu") == 50.0);
    CHECK(s.per_model_pct_hate.at("m2").at("All") == 25.0);
    // m1: 0.5 is not > 0.5
    CHECK(s.per_model_pct_hate.at("m1").at("eng") == 0.0);
    // votes: row1 2 (0.75, 1.0) -> Hate; row2 0; row3 3 -> Hate; row4 0
    CHECK(s.per_strategy_pct_hate.at("vote").at("All") == 50.0);
    // means: 0.625 Hate, 0.3125, 0.625 Hate, 0.25
    CHECK(s.per_strategy_pct_hate.at("mean").at("eng") == 50.0);
    CHECK(s.per_strategy_pct_hate.at("mean").at("All") == 50.0);
    CHECK(s.strategies == std::vector<std::string>{"vote", "mean"});
  }

  TEST_CASE("degenerate and single-language pools") {
    std::vector<PoolRow> zero(5, row("vie", {0, 0, 0, 0}));
    const auto s = pool_statistics(zero);
    for (const auto& [m, cols] : s.per_model_mean_phate) {
      for (const auto& [c, v] : cols) CHECK(v == 0.0);
    }
    for (const auto& [m, cols] : s.per_strategy_pct_hate) {
      for (const auto& [c, v] : cols) CHECK(v == 0.0);
    }
    std::vector<PoolRow> one{row("spa", {0.9, 0.2, 0.7, 0.3}), row("spa", {0.1, 0.8, 0.6, 0.4})};
    const auto t = pool_statistics(one);
    for (const auto& m : t.models) {
      CHECK(t.per_model_mean_phate.at(m).at("spa") == t.per_model_mean_phate.at(m).at("All"));
      CHECK(t.per_model_pct_hate.at(m).at("spa") == t.per_model_pct_hate.at(m).at("All"));
    }
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(pool_statistics({}), DataError);
    std::vector<PoolRow> bad{row("All", {0, 0, 0, 0})};
    CHECK_THROWS_AS(pool_statistics(bad), DataError);
    std::vector<PoolRow> mixed{row("eng", {0, 0, 0, 0}),
                               {"eng", ProbabilityVector({{"a", 0, 1}, {"b", 0, 1}, {"c", 0, 1}, {"d", 0, 1}}), {}}};
    CHECK_THROWS_AS(pool_statistics(mixed), DataError);
  }

  TEST_CASE("lgb row with a model") {
    std::vector<ProbabilityVector> vs;
    std::vector<BinaryLabel> golds;
    std::vector<PoolRow> pool;
    std::mt19937_64 rng(1);
    for (int i = 0; i < 60; ++i) {
      const bool hate = i % 3 == 0;
      std::array<double, 4> p{};
      for (auto& x : p) x = hate ? 0.7 + 0.3 * std::uniform_real_distribution<double>(0, 1)(rng) : 0.2;
      vs.push_back(ProbabilityVector::from_hate(p));
      golds.push_back(hate ? BinaryLabel::Hate : BinaryLabel::Neutral);
      pool.push_back({i % 2 ? "eng" : "deu", vs.back(), {}});
    }
    MetaLearnerConfig cfg;
    cfg.num_rounds = 20;
    cfg.min_data_in_leaf = 5;
    const auto model = train_meta(vs, golds, cfg);
    const auto s = pool_statistics(pool, &model);
    CHECK(s.strategies == std::vector<std::string>{"vote", "mean", "lgb"});
    CHECK(s.per_strategy_pct_hate.at("lgb").at("All") == doctest::Approx(100.0 / 3.0));
  }

  TEST_CASE("raw label breakdown, json round trip and table") {
    std::vector<PoolRow> pool{row("eng", {0.9, 0.9, 0.9, 0.9}, "Hate"), row("eng", {0.1, 0.2, 0.3, 0.4}, "Neutral"),
                              row("deu", {0.6, 0.7, 0.1, 0.1}, "Offensive")};
    const auto s = pool_statistics(pool);
    CHECK(s.raw_label_counts.at("Offensive").at("deu") == 1);
    CHECK(s.raw_label_counts.at("Hate").at("All") == 1);
    const auto back = PoolSummary::from_json(nlohmann::json::parse(s.to_json().dump()));
    CHECK(back == s);
    const auto table = s.render_table();
    CHECK(table.find("All") != std::string::npos);
    CHECK(table.find("Offensive") != std::string::npos);
  }

  TEST_CASE("pct rule agrees with per-model votes") {
    std::mt19937_64 rng(12);
    std::vector<PoolRow> pool;
    for (int i = 0; i < 300; ++i) {
      std::array<double, 4> p{};
      for (auto& x : p) x = rng() % 5 == 0 ? 0.5 : std::uniform_real_distribution<double>(0, 1)(rng);
      pool.push_back(row(i % 3 ? "eng" : "spa", p));
    }
    const auto s = pool_statistics(pool);
    for (std::size_t m = 0; m < 4; ++m) {
      std::uint64_t votes = 0;
      for (const auto& r : pool) votes += votes_hate(r.probabilities[m]) ? 1 : 0;
      CHECK(s.per_model_pct_hate.at("m" + std::to_string(m)).at("All") == 100.0 * votes / 300.0);
    }
  }

  TEST_CASE("all column is the count-weighted language mean on arbitrary pools") {
    std::mt19937_64 rng(99);
    const std::vector<std::string> langs{"eng", "deu", "spa", "vie", "other"};
    std::vector<PoolRow> pool;
    for (int i = 0; i < 997; ++i) {
      std::array<double, 4> p{};
      for (auto& x : p) x = std::uniform_real_distribution<double>(0, 1)(rng);
      pool.push_back(row(langs[rng() % langs.size()], p));
    }
    const auto s = pool_statistics(pool);
    for (const auto& model : s.models) {
      double mean = 0;
      double pct = 0;
      for (const auto& l : langs) {
        const double n = static_cast<double>(s.counts.at(l));
        mean += n * s.per_model_mean_phate.at(model).at(l);
        pct += n * s.per_model_pct_hate.at(model).at(l);
      }
      CHECK(std::abs(s.per_model_mean_phate.at(model).at("All") - mean / 997.0) <= 1e-12);
      CHECK(std::abs(s.per_model_pct_hate.at(model).at("All") - pct / 997.0) <= 1e-10);
    }
  }
}
