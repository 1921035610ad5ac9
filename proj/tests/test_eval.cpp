#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontomatch/errors.hpp"
#include "ontomatch/eval.hpp"

#include "testutil.hpp"

using namespace ontomatch;

namespace {

ScoredMapping scored(std::string source, std::string target, Answer answer,
                     std::optional<double> yes = std::nullopt,
                     std::optional<double> no = std::nullopt) {
  ScoredMapping m;
  m.source = std::move(source);
  m.target = std::move(target);
  m.verdict = Verdict{answer, yes, no};
  return m;
}

}  // namespace

TEST_CASE("candidates rank Yes by falling yes score, then No by rising no score") {
  std::vector<ScoredMapping> ms = {
      scored("s:1", "t:a", Answer::Yes, 0.9, 0.1),
      scored("s:1", "t:b", Answer::No, 0.2, 0.8),
      scored("s:1", "t:c", Answer::Yes, 0.7, 0.3),
      scored("s:1", "t:d", Answer::No, 0.8, 0.2),
  };
  const std::vector<ConceptIri> expected = {"t:a", "t:c", "t:d", "t:b"};
  CHECK(rank_candidates(ms) == expected);
}

TEST_CASE("all-No lists order by ascending no score") {
  std::vector<ScoredMapping> ms = {
      scored("s:1", "t:a", Answer::No, 0.4, 0.6),
      scored("s:1", "t:b", Answer::No, 0.9, 0.1),
      scored("s:1", "t:c", Answer::No, 0.1, 0.9),
  };
  CHECK(rank_candidates(ms) == std::vector<ConceptIri>{"t:b", "t:a", "t:c"});
}

TEST_CASE("equal scores break ties by target identifier") {
  std::vector<ScoredMapping> ms = {
      scored("s:1", "t:z", Answer::Yes, 0.5, 0.5),
      scored("s:1", "t:a", Answer::Yes, 0.5, 0.5),
      scored("s:1", "t:m", Answer::Yes, 0.5, 0.5),
  };
  CHECK(rank_candidates(ms) == std::vector<ConceptIri>{"t:a", "t:m", "t:z"});
}

TEST_CASE("ranking is input-order independent and matches brute force") {
  std::mt19937_64 g(31);
  for (int round = 0; round < 120; ++round) {
    std::vector<ScoredMapping> ms;
    const std::size_t n = 1 + g() % 8;
    // Coarse probability grid provokes ties.
    const double grid[] = {0.2, 0.5, 0.8};
    for (std::size_t i = 0; i < n; ++i) {
      const double yes = grid[g() % 3];
      ms.push_back(scored("s:1", "t:" + std::to_string(i),
                          g() % 2 ? Answer::Yes : Answer::No, yes, 1.0 - yes));
    }
    const auto reference_order = testutil::brute_force_rank(ms);
    for (int shuffle = 0; shuffle < 10; ++shuffle) {
      std::shuffle(ms.begin(), ms.end(), g);
      CHECK(rank_candidates(ms) == reference_order);
    }
  }
}

TEST_CASE("ranking rejects mixed sources and missing probabilities") {
  CHECK_THROWS_AS(
      rank_candidates({scored("s:1", "t:a", Answer::Yes, 0.9, 0.1),
                       scored("s:2", "t:b", Answer::Yes, 0.8, 0.2)}),
      DataError);
  CHECK_THROWS_AS(rank_candidates({scored("s:1", "t:a", Answer::Yes)}),
                  DataError);
  CHECK(rank_candidates({}).empty());
}

TEST_CASE("thresholding keeps Yes answers at or above the cutoff") {
  const std::vector<ScoredMapping> ms = {
      scored("s:1", "t:a", Answer::Yes, 0.9, 0.1),
      scored("s:1", "t:b", Answer::Yes, 0.6, 0.4),
      scored("s:2", "t:c", Answer::No, 0.95, 0.05),
      scored("s:2", "t:d", Answer::Yes, 0.65, 0.35),
  };

  const auto at_065 = apply_threshold(ms, 0.65);
  CHECK(at_065 == std::set<MappingPair>{{"s:1", "t:a"}, {"s:2", "t:d"}});

  // Threshold 0 keeps every Yes answer; No is never predicted, whatever
  // its probabilities claim.
  const auto at_0 = apply_threshold(ms, 0.0);
  CHECK(at_0 ==
        std::set<MappingPair>{{"s:1", "t:a"}, {"s:1", "t:b"}, {"s:2", "t:d"}});
}

TEST_CASE("probability-free Yes answers survive only at threshold zero") {
  const std::vector<ScoredMapping> ms = {scored("s:1", "t:a", Answer::Yes)};
  CHECK(apply_threshold(ms, 0.0) == std::set<MappingPair>{{"s:1", "t:a"}});
  CHECK(apply_threshold(ms, 0.1).empty());
  CHECK(apply_threshold(ms, 1.0).empty());
}

TEST_CASE("thresholds outside [0,1] are rejected") {
  CHECK_THROWS_AS(apply_threshold({}, -0.01), ConfigError);
  CHECK_THROWS_AS(apply_threshold({}, 1.01), ConfigError);
}

TEST_CASE("precision, recall, and F1 follow their set definitions") {
  // 40 predictions, 31 of them in a 50-pair reference.
  std::set<MappingPair> pred;
  std::set<MappingPair> ref;
  for (int i = 0; i < 50; ++i) ref.insert({"s:" + std::to_string(i), "t:x"});
  for (int i = 0; i < 31; ++i) pred.insert({"s:" + std::to_string(i), "t:x"});
  for (int i = 0; i < 9; ++i) pred.insert({"w:" + std::to_string(i), "t:x"});

  const auto m = prf_metrics(pred, ref);
  CHECK(m.precision == doctest::Approx(0.775).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.62).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(2 * 0.775 * 0.62 / (0.775 + 0.62)).epsilon(1e-12));

  const auto perfect = prf_metrics(ref, ref);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  const auto disjoint = prf_metrics({{"a", "b"}}, ref);
  CHECK(disjoint.precision == 0.0);
  CHECK(disjoint.recall == 0.0);
  CHECK(disjoint.f1 == 0.0);

  const auto empty_pred = prf_metrics({}, ref);
  CHECK(empty_pred.precision == 0.0);
  CHECK(empty_pred.f1 == 0.0);

  CHECK_THROWS_AS(prf_metrics(pred, {}), DataError);
}

TEST_CASE("hits and reciprocal ranks average over the reference") {
  std::map<ConceptIri, std::vector<ConceptIri>> ranked = {
      {"s:1", {"t:gt1", "t:x", "t:y"}},
      {"s:2", {"t:x", "t:gt2", "t:y"}},
      {"s:3", {"t:x", "t:y", "t:z", "t:gt3"}},
  };
  const std::set<MappingPair> ref = {
      {"s:1", "t:gt1"}, {"s:2", "t:gt2"}, {"s:3", "t:gt3"}};

  const auto m1 = ranking_metrics(ranked, ref, 1);
  CHECK(m1.hits_at_k == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(m1.mrr ==
        doctest::Approx((1.0 + 1.0 / 2.0 + 1.0 / 4.0) / 3.0).epsilon(1e-12));

  // K at or past every list length catches everything.
  CHECK(ranking_metrics(ranked, ref, 4).hits_at_k == 1.0);
  CHECK(ranking_metrics(ranked, ref, 2).hits_at_k ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  SUBCASE("a reference source without a ranked list is named in the error") {
    std::set<MappingPair> wider = ref;
    wider.insert({"s:9", "t:gt9"});
    try {
      ranking_metrics(ranked, wider, 1);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("s:9") != std::string::npos);
    }
  }

  SUBCASE("a list missing its ground truth is an error") {
    ranked["s:2"] = {"t:x", "t:y"};
    CHECK_THROWS_AS(ranking_metrics(ranked, ref, 1), DataError);
  }
}

TEST_CASE("rejection rate is the fully-rejected fraction of unmatched sources") {
  auto set_for = [](std::string source) {
    CandidateSet cs;
    cs.source = std::move(source);
    cs.candidates = {"t:a", "t:b"};
    return cs;
  };
  const std::vector<CandidateSet> unmatched = {set_for("u:1"), set_for("u:2")};

  CHECK(rejection_rate({}, unmatched) == 1.0);
  CHECK(rejection_rate({{"u:1", "t:a"}}, unmatched) == 0.5);
  CHECK(rejection_rate({{"u:1", "t:a"}, {"u:2", "t:b"}}, unmatched) == 0.0);
  // Predictions for other sources leave the rate untouched.
  CHECK(rejection_rate({{"s:1", "t:a"}}, unmatched) == 1.0);
  CHECK_THROWS_AS(rejection_rate({}, {}), DataError);
}

TEST_CASE("a scorer that mirrors the reference yields a perfect report") {
  std::mt19937_64 g(77);
  const auto rr = testutil::random_run(g, 6, 8);

  // Rewrite verdicts so exactly the reference pairs are confident Yes.
  std::vector<ScoredMapping> run = rr.run;
  for (ScoredMapping& m : run) {
    const bool truth = rr.reference.matched.count({m.source, m.target}) > 0;
    m.verdict = truth ? Verdict{Answer::Yes, 1.0, 0.0}
                      : Verdict{Answer::No, 0.0, 1.0};
  }

  EvalSettings settings;
  settings.scorer_id = "mock";
  const auto report = build_report(rr.subset, rr.reference, run, settings);
  CHECK(report.precision == 1.0);
  CHECK(report.recall == 1.0);
  CHECK(report.f1 == 1.0);
  CHECK(report.hits_at_1 == 1.0);
  CHECK(report.mrr == 1.0);
  CHECK(report.rejection_rate == 1.0);
  CHECK(report.counts.predicted == rr.reference.matched.size());
  CHECK(report.counts.true_positives == rr.reference.matched.size());
  CHECK(report.counts.reference == rr.reference.matched.size());
  CHECK(report.counts.unmatched_sources ==
        rr.reference.unmatched_sources.size());
}

TEST_CASE("reports agree with an independent recomputation on random runs") {
  std::mt19937_64 g(20240817);
  const double taus[] = {0.0, 0.3, 0.65, 0.9, 1.0};
  for (int round = 0; round < 300; ++round) {
    const auto rr = testutil::random_run(g, 10, 12);
    const double tau = taus[g() % 5];
    EvalSettings settings;
    settings.threshold = tau;
    settings.scorer_id = "random";

    const auto report = build_report(rr.subset, rr.reference, rr.run, settings,
                                     round % 2 ? ExecMode::Parallel
                                               : ExecMode::Serial);
    const auto oracle = testutil::oracle_report(rr.subset, rr.run, tau);

    CHECK(report.precision == doctest::Approx(oracle.precision).epsilon(1e-12));
    CHECK(report.recall == doctest::Approx(oracle.recall).epsilon(1e-12));
    CHECK(report.f1 == doctest::Approx(oracle.f1).epsilon(1e-12));
    CHECK(report.rejection_rate ==
          doctest::Approx(oracle.rejection_rate).epsilon(1e-12));
    REQUIRE(report.hits_at_1.has_value());
    REQUIRE(report.mrr.has_value());
    CHECK(*report.hits_at_1 == doctest::Approx(*oracle.hits_at_1).epsilon(1e-12));
    CHECK(*report.mrr == doctest::Approx(*oracle.mrr).epsilon(1e-12));
    CHECK(report.counts.predicted == oracle.predicted);
    CHECK(report.counts.true_positives == oracle.true_positives);
  }
}

TEST_CASE("serial and parallel reports are bit-identical") {
  std::mt19937_64 g(4242);
  for (int round = 0; round < 25; ++round) {
    const auto rr = testutil::random_run(g, 12, 10);
    EvalSettings settings;
    settings.threshold = 0.5;
    settings.scorer_id = "x";
    const auto serial =
        build_report(rr.subset, rr.reference, rr.run, settings, ExecMode::Serial);
    const auto parallel = build_report(rr.subset, rr.reference, rr.run, settings,
                                       ExecMode::Parallel);
    CHECK(serial == parallel);
    CHECK(serialize_report(serial) == serialize_report(parallel));
  }
}

TEST_CASE("ranking metrics ignore the threshold; set metrics move with it") {
  std::mt19937_64 g(515);
  for (int round = 0; round < 40; ++round) {
    const auto rr = testutil::random_run(g, 8, 9);
    EvalSettings settings;
    settings.scorer_id = "x";

    std::optional<EvalReport> previous;
    for (const double tau : {0.0, 0.65, 0.9}) {
      settings.threshold = tau;
      const auto report =
          build_report(rr.subset, rr.reference, rr.run, settings);
      if (previous) {
        // Bit-identical ranking across thresholds.
        CHECK(*report.hits_at_1 == *previous->hits_at_1);
        CHECK(*report.mrr == *previous->mrr);
        // Raising the threshold can only shrink the prediction set.
        CHECK(report.counts.predicted <= previous->counts.predicted);
        CHECK(report.recall <= previous->recall);
        CHECK(report.rejection_rate >= previous->rejection_rate);
      }
      previous = report;
    }
  }
}

TEST_CASE("runs without probabilities produce set metrics only") {
  std::mt19937_64 g(900);
  const auto rr = testutil::random_run(g, 5, 6, /*with_probs=*/false);
  EvalSettings settings;
  settings.scorer_id = "completion";
  const auto report = build_report(rr.subset, rr.reference, rr.run, settings);
  CHECK_FALSE(report.hits_at_1.has_value());
  CHECK_FALSE(report.mrr.has_value());
  CHECK(report.rejection_rate >= 0.0);

  // One probability-free verdict among many is enough to disable ranking.
  auto mixed = testutil::random_run(g, 5, 6);
  mixed.run.front().verdict.yes_prob.reset();
  mixed.run.front().verdict.no_prob.reset();
  const auto mixed_report =
      build_report(mixed.subset, mixed.reference, mixed.run, settings);
  CHECK_FALSE(mixed_report.hits_at_1.has_value());
  CHECK_FALSE(mixed_report.mrr.has_value());
}

TEST_CASE("reports demand exactly one verdict per subset pair") {
  std::mt19937_64 g(1001);
  const auto rr = testutil::random_run(g, 4, 5);
  EvalSettings settings;
  settings.scorer_id = "x";

  SUBCASE("a missing pair is listed in the error") {
    auto run = rr.run;
    const auto dropped = run.back();
    run.pop_back();
    try {
      build_report(rr.subset, rr.reference, run, settings);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(dropped.source) != std::string::npos);
      CHECK(msg.find(dropped.target) != std::string::npos);
    }
  }

  SUBCASE("duplicate verdicts for one pair are rejected") {
    auto run = rr.run;
    run.push_back(run.front());
    CHECK_THROWS_AS(build_report(rr.subset, rr.reference, run, settings),
                    DataError);
  }

  SUBCASE("verdicts for pairs outside the subset are rejected") {
    auto run = rr.run;
    run.push_back(scored("s:ghost", "t:ghost", Answer::No, 0.1, 0.9));
    CHECK_THROWS_AS(build_report(rr.subset, rr.reference, run, settings),
                    DataError);
  }

  SUBCASE("an out-of-range threshold is a config error") {
    settings.threshold = 1.5;
    CHECK_THROWS_AS(build_report(rr.subset, rr.reference, rr.run, settings),
                    ConfigError);
  }
}

TEST_CASE("serialized reports pin six decimals and null ranking fields") {
  EvalReport report;
  report.precision = 0.775;
  report.recall = 0.62;
  report.f1 = 0.6888888888888889;
  report.hits_at_1 = 1.0 / 3.0;
  report.mrr = 0.5833333333333334;
  report.rejection_rate = 0.5;
  report.counts = {40, 50, 10, 31};
  report.settings.threshold = 0.65;
  report.settings.with_hierarchy = true;
  report.settings.scorer_id = "llm-endpoint:gpt-4:labels";
  report.settings.seed = 12345;

  const std::string text = serialize_report(report);
  CHECK(text.back() == '\n');
  CHECK(text.find("\"precision\": 0.775000") != std::string::npos);
  CHECK(text.find("\"recall\": 0.620000") != std::string::npos);
  CHECK(text.find("\"f1\": 0.688889") != std::string::npos);
  CHECK(text.find("\"hits_at_1\": 0.333333") != std::string::npos);
  CHECK(text.find("\"mrr\": 0.583333") != std::string::npos);
  CHECK(text.find("\"rejection_rate\": 0.500000") != std::string::npos);
  CHECK(text.find("\"threshold\": 0.650000") != std::string::npos);
  CHECK(text.find("\"seed\": 12345") != std::string::npos);

  const auto parsed = nlohmann::json::parse(text);
  CHECK(parsed["counts"]["predicted"] == 40);
  CHECK(parsed["counts"]["reference"] == 50);
  CHECK(parsed["settings"]["with_hierarchy"] == true);
  CHECK(parsed["settings"]["scorer_id"] == "llm-endpoint:gpt-4:labels");

  report.hits_at_1.reset();
  report.mrr.reset();
  const std::string prob_free = serialize_report(report);
  CHECK(prob_free.find("\"hits_at_1\": null") != std::string::npos);
  CHECK(prob_free.find("\"mrr\": null") != std::string::npos);
  CHECK(nlohmann::json::parse(prob_free)["hits_at_1"].is_null());
}

TEST_CASE("scored runs round-trip through JSON Lines") {
  std::mt19937_64 g(606);
  const auto rr = testutil::random_run(g, 6, 7);
  const std::string text = serialize_scored_run(rr.run);
  CHECK(parse_scored_run(text) == rr.run);

  // Probability-free verdicts serialize their probabilities as null.
  std::vector<ScoredMapping> bare = {scored("s:1", "t:a", Answer::Yes)};
  const std::string line = serialize_scored_run(bare);
  CHECK(line.find("\"yes_prob\":null") != std::string::npos);
  CHECK(parse_scored_run(line) == bare);

  const std::size_t lines =
      static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  CHECK(lines == rr.run.size());
}

TEST_CASE("scored-run parsing pinpoints bad lines") {
  const std::string good =
      R"({"source":"s:1","target":"t:a","answer":"Yes","yes_prob":0.9,"no_prob":0.1})";
  try {
    parse_scored_run(good + "\n{\"source\":\"s:2\"}\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scored_run("{\"source\":1}\n"), ParseError);
  CHECK_THROWS_AS(
      parse_scored_run(
          R"({"source":"s","target":"t","answer":"Maybe","yes_prob":null,"no_prob":null})"
          "\n"),
      ParseError);
  CHECK(parse_scored_run("").empty());
}
