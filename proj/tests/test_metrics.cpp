#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "semobs/errors.hpp"
#include "semobs/metrics.hpp"
#include "semobs/prediction_log.hpp"

using namespace semobs;
using namespace semobs::metrics;

namespace {

const std::string kFixtures = SEMOBS_FIXTURE_DIR;

log::PredictionRecord record_of(Label gt, DecisionClass decision, double total_s = 0.5) {
  log::PredictionRecord r;
  r.clip_id = "t";
  r.gt = gt;
  r.decision = decision;
  r.z = decision == DecisionClass::Anomaly ? 1 : 0;
  r.total_s = total_s;
  r.infer_s = total_s;
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

ConfusionMatrix random_matrix(std::mt19937_64& rng, bool with_side = false) {
  ConfusionMatrix m;
  m.tp = static_cast<std::int64_t>(rng() % 500);
  m.tn = static_cast<std::int64_t>(rng() % 500);
  m.fp = static_cast<std::int64_t>(rng() % 500);
  m.fn = static_cast<std::int64_t>(rng() % 500);
  if (with_side && m.tn + m.fn > 0) {
    const auto budget = static_cast<std::uint64_t>(m.tn + m.fn);
    m.unknowns = static_cast<std::int64_t>(rng() % (budget / 3 + 1));
    m.unparseables = static_cast<std::int64_t>(rng() % (budget / 3 + 1));
    m.timeouts = static_cast<std::int64_t>(rng() % (budget / 3 + 1));
  }
  return m;
}

}  // namespace

TEST_CASE("fixture log scores to the static NF4+Verbose confusion matrix") {
  const auto contents =
      log::read_prediction_log_file(kFixtures + "/logs/table3_nf4_verbose.jsonl");
  const auto m = score_log(contents.records);
  CHECK(m.tp == 806);
  CHECK(m.tn == 279);
  CHECK(m.fp == 168);
  CHECK(m.fn == 909);
  CHECK(m.scored() == 2162);
  CHECK(m.unknowns == 0);
}

TEST_CASE("empty input scores to the zero matrix; latency stats reject it") {
  const std::vector<log::PredictionRecord> none;
  const auto m = score_log(none);
  CHECK(m == ConfusionMatrix{});
  CHECK_THROWS_AS(latency_stats(none, 1.0), EmptyLog);
}

TEST_CASE("scoring rule for decisions that never reached a verdict") {
  SUBCASE("anomalous gt, timed out -> fn plus side counter") {
    const std::vector<log::PredictionRecord> recs{record_of(Label::Anomaly, DecisionClass::TimedOut)};
    const auto m = score_log(recs);
    CHECK(m.fn == 1);
    CHECK(m.timeouts == 1);
    CHECK(m.tp + m.tn + m.fp == 0);
  }
  SUBCASE("normal gt, unknown/unparseable -> tn plus side counters") {
    const std::vector<log::PredictionRecord> recs{
        record_of(Label::Normal, DecisionClass::Unknown),
        record_of(Label::Normal, DecisionClass::Unparseable)};
    const auto m = score_log(recs);
    CHECK(m.tn == 2);
    CHECK(m.unknowns == 1);
    CHECK(m.unparseables == 1);
  }
  SUBCASE("missing ground truth is an error") {
    std::vector<log::PredictionRecord> recs{record_of(Label::Normal, DecisionClass::Normal)};
    recs[0].gt.reset();
    CHECK_THROWS_AS(score_log(recs), MissingGroundTruth);
  }
}

TEST_CASE("compute_scores reproduces the static NF4+Verbose column exactly") {
  const ConfusionMatrix m{806, 279, 168, 909};
  const auto s = compute_scores(m);
  REQUIRE(s.precision);
  REQUIRE(s.recall);
  REQUIRE(s.f1);
  CHECK(*s.precision == Rational::of(806, 974));
  CHECK(*s.recall == Rational::of(806, 1715));
  CHECK(*s.f1 == Rational::of(1612, 2689));
  CHECK(*s.specificity == Rational::of(279, 447));
  CHECK(s.precision->percent() == doctest::Approx(82.7515).epsilon(1e-4));
  CHECK(s.recall->percent() == doctest::Approx(46.9971).epsilon(1e-4));
  // Exact value from the table's own counts; the printed one-decimal 60.0%
  // is off its own counts by 0.052 pp.
  CHECK(s.f1->percent() == doctest::Approx(59.9479).epsilon(1e-4));
  CHECK(s.balanced_accuracy->percent() == doctest::Approx(54.7066).epsilon(1e-4));
}

TEST_CASE("compute_scores reproduces the video rows exactly") {
  const auto bf16 = compute_scores(ConfusionMatrix{51, 96, 84, 15});
  CHECK(bf16.precision->percent() == doctest::Approx(37.7778).epsilon(1e-4));
  CHECK(bf16.recall->percent() == doctest::Approx(77.2727).epsilon(1e-4));
  CHECK(bf16.f1->percent() == doctest::Approx(50.7463).epsilon(1e-4));
  CHECK(bf16.accuracy->percent() == doctest::Approx(59.7561).epsilon(1e-4));
  CHECK(bf16.balanced_accuracy->percent() == doctest::Approx(65.3030).epsilon(1e-4));
  CHECK(*bf16.specificity == Rational::of(96, 180));

  const auto nf4 = compute_scores(ConfusionMatrix{7, 162, 18, 59});
  CHECK(nf4.precision->percent() == doctest::Approx(28.0).epsilon(1e-9));
  CHECK(nf4.recall->percent() == doctest::Approx(10.6061).epsilon(1e-4));
  CHECK(nf4.f1->percent() == doctest::Approx(15.3846).epsilon(1e-4));
  CHECK(nf4.accuracy->percent() == doctest::Approx(68.6992).epsilon(1e-4));
}

TEST_CASE("all-zero matrix leaves every ratio undefined, never 0") {
  const auto s = compute_scores(ConfusionMatrix{});
  CHECK(!s.precision);
  CHECK(!s.recall);
  CHECK(!s.f1);
  CHECK(!s.accuracy);
  CHECK(!s.balanced_accuracy);
  CHECK(!s.specificity);
}

TEST_CASE("property: f1 equals the harmonic mean of precision and recall, exactly") {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 2000; ++i) {
    const auto m = random_matrix(rng);
    const auto s = compute_scores(m);
    if (!s.precision || !s.recall || !s.f1) continue;
    const Rational p = *s.precision;
    const Rational r = *s.recall;
    if (p.num == 0 && r.num == 0) continue;  // harmonic mean undefined at 0/0
    const Rational harmonic =
        Rational::of(2 * p.num * r.num, p.num * r.den + r.num * p.den);
    CHECK(*s.f1 == harmonic);
  }
}

TEST_CASE("property: matrices form a commutative monoid under +") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_matrix(rng, true);
    const auto b = random_matrix(rng, true);
    const auto c = random_matrix(rng, true);
    CHECK(a + b == b + a);
    CHECK((a + b) + c == a + (b + c));
    CHECK(a + ConfusionMatrix{} == a);
  }
}

TEST_CASE("property: score_log inverts synthesize_records") {
  std::mt19937_64 rng(31337);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_matrix(rng, true);
    SynthesisOptions opts;
    opts.shuffle_seed = rng();
    const auto records = synthesize_records(m, opts);
    CHECK(score_log(records) == m);
  }
}

TEST_CASE("property: adding a tp never lowers recall; adding an fp never raises precision") {
  std::mt19937_64 rng(5150);
  for (int i = 0; i < 1000; ++i) {
    auto m = random_matrix(rng);
    const auto before = compute_scores(m);
    auto plus_tp = m;
    plus_tp.tp += 1;
    auto plus_fp = m;
    plus_fp.fp += 1;
    const auto after_tp = compute_scores(plus_tp);
    const auto after_fp = compute_scores(plus_fp);
    if (before.recall) CHECK(*after_tp.recall >= *before.recall);
    if (before.precision) CHECK(!(*after_fp.precision > *before.precision));
  }
}

TEST_CASE("latency stats: constant logs and the nearest-rank percentile") {
  std::vector<log::PredictionRecord> constant(246, record_of(Label::Normal, DecisionClass::Normal, 0.485));
  const auto s = latency_stats(constant, 1.0);
  CHECK(s.mean_s == doctest::Approx(0.485));
  CHECK(s.p50_s == 0.485);
  CHECK(s.p95_s == 0.485);
  CHECK(s.max_s == 0.485);
  CHECK(s.violations == 0);

  std::vector<log::PredictionRecord> slow(100, record_of(Label::Normal, DecisionClass::Normal, 1.33));
  CHECK(latency_stats(slow, 1.0).violations == 100);

  std::vector<log::PredictionRecord> mixed{record_of(Label::Normal, DecisionClass::Normal, 0.4),
                                           record_of(Label::Normal, DecisionClass::Normal, 0.6)};
  CHECK(latency_stats(mixed, 1.0).mean_s == doctest::Approx(0.5));

  // Nearest rank: for 20 samples p95 is the ceil(0.95*20)=19th smallest.
  std::vector<log::PredictionRecord> ladder;
  for (int i = 1; i <= 20; ++i)
    ladder.push_back(record_of(Label::Normal, DecisionClass::Normal, 0.01 * i));
  const auto ls = latency_stats(ladder, 1.0);
  CHECK(ls.p95_s == doctest::Approx(0.19));
  CHECK(ls.p50_s == doctest::Approx(0.10));
  CHECK(ls.max_s == doctest::Approx(0.20));
}

TEST_CASE("report emission matches the frozen goldens byte for byte") {
  const std::vector<std::string> names = {"table3_nf4_verbose", "table3_int8_verbose",
                                          "table3_int8_pruned", "table4_bf16",
                                          "table4_int8",        "table4_nf4"};
  for (const auto& name : names) {
    const auto contents = log::read_prediction_log_file(kFixtures + "/logs/" + name + ".jsonl");
    REQUIRE(contents.meta.has_value());
    Fingerprint fp{contents.meta->prompt_hash, contents.meta->backend_id, contents.meta->profile,
                   contents.meta->n_min, contents.meta->deadline_s};
    const auto report = build_report(contents.records, contents.meta->deadline_s, fp);
    CHECK(emit_report(report, ReportFormat::Json, name) ==
          read_file(kFixtures + "/golden/report_" + name + ".json"));
    CHECK(emit_report(report, ReportFormat::MarkdownTable, name) ==
          read_file(kFixtures + "/golden/report_" + name + ".md"));
  }
}

TEST_CASE("report json round trips through the file reader") {
  const auto contents = log::read_prediction_log_file(kFixtures + "/logs/table4_bf16.jsonl");
  Fingerprint fp{contents.meta->prompt_hash, contents.meta->backend_id, contents.meta->profile,
                 contents.meta->n_min, contents.meta->deadline_s};
  const auto report = build_report(contents.records, 1.0, fp);

  const auto path = std::filesystem::temp_directory_path() / "semobs_report_rt.json";
  {
    std::ofstream out(path);
    out << emit_report(report, ReportFormat::Json);
  }
  const auto loaded = report_from_json_file(path.string());
  CHECK(loaded.matrix == report.matrix);
  CHECK(*loaded.scores.f1 == *report.scores.f1);
  CHECK(loaded.latency.p95_s == report.latency.p95_s);
  CHECK(loaded.fingerprint.profile == report.fingerprint.profile);
  std::filesystem::remove(path);
}
