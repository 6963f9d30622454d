// Copyright 2026 The Instructkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <random>
#include <string>

#include "doctest.h"
#include "instructkit/error.h"
#include "instructkit/evalreport.h"
#include "instructkit/random.h"
#include "instructkit/util.h"
#include "oracles.h"
#include "table_fixture.h"

namespace ik = instructkit;
using ik::Dimension;

namespace {

ik::AnnotationRecord Rec(std::string item, std::string annotator, Dimension d,
                         std::string label, std::string model = "") {
  return {std::move(item), std::move(annotator), d, std::move(label),
          ik::ParseRfc3339("2024-05-01T00:00:00Z"), std::move(model)};
}

size_t ColumnOf(const ik::ProportionTable& t, const std::string& model) {
  return std::find(t.models.begin(), t.models.end(), model) - t.models.begin();
}

}  // namespace

TEST_SUITE("evalreport") {
  TEST_CASE("dimension schemas") {
    CHECK(ik::DimensionName(Dimension::kExplanationQuality) == "explanation_quality");
    CHECK(ik::ParseDimension("validity") == Dimension::kValidity);
    CHECK_FALSE(ik::ParseDimension("fluency").has_value());
    CHECK(ik::RubricDimensions().size() == 5);
    const auto& v = ik::DimensionSchema::For(Dimension::kValidity);
    CHECK(v.Rank("valid_and_ready") == 2);
    CHECK(v.Rank("invalid") == 0);
    CHECK(v.AscendingLabels() ==
          std::vector<std::string>{"invalid", "valid", "valid_and_ready"});
    CHECK_THROWS_AS(v.Rank("meh"), ik::ValidationError);
    CHECK_THROWS_AS(ik::DimensionSchema::For(Dimension::kCategory).Rank("grammar"),
                    ik::ValidationError);
    CHECK(ik::DimensionSchema::For(Dimension::kExplanationQuality).Rank("weak_no") == 1);
  }

  TEST_CASE("annotation records round trip and validation") {
    auto r = Rec("generated-1-1", "ann-1", Dimension::kValidity, "valid", "sft-70k");
    auto back = ik::ParseAnnotationsJsonl(ik::AnnotationToJsonLine(r) + "\n", "mem");
    REQUIRE(back.size() == 1);
    CHECK(back[0] == r);
    auto plain = Rec("generated-1-1", "ann-1", Dimension::kValidity, "valid");
    CHECK(ik::AnnotationToJsonLine(plain).find("model_id") == std::string::npos);
    auto expect_error = [](const std::string& text, const std::string& needle) {
      try {
        ik::ParseAnnotationsJsonl(text, "file.jsonl");
        FAIL("expected a validation error");
      } catch (const ik::ValidationError& e) {
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
      }
    };
    const std::string good =
        R"({"item_id":"a","annotator_id":"x","dimension":"validity","label":"valid","timestamp":"2024-05-01T00:00:00Z"})";
    expect_error(good + "\n{\"item_id\": 1}\n", "file.jsonl:2:");
    expect_error(R"({"item_id":"a","annotator_id":"x","dimension":"validity","label":"great","timestamp":"2024-05-01T00:00:00Z"})",
                 "label 'great'");
    expect_error(R"({"item_id":"a","annotator_id":"x","dimension":"fluency","label":"valid","timestamp":"2024-05-01T00:00:00Z"})",
                 "fluency");
    expect_error(R"({"item_id":"a","annotator_id":"x","dimension":"validity","label":"valid","timestamp":"yesterday"})",
                 "file.jsonl:1:");
    expect_error(R"({"item_id":"a","annotator_id":"x","dimension":"validity","label":"valid","timestamp":"2024-05-01T00:00:00Z","extra":1})",
                 "unknown field 'extra'");
    expect_error("not json\n", "file.jsonl:1:");
  }

  TEST_CASE("model output records") {
    ik::ModelOutputRecord m{"generated-3-2", "mistral", "An answer.", "Because.", "B"};
    auto back = ik::ParseModelOutputsJsonl(ik::ModelOutputToJsonLine(m) + "\n", "mem");
    REQUIRE(back.size() == 1);
    CHECK(back[0] == m);
    const std::string line = ik::ModelOutputToJsonLine(m) + "\n";
    CHECK_THROWS_AS(ik::ParseModelOutputsJsonl(line + line, "mem"), ik::ValidationError);
  }

  TEST_CASE("rounding helpers") {
    CHECK(ik::FormatHundredths(6350) == "63.50");
    CHECK(ik::FormatHundredths(5) == "0.05");
    CHECK(ik::HundredthsHalfUp(127, 200) == 6350);
    CHECK(ik::HundredthsHalfUp(1, 3) == 3333);
    CHECK(ik::HundredthsHalfUp(2, 3) == 6667);
    CHECK(ik::HundredthsHalfUp(1, 8) == 1250);
    CHECK(ik::HundredthsHalfUp(1, 16) == 625);
    CHECK(ik::HundredthsHalfUp(1, 32000) == 0);
    CHECK(ik::HundredthsHalfUp(1, 20000) == 1);
    std::vector<int64_t> thirds = {1, 1, 1};
    CHECK(ik::ApportionHundredths(thirds) == std::vector<int64_t>{3334, 3333, 3333});
    std::vector<int64_t> sevenths = {1, 2, 4};
    auto s = ik::ApportionHundredths(sevenths);
    CHECK(s[0] + s[1] + s[2] == 10000);
    CHECK(s == std::vector<int64_t>{1429, 2857, 5714});
    std::vector<int64_t> zero = {0, 0};
    CHECK_THROWS_AS(ik::ApportionHundredths(zero), ik::ValidationError);
  }

  TEST_CASE("apportioned columns sum to one hundred and stay near half-up") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<int64_t> counts(2 + gen() % 8);
      for (auto& c : counts) c = static_cast<int64_t>(gen() % 50);
      counts[0] += 1;
      const int64_t total = std::accumulate(counts.begin(), counts.end(), int64_t{0});
      auto h = ik::ApportionHundredths(counts);
      CHECK(std::accumulate(h.begin(), h.end(), int64_t{0}) == 10000);
      for (size_t i = 0; i < counts.size(); ++i) {
        CHECK(std::abs(h[i] - ik::HundredthsHalfUp(counts[i], total)) <= 1);
        CHECK(h[i] * total <= counts[i] * 10000 + total);
        CHECK(h[i] * total >= counts[i] * 10000 - total);
      }
    }
  }

  TEST_CASE("published proportions are reproduced") {
    auto records = ik::testing::TableRecords();
    for (Dimension d : {Dimension::kValidity, Dimension::kOutputCorrectness,
                        Dimension::kExplanationQuality}) {
      auto t = ik::ComputeProportions(records, d, ik::testing::TableModels());
      for (size_t m = 0; m < t.models.size(); ++m) {
        CHECK(t.totals[m] == 200);
        int64_t sum = 0;
        for (size_t l = 0; l < t.labels.size(); ++l) sum += t.hundredths[l][m];
        CHECK(sum == 10000);
      }
      for (const auto& c : ik::testing::PublishedColumns()) {
        if (c.dimension != d) continue;
        size_t m = ColumnOf(t, c.model);
        for (size_t l = 0; l < t.labels.size(); ++l) {
          CHECK_MESSAGE(t.hundredths[l][m] == c.hundredths[l],
                        c.model << " " << t.labels[l]);
        }
      }
    }
    auto validity = ik::ComputeProportions(records, Dimension::kValidity,
                                           ik::testing::TableModels());
    size_t sft70 = ColumnOf(validity, "sft-70k");
    CHECK(validity.counts[0][sft70] == 127);
    CHECK(validity.counts[1][sft70] == 45);
    CHECK(validity.counts[2][sft70] == 28);
    CHECK(validity.Percent(0, sft70) == doctest::Approx(63.5));
    size_t gpt = ColumnOf(validity, "gpt-3.5");
    CHECK(validity.counts[0][gpt] == 126);
    CHECK(validity.counts[1][gpt] == 47);
    CHECK(validity.counts[2][gpt] == 27);
    std::string text = ik::RenderProportions(std::vector{validity}, ik::TableFormat::kText);
    CHECK(text.find("63.50") != std::string::npos);
    CHECK(text.find("valid_and_ready") != std::string::npos);
    std::string csv = ik::RenderProportions(std::vector{validity}, ik::TableFormat::kCsv);
    CHECK(csv.rfind("dimension,label,dolly-2,mistral", 0) == 0);
    CHECK(csv.find("validity,valid_and_ready,11.50,44.50,63.00,25.50,56.50,56.00,63.50\n") !=
          std::string::npos);
  }

  TEST_CASE("missing labels are listed") {
    std::vector<ik::AnnotationRecord> r = {
        Rec("i1", "a", Dimension::kValidity, "valid", "m1"),
        Rec("i1", "a", Dimension::kValidity, "valid", "m2"),
        Rec("i2", "a", Dimension::kValidity, "invalid", "m1")};
    try {
      ik::ComputeProportions(r, Dimension::kValidity);
      FAIL("expected a validation error");
    } catch (const ik::ValidationError& e) {
      CHECK(std::string(e.what()).find("(i2, m2)") != std::string::npos);
    }
  }

  TEST_CASE("resolution modes") {
    std::vector<ik::AnnotationRecord> r = {
        Rec("i1", "a", Dimension::kValidity, "valid"),
        Rec("i1", "b", Dimension::kValidity, "invalid"),
        Rec("i2", "a", Dimension::kValidity, "valid"),
        Rec("i2", "b", Dimension::kValidity, "valid"),
        Rec("i2", "c", Dimension::kValidity, "invalid"),
        Rec("i3", "a", Dimension::kCategory, "vocabulary"),
        Rec("i3", "b", Dimension::kCategory, "grammar")};
    CHECK_THROWS_AS(ik::ResolveLabels(r, Dimension::kValidity, ik::ResolutionMode::kAdjudicated),
                    ik::ValidationError);
    auto m = ik::ResolveLabels(r, Dimension::kValidity, ik::ResolutionMode::kMajority);
    CHECK(m.at({"i1", ""}) == "invalid");
    CHECK(m.at({"i2", ""}) == "valid");
    auto c = ik::ResolveLabels(r, Dimension::kCategory, ik::ResolutionMode::kMajority);
    CHECK(c.at({"i3", ""}) == "grammar");
    CHECK(ik::ParseResolutionMode("majority") == ik::ResolutionMode::kMajority);
    CHECK_FALSE(ik::ParseResolutionMode("vote").has_value());
  }

  TEST_CASE("published head-to-head cell") {
    auto records = ik::testing::TableRecords();
    auto w = ik::ComputeWinTie(records, Dimension::kValidity, "dolly-2", "mistral");
    CHECK(w.shared_items == 200);
    CHECK(w.win_a == 17);
    CHECK(w.win_b == 142);
    CHECK(w.tie == 41);
    CHECK(ik::FormatHundredths(w.win_a_hundredths) == "8.50");
    CHECK(ik::FormatHundredths(w.win_b_hundredths) == "71.00");
    CHECK(ik::FormatHundredths(w.tie_hundredths) == "20.50");
  }

  TEST_CASE("win matrix is antisymmetric and ties are symmetric") {
    auto records = ik::testing::TableRecords();
    for (Dimension d : {Dimension::kValidity, Dimension::kOutputCorrectness,
                        Dimension::kExplanationQuality}) {
      auto m = ik::ComputeWinTieMatrix(records, d, ik::testing::TableModels());
      for (size_t i = 0; i < m.models.size(); ++i) {
        CHECK_FALSE(m.cells[i][i].has_value());
        for (size_t j = 0; j < m.models.size(); ++j) {
          if (i == j) continue;
          const auto& a = *m.cells[i][j];
          const auto& b = *m.cells[j][i];
          CHECK(a.win_a == b.win_b);
          CHECK(a.tie == b.tie);
          CHECK(a.win_a + a.win_b + a.tie == a.shared_items);
        }
      }
    }
    std::string text = ik::RenderWinTie(
        std::vector{ik::ComputeWinTieMatrix(records, Dimension::kValidity,
                                            ik::testing::TableModels())},
        ik::TableFormat::kText);
    CHECK(text.find("win-rate") != std::string::npos);
    CHECK(text.find("tie-rate") != std::string::npos);
    CHECK_THROWS_AS(ik::ComputeWinTie(records, Dimension::kCategory, "a", "b"),
                    ik::ValidationError);
  }

  TEST_CASE("comparisons do not depend on label spelling order") {
    // Swapping two models swaps wins; reversing every rank swaps wins too.
    auto records = ik::testing::TableRecords();
    auto ab = ik::ComputeWinTie(records, Dimension::kExplanationQuality, "gpt-3.5", "sft-17k");
    auto ba = ik::ComputeWinTie(records, Dimension::kExplanationQuality, "sft-17k", "gpt-3.5");
    CHECK(ab.win_a_hundredths == ba.win_b_hundredths);
    CHECK(ab.tie_hundredths == ba.tie_hundredths);
    const auto& labels = ik::DimensionSchema::For(Dimension::kExplanationQuality).labels;
    auto flipped = records;
    for (auto& r : flipped) {
      if (r.dimension != Dimension::kExplanationQuality) continue;
      size_t i = std::find(labels.begin(), labels.end(), r.label) - labels.begin();
      r.label = labels[labels.size() - 1 - i];
    }
    auto f = ik::ComputeWinTie(flipped, Dimension::kExplanationQuality, "gpt-3.5", "sft-17k");
    CHECK(f.win_a == ab.win_b);
    CHECK(f.win_b == ab.win_a);
    CHECK(f.tie == ab.tie);
  }

  TEST_CASE("agreement per dimension matches the oracle") {
    ik::Rng rng(5);
    std::vector<ik::AnnotationRecord> records;
    for (int i = 0; i < 40; ++i) {
      for (const char* ann : {"a0", "a1", "a2"}) {
        for (Dimension d : {Dimension::kValidity, Dimension::kOutputCorrectness}) {
          const auto& labels = ik::DimensionSchema::For(d).labels;
          std::string label = labels[(i + (rng.UniformIndex(4) == 0 ? 1 : 0)) % labels.size()];
          records.push_back(Rec("item-" + std::to_string(i), ann, d, label, "m"));
        }
      }
    }
    std::vector<Dimension> dims = {Dimension::kValidity, Dimension::kOutputCorrectness};
    auto reports = ik::EvaluateAgreement(records, dims);
    REQUIRE(reports.size() == 2);
    for (size_t k = 0; k < 2; ++k) {
      const auto& schema = ik::DimensionSchema::For(dims[k]);
      CHECK(reports[k].dimension == ik::DimensionName(dims[k]));
      REQUIRE(reports[k].pairs.size() == 3);
      double sum = 0;
      for (const auto& p : reports[k].pairs) {
        std::vector<ik::Rating> ratings;
        for (const auto& r : records) {
          if (r.dimension != dims[k]) continue;
          if (r.annotator_id != p.annotator_a && r.annotator_id != p.annotator_b) continue;
          ratings.push_back({r.item_id + "\x1f" + r.model_id, r.annotator_id, r.label});
        }
        auto o = ik::testing::OracleAlpha(ratings, schema.level(), schema.AscendingLabels());
        CHECK(p.alpha == doctest::Approx(o.alpha).epsilon(1e-9));
        sum += p.alpha;
      }
      CHECK(reports[k].average_alpha == doctest::Approx(sum / 3));
    }
    std::string text = ik::RenderAgreement(reports, ik::TableFormat::kText);
    CHECK(text.find("average alpha: validity ") != std::string::npos);
  }

  TEST_CASE("model outputs of one item are separate units") {
    std::vector<ik::AnnotationRecord> records;
    for (const char* model : {"m1", "m2"}) {
      for (const char* ann : {"a", "b"}) {
        records.push_back(Rec("i1", ann, Dimension::kOutputCorrectness,
                              std::string(model) == "m1" ? "right" : "wrong", model));
        records.push_back(Rec("i2", ann, Dimension::kOutputCorrectness,
                              std::string(model) == "m1" ? "wrong" : "right", model));
      }
    }
    std::vector<Dimension> dims = {Dimension::kOutputCorrectness};
    auto reports = ik::EvaluateAgreement(records, dims);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].average_alpha == doctest::Approx(1.0));
  }

  TEST_CASE("category and skill distributions") {
    std::vector<ik::AnnotationRecord> records = {
        Rec("i1", "a", Dimension::kCategory, "grammar"),
        Rec("i1", "b", Dimension::kCategory, "grammar"),
        Rec("i2", "a", Dimension::kCategory, "prose_reply"),
        Rec("i2", "b", Dimension::kCategory, "figurative"),
        Rec("i3", "a", Dimension::kCategory, "build_a_sentence"),
        Rec("i1", "a", Dimension::kSkill, "writing"),
        Rec("i2", "a", Dimension::kSkill, "reading_writing"),
        Rec("i3", "a", Dimension::kSkill, "writing")};
    auto rep = ik::CategoryDistribution(records);
    REQUIRE(rep.category.has_value());
    REQUIRE(rep.skill.has_value());
    CHECK(rep.category->labels.size() == 9);
    CHECK(rep.category->total == 3);
    auto count = [](const ik::Distribution& d, const std::string& l) {
      return d.counts[std::find(d.labels.begin(), d.labels.end(), l) - d.labels.begin()];
    };
    CHECK(count(*rep.category, "grammar") == 1);
    CHECK(count(*rep.category, "figurative") == 1);
    CHECK(count(*rep.category, "prose_reply") == 0);
    CHECK(count(*rep.skill, "writing") == 2);
    CHECK(std::accumulate(rep.skill->hundredths.begin(), rep.skill->hundredths.end(),
                          int64_t{0}) == 10000);
    std::string csv = ik::RenderCategories(rep, ik::TableFormat::kCsv);
    CHECK(csv.find("skill,writing,2,66.67") != std::string::npos);
    CHECK_THROWS_AS(ik::CategoryDistribution(std::vector<ik::AnnotationRecord>{}),
                    ik::ValidationError);
  }
}
