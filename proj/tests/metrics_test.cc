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
#include <cmath>

#include "doctest.h"
#include "instructkit/error.h"
#include "instructkit/metrics.h"
#include "instructkit/random.h"
#include "oracles.h"

namespace ik = instructkit;

namespace {

ik::TokenSequence Seq(std::initializer_list<const char*> words) {
  ik::TokenSequence s;
  for (const char* w : words) s.tokens.emplace_back(w);
  return s;
}

std::vector<ik::Rating> Ratings(
    std::initializer_list<std::tuple<const char*, const char*, const char*>> rows) {
  std::vector<ik::Rating> out;
  for (const auto& [item, who, label] : rows) out.push_back({item, who, label});
  return out;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("tokenizer") {
    CHECK(ik::Tokenize("Paraphrase the following sentence.").tokens ==
          std::vector<std::string>{"paraphrase", "the", "following", "sentence"});
    CHECK(ik::Tokenize("  \"Hello,\"  WORLD!! ").tokens ==
          std::vector<std::string>{"hello", "world"});
    CHECK(ik::Tokenize("don't e-mail").tokens ==
          std::vector<std::string>{"don't", "e-mail"});
    CHECK(ik::Tokenize("... --- !!!").empty());
    CHECK(ik::Tokenize("caf\xC3\xA9\xE2\x80\x94").tokens ==
          std::vector<std::string>{"caf\xC3\xA9"});
    CHECK(ik::Tokenize("a\xC2\xA0" "b").size() == 2);
  }

  TEST_CASE("lcs and rouge basics") {
    auto a = Seq({"paraphrase", "the", "sentence"});
    auto b = Seq({"paraphrase", "the", "following", "sentence"});
    CHECK(ik::LcsLength(a, b) == 3);
    CHECK(ik::RougeLF1(a, b) == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
    CHECK(ik::RougeLF1(a, a) == 1.0);
    CHECK(ik::RougeLF1(a, ik::TokenSequence{}) == 0.0);
    CHECK(ik::RougeLF1(ik::TokenSequence{}, ik::TokenSequence{}) == 0.0);
    CHECK(ik::RougeLF1(Seq({"x"}), Seq({"y"})) == 0.0);
    CHECK(ik::RougeLF1(a, b) == ik::RougeLF1(b, a));
  }

  TEST_CASE("rouge matches the oracle on random pairs") {
    ik::Rng rng(11);
    const char* alphabet[] = {"a", "b", "c", "d"};
    for (int trial = 0; trial < 300; ++trial) {
      ik::TokenSequence x, y;
      size_t nx = rng.UniformIndex(15), ny = rng.UniformIndex(15);
      for (size_t i = 0; i < nx; ++i) x.tokens.push_back(alphabet[rng.UniformIndex(4)]);
      for (size_t i = 0; i < ny; ++i) y.tokens.push_back(alphabet[rng.UniformIndex(4)]);
      CHECK(ik::LcsLength(x, y) == ik::testing::OracleLcs(x.tokens, y.tokens));
      CHECK(ik::RougeLF1(x, y) == ik::testing::OracleRougeF1(x.tokens, y.tokens));
    }
  }

  TEST_CASE("rouge matches the oracle on all short binary sequences") {
    std::vector<ik::TokenSequence> all = {ik::TokenSequence{}};
    for (size_t begin = 0; begin < all.size(); ++begin) {
      if (all[begin].size() == 10) continue;
      for (const char* sym : {"x", "y"}) {
        ik::TokenSequence t = all[begin];
        t.tokens.push_back(sym);
        all.push_back(t);
      }
    }
    REQUIRE(all.size() == 2047);
    size_t mismatches = 0;
    for (const auto& a : all) {
      for (const auto& b : all) {
        mismatches += ik::LcsLength(a, b) != ik::testing::OracleLcs(a.tokens, b.tokens);
      }
    }
    CHECK(mismatches == 0);
  }

  TEST_CASE("lcs past one machine word and with long tokens") {
    // Shared seven-byte prefixes, the empty token and tokens past 255 bytes
    // all need the full comparison.
    const std::vector<std::string> vocab = {
        "abcdefgX", "abcdefgY", "abcdefg", "", "a", std::string(300, 'q'),
        std::string(299, 'q') + "r", std::string(300, 'q') + "r", "abcdefgXY"};
    ik::Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      ik::TokenSequence x, y;
      const size_t nx = rng.UniformIndex(150), ny = rng.UniformIndex(150);
      for (size_t i = 0; i < nx; ++i) x.tokens.push_back(vocab[rng.UniformIndex(vocab.size())]);
      for (size_t i = 0; i < ny; ++i) y.tokens.push_back(vocab[rng.UniformIndex(vocab.size())]);
      CHECK(ik::LcsLength(x, y) == ik::testing::OracleLcs(x.tokens, y.tokens));
      CHECK(ik::RougeLF1(x, y) == ik::testing::OracleRougeF1(x.tokens, y.tokens));
    }
    ik::TokenSequence word(std::vector<std::string>(64, "w"));
    ik::TokenSequence longer(std::vector<std::string>(65, "w"));
    CHECK(ik::LcsLength(word, word) == 64);
    CHECK(ik::LcsLength(longer, word) == 64);
    CHECK(ik::LcsLength(longer, longer) == 65);
  }

  TEST_CASE("alpha perfect agreement is exactly one") {
    ik::AgreementInput in;
    in.records = Ratings({{"1", "a", "x"}, {"1", "b", "x"}, {"2", "a", "y"},
                          {"2", "b", "y"}, {"3", "a", "x"}, {"3", "b", "x"}});
    auto r = ik::KrippendorffAlpha(in);
    CHECK(r.alpha == 1.0);
    CHECK_FALSE(r.degenerate);
    CHECK(r.pairable_values == 6);
    CHECK(r.units == 3);
  }

  TEST_CASE("alpha single label is degenerate") {
    ik::AgreementInput in;
    in.records = Ratings({{"1", "a", "x"}, {"1", "b", "x"}, {"2", "a", "x"},
                          {"2", "b", "x"}});
    auto r = ik::KrippendorffAlpha(in);
    CHECK(r.alpha == 1.0);
    CHECK(r.degenerate);
  }

  TEST_CASE("alpha hand computed nominal value") {
    // Units: (x,x) (x,y) (y,y). n=6, o_xy = 1 (both orders, weight 1/1 each
    // contributes 2 ordered pairs). De: n_x=3, n_y=3.
    // alpha = 1 - (n-1) * 2 / (2 * 3 * 3) = 1 - 5*2/18 = 4/9.
    ik::AgreementInput in;
    in.records = Ratings({{"1", "a", "x"}, {"1", "b", "x"}, {"2", "a", "x"},
                          {"2", "b", "y"}, {"3", "a", "y"}, {"3", "b", "y"}});
    CHECK(ik::KrippendorffAlpha(in).alpha == doctest::Approx(4.0 / 9.0));
  }

  TEST_CASE("alpha error cases") {
    ik::AgreementInput in;
    in.records = Ratings({{"1", "a", "x"}, {"1", "a", "y"}});
    CHECK_THROWS_AS(ik::KrippendorffAlpha(in), ik::ValidationError);
    in.records = Ratings({{"1", "a", "x"}, {"2", "a", "y"}});
    CHECK_THROWS_AS(ik::KrippendorffAlpha(in), ik::ValidationError);
    in.records = Ratings({{"1", "a", "x"}, {"2", "b", "y"}});
    CHECK_THROWS_AS(ik::KrippendorffAlpha(in), ik::ValidationError);
    in.records = Ratings({{"1", "a", "x"}, {"1", "b", "z"}});
    in.level = ik::MeasurementLevel::kOrdinal;
    in.ordering = {"x", "y"};
    CHECK_THROWS_AS(ik::KrippendorffAlpha(in), ik::ValidationError);
  }

  TEST_CASE("alpha matches pair counting oracle") {
    ik::Rng rng(5);
    const std::vector<std::string> labels = {"lo", "mid", "hi"};
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
      ik::AgreementInput in;
      in.level = trial % 2 ? ik::MeasurementLevel::kOrdinal
                           : ik::MeasurementLevel::kNominal;
      in.ordering = labels;
      for (int item = 0; item < 5; ++item) {
        for (int who = 0; who < 3; ++who) {
          if (rng.UniformIndex(4) == 0) continue;
          in.records.push_back({std::to_string(item), std::to_string(who),
                                labels[rng.UniformIndex(3)]});
        }
      }
      ik::AlphaResult got;
      try {
        got = ik::KrippendorffAlpha(in);
      } catch (const ik::ValidationError&) {
        continue;
      }
      auto want = ik::testing::OracleAlpha(in.records, in.level, in.ordering);
      CHECK(got.degenerate == want.degenerate);
      CHECK(std::fabs(got.alpha - want.alpha) < 1e-9);
      ++checked;
    }
    CHECK(checked > 300);
  }

  TEST_CASE("ordinal alpha differs from nominal") {
    ik::AgreementInput in;
    in.records = Ratings({{"1", "a", "lo"}, {"1", "b", "mid"}, {"2", "a", "hi"},
                          {"2", "b", "hi"}, {"3", "a", "lo"}, {"3", "b", "lo"},
                          {"4", "a", "mid"}, {"4", "b", "hi"}});
    in.ordering = {"lo", "mid", "hi"};
    double nominal = ik::KrippendorffAlpha(in).alpha;
    in.level = ik::MeasurementLevel::kOrdinal;
    double ordinal = ik::KrippendorffAlpha(in).alpha;
    CHECK(nominal != doctest::Approx(ordinal));
    CHECK(ordinal == doctest::Approx(
                         ik::testing::OracleAlpha(in.records, in.level, in.ordering)
                             .alpha));
  }

  TEST_CASE("average pairwise alpha") {
    ik::AgreementInput in;
    in.records = Ratings({{"1", "a", "x"}, {"1", "b", "x"}, {"2", "a", "y"},
                          {"2", "b", "y"}, {"3", "c", "x"}, {"3", "d", "y"},
                          {"4", "c", "y"}, {"4", "d", "y"}, {"5", "c", "x"},
                          {"5", "d", "x"}});
    auto report = ik::AveragePairwiseAlpha(in);
    REQUIRE(report.pairs.size() == 2);
    CHECK(report.pairs[0].annotator_a == "a");
    CHECK(report.pairs[0].alpha == 1.0);
    ik::AgreementInput cd;
    for (const auto& r : in.records) {
      if (r.annotator_id == "c" || r.annotator_id == "d") cd.records.push_back(r);
    }
    const double cd_alpha = ik::KrippendorffAlpha(cd).alpha;
    CHECK(report.pairs[1].alpha == doctest::Approx(cd_alpha));
    CHECK(report.average_alpha == doctest::Approx((1.0 + cd_alpha) / 2));
    CHECK(report.excluded_pairs.size() == 4);
  }

  TEST_CASE("single pair average equals the pair") {
    ik::AgreementInput in;
    in.records = Ratings({{"1", "a", "x"}, {"1", "b", "y"}, {"2", "a", "y"},
                          {"2", "b", "y"}, {"3", "a", "x"}, {"3", "b", "x"}});
    CHECK(ik::AveragePairwiseAlpha(in).average_alpha ==
          ik::KrippendorffAlpha(in).alpha);
  }
}
