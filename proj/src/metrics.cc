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

#include "instructkit/metrics.h"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>

#include "instructkit/error.h"

namespace instructkit {

namespace {

// Decodes one UTF-8 code point at `pos`, advancing it. Invalid sequences
// yield the single byte value so tokenization never fails.
char32_t DecodeUtf8(std::string_view s, size_t& pos) {
  unsigned char c = static_cast<unsigned char>(s[pos]);
  int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3
                     : (c >> 3) == 0x1e ? 4 : 0;
  if (len <= 1 || pos + len > s.size()) {
    ++pos;
    return c;
  }
  char32_t cp = c & (0x7f >> len);
  for (int i = 1; i < len; ++i) {
    unsigned char cc = static_cast<unsigned char>(s[pos + i]);
    if ((cc & 0xc0) != 0x80) {
      ++pos;
      return c;
    }
    cp = (cp << 6) | (cc & 0x3f);
  }
  pos += len;
  return cp;
}

bool IsUnicodeSpace(char32_t cp) {
  return cp == ' ' || (cp >= 0x09 && cp <= 0x0d) || cp == 0x85 ||
         cp == 0xa0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200a) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202f || cp == 0x205f ||
         cp == 0x3000;
}

bool IsPunctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2f) || (cp >= 0x3a && cp <= 0x40) ||
           (cp >= 0x5b && cp <= 0x60) || (cp >= 0x7b && cp <= 0x7e);
  }
  return cp == 0xa1 || cp == 0xa7 || cp == 0xab || cp == 0xb6 ||
         cp == 0xb7 || cp == 0xbb || cp == 0xbf ||
         (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205e) ||
         (cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011);
}

struct CodePoint {
  char32_t value;
  size_t begin;
  size_t end;
};

void EmitToken(std::string_view text, const std::vector<CodePoint>& cps,
               std::vector<std::string>& out) {
  size_t b = 0;
  size_t e = cps.size();
  while (b < e && IsPunctuation(cps[b].value)) ++b;
  while (e > b && IsPunctuation(cps[e - 1].value)) --e;
  if (b == e) return;
  std::string token(text.substr(cps[b].begin, cps[e - 1].end - cps[b].begin));
  for (char& c : token) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  out.push_back(std::move(token));
}

double SquaredDistance(MeasurementLevel level, size_t c, size_t k,
                       const std::vector<double>& marginals) {
  if (c == k) return 0.0;
  if (level == MeasurementLevel::kNominal) return 1.0;
  size_t lo = std::min(c, k);
  size_t hi = std::max(c, k);
  double sum = 0.0;
  for (size_t g = lo; g <= hi; ++g) sum += marginals[g];
  double d = sum - (marginals[c] + marginals[k]) / 2.0;
  return d * d;
}

}  // namespace

TokenSequence Tokenize(std::string_view text) {
  TokenSequence seq;
  std::vector<CodePoint> current;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t begin = pos;
    char32_t cp = DecodeUtf8(text, pos);
    if (IsUnicodeSpace(cp)) {
      EmitToken(text, current, seq.tokens);
      current.clear();
    } else {
      current.push_back({cp, begin, pos});
    }
  }
  EmitToken(text, current, seq.tokens);
  return seq;
}

namespace {

// Length and first seven bytes. Equal keys mean equal tokens up to seven
// bytes long; longer tokens fall back to a full comparison.
inline uint64_t TokenKey(const std::string& s) {
  const size_t len = std::min<size_t>(s.size(), 7);
  uint64_t k = uint64_t{std::min<size_t>(s.size(), 255)} << 56;
  for (size_t i = 0; i < len; ++i) {
    k |= uint64_t{static_cast<unsigned char>(s[i])} << (8 * i);
  }
  return k;
}

inline bool SameToken(const std::string& x, uint64_t kx, const std::string& y,
                      uint64_t ky) {
  return kx == ky && (x.size() <= 7 || x == y);
}

// Bit-parallel LCS (Hyyro) for an inner sequence of at most 64 tokens. Match
// masks are built once per distinct inner token.
size_t LcsBits(const std::vector<std::string>& outer,
               const std::vector<std::string>& inner) {
  const size_t n = inner.size();
  uint64_t keys[64];
  uint64_t masks[64];
  size_t first[64];  // index in inner of each distinct token
  size_t distinct = 0;
  for (size_t j = 0; j < n; ++j) {
    const uint64_t kj = TokenKey(inner[j]);
    size_t d = 0;
    while (d < distinct && !SameToken(inner[j], kj, inner[first[d]], keys[d])) ++d;
    if (d == distinct) {
      keys[d] = kj;
      masks[d] = 0;
      first[d] = j;
      ++distinct;
    }
    masks[d] |= uint64_t{1} << j;
  }
  uint64_t v = ~uint64_t{0};
  for (const auto& x : outer) {
    const uint64_t kx = TokenKey(x);
    size_t d = 0;
    while (d < distinct && !SameToken(x, kx, inner[first[d]], keys[d])) ++d;
    if (d == distinct) continue;
    const uint64_t u = v & masks[d];
    v = (v + u) | (v - u);
  }
  const uint64_t low = n == 64 ? ~uint64_t{0} : (uint64_t{1} << n) - 1;
  return n - static_cast<size_t>(__builtin_popcountll(v & low));
}

size_t LcsRow(const std::vector<std::string>& outer,
              const std::vector<std::string>& inner) {
  std::vector<uint64_t> keys(inner.size());
  for (size_t j = 0; j < inner.size(); ++j) keys[j] = TokenKey(inner[j]);
  std::vector<size_t> row(inner.size() + 1, 0);
  for (const auto& x : outer) {
    const uint64_t kx = TokenKey(x);
    size_t diag = 0;  // row[j-1] from the previous outer iteration
    for (size_t j = 1; j <= inner.size(); ++j) {
      const size_t up = row[j];
      row[j] = SameToken(x, kx, inner[j - 1], keys[j - 1])
                   ? diag + 1
                   : std::max(up, row[j - 1]);
      diag = up;
    }
  }
  return row[inner.size()];
}

}  // namespace

size_t LcsLength(const TokenSequence& a, const TokenSequence& b) {
  const auto& outer = a.size() >= b.size() ? a.tokens : b.tokens;
  const auto& inner = a.size() >= b.size() ? b.tokens : a.tokens;
  if (inner.empty()) return 0;
  return inner.size() <= 64 ? LcsBits(outer, inner) : LcsRow(outer, inner);
}

double RougeLF1(const TokenSequence& a, const TokenSequence& b) {
  const size_t lcs = LcsLength(a, b);
  if (lcs == 0) return 0.0;
  const double precision =
      static_cast<double>(lcs) / static_cast<double>(b.size());
  const double recall = static_cast<double>(lcs) / static_cast<double>(a.size());
  return 2.0 * precision * recall / (precision + recall);
}

AlphaResult KrippendorffAlpha(const AgreementInput& input) {
  std::set<std::string> annotators;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : input.records) {
    if (!seen.emplace(r.item_id, r.annotator_id).second) {
      throw ValidationError("duplicate rating for item '" + r.item_id +
                            "' by annotator '" + r.annotator_id + "'");
    }
    annotators.insert(r.annotator_id);
  }
  if (annotators.size() < 2) {
    throw ValidationError("alpha needs at least two annotators");
  }

  // Category index: ordering position for ordinal data, sorted label order
  // otherwise (nominal alpha does not depend on it).
  std::map<std::string, size_t> category;
  if (input.level == MeasurementLevel::kOrdinal) {
    for (size_t i = 0; i < input.ordering.size(); ++i) {
      category.emplace(input.ordering[i], i);
    }
    for (const auto& r : input.records) {
      if (!category.count(r.label)) {
        throw ValidationError("label '" + r.label +
                              "' missing from ordinal ordering of '" +
                              input.dimension + "'");
      }
    }
  } else {
    std::set<std::string> labels;
    for (const auto& r : input.records) labels.insert(r.label);
    size_t i = 0;
    for (const auto& l : labels) category.emplace(l, i++);
  }
  const size_t n_categories = category.size();

  std::map<std::string, std::vector<size_t>> units;
  for (const auto& r : input.records) {
    units[r.item_id].push_back(category.at(r.label));
  }

  std::vector<std::vector<double>> coincidence(
      n_categories, std::vector<double>(n_categories, 0.0));
  AlphaResult result;
  for (const auto& [item, values] : units) {
    const size_t m = values.size();
    if (m < 2) continue;
    ++result.units;
    result.pairable_values += m;
    std::vector<double> counts(n_categories, 0.0);
    for (size_t v : values) counts[v] += 1.0;
    for (size_t c = 0; c < n_categories; ++c) {
      if (counts[c] == 0) continue;
      for (size_t k = 0; k < n_categories; ++k) {
        double pairs = counts[c] * (c == k ? counts[k] - 1.0 : counts[k]);
        coincidence[c][k] += pairs / static_cast<double>(m - 1);
      }
    }
  }
  if (result.units == 0) {
    throw ValidationError("insufficient overlap: no item of '" +
                          input.dimension + "' has two labels");
  }

  std::vector<double> marginals(n_categories, 0.0);
  double n = 0.0;
  for (size_t c = 0; c < n_categories; ++c) {
    for (size_t k = 0; k < n_categories; ++k) marginals[c] += coincidence[c][k];
    n += marginals[c];
  }

  double observed = 0.0;
  double expected = 0.0;
  for (size_t c = 0; c < n_categories; ++c) {
    for (size_t k = 0; k < n_categories; ++k) {
      double d2 = SquaredDistance(input.level, c, k, marginals);
      observed += coincidence[c][k] * d2;
      expected += marginals[c] * marginals[k] * d2;
    }
  }
  if (expected == 0.0) {
    result.alpha = 1.0;
    result.degenerate = true;
    return result;
  }
  result.alpha = 1.0 - (n - 1.0) * observed / expected;
  return result;
}

AgreementReport AveragePairwiseAlpha(const AgreementInput& input) {
  std::map<std::string, std::map<std::string, const Rating*>> by_annotator;
  for (const auto& r : input.records) {
    auto [it, inserted] = by_annotator[r.annotator_id].emplace(r.item_id, &r);
    if (!inserted) {
      throw ValidationError("duplicate rating for item '" + r.item_id +
                            "' by annotator '" + r.annotator_id + "'");
    }
  }
  AgreementReport report;
  report.dimension = input.dimension;
  double sum = 0.0;
  for (auto a = by_annotator.begin(); a != by_annotator.end(); ++a) {
    for (auto b = std::next(a); b != by_annotator.end(); ++b) {
      AgreementInput pair_input;
      pair_input.dimension = input.dimension;
      pair_input.level = input.level;
      pair_input.ordering = input.ordering;
      for (const auto& [item, rating] : a->second) {
        auto other = b->second.find(item);
        if (other == b->second.end()) continue;
        pair_input.records.push_back(*rating);
        pair_input.records.push_back(*other->second);
      }
      if (pair_input.records.empty()) {
        report.excluded_pairs.emplace_back(a->first, b->first);
        continue;
      }
      AlphaResult r = KrippendorffAlpha(pair_input);
      report.pairs.push_back(
          {a->first, b->first, r.alpha, r.units, r.degenerate});
      sum += r.alpha;
    }
  }
  if (report.pairs.empty()) {
    throw ValidationError("insufficient overlap: no annotator pair of '" +
                          input.dimension + "' shares an item");
  }
  report.average_alpha = sum / static_cast<double>(report.pairs.size());
  return report;
}

}  // namespace instructkit
