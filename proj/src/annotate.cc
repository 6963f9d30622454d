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

#include "instructkit/annotate.h"

#include <algorithm>
#include <cstdlib>

#include "instructkit/config.h"
#include "instructkit/corpus.h"
#include "instructkit/error.h"
#include "instructkit/random.h"
#include "json.hpp"

namespace instructkit {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string Dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string KeyName(size_t i) {
  std::string s;
  if (i >= 26) s.push_back(static_cast<char>('A' + i / 26 - 1));
  s.push_back(static_cast<char>('A' + i % 26));
  return s;
}

uint64_t ItemStream(const std::string& item_id) {
  const std::string hex = Sha256Hex(item_id);
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

std::string RequireString(const ordered_json& j, const char* key,
                          const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ValidationError(where + ": '" + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

ordered_json DimensionsPayload(const std::vector<Dimension>& dims) {
  ordered_json out = ordered_json::array();
  for (Dimension d : dims) {
    const DimensionSchema& schema = DimensionSchema::For(d);
    ordered_json entry;
    entry["id"] = DimensionName(d);
    entry["labels"] = schema.labels;
    entry["ordinal"] = schema.ordinal;
    out.push_back(entry);
  }
  return out;
}

std::string SubmissionToJsonLine(const Submission& s,
                                 const std::vector<Dimension>& dims) {
  ordered_json j;
  j["annotator_id"] = s.annotator_id;
  j["item_id"] = s.item_id;
  j["blinded_key"] = s.blinded_key;
  ordered_json labels = ordered_json::object();
  for (Dimension d : dims) {
    const std::string name(DimensionName(d));
    labels[name] = s.labels.at(name);
  }
  j["labels"] = labels;
  j["timestamp"] = FormatRfc3339(s.timestamp);
  return Dump(j);
}

Submission SubmissionFromJsonLine(std::string_view line,
                                  const std::string& where) {
  ordered_json j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError(where + ": not a JSON object");
  }
  Submission s;
  s.annotator_id = RequireString(j, "annotator_id", where);
  s.item_id = RequireString(j, "item_id", where);
  s.blinded_key = RequireString(j, "blinded_key", where);
  if (!j.contains("labels") || !j["labels"].is_object()) {
    throw ValidationError(where + ": 'labels' must be an object");
  }
  for (auto it = j["labels"].begin(); it != j["labels"].end(); ++it) {
    if (!it.value().is_string()) {
      throw ValidationError(where + ": label for '" + it.key() +
                            "' must be a string");
    }
    s.labels[it.key()] = it.value().get<std::string>();
  }
  s.timestamp = ParseRfc3339(RequireString(j, "timestamp", where));
  return s;
}

}  // namespace

std::vector<std::string> Campaign::Models() const {
  std::set<std::string> models;
  for (const auto& o : outputs) models.insert(o.model_id);
  return {models.begin(), models.end()};
}

void Campaign::Validate() const {
  if (campaign_id.empty()) throw ValidationError("campaign_id is empty");
  if (dimensions.empty()) throw ValidationError("campaign has no dimensions");
  std::set<Dimension> dims(dimensions.begin(), dimensions.end());
  if (dims.size() != dimensions.size()) {
    throw ValidationError("campaign lists a dimension twice");
  }
  if (annotators.empty()) throw ValidationError("campaign has no annotators");
  std::set<std::string> names;
  for (const auto& a : annotators) {
    if (a.empty() || !names.insert(a).second) {
      throw ValidationError("annotator ids must be nonempty and unique");
    }
  }
  std::set<std::string> item_ids;
  for (const auto& item : items) {
    if (item.id.empty() || !item_ids.insert(item.id).second) {
      throw ValidationError("item ids must be nonempty and unique");
    }
  }
  std::set<std::pair<std::string, std::string>> have;
  for (const auto& o : outputs) {
    if (!item_ids.count(o.instruction_id)) {
      throw ValidationError("output for unknown item '" + o.instruction_id + "'");
    }
    if (!have.insert({o.instruction_id, o.model_id}).second) {
      throw ValidationError("duplicate output for (" + o.instruction_id + ", " +
                            o.model_id + ")");
    }
  }
  const std::vector<std::string> models = Models();
  for (const auto& [annotator, assigned] : assignment) {
    if (!names.count(annotator)) {
      throw ValidationError("assignment names unknown annotator '" + annotator +
                            "'");
    }
    std::set<std::string> seen;
    for (const auto& id : assigned) {
      if (!item_ids.count(id)) {
        throw ValidationError("assignment names unknown item '" + id + "'");
      }
      if (!seen.insert(id).second) {
        throw ValidationError("item '" + id + "' assigned twice to '" +
                              annotator + "'");
      }
      for (const auto& m : models) {
        if (!have.count({id, m})) {
          throw ValidationError("item '" + id + "' has no output from '" + m +
                                "'");
        }
      }
    }
  }
}

std::map<std::string, std::string> Campaign::BlindingFor(
    const std::string& item_id) const {
  std::vector<std::string> models = Models();
  Rng rng = Rng::Derive(blinding_seed, {ItemStream(item_id)});
  rng.Shuffle(models);
  std::map<std::string, std::string> out;
  for (size_t i = 0; i < models.size(); ++i) out[KeyName(i)] = models[i];
  return out;
}

Campaign Campaign::FromJson(std::string_view text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError("campaign: not a JSON object");
  }
  Campaign c;
  try {
    c.campaign_id = j.at("campaign_id").get<std::string>();
    for (const auto& it : j.at("instructions")) {
      CampaignItem item;
      item.id = it.at("id").get<std::string>();
      item.instruction = it.at("instruction").get<std::string>();
      item.input = it.value("input", std::string(kNoInput));
      c.items.push_back(std::move(item));
    }
    std::string outputs_jsonl;
    for (const auto& it : j.at("outputs")) {
      outputs_jsonl += Dump(it) + "\n";
    }
    c.outputs = ParseModelOutputsJsonl(outputs_jsonl, "campaign outputs");
    for (const auto& d : j.at("dimensions")) {
      const std::string name = d.get<std::string>();
      auto dim = ParseDimension(name);
      if (!dim) throw ValidationError("campaign: unknown dimension '" + name + "'");
      c.dimensions.push_back(*dim);
    }
    c.annotators = j.at("annotators").get<std::vector<std::string>>();
    c.blinding_seed = j.value("blinding_seed", uint64_t{0});
    if (j.contains("assignment")) {
      c.assignment =
          j["assignment"].get<std::map<std::string, std::vector<std::string>>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("campaign: ") + e.what());
  }
  if (c.assignment.empty()) {
    std::vector<std::string> ids;
    for (const auto& item : c.items) ids.push_back(item.id);
    c.assignment = DefaultAssignment(c.annotators, ids);
  }
  c.Validate();
  return c;
}

Campaign Campaign::Load(const fs::path& path) {
  try {
    return FromJson(ReadFile(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::map<std::string, std::vector<std::string>> DefaultAssignment(
    const std::vector<std::string>& annotators,
    const std::vector<std::string>& item_ids) {
  std::map<std::string, std::vector<std::string>> out;
  if (annotators.empty()) return out;
  for (const auto& a : annotators) out[a];
  std::vector<std::vector<std::string>> slots;
  if (annotators.size() == 1) {
    slots.push_back({annotators[0]});
  } else {
    for (size_t i = 0; i < annotators.size(); i += 2) {
      slots.push_back({annotators[i], i + 1 < annotators.size()
                                          ? annotators[i + 1]
                                          : annotators[0]});
    }
  }
  for (size_t i = 0; i < item_ids.size(); ++i) {
    for (const auto& a : slots[i % slots.size()]) out[a].push_back(item_ids[i]);
  }
  return out;
}

AnnotationService::AnnotationService(Campaign campaign, fs::path log_path,
                                     Clock clock)
    : AnnotationService(std::move(campaign), std::move(log_path),
                        std::move(clock), false) {}

AnnotationService AnnotationService::ReadOnly(Campaign campaign,
                                              fs::path log_path) {
  return AnnotationService(std::move(campaign), std::move(log_path), NowUtc,
                           true);
}

AnnotationService::AnnotationService(Campaign campaign, fs::path log_path,
                                     Clock clock, bool read_only)
    : campaign_(std::move(campaign)),
      log_path_(std::move(log_path)),
      clock_(std::move(clock)),
      read_only_(read_only) {
  campaign_.Validate();
  for (const auto& item : campaign_.items) {
    items_[item.id] = &item;
    blinding_[item.id] = campaign_.BlindingFor(item.id);
  }
  for (const auto& o : campaign_.outputs) {
    outputs_[{o.instruction_id, o.model_id}] = &o;
  }
  for (const auto& a : campaign_.annotators) {
    AnnotatorState& st = state_[a];
    auto it = campaign_.assignment.find(a);
    if (it == campaign_.assignment.end()) continue;
    for (const auto& item_id : it->second) {
      for (const auto& [key, model] : blinding_[item_id]) {
        st.queue.push_back({item_id, key});
      }
    }
    st.total = st.queue.size();
  }

  if (!fs::exists(log_path_)) return;
  const std::string text = ReadFile(log_path_);
  const size_t end = text.rfind('\n');
  const size_t valid = end == std::string::npos ? 0 : end + 1;
  size_t line_number = 0;
  size_t start = 0;
  while (start < valid) {
    size_t nl = text.find('\n', start);
    ++line_number;
    std::string_view line(text.data() + start, nl - start);
    start = nl + 1;
    if (Trim(line).empty()) continue;
    const std::string where =
        log_path_.string() + ":" + std::to_string(line_number);
    Submission s = SubmissionFromJsonLine(line, where);
    try {
      CheckSubmission(s);
    } catch (const Error& e) {
      throw ValidationError(where + ": " + e.what());
    }
    Apply(s);
  }
  if (valid != text.size() && !read_only_) {
    // Drop the torn tail so the next append starts on a fresh line.
    WriteFileAtomic(log_path_, std::string_view(text.data(), valid));
  }
}

const AnnotationService::AnnotatorState& AnnotationService::StateOf(
    const std::string& annotator_id) const {
  auto it = state_.find(annotator_id);
  if (it == state_.end()) {
    throw NotFoundError("unknown annotator '" + annotator_id + "'");
  }
  return it->second;
}

void AnnotationService::CheckSubmission(const Submission& s) const {
  const AnnotatorState& st = StateOf(s.annotator_id);
  if (st.done.count({s.item_id, s.blinded_key})) {
    throw ConflictError("'" + s.annotator_id + "' already annotated item '" +
                        s.item_id + "' output " + s.blinded_key);
  }
  bool queued = std::any_of(st.queue.begin(), st.queue.end(),
                            [&](const QueueEntry& e) {
                              return e.item_id == s.item_id &&
                                     e.blinded_key == s.blinded_key;
                            });
  if (!queued) {
    throw NotFoundError("item '" + s.item_id + "' output " + s.blinded_key +
                        " is not assigned to '" + s.annotator_id + "'");
  }
  for (Dimension d : campaign_.dimensions) {
    const std::string name(DimensionName(d));
    auto it = s.labels.find(name);
    if (it == s.labels.end()) {
      throw ValidationError("dimension '" + name + "': no label");
    }
    const DimensionSchema& schema = DimensionSchema::For(d);
    if (!schema.Contains(it->second)) {
      throw ValidationError("dimension '" + name + "': label '" + it->second +
                            "' is not one of " + Join(schema.labels, ", "));
    }
  }
  for (const auto& [name, label] : s.labels) {
    auto d = ParseDimension(name);
    if (!d || std::find(campaign_.dimensions.begin(), campaign_.dimensions.end(),
                        *d) == campaign_.dimensions.end()) {
      throw ValidationError("dimension '" + name +
                            "' is not active in this campaign");
    }
  }
}

void AnnotationService::Apply(const Submission& s) {
  AnnotatorState& st = state_.at(s.annotator_id);
  auto it = std::find_if(st.queue.begin(), st.queue.end(),
                         [&](const QueueEntry& e) {
                           return e.item_id == s.item_id &&
                                  e.blinded_key == s.blinded_key;
                         });
  st.queue.erase(it);
  st.done.insert({s.item_id, s.blinded_key});
  log_.push_back(s);
}

std::string AnnotationService::CampaignJson() const {
  ordered_json j;
  j["campaign_id"] = campaign_.campaign_id;
  j["dimensions"] = DimensionsPayload(campaign_.dimensions);
  j["annotators"] = campaign_.annotators;
  j["items"] = campaign_.items.size();
  j["outputs_per_item"] = campaign_.Models().size();
  return Dump(j);
}

std::optional<std::string> AnnotationService::NextItemJson(
    const std::string& annotator_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  const AnnotatorState& st = StateOf(annotator_id);
  if (st.queue.empty()) return std::nullopt;
  const QueueEntry& head = st.queue.front();
  const CampaignItem& item = *items_.at(head.item_id);
  const std::string& model = blinding_.at(head.item_id).at(head.blinded_key);
  const ModelOutputRecord& out = *outputs_.at({head.item_id, model});
  ordered_json j;
  j["done"] = false;
  j["annotator_id"] = annotator_id;
  j["item_id"] = item.id;
  j["blinded_key"] = head.blinded_key;
  j["instruction"] = item.instruction;
  j["input"] = item.input;
  j["output"] = out.output;
  j["explanation"] = out.explanation;
  j["dimensions"] = DimensionsPayload(campaign_.dimensions);
  j["remaining"] = st.queue.size();
  return Dump(j);
}

std::string AnnotationService::Submit(
    const std::string& annotator_id, const std::string& item_id,
    const std::string& blinded_key,
    const std::map<std::string, std::string>& labels) {
  std::lock_guard<std::mutex> lock(mu_);
  if (read_only_) throw ConflictError("annotation log is open read-only");
  Submission s{annotator_id, item_id, blinded_key, labels, clock_()};
  CheckSubmission(s);
  AppendFileDurable(log_path_,
                    SubmissionToJsonLine(s, campaign_.dimensions) + "\n");
  Apply(s);
  ordered_json j;
  j["accepted"] = true;
  j["remaining"] = state_.at(annotator_id).queue.size();
  return Dump(j);
}

std::vector<AnnotatorProgress> AnnotationService::Progress() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<AnnotatorProgress> out;
  for (const auto& a : campaign_.annotators) {
    const AnnotatorState& st = state_.at(a);
    out.push_back({a, st.done.size(), st.total});
  }
  return out;
}

std::string AnnotationService::ProgressJson() const {
  ordered_json j;
  j["campaign_id"] = campaign_.campaign_id;
  ordered_json list = ordered_json::array();
  size_t completed = 0;
  size_t total = 0;
  for (const auto& p : Progress()) {
    ordered_json e;
    e["annotator_id"] = p.annotator_id;
    e["completed"] = p.completed;
    e["total"] = p.total;
    list.push_back(e);
    completed += p.completed;
    total += p.total;
  }
  j["annotators"] = list;
  j["completed"] = completed;
  j["total"] = total;
  j["records"] = completed * campaign_.dimensions.size();
  return Dump(j);
}

size_t AnnotationService::QueueLength(const std::string& annotator_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  return StateOf(annotator_id).queue.size();
}

std::vector<AnnotationRecord> AnnotationService::Export() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<AnnotationRecord> out;
  for (const auto& s : log_) {
    for (Dimension d : campaign_.dimensions) {
      AnnotationRecord r;
      r.item_id = s.item_id;
      r.annotator_id = s.annotator_id;
      r.dimension = d;
      r.label = s.labels.at(std::string(DimensionName(d)));
      r.timestamp = s.timestamp;
      r.model_id = blinding_.at(s.item_id).at(s.blinded_key);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string AnnotationService::ExportJsonl() const {
  std::string out;
  for (const auto& r : Export()) {
    out += AnnotationToJsonLine(r);
    out.push_back('\n');
  }
  return out;
}

ServiceConfig ServiceConfig::Load(const fs::path& path) {
  KeyValueConfig kv = KeyValueConfig::Load(path);
  kv.RejectUnknown({"bind_address", "port", "campaign_file", "log_file",
                    "static_dir", "auth_token"});
  auto resolve = [&](const std::string& v) {
    fs::path p(v);
    return p.is_relative() && !kv.base_dir().empty() ? kv.base_dir() / p : p;
  };
  ServiceConfig cfg;
  cfg.bind_address = kv.GetString("bind_address", cfg.bind_address);
  long long port = kv.GetInt("port", cfg.port);
  if (port < 0 || port > 65535) throw ConfigError("port out of range");
  cfg.port = static_cast<int>(port);
  auto campaign = kv.Get("campaign_file");
  auto log = kv.Get("log_file");
  if (!campaign || !log) {
    throw ConfigError(path.string() + ": campaign_file and log_file are required");
  }
  cfg.campaign_file = resolve(*campaign);
  cfg.log_file = resolve(*log);
  if (auto s = kv.Get("static_dir")) cfg.static_dir = resolve(*s);
  cfg.auth_token = kv.GetString("auth_token", "");
  if (const char* env = std::getenv("ANNOTATE_AUTH_TOKEN"); env && *env) {
    cfg.auth_token = env;
  }
  return cfg;
}

}  // namespace instructkit
