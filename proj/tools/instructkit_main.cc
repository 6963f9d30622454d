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

#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "instructkit/annotate.h"
#include "instructkit/corpus.h"
#include "instructkit/error.h"
#include "instructkit/evalreport.h"
#include "instructkit/llmclient.h"
#include "instructkit/pipeline.h"
#include "instructkit/prompting.h"

namespace ik = instructkit;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::vector<ik::Dimension> ParseDimensions(const std::vector<std::string>& names,
                                           std::vector<ik::Dimension> fallback) {
  if (names.empty()) return fallback;
  std::vector<ik::Dimension> out;
  for (const auto& n : names) {
    auto d = ik::ParseDimension(n);
    if (!d) throw ik::ValidationError("unknown dimension '" + n + "'");
    out.push_back(*d);
  }
  return out;
}

ik::TableFormat ParseFormat(const std::string& s) {
  auto f = ik::ParseTableFormat(s);
  if (!f) throw ik::ValidationError("--format must be text or csv");
  return *f;
}

ik::ResolutionMode ParseResolution(const std::string& s) {
  auto m = ik::ParseResolutionMode(s);
  if (!m) throw ik::ValidationError("--resolution must be adjudicated or majority");
  return *m;
}

void Emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    ik::WriteFileAtomic(out_path, text);
  }
}

struct GenerateArgs {
  std::string config;
  std::string mock;
  std::string record;
  std::optional<uint64_t> seed;
  std::optional<int> max_rounds;
  bool quiet = false;
};

int RunGenerate(const GenerateArgs& args) {
  ik::RunConfig cfg = ik::RunConfig::Load(args.config);
  if (args.seed) cfg.rng_seed = *args.seed;
  ik::LogSink log = args.quiet ? ik::LogSink() : ik::StderrLog();

  std::unique_ptr<ik::ChatClient> backend;
  if (!args.mock.empty()) {
    backend = ik::FixtureChatClient::FromFile(args.mock);
    // Replays must not depend on the clock.
    if (!cfg.created_at) cfg.created_at = ik::Timestamp{};
  } else {
    ik::HttpClientConfig hc;
    hc.endpoint_url = cfg.client.endpoint_url;
    hc.model_name = cfg.client.model_name;
    hc.max_in_flight = cfg.client.max_in_flight;
    hc.retry = cfg.client.retry;
    backend = ik::HttpChatClient::FromEnvironment(hc, log ? log : [](std::string_view) {});
  }
  std::unique_ptr<ik::RecordingChatClient> recorder;
  ik::ChatClient* client = backend.get();
  if (!args.record.empty()) {
    recorder = std::make_unique<ik::RecordingChatClient>(*backend);
    client = recorder.get();
  }

  ik::BootstrapOptions opts;
  opts.max_rounds = args.max_rounds;
  opts.log = log;
  ik::DatasetManifest manifest;
  try {
    manifest = ik::RunBootstrap(cfg, *client, opts);
  } catch (...) {
    if (recorder) recorder->WriteFixture(args.record);
    throw;
  }
  if (recorder) recorder->WriteFixture(args.record);
  std::cout << "rounds=" << manifest.rounds_completed
            << " generated=" << manifest.total_generated
            << " accepted=" << manifest.total_accepted
            << " rejected=" << manifest.total_rejected()
            << " target_reached=" << (manifest.target_reached ? "true" : "false")
            << "\n";
  return 0;
}

int RunServe(const std::string& config_path) {
  ik::ServiceConfig cfg = ik::ServiceConfig::Load(config_path);
  ik::AnnotationService service(ik::Campaign::Load(cfg.campaign_file),
                                cfg.log_file);
  ik::AnnotateServer server(service, cfg);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int port = server.Bind();
  std::cerr << "listening on " << cfg.bind_address << ":" << port << "\n";
  std::thread worker([&server] { server.Serve(); });
  int sig = 0;
  sigwait(&signals, &sig);
  server.Stop();
  worker.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instruction data bootstrapping, filtering and evaluation."};
  app.require_subcommand(1);

  // seeds
  auto* seeds = app.add_subcommand("seeds", "Seed corpus tools");
  seeds->require_subcommand(1);
  std::string seeds_path;
  auto* seeds_validate = seeds->add_subcommand("validate", "Validate a seed file");
  seeds_validate->add_option("path", seeds_path, "Seed JSONL")->required();

  // generate
  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Run bootstrap rounds");
  generate->add_option("--config", gen.config, "Run config file")->required();
  generate->add_option("--mock", gen.mock, "Replay completions from a fixture");
  generate->add_option("--record", gen.record,
                       "Write every completion to a fixture file");
  generate->add_option("--seed", gen.seed, "Override rng_seed");
  generate->add_option("--max-rounds", gen.max_rounds,
                       "Stop after this round index");
  generate->add_flag("--quiet", gen.quiet, "No progress log");

  // partition
  std::string part_corpus, part_out;
  std::vector<size_t> part_sizes;
  uint64_t part_seed = 0;
  auto* partition = app.add_subcommand("partition", "Random corpus subsets");
  partition->add_option("--corpus", part_corpus, "Corpus JSONL")->required();
  partition->add_option("--sizes", part_sizes, "Subset sizes")
      ->delimiter(',')
      ->required();
  partition->add_option("--seed", part_seed, "RNG seed");
  partition->add_option("--out-dir", part_out, "Output directory")->required();

  // render
  auto* render = app.add_subcommand("render", "Render training or inference text");
  render->require_subcommand(1);
  std::string sft_corpus, sft_out;
  auto* render_sft = render->add_subcommand("sft", "SFT JSONL from a corpus");
  render_sft->add_option("--corpus", sft_corpus, "Corpus JSONL")->required();
  render_sft->add_option("--out", sft_out, "Output JSONL")->required();
  std::string infer_instruction, infer_input = std::string(ik::kNoInput);
  std::string infer_in, infer_out;
  auto* render_infer = render->add_subcommand("infer", "Inference prompts");
  auto* infer_instr_opt = render_infer->add_option(
      "--instruction", infer_instruction, "Single instruction");
  render_infer->add_option("--input", infer_input, "Input for --instruction");
  auto* infer_in_opt =
      render_infer->add_option("--in", infer_in, "Tuple JSONL to render");
  render_infer->add_option("--out", infer_out, "Output JSONL for --in");
  infer_instr_opt->excludes(infer_in_opt);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluation statistics");
  eval->require_subcommand(1);
  std::string ann_path, format = "text", resolution = "adjudicated", eval_out;
  std::vector<std::string> dim_names, models;
  std::string model_a, model_b;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--annotations", ann_path, "Annotation JSONL")->required();
    sub->add_option("--format", format, "text or csv");
    sub->add_option("--out", eval_out, "Write to file instead of stdout");
  };
  auto* eval_alpha = eval->add_subcommand("alpha", "Average pairwise alpha");
  add_common(eval_alpha);
  eval_alpha->add_option("--dimensions", dim_names, "Dimensions")->delimiter(',');
  auto* eval_report = eval->add_subcommand("report", "Label proportions by model");
  add_common(eval_report);
  eval_report->add_option("--dimensions", dim_names, "Dimensions")->delimiter(',');
  eval_report->add_option("--models", models, "Column order")->delimiter(',');
  eval_report->add_option("--resolution", resolution, "adjudicated or majority");
  auto* eval_compare = eval->add_subcommand("compare", "Win and tie rates");
  add_common(eval_compare);
  eval_compare->add_option("--dimensions", dim_names, "Dimensions")->delimiter(',');
  eval_compare->add_option("--models", models, "Matrix order")->delimiter(',');
  eval_compare->add_option("--resolution", resolution, "adjudicated or majority");
  auto* eval_categories =
      eval->add_subcommand("categories", "Category and skill distribution");
  add_common(eval_categories);
  std::string cat_resolution = "majority";
  eval_categories->add_option("--resolution", cat_resolution,
                              "adjudicated or majority");

  // annotate
  auto* annotate = app.add_subcommand("annotate", "Human annotation service");
  annotate->require_subcommand(1);
  std::string serve_config;
  auto* serve = annotate->add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", serve_config, "Service config file")->required();
  std::string export_campaign, export_log, export_out;
  auto* exporter = annotate->add_subcommand("export", "Export annotations");
  exporter->add_option("--campaign", export_campaign, "Campaign JSON")->required();
  exporter->add_option("--log", export_log, "Submission log")->required();
  exporter->add_option("--out", export_out, "Output JSONL");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (seeds_validate->parsed()) {
      ik::SeedCorpus corpus = ik::SeedCorpus::Load(seeds_path);
      std::cout << "ok: " << corpus.size() << " seeds (" << corpus.short_count()
                << " short, " << corpus.long_count() << " long)\n";
      return 0;
    }
    if (generate->parsed()) return RunGenerate(gen);
    if (partition->parsed()) {
      for (const auto& p :
           ik::MakePartitions(part_corpus, part_sizes, part_seed, part_out)) {
        std::cout << p.string() << "\n";
      }
      return 0;
    }
    if (render_sft->parsed()) {
      size_t n = ik::RenderSftDataset(sft_corpus, sft_out);
      std::cout << "rendered " << n << " examples\n";
      return 0;
    }
    if (render_infer->parsed()) {
      if (!infer_in.empty()) {
        if (infer_out.empty()) {
          throw ik::ValidationError("--out is required with --in");
        }
        size_t n = ik::RenderInferenceDataset(infer_in, infer_out);
        std::cout << "rendered " << n << " prompts\n";
      } else if (!infer_instruction.empty()) {
        std::cout << ik::RenderInferencePrompt(infer_instruction, infer_input)
                  << "\n";
      } else {
        throw ik::ValidationError("give --instruction or --in");
      }
      return 0;
    }
    const std::vector<ik::Dimension> compared = {
        ik::Dimension::kValidity, ik::Dimension::kOutputCorrectness,
        ik::Dimension::kExplanationQuality};
    if (eval_alpha->parsed()) {
      auto records = ik::LoadAnnotations(ann_path);
      std::vector<ik::Dimension> all(ik::RubricDimensions().begin(),
                                     ik::RubricDimensions().end());
      auto reports =
          ik::EvaluateAgreement(records, ParseDimensions(dim_names, all));
      Emit(ik::RenderAgreement(reports, ParseFormat(format)), eval_out);
      return 0;
    }
    if (eval_report->parsed()) {
      auto records = ik::LoadAnnotations(ann_path);
      std::vector<ik::ProportionTable> tables;
      for (auto d : ParseDimensions(dim_names, compared)) {
        tables.push_back(ik::ComputeProportions(records, d, models,
                                                ParseResolution(resolution)));
      }
      Emit(ik::RenderProportions(tables, ParseFormat(format)), eval_out);
      return 0;
    }
    if (eval_compare->parsed()) {
      auto records = ik::LoadAnnotations(ann_path);
      std::vector<ik::WinTieMatrix> matrices;
      for (auto d : ParseDimensions(dim_names, compared)) {
        matrices.push_back(ik::ComputeWinTieMatrix(records, d, models,
                                                   ParseResolution(resolution)));
      }
      Emit(ik::RenderWinTie(matrices, ParseFormat(format)), eval_out);
      return 0;
    }
    if (eval_categories->parsed()) {
      auto records = ik::LoadAnnotations(ann_path);
      auto report =
          ik::CategoryDistribution(records, ParseResolution(cat_resolution));
      Emit(ik::RenderCategories(report, ParseFormat(format)), eval_out);
      return 0;
    }
    if (serve->parsed()) return RunServe(serve_config);
    if (exporter->parsed()) {
      auto service = ik::AnnotationService::ReadOnly(
          ik::Campaign::Load(export_campaign), export_log);
      Emit(service.ExportJsonl(), export_out);
      return 0;
    }
  } catch (const ik::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
