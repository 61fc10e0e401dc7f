// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include "medcorpus/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <variant>

#include <fmt/format.h>

#include "medcorpus/error.hpp"
#include "medcorpus/hashing.hpp"
#include "medcorpus/image.hpp"
#include "medcorpus/ingestion.hpp"
#include "medcorpus/kernels.hpp"
#include "medcorpus/templating.hpp"

namespace medcorpus {

namespace fs = std::filesystem;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kIngest: return "ingest";
    case Stage::kCompose: return "compose";
    case Stage::kTranslate: return "translate";
    case Stage::kTemplate: return "template";
    case Stage::kStats: return "stats";
  }
  return "?";
}

Stage parse_stage(std::string_view s) {
  for (auto stage : kAllStages) {
    if (to_string(stage) == s) return stage;
  }
  throw Error(ErrorCode::kConfigError, fmt::format("unknown stage '{}'", s));
}

std::size_t StageReport::rejected_total() const {
  std::size_t n = 0;
  for (const auto& [reason, count] : rejected) n += count;
  return n;
}

nlohmann::json StageReport::to_json() const {
  return {{"stage", to_string(stage)}, {"input", input}, {"kept", kept}, {"rejected", rejected}};
}

StageReport StageReport::from_json(const nlohmann::json& j) {
  StageReport r;
  r.stage = parse_stage(j.at("stage").get<std::string>());
  r.input = j.at("input").get<std::size_t>();
  r.kept = j.at("kept").get<std::size_t>();
  r.rejected = j.at("rejected").get<std::map<std::string, std::size_t>>();
  return r;
}

nlohmann::json BuildManifest::to_json() const {
  auto stages_json = nlohmann::json::array();
  for (const auto& s : stages) stages_json.push_back(s.to_json());
  auto shards_json = nlohmann::json::array();
  for (const auto& s : shards) {
    shards_json.push_back({{"file", s.file}, {"records", s.records}, {"sha256", s.sha256}});
  }
  return {{"schema_version", kSchemaVersion},
          {"seed", seed},
          {"config_digest", config_digest},
          {"stages", std::move(stages_json)},
          {"shards", std::move(shards_json)}};
}

namespace {

struct RejectionRow {
  Stage stage = Stage::kIngest;
  std::optional<std::string> id;
  std::string reason;
  std::string detail;
  std::optional<Source> source;
  std::optional<std::size_t> line_no;

  nlohmann::json to_json() const {
    nlohmann::json j{{"stage", to_string(stage)}, {"reason", reason}, {"detail", detail}};
    if (id) j["id"] = *id;
    if (source) j["source"] = medcorpus::to_string(*source);
    if (line_no) j["line_no"] = *line_no;
    return j;
  }
};

// Completion marker of a stage, written last.
struct DoneMarker {
  std::string config_digest;
  std::string input_digest;
  std::map<std::string, std::string> outputs;  // relative path -> sha256
  StageReport report;
  std::vector<ShardInfo> shards;

  std::string output_digest() const {
    Sha256 h;
    for (const auto& [file, digest] : outputs) {
      h.update(file);
      h.update(std::string_view("\0", 1));
      h.update(digest);
      h.update("\n");
    }
    return h.hex_digest();
  }

  nlohmann::json to_json() const {
    auto shards_json = nlohmann::json::array();
    for (const auto& s : shards) {
      shards_json.push_back({{"file", s.file}, {"records", s.records}, {"sha256", s.sha256}});
    }
    return {{"config_digest", config_digest},
            {"input_digest", input_digest},
            {"outputs", outputs},
            {"report", report.to_json()},
            {"shards", std::move(shards_json)}};
  }

  static DoneMarker from_json(const nlohmann::json& j) {
    DoneMarker m;
    m.config_digest = j.at("config_digest").get<std::string>();
    m.input_digest = j.at("input_digest").get<std::string>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.report = StageReport::from_json(j.at("report"));
    for (const auto& s : j.at("shards")) {
      m.shards.push_back({s.at("file").get<std::string>(), s.at("records").get<std::size_t>(),
                          s.at("sha256").get<std::string>()});
    }
    return m;
  }
};

struct StageResult {
  StageReport report;
  std::vector<std::string> outputs;  // relative to the output directory
  std::vector<ShardInfo> shards;
};

void write_file(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot write {}", path.string()));
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, fmt::format("cannot move {} into place: {}", path.string(), ec.message()));
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingUpstream, fmt::format("cannot read {}", path.string()));
  std::vector<nlohmann::json> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  }
  return rows;
}

template <typename Rows, typename ToJson>
std::string jsonl(const Rows& rows, ToJson to_json_fn) {
  std::string out;
  for (const auto& r : rows) {
    out += to_jsonl_line(to_json_fn(r));
    out += '\n';
  }
  return out;
}

void reset_dir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

std::string subset_name(TextRole role) {
  return role == TextRole::kQuestionAnswer ? "instruction" : "alignment";
}

// Rethrows the first captured exception in index order.
void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

namespace {

struct BackendSlot {
  std::unique_ptr<TranslationBackend> owned_backend;
  TranslationBackend* backend = nullptr;
};

}  // namespace

struct Pipeline::Impl : BackendSlot {};

Pipeline::Pipeline(PipelineConfig config, TranslationBackend* backend)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  config_.validate();
  impl_->backend = backend;
}

Pipeline::~Pipeline() = default;

namespace {

class StageRunner {
 public:
  StageRunner(const PipelineConfig& config, BackendSlot& impl)
      : config_(config), impl_(impl), out_(config.output_dir), work_(out_ / "work") {}

  fs::path data_path(Stage s) const { return work_ / fmt::format("{}.jsonl", to_string(s)); }
  fs::path rejections_path(Stage s) const { return work_ / fmt::format("{}.rejections.jsonl", to_string(s)); }
  fs::path marker_path(Stage s) const { return work_ / fmt::format("{}.done.json", to_string(s)); }

  std::string rel(const fs::path& p) const { return fs::relative(p, out_).generic_string(); }

  void check_config() const {
    const auto path = work_ / "config.json";
    const auto digest = config_.digest();
    if (fs::exists(path)) {
      std::ifstream in(path);
      const auto j = nlohmann::json::parse(in, nullptr, false);
      const auto prior = j.is_object() && j.contains("digest") ? j["digest"].get<std::string>() : std::string();
      if (prior != digest) {
        throw Error(ErrorCode::kConfigMismatch,
                    fmt::format("{} was started with config {} but the current config is {}; use a fresh "
                                "output directory",
                                out_.string(), prior.substr(0, 12), digest.substr(0, 12)));
      }
      return;
    }
    auto j = config_.to_json();
    j.erase("output_dir");
    write_file(path, nlohmann::json{{"digest", digest}, {"config", j}}.dump(2) + "\n");
  }

  std::optional<DoneMarker> marker(Stage s) const {
    const auto path = marker_path(s);
    if (!fs::exists(path)) return std::nullopt;
    std::ifstream in(path);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    try {
      auto m = DoneMarker::from_json(j);
      if (m.config_digest != config_.digest()) return std::nullopt;
      return m;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  bool outputs_intact(const DoneMarker& m) const {
    for (const auto& [file, digest] : m.outputs) {
      const auto path = out_ / file;
      if (!fs::exists(path) || sha256_file(path) != digest) return false;
    }
    return true;
  }

  // Input digest of a stage given its upstream marker (absent for ingest).
  std::string input_digest(Stage s, const DoneMarker* upstream) const {
    Sha256 h;
    h.update(to_string(s));
    switch (s) {
      case Stage::kIngest:
        for (const auto& m : config_.manifests) {
          h.update(fmt::format("|{}|", to_string(m.source)));
          h.update(fs::exists(m.path) ? sha256_file(m.path) : std::string("missing"));
        }
        break;
      case Stage::kTranslate:
        h.update(upstream->output_digest());
        if (config_.backend.kind == BackendKind::kMock && !config_.backend.mock_fixture.empty() &&
            fs::exists(config_.backend.mock_fixture)) {
          h.update(sha256_file(config_.backend.mock_fixture));
        }
        break;
      case Stage::kTemplate:
        h.update(upstream->output_digest());
        h.update(templates().digest());
        break;
      case Stage::kStats: {
        h.update(upstream->output_digest());
        const auto translate = marker(Stage::kTranslate);
        h.update(translate ? translate->output_digest() : std::string("missing"));
        break;
      }
      case Stage::kCompose:
        h.update(upstream->output_digest());
        break;
    }
    return h.hex_digest();
  }

  StageReport run(Stage stage) {
    check_config();
    std::optional<DoneMarker> upstream;
    if (stage != Stage::kIngest) {
      const auto prev = kAllStages[static_cast<std::size_t>(stage) - 1];
      upstream = marker(prev);
      if (!upstream || !outputs_intact(*upstream)) {
        throw Error(ErrorCode::kMissingUpstream,
                    fmt::format("stage '{}' needs a completed '{}' stage", to_string(stage), to_string(prev)));
      }
      if (stage == Stage::kStats && !marker(Stage::kTranslate)) {
        throw Error(ErrorCode::kMissingUpstream, "stage 'stats' needs a completed 'translate' stage");
      }
    }
    const auto input = input_digest(stage, upstream ? &*upstream : nullptr);
    if (auto done = marker(stage); done && done->input_digest == input && outputs_intact(*done)) {
      auto report = done->report;
      report.processed = 0;
      report.reused = true;
      return report;
    }

    fs::remove(marker_path(stage));
    StageResult result;
    switch (stage) {
      case Stage::kIngest: result = ingest(); break;
      case Stage::kCompose: result = compose(); break;
      case Stage::kTranslate: result = translate(); break;
      case Stage::kTemplate: result = render_templates(); break;
      case Stage::kStats: result = stats(); break;
    }
    if (result.report.kept + result.report.rejected_total() != result.report.input) {
      throw Error(ErrorCode::kIoError, fmt::format("stage '{}' lost records: {} kept + {} rejected != {} input",
                                                   to_string(stage), result.report.kept,
                                                   result.report.rejected_total(), result.report.input));
    }

    DoneMarker done;
    done.config_digest = config_.digest();
    done.input_digest = input;
    for (const auto& f : result.outputs) done.outputs[f] = sha256_file(out_ / f);
    done.report = result.report;
    done.shards = result.shards;
    write_file(marker_path(stage), done.to_json().dump(1) + "\n");
    refresh_summary();
    return result.report;
  }

  // Completed stages whose inputs match their upstream's current outputs.
  std::vector<DoneMarker> consistent_chain() const {
    std::vector<DoneMarker> chain;
    for (auto stage : kAllStages) {
      auto m = marker(stage);
      if (!m) break;
      if (stage != Stage::kIngest && m->input_digest != input_digest(stage, &chain.back())) break;
      chain.push_back(std::move(*m));
    }
    return chain;
  }

  BuildManifest manifest() const {
    BuildManifest bm;
    bm.config_digest = config_.digest();
    bm.seed = config_.seed;
    for (const auto& m : consistent_chain()) {
      bm.stages.push_back(m.report);
      bm.shards.insert(bm.shards.end(), m.shards.begin(), m.shards.end());
    }
    return bm;
  }

  void refresh_summary() const {
    const auto bm = manifest();
    write_file(out_ / "manifest.json", bm.to_json().dump(2) + "\n");
    std::string rejections;
    for (const auto& s : bm.stages) {
      std::ifstream in(rejections_path(s.stage), std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      rejections += ss.str();
    }
    write_file(out_ / "rejections.jsonl", rejections);
  }

 private:
  int threads() const { return config_.workers > 0 ? config_.workers : worker_threads(); }

  const TemplateSet& templates() const {
    if (!templates_) {
      templates_ = config_.templates.empty() ? TemplateSet::defaults() : TemplateSet::load(config_.templates);
    }
    return *templates_;
  }

  TranslationBackend& backend() {
    if (impl_.backend == nullptr) {
      impl_.owned_backend = make_backend(config_.backend);
      impl_.backend = impl_.owned_backend.get();
    }
    return *impl_.backend;
  }

  static StageReport new_report(Stage s) {
    StageReport r;
    r.stage = s;
    return r;
  }

  StageResult finish(Stage stage, StageReport report, const std::string& data,
                     const std::vector<RejectionRow>& rejections) {
    StageResult result;
    for (const auto& r : rejections) ++report.rejected[r.reason];
    write_file(data_path(stage), data);
    write_file(rejections_path(stage), jsonl(rejections, [](const RejectionRow& r) { return r.to_json(); }));
    result.report = std::move(report);
    result.outputs = {rel(data_path(stage)), rel(rejections_path(stage))};
    return result;
  }

  StageResult ingest() {
    auto report = new_report(Stage::kIngest);
    std::vector<SourceRecord> records;
    std::vector<RejectionRow> rejections;
    std::set<std::string> ids;
    for (const auto& spec : config_.manifests) {
      ManifestReader reader(spec.path, config_.error_budget, spec.source);
      std::vector<std::pair<std::size_t, SourceRecord>> kept;
      while (auto record = reader.next()) {
        kept.emplace_back(reader.line_no(), std::move(*record));
      }
      report.input += reader.report().total;
      for (const auto& e : reader.report().entries) {
        rejections.push_back({Stage::kIngest, e.id, e.reason, e.detail, spec.source, e.line_no});
      }
      for (auto& [line, record] : kept) {
        if (!ids.insert(record.id).second) {
          rejections.push_back({Stage::kIngest, record.id, std::string(skip_reason::kDuplicateId),
                                "id already used by another manifest", spec.source, line});
          continue;
        }
        records.push_back(std::move(record));
      }
    }
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    report.kept = records.size();
    report.processed = report.input;
    return finish(Stage::kIngest, std::move(report),
                  jsonl(records, [](const SourceRecord& r) { return to_json(r); }), rejections);
  }

  StageResult compose() {
    auto report = new_report(Stage::kCompose);
    std::vector<SourceRecord> records;
    for (const auto& row : read_jsonl(data_path(Stage::kIngest))) records.push_back(source_record_from_json(row));
    report.input = records.size();
    report.processed = records.size();

    const auto images_dir = out_ / "images";
    reset_dir(images_dir);

    struct Composed {
      std::string image_ref;
    };
    const auto n = static_cast<std::ptrdiff_t>(records.size());
    std::vector<std::variant<std::monostate, Composed, RejectionRow>> results(records.size());
    std::vector<std::exception_ptr> errors(records.size());
    const auto& policy = config_.composition;

#pragma omp parallel for schedule(dynamic) num_threads(threads())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& record = records[i];
      auto reject = [&](std::string reason, std::string detail) {
        results[i] = RejectionRow{Stage::kCompose, record.id, std::move(reason), std::move(detail), record.source,
                                  std::nullopt};
      };
      try {
        if (static_cast<int>(record.image_paths.size()) > policy.max_images) {
          reject(std::string(to_string(RejectReason::kTooManyImages)),
                 fmt::format("{} images exceeds the limit of {}", record.image_paths.size(), policy.max_images));
          continue;
        }
        std::vector<ImageBuffer> images;
        bool loaded = true;
        for (const auto& p : record.image_paths) {
          try {
            images.push_back(load_image(config_.dataset_root / p));
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kFileNotFound && e.code() != ErrorCode::kDecodeError) throw;
            reject(e.code() == ErrorCode::kFileNotFound ? "image_not_found" : "image_decode_error", p);
            loaded = false;
            break;
          }
        }
        if (!loaded) continue;
        auto outcome = apply_policy(record, images, policy);
        if (auto* rejection = std::get_if<Rejection>(&outcome)) {
          reject(std::string(to_string(rejection->reason)), rejection->detail);
          continue;
        }
        const auto name = image_file_name(record.id);
        write_png(images_dir / name, to_image_buffer(std::move(std::get<CompositeImage>(outcome))));
        results[i] = Composed{"images/" + name};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    rethrow_first(errors);

    std::string data;
    std::vector<RejectionRow> rejections;
    StageResult extra;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (auto* c = std::get_if<Composed>(&results[i])) {
        data += to_jsonl_line({{"record", to_json(records[i])}, {"image_ref", c->image_ref}});
        data += '\n';
        extra.outputs.push_back(c->image_ref);
        ++report.kept;
      } else {
        rejections.push_back(std::get<RejectionRow>(results[i]));
      }
    }
    auto result = finish(Stage::kCompose, std::move(report), data, rejections);
    result.outputs.insert(result.outputs.end(), extra.outputs.begin(), extra.outputs.end());
    return result;
  }

  StageResult translate() {
    auto report = new_report(Stage::kTranslate);
    struct Input {
      SourceRecord record;
      std::string image_ref;
    };
    std::vector<Input> inputs;
    for (const auto& row : read_jsonl(data_path(Stage::kCompose))) {
      inputs.push_back({source_record_from_json(row.at("record")), row.at("image_ref").get<std::string>()});
    }
    report.input = inputs.size();
    report.processed = inputs.size();

    TranslationCache cache(config_.effective_cache_path());
    Translator translator(config_.backend, backend(), cache, config_.qc, config_.tokenizer);

    const auto n = static_cast<std::ptrdiff_t>(inputs.size());
    std::vector<std::optional<RecordTranslation>> results(inputs.size());
    std::vector<std::exception_ptr> errors(inputs.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        results[i] = translator.translate_record(inputs[i].record, inputs[i].image_ref);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    rethrow_first(errors);

    std::string data;
    std::string review;
    std::vector<RejectionRow> rejections;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto& record = inputs[i].record;
      if (const auto* discard = std::get_if<Discard>(&*results[i])) {
        rejections.push_back({Stage::kTranslate, record.id, std::string(to_string(discard->reason)),
                              discard->detail, record.source, std::nullopt});
        continue;
      }
      nlohmann::json pair = std::holds_alternative<AlignmentPair>(*results[i])
                                ? to_json(std::get<AlignmentPair>(*results[i]))
                                : to_json(std::get<InstructionPair>(*results[i]));
      const nlohmann::json row{{"id", record.id},
                               {"source", to_string(record.source)},
                               {"subset", subset_name(record.text_role)},
                               {"pair", pair}};
      data += to_jsonl_line(row);
      data += '\n';
      if (config_.review_every > 0 && report.kept % config_.review_every == 0) {
        review += to_jsonl_line({{"id", record.id}, {"original", to_json(record)}, {"translation", pair}});
        review += '\n';
      }
      ++report.kept;
    }
    auto result = finish(Stage::kTranslate, std::move(report), data, rejections);
    const auto review_path = out_ / "review" / "sample.jsonl";
    std::error_code ec;
    fs::remove_all(out_ / "review", ec);
    if (config_.review_every > 0) {
      write_file(review_path, review);
      result.outputs.push_back(rel(review_path));
    }
    return result;
  }

  StageResult render_templates() {
    auto report = new_report(Stage::kTemplate);
    const auto rows = read_jsonl(data_path(Stage::kTranslate));
    report.input = rows.size();
    report.processed = rows.size();
    const auto& set = templates();

    std::vector<DialogSample> alignment;
    std::vector<DialogSample> instruction;
    std::vector<RejectionRow> rejections;
    std::string data;
    for (const auto& row : rows) {
      const auto id = row.at("id").get<std::string>();
      const auto source = parse_source(row.at("source").get<std::string>());
      const auto subset = row.at("subset").get<std::string>();
      DialogSample sample;
      if (subset == "alignment") {
        const auto pair = alignment_pair_from_json(row.at("pair"));
        sample = render_alignment_dialog(pair, select_template(Task::kCaption, id, config_.seed, set));
      } else {
        const auto pair = instruction_pair_from_json(row.at("pair"));
        sample = render_instruction_dialog(pair, select_template(Task::kVqa, id, config_.seed, set));
      }
      if (const auto v = validate_dialog(sample); !v.ok()) {
        std::string detail;
        for (const auto& violation : v.violations) detail += (detail.empty() ? "" : "; ") + violation;
        rejections.push_back({Stage::kTemplate, id, "invalid_dialog", detail, source, std::nullopt});
        continue;
      }
      data += to_jsonl_line(
          {{"id", id}, {"source", to_string(source)}, {"subset", subset}, {"template_id", sample.template_id}});
      data += '\n';
      (subset == "alignment" ? alignment : instruction).push_back(std::move(sample));
      ++report.kept;
    }

    reset_dir(out_ / "alignment");
    reset_dir(out_ / "instruction");
    auto shards = write_shards(std::move(alignment), config_.shard_size, out_ / "alignment", "alignment/");
    auto more = write_shards(std::move(instruction), config_.shard_size, out_ / "instruction", "instruction/");
    shards.insert(shards.end(), more.begin(), more.end());

    auto result = finish(Stage::kTemplate, std::move(report), data, rejections);
    for (const auto& s : shards) result.outputs.push_back(s.file);
    result.shards = std::move(shards);
    return result;
  }

  StageResult stats() {
    auto report = new_report(Stage::kStats);
    std::set<std::string> kept_ids;
    for (const auto& row : read_jsonl(data_path(Stage::kTemplate))) kept_ids.insert(row.at("id").get<std::string>());
    report.input = kept_ids.size();
    report.processed = kept_ids.size();
    report.kept = kept_ids.size();

    // field texts per source, per field index
    struct Subset {
      std::string name;
      std::string pair_label;
      std::vector<std::string> fields;
      std::map<Source, std::size_t> pairs;
      std::map<Source, std::vector<std::vector<std::string>>> texts;
    };
    Subset alignment{"alignment", "Image-Text pairs #", {"C", "I"}, {}, {}};
    Subset instruction{"instruction", "QA pairs #", {"Q", "A"}, {}, {}};
    auto add = [](Subset& s, Source source, std::size_t field, std::string text) {
      auto& per_field = s.texts[source];
      per_field.resize(s.fields.size());
      per_field[field].push_back(std::move(text));
    };
    for (const auto& row : read_jsonl(data_path(Stage::kTranslate))) {
      const auto id = row.at("id").get<std::string>();
      if (!kept_ids.contains(id)) continue;
      const auto source = parse_source(row.at("source").get<std::string>());
      if (row.at("subset") == "alignment") {
        const auto pair = alignment_pair_from_json(row.at("pair"));
        ++alignment.pairs[source];
        add(alignment, source, pair.category == Category::kContext ? 0 : 1, pair.text_zh);
      } else {
        const auto pair = instruction_pair_from_json(row.at("pair"));
        ++instruction.pairs[source];
        add(instruction, source, 0, pair.question_zh);
        add(instruction, source, 1, pair.answer_zh);
      }
    }

    StageResult result;
    const auto stats_dir = out_ / "stats";
    reset_dir(stats_dir);
    for (auto* subset : {&alignment, &instruction}) {
      StatsTable table;
      table.pair_row_label = subset->pair_label;
      table.fields = subset->fields;
      std::vector<std::vector<std::string>> totals(subset->fields.size());
      std::size_t total_pairs = 0;
      auto column = [&](std::string name, std::size_t pairs, const std::vector<std::vector<std::string>>& texts) {
        StatsColumn c;
        c.name = std::move(name);
        c.pairs = pairs;
        for (std::size_t f = 0; f < subset->fields.size(); ++f) {
          if (f < texts.size() && !texts[f].empty()) {
            c.fields.emplace_back(summarize_texts(subset->fields[f] + " tokens", texts[f], config_.tokenizer));
          } else {
            c.fields.emplace_back(std::nullopt);
          }
        }
        return c;
      };
      for (auto source : {Source::kPmcCaseReport, Source::kPmcOa, Source::kPmcVqa}) {
        auto it = subset->pairs.find(source);
        if (it == subset->pairs.end()) continue;
        auto& texts = subset->texts[source];
        texts.resize(subset->fields.size());
        table.columns.push_back(column(std::string(display_name(source)), it->second, texts));
        total_pairs += it->second;
        for (std::size_t f = 0; f < texts.size(); ++f) {
          totals[f].insert(totals[f].end(), texts[f].begin(), texts[f].end());
        }
      }
      table.columns.push_back(column("Total", total_pairs, totals));

      const auto txt = stats_dir / (subset->name + ".txt");
      const auto json = stats_dir / (subset->name + ".json");
      write_file(txt, render_stats_table(table));
      auto j = stats_table_to_json(table);
      j["subset"] = subset->name;
      j["tokenizer"] = config_.tokenizer.id;
      write_file(json, j.dump(2) + "\n");
      result.outputs.push_back(rel(txt));
      result.outputs.push_back(rel(json));
    }
    write_file(rejections_path(Stage::kStats), "");
    result.outputs.push_back(rel(rejections_path(Stage::kStats)));
    result.report = std::move(report);
    return result;
  }

  const PipelineConfig& config_;
  BackendSlot& impl_;
  fs::path out_;
  fs::path work_;
  mutable std::optional<TemplateSet> templates_;
};

}  // namespace

StageReport Pipeline::run_stage(Stage stage) {
  StageRunner runner(config_, *impl_);
  return runner.run(stage);
}

BuildManifest Pipeline::build_all() {
  StageRunner runner(config_, *impl_);
  for (auto stage : kAllStages) runner.run(stage);
  return runner.manifest();
}

BuildManifest Pipeline::manifest() const {
  StageRunner runner(config_, *impl_);
  return runner.manifest();
}

}  // namespace medcorpus
