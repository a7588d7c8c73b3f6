#include "flare/cli.hpp"

#include "flare/config.hpp"
#include "flare/error.hpp"
#include "flare/export.hpp"
#include "flare/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>

namespace flare {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config;
  std::string store;
  std::string manifest;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool dry_run = false;
  // Subcommand-specific.
  std::string input;
  std::string synth;
  std::string baseline;
  std::string pairs;
  std::string json_out;
  std::string t2i_out;
  std::string i2i_out;
  double train_frac = 0.8;
  bool macro = false;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "Pipeline config (JSON)");
  sub->add_option("--store", o.store, "Content store root");
  sub->add_option("--manifest", o.manifest, "Input manifest");
  sub->add_option("--out", o.out, "Output path");
  sub->add_option("--seed", o.seed, "Global seed (overrides the config)");
  sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_flag("--dry-run", o.dry_run, "Print planned counts without writing");
}

[[noreturn]] void missing(const char* what) {
  throw Error(ErrorKind::InvalidInput, std::string(what) + " is required");
}

PipelineConfig effective_config(const Options& o) {
  json j = json::object();
  fs::path base;
  if (!o.config.empty()) {
    j = PipelineConfig::load_json(o.config);
    base = fs::path(o.config).parent_path();
  }
  if (o.seed && j.is_object()) j["global_seed"] = *o.seed;
  PipelineConfig c = PipelineConfig::from_json(j, base);
  if (!o.store.empty()) c.store_root = o.store;
  if (o.workers) c.workers = *o.workers;
  return c;
}

ContentStore store_of(const PipelineConfig& c) {
  if (c.store_root.empty()) throw Error(ErrorKind::ConfigError, "store: required (config or --store)");
  return ContentStore(c.store_root);
}

DatasetManifest input_manifest(const Options& o) {
  if (o.manifest.empty()) missing("--manifest");
  return read_manifest(o.manifest);
}

void emit(DatasetManifest m, const PipelineConfig& c, const Options& o, std::ostream& out) {
  m.config_snapshot["pipeline"] = c.snapshot();
  write_manifest(m, o.out);
  out << to_string(m.stage) << ": " << m.records.size() << " records -> " << o.out << '\n';
}

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
  const PipelineConfig c = effective_config(o);
  c.seed();
  if (o.input.empty()) missing("--input");
  if (o.dry_run) {
    const ScanResult scan = scan_directory(o.input, c.taxonomy, c.strict_layout);
    out << "ingest: " << scan.entries.size() << " candidate images\n";
    return kExitOk;
  }
  if (o.out.empty()) missing("--out");
  const IngestResult r =
      ingest(o.input, c.taxonomy, c.ingest, store_of(c), {c.workers, c.strict_layout});
  for (const auto& conflict : r.report.label_conflicts) err << "warning: label conflict: " << conflict << '\n';
  out << "scanned " << r.report.files_scanned << ", skipped " << r.report.non_image_skipped
      << ", undecodable " << r.report.undecodable << ", policy-dropped " << r.report.dropped_by_policy
      << ", exact duplicates " << r.report.exact_duplicates << ", near duplicates "
      << r.report.near_duplicates << '\n';
  emit(r.manifest, c, o, out);
  return kExitOk;
}

int cmd_restore(const Options& o, std::ostream& out, std::ostream&) {
  const PipelineConfig c = effective_config(o);
  c.seed();
  const DatasetManifest m = input_manifest(o);
  if (o.dry_run) {
    out << "restore: " << m.records.size() << " records planned\n";
    return kExitOk;
  }
  if (o.out.empty()) missing("--out");
  emit(restore_dataset(m, c.restore, store_of(c), {c.workers, nullptr}), c, o, out);
  return kExitOk;
}

int cmd_augment(const Options& o, std::ostream& out, std::ostream& err) {
  const PipelineConfig c = effective_config(o);
  const AugmentationPlan plan = AugmentationPlan::from_json(c.augment, c.seed());
  const DatasetManifest m = input_manifest(o);
  if (o.dry_run) {
    out << "augment: " << m.records.size() * static_cast<std::size_t>(plan.k()) << " records planned\n";
    return kExitOk;
  }
  if (o.out.empty()) missing("--out");
  const AugmentResult r = augment_dataset(m, plan, store_of(c), c.workers);
  for (const auto& id : r.report.collisions) err << "warning: augmentation collision: " << id << '\n';
  emit(r.manifest, c, o, out);
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream&) {
  const PipelineConfig c = effective_config(o);
  c.seed();
  if (o.dry_run) {
    out << "synth: "
        << c.taxonomy.fine_classes().size() * static_cast<std::size_t>(c.synth.per_class_count) *
               static_cast<std::size_t>(c.synth.variations_k)
        << " records planned\n";
    return kExitOk;
  }
  if (o.out.empty()) missing("--out");
  SynthResult r = synth_dataset(c.taxonomy, c.synth, c.restore, store_of(c), {c.workers, nullptr, nullptr});
  auto write_extra = [&](DatasetManifest m, const std::string& path) {
    if (path.empty()) return;
    Options extra = o;
    extra.out = path;
    emit(std::move(m), c, extra, out);
  };
  write_extra(r.t2i, o.t2i_out);
  write_extra(r.i2i, o.i2i_out);
  emit(std::move(r.hr), c, o, out);
  return kExitOk;
}

int copies_of(const DatasetManifest& m, const char* section, const char* field, int fallback) {
  const json& s = m.config_snapshot;
  if (s.contains(section) && s.at(section).contains(field)) return s.at(section).at(field).get<int>();
  return fallback;
}

int cmd_mix(const Options& o, std::ostream& out, std::ostream& err) {
  const PipelineConfig c = effective_config(o);
  c.seed();
  if (o.synth.empty()) missing("--synth (synthetic T2I_Aug_HR manifest)");
  const DatasetManifest aug = input_manifest(o);
  const DatasetManifest syn = read_manifest(o.synth);
  const int k_aug = copies_of(aug, "augment", "k", c.plan().k());
  const int k_syn = copies_of(syn, "synth", "variations_k", c.synth.variations_k);
  const DatasetManifest a = select(c.mix.alpha, k_aug, aug, c.mix.count_rule, c.mix.kind_priority);
  const DatasetManifest s = select(c.mix.beta, k_syn, syn, c.mix.count_rule);
  if (o.dry_run) {
    out << "mix: " << a.records.size() << " augmented + " << s.records.size() << " synthetic = "
        << a.records.size() + s.records.size() << " records planned\n";
    return kExitOk;
  }
  if (o.out.empty()) missing("--out");
  const CombineResult r = combine(a, s, c.mix, k_aug);
  for (const auto& id : r.collisions) err << "warning: synthetic id already present: " << id << '\n';
  emit(r.manifest, c, o, out);
  return kExitOk;
}

fs::path store_for_read(const Options& o) {
  if (!o.store.empty()) return o.store;
  if (!o.config.empty()) {
    const PipelineConfig c = effective_config(o);
    if (!c.store_root.empty()) return c.store_root;
  }
  throw Error(ErrorKind::ConfigError, "store: required (config or --store)");
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
  const DatasetManifest m = input_manifest(o);
  const fs::path store = store_for_read(o);
  std::optional<DatasetManifest> baseline, pairs;
  if (!o.baseline.empty()) baseline = read_manifest(o.baseline);
  if (!o.pairs.empty()) pairs = read_manifest(o.pairs);
  if (o.dry_run) {
    out << "report: " << m.records.size() << " records\n";
    return kExitOk;
  }
  if (o.out.empty()) missing("--out");
  const QualityReport r = build_report(
      m, store, {baseline ? &*baseline : nullptr, pairs ? &*pairs : nullptr, o.workers.value_or(1)});
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';
  const fs::path csv = o.out;
  const fs::path js = o.json_out.empty() ? fs::path(csv).replace_extension(".json") : fs::path(o.json_out);
  write_text(csv, report_csv(r));
  write_text(js, report_json(r).dump(2) + "\n");
  out << "report: " << r.rows.size() << " classes -> " << csv.string() << ", " << js.string() << '\n';
  return kExitOk;
}

int cmd_export(const Options& o, std::ostream& out, std::ostream& err) {
  const DatasetManifest m = input_manifest(o);
  std::optional<std::uint64_t> seed = o.seed;
  if (!seed && !o.config.empty()) seed = effective_config(o).seed();
  if (!seed) throw Error(ErrorKind::ConfigError, "global_seed: required for the split (--seed or config)");
  if (o.out.empty()) missing("--out");
  const SplitOptions split{o.train_frac, *seed, o.macro};
  if (o.dry_run) {
    const ClassTaxonomy t = m.config_snapshot.contains("taxonomy")
                                ? ClassTaxonomy::from_json(m.config_snapshot.at("taxonomy"))
                                : ClassTaxonomy::default_taxonomy();
    const Split s = stratified_split(m, t, split);
    out << "export: " << s.train.size() << " train, " << s.test.size() << " test\n";
    return kExitOk;
  }
  const ExportResult r = export_dataset(m, ContentStore(store_for_read(o)), o.out, split);
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';
  out << "export: " << r.split.train.size() << " train, " << r.split.test.size() << " test -> " << o.out
      << '\n';
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream&) {
  const DatasetManifest m = input_manifest(o);
  const ValidationReport r = validate_manifest(m, store_for_read(o));
  std::size_t problems = r.violations.size();
  for (const auto& v : r.violations)
    out << to_string(v.kind) << ' ' << v.record_id << ": " << v.detail << '\n';
  if (!o.config.empty() || o.seed) {
    const json expected = effective_config(o).snapshot();
    if (!m.config_snapshot.contains("pipeline")) {
      out << "snapshot-mismatch -: manifest carries no pipeline snapshot\n";
      ++problems;
    } else if (m.config_snapshot.at("pipeline") != expected) {
      for (const auto& [key, value] : expected.items()) {
        const json& actual = m.config_snapshot.at("pipeline");
        if (!actual.contains(key) || actual.at(key) != value) {
          out << "snapshot-mismatch -: field '" << key << "' differs from the effective config\n";
          ++problems;
        }
      }
    }
  }
  out << "verified " << r.records_checked << " records, " << problems << " problems\n";
  return problems == 0 ? kExitOk : kExitDomain;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dataset curation pipeline: ingest, restore, augment, synthesize, mix, report."};
  app.require_subcommand(1);
  Options o;

  auto* ingest_cmd = app.add_subcommand("ingest", "Ingest a class-per-directory image tree");
  add_common(ingest_cmd, o);
  ingest_cmd->add_option("--input", o.input, "Corpus root (one directory per fine class)");
  auto* restore_cmd = app.add_subcommand("restore", "Upscale every record to the HR tier");
  add_common(restore_cmd, o);
  auto* augment_cmd = app.add_subcommand("augment", "Add k - 1 augmented copies per record");
  add_common(augment_cmd, o);
  auto* synth_cmd = app.add_subcommand("synth", "Generate T2I bases, I2I variations and their HR pass");
  add_common(synth_cmd, o);
  synth_cmd->add_option("--t2i-out", o.t2i_out, "Also write the T2I manifest here");
  synth_cmd->add_option("--i2i-out", o.i2i_out, "Also write the pre-restoration I2I manifest here");
  auto* mix_cmd = app.add_subcommand("mix", "Select and combine augmented and synthetic data");
  add_common(mix_cmd, o);
  mix_cmd->add_option("--synth", o.synth, "Synthetic T2I_Aug_HR manifest");
  auto* report_cmd = app.add_subcommand("report", "Write CSV and JSON quality reports");
  add_common(report_cmd, o);
  report_cmd->add_option("--baseline", o.baseline, "Baseline manifest for the expansion ratio");
  report_cmd->add_option("--pairs", o.pairs, "Manifest holding the parents of restored records");
  report_cmd->add_option("--json", o.json_out, "JSON report path (default: --out with .json)");
  auto* export_cmd = app.add_subcommand("export", "Export a stratified train/test directory tree");
  add_common(export_cmd, o);
  export_cmd->add_option("--train-frac", o.train_frac, "Training fraction")->check(CLI::Range(0.0, 1.0));
  export_cmd->add_flag("--macro", o.macro, "Name directories by macro class");
  auto* verify_cmd = app.add_subcommand("verify", "Validate a manifest against the store");
  add_common(verify_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitDomain;
  }

  try {
    if (ingest_cmd->parsed()) return cmd_ingest(o, out, err);
    if (restore_cmd->parsed()) return cmd_restore(o, out, err);
    if (augment_cmd->parsed()) return cmd_augment(o, out, err);
    if (synth_cmd->parsed()) return cmd_synth(o, out, err);
    if (mix_cmd->parsed()) return cmd_mix(o, out, err);
    if (report_cmd->parsed()) return cmd_report(o, out, err);
    if (export_cmd->parsed()) return cmd_export(o, out, err);
    return cmd_verify(o, out, err);
  } catch (const StageAborted& e) {
    err << "error: " << e.what() << '\n';
    for (const auto& id : e.failed_ids()) err << "  failed: " << id << '\n';
    return e.is_environmental() ? kExitEnvironment : kExitDomain;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_environmental() ? kExitEnvironment : kExitDomain;
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << '\n';
    return kExitEnvironment;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

}  // namespace flare
