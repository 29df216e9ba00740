// Single entry point for the partially-supervised multi-phase segmentation
// toolkit: phantom generation, preprocessing, translation, two-stage
// training, attention extraction, evaluation, and ablations.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "easeg/attention/attention.hpp"
#include "easeg/core/fs.hpp"
#include "easeg/core/ini.hpp"
#include "easeg/eval/metrics.hpp"
#include "easeg/eval/report.hpp"
#include "easeg/gan/train.hpp"
#include "easeg/phantom/phantom.hpp"
#include "easeg/train/inference.hpp"
#include "easeg/train/trainer.hpp"
#include "easeg/util/manifest.hpp"
#include "easeg/vol/preprocess.hpp"

namespace fs = std::filesystem;
using namespace easeg;

namespace {

Ini load_config_or_empty(const std::string& path) {
  if (path.empty()) return Ini{};
  return Ini::load(path);
}

vol::Window parse_window(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("window must be 'lo:hi', got " + spec);
  return {std::stod(spec.substr(0, colon)), std::stod(spec.substr(colon + 1))};
}

std::vector<vol::PhaseTag> parse_phases(const std::string& csv) {
  std::vector<vol::PhaseTag> out;
  for (const auto& tok : split_csv(csv)) {
    if (tok == "A" || tok == "arterial")
      out.push_back(vol::PhaseTag::arterial);
    else if (tok == "V" || tok == "venous")
      out.push_back(vol::PhaseTag::venous);
    else
      out.push_back(vol::phase_from_string(tok));
  }
  if (out.empty()) throw std::runtime_error("no phases given");
  return out;
}

RunManifest begin_manifest(const std::string& subcommand, const Ini& cfg,
                           std::uint64_t seed) {
  RunManifest m;
  m.subcommand = subcommand;
  m.config_snapshot = cfg.serialize();
  m.seed = seed;
  m.started_at = iso_timestamp();
  return m;
}

gan::TranslationConfig translation_config_from(const Ini& ini) {
  gan::TranslationConfig c;
  c.lambda = ini.get_double("translation.lambda", c.lambda);
  c.learning_rate = ini.get_double("translation.lr", c.learning_rate);
  c.epochs = ini.get_int("translation.epochs", c.epochs);
  c.batch_size = ini.get_int("translation.batch_size", c.batch_size);
  c.width = ini.get_int("translation.width", c.width);
  c.res_blocks = ini.get_int("translation.res_blocks", c.res_blocks);
  c.max_steps = ini.get_int64("translation.max_steps", c.max_steps);
  c.seed = static_cast<std::uint64_t>(ini.get_int64("translation.seed", 0));
  return c;
}

train::TrainerPaths trainer_paths_from(Ini& ini, const std::string& out_dir) {
  train::TrainerPaths p;
  p.internal_dir = ini.require_string("data.internal");
  p.synthetic_dir = ini.get_string("data.synthetic", "");
  p.external_dir = ini.get_string("data.external", "");
  p.translated_dir = ini.get_string("data.translated", "");
  p.stage1_checkpoint = ini.get_string("data.stage1_checkpoint", "");
  p.run_dir = out_dir;
  return p;
}

// slices of every axial plane of the given phase across the named cases
std::vector<ImageF> collect_slices(const fs::path& dir,
                                   const std::vector<std::string>& cases,
                                   vol::PhaseTag phase) {
  std::vector<ImageF> slices;
  for (const auto& name : cases) {
    if (!vol::has_volume(dir / name, phase)) continue;
    vol::Volume v = vol::read_volume(dir / name, phase);
    for (int z = 0; z < v.shape().nz; ++z) slices.push_back(v.data.slice(z));
  }
  return slices;
}

std::vector<std::string> train_split_cases(const fs::path& internal_dir,
                                           const train::TrainConfig& cfg) {
  auto names = list_subdirs(internal_dir);
  std::vector<std::string> patients;
  for (const auto& n : names) {
    vol::Volume v = vol::read_volume(internal_dir / n, cfg.phases.front());
    patients.push_back(v.patient_id);
  }
  auto [train_idx, test_idx] =
      vol::split_patient_ids(patients, cfg.train_fraction, cfg.seed);
  std::vector<std::string> out;
  for (auto i : train_idx) out.push_back(names[i]);
  return out;
}

std::vector<eval::CaseResult> evaluate_dirs(const fs::path& pred_dir,
                                            const fs::path& truth_dir,
                                            const std::vector<vol::PhaseTag>&
                                                phases) {
  std::vector<eval::CaseResult> results;
  for (const auto& name : list_subdirs(pred_dir)) {
    for (auto phase : phases) {
      if (!vol::has_labels(pred_dir / name, phase)) continue;
      if (!vol::has_labels(truth_dir / name, phase))
        throw std::runtime_error("truth labels missing for " + name + "/" +
                                 vol::to_string(phase));
      vol::LabelMap pred = vol::read_labels(pred_dir / name, phase);
      vol::LabelMap truth = vol::read_labels(truth_dir / name, phase);
      GridB pred_b(pred.shape()), truth_b(truth.shape());
      for (int z = 0; z < pred.shape().nz; ++z) {
        pred_b.slice(z) = (pred.labels.slice(z) > 0).cast<std::uint8_t>();
        truth_b.slice(z) = (truth.labels.slice(z) > 0).cast<std::uint8_t>();
      }
      eval::CaseResult r;
      r.case_id = name;
      r.phase = phase;
      r.dsc = eval::dsc(pred_b, truth_b);
      results.push_back(r);
    }
  }
  if (results.empty())
    throw std::runtime_error("no prediction/truth pairs found under " +
                             pred_dir.string());
  return results;
}

// ---------------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------------

int cmd_generate_phantom(const std::string& config_path, int cases,
                         int external, long long seed,
                         const std::string& out_dir) {
  Ini cfg = load_config_or_empty(config_path);
  phantom::CorpusConfig corpus;
  corpus.n_internal = cases > 0 ? cases : cfg.get_int("phantom.cases", 20);
  corpus.n_external =
      external > 0 ? external : cfg.get_int("phantom.external", 10);
  corpus.seed = seed >= 0 ? static_cast<std::uint64_t>(seed)
                          : static_cast<std::uint64_t>(
                                cfg.get_int64("phantom.seed", 7));
  corpus.noise_std = cfg.get_double("phantom.noise_std", corpus.noise_std);
  corpus.external_gamma =
      cfg.get_double("phantom.external_gamma", corpus.external_gamma);
  corpus.shape.nx = cfg.get_int("phantom.nx", corpus.shape.nx);
  corpus.shape.ny = cfg.get_int("phantom.ny", corpus.shape.ny);
  corpus.shape.nz = cfg.get_int("phantom.nz", corpus.shape.nz);
  corpus.lobulated = cfg.get_bool("phantom.lobulated", corpus.lobulated);

  DirLock lock(out_dir);
  RunManifest manifest = begin_manifest("generate-phantom", cfg, corpus.seed);
  phantom::generate_corpus(corpus, out_dir);
  manifest.artifacts["internal_cases"] = std::to_string(corpus.n_internal);
  manifest.artifacts["external_cases"] = std::to_string(corpus.n_external);
  manifest.finished_at = iso_timestamp();
  manifest.write(fs::path(out_dir) / "manifest.json");
  std::cout << "phantom corpus: " << corpus.n_internal << " internal + "
            << corpus.n_external << " external cases -> " << out_dir << "\n";
  return 0;
}

int cmd_prepare_data(const std::string& config_path, const std::string& input,
                     const std::string& output, const std::string& window_spec) {
  Ini cfg = load_config_or_empty(config_path);
  vol::Window window = parse_window(
      window_spec.empty() ? cfg.get_string("data.window", "-125:275")
                          : window_spec);
  DirLock lock(output);
  RunManifest manifest = begin_manifest("prepare-data", cfg, 0);

  long n_volumes = 0;
  for (const auto& group : list_subdirs(input)) {
    for (const auto& name : list_subdirs(fs::path(input) / group)) {
      fs::path src = fs::path(input) / group / name;
      fs::path dst = fs::path(output) / group / name;
      // .vol volumes (every phase present), plus optional .nii ingestion
      for (const auto& file : list_files(src, ".meta")) {
        std::string stem = fs::path(file).stem().string();
        if (stem.find(".lbl") != std::string::npos) continue;
        vol::PhaseTag phase = vol::phase_from_string(stem);
        vol::Volume v = vol::read_volume(src, phase);
        vol::write_volume(dst, vol::window_and_normalize(v, window));
        ++n_volumes;
      }
      for (const auto& file : list_files(src, ".nii")) {
        vol::Volume v = vol::read_nifti(src / file);
        v.phase = vol::phase_from_string(fs::path(file).stem().string());
        vol::write_volume(dst, vol::window_and_normalize(v, window));
        ++n_volumes;
      }
      // label maps pass through untouched
      for (const auto& file : list_files(src, ".lbl"))
        fs::copy_file(src / file, dst / file,
                      fs::copy_options::overwrite_existing);
      for (const auto& file : list_files(src, ".meta"))
        if (file.find(".lbl.meta") != std::string::npos)
          fs::copy_file(src / file, dst / file,
                        fs::copy_options::overwrite_existing);
    }
  }
  manifest.artifacts["volumes"] = std::to_string(n_volumes);
  manifest.finished_at = iso_timestamp();
  manifest.write(fs::path(output) / "manifest.json");
  std::cout << "normalized " << n_volumes << " volumes -> " << output << "\n";
  return 0;
}

int cmd_train_cyclegan(const std::string& config_path, const std::string& data,
                       const std::string& phases_csv, const std::string& out,
                       double lambda_flag, double lr_flag, int epochs_flag) {
  Ini cfg = load_config_or_empty(config_path);
  gan::TranslationConfig tc = translation_config_from(cfg);
  if (lambda_flag >= 0) tc.lambda = lambda_flag;
  if (lr_flag > 0) tc.learning_rate = lr_flag;
  if (epochs_flag > 0) tc.epochs = epochs_flag;
  train::TrainConfig seg_cfg = train::TrainConfig::from_ini(cfg);

  auto phases = parse_phases(phases_csv.empty() ? "A,V" : phases_csv);
  if (phases.size() != 2)
    throw std::runtime_error("train-cyclegan needs exactly two phases");

  DirLock lock(out);
  RunManifest manifest = begin_manifest("train-cyclegan", cfg, tc.seed);

  auto train_cases = train_split_cases(data, seg_cfg);
  auto slices_a = collect_slices(data, train_cases, phases[0]);
  auto slices_v = collect_slices(data, train_cases, phases[1]);
  auto result = gan::train_translator(slices_a, slices_v, tc);

  fs::path ckpt = fs::path(out) / "translator.ckpt";
  gan::save_translator(ckpt, result.translator, tc);
  manifest.add_artifact_digest("translator", ckpt);
  manifest.finished_at = iso_timestamp();
  manifest.write(fs::path(out) / "manifest.json");
  std::cout << "phase translator trained (" << result.steps
            << " steps, final gen loss " << result.final_gen_loss << ") -> "
            << ckpt << "\n";
  return 0;
}

int cmd_train_domain_translate(const std::string& config_path,
                               const std::string& external_dir,
                               const std::string& internal_dir,
                               const std::string& out) {
  Ini cfg = load_config_or_empty(config_path);
  gan::TranslationConfig tc = translation_config_from(cfg);
  tc.seed = derive_seed(tc.seed, "domain-translation");
  train::TrainConfig seg_cfg = train::TrainConfig::from_ini(cfg);

  DirLock lock(out);
  RunManifest manifest = begin_manifest("train-domain-translate", cfg, tc.seed);

  // external domain -> internal venous appearance
  std::vector<ImageF> slices_ext;
  for (const auto& name : list_subdirs(external_dir)) {
    vol::Volume v = vol::read_volume(fs::path(external_dir) / name,
                                     vol::PhaseTag::external);
    for (int z = 0; z < v.shape().nz; ++z) slices_ext.push_back(v.data.slice(z));
  }
  auto train_cases = train_split_cases(internal_dir, seg_cfg);
  auto slices_int =
      collect_slices(internal_dir, train_cases, vol::PhaseTag::venous);

  auto result = gan::train_translator(slices_ext, slices_int, tc);
  fs::path ckpt = fs::path(out) / "domain_translator.ckpt";
  gan::save_translator(ckpt, result.translator, tc);
  manifest.add_artifact_digest("domain_translator", ckpt);
  manifest.finished_at = iso_timestamp();
  manifest.write(fs::path(out) / "manifest.json");
  std::cout << "domain translator trained (" << result.steps << " steps) -> "
            << ckpt << "\n";
  return 0;
}

int cmd_synthesize(const std::string& translator_path, const std::string& data,
                   const std::string& out, const std::string& mode) {
  DirLock lock(out);
  Ini empty;
  RunManifest manifest = begin_manifest("synthesize", empty, 0);
  manifest.add_input_digest("translator", translator_path);
  gan::Translator translator = gan::load_translator(translator_path);

  long n = 0;
  for (const auto& name : list_subdirs(data)) {
    fs::path src = fs::path(data) / name;
    fs::path dst = fs::path(out) / name;
    if (mode == "phase") {
      for (auto phase : {vol::PhaseTag::arterial, vol::PhaseTag::venous}) {
        if (!vol::has_volume(src, phase)) continue;
        vol::Volume v = vol::read_volume(src, phase);
        vol::write_volume(dst, gan::synthesize_phase(translator, v));
        ++n;
      }
    } else if (mode == "domain") {
      if (!vol::has_volume(src, vol::PhaseTag::external)) continue;
      vol::Volume v = vol::read_volume(src, vol::PhaseTag::external);
      vol::write_volume(dst, gan::domain_translate(translator, v));
      // spleen geometry is unchanged by appearance translation
      vol::LabelMap labels = vol::read_labels(src, vol::PhaseTag::external);
      vol::write_labels(dst, vol::PhaseTag::external_translated, labels,
                        v.patient_id);
      ++n;
    } else {
      throw std::runtime_error("synthesize: mode must be phase or domain");
    }
  }
  manifest.artifacts["volumes"] = std::to_string(n);
  manifest.finished_at = iso_timestamp();
  manifest.write(fs::path(out) / "manifest.json");
  std::cout << "synthesized " << n << " volumes -> " << out << "\n";
  return 0;
}

int cmd_train_spleen(const std::string& config_path, const std::string& out) {
  Ini cfg = load_config_or_empty(config_path);
  train::TrainConfig tcfg = train::TrainConfig::from_ini(cfg);
  train::TrainerPaths paths;
  paths.external_dir = cfg.require_string("data.external");
  paths.translated_dir = cfg.get_string("data.translated", "");
  cfg.check_complete();

  DirLock lock(out);
  RunManifest manifest = begin_manifest("train-spleen", cfg, tcfg.seed);

  std::vector<train::ExternalCaseData> externals;
  {
    train::TrainerPaths load_paths = paths;
    load_paths.internal_dir = "";
    // reuse the loader's external section by loading directly here
    auto load_dir = [&](const fs::path& dir, vol::PhaseTag tag) {
      if (dir.empty() || !fs::exists(dir)) return;
      for (const auto& name : list_subdirs(dir)) {
        if (!vol::has_volume(dir / name, tag)) continue;
        train::ExternalCaseData e;
        e.id = name;
        e.volume = vol::read_volume(dir / name, tag);
        vol::LabelMap l = vol::read_labels(dir / name, tag);
        e.spleen = GridB(l.shape());
        for (int z = 0; z < l.shape().nz; ++z)
          e.spleen.slice(z) = (l.labels.slice(z) > 0).cast<std::uint8_t>();
        externals.push_back(std::move(e));
      }
    };
    load_dir(paths.external_dir, vol::PhaseTag::external);
    load_dir(paths.translated_dir, vol::PhaseTag::external_translated);
  }
  if (externals.empty()) throw std::runtime_error("external set is empty");

  nn::SegNet<float> model = train::stage1_pretrain(externals, tcfg, out);
  fs::path ckpt = fs::path(out) / "stage1.ckpt";
  train::save_segnet_checkpoint(ckpt, model, tcfg, 0, nullptr);
  manifest.add_artifact_digest("stage1_checkpoint", ckpt);
  manifest.finished_at = iso_timestamp();
  manifest.write(fs::path(out) / "manifest.json");
  std::cout << "stage-1 spleen model (" << externals.size() << " cases) -> "
            << ckpt << "\n";
  return 0;
}

int cmd_make_attention(const std::string& model_path, const std::string& data,
                       const std::string& out, double sigma, double rho) {
  DirLock lock(out);
  Ini empty;
  RunManifest manifest = begin_manifest("make-attention", empty, 0);
  manifest.add_input_digest("model", model_path);
  nn::SegNet<float> model = train::load_segnet_checkpoint(model_path);
  if (model.n_classes() != 2)
    throw std::runtime_error("make-attention expects a 2-class spleen model");

  long n = 0;
  for (const auto& name : list_subdirs(data)) {
    for (auto phase : {vol::PhaseTag::arterial, vol::PhaseTag::venous,
                       vol::PhaseTag::synthetic_arterial,
                       vol::PhaseTag::synthetic_venous}) {
      if (!vol::has_volume(fs::path(data) / name, phase)) continue;
      vol::Volume v = vol::read_volume(fs::path(data) / name, phase);
      auto probs = train::infer_probs(model, v);
      auto [pseudo, att] = attention::init_attention(probs, sigma, rho);
      fs::path base = fs::path(out) / name;
      fs::create_directories(base);
      vol::write_mask(base / (std::string(vol::to_string(phase)) + ".pseudo"),
                      pseudo.mask);
      vol::write_mask(
          base / (std::string(vol::to_string(phase)) + ".attention"),
          att.weights);
      ++n;
    }
  }
  manifest.artifacts["masks"] = std::to_string(n);
  manifest.finished_at = iso_timestamp();
  manifest.write(fs::path(out) / "manifest.json");
  std::cout << "attention masks for " << n << " volumes -> " << out << "\n";
  return 0;
}

int cmd_train_seg(const std::string& config_path, const std::string& out,
                  const std::string& resume) {
  Ini cfg = load_config_or_empty(config_path);
  train::TrainConfig tcfg = train::TrainConfig::from_ini(cfg);
  train::TrainerPaths paths = trainer_paths_from(cfg, out);
  cfg.check_complete();
  paths.resume_checkpoint = resume;

  DirLock lock(out);
  RunManifest manifest = begin_manifest("train-seg", cfg, tcfg.seed);

  train::TrainerData data = train::load_trainer_data(paths, tcfg);
  auto result = train::stage2_train(data, tcfg, paths);

  manifest.add_artifact_digest("final_checkpoint", result.final_checkpoint);
  manifest.artifacts["zero_weight_batches"] =
      std::to_string(result.loss_stats.zero_weight_batches);
  manifest.finished_at = iso_timestamp();
  manifest.write(fs::path(out) / "manifest.json");
  std::cout << "training done -> " << result.final_checkpoint << "\n";
  return 0;
}

int cmd_evaluate(const std::string& pred_dir, const std::string& truth_dir,
                 const std::string& phases_csv, const std::string& out_path) {
  auto phases = parse_phases(phases_csv);
  auto results = evaluate_dirs(pred_dir, truth_dir, phases);
  eval::PhaseReport report = eval::phase_report(results);
  if (!out_path.empty()) {
    write_text(out_path, report.table);
    write_text(fs::path(out_path).replace_extension(".csv"), report.rows);
  }
  std::cout << report.table;
  return 0;
}

struct AblateRowSpec {
  std::string name;       // row label
  std::string component;  // component flag, empty for grid rows
  std::string grid_key;
  double grid_value = 0.0;
};

int cmd_ablate(const std::string& config_path, const std::string& components,
               const std::string& grid, const std::string& out) {
  Ini base_cfg = load_config_or_empty(config_path);
  train::TrainConfig base = train::TrainConfig::from_ini(base_cfg);
  DirLock lock(out);
  RunManifest manifest = begin_manifest("ablate", base_cfg, base.seed);

  std::vector<AblateRowSpec> rows;
  if (!components.empty()) {
    for (const auto& flag : split_csv(components)) {
      if (!eval::is_known_component(flag))
        throw std::runtime_error("ablate: unknown component flag '" + flag +
                                 "'");
      rows.push_back({flag, flag, "", 0.0});
    }
  }
  if (!grid.empty()) {
    auto eq = grid.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("ablate: --grid expects key=v1,v2,...");
    std::string key = grid.substr(0, eq);
    for (const auto& v : split_csv(grid.substr(eq + 1)))
      rows.push_back({key + "=" + v, "", key, std::stod(v)});
  }
  if (rows.empty())
    throw std::runtime_error("ablate: nothing to run (no components, no grid)");

  auto run_one = [&](const train::TrainConfig& cfg, const fs::path& run_dir)
      -> std::vector<eval::CaseResult> {
    Ini tmp = base_cfg;
    train::TrainerPaths paths = trainer_paths_from(tmp, run_dir.string());
    tmp.check_complete();
    train::TrainerData data = train::load_trainer_data(paths, cfg);
    train::stage2_train(data, cfg, paths);
    return evaluate_dirs(run_dir / "predictions", paths.internal_dir,
                         cfg.phases);
  };

  std::vector<std::pair<std::string, std::vector<eval::CaseResult>>>
      component_rows;
  std::ostringstream grid_csv;
  grid_csv << "row,phase,mean_dsc\n";

  for (const auto& row : rows) {
    train::TrainConfig cfg = base;
    fs::path row_dir = fs::path(out) / row.name;
    std::vector<eval::CaseResult> results;
    if (row.component == "separate") {
      cfg.apply_component(row.component);
      for (auto phase : base.phases) {
        train::TrainConfig pc = cfg;
        pc.phases = {phase};
        auto r = run_one(pc, row_dir / vol::to_string(phase));
        results.insert(results.end(), r.begin(), r.end());
      }
    } else {
      if (!row.component.empty()) {
        cfg.apply_component(row.component);
      } else {
        if (row.grid_key == "alpha")
          cfg.alpha = row.grid_value;
        else if (row.grid_key == "beta")
          cfg.beta = row.grid_value;
        else if (row.grid_key == "T")
          cfg.refinement_rounds = static_cast<int>(row.grid_value);
        else if (row.grid_key == "sigma")
          cfg.sigma = row.grid_value;
        else if (row.grid_key == "rho")
          cfg.rho = row.grid_value;
        else
          throw std::runtime_error("ablate: unknown grid key " + row.grid_key);
      }
      results = run_one(cfg, row_dir);
    }

    eval::PhaseReport row_report = eval::phase_report(results);
    write_text(row_dir / "report.txt", row_report.table);
    write_text(row_dir / "report.csv", row_report.rows);
    RunManifest row_manifest =
        begin_manifest("ablate/" + row.name, base_cfg, cfg.seed);
    row_manifest.finished_at = iso_timestamp();
    row_manifest.write(row_dir / "manifest.json");

    if (!row.component.empty()) {
      component_rows.emplace_back(row.component, std::move(results));
    } else {
      for (const auto& s : row_report.stats) {
        char line[128];
        std::snprintf(line, sizeof(line), "%s,%s,%.4f\n", row.name.c_str(),
                      s.phase.c_str(), s.mean);
        grid_csv << line;
      }
    }
  }

  if (!component_rows.empty()) {
    eval::AblationReport report = eval::ablation_matrix(component_rows);
    write_text(fs::path(out) / "ablation.txt", report.table);
    write_text(fs::path(out) / "ablation.csv", report.csv);
    std::cout << report.table;
  }
  if (!grid.empty()) {
    write_text(fs::path(out) / "grid.csv", grid_csv.str());
    std::cout << grid_csv.str();
  }
  manifest.artifacts["rows"] = std::to_string(rows.size());
  manifest.finished_at = iso_timestamp();
  manifest.write(fs::path(out) / "manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"external-attention assisted multi-phase segmentation toolkit"};
  app.require_subcommand(1);

  std::string config, input, output, window, data, phases, translator, model;
  std::string resume, pred_dir, truth_dir, components, grid, mode = "phase";
  int cases = -1, external = -1, epochs = -1;
  long long seed = -1;
  double sigma = 32.0, rho = 0.005, lambda = -1.0, lr = -1.0;

  auto* gen = app.add_subcommand("generate-phantom",
                                 "deterministic synthetic multi-phase corpus");
  gen->add_option("--config", config);
  gen->add_option("--cases", cases);
  gen->add_option("--external", external);
  gen->add_option("--seed", seed);
  gen->add_option("--out", output)->required();

  auto* prep = app.add_subcommand("prepare-data",
                                  "window raw HU volumes and normalize");
  prep->add_option("--config", config);
  prep->add_option("--input-dir", input)->required();
  prep->add_option("--output-dir", output)->required();
  prep->add_option("--window", window);

  auto* cyc = app.add_subcommand("train-cyclegan",
                                 "train the phase translation model");
  cyc->add_option("--config", config);
  cyc->add_option("--data", data)->required();
  cyc->add_option("--phases", phases);
  cyc->add_option("--epochs", epochs);
  cyc->add_option("--lambda", lambda);
  cyc->add_option("--lr", lr);
  cyc->add_option("--out", output)->required();

  auto* dom = app.add_subcommand("train-domain-translate",
                                 "train the external-domain translator");
  dom->add_option("--config", config);
  dom->add_option("--external", input)->required();
  dom->add_option("--internal", data)->required();
  dom->add_option("--out", output)->required();

  auto* syn = app.add_subcommand("synthesize",
                                 "apply a translator to volumes");
  syn->add_option("--translator", translator)->required();
  syn->add_option("--data", data)->required();
  syn->add_option("--mode", mode)->check(CLI::IsMember({"phase", "domain"}));
  syn->add_option("--out", output)->required();

  auto* spleen = app.add_subcommand("train-spleen",
                                    "stage-1 spleen pretraining on externals");
  spleen->add_option("--config", config)->required();
  spleen->add_option("--out", output)->required();

  auto* att = app.add_subcommand("make-attention",
                                 "pseudo spleen masks + expanded attention");
  att->add_option("--model", model)->required();
  att->add_option("--data", data)->required();
  att->add_option("--sigma", sigma);
  att->add_option("--rho", rho);
  att->add_option("--out", output)->required();

  auto* seg = app.add_subcommand("train-seg",
                                 "stage-2 training (Algorithm of record)");
  seg->add_option("--config", config)->required();
  seg->add_option("--out", output)->required();
  seg->add_option("--resume", resume);

  auto* ev = app.add_subcommand("evaluate", "per-phase DSC report");
  ev->add_option("--pred-dir", pred_dir)->required();
  ev->add_option("--truth-dir", truth_dir)->required();
  ev->add_option("--phases", phases)->required();
  ev->add_option("--out", output);

  auto* abl = app.add_subcommand("ablate", "component/grid ablation driver");
  abl->add_option("--config", config)->required();
  abl->add_option("--components", components);
  abl->add_option("--grid", grid);
  abl->add_option("--out", output)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate_phantom(config, cases, external, seed, output);
    if (prep->parsed()) return cmd_prepare_data(config, input, output, window);
    if (cyc->parsed())
      return cmd_train_cyclegan(config, data, phases, output, lambda, lr,
                                epochs);
    if (dom->parsed())
      return cmd_train_domain_translate(config, input, data, output);
    if (syn->parsed()) return cmd_synthesize(translator, data, output, mode);
    if (spleen->parsed()) return cmd_train_spleen(config, output);
    if (att->parsed())
      return cmd_make_attention(model, data, output, sigma, rho);
    if (seg->parsed()) return cmd_train_seg(config, output, resume);
    if (ev->parsed()) return cmd_evaluate(pred_dir, truth_dir, phases, output);
    if (abl->parsed()) return cmd_ablate(config, components, grid, output);
  } catch (const std::exception& e) {
    std::cerr << "[error] " << e.what() << "\n";
    return 1;
  }
  return 1;
}
