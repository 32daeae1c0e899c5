//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "scaffkit/chem/smiles.h"
#include "scaffkit/error.h"
#include "scaffkit/pipeline/assay.h"
#include "scaffkit/pipeline/config.h"
#include "scaffkit/pipeline/experiment.h"
#include "scaffkit/pipeline/split.h"
#include "scaffkit/pipeline/stages.h"
#include "scaffkit/pipeline/synthetic.h"
#include "scaffkit/util/random.h"

namespace fs = std::filesystem;
using namespace scaffkit;
using namespace scaffkit::pipeline;

namespace {

// Flags shared by the subcommands; unset ones leave the config alone.
struct Overrides {
  std::string config;
  std::string input;
  std::string scheme;
  std::string denoiser;
  std::string lambda_sweep;
  std::optional<std::uint64_t> seed;
  bool no_augment = false;
};

void add_common(CLI::App *cmd, Overrides &o) {
  cmd->add_option("--config", o.config, "INI experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--input", o.input, "assay CSV with header id,smiles,label");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--scheme", o.scheme, "split scheme")
      ->check(CLI::IsMember({ "random", "scaffold" }));
  cmd->add_option("--denoiser", o.denoiser, "marginal, echo or external:<cmd>");
  cmd->add_option("--lambda-sweep", o.lambda_sweep, "comma-separated MMR lambdas");
  cmd->add_flag("--no-augment", o.no_augment, "skip scaffold augmentation");
}

Config resolve(const Overrides &o) {
  Config c = o.config.empty() ? Config {} : load_config(o.config);
  if (!o.input.empty())
    c.assay = o.input;
  if (!o.scheme.empty())
    c.scheme = parse_scheme(o.scheme);
  if (!o.denoiser.empty())
    c.denoiser = o.denoiser;
  if (!o.lambda_sweep.empty()) {
    c.lambdas.clear();
    std::istringstream is(o.lambda_sweep);
    std::string item;
    while (std::getline(is, item, ','))
      c.lambdas.push_back(std::stod(item));
  }
  if (o.seed)
    c.seed = *o.seed;
  if (o.no_augment)
    c.augment = false;
  c.validate();
  return c;
}

template <class Fn>
void write_out(const fs::path &path, Fn &&fn) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path.string());
  fn(out);
}

struct ScoreRow {
  std::string id;
  double score;
  int label;
};

std::vector<ScoreRow> read_scores(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "id,score,label")
    throw HeaderError("expected header id,score,label in " + path);
  std::vector<ScoreRow> rows;
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    if (a == std::string::npos || a == b)
      throw IoError("malformed score row '" + line + "'");
    rows.push_back({ line.substr(0, a), std::stod(line.substr(a + 1, b - a - 1)),
                     std::stoi(line.substr(b + 1)) });
  }
  return rows;
}

// Molecules of the scored rows, looked up by id in the assay.
std::vector<chem::MolGraph> molecules_for(const std::vector<ScoreRow> &rows,
                                          const Assay &assay) {
  std::map<std::string, const chem::MolGraph *> by_id;
  for (const auto &r: assay.records)
    by_id[r.id] = &r.mol;
  std::vector<chem::MolGraph> out;
  for (const auto &r: rows) {
    auto it = by_id.find(r.id);
    if (it == by_id.end())
      throw IoError("scored id '" + r.id + "' is not in the assay");
    out.push_back(*it->second);
  }
  return out;
}

std::vector<fp::Fingerprint> read_generated(const std::string &path,
                                            const selftrain::FeatureConfig &f) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path);
  std::vector<fp::Fingerprint> out;
  std::string smiles;
  std::string rest;
  while (in >> smiles) {
    std::getline(in, rest);
    out.push_back(fp::ecfp(chem::parse_smiles(smiles), f.radius, f.nbits));
  }
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "scaffold-aware virtual screening toolkit" };
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "only log warnings and errors");

  Overrides o;
  std::string out, run_dir, model_path, scores_path, gdsa_path;
  std::size_t split = 0;
  std::string role = "test";
  SyntheticOptions synth;

  auto *c_synth = app.add_subcommand("synth", "write the seeded synthetic benchmark assay");
  c_synth->add_option("--out", out, "output CSV")->required();
  c_synth->add_option("--seed", synth.seed, "generator seed");
  c_synth->add_option("--molecules", synth.molecules, "molecule count");
  c_synth->add_option("--active-fraction", synth.active_fraction, "share of actives");

  auto *c_ingest = app.add_subcommand("ingest", "parse an assay and quarantine bad rows");
  add_common(c_ingest, o);
  c_ingest->add_option("--out", out, "output directory")->required();

  auto *c_split = app.add_subcommand("split", "assign records to train/valid/test");
  add_common(c_split, o);
  c_split->add_option("--out", out, "output CSV")->required();

  auto *c_augment = app.add_subcommand("augment", "cluster, sample and extend active scaffolds");
  add_common(c_augment, o);
  c_augment->add_option("--split", split, "split index");
  c_augment->add_option("--out", out, "output directory")->required();

  auto *c_train = app.add_subcommand("train", "self-train the classifier on one split");
  add_common(c_train, o);
  c_train->add_option("--split", split, "split index");
  c_train->add_option("--gdsa", gdsa_path, "generated molecules (SMILES per line)");
  c_train->add_option("--out", out, "output directory")->required();

  auto *c_score = app.add_subcommand("score", "score molecules with a trained model");
  add_common(c_score, o);
  c_score->add_option("--model", model_path, "model checkpoint")->required();
  c_score->add_option("--split", split, "split index");
  c_score->add_option("--role", role, "records to score")
      ->check(CLI::IsMember({ "train", "valid", "test", "all" }));
  c_score->add_option("--out", out, "output CSV")->required();

  auto *c_evaluate = app.add_subcommand("evaluate", "metrics of a score file");
  add_common(c_evaluate, o);
  c_evaluate->add_option("--scores", scores_path, "CSV id,score,label")->required();
  c_evaluate->footer("SD100 needs the assay structures (--input or --config).");
  c_evaluate->add_option("--out", out, "metrics JSON (stdout when omitted)");

  auto *c_rerank = app.add_subcommand("rerank", "MMR lambda sweep over a score file");
  add_common(c_rerank, o);
  c_rerank->add_option("--scores", scores_path, "CSV id,score,label")->required();
  c_rerank->add_option("--out", out, "sweep CSV")->required();

  auto *c_run = app.add_subcommand("run", "full pipeline from a config");
  add_common(c_run, o);
  c_run->add_option("--out", run_dir, "run directory")->required();

  auto *c_report = app.add_subcommand("report", "aggregate the jobs of a run directory");
  c_report->add_option("--run", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*c_synth) {
      const Assay a = synthetic_assay(synth);
      write_out(out, [&](std::ostream &os) { write_assay(os, a); });
      spdlog::info("wrote {} molecules ({} actives) to {}", a.total_count(), a.active_count(), out);
    } else if (*c_ingest) {
      const Config cfg = resolve(o);
      const Assay a = ingest(cfg.assay);
      write_out(fs::path(out) / "assay.csv", [&](std::ostream &os) { write_assay(os, a); });
      write_out(fs::path(out) / "quarantine.csv",
                [&](std::ostream &os) { write_quarantine(os, a); });
      fmt::print("{} records, {} actives, {} quarantined\n", a.total_count(),
                 a.active_count(), a.quarantined.size());
    } else if (*c_split) {
      const Config cfg = resolve(o);
      const Assay a = ingest(cfg.assay);
      const SplitPlan plan = make_splits(a, cfg.scheme, cfg.n_splits, cfg.seed);
      check_plan(plan);
      write_out(out, [&](std::ostream &os) { write_plan(os, a, plan); });
    } else if (*c_augment || *c_train || *c_score) {
      const Config cfg = resolve(o);
      const Assay a = ingest(cfg.assay);
      const SplitPlan plan = make_splits(a, cfg.scheme, cfg.n_splits, cfg.seed);
      if (split >= plan.n_splits())
        throw ConfigError(fmt::format("split {} is out of range", split));
      const Subset train = subset(a, plan, split, Role::kTrain);
      const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, split), 0);

      if (*c_augment) {
        auto denoiser = make_denoiser(cfg.denoiser);
        const auto actives = cluster_actives(train.mols, train.labels, cfg,
                                             derive_seed(seed, "cluster"));
        const auto aug = augment(actives, train.mols, Sampler::kScaffoldAware, *denoiser,
                                 cfg, seed);
        write_out(fs::path(out) / "library.csv",
                  [&](std::ostream &os) { sas::write_library(os, aug.library); });
        write_out(fs::path(out) / "gdsa.smi", [&](std::ostream &os) {
          for (const auto &g: aug.generated)
            os << chem::to_smiles(g.mol) << ' ' << g.library_index << '\n';
        });
        fmt::print("k = {}, {} of {} generated molecules valid, entropy gap {:.4f}\n",
                   actives.model.k, aug.report.valid, aug.report.attempted, aug.entropy_gap);
      } else if (*c_train) {
        const Subset valid = subset(a, plan, split, Role::kValid);
        const auto d = selftrain::LabeledSet::from_molecules(
            train.mols, train.labels, selftrain::Origin::kOriginal, cfg.features);
        const auto dv = selftrain::LabeledSet::from_molecules(
            valid.mols, valid.labels, selftrain::Origin::kOriginal, cfg.features);
        std::vector<fp::Fingerprint> d_prime;
        if (cfg.augment && !gdsa_path.empty())
          d_prime = read_generated(gdsa_path, cfg.features);
        auto st = cfg.selftrain;
        st.seed = derive_seed(seed, "selftrain");
        const auto r = selftrain::self_train(d, d_prime, dv, st, cfg.features);
        write_out(fs::path(out) / "model.txt",
                  [&](std::ostream &os) { selftrain::save_model(os, r.best); });
        write_out(fs::path(out) / "history.csv",
                  [&](std::ostream &os) { selftrain::write_history(os, r.history); });
        fmt::print("best epoch {} with validation {:.4f}\n", r.best_epoch, r.best_bedroc);
      } else {
        std::ifstream in(model_path);
        if (!in)
          throw IoError("cannot open " + model_path);
        const auto model = selftrain::load_model(in);
        std::vector<std::size_t> rows;
        if (role == "all") {
          for (std::size_t i = 0; i < a.records.size(); ++i)
            rows.push_back(i);
        } else {
          rows = plan.members(split, role == "train" ? Role::kTrain
                                     : role == "valid" ? Role::kValid : Role::kTest);
        }
        write_out(out, [&](std::ostream &os) {
          os << "id,score,label\n";
          for (auto i: rows) {
            const auto &r = a.records[i];
            const auto f = fp::ecfp(r.mol, model.config().radius, model.config().nbits);
            os << r.id << ',' << fmt::format("{:.17g}", model.score(f)) << ',' << r.label
               << '\n';
          }
        });
      }
    } else if (*c_evaluate || *c_rerank) {
      const auto rows = read_scores(scores_path);
      // Without an assay, evaluate reports everything but SD100.
      const bool structures = *c_rerank || !o.input.empty() || !o.config.empty();
      const Config cfg = structures ? resolve(o) : Config {};
      const auto mols = structures ? molecules_for(rows, ingest(cfg.assay))
                                   : std::vector<chem::MolGraph> {};
      std::vector<double> scores;
      std::vector<int> labels;
      std::vector<std::string> ids;
      for (const auto &r: rows) {
        scores.push_back(r.score);
        labels.push_back(r.label);
        ids.push_back(r.id);
      }
      const metrics::RankedList ranked(scores, labels, ids);
      if (*c_evaluate) {
        const auto report =
            metrics::evaluate(ranked, scaffold_fingerprints(mols, cfg.features));
        if (out.empty())
          fmt::print("{}\n", metrics::to_json(report));
        else
          write_out(out, [&](std::ostream &os) { os << metrics::to_json(report) << '\n'; });
      } else {
        const auto rr = rerank_sweep(ranked, scores, mols, ids, cfg);
        if (rr.skipped) {
          spdlog::warn("nothing to rerank: {}", *rr.skipped);
          return 0;
        }
        write_out(out, [&](std::ostream &os) { rerank::write_sweep(os, rr.sweep); });
      }
    } else if (*c_run) {
      const Config cfg = resolve(o);
      const auto result = run_experiment(cfg, run_dir);
      fmt::print("{} jobs written to {}\n", result.jobs.size(), run_dir);
    } else if (*c_report) {
      write_report(run_dir);
      std::ifstream in(fs::path(run_dir) / "report.csv");
      std::cout << in.rdbuf();
    }
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
