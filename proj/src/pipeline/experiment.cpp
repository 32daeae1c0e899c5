//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/pipeline/experiment.h"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "scaffkit/chem/smiles.h"
#include "scaffkit/error.h"
#include "scaffkit/pipeline/assay.h"
#include "scaffkit/pipeline/split.h"
#include "scaffkit/pipeline/stages.h"
#include "scaffkit/util/random.h"

namespace scaffkit::pipeline {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void write_file(const fs::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << content;
  if (!out)
    throw IoError("write failed for " + path.string());
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class Fn>
void write_with(const fs::path &path, Fn &&fn) {
  std::ostringstream os;
  fn(os);
  write_file(path, os.str());
}

void write_generated(std::ostream &os, const std::vector<diffusion::GeneratedMolecule> &gen) {
  for (const auto &g: gen)
    os << chem::to_smiles(g.mol) << ' ' << g.library_index << '\n';
}

ordered_json generation_json(const Augmentation &aug) {
  return { { "library_size", aug.library.entries.size() },
           { "attempted", aug.report.attempted },
           { "valid", aug.report.valid },
           { "validity_rate", aug.report.validity_rate() },
           { "cluster_counts", aug.cluster_counts },
           { "entropy_gap", aug.entropy_gap } };
}

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct SplitData {
  Subset train, valid, test;
  std::vector<fp::Fingerprint> train_fps, valid_fps, test_fps;
};

JobResult run_job(const SplitData &data, std::size_t split, std::size_t r,
                  const Config &cfg, diffusion::Denoiser *denoiser, const fs::path &dir,
                  std::string &stage) {
  JobResult job;
  job.split = split;
  job.eval_seed = r;
  job.seed = derive_seed(derive_seed(cfg.seed, split), r);
  job.n_train = data.train.mols.size();
  job.n_valid = data.valid.mols.size();
  job.n_test = data.test.mols.size();
  job.test_actives = static_cast<std::size_t>(
      std::count(data.test.labels.begin(), data.test.labels.end(), 1));
  fs::create_directories(dir);
  ordered_json info { { "split", split }, { "eval_seed", r }, { "seed", job.seed },
                      { "n_train", job.n_train }, { "n_valid", job.n_valid },
                      { "n_test", job.n_test }, { "test_actives", job.test_actives } };

  std::vector<fp::Fingerprint> d_prime;
  std::ostringstream umap;
  umap << "id,set,label,fingerprint\n";
  for (std::size_t i = 0; i < data.train.mols.size(); ++i)
    if (data.train.labels[i] == 1)
      umap << data.train.ids[i] << ",train_active,1," << data.train_fps[i].to_hex() << '\n';

  if (cfg.augment) {
    stage = "sas";
    const ActiveScaffolds actives = cluster_actives(data.train.mols, data.train.labels, cfg,
                                                    derive_seed(job.seed, "cluster"));
    job.clusters = actives.model.k;
    info["clusters"] = { { "k", actives.model.k },
                         { "degenerate", actives.model.degenerate },
                         { "scaffolds", actives.scaffolds.size() },
                         { "acyclic_actives", actives.acyclic },
                         { "probabilities", actives.weights.probabilities } };
    if (!actives.model.degenerate)
      info["clusters"]["silhouette"] = actives.model.silhouette;

    stage = "generate";
    const Augmentation aug = augment(actives, data.train.mols, Sampler::kScaffoldAware,
                                     *denoiser, cfg, job.seed);
    job.generation = aug.report;
    job.entropy_gap = aug.entropy_gap;
    info["gdsa"] = generation_json(aug);
    write_with(dir / "library.csv", [&](std::ostream &os) { sas::write_library(os, aug.library); });
    write_with(dir / "gdsa.smi", [&](std::ostream &os) { write_generated(os, aug.generated); });
    std::size_t g = 0;
    for (const auto &m: aug.generated) {
      d_prime.push_back(fp::ecfp(m.mol, cfg.features.radius, cfg.features.nbits));
      umap << "gdsa" << g++ << ",gdsa,," << d_prime.back().to_hex() << '\n';
    }

    if (cfg.ablation) {
      const Augmentation uni = augment(actives, data.train.mols, Sampler::kUniform,
                                       *denoiser, cfg, job.seed);
      job.uniform_entropy_gap = uni.entropy_gap;
      info["gdsa_uniform"] = generation_json(uni);
      write_with(dir / "library_uniform.csv",
                 [&](std::ostream &os) { sas::write_library(os, uni.library); });
      write_with(dir / "gdsa_uniform.smi",
                 [&](std::ostream &os) { write_generated(os, uni.generated); });
      g = 0;
      for (const auto &m: uni.generated)
        umap << "uniform" << g++ << ",gdsa_uniform,,"
             << fp::ecfp(m.mol, cfg.features.radius, cfg.features.nbits).to_hex() << '\n';
    }
  }
  write_file(dir / "umap_input.csv", umap.str());

  stage = "selftrain";
  selftrain::LabeledSet d, d_valid;
  for (std::size_t i = 0; i < data.train_fps.size(); ++i)
    d.add(data.train_fps[i], data.train.labels[i], selftrain::Origin::kOriginal);
  for (std::size_t i = 0; i < data.valid_fps.size(); ++i)
    d_valid.add(data.valid_fps[i], data.valid.labels[i], selftrain::Origin::kOriginal);
  selftrain::SelfTrainConfig st = cfg.selftrain;
  st.seed = derive_seed(job.seed, "selftrain");
  const auto trained = selftrain::self_train(d, d_prime, d_valid, st, cfg.features);
  job.best_epoch = trained.best_epoch;
  job.best_validation = trained.best_bedroc;
  job.final_pseudo = trained.history.back().n_pseudo;
  info["selftrain"] = { { "best_epoch", trained.best_epoch },
                        { "best_validation", trained.best_bedroc },
                        { "final_pseudo", job.final_pseudo } };
  write_with(dir / "model.txt", [&](std::ostream &os) { selftrain::save_model(os, trained.best); });
  write_with(dir / "history.csv",
             [&](std::ostream &os) { selftrain::write_history(os, trained.history); });

  stage = "score";
  const auto scores = selftrain::predict(trained.best, data.test_fps);
  write_with(dir / "scores.csv", [&](std::ostream &os) {
    os << "id,score,label\n";
    for (std::size_t i = 0; i < scores.size(); ++i)
      os << data.test.ids[i] << ',' << fmt::format("{:.17g}", scores[i]) << ','
         << data.test.labels[i] << '\n';
  });

  stage = "metrics";
  const metrics::RankedList ranked(scores, data.test.labels, data.test.ids);
  job.test = metrics::evaluate(ranked, scaffold_fingerprints(data.test.mols, cfg.features));
  write_file(dir / "metrics.json", metrics::to_json(job.test) + "\n");

  stage = "rerank";
  const RerankOutcome rr = rerank_sweep(ranked, scores, data.test.mols, data.test.ids, cfg);
  job.sweep = rr.sweep;
  job.rerank_skipped = rr.skipped;
  if (rr.skipped) {
    info["rerank_skipped"] = *rr.skipped;
  } else {
    info["rerank_k"] = rr.sweep.front().k;
    write_with(dir / "rerank.csv", [&](std::ostream &os) { rerank::write_sweep(os, rr.sweep); });
  }

  write_file(dir / "job.json", info.dump(2) + "\n");
  return job;
}

double mean_of(const std::vector<double> &xs) {
  double s = 0.0;
  for (double x: xs)
    s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double> &xs) {
  if (xs.size() < 2)
    return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x: xs)
    s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

// split<i>/seed<j> directories in numeric order.
std::vector<std::pair<std::size_t, fs::path>> job_dirs(const fs::path &run_dir) {
  std::vector<std::tuple<std::size_t, std::size_t, fs::path>> found;
  for (const auto &sd: fs::directory_iterator(run_dir)) {
    const auto name = sd.path().filename().string();
    if (!sd.is_directory() || name.rfind("split", 0) != 0)
      continue;
    const std::size_t s = std::stoul(name.substr(5));
    for (const auto &jd: fs::directory_iterator(sd.path())) {
      const auto jn = jd.path().filename().string();
      if (jd.is_directory() && jn.rfind("seed", 0) == 0)
        found.emplace_back(s, std::stoul(jn.substr(4)), jd.path());
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::pair<std::size_t, fs::path>> out;
  for (auto &[s, r, p]: found)
    out.emplace_back(s, p);
  return out;
}

}  // namespace

std::string sha256_hex(const std::string &bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i)
    out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string sha256_file(const std::string &path) { return sha256_hex(read_file(path)); }

void write_manifest(const std::string &run_dir, const Config &cfg, const std::string &status,
                    const std::string &failed_stage, const std::string &error) {
  std::vector<fs::path> files;
  for (const auto &e: fs::recursive_directory_iterator(run_dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json")
      files.push_back(fs::relative(e.path(), run_dir));
  std::sort(files.begin(), files.end());

  const std::string ini = to_ini(cfg);
  ordered_json m;
  m["tool"] = "scaffkit";
  m["version"] = kVersion;
  m["compiler"] = __VERSION__;
  m["status"] = status;
  if (!failed_stage.empty()) {
    m["failed_stage"] = failed_stage;
    m["error"] = error;
  }
  m["config_sha256"] = sha256_hex(ini);
  m["seed"] = cfg.seed;
  m["eval_seeds"] = cfg.eval_seeds;
  m["files"] = ordered_json::array();
  for (const auto &f: files) {
    const fs::path full = fs::path(run_dir) / f;
    m["files"].push_back({ { "path", f.generic_string() },
                           { "bytes", fs::file_size(full) },
                           { "sha256", sha256_file(full.string()) } });
  }
  write_file(fs::path(run_dir) / "manifest.json", m.dump(2) + "\n");
}

void write_report(const std::string &run_dir) {
  static const char *kMetrics[] = { "logauc", "bedroc", "ef100", "dcg100", "sd100" };
  static const char *kJobStats[] = { "validity_rate", "entropy_gap", "uniform_entropy_gap" };
  // scope -> metric -> values; "all" pools every job.
  std::map<std::string, std::map<std::string, std::vector<double>>> values;
  std::vector<double> lambdas;
  std::map<double, std::array<std::vector<double>, 4>> sweep;

  const auto jobs = job_dirs(run_dir);
  if (jobs.empty())
    throw IoError("no job directories under " + run_dir);
  for (const auto &[split, dir]: jobs) {
    const std::string scope = fmt::format("split{}", split);
    auto add = [&](const std::string &metric, double v) {
      values["all"][metric].push_back(v);
      values[scope][metric].push_back(v);
    };
    const auto mj = nlohmann::json::parse(read_file(dir / "metrics.json"));
    for (const char *k: kMetrics)
      if (mj.contains(k))
        add(k, mj[k].get<double>());
    const auto jj = nlohmann::json::parse(read_file(dir / "job.json"));
    if (jj.contains("gdsa")) {
      add(kJobStats[0], jj["gdsa"]["validity_rate"].get<double>());
      add(kJobStats[1], jj["gdsa"]["entropy_gap"].get<double>());
    }
    if (jj.contains("gdsa_uniform"))
      add(kJobStats[2], jj["gdsa_uniform"]["entropy_gap"].get<double>());

    if (fs::exists(dir / "rerank.csv")) {
      std::istringstream is(read_file(dir / "rerank.csv"));
      std::string line;
      std::getline(is, line);
      while (std::getline(is, line)) {
        double l, a, b, c, d;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &l, &a, &b, &c, &d) != 5)
          throw IoError("malformed rerank row '" + line + "' in " + dir.string());
        if (!sweep.count(l))
          lambdas.push_back(l);
        auto &cols = sweep[l];
        cols[0].push_back(a);
        cols[1].push_back(b);
        cols[2].push_back(c);
        cols[3].push_back(d);
      }
    }
  }

  std::vector<std::string> scopes { "all" };
  for (const auto &[scope, _]: values)
    if (scope != "all")
      scopes.push_back(scope);

  std::string csv = "scope,metric,mean,std,n\n";
  ordered_json report = ordered_json::object();
  for (const auto &scope: scopes) {
    std::vector<std::string> names(std::begin(kMetrics), std::end(kMetrics));
    names.insert(names.end(), std::begin(kJobStats), std::end(kJobStats));
    for (const auto &name: names) {
      auto it = values[scope].find(name);
      if (it == values[scope].end())
        continue;
      const double m = mean_of(it->second), s = sample_std(it->second);
      csv += fmt::format("{},{},{:.6f},{:.6f},{}\n", scope, name, m, s, it->second.size());
      report[scope][name] = { { "mean", std::stod(fmt::format("{:.6f}", m)) },
                              { "std", std::stod(fmt::format("{:.6f}", s)) },
                              { "n", it->second.size() } };
    }
  }
  write_file(fs::path(run_dir) / "report.csv", csv);
  write_file(fs::path(run_dir) / "report.json", report.dump(2) + "\n");

  if (!lambdas.empty()) {
    std::string out = "lambda,ef100_before,ef100_after,sd100_before,sd100_after\n";
    for (double l: lambdas) {
      const auto &c = sweep[l];
      out += fmt::format("{:.2f},{:.6f},{:.6f},{:.6f},{:.6f}\n", l, mean_of(c[0]),
                         mean_of(c[1]), mean_of(c[2]), mean_of(c[3]));
    }
    write_file(fs::path(run_dir) / "lambda_sweep.csv", out);
  }
}

RunResult run_experiment(const Config &cfg, const std::string &run_dir) {
  cfg.validate();
  fs::create_directories(run_dir);
  const fs::path root(run_dir);
  RunResult result { run_dir, {} };
  std::string stage = "config";
  const Stopwatch clock;
  try {
    write_file(root / "config.ini", to_ini(cfg));

    stage = "ingest";
    const Assay assay = ingest(cfg.assay);
    write_with(root / "quarantine.csv", [&](std::ostream &os) { write_quarantine(os, assay); });
    const ordered_json summary { { "assay", assay.id },
                                 { "records", assay.total_count() },
                                 { "actives", assay.active_count() },
                                 { "active_fraction", assay.active_fraction() },
                                 { "quarantined", assay.quarantined.size() } };
    write_file(root / "assay.json", summary.dump(2) + "\n");

    stage = "split";
    const SplitPlan plan = make_splits(assay, cfg.scheme, cfg.n_splits, cfg.seed);
    check_plan(plan);
    write_with(root / "splits.csv", [&](std::ostream &os) { write_plan(os, assay, plan); });

    std::unique_ptr<diffusion::Denoiser> denoiser;
    if (cfg.augment)
      denoiser = make_denoiser(cfg.denoiser);

    std::vector<std::size_t> splits = cfg.splits;
    if (splits.empty())
      for (std::size_t s = 0; s < plan.n_splits(); ++s)
        splits.push_back(s);

    for (auto s: splits) {
      stage = "featurize";
      SplitData data { subset(assay, plan, s, Role::kTrain),
                       subset(assay, plan, s, Role::kValid),
                       subset(assay, plan, s, Role::kTest), {}, {}, {} };
      data.train_fps = featurize(data.train.mols, cfg.features);
      data.valid_fps = featurize(data.valid.mols, cfg.features);
      data.test_fps = featurize(data.test.mols, cfg.features);
      for (std::size_t r = 0; r < cfg.eval_seeds; ++r) {
        const fs::path dir = root / fmt::format("split{}", s) / fmt::format("seed{}", r);
        result.jobs.push_back(run_job(data, s, r, cfg, denoiser.get(), dir, stage));
        const auto &job = result.jobs.back();
        spdlog::info("split {} seed {}: logAUC {:.4f} BEDROC {:.4f} EF100 {:.3f} ({:.1f}s)",
                     s, r, job.test.logauc, job.test.bedroc, job.test.ef100,
                     clock.seconds());
      }
    }

    stage = "report";
    write_report(run_dir);
    write_manifest(run_dir, cfg, "ok");
  } catch (const std::exception &e) {
    spdlog::error("stage {} failed: {}", stage, e.what());
    write_manifest(run_dir, cfg, "failed", stage, e.what());
    throw;
  }
  return result;
}

}  // namespace scaffkit::pipeline
