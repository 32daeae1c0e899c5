//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_PIPELINE_EXPERIMENT_H_
#define SCAFFKIT_PIPELINE_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scaffkit/diffusion/diffusion.h"
#include "scaffkit/metrics/metrics.h"
#include "scaffkit/pipeline/config.h"
#include "scaffkit/rerank/rerank.h"

namespace scaffkit::pipeline {

inline constexpr char kVersion[] = "0.1.0";

// Outcome of one (split, evaluation seed) job.
struct JobResult {
  std::size_t split = 0;
  std::size_t eval_seed = 0;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::size_t n_test = 0;
  std::size_t test_actives = 0;

  // Augmentation; absent when disabled.
  std::optional<std::uint32_t> clusters;
  std::optional<diffusion::GenerationReport> generation;
  std::optional<double> entropy_gap;
  std::optional<double> uniform_entropy_gap;

  std::uint32_t best_epoch = 0;
  double best_validation = 0.0;
  std::size_t final_pseudo = 0;

  metrics::MetricReport test;
  std::vector<rerank::RerankReport> sweep;
  std::optional<std::string> rerank_skipped;
};

struct RunResult {
  std::string run_dir;
  std::vector<JobResult> jobs;
};

// Runs ingest, splitting, scaffold clustering and sampling on the training
// actives, scaffold extension, self-training, test scoring, metrics and the
// MMR lambda sweep for every selected split and evaluation seed. Every
// artifact lands under run_dir, which is created; manifest.json lists them
// with SHA-256 hashes. On failure the manifest records the failing stage
// and the exception is rethrown.
RunResult run_experiment(const Config &cfg, const std::string &run_dir);

// Aggregates the job metric files under run_dir into report.csv and
// report.json (mean and sample standard deviation per metric, overall and
// per split) plus lambda_sweep.csv averaged over jobs.
void write_report(const std::string &run_dir);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string &path);
std::string sha256_hex(const std::string &bytes);

// Rewrites run_dir/manifest.json for the files currently present.
void write_manifest(const std::string &run_dir, const Config &cfg,
                    const std::string &status, const std::string &failed_stage = {},
                    const std::string &error = {});

}  // namespace scaffkit::pipeline

#endif  // SCAFFKIT_PIPELINE_EXPERIMENT_H_
