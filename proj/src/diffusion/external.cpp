//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <csignal>
#include <cstdio>
#include <mutex>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "scaffkit/diffusion/diffusion.h"
#include "scaffkit/error.h"

namespace scaffkit::diffusion {
namespace {

using nlohmann::json;

[[noreturn]] void protocol_error(const std::string &why, const std::string &line) {
  throw ProtocolError("denoiser protocol: " + why + "; offending line: " + line);
}

// Checks that a probability row sums to 1 within tolerance and rescales it
// to sum exactly.
void normalize_row(std::span<double> row, const std::string &line) {
  double sum = 0.0;
  for (double v: row) {
    if (!std::isfinite(v) || v < 0.0)
      protocol_error("negative or non-finite probability", line);
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    protocol_error("probability row sums to " + std::to_string(sum), line);
  for (double &v: row)
    v /= sum;
}

}  // namespace

std::string encode_request(const DiffusionState &state, const Marginals &priors) {
  json edges = json::array();
  for (std::uint32_t i = 0; i < state.n; ++i) {
    for (std::uint32_t j = i + 1; j < state.n; ++j) {
      if (state.edge(i, j) != kEdgeNone)
        edges.push_back({ i, j, state.edge(i, j) });
    }
  }
  json req = {
    { "t", state.t },
    { "nodes", state.nodes },
    { "edges", std::move(edges) },
    { "num_node_types", priors.vocab.size() },
    { "num_edge_types", kEdgeCategories },
  };
  return req.dump();
}

DenoiserOutput decode_response(const std::string &line, std::uint32_t n,
                               std::uint32_t node_categories) {
  json resp;
  try {
    resp = json::parse(line);
  } catch (const json::parse_error &e) {
    protocol_error(std::string("malformed JSON (") + e.what() + ")", line);
  }

  DenoiserOutput out;
  out.n = n;
  out.node_categories = node_categories;
  out.node_probs.assign(static_cast<std::size_t>(n) * node_categories, 0.0);
  out.edge_probs.assign(static_cast<std::size_t>(n) * n * kEdgeCategories, 0.0);
  for (std::size_t p = 0; p < static_cast<std::size_t>(n) * n; ++p)
    out.edge_probs[p * kEdgeCategories + kEdgeNone] = 1.0;

  try {
    const json &nodes = resp.at("node_probs");
    if (!nodes.is_array() || nodes.size() != n)
      protocol_error("expected " + std::to_string(n) + " node rows", line);
    for (std::uint32_t i = 0; i < n; ++i) {
      const json &row = nodes[i];
      if (!row.is_array() || row.size() != node_categories)
        protocol_error("node row " + std::to_string(i) + " has the wrong width", line);
      for (std::uint32_t c = 0; c < node_categories; ++c)
        out.node_probs[static_cast<std::size_t>(i) * node_categories + c]
            = row[c].get<double>();
      normalize_row({ out.node_probs.data() + static_cast<std::size_t>(i) * node_categories,
                      node_categories },
                    line);
    }

    if (resp.contains("edge_probs")) {
      for (const json &entry: resp.at("edge_probs")) {
        if (!entry.is_array() || entry.size() != 3)
          protocol_error("edge entries are [i, j, [probs]]", line);
        auto i = entry[0].get<std::uint32_t>();
        auto j = entry[1].get<std::uint32_t>();
        const json &row = entry[2];
        if (i >= n || j >= n || i == j)
          protocol_error("edge index out of range", line);
        if (!row.is_array() || row.size() != kEdgeCategories)
          protocol_error("edge row has the wrong width", line);
        double *dst = out.edge_probs.data()
                      + (static_cast<std::size_t>(i) * n + j) * kEdgeCategories;
        for (std::uint32_t c = 0; c < kEdgeCategories; ++c)
          dst[c] = row[c].get<double>();
        normalize_row({ dst, kEdgeCategories }, line);
        std::copy(dst, dst + kEdgeCategories,
                  out.edge_probs.data()
                      + (static_cast<std::size_t>(j) * n + i) * kEdgeCategories);
      }
    }
  } catch (const json::exception &e) {
    protocol_error(std::string("bad field (") + e.what() + ")", line);
  }
  return out;
}

struct ExternalDenoiser::Impl {
  pid_t pid = -1;
  FILE *to_child = nullptr;
  FILE *from_child = nullptr;
  std::mutex mutex;
};

ExternalDenoiser::ExternalDenoiser(const std::string &command): impl_(new Impl) {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
    delete impl_;
    throw ProtocolError("cannot create pipes for denoiser command: " + command);
  }
  pid_t pid = fork();
  if (pid < 0) {
    delete impl_;
    throw ProtocolError("cannot fork denoiser command: " + command);
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char *>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  // A child that exits early must surface as a protocol error, not SIGPIPE.
  std::signal(SIGPIPE, SIG_IGN);
  impl_->pid = pid;
  impl_->to_child = fdopen(in_pipe[1], "w");
  impl_->from_child = fdopen(out_pipe[0], "r");
}

ExternalDenoiser::~ExternalDenoiser() {
  if (impl_->to_child)
    std::fclose(impl_->to_child);
  if (impl_->from_child)
    std::fclose(impl_->from_child);
  if (impl_->pid > 0) {
    int status = 0;
    waitpid(impl_->pid, &status, 0);
  }
  delete impl_;
}

DenoiserOutput ExternalDenoiser::predict(const DiffusionState &state,
                                         const Marginals &priors) {
  std::lock_guard lock(impl_->mutex);
  const std::string request = encode_request(state, priors) + "\n";
  if (std::fputs(request.c_str(), impl_->to_child) == EOF
      || std::fflush(impl_->to_child) != 0)
    throw ProtocolError("denoiser process closed its input");

  std::string line;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, impl_->from_child)) {
    line += buf;
    if (!line.empty() && line.back() == '\n')
      break;
  }
  if (line.empty())
    throw ProtocolError("denoiser process ended without a response");
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
    line.pop_back();
  return decode_response(line, state.n, priors.vocab.size());
}

}  // namespace scaffkit::diffusion
