//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/pipeline/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "scaffkit/error.h"

namespace scaffkit::pipeline {
namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kKeys {
  "data.assay",         "data.scheme",         "data.n_splits",
  "data.splits",        "features.radius",     "features.nbits",
  "sas.k_min",          "sas.k_max",           "sas.epsilon",
  "sas.ablation",       "diffusion.augment",   "diffusion.denoiser",
  "diffusion.steps",    "selftrain.e_start",   "selftrain.e_freq",
  "selftrain.tau",      "selftrain.epochs",    "selftrain.lr",
  "selftrain.lr_power", "selftrain.l2",        "selftrain.batch_size",
  "selftrain.metric",   "selftrain.bedroc_alpha", "rerank.cap",
  "rerank.top_k",       "rerank.lambdas",      "rerank.similarity",
  "run.seed",           "run.eval_seeds",
};

template <class T>
void read(const pt::ptree &tree, const std::string &key, T &out) {
  auto v = tree.get_optional<std::string>(key);
  if (!v)
    return;
  std::istringstream is(*v);
  T parsed {};
  if (!(is >> parsed) || !(is >> std::ws).eof())
    throw ConfigError("bad value '" + *v + "' for " + key);
  out = parsed;
}

void read_bool(const pt::ptree &tree, const std::string &key, bool &out) {
  auto v = tree.get_optional<std::string>(key);
  if (!v)
    return;
  if (*v == "true" || *v == "1")
    out = true;
  else if (*v == "false" || *v == "0")
    out = false;
  else
    throw ConfigError("bad boolean '" + *v + "' for " + key);
}

template <class T>
std::vector<T> read_list(const std::string &key, const std::string &text) {
  std::vector<T> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    std::istringstream one(item);
    T v {};
    if (!(one >> v) || !(one >> std::ws).eof())
      throw ConfigError("bad list item '" + item + "' for " + key);
    out.push_back(v);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T> &xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i)
    out += (i ? "," : "") + fmt::format("{}", xs[i]);
  return out;
}

}  // namespace

void Config::validate() const {
  if (assay.empty())
    throw ConfigError("data.assay is required");
  if (scheme == Scheme::kRandomCvLite && n_splits != 5)
    throw ConfigError("random_cv_lite uses exactly 5 splits");
  if (n_splits == 0)
    throw ConfigError("data.n_splits must be positive");
  for (auto s: splits)
    if (s >= n_splits)
      throw ConfigError(fmt::format("split {} is out of range", s));
  if (features.nbits < 8 || (features.nbits & (features.nbits - 1)) != 0)
    throw ConfigError("features.nbits must be a power of two >= 8");
  if (k_min < 2 || (k_max != 0 && k_max < k_min))
    throw ConfigError("sas needs 2 <= k_min <= k_max");
  if (!(epsilon > 0.0))
    throw ConfigError("sas.epsilon must be positive");
  if (denoiser != "marginal" && denoiser != "echo"
      && denoiser.rfind("external:", 0) != 0)
    throw ConfigError("diffusion.denoiser must be marginal, echo or external:<cmd>");
  if (steps == 0)
    throw ConfigError("diffusion.steps must be positive");
  selftrain.validate();
  if (cap == 0 || top_k == 0)
    throw ConfigError("rerank.cap and rerank.top_k must be positive");
  for (double l: lambdas)
    if (!(l >= 0.0 && l <= 1.0))
      throw ConfigError("rerank lambdas must lie in [0, 1]");
  if (eval_seeds == 0)
    throw ConfigError("run.eval_seeds must be positive");
}

Config parse_config(const std::string &text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto &[section, body]: tree) {
    if (body.empty())
      throw ConfigError("key '" + section + "' outside a section");
    for (const auto &[key, value]: body)
      if (!kKeys.count(section + "." + key))
        throw ConfigError("unknown config key " + section + "." + key);
  }

  Config c;
  c.assay = tree.get<std::string>("data.assay", "");
  if (auto v = tree.get_optional<std::string>("data.scheme"))
    c.scheme = parse_scheme(*v);
  read(tree, "data.n_splits", c.n_splits);
  if (auto v = tree.get_optional<std::string>("data.splits"))
    c.splits = *v == "all" ? std::vector<std::size_t> {}
                           : read_list<std::size_t>("data.splits", *v);

  read(tree, "features.radius", c.features.radius);
  read(tree, "features.nbits", c.features.nbits);

  read(tree, "sas.k_min", c.k_min);
  read(tree, "sas.k_max", c.k_max);
  read(tree, "sas.epsilon", c.epsilon);
  read_bool(tree, "sas.ablation", c.ablation);

  read_bool(tree, "diffusion.augment", c.augment);
  if (auto v = tree.get_optional<std::string>("diffusion.denoiser"))
    c.denoiser = *v;
  read(tree, "diffusion.steps", c.steps);

  auto &st = c.selftrain;
  read(tree, "selftrain.e_start", st.e_start);
  read(tree, "selftrain.e_freq", st.e_freq);
  read(tree, "selftrain.tau", st.tau);
  read(tree, "selftrain.epochs", st.epochs);
  read(tree, "selftrain.lr", st.lr);
  read(tree, "selftrain.lr_power", st.lr_power);
  read(tree, "selftrain.l2", st.train.l2);
  read(tree, "selftrain.batch_size", st.train.batch_size);
  read(tree, "selftrain.bedroc_alpha", st.bedroc_alpha);
  if (auto v = tree.get_optional<std::string>("selftrain.metric")) {
    if (*v == "bedroc")
      st.metric = selftrain::ValidationMetric::kBedroc;
    else if (*v == "logauc")
      st.metric = selftrain::ValidationMetric::kLogAuc;
    else
      throw ConfigError("selftrain.metric must be bedroc or logauc");
  }

  read(tree, "rerank.cap", c.cap);
  read(tree, "rerank.top_k", c.top_k);
  if (auto v = tree.get_optional<std::string>("rerank.lambdas"))
    c.lambdas = read_list<double>("rerank.lambdas", *v);
  if (auto v = tree.get_optional<std::string>("rerank.similarity")) {
    if (*v == "scaffold")
      c.similarity = RerankSimilarity::kScaffold;
    else if (*v == "molecule")
      c.similarity = RerankSimilarity::kMolecule;
    else
      throw ConfigError("rerank.similarity must be scaffold or molecule");
  }

  read(tree, "run.seed", c.seed);
  read(tree, "run.eval_seeds", c.eval_seeds);
  return c;
}

Config load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_ini(const Config &c) {
  const auto &st = c.selftrain;
  std::string out;
  out += "[data]\n";
  out += fmt::format("assay = {}\n", c.assay);
  out += fmt::format("scheme = {}\n", scheme_name(c.scheme));
  out += fmt::format("n_splits = {}\n", c.n_splits);
  out += fmt::format("splits = {}\n", c.splits.empty() ? "all" : join(c.splits));
  out += "\n[features]\n";
  out += fmt::format("radius = {}\nnbits = {}\n", c.features.radius, c.features.nbits);
  out += "\n[sas]\n";
  out += fmt::format("k_min = {}\nk_max = {}\nepsilon = {}\nablation = {}\n", c.k_min,
                     c.k_max, c.epsilon, c.ablation);
  out += "\n[diffusion]\n";
  out += fmt::format("augment = {}\ndenoiser = {}\nsteps = {}\n", c.augment, c.denoiser,
                     c.steps);
  out += "\n[selftrain]\n";
  out += fmt::format("e_start = {}\ne_freq = {}\ntau = {}\nepochs = {}\n", st.e_start,
                     st.e_freq, st.tau, st.epochs);
  out += fmt::format("lr = {}\nlr_power = {}\nl2 = {}\nbatch_size = {}\n", st.lr,
                     st.lr_power, st.train.l2, st.train.batch_size);
  out += fmt::format("metric = {}\nbedroc_alpha = {}\n",
                     st.metric == selftrain::ValidationMetric::kBedroc ? "bedroc"
                                                                       : "logauc",
                     st.bedroc_alpha);
  out += "\n[rerank]\n";
  out += fmt::format("cap = {}\ntop_k = {}\nlambdas = {}\nsimilarity = {}\n", c.cap,
                     c.top_k, join(c.lambdas),
                     c.similarity == RerankSimilarity::kScaffold ? "scaffold" : "molecule");
  out += "\n[run]\n";
  out += fmt::format("seed = {}\neval_seeds = {}\n", c.seed, c.eval_seeds);
  return out;
}

}  // namespace scaffkit::pipeline
