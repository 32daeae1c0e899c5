//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//
// Reference external denoiser: answers every request with one-hot rows at
// the current noisy categories. Useful to exercise the process protocol.
//

#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

int main() {
  using nlohmann::json;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty())
      continue;
    json req = json::parse(line);
    const auto a = req.at("num_node_types").get<std::size_t>();
    const auto b = req.at("num_edge_types").get<std::size_t>();

    json nodes = json::array();
    for (const auto &c: req.at("nodes")) {
      std::vector<double> row(a, 0.0);
      row.at(c.get<std::size_t>()) = 1.0;
      nodes.push_back(row);
    }
    json edges = json::array();
    for (const auto &e: req.at("edges")) {
      std::vector<double> row(b, 0.0);
      row.at(e[2].get<std::size_t>()) = 1.0;
      edges.push_back({ e[0], e[1], row });
    }
    std::cout << json { { "node_probs", nodes }, { "edge_probs", edges } }.dump()
              << std::endl;
  }
  return 0;
}
