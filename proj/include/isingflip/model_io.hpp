#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "isingflip/model.hpp"

namespace isingflip {

/// {"n": .., "couplings": [[i, j, value], ...], "fields": [...]}
/// Doubles use shortest round-trip decimal, so values survive bit-exactly.
std::string model_to_json(const IsingModel& model);
IsingModel model_from_json(std::string_view text);

void save_model(const IsingModel& model, const std::filesystem::path& path);
IsingModel load_model(const std::filesystem::path& path);

/// {"n": .., "edges": [[i, j], ...]}
std::string graph_to_json(const Graph& graph);
/// Accepts a graph document, or a model document (its support is used).
Graph graph_from_json(std::string_view text);
Graph load_graph(const std::filesystem::path& path);

}  // namespace isingflip
