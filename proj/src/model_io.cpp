#include "isingflip/model_io.hpp"

#include "file_util.hpp"
#include "isingflip/error.hpp"
#include "json_util.hpp"

namespace isingflip {

namespace {

IsingModel model_from_doc(const nlohmann::json& doc) {
  const auto n = detail::require<std::size_t>(doc, "n");
  std::vector<Coupling> couplings;
  if (doc.contains("couplings")) {
    const auto& list = doc.at("couplings");
    if (!list.is_array()) {
      fail(ErrorKind::kParse, "'couplings' must be an array");
    }
    for (const auto& entry : list) {
      if (!entry.is_array() || entry.size() != 3 || !entry[0].is_number_unsigned() ||
          !entry[1].is_number_unsigned() || !entry[2].is_number()) {
        fail(ErrorKind::kParse, "coupling entries must be [i, j, value]");
      }
      couplings.push_back({entry[0].get<std::uint32_t>(), entry[1].get<std::uint32_t>(),
                           entry[2].get<double>()});
    }
  }
  std::vector<double> fields(n, 0.0);
  if (doc.contains("fields")) {
    fields = detail::require<std::vector<double>>(doc, "fields");
  }
  return IsingModel::create(n, std::move(couplings), std::move(fields));
}

}  // namespace

std::string model_to_json(const IsingModel& model) {
  nlohmann::json doc;
  doc["n"] = model.size();
  auto list = nlohmann::json::array();
  for (const auto& c : model.couplings()) {
    list.push_back({c.i, c.j, c.value});
  }
  doc["couplings"] = std::move(list);
  doc["fields"] = std::vector<double>(model.fields().begin(), model.fields().end());
  return doc.dump(2) + "\n";
}

IsingModel model_from_json(std::string_view text) {
  return model_from_doc(detail::parse_json(text));
}

void save_model(const IsingModel& model, const std::filesystem::path& path) {
  detail::write_file(path, model_to_json(model));
}

IsingModel load_model(const std::filesystem::path& path) {
  return model_from_json(detail::read_file(path));
}

std::string graph_to_json(const Graph& graph) {
  nlohmann::json doc;
  doc["n"] = graph.size();
  auto list = nlohmann::json::array();
  for (const auto& e : graph.edges()) {
    list.push_back({e.u, e.v});
  }
  doc["edges"] = std::move(list);
  return doc.dump(2) + "\n";
}

Graph graph_from_json(std::string_view text) {
  const auto doc = detail::parse_json(text);
  if (!doc.contains("edges")) {
    return dependency_graph(model_from_doc(doc));
  }
  Graph g(detail::require<std::size_t>(doc, "n"));
  for (const auto& entry : doc.at("edges")) {
    if (!entry.is_array() || entry.size() < 2 || !entry[0].is_number_unsigned() ||
        !entry[1].is_number_unsigned()) {
      fail(ErrorKind::kParse, "edge entries must be [i, j]");
    }
    g.add_edge(entry[0].get<std::size_t>(), entry[1].get<std::size_t>());
  }
  return g;
}

Graph load_graph(const std::filesystem::path& path) { return graph_from_json(detail::read_file(path)); }

}  // namespace isingflip
