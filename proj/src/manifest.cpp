#include "fesf/manifest.hpp"

#include <fstream>
#include <set>

#include "fesf/error.hpp"
#include "json.hpp"

namespace fesf {

using nlohmann::json;

const char* to_string(Split s) { return s == Split::train ? "train" : "test"; }

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw ValidationError("unknown split '" + s + "'");
}

std::vector<std::string> SurrogateManifest::labels() const {
  std::set<std::string> unique;
  for (const auto& e : entries) unique.insert(e.label);
  return {unique.begin(), unique.end()};
}

void write_manifest(const SurrogateManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  json header = {{"record", "header"},
                 {"schema", m.schema_version},
                 {"pipeline_version", m.pipeline_version},
                 {"dataset", m.dataset_label},
                 {"seed", m.seed},
                 {"host", m.host_path},
                 {"channels", m.shape.channels},
                 {"height", m.shape.height},
                 {"width", m.shape.width},
                 {"enhancer", m.enhancer},
                 {"entries", m.entries.size()}};
  out << header.dump() << '\n';
  for (const auto& e : m.entries) {
    json rec = {{"record", "entry"},
                {"schema", m.schema_version},
                {"plaintext_id", e.plaintext_id},
                {"plaintext", e.plaintext_path},
                {"host_id", e.host_id},
                {"synthetic", e.synthetic_path},
                {"surrogate", e.surrogate_path},
                {"refined", e.refined_path},
                {"alpha", e.params.alpha},
                {"beta", e.params.beta},
                {"alpha_prime", e.params_prime.alpha},
                {"beta_prime", e.params_prime.beta},
                {"label", e.label},
                {"split", to_string(e.split)}};
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("failed writing manifest " + path.string());
}

SurrogateManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  SurrogateManifest m;
  m.base_dir = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
      const std::string kind = rec.at("record");
      const int schema = rec.at("schema");
      if (schema != kManifestSchemaVersion) {
        throw ValidationError("unsupported manifest schema " + std::to_string(schema));
      }
      if (kind == "header") {
        m.schema_version = schema;
        m.pipeline_version = rec.at("pipeline_version");
        m.dataset_label = rec.at("dataset");
        m.seed = rec.at("seed");
        m.host_path = rec.at("host");
        m.shape = {rec.at("channels"), rec.at("height"), rec.at("width")};
        m.enhancer = rec.at("enhancer");
        have_header = true;
      } else if (kind == "entry") {
        ManifestEntry e;
        e.plaintext_id = rec.at("plaintext_id");
        e.plaintext_path = rec.at("plaintext");
        e.host_id = rec.at("host_id");
        e.synthetic_path = rec.at("synthetic");
        e.surrogate_path = rec.at("surrogate");
        e.refined_path = rec.at("refined");
        e.params = {rec.at("alpha"), rec.at("beta")};
        e.params_prime = {rec.at("alpha_prime"), rec.at("beta_prime")};
        e.label = rec.at("label");
        e.split = split_from_string(rec.at("split"));
        m.entries.push_back(std::move(e));
      } else {
        throw ValidationError("unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& ex) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": malformed manifest record: " + ex.what());
    }
  }
  if (!have_header) throw ValidationError(path.string() + ": manifest has no header record");
  return m;
}

}  // namespace fesf
