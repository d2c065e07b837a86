#include "plp/lector/page_index.hpp"

#include <mutex>
#include <regex>
#include <set>

#include "plp/common/error.hpp"
#include "plp/common/files.hpp"
#include "plp/patos/document_store.hpp"

namespace plp::lector {

using nlohmann::json;

namespace {

const PageIndexNode* find_in(const std::vector<PageIndexNode>& nodes, std::string_view id) {
  for (const auto& n : nodes) {
    if (n.node_id == id) return &n;
    if (id.size() > n.node_id.size() && id.starts_with(n.node_id) && id[n.node_id.size()] == '.') {
      if (const auto* hit = find_in(n.children, id)) return hit;
    }
  }
  return nullptr;
}

std::size_t count_nodes(const std::vector<PageIndexNode>& nodes) {
  std::size_t n = nodes.size();
  for (const auto& c : nodes) n += count_nodes(c.children);
  return n;
}

PageIndexNode node_from_json(const json& j) {
  PageIndexNode n{j.at("node_id").get<std::string>(), j.at("title").get<std::string>(),
                  j.at("summary").get<std::string>(), {}};
  for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c));
  return n;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string parent_id(const std::string& id) {
  auto dot = id.rfind('.');
  return dot == std::string::npos ? std::string{} : id.substr(0, dot);
}

struct FlatNode {
  PageIndexNode node;
  std::string parent;  // empty for roots
  std::string body;
};

std::vector<PageIndexNode> assemble(const std::vector<FlatNode>& flat, const std::string& parent) {
  std::vector<PageIndexNode> out;
  for (const auto& f : flat) {
    if (f.parent != parent) continue;
    PageIndexNode n = f.node;
    n.children = assemble(flat, n.node_id);
    out.push_back(std::move(n));
  }
  return out;
}

}  // namespace

const PageIndexNode* PageIndexTree::find(std::string_view node_id) const {
  return find_in(roots, node_id);
}

std::size_t PageIndexTree::node_count() const { return count_nodes(roots); }

json to_json(const PageIndexNode& node) {
  json children = json::array();
  for (const auto& c : node.children) children.push_back(to_json(c));
  return json{{"node_id", node.node_id},
              {"title", node.title},
              {"summary", node.summary},
              {"children", children}};
}

json to_json(const PageIndexTree& tree) {
  json roots = json::array();
  for (const auto& r : tree.roots) roots.push_back(to_json(r));
  return json{{"doc_id", tree.doc_id},
              {"doc_checksum", tree.doc_checksum},
              {"reader_id", tree.reader_id},
              {"roots", roots}};
}

PageIndexTree tree_from_json(const json& j) {
  PageIndexTree t{j.at("doc_id").get<std::string>(), j.at("doc_checksum").get<std::string>(),
                  {}, j.at("reader_id").get<std::string>()};
  for (const auto& r : j.at("roots")) t.roots.push_back(node_from_json(r));
  return t;
}

std::string first_sentence(std::string_view body) {
  std::string collapsed;
  bool space = false;
  for (char c : body) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = !collapsed.empty();
      continue;
    }
    if (space) collapsed.push_back(' ');
    space = false;
    collapsed.push_back(c);
  }
  for (std::size_t i = 0; i < collapsed.size(); ++i) {
    char c = collapsed[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == collapsed.size() || collapsed[i + 1] == ' ')) {
      return collapsed.substr(0, i + 1);
    }
  }
  return collapsed;
}

std::vector<PageIndexNode> HeadingReader::read(std::string_view text) const {
  static const std::regex heading(R"(^(\d+(?:\.\d+)*)\s+(.*)$)");

  std::vector<FlatNode> flat;
  std::set<std::string> seen;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::smatch m;
    if (std::regex_match(line, m, heading)) {
      std::string id = m[1];
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::ReaderFailure, "duplicate heading number " + id);
      }
      auto parent = parent_id(id);
      if (!seen.contains(parent)) parent.clear();
      flat.push_back(FlatNode{{id, trim(m[2].str()), "", {}}, parent, ""});
    } else if (!flat.empty()) {
      flat.back().body += line;
      flat.back().body += '\n';
    }
    if (end == text.size()) break;
  }
  if (flat.empty()) throw Error(ErrorCode::ReaderFailure, "no numbered headings found");
  for (auto& f : flat) f.node.summary = first_sentence(f.body);
  return assemble(flat, "");
}

PageIndexStore::PageIndexStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() != ".json") continue;
    auto tree = tree_from_json(json::parse(read_text_file(entry.path())));
    trees_[{tree.doc_id, tree.reader_id}] = std::move(tree);
  }
}

std::filesystem::path PageIndexStore::tree_path(const std::string& doc_id,
                                                const std::string& reader_id) const {
  return dir_ / (doc_id + "__" + reader_id + ".json");
}

PageIndexTree PageIndexStore::build_page_index(const patos::DocumentStore& store,
                                               const std::string& doc_id, const Reader& reader) {
  auto ref = store.get(doc_id);
  if (ref.maturity < patos::MaturityStage::Cleaned ||
      !ref.artifact(patos::MaturityStage::Cleaned)) {
    throw Error(ErrorCode::DocumentNotCleaned,
                doc_id + " has no CLEANED text artifact (maturity " + to_string(ref.maturity) + ")");
  }
  auto text = to_string(*store.read_artifact(doc_id, patos::MaturityStage::Cleaned));

  PageIndexTree tree{doc_id, ref.checksum, {}, reader.reader_id()};
  try {
    tree.roots = reader.read(text);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ReaderFailure, std::string("reader failed: ") + e.what());
  }

  write_file_atomic(tree_path(doc_id, tree.reader_id), to_json(tree).dump());
  std::unique_lock lock(mutex_);
  trees_[{doc_id, tree.reader_id}] = tree;
  return tree;
}

std::optional<PageIndexTree> PageIndexStore::find(const std::string& doc_id,
                                                  const std::string& reader_id) const {
  std::shared_lock lock(mutex_);
  auto it = trees_.find({doc_id, reader_id});
  if (it == trees_.end()) return std::nullopt;
  return it->second;
}

std::vector<PageIndexTree> PageIndexStore::trees_for(const std::string& doc_id) const {
  std::shared_lock lock(mutex_);
  std::vector<PageIndexTree> out;
  for (const auto& [key, tree] : trees_) {
    if (key.first == doc_id) out.push_back(tree);
  }
  return out;
}

std::vector<PageIndexTree> PageIndexStore::all() const {
  std::shared_lock lock(mutex_);
  std::vector<PageIndexTree> out;
  for (const auto& [key, tree] : trees_) out.push_back(tree);
  return out;
}

std::size_t PageIndexStore::size() const {
  std::shared_lock lock(mutex_);
  return trees_.size();
}

}  // namespace plp::lector
