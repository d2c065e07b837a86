#pragma once

// PageIndex: a document decomposed into addressable, summarized nodes.
//
// Readers plug in behind `Reader`. HeadingReader is the deterministic
// reader shipped with the system: it splits on numbered heading lines
// ("1", "1.3", "2.4.1" followed by whitespace) and summarizes each node with
// the first sentence of its body.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace plp::patos {
class DocumentStore;
}

namespace plp::lector {

struct PageIndexNode {
  std::string node_id;
  std::string title;
  std::string summary;
  std::vector<PageIndexNode> children;
};

struct PageIndexTree {
  std::string doc_id;
  std::string doc_checksum;
  std::vector<PageIndexNode> roots;
  std::string reader_id;

  const PageIndexNode* find(std::string_view node_id) const;
  std::size_t node_count() const;
};

nlohmann::json to_json(const PageIndexNode& node);
nlohmann::json to_json(const PageIndexTree& tree);
PageIndexTree tree_from_json(const nlohmann::json& j);

class Reader {
 public:
  virtual ~Reader() = default;
  virtual std::string reader_id() const = 0;
  // Throws on failure; build_page_index reports ReaderFailure.
  virtual std::vector<PageIndexNode> read(std::string_view text) const = 0;
};

class HeadingReader final : public Reader {
 public:
  std::string reader_id() const override { return "stub"; }
  std::vector<PageIndexNode> read(std::string_view text) const override;
};

// First sentence of `body`, whitespace-collapsed.
std::string first_sentence(std::string_view body);

class PageIndexStore {
 public:
  explicit PageIndexStore(std::filesystem::path dir);

  PageIndexStore(const PageIndexStore&) = delete;
  PageIndexStore& operator=(const PageIndexStore&) = delete;

  // Requires a CLEANED text artifact. The tree is pinned to the document's
  // RAW checksum and persisted under (doc_id, reader_id).
  PageIndexTree build_page_index(const patos::DocumentStore& store, const std::string& doc_id,
                                 const Reader& reader);

  std::optional<PageIndexTree> find(const std::string& doc_id, const std::string& reader_id) const;
  std::vector<PageIndexTree> trees_for(const std::string& doc_id) const;
  std::vector<PageIndexTree> all() const;
  std::size_t size() const;

  std::filesystem::path tree_path(const std::string& doc_id, const std::string& reader_id) const;

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::pair<std::string, std::string>, PageIndexTree> trees_;
};

}  // namespace plp::lector
