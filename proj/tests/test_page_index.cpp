#include <doctest.h>

#include "lector_fixtures.hpp"
#include "plp/lector/page_index.hpp"
#include "test_support.hpp"

using namespace plp;
using namespace plp::lector;
using namespace plp::testing;

namespace {

patos::DocumentRef cleaned_doc(patos::DocumentStore& store, const std::string& text) {
  auto ref = ingest_insert(store, "v-" + sha256_hex(text).substr(0, 8), "2026-01-16", text);
  return store.promote_maturity(ref.doc_id, patos::MaturityStage::Cleaned, to_bytes(text));
}

}  // namespace

TEST_CASE("first_sentence takes text up to the first terminator") {
  CHECK(first_sentence("Analgesic and antipyretic. Indicated for pain.") ==
        "Analgesic and antipyretic.");
  CHECK(first_sentence("  multi\n line   body? rest") == "multi line body?");
  CHECK(first_sentence("500 mg 3.5 times daily") == "500 mg 3.5 times daily");
  CHECK(first_sentence("") == "");
}

TEST_CASE("heading reader builds a nested tree") {
  HeadingReader reader;
  auto roots = reader.read(kInsertText);
  REQUIRE(roots.size() == 1);
  CHECK(roots[0].node_id == "1");
  REQUIRE(roots[0].children.size() == 3);
  CHECK(roots[0].children[0].node_id == "1.1");
  CHECK(roots[0].children[0].title == "What is this medication indicated for?");
  CHECK(roots[0].children[0].summary == "Analgesic and antipyretic.");
  CHECK(roots[0].children[1].node_id == "1.3");
  CHECK(roots[0].children[1].title == "When should I not use this medication?");

  auto deep = reader.read("1 A\n1.1 B\n1.1.1 C\nbody c.\n2 D\n2.4 E\n");
  REQUIRE(deep.size() == 2);
  CHECK(deep[0].children[0].children[0].node_id == "1.1.1");
  CHECK(deep[0].children[0].children[0].summary == "body c.");
  CHECK(deep[1].children[0].node_id == "2.4");

  // No "3" heading: 3.1 becomes a root of its own.
  auto orphan = reader.read("1.1 First\n3.1 Orphan\n");
  REQUIRE(orphan.size() == 2);
  CHECK(orphan[1].node_id == "3.1");
}

TEST_CASE("child ids extend the parent by one component") {
  HeadingReader reader;
  auto roots = reader.read("1 A\n1.1 B\n1.2 C\n1.2.1 D\n1.2.2 E\n2 F\n2.1 G\n");
  std::function<void(const PageIndexNode&)> walk = [&](const PageIndexNode& n) {
    for (const auto& c : n.children) {
      CHECK(c.node_id.rfind(n.node_id + ".", 0) == 0);
      CHECK(c.node_id.find('.', n.node_id.size() + 1) == std::string::npos);
      walk(c);
    }
  };
  for (const auto& r : roots) walk(r);
}

TEST_CASE("reader failures") {
  HeadingReader reader;
  CHECK(error_code_of([&] { reader.read("no headings here\njust prose.\n"); }) ==
        ErrorCode::ReaderFailure);
  CHECK(error_code_of([&] { reader.read("1 A\n1 again\n"); }) == ErrorCode::ReaderFailure);
}

TEST_CASE("build_page_index pins the tree and persists it") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PageIndexStore indexes(dir.path() / "pageindex");
  HeadingReader reader;

  auto raw = ingest_insert(store);
  CHECK(error_code_of([&] { indexes.build_page_index(store, raw.doc_id, reader); }) ==
        ErrorCode::DocumentNotCleaned);
  // Promoted without a text artifact is still not readable.
  store.promote_maturity(raw.doc_id, patos::MaturityStage::Cleaned);
  CHECK(error_code_of([&] { indexes.build_page_index(store, raw.doc_id, reader); }) ==
        ErrorCode::DocumentNotCleaned);

  auto ref = cleaned_doc(store, kInsertText);
  auto tree = indexes.build_page_index(store, ref.doc_id, reader);
  CHECK(tree.doc_checksum == ref.checksum);
  CHECK(tree.reader_id == "stub");
  CHECK(tree.find("1.1") != nullptr);
  CHECK(tree.find("1.3")->title == "When should I not use this medication?");
  CHECK(tree.find("9.9") == nullptr);
  CHECK(indexes.find(ref.doc_id, "stub").has_value());

  PageIndexStore reopened(dir.path() / "pageindex");
  CHECK(reopened.size() == 1);
  CHECK(to_json(*reopened.find(ref.doc_id, "stub")) == to_json(tree));

  CHECK(error_code_of([&] { indexes.build_page_index(store, "DOC-none", reader); }) ==
        ErrorCode::UnknownDocument);
}

TEST_CASE("single heading with empty body") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PageIndexStore indexes(dir.path() / "pageindex");
  auto ref = cleaned_doc(store, "1 Only heading\n");
  auto tree = indexes.build_page_index(store, ref.doc_id, HeadingReader{});
  REQUIRE(tree.roots.size() == 1);
  CHECK(tree.node_count() == 1);
  CHECK(tree.roots[0].summary.empty());
}

TEST_CASE("stub reader is deterministic") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PageIndexStore indexes(dir.path() / "pageindex");
  auto ref = cleaned_doc(store, kInsertText);
  auto first = to_json(indexes.build_page_index(store, ref.doc_id, HeadingReader{})).dump();
  auto bytes_on_disk = read_text_file(indexes.tree_path(ref.doc_id, "stub"));
  auto second = to_json(indexes.build_page_index(store, ref.doc_id, HeadingReader{})).dump();
  CHECK(first == second);
  CHECK(read_text_file(indexes.tree_path(ref.doc_id, "stub")) == bytes_on_disk);
}

namespace {

class FailingReader final : public Reader {
 public:
  std::string reader_id() const override { return "broken"; }
  std::vector<PageIndexNode> read(std::string_view) const override {
    throw std::runtime_error("model offline");
  }
};

}  // namespace

TEST_CASE("foreign reader exceptions become ReaderFailure") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PageIndexStore indexes(dir.path() / "pageindex");
  auto ref = cleaned_doc(store, kInsertText);
  CHECK(error_code_of([&] { indexes.build_page_index(store, ref.doc_id, FailingReader{}); }) ==
        ErrorCode::ReaderFailure);
  CHECK(indexes.size() == 0);
}
