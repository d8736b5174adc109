#include <gtest/gtest.h>

#include "astcrf/ast.hpp"
#include "oracles.hpp"
#include "sexpr.hpp"

namespace astcrf {
namespace {

using testing::tree;

const char* kReferenceTreeDoc = R"({"label": "Block", "value": null, "children": [
  {"label": "VariableAccess", "value": "a", "children": []},
  {"label": "Block", "value": null, "children": [
    {"label": "Block", "value": null, "children": [
      {"label": "Literal", "value": "1", "children": []},
      {"label": "Literal", "value": "2", "children": []}]},
    {"label": "VariableAccess", "value": "b", "children": []}]}]})";

void expect_preorder(const Ast& a) {
  const TreeIndex idx(a);
  ASSERT_EQ(idx.size(), a.node_count);
  EXPECT_EQ(a.root.position, 1);
  for (int p = 2; p <= idx.size(); ++p) EXPECT_LT(idx.parent(p), p);
}

TEST(Labels, AlphabetIsClosed) {
  EXPECT_EQ(kLabelCount, 20u);
  EXPECT_EQ(to_string(Label::VirtualRoot), "VirtualRoot");
  EXPECT_EQ(label_from_string("TernaryOperator"), Label::TernaryOperator);
  EXPECT_FALSE(label_from_string("ForStatement").has_value());
}

TEST(Parse, SingleNode) {
  const Ast a = parse_ast_document(R"({"label": "Literal", "value": "0"})");
  EXPECT_EQ(a.node_count, 1);
  EXPECT_EQ(a.root.label, Label::Literal);
  EXPECT_EQ(a.root.value, "0");
  EXPECT_EQ(a.root.position, 1);
}

TEST(Parse, SevenNodeReferenceTree) {
  const Ast a = parse_ast_document(kReferenceTreeDoc);
  EXPECT_EQ(a.node_count, 7);
  expect_preorder(a);
  const TreeIndex idx(a);
  EXPECT_EQ(idx.children(1), (std::vector<int>{2, 3}));
  EXPECT_EQ(idx.children(3), (std::vector<int>{4, 7}));
  EXPECT_EQ(idx.children(4), (std::vector<int>{5, 6}));
  EXPECT_EQ(idx.node(7).value, "b");
}

TEST(Parse, MalformedDocumentNamesPosition) {
  try {
    parse_ast_document("{\"label\": \"Literal\",\n \"value\": }");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  }
}

TEST(Parse, UnknownLabelListsAlphabet) {
  try {
    parse_ast_document(R"({"label": "Lambda", "value": null})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("Lambda"), std::string::npos);
    EXPECT_NE(msg.find("VirtualRoot"), std::string::npos);
    EXPECT_NE(msg.find("TernaryOperator"), std::string::npos);
  }
}

TEST(Parse, CycleIsRejected) {
  EXPECT_THROW(parse_ast_document(R"({"id": "n1", "label": "Block", "children": [
      {"id": "n2", "label": "Block", "children": [{"ref": "n1"}]}]})"),
               ParseError);
  EXPECT_THROW(parse_ast_document(R"({"label": "Block", "children": [{"ref": "x"}]})"), ParseError);
}

TEST(Parse, SchemaViolations) {
  EXPECT_THROW(parse_ast_document(R"({"value": "x"})"), ParseError);
  EXPECT_THROW(parse_ast_document(R"({"label": "Literal", "value": 3})"), ParseError);
  EXPECT_THROW(parse_ast_document(R"({"label": "Block", "children": {}})"), ParseError);
  EXPECT_THROW(parse_ast_document(R"({"label": "VirtualRoot", "value": null, "children": []})"), ParseError);
  EXPECT_THROW(parse_ast_document(R"([1, 2])"), ParseError);
}

TEST(Parse, AttrsAndSourceIdSurvive) {
  const Ast a = parse_ast_document(
      R"({"label": "VariableAccess", "value": "x", "attrs": {"type_kind": "object", "unknown_attr": 4},
          "source_id": "c1:F.java:12"})");
  EXPECT_EQ(a.source_id, "c1:F.java:12");
  EXPECT_EQ(a.root.text_attr("type_kind"), "object");
  EXPECT_EQ(a.root.attrs["unknown_attr"], 4);
}

TEST(RoundTrip, SerializeThenParse) {
  testing::Rng rng(21);
  testing::TreeOptions opt;
  opt.max_nodes = 25;
  for (int i = 0; i < 100; ++i) {
    Ast a = testing::random_tree(rng, opt);
    a.source_id = "s" + std::to_string(i);
    const Ast b = parse_ast_document(serialize_ast(a));
    EXPECT_TRUE(identical(a.root, b.root));
    EXPECT_EQ(a.node_count, b.node_count);
    EXPECT_EQ(a.source_id, b.source_id);
    EXPECT_EQ(serialize_ast(a), serialize_ast(b));
  }
}

TEST(Preorder, Indexing) {
  expect_preorder(tree("(Literal:0)"));
  const Ast chain = tree("(Return (MethodCall:f (VariableAccess:a)))");
  EXPECT_EQ(chain.root.position, 1);
  EXPECT_EQ(chain.root.children[0].position, 2);
  EXPECT_EQ(chain.root.children[0].children[0].position, 3);
  testing::Rng rng(22);
  for (int i = 0; i < 100; ++i) expect_preorder(testing::random_tree(rng));
}

TEST(Preorder, IndexRejectsUnindexedTrees) {
  Ast a = tree("(Block (Literal:0))");
  a.root.children[0].position = 1;
  EXPECT_THROW(TreeIndex{a}, Error);
}

TEST(VirtualRoots, InsertedAboveFlaggedStatements) {
  const Ast a = tree("(Block (Assignment:={statement_root} (VariableAccess:x) (Literal:0)) (Return{statement_root}))");
  const Ast b = insert_virtual_roots(a);
  EXPECT_EQ(b.node_count, 7);
  ASSERT_EQ(b.root.children.size(), 2u);
  EXPECT_EQ(b.root.children[0].label, Label::VirtualRoot);
  EXPECT_FALSE(b.root.children[0].value.has_value());
  EXPECT_EQ(b.root.children[0].children.at(0).label, Label::Assignment);
  EXPECT_EQ(b.root.children[1].children.at(0).label, Label::Return);
  expect_preorder(b);
}

TEST(VirtualRoots, NoFlagsIsIdentity) {
  const Ast a = tree("(Block (Return (Literal:0)))");
  const Ast b = insert_virtual_roots(a);
  EXPECT_TRUE(identical(a.root, b.root));
  EXPECT_EQ(b.node_count, 3);
}

TEST(VirtualRoots, Idempotent) {
  testing::Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    Ast a = testing::random_tree(rng);
    // Flag roughly half the nodes.
    std::function<void(Node&)> flag = [&](Node& n) {
      if (testing::coin(rng, 0.5)) n.attrs["statement_root"] = true;
      for (auto& c : n.children) flag(c);
    };
    flag(a.root);
    const Ast once = insert_virtual_roots(a);
    const Ast twice = insert_virtual_roots(once);
    EXPECT_EQ(serialize_ast(once), serialize_ast(twice));
  }
}

TEST(VirtualRoots, PreserveRelativeOrderAndPositionMap) {
  testing::Rng rng(24);
  for (int i = 0; i < 100; ++i) {
    Ast a = testing::random_tree(rng);
    int next = 1;
    std::function<void(Node&)> mark = [&](Node& n) {
      n.attrs["orig"] = next++;
      if (testing::coin(rng, 0.4)) n.attrs["statement_root"] = true;
      for (auto& c : n.children) mark(c);
    };
    mark(a.root);
    const Ast b = insert_virtual_roots(a);
    const auto map = virtual_root_position_map(a);
    const TreeIndex ib(b);
    int last = 0, inserted = 0;
    for (int p = 1; p <= ib.size(); ++p) {
      const auto& attrs = ib.node(p).attrs;
      if (!attrs.contains("orig")) {
        ++inserted;
        EXPECT_EQ(ib.label(p), Label::VirtualRoot);
        continue;
      }
      const int orig = attrs["orig"].get<int>();
      EXPECT_EQ(orig, last + 1);
      last = orig;
      EXPECT_EQ(map.at(orig), p);
    }
    EXPECT_EQ(last, a.node_count);
    EXPECT_EQ(b.node_count, a.node_count + inserted);
  }
}

TEST(Isomorphism, IgnoresAttrsButIdenticalDoesNot) {
  const Ast a = tree("(Return (VariableAccess:x{type_kind=object}))");
  const Ast b = tree("(Return (VariableAccess:x))");
  EXPECT_TRUE(isomorphic(a, b));
  EXPECT_FALSE(identical(a.root, b.root));
  EXPECT_FALSE(isomorphic(a, tree("(Return (VariableAccess:y))")));
}

}  // namespace
}  // namespace astcrf
