#pragma once

// Tree edit scripts (UPD/ADD/DEL/MOV): ingestion, application, root-operation
// counting and a simple top-down differ.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "astcrf/ast.hpp"

namespace astcrf {

enum class EditKind { Update, Add, Delete, Move };

inline std::string_view to_string(EditKind k) {
  switch (k) {
    case EditKind::Update: return "UPD";
    case EditKind::Add: return "ADD";
    case EditKind::Delete: return "DEL";
    case EditKind::Move: return "MOV";
  }
  return "?";
}

/// A node reference: a pre-order position in the before-tree, or the fresh id
/// an ADD gave to a new node.
struct NodeRef {
  int position = 0;
  std::string fresh;

  static NodeRef before(int p) { return NodeRef{p, {}}; }
  static NodeRef added(std::string id) { return NodeRef{0, std::move(id)}; }

  bool is_before() const noexcept { return fresh.empty(); }
  bool operator==(const NodeRef&) const = default;
  auto operator<=>(const NodeRef&) const = default;

  std::string str() const { return is_before() ? std::to_string(position) : fresh; }
};

struct EditOp {
  EditKind kind = EditKind::Update;
  NodeRef node;
  std::optional<NodeRef> parent;
  std::optional<int> index;  // 1-based
  std::optional<std::string> new_value;
  // Payload of the node created by ADD.
  Label label = Label::Unknown;
  std::optional<std::string> value;
  Json attrs = Json::object();

  static EditOp upd(int node, std::string val) {
    EditOp op;
    op.kind = EditKind::Update;
    op.node = NodeRef::before(node);
    op.new_value = std::move(val);
    return op;
  }
  static EditOp del(NodeRef node) {
    EditOp op;
    op.kind = EditKind::Delete;
    op.node = std::move(node);
    return op;
  }
  static EditOp mov(NodeRef node, NodeRef parent, int index) {
    EditOp op;
    op.kind = EditKind::Move;
    op.node = std::move(node);
    op.parent = std::move(parent);
    op.index = index;
    return op;
  }
  static EditOp add(std::string id, std::optional<NodeRef> parent, int index, Label label,
                    std::optional<std::string> value = std::nullopt, Json attrs = Json::object()) {
    EditOp op;
    op.kind = EditKind::Add;
    op.node = NodeRef::added(std::move(id));
    op.parent = std::move(parent);
    op.index = index;
    op.label = label;
    op.value = std::move(value);
    op.attrs = std::move(attrs);
    return op;
  }
};

struct EditScript {
  Ast before;
  Ast after;
  std::vector<EditOp> ops;
};

// ---------------------------------------------------------------------------
// Working tree with provenance
// ---------------------------------------------------------------------------

/// Mutable tree used while applying a script. Every node remembers where it
/// came from (a before-tree position or an ADD id).
class WorkTree {
 public:
  struct Slot {
    NodeRef origin;
    Label label = Label::Unknown;
    std::optional<std::string> value;
    Json attrs = Json::object();
    int parent = -1;
    std::vector<int> children;
    bool alive = true;
  };

  explicit WorkTree(const Ast& before) {
    by_position_.assign(static_cast<std::size_t>(before.node_count) + 1, -1);
    root_ = load(before.root, -1);
  }

  int root() const noexcept { return root_; }
  const Slot& slot(int i) const { return slots_.at(i); }
  int size() const noexcept { return static_cast<int>(slots_.size()); }

  /// Slot index for a reference, or -1.
  int find(const NodeRef& ref) const {
    if (ref.is_before()) {
      if (ref.position <= 0 || ref.position >= static_cast<int>(by_position_.size())) return -1;
      return by_position_[ref.position];
    }
    auto it = by_fresh_.find(ref.fresh);
    return it == by_fresh_.end() ? -1 : it->second;
  }

  void apply(const EditOp& op, std::size_t op_index) {
    const std::string where = "op " + std::to_string(op_index) + " (" +
                              std::string(to_string(op.kind)) + " " + op.node.str() + ")";
    switch (op.kind) {
      case EditKind::Update: {
        int x = live(op.node, where);
        slots_[x].value = op.new_value;
        break;
      }
      case EditKind::Delete: {
        int x = live(op.node, where);
        if (!slots_[x].children.empty()) throw EditError(where + ": DEL on a non-leaf node");
        if (x == root_) throw EditError(where + ": cannot delete the root");
        detach(x);
        slots_[x].alive = false;
        break;
      }
      case EditKind::Add: {
        if (find(op.node) != -1) throw EditError(where + ": node id already exists");
        Slot s;
        s.origin = op.node;
        s.label = op.label;
        s.value = op.value;
        s.attrs = op.attrs;
        int x = static_cast<int>(slots_.size());
        slots_.push_back(std::move(s));
        by_fresh_[op.node.fresh] = x;
        if (op.parent) {
          int y = live(*op.parent, where);
          insert(x, y, op.index.value_or(1), where);
        } else {
          // New root; the previous root becomes its only child.
          slots_[x].children.push_back(root_);
          slots_[root_].parent = x;
          root_ = x;
        }
        break;
      }
      case EditKind::Move: {
        int x = live(op.node, where);
        if (!op.parent) throw EditError(where + ": MOV without parent");
        int y = live(*op.parent, where);
        for (int a = y; a != -1; a = slots_[a].parent) {
          if (a == x) throw EditError(where + ": MOV into own subtree");
        }
        if (x == root_) throw EditError(where + ": cannot move the root");
        detach(x);
        insert(x, y, op.index.value_or(1), where);
        break;
      }
    }
  }

  Ast to_ast() const {
    Ast out;
    out.root = export_node(root_);
    return index_preorder(std::move(out));
  }

  /// Slot indices of the subtree rooted at `i`, pre-order.
  std::vector<int> subtree(int i) const {
    std::vector<int> out;
    auto walk = [&](auto&& self, int n) -> void {
      out.push_back(n);
      for (int c : slots_[n].children) self(self, c);
    };
    walk(walk, i);
    return out;
  }

 private:
  int load(const Node& n, int parent) {
    int idx = static_cast<int>(slots_.size());
    Slot s;
    s.origin = NodeRef::before(n.position);
    s.label = n.label;
    s.value = n.value;
    s.attrs = n.attrs;
    s.parent = parent;
    slots_.push_back(std::move(s));
    by_position_[n.position] = idx;
    for (const auto& c : n.children) {
      int ci = load(c, idx);
      slots_[idx].children.push_back(ci);
    }
    return idx;
  }

  int live(const NodeRef& ref, const std::string& where) const {
    int i = find(ref);
    if (i < 0 || !slots_[i].alive) {
      throw EditError(where + ": reference " + ref.str() + " does not resolve to a live node");
    }
    return i;
  }

  void detach(int x) {
    int p = slots_[x].parent;
    if (p < 0) return;
    auto& ch = slots_[p].children;
    ch.erase(std::find(ch.begin(), ch.end(), x));
    slots_[x].parent = -1;
  }

  void insert(int x, int y, int index, const std::string& where) {
    auto& ch = slots_[y].children;
    if (index < 1 || index > static_cast<int>(ch.size()) + 1) {
      throw EditError(where + ": invalid index " + std::to_string(index) + " (parent has " +
                      std::to_string(ch.size()) + " children)");
    }
    ch.insert(ch.begin() + (index - 1), x);
    slots_[x].parent = y;
  }

  Node export_node(int i) const {
    const Slot& s = slots_[i];
    Node n;
    n.label = s.label;
    n.value = s.value;
    n.attrs = s.attrs;
    for (int c : s.children) n.children.push_back(export_node(c));
    return n;
  }

  std::vector<Slot> slots_;
  std::vector<int> by_position_;
  std::map<std::string, int> by_fresh_;
  int root_ = -1;
};

/// Applies `ops` in order. Indices refer to the tree as it stands when the op
/// runs; ADD without a parent makes the new node the root.
inline Ast apply_edit_script(const Ast& before, const std::vector<EditOp>& ops) {
  WorkTree tree(before);
  for (std::size_t i = 0; i < ops.size(); ++i) tree.apply(ops[i], i);
  return tree.to_ast();
}

/// Throws EditError unless the ops turn `before` into a tree isomorphic to
/// `after`.
inline void verify_edit_script(const EditScript& s) {
  if (!isomorphic(apply_edit_script(s.before, s.ops), s.after)) {
    throw EditError("edit script does not reproduce its after-tree");
  }
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline NodeRef ref_from_json(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return NodeRef::before(j.get<int>());
  if (j.is_string()) return NodeRef::added(j.get<std::string>());
  throw ParseError(where + ": node reference must be an integer position or a string id");
}

inline Json ref_to_json(const NodeRef& r) {
  return r.is_before() ? Json(r.position) : Json(r.fresh);
}

}  // namespace detail

inline std::vector<EditOp> edit_ops_from_json(const Json& ops_json, const Ast& before) {
  if (!ops_json.is_array()) throw ParseError("'ops' must be an array");
  std::vector<EditOp> ops;
  std::map<std::string, bool> fresh_ids;
  auto check_ref = [&](const NodeRef& r, const std::string& where) {
    if (r.is_before()) {
      if (r.position < 1 || r.position > before.node_count) {
        throw ParseError(where + ": dangling node reference " + r.str());
      }
    } else if (!fresh_ids.count(r.fresh)) {
      throw ParseError(where + ": dangling node reference '" + r.fresh + "'");
    }
  };
  for (std::size_t i = 0; i < ops_json.size(); ++i) {
    const Json& o = ops_json[i];
    const std::string where = "op " + std::to_string(i);
    if (!o.is_object()) throw ParseError(where + ": must be an object");
    auto kind_it = o.find("kind");
    if (kind_it == o.end() || !kind_it->is_string()) throw ParseError(where + ": missing 'kind'");
    const std::string kind = kind_it->get<std::string>();
    if (!o.contains("node")) throw ParseError(where + ": missing 'node'");
    EditOp op;
    op.node = detail::ref_from_json(o["node"], where);
    const bool has_parent = o.contains("parent") && !o["parent"].is_null();
    const bool has_index = o.contains("index") && !o["index"].is_null();
    if (has_index) {
      if (!o["index"].is_number_integer() || o["index"].get<int>() < 1) {
        throw ParseError(where + ": 'index' must be an integer >= 1");
      }
      op.index = o["index"].get<int>();
    }
    if (has_parent) op.parent = detail::ref_from_json(o["parent"], where);

    if (kind == "UPD") {
      op.kind = EditKind::Update;
      if (!o.contains("new_value")) throw ParseError(where + ": UPD requires 'new_value'");
      if (has_parent || has_index) throw ParseError(where + ": UPD takes no parent/index");
      if (!o["new_value"].is_null()) {
        if (!o["new_value"].is_string()) throw ParseError(where + ": 'new_value' must be a string");
        op.new_value = o["new_value"].get<std::string>();
      }
      check_ref(op.node, where);
    } else if (kind == "DEL") {
      op.kind = EditKind::Delete;
      if (has_parent || has_index || o.contains("new_value")) {
        throw ParseError(where + ": DEL takes no parent/index/new_value");
      }
      check_ref(op.node, where);
    } else if (kind == "MOV") {
      op.kind = EditKind::Move;
      if (!has_parent || !has_index) throw ParseError(where + ": MOV requires 'parent' and 'index'");
      check_ref(op.node, where);
      check_ref(*op.parent, where);
    } else if (kind == "ADD") {
      op.kind = EditKind::Add;
      if (!has_index) throw ParseError(where + ": ADD requires 'index'");
      if (op.node.is_before()) throw ParseError(where + ": ADD 'node' must be a fresh string id");
      if (fresh_ids.count(op.node.fresh)) {
        throw ParseError(where + ": duplicate fresh id '" + op.node.fresh + "'");
      }
      auto lab = o.find("label");
      if (lab == o.end() || !lab->is_string()) throw ParseError(where + ": ADD requires 'label'");
      auto label = label_from_string(lab->get<std::string>());
      if (!label) {
        throw ParseError(where + ": unknown label '" + lab->get<std::string>() +
                         "'; expected one of: " + label_alphabet_listing());
      }
      op.label = *label;
      if (auto v = o.find("value"); v != o.end() && !v->is_null()) {
        if (!v->is_string()) throw ParseError(where + ": 'value' must be a string or null");
        op.value = v->get<std::string>();
      }
      if (auto a = o.find("attrs"); a != o.end() && a->is_object()) op.attrs = *a;
      if (op.parent) check_ref(*op.parent, where);
      fresh_ids[op.node.fresh] = true;
    } else {
      throw ParseError(where + ": unknown kind '" + kind + "'");
    }
    ops.push_back(std::move(op));
  }
  return ops;
}

inline Json edit_ops_to_json(const std::vector<EditOp>& ops) {
  Json arr = Json::array();
  for (const auto& op : ops) {
    Json o = Json::object();
    o["kind"] = std::string(to_string(op.kind));
    o["node"] = detail::ref_to_json(op.node);
    if (op.parent) o["parent"] = detail::ref_to_json(*op.parent);
    if (op.index) o["index"] = *op.index;
    if (op.kind == EditKind::Update) {
      o["new_value"] = op.new_value ? Json(*op.new_value) : Json(nullptr);
    }
    if (op.kind == EditKind::Add) {
      o["label"] = std::string(to_string(op.label));
      o["value"] = op.value ? Json(*op.value) : Json(nullptr);
      if (!op.attrs.empty()) o["attrs"] = op.attrs;
    }
    arr.push_back(std::move(o));
  }
  return arr;
}

/// Parses the ops of an edit-script document against already-loaded trees
/// and checks that they turn `before` into `after`. The document's own
/// "before"/"after" members are not consulted.
inline EditScript parse_edit_script(std::string_view text, Ast before, Ast after) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed edit-script document: ") + e.what());
  }
  if (!j.is_object() || !j.contains("ops")) throw ParseError("edit script needs an 'ops' array");
  EditScript s;
  s.ops = edit_ops_from_json(j["ops"], before);
  s.before = std::move(before);
  s.after = std::move(after);
  verify_edit_script(s);
  return s;
}

inline Json edit_script_to_json(const EditScript& s) {
  Json j = Json::object();
  j["before"] = ast_to_json(s.before);
  j["after"] = ast_to_json(s.after);
  j["ops"] = edit_ops_to_json(s.ops);
  return j;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Loads an edit-script file whose "before"/"after" are inline trees or paths
/// relative to the script.
inline EditScript load_edit_script(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  auto tree = [&](const char* key) -> Ast {
    if (!j.contains(key)) throw ParseError(path.string() + ": missing '" + key + "'");
    const Json& t = j[key];
    if (t.is_string()) {
      return parse_ast_document(read_text_file(path.parent_path() / t.get<std::string>()));
    }
    return ast_from_json(t);
  };
  Ast before = tree("before");
  Ast after = tree("after");
  EditScript s;
  s.ops = edit_ops_from_json(j.value("ops", Json::array()), before);
  s.before = std::move(before);
  s.after = std::move(after);
  verify_edit_script(s);
  return s;
}

// ---------------------------------------------------------------------------
// Root operations
// ---------------------------------------------------------------------------

/// Number of ops whose target's parent already exists in the before-tree. ADD
/// and MOV look at their destination parent; an ADD with no parent (new root)
/// counts. UPD/DEL count when they target a before-tree node.
inline int count_root_edit_ops(const EditScript& script) {
  int count = 0;
  for (const auto& op : script.ops) {
    switch (op.kind) {
      case EditKind::Add:
      case EditKind::Move:
        if (!op.parent || op.parent->is_before()) ++count;
        break;
      case EditKind::Update:
      case EditKind::Delete:
        if (op.node.is_before()) ++count;
        break;
    }
  }
  return count;
}

inline constexpr int kDefaultRootOpThreshold = 10;

inline std::vector<EditScript> filter_by_root_ops(std::vector<EditScript> scripts,
                                                  int threshold = kDefaultRootOpThreshold) {
  if (threshold < 1) throw Error("root-op threshold must be >= 1");
  std::erase_if(scripts, [&](const EditScript& s) { return count_root_edit_ops(s) > threshold; });
  return scripts;
}

// ---------------------------------------------------------------------------
// Naive differ
// ---------------------------------------------------------------------------

namespace detail {

class NaiveDiffer {
 public:
  std::vector<EditOp> run(const Ast& before, const Ast& after) {
    if (before.root.label == after.root.label) {
      match(before.root, NodeRef::before(before.root.position), after.root);
    } else {
      // Replace the whole tree: new root on top, old tree removed below it.
      std::string id = fresh();
      ops_.push_back(EditOp::add(id, std::nullopt, 1, after.root.label, after.root.value,
                                 after.root.attrs));
      delete_subtree(before.root);
      for (std::size_t i = 0; i < after.root.children.size(); ++i) {
        add_subtree(after.root.children[i], NodeRef::added(id), static_cast<int>(i) + 1);
      }
    }
    return std::move(ops_);
  }

 private:
  std::string fresh() { return "n" + std::to_string(++counter_); }

  void delete_subtree(const Node& n) {
    for (const auto& c : n.children) delete_subtree(c);
    ops_.push_back(EditOp::del(NodeRef::before(n.position)));
  }

  void add_subtree(const Node& n, const NodeRef& parent, int index) {
    std::string id = fresh();
    ops_.push_back(EditOp::add(id, parent, index, n.label, n.value, n.attrs));
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      add_subtree(n.children[i], NodeRef::added(id), static_cast<int>(i) + 1);
    }
  }

  void match(const Node& b, const NodeRef& bref, const Node& a) {
    if (b.value != a.value) {
      EditOp op;
      op.kind = EditKind::Update;
      op.node = bref;
      op.new_value = a.value;
      ops_.push_back(std::move(op));
    }
    const auto& bc = b.children;
    const auto& ac = a.children;
    // LCS over child labels.
    const std::size_t n = bc.size(), m = ac.size();
    std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = m; j-- > 0;) {
        lcs[i][j] = bc[i].label == ac[j].label ? lcs[i + 1][j + 1] + 1
                                               : std::max(lcs[i + 1][j], lcs[i][j + 1]);
      }
    }
    std::vector<int> b_to_a(n, -1), a_to_b(m, -1);
    for (std::size_t i = 0, j = 0; i < n && j < m;) {
      if (bc[i].label == ac[j].label && lcs[i][j] == lcs[i + 1][j + 1] + 1) {
        b_to_a[i] = static_cast<int>(j);
        a_to_b[j] = static_cast<int>(i);
        ++i;
        ++j;
      } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
        ++i;
      } else {
        ++j;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (b_to_a[i] < 0) delete_subtree(bc[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (b_to_a[i] >= 0) match(bc[i], NodeRef::before(bc[i].position), ac[b_to_a[i]]);
    }
    // Matched children keep their relative order, so inserting the remaining
    // after-children in increasing order lands each at its final index.
    for (std::size_t j = 0; j < m; ++j) {
      if (a_to_b[j] < 0) add_subtree(ac[j], bref, static_cast<int>(j) + 1);
    }
  }

  std::vector<EditOp> ops_;
  int counter_ = 0;
};

}  // namespace detail

/// UPD/ADD/DEL script from top-down label-aligned matching. Never emits MOV.
inline EditScript diff_naive(const Ast& before, const Ast& after) {
  EditScript s;
  s.before = before;
  s.after = after;
  s.ops = detail::NaiveDiffer{}.run(before, after);
  return s;
}

}  // namespace astcrf
