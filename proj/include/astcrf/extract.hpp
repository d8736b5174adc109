#pragma once

// Ground-truth transform labels from edit scripts. Each rule keys on its
// essential edit operations; follow-up edits (the nodes of an added
// condition, a moved operand under a new operator) are not inspected.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "astcrf/edit_script.hpp"
#include "astcrf/transforms.hpp"

namespace astcrf {

/// Attribute names read from nodes (or from ADD payloads for new nodes).
namespace attr {
inline constexpr const char* kDefEdited = "def_edited";
inline constexpr const char* kDefChildrenEdited = "def_children_edited";
inline constexpr const char* kNewDefEdited = "new_def_edited";
inline constexpr const char* kNewDefChildrenEdited = "new_def_children_edited";
}  // namespace attr

namespace detail {

class RuleMatcher {
 public:
  explicit RuleMatcher(const EditScript& script)
      : script_(script), before_(script.before), after_(script.before) {
    for (std::size_t i = 0; i < script.ops.size(); ++i) after_.apply(script.ops[i], i);
    for (const auto& op : script.ops) ops_on_[op.node].push_back(&op);
  }

  TransformLabeling run() {
    match_update_rules();
    match_replacement_rules();
    match_method_wrapping();
    match_logical_expression_rules();
    match_conditional_wrapping();
    match_unwrapping();
    return build_labeling();
  }

 private:
  struct Claim {
    Transform transform;
    bool on_virtual_root;
  };

  // --- edit lookups ---------------------------------------------------------

  bool touched(const NodeRef& r) const { return ops_on_.count(r) > 0; }

  bool touched_by(const NodeRef& r, EditKind kind) const {
    auto it = ops_on_.find(r);
    if (it == ops_on_.end()) return false;
    for (const EditOp* op : it->second) {
      if (op->kind == kind) return true;
    }
    return false;
  }

  /// True when `r` is untouched apart from being moved under `allowed_parent`.
  bool untouched_except_move_into(const NodeRef& r, const NodeRef& allowed_parent) const {
    auto it = ops_on_.find(r);
    if (it == ops_on_.end()) return true;
    for (const EditOp* op : it->second) {
      if (op->kind != EditKind::Move || !op->parent || *op->parent != allowed_parent) return false;
    }
    return true;
  }

  /// True when `r` is untouched apart from moves.
  bool untouched_except_move(const NodeRef& r) const {
    auto it = ops_on_.find(r);
    if (it == ops_on_.end()) return true;
    for (const EditOp* op : it->second) {
      if (op->kind != EditKind::Move) return false;
    }
    return true;
  }

  const Json& attrs_of(const NodeRef& r) const {
    if (r.is_before()) return before_.node(r.position).attrs;
    return after_.slot(after_.find(r)).attrs;
  }

  static bool flag(const Json& attrs, const char* name) {
    auto it = attrs.find(name);
    return it != attrs.end() && it->is_boolean() && it->get<bool>();
  }

  bool definition_untouched(const NodeRef& r) const {
    const Json& a = attrs_of(r);
    return !flag(a, attr::kDefEdited) && !flag(a, attr::kDefChildrenEdited);
  }

  bool new_definition_untouched(const NodeRef& r) const {
    const Json& a = attrs_of(r);
    return !flag(a, attr::kNewDefEdited) && !flag(a, attr::kNewDefChildrenEdited);
  }

  Label before_label(const NodeRef& r) const { return before_.label(r.position); }

  std::optional<NodeRef> before_parent(const NodeRef& r) const {
    if (!r.is_before()) return std::nullopt;
    int p = before_.parent(r.position);
    if (p == 0) return std::nullopt;
    return NodeRef::before(p);
  }

  const WorkTree::Slot& after_slot(const NodeRef& r) const { return after_.slot(after_.find(r)); }

  // --- claims ---------------------------------------------------------------

  void claim(int before_position, Transform t, bool on_virtual_root = false) {
    Claim c{t, on_virtual_root};
    claims_.emplace_back(before_position, c);
  }

  // --- rules ----------------------------------------------------------------

  void match_update_rules() {
    for (const auto& op : script_.ops) {
      if (op.kind != EditKind::Update || !op.node.is_before()) continue;
      const Label l = before_label(op.node);
      const bool defs_clean = definition_untouched(op.node) && new_definition_untouched(op.node);
      if (l == Label::VariableAccess && defs_clean) {
        claim(op.node.position, Transform::VarRwVar);
      } else if (l == Label::MethodCall && defs_clean) {
        claim(op.node.position, Transform::MethRwMeth);  // Case1: renamed call
      } else if (l == Label::BinaryOperator) {
        claim(op.node.position, Transform::BinOperatorRep);
      } else if (l == Label::Literal) {
        claim(op.node.position, Transform::ConstantRep);
      }
    }
  }

  void match_replacement_rules() {
    for (const auto& del : script_.ops) {
      if (del.kind != EditKind::Delete || !del.node.is_before()) continue;
      const NodeRef n1 = del.node;
      const auto parent = before_parent(n1);
      if (!parent) continue;
      const Label l1 = before_label(n1);

      // Var-RW-Meth / Meth-RW-Var: a replacement added under the same parent.
      for (const auto& add : script_.ops) {
        if (add.kind != EditKind::Add || !add.parent || *add.parent != *parent) continue;
        if (!definition_untouched(n1) || !definition_untouched(add.node)) continue;
        if (l1 == Label::VariableAccess && add.label == Label::MethodCall) {
          claim(n1.position, Transform::VarRwMeth);
        } else if (l1 == Label::MethodCall && add.label == Label::VariableAccess) {
          claim(n1.position, Transform::MethRwVar);
        }
      }

      // Meth-RW-Meth Case2: an argument dropped from an otherwise untouched
      // call (switch to an overload). The label sits on the call.
      if (before_label(*parent) == Label::MethodCall && !touched(*parent) &&
          definition_untouched(*parent) && !receives_new_child(*parent)) {
        claim(parent->position, Transform::MethRwMeth);
      }
    }
  }

  /// Some ADD or MOV puts a node under `r`.
  bool receives_new_child(const NodeRef& r) const {
    for (const auto& op : script_.ops) {
      if ((op.kind == EditKind::Add || op.kind == EditKind::Move) && op.parent && *op.parent == r) return true;
    }
    return false;
  }

  const EditOp* add_op(const NodeRef& fresh) const {
    auto it = ops_on_.find(fresh);
    if (it == ops_on_.end()) return nullptr;
    for (const EditOp* op : it->second) {
      if (op->kind == EditKind::Add) return op;
    }
    return nullptr;
  }

  void match_method_wrapping() {
    for (const auto& mov : script_.ops) {
      if (mov.kind != EditKind::Move || !mov.node.is_before() || !mov.parent) continue;
      const NodeRef n1 = mov.node;
      const auto p1 = before_parent(n1);

      // Moved under a freshly added node that took n1's place.
      if (!mov.parent->is_before() && p1) {
        const EditOp* add = add_op(*mov.parent);
        if (add && add->parent && *add->parent == *p1) {
          if (add->label == Label::MethodCall && definition_untouched(add->node)) {
            claim(n1.position, Transform::WrapMeth);
          } else if (add->label == Label::TernaryOperator) {
            // Wrap-IFELSE Case3: expression becomes a branch of a new ternary.
            const int t = after_.find(add->node);
            const bool null_check = condition_has_null(t);
            claim(n1.position, null_check ? Transform::WrapIfElseN : Transform::WrapIfElseO);
          }
        }
      }

      // Moved up over a deleted parent into the grandparent.
      if (p1 && touched_by(*p1, EditKind::Delete)) {
        const auto p2 = before_parent(*p1);
        if (p2 && *mov.parent == *p2) {
          const Label l3 = before_label(*p1);
          if (l3 == Label::MethodCall && definition_untouched(*p1)) {
            claim(n1.position, Transform::UnwrapMeth);
          } else if (l3 == Label::TernaryOperator) {
            claim(p1->position, Transform::UnwrapIf);  // Case2
          }
        }
      }
    }
  }

  int logical_root_in_after(int slot) const {
    int top = slot;
    for (int p = after_.slot(top).parent;
         p >= 0 && after_.slot(p).label == Label::LogicalOperator; p = after_.slot(p).parent) {
      top = p;
    }
    return top;
  }

  void match_logical_expression_rules() {
    for (const auto& add : script_.ops) {
      if (add.kind != EditKind::Add || add.label != Label::LogicalOperator) continue;
      const int n1 = after_.find(add.node);
      const auto& kids = after_.slot(n1).children;
      std::optional<NodeRef> kept;
      for (int c : kids) {
        const NodeRef& o = after_.slot(c).origin;
        if (o.is_before() && untouched_except_move_into(o, add.node)) {
          kept = o;
          break;
        }
      }
      if (!kept) continue;
      bool grown = false;
      for (int c : kids) {
        if (after_.slot(c).origin == *kept) continue;
        bool all_added = true;
        for (int s : after_.subtree(c)) all_added &= !after_.slot(s).origin.is_before();
        grown |= all_added;
      }
      if (!grown) continue;
      const int top = logical_root_in_after(n1);
      const NodeRef& root = after_.slot(top).origin;
      claim(root.is_before() ? root.position : kept->position, Transform::LogExpExp);
    }

    for (const auto& del : script_.ops) {
      if (del.kind != EditKind::Delete || !del.node.is_before()) continue;
      const int n = del.node.position;
      if (before_.label(n) != Label::LogicalOperator) continue;
      bool kept = false;
      bool removed = false;
      for (int c : before_.children(n)) {
        const NodeRef cr = NodeRef::before(c);
        bool subtree_deleted = true;
        for_each_before_descendant(c, [&](int d) {
          subtree_deleted &= touched_by(NodeRef::before(d), EditKind::Delete);
        });
        if (!kept && untouched_except_move(cr)) {
          kept = true;
        } else if (subtree_deleted) {
          removed = true;
        }
      }
      if (!kept || !removed) continue;
      int top = n;
      while (before_.parent(top) != 0 && before_.label(before_.parent(top)) == Label::LogicalOperator) {
        top = before_.parent(top);
      }
      claim(top, Transform::LogExpRed);
    }
  }

  template <typename F>
  void for_each_before_descendant(int position, F&& f) const {
    f(position);
    for (int c : before_.children(position)) for_each_before_descendant(c, f);
  }

  // --- blocks ---------------------------------------------------------------

  /// First child of `slot` (in the after-tree) carrying `label`, or -1.
  int after_child_labeled(int slot, Label label) const {
    for (int c : after_.slot(slot).children) {
      if (after_.slot(c).label == label) return c;
    }
    return -1;
  }

  /// The condition of an If/ternary: its first child that is not a block.
  int condition_of(int slot) const {
    for (int c : after_.slot(slot).children) {
      const Label l = after_.slot(c).label;
      if (l != Label::Then && l != Label::Else && l != Label::Block) return c;
    }
    return -1;
  }

  bool condition_has_null(int slot) const {
    const int cond = condition_of(slot);
    if (cond < 0) return false;
    for (int s : after_.subtree(cond)) {
      const auto& n = after_.slot(s);
      if (n.label == Label::Literal && n.value && *n.value == "null") return true;
    }
    return false;
  }

  /// Root node of a statement slot (looks through a VirtualRoot).
  NodeRef statement_root(int stmt_slot) const {
    const auto& s = after_.slot(stmt_slot);
    if (s.label == Label::VirtualRoot && !s.children.empty()) {
      return after_.slot(s.children.front()).origin;
    }
    return s.origin;
  }

  bool statement_moved(int stmt_slot) const {
    const NodeRef& own = after_.slot(stmt_slot).origin;
    const NodeRef root = statement_root(stmt_slot);
    return root.is_before() && (touched_by(root, EditKind::Move) || touched_by(own, EditKind::Move));
  }

  /// First moved statement of a block, in block order; -1 when none.
  int first_moved_statement(int block_slot) const {
    if (block_slot < 0) return -1;
    for (int s : after_.slot(block_slot).children) {
      if (statement_moved(s)) return s;
    }
    return -1;
  }

  bool block_empty(int block_slot) const {
    return block_slot < 0 || after_.slot(block_slot).children.empty();
  }

  void claim_statement(int stmt_slot, Transform t) {
    const NodeRef root = statement_root(stmt_slot);
    claim(root.position, t, /*on_virtual_root=*/true);
  }

  void match_conditional_wrapping() {
    for (const auto& add : script_.ops) {
      if (add.kind != EditKind::Add) continue;
      const int n1 = after_.find(add.node);
      if (add.label == Label::If) {
        const bool null_check = condition_has_null(n1);
        const int then_block = after_child_labeled(n1, Label::Then);
        const int else_block = after_child_labeled(n1, Label::Else);
        const int moved_then = first_moved_statement(then_block);
        const int moved_else = first_moved_statement(else_block);
        if (block_empty(else_block)) {
          if (moved_then >= 0) {
            claim_statement(moved_then, null_check ? Transform::WrapIfN : Transform::WrapIfO);
          }
        } else if (!block_empty(then_block)) {
          if (moved_then >= 0 && moved_else < 0) {
            claim_statement(moved_then, null_check ? Transform::WrapIfElseN : Transform::WrapIfElseO);
          } else if (moved_then < 0 && moved_else >= 0) {
            claim_statement(moved_else, null_check ? Transform::WrapIfElseN : Transform::WrapIfElseO);
          }
        }
      } else if (add.label == Label::Try) {
        int body = after_child_labeled(n1, Label::Block);
        const int moved = first_moved_statement(body);
        if (moved >= 0) claim_statement(moved, Transform::WrapTry);
      }
    }
  }

  bool before_block_has_moved_statement(int block) const {
    for (int s : before_.children(block)) {
      int root = s;
      if (before_.label(s) == Label::VirtualRoot && !before_.children(s).empty()) {
        root = before_.children(s).front();
      }
      if (touched_by(NodeRef::before(root), EditKind::Move) ||
          touched_by(NodeRef::before(s), EditKind::Move)) {
        return true;
      }
    }
    return false;
  }

  void match_unwrapping() {
    for (const auto& del : script_.ops) {
      if (del.kind != EditKind::Delete || !del.node.is_before()) continue;
      const int n = del.node.position;
      if (before_.label(n) != Label::If) continue;
      bool moved = false;
      for (int c : before_.children(n)) {
        const Label l = before_.label(c);
        if (l == Label::Then || l == Label::Else) moved |= before_block_has_moved_statement(c);
      }
      if (moved) claim(n, Transform::UnwrapIf);  // Case1
    }
  }

  // --- output ---------------------------------------------------------------

  TransformLabeling build_labeling() {
    Ast tree = script_.before;
    // A statement-level target must have a VirtualRoot above it.
    std::set<int> statement_roots;
    for (const auto& [pos, c] : claims_) {
      if (c.on_virtual_root) statement_roots.insert(pos);
    }
    if (!statement_roots.empty()) flag_statement_roots(tree.root, statement_roots);
    const std::vector<int> pos_map = virtual_root_position_map(tree);
    TransformLabeling out(insert_virtual_roots(tree));
    TreeIndex idx(out.ast);

    std::map<int, Transform> final_claims;
    for (const auto& [pos, c] : claims_) {
      int target = pos_map.at(pos);
      if (c.on_virtual_root) {
        target = idx.parent(target);
        if (target == 0 || idx.label(target) != Label::VirtualRoot) {
          throw Error("statement at position " + std::to_string(pos) + " has no virtual root");
        }
      }
      auto [it, inserted] = final_claims.emplace(target, c.transform);
      if (!inserted && it->second != c.transform) {
        throw ExtractionConflict(target, std::string(to_string(it->second)),
                                 std::string(to_string(c.transform)));
      }
    }
    for (const auto& [target, t] : final_claims) out.set(target, t);
    return out;
  }

  static void flag_statement_roots(Node& n, const std::set<int>& roots) {
    if (roots.count(n.position)) n.attrs[std::string(kStatementRootAttr)] = true;
    for (auto& c : n.children) flag_statement_roots(c, roots);
  }

  const EditScript& script_;
  TreeIndex before_;
  WorkTree after_;
  std::map<NodeRef, std::vector<const EditOp*>> ops_on_;
  std::vector<std::pair<int, Claim>> claims_;
};

}  // namespace detail

/// Labels the before-tree (with virtual roots inserted) of `script`.
/// Throws ExtractionConflict when two rules name the same node differently.
inline TransformLabeling extract_transforms(const EditScript& script) {
  return detail::RuleMatcher(script).run();
}

}  // namespace astcrf
