#pragma once

// Boolean node characteristics read from semantic attributes and tree shape,
// and their propagation to enclosing calls and statement roots.
//
// Attribute vocabulary (all optional; absent means false):
//
//   VariableAccess  type_kind ("primitive"|"object"), instance_of_enclosing_class,
//                   compatible_var_in_scope, compatible_param_method,
//                   compatible_return_method, local_unreferenced_before,
//                   local_unassigned_before, field_unreferenced_elsewhere,
//                   field_unassigned_elsewhere, same_type_null_guarded_elsewhere,
//                   same_type_guarded_elsewhere, arg_var_swap_matches_call,
//                   arg_call_swap_matches_call
//   MethodCall      return_type_kind ("primitive"|"object"),
//                   param_compatible_with_return, compatible_var_in_scope,
//                   compatible_return_method, same_signature_null_guarded,
//                   same_signature_guarded, same_signature_try_wrapped,
//                   arg_var_swap_matches_call, arg_call_swap_matches_call, overloads
//   both            identifier (defaults to the node value), scope_variables,
//                   class_methods (string arrays, for name similarity)
//   LogicalOperator atom_differs_after_substitution, unreferenced_same_type_var,
//                   unreferenced_boolean_var
//   statement root  stmt_kind, prev_stmt_kind, next_stmt_kind, parent_stmt_kind,
//   (or its         throws_exception
//    VirtualRoot)

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "astcrf/ast.hpp"

namespace astcrf {

inline constexpr std::array<std::string_view, 18> kBinaryOperators = {
    "||", "&&", "|", "^", "&", "==", "!=", "<", ">", "<=", ">=", "<<", ">>", "+", "-", "*", "/", "%",
};

inline constexpr std::array<std::string_view, 9> kStatementKinds = {
    "assignment", "call", "return", "if", "loop", "try", "throw", "declaration", "other",
};

inline constexpr double kNameSimilarityThreshold = 0.7;

/// The fixed, ordered list of characteristic ids. Primed ids (V7' ...) are the
/// propagated copies.
class CharacteristicCatalog {
 public:
  static const CharacteristicCatalog& instance() {
    static const CharacteristicCatalog catalog;
    return catalog;
  }

  int size() const noexcept { return static_cast<int>(names_.size()); }
  const std::string& name(int id) const { return names_.at(id); }

  int id(std::string_view name) const {
    for (int i = 0; i < size(); ++i) {
      if (names_[i] == name) return i;
    }
    throw Error("unknown characteristic '" + std::string(name) + "'");
  }

  /// Characteristics defined for nodes of `label` (C^L).
  const std::vector<int>& for_label(Label label) const {
    return per_label_.at(static_cast<std::size_t>(label));
  }

 private:
  CharacteristicCatalog() {
    std::vector<int> var, meth, logic, binop, stmt;
    auto add = [&](std::string n) {
      names_.push_back(std::move(n));
      return size() - 1;
    };
    for (int i = 1; i <= 16; ++i) var.push_back(add("V" + std::to_string(i)));
    for (int i = 1; i <= 14; ++i) meth.push_back(add("M" + std::to_string(i)));
    std::vector<int> le;
    for (int i = 1; i <= 6; ++i) le.push_back(add("LE" + std::to_string(i)));
    std::vector<int> bo;
    for (auto op : kBinaryOperators) bo.push_back(add("BO1:" + std::string(op)));
    for (int i = 2; i <= 4; ++i) bo.push_back(add("BO" + std::to_string(i)));
    for (int s = 1; s <= 4; ++s) {
      for (auto k : kStatementKinds) stmt.push_back(add("S" + std::to_string(s) + ":" + std::string(k)));
    }
    stmt.push_back(add("S5"));
    std::vector<int> var_primed, meth_primed;
    for (int i = 7; i <= 12; ++i) var_primed.push_back(add("V" + std::to_string(i) + "'"));
    for (int i = 6; i <= 8; ++i) meth_primed.push_back(add("M" + std::to_string(i) + "'"));

    per_label_.resize(kLabelCount);
    per_label_[static_cast<std::size_t>(Label::VariableAccess)] = var;
    auto& m = per_label_[static_cast<std::size_t>(Label::MethodCall)];
    m = meth;
    m.insert(m.end(), var_primed.begin(), var_primed.end());
    per_label_[static_cast<std::size_t>(Label::BinaryOperator)] = bo;
    auto& l = per_label_[static_cast<std::size_t>(Label::LogicalOperator)];
    l = bo;
    l.insert(l.end(), le.begin(), le.end());
    auto& vr = per_label_[static_cast<std::size_t>(Label::VirtualRoot)];
    vr = stmt;
    vr.insert(vr.end(), var_primed.begin(), var_primed.end());
    vr.insert(vr.end(), meth_primed.begin(), meth_primed.end());
  }

  std::vector<std::string> names_;
  std::vector<std::vector<int>> per_label_;
};

/// Per-node characteristic values, indexed by pre-order position (slot 0 unused).
struct CharacteristicVector {
  std::vector<std::vector<bool>> values;

  explicit CharacteristicVector(int node_count = 0)
      : values(static_cast<std::size_t>(node_count) + 1,
               std::vector<bool>(static_cast<std::size_t>(CharacteristicCatalog::instance().size()))) {}

  bool get(int position, int id) const { return values.at(position).at(id); }
  void set(int position, int id, bool v) { values.at(position).at(id) = v; }
  bool get(int position, std::string_view name) const {
    return get(position, CharacteristicCatalog::instance().id(name));
  }
};

inline int levenshtein(std::string_view a, std::string_view b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Distinct names whose normalized similarity 1 - dist/max(len) reaches the
/// threshold.
inline bool similar_names(std::string_view a, std::string_view b) {
  if (a == b || a.empty() || b.empty()) return false;
  const double longest = static_cast<double>(std::max(a.size(), b.size()));
  return 1.0 - levenshtein(a, b) / longest >= kNameSimilarityThreshold;
}

namespace detail {

inline std::string identifier_of(const Node& n) {
  if (auto id = n.text_attr("identifier")) return *id;
  return n.value.value_or("");
}

inline bool any_similar(const Node& n, const char* list_attr) {
  auto it = n.attrs.find(list_attr);
  if (it == n.attrs.end() || !it->is_array()) return false;
  const std::string id = identifier_of(n);
  for (const auto& s : *it) {
    if (s.is_string() && similar_names(id, s.get<std::string>())) return true;
  }
  return false;
}

inline bool attr_equals(const Node& n, const char* name, std::string_view expected) {
  auto v = n.text_attr(name);
  return v && *v == expected;
}

inline bool subtree_has(const Node& n, Label label, std::initializer_list<std::string_view> values) {
  if (n.label == label && n.value) {
    for (auto v : values) {
      if (*n.value == v) return true;
    }
  }
  for (const auto& c : n.children) {
    if (subtree_has(c, label, values)) return true;
  }
  return false;
}

inline bool operands_have(const Node& n, Label label, std::initializer_list<std::string_view> values) {
  for (const auto& c : n.children) {
    if (subtree_has(c, label, values)) return true;
  }
  return false;
}

inline bool is_logical_op_value(const Node& n) {
  return n.value && (*n.value == "||" || *n.value == "&&");
}

inline bool is_math_op_value(const Node& n) {
  if (!n.value) return false;
  const auto& v = *n.value;
  return v == "+" || v == "-" || v == "*" || v == "/" || v == "%";
}

inline void collect_atoms(const Node& n, std::vector<const Node*>& atoms) {
  for (const auto& c : n.children) {
    if (c.label == Label::LogicalOperator) {
      collect_atoms(c, atoms);
    } else {
      atoms.push_back(&c);
    }
  }
}

inline bool is_null_check(const Node& atom) {
  if (atom.label != Label::BinaryOperator || !atom.value) return false;
  if (*atom.value != "==" && *atom.value != "!=") return false;
  for (const auto& c : atom.children) {
    if (c.label == Label::Literal && c.value && *c.value == "null") return true;
  }
  return false;
}

}  // namespace detail

/// Evaluates every unprimed characteristic on every node.
inline CharacteristicVector compute_characteristics(const Ast& ast) {
  const auto& cat = CharacteristicCatalog::instance();
  CharacteristicVector out(ast.node_count);
  TreeIndex idx(ast);
  auto set = [&](int p, std::string_view name, bool v) {
    if (v) out.set(p, cat.id(name), true);
  };

  for (int p = 1; p <= idx.size(); ++p) {
    const Node& n = idx.node(p);
    switch (n.label) {
      case Label::VariableAccess: {
        set(p, "V1", detail::attr_equals(n, "type_kind", "primitive"));
        set(p, "V2", detail::attr_equals(n, "type_kind", "object"));
        set(p, "V3", n.flag("instance_of_enclosing_class"));
        set(p, "V4", n.flag("compatible_var_in_scope"));
        set(p, "V5", n.flag("compatible_param_method"));
        set(p, "V6", n.flag("compatible_return_method"));
        set(p, "V7", n.flag("local_unreferenced_before"));
        set(p, "V8", n.flag("local_unassigned_before"));
        set(p, "V9", n.flag("field_unreferenced_elsewhere"));
        set(p, "V10", n.flag("field_unassigned_elsewhere"));
        set(p, "V11", n.flag("same_type_null_guarded_elsewhere"));
        set(p, "V12", n.flag("same_type_guarded_elsewhere"));
        set(p, "V13", n.flag("arg_var_swap_matches_call"));
        set(p, "V14", n.flag("arg_call_swap_matches_call"));
        set(p, "V15", detail::any_similar(n, "scope_variables"));
        set(p, "V16", detail::any_similar(n, "class_methods"));
        break;
      }
      case Label::MethodCall: {
        set(p, "M1", detail::attr_equals(n, "return_type_kind", "primitive"));
        set(p, "M2", detail::attr_equals(n, "return_type_kind", "object"));
        set(p, "M3", n.flag("param_compatible_with_return"));
        set(p, "M4", n.flag("compatible_var_in_scope"));
        set(p, "M5", n.flag("compatible_return_method"));
        set(p, "M6", n.flag("same_signature_null_guarded"));
        set(p, "M7", n.flag("same_signature_guarded"));
        set(p, "M8", n.flag("same_signature_try_wrapped"));
        set(p, "M9", n.flag("arg_var_swap_matches_call"));
        set(p, "M10", n.flag("arg_call_swap_matches_call"));
        set(p, "M11", detail::identifier_of(n).starts_with("get"));
        set(p, "M12", n.flag("overloads"));
        set(p, "M13", detail::any_similar(n, "scope_variables"));
        set(p, "M14", detail::any_similar(n, "class_methods"));
        break;
      }
      case Label::BinaryOperator:
      case Label::LogicalOperator: {
        if (n.value) {
          for (auto op : kBinaryOperators) {
            if (*n.value == op) set(p, "BO1:" + std::string(op), true);
          }
        }
        const bool logical = detail::is_logical_op_value(n);
        set(p, "BO2", logical && detail::operands_have(n, Label::UnaryOperator, {"!"}));
        set(p, "BO3", logical && detail::operands_have(n, Label::Literal, {"null"}));
        set(p, "BO4", detail::is_math_op_value(n) && detail::operands_have(n, Label::Literal, {"0", "1"}));
        const bool expression_root =
            n.label == Label::LogicalOperator &&
            (idx.parent(p) == 0 || idx.label(idx.parent(p)) != Label::LogicalOperator);
        if (expression_root) {
          std::vector<const Node*> atoms;
          detail::collect_atoms(n, atoms);
          bool has_null = false, has_other = false, has_not = false, has_bool_var = false;
          for (const Node* a : atoms) {
            const bool nc = detail::is_null_check(*a);
            has_null |= nc;
            has_other |= !nc;
            has_not |= detail::subtree_has(*a, Label::UnaryOperator, {"!"});
            has_bool_var |= a->label == Label::VariableAccess;
          }
          set(p, "LE1", n.flag("atom_differs_after_substitution"));
          set(p, "LE2", n.flag("unreferenced_same_type_var"));
          set(p, "LE3", n.flag("unreferenced_boolean_var"));
          set(p, "LE4", has_not);
          set(p, "LE5", has_bool_var);
          set(p, "LE6", has_null && has_other);
        }
        break;
      }
      case Label::VirtualRoot: {
        const Node* stmt = n.children.empty() ? nullptr : &n.children.front();
        auto text = [&](const char* name) -> std::optional<std::string> {
          if (auto v = n.text_attr(name)) return v;
          return stmt ? stmt->text_attr(name) : std::nullopt;
        };
        const char* kind_attrs[] = {"stmt_kind", "prev_stmt_kind", "next_stmt_kind", "parent_stmt_kind"};
        for (int s = 0; s < 4; ++s) {
          if (auto k = text(kind_attrs[s])) {
            for (auto kind : kStatementKinds) {
              if (*k == kind) set(p, "S" + std::to_string(s + 1) + ":" + std::string(kind), true);
            }
          }
        }
        set(p, "S5", n.flag("throws_exception") || (stmt && stmt->flag("throws_exception")));
        break;
      }
      default:
        break;
    }
  }
  return out;
}

/// Adds the primed characteristics: V7..V12 of variable accesses go to every
/// enclosing MethodCall and to the statement's VirtualRoot; M6..M8 of calls go
/// to the VirtualRoot. Each primed value is an OR over contributing nodes.
inline CharacteristicVector propagate_characteristics(CharacteristicVector vec, const Ast& ast) {
  const auto& cat = CharacteristicCatalog::instance();
  TreeIndex idx(ast);
  struct Rule {
    Label source;
    int from;
    int to;
    bool to_calls;
  };
  std::vector<Rule> rules;
  for (int i = 7; i <= 12; ++i) {
    rules.push_back({Label::VariableAccess, cat.id("V" + std::to_string(i)),
                     cat.id("V" + std::to_string(i) + "'"), true});
  }
  for (int i = 6; i <= 8; ++i) {
    rules.push_back({Label::MethodCall, cat.id("M" + std::to_string(i)),
                     cat.id("M" + std::to_string(i) + "'"), false});
  }
  for (int p = 1; p <= idx.size(); ++p) {
    for (const auto& r : rules) {
      if (idx.label(p) != r.source || !vec.get(p, r.from)) continue;
      for (int a = idx.parent(p); a != 0; a = idx.parent(a)) {
        if (idx.label(a) == Label::VirtualRoot) {
          vec.set(a, r.to, true);
          break;  // the statement's own virtual root
        }
        if (r.to_calls && idx.label(a) == Label::MethodCall) vec.set(a, r.to, true);
      }
    }
  }
  return vec;
}

inline CharacteristicVector node_characteristics(const Ast& ast) {
  return propagate_characteristics(compute_characteristics(ast), ast);
}

}  // namespace astcrf
