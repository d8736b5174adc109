#include <gtest/gtest.h>

#include <set>

#include "astcrf/astcrf.hpp"
#include "oracles.hpp"
#include "rule_corpus.hpp"
#include "sexpr.hpp"
#include "synthetic.hpp"

namespace astcrf {
namespace {

using testing::Rng;
using testing::tree;

std::vector<EditScript> corpus_scripts(bool positive) {
  std::vector<EditScript> out;
  for (const auto& c : testing::rule_corpus()) {
    if (c.positive == positive) out.push_back(c.script);
  }
  return out;
}

TEST(Prepare, KeepsPositivesAndLogsTheRest) {
  const auto pos = corpus_scripts(true);
  const auto ds = prepare_dataset(pos);
  EXPECT_EQ(ds.examples.size(), pos.size());
  for (const auto& ex : ds.examples) EXPECT_GE(ex.actual_count(), 1);

  EditScript conflict = testing::make_script(
      tree("(Assignment:= (VariableAccess:x) (MethodCall:getA))"),
      {EditOp::upd(3, "getB"), EditOp::del(NodeRef::before(3)),
       EditOp::add("v", NodeRef::before(1), 2, Label::VariableAccess, "a")});
  EditScript empty;
  empty.before = tree("(Block (VariableAccess:a))");
  empty.after = empty.before;
  EditScript big;
  big.before = tree("(Block)");
  for (int i = 0; i < 11; ++i) big.ops.push_back(EditOp::add("n" + std::to_string(i), NodeRef::before(1), 1, Label::Literal));
  big.after = apply_edit_script(big.before, big.ops);

  const auto mixed = prepare_dataset({pos.front(), conflict, empty, big});
  ASSERT_EQ(mixed.examples.size(), 1u);
  ASSERT_EQ(mixed.log.size(), 3u);
  EXPECT_NE(mixed.log[0].find("script 1"), std::string::npos);
  EXPECT_NE(mixed.log[1].find("no repair transform"), std::string::npos);
  EXPECT_NE(mixed.log[2].find("exceed 10"), std::string::npos);
  EXPECT_EQ(prepare_dataset({big}, 11).examples.size(), 0u);
  EXPECT_THROW(prepare_dataset({}, 0), Error);
}

TEST(Prepare, NegativesKeepOnlyExpectedLabels) {
  for (const auto& c : testing::rule_corpus()) {
    if (c.positive) continue;
    const auto ds = prepare_dataset({c.script});
    if (c.expected.empty()) {
      EXPECT_TRUE(ds.examples.empty()) << c.name;
      EXPECT_EQ(ds.log.size(), 1u) << c.name;
    } else {
      ASSERT_EQ(ds.examples.size(), 1u) << c.name;
      EXPECT_EQ(ds.examples[0].labels, testing::expected_labels(c, ds.examples[0].ast.node_count)) << c.name;
    }
  }
}

std::vector<TransformLabeling> mixed_data(Rng& rng, int n) {
  testing::TreeOptions opt;
  opt.max_nodes = 6;
  return testing::random_labeled_set(rng, n, {Transform::Empty, Transform::VarRwVar, Transform::ConstantRep,
                                              Transform::WrapIfN},
                                     opt);
}

TEST(Split, SlicesAreDisjointAndSeeded) {
  Rng rng(51);
  const auto data = mixed_data(rng, 60);
  const auto a = split_dataset(data, 3, 4, 7);
  const auto b = split_dataset(data, 3, 4, 7);
  EXPECT_EQ(a.train.size() + a.test.size(), data.size());
  ASSERT_EQ(a.test.size(), b.test.size());
  for (std::size_t i = 0; i < a.test.size(); ++i) EXPECT_EQ(a.test[i].labels, b.test[i].labels);
  std::map<std::string, int> per;
  for (const auto& ex : a.test) ++per[slice_of(ex)];
  for (const auto& [slice, n] : per) EXPECT_LE(n, slice == "multiple" ? 4 : 3) << slice;

  const auto none = split_dataset(data, 0, 0, 7);
  EXPECT_TRUE(none.test.empty());
  ASSERT_EQ(none.train.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(none.train[i].labels, data[i].labels);
}

TEST(Split, WarnsWhenASliceIsShort) {
  Rng rng(52);
  const auto data = mixed_data(rng, 10);
  const auto s = split_dataset(data, 1000, 0, 1);
  EXPECT_FALSE(s.warnings.empty());
  for (const auto& ex : s.train) EXPECT_GT(ex.actual_count(), 1);
}

TEST(Baseline, ProbabilitiesAreFrequencies) {
  TransformLabeling a(tree("(Block (Literal:1) (Literal:2) (VariableAccess:x))"));
  a.set(2, Transform::ConstantRep);
  TransformLabeling b(tree("(Block (Literal:3) (MethodCall:f))"));
  b.set(3, Transform::MethRwMeth);
  const auto m = build_baseline({a, b});
  EXPECT_DOUBLE_EQ(m.probability(Label::Literal, Transform::ConstantRep), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.probability(Label::MethodCall, Transform::MethRwMeth), 1.0);
  EXPECT_EQ(m.probability(Label::VariableAccess, Transform::VarRwVar), 0.0);
  EXPECT_EQ(m.tuples.size(), 2u);
  const auto back = baseline_from_json(baseline_to_json(m));
  EXPECT_EQ(baseline_to_json(back), baseline_to_json(m));
}

TEST(Baseline, HighestProbabilityFirst) {
  BaselineModel m{{{Label::Literal, Transform::ConstantRep, 0.3}, {Label::VariableAccess, Transform::VarRwVar, 0.1}}};
  const Ast ast = tree("(Assignment:= (VariableAccess:x) (Literal:1))");
  const auto r = baseline_rank(ast, m, 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].at(3), Transform::ConstantRep);
  EXPECT_EQ(r[0].actual_count(), 1);
}

TEST(Baseline, TiesFollowPreorder) {
  BaselineModel m{{{Label::MethodCall, Transform::MethRwMeth, 0.2}}};
  const Ast ast = tree("(Block (MethodCall:f) (MethodCall:g))");
  const auto r = baseline_rank(ast, m, 2);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].at(2), Transform::MethRwMeth);
  EXPECT_EQ(r[1].at(3), Transform::MethRwMeth);
}

TEST(Baseline, CombinationsComeAfterSingles) {
  BaselineModel m{{{Label::Literal, Transform::ConstantRep, 0.3},
                   {Label::VariableAccess, Transform::VarRwVar, 0.2},
                   {Label::VariableAccess, Transform::VarRwMeth, 0.1}}};
  const Ast ast = tree("(Block (VariableAccess:x) (Literal:1) (VariableAccess:y))");
  const auto r = baseline_rank(ast, m, 100);
  ASSERT_GT(r.size(), 5u);
  bool multi = false;
  std::set<std::vector<Transform>> seen;
  std::size_t prev = 1;
  for (const auto& l : r) {
    const auto n = static_cast<std::size_t>(l.actual_count());
    EXPECT_GE(n, prev);
    prev = n;
    multi = multi || n > 1;
    EXPECT_TRUE(seen.insert(l.labels).second);
  }
  EXPECT_TRUE(multi);
  EXPECT_EQ(r[0].at(3), Transform::ConstantRep);
  // Two-node combos by product: ConstantRep with a VarRwVar first.
  EXPECT_EQ(r[5].actual_count(), 2);
  EXPECT_EQ(r[5].at(2), Transform::VarRwVar);
  EXPECT_EQ(r[5].at(3), Transform::ConstantRep);
  EXPECT_TRUE(baseline_rank(ast, m, 0).empty());
}

TEST(Evaluate, CountsExactMatches) {
  TransformLabeling truth(tree("(Block (VariableAccess:a) (Literal:1))"));
  truth.set(2, Transform::VarRwVar);
  truth.ast.source_id = "t";
  auto wrong = truth;
  wrong.set(2, Transform::VarRwMeth);
  auto other = truth;
  other.set(3, Transform::ConstantRep);
  Predictor p = [&](const Ast&, int) { return std::vector<TransformLabeling>{wrong, truth, other}; };
  const auto r = evaluate({truth}, p, {3, 1});
  EXPECT_EQ(r.ks, (std::vector<int>{1, 3}));
  EXPECT_EQ(r.overall.correct.at(1), 0);
  EXPECT_EQ(r.overall.correct.at(3), 1);
  EXPECT_EQ(r.slices.at("Var-RW-Var").total, 1);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].rank, 2);
  EXPECT_EQ(r.records[0].source_id, "t");
  EXPECT_THROW(evaluate({truth}, p, {0}), Error);

  Predictor none = [&](const Ast& ast, int) { return std::vector<TransformLabeling>{TransformLabeling(ast)}; };
  EXPECT_EQ(evaluate({truth}, none).overall.correct.at(3), 0);
}

struct Trained {
  std::vector<TransformLabeling> train, test;
  Model model;
};

Trained train_small(std::uint64_t seed) {
  Rng rng(seed);
  const auto data = mixed_data(rng, 80);
  const auto split = split_dataset(data, 4, 6, seed);
  Trained t{split.train, split.test, {}};
  TrainConfig cfg;
  cfg.G = 40;
  t.model = train(t.train, build_vocabulary(t.train), build_admissible_sets(t.train), cfg);
  return t;
}

TEST(Evaluate, TopThreeDominatesTopOne) {
  const auto t = train_small(53);
  const auto baseline = build_baseline(t.train);
  for (const auto& r : {evaluate(t.test, model_predictor(t.model)), evaluate(t.test, baseline_predictor(baseline))}) {
    for (const auto& [slice, s] : r.slices) {
      EXPECT_GE(s.correct.at(3), s.correct.at(1)) << slice;
      EXPECT_LE(s.correct.at(3), s.total) << slice;
    }
    EXPECT_EQ(r.overall.total, static_cast<int>(t.test.size()));
    EXPECT_DOUBLE_EQ(r.overall.accuracy(3), static_cast<double>(r.overall.correct.at(3)) / r.overall.total);
  }
}

TEST(Evaluate, OrderIndependent) {
  const auto t = train_small(54);
  auto reversed = t.test;
  std::reverse(reversed.begin(), reversed.end());
  const auto a = evaluate(t.test, model_predictor(t.model));
  const auto b = evaluate(reversed, model_predictor(t.model));
  EXPECT_EQ(a.overall.correct, b.overall.correct);
  for (const auto& [slice, s] : a.slices) EXPECT_EQ(s.correct, b.slices.at(slice).correct) << slice;
}

TEST(ModelFile, RoundTripsAndPredictsTheSame) {
  const auto t = train_small(55);
  const std::string text = serialize_model(t.model);
  const Model back = parse_model(text);
  EXPECT_EQ(serialize_model(back), text);
  EXPECT_EQ(back.weights, t.model.weights);
  for (const auto& ex : t.test) {
    const auto a = top_k(ex.ast, t.model, 3);
    const auto b = top_k(ex.ast, back, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].labeling.labels, b[i].labeling.labels);
  }
  EXPECT_THROW(parse_model("{}"), Error);
  EXPECT_THROW(parse_model("not json"), Error);
}

TEST(Pipeline, IsBitReproducible) {
  const auto a = train_small(56);
  const auto b = train_small(56);
  EXPECT_EQ(serialize_model(a.model), serialize_model(b.model));
  EXPECT_EQ(eval_report_to_json(evaluate(a.test, model_predictor(a.model))).dump(),
            eval_report_to_json(evaluate(b.test, model_predictor(b.model))).dump());
}

TEST(Dataset, JsonRoundTrip) {
  Rng rng(57);
  const auto data = mixed_data(rng, 10);
  const auto back = dataset_from_json(dataset_to_json(data));
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(back[i].labels, data[i].labels);
  const auto stats = labeling_stats(data);
  int single = 0;
  for (const auto& ex : data) single += ex.actual_count() == 1;
  EXPECT_EQ(stats.single, single);
  EXPECT_EQ(stats.single + stats.multiple, static_cast<int>(data.size()));
}

TEST(Synthetic, TriggersFireOnlyOnPlantedNodes) {
  Rng rng(58);
  const auto corpus = testing::synthetic_corpus(rng, 300);
  const auto& cat = CharacteristicCatalog::instance();
  struct Trigger {
    Label label;
    const char* characteristic;
    Transform transform;
  };
  const std::vector<Trigger> singles{{Label::VariableAccess, "V4", Transform::VarRwVar},
                                     {Label::MethodCall, "M12", Transform::MethRwMeth},
                                     {Label::BinaryOperator, "BO4", Transform::BinOperatorRep},
                                     {Label::VirtualRoot, "S5", Transform::WrapTry},
                                     {Label::VirtualRoot, "V8'", Transform::WrapIfN},
                                     {Label::MethodCall, "M11", Transform::MethRwVar}};
  int joint = 0;
  for (const auto& ex : corpus) {
    const auto& l = ex.labeling;
    const auto vec = node_characteristics(l.ast);
    TreeIndex idx(l.ast);
    for (int p = 1; p <= idx.size(); ++p) {
      for (const auto& t : singles) {
        if (idx.label(p) != t.label || !vec.get(p, cat.id(t.characteristic))) continue;
        EXPECT_EQ(l.at(p), t.transform) << l.ast.source_id << " " << t.characteristic;
      }
      const bool m9 = idx.label(p) == Label::MethodCall && vec.get(p, "M9");
      for (int c : idx.children(p)) {
        if (m9 && idx.label(c) == Label::VariableAccess && vec.get(c, "V13")) {
          EXPECT_EQ(ex.rule, testing::PlantedRule::Joint);
          EXPECT_EQ(l.at(p), Transform::MethRwMeth);
          EXPECT_EQ(l.at(c), Transform::VarRwVar);
        }
      }
    }
    EXPECT_EQ(l.actual_count(), ex.rule == testing::PlantedRule::Joint ? 2 : 1) << l.ast.source_id;
    joint += ex.rule == testing::PlantedRule::Joint;
  }
  EXPECT_EQ(joint, 9);
}

}  // namespace
}  // namespace astcrf
