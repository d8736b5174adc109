#pragma once

#include "astcrf/ast.hpp"
#include "astcrf/baseline.hpp"
#include "astcrf/brute_force.hpp"
#include "astcrf/characteristics.hpp"
#include "astcrf/cliques.hpp"
#include "astcrf/dataset.hpp"
#include "astcrf/edit_script.hpp"
#include "astcrf/error.hpp"
#include "astcrf/evaluate.hpp"
#include "astcrf/extract.hpp"
#include "astcrf/features.hpp"
#include "astcrf/inference.hpp"
#include "astcrf/junction_tree.hpp"
#include "astcrf/lbfgs.hpp"
#include "astcrf/learner.hpp"
#include "astcrf/model.hpp"
#include "astcrf/transforms.hpp"
