#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "cbn/dense.hpp"
#include "cbn/graph.hpp"
#include "cbn/kernels.hpp"

namespace cbn {

using RowMap = std::map<std::uint64_t, std::vector<double>>;
using FixedValues = std::vector<std::pair<int, int>>;

/// P(node | cond = a, fixed) from p for every key a (mixed radix over cond,
/// first most significant). Zero-mass conditioning events raise
/// PositivityError when strict, otherwise their key is left out.
RowMap exact_conditional_rows(const DenseDistribution& p, const Admg& g, int node, const NodeSet& cond,
                              const FixedValues& fixed, bool strict);

/// Q_{S_j} over Pa+(S_j) (ascending ids), built from effective-parent conditionals.
Table compute_q_factor(const DenseDistribution& p, const Admg& g, int component, Exec exec = Exec::parallel);

/// Q_{S_j} over all of V from full-prefix conditionals P(v_i | v_1..v_{i-1}).
Table q_factor_prefix(const DenseDistribution& p, const Admg& g, int component, Exec exec = Exec::parallel);

/// P_x over V minus X.
DenseDistribution tian_pearl_do(const DenseDistribution& p, const Admg& g, int x_node, int x_val,
                                Exec exec = Exec::parallel);

/// D_x over V: factors outside S_1 that condition on X see the constant x.
DenseDistribution exact_dx(const DenseDistribution& p, const Admg& g, int x_node, int x_val,
                           Exec exec = Exec::parallel);

/// Throws IdentifiabilityError when a child of x shares its c-component.
void require_identifiable(const Admg& g, int x_node);

}  // namespace cbn
