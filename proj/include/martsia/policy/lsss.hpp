#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "martsia/crypto/group.hpp"
#include "martsia/policy/ast.hpp"

namespace martsia::policy {

/// Monotone span program: row x is labelled with a namespaced attribute and
/// carries a share vector of length `width`. A row set S reconstructs the
/// secret iff (1,0,...,0) lies in the span of {M_x : x in S}.
struct AccessStructure {
  struct Row {
    std::string attribute;
    std::vector<crypto::Scalar> vector;
  };
  std::vector<Row> rows;
  std::size_t width = 0;
};

/// Compiles an expanded formula (Named leaves, And/Or/Gate nodes). Threshold
/// gates use polynomial shares evaluated at 1..n; And is n-of-n, Or is 1-of-n.
AccessStructure compile_lsss(const Node& expanded);

/// Reconstruction coefficients for the rows usable with `held` attributes:
/// pairs (row index, c_x) with sum c_x * M_x = (1,0,...,0), or nullopt if no
/// such combination exists. Gaussian elimination over Z_r.
std::optional<std::vector<std::pair<std::size_t, crypto::Scalar>>>
reconstruct(const AccessStructure& lsss, const std::set<std::string>& held);

/// Share vector lambda_x = <M_x, v> for every row.
std::vector<crypto::Scalar> share(const AccessStructure& lsss,
                                  const std::vector<crypto::Scalar>& v);

}  // namespace martsia::policy
