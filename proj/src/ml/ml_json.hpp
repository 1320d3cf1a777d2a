#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "fakespread/ml.hpp"

namespace fakespread::ml::detail {

nlohmann::json nodes_to_json(const std::vector<TreeNode>& nodes);
std::vector<TreeNode> nodes_from_json(const nlohmann::json& arr);
double eval_tree(const std::vector<TreeNode>& nodes, std::span<const double> x);

nlohmann::json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

}  // namespace fakespread::ml::detail
