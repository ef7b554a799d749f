#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "ttr/bandit.hpp"
#include "ttr/instances.hpp"
#include "ttr/task_set.hpp"

namespace ttr {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// {S, A, T, s1, p: S x A x S, r: S x A}
json mdp_to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const json& j);

/// {shape: {S, A, T, s1}, tasks: [mdp...]}
json task_set_to_json(const TaskSet& ts);
TaskSet task_set_from_json(const json& j);

json policy_to_json(const Policy& p);
Policy policy_from_json(const json& j);

json metadata_to_json(const InstanceMetadata& m);
InstanceMetadata metadata_from_json(const json& j, Index num_tasks);

/// {means: [[...], ...]}
json bandit_tasks_to_json(const std::vector<BanditTask>& tasks);
std::vector<BanditTask> bandit_tasks_from_json(const json& j);

/// Doubles rendered with 17 significant digits.
std::string format_double(double v);

json read_json_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ttr
