#pragma once

#include <filesystem>
#include <string>

#include "convopt/types.hpp"

namespace convopt {

// JSONL dataset format, one record per line, field order fixed:
// {"task_id": str, "context_id": int, "hidden_intent": int, "horizon": int,
//  "group_id": str, "temperature": float, "seed": int,
//  "steps": [{"a": int, "lp_a": float, "y": int, "lp_y": float}],
//  "reward_raw": float, "reward_std": float|null}
// Reals are written with 17 significant digits so write -> read -> write is
// byte-identical.

std::string to_jsonl_line(const LoggedExample& example);
LoggedExample from_jsonl_line(const std::string& line, std::size_t line_number);

void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace convopt
