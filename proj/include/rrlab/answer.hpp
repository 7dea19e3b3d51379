#pragma once

#include <string>
#include <string_view>

#include "rrlab/types.hpp"

namespace rrlab {

/// `FINAL ANSWER: (<label>)` on its own line.
std::string answer_marker(std::string_view label);

/// Last-occurrence rule: the label in the last marker wins. A label outside
/// task.options, or no marker at all, is unresolved.
Answer extract_answer(std::string_view transcript, const Task& task);
Answer extract_answer(const Trajectory& trajectory, const Task& task);

bool contains_marker(std::string_view text);

}  // namespace rrlab
