#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anchorweave/geometry.hpp"

namespace anchorweave {

enum class Action {
  move_forward,
  move_backward,
  move_left,
  move_right,
  move_up,
  move_down,
  orient_up,
  orient_down,
  orient_left,
  orient_right,
};

const char* to_string(Action a) noexcept;
Action action_from_string(std::string_view s);

struct ActionStep {
  Action action = Action::move_forward;
  int repeat = 1;

  bool operator==(const ActionStep&) const = default;
};

struct StepSizes {
  double translation = 0.1;   // scene units per move step
  double rotation_deg = 3.0;  // degrees per orient step
};

/// A script is a list of batches; each batch becomes one or more generation
/// segments. In text form a batch ends at a `commit` line or end of input.
using ActionBatch = std::vector<ActionStep>;
using ActionScript = std::vector<ActionBatch>;

namespace actions {

/// Camera-frame increment for one elementary step.
Pose step_delta(Action a, const StepSizes& sizes);

/// One pose per elementary step, starting after `start`.
std::vector<Pose> actions_to_trajectory(const Pose& start, std::span<const ActionStep> script,
                                        const StepSizes& sizes);

/// Lines of `action count`; `#` starts a comment; `commit` closes a batch.
ActionScript parse_script(std::string_view text);
std::string format_script(const ActionScript& script);

std::size_t step_count(std::span<const ActionStep> steps);

}  // namespace actions
}  // namespace anchorweave
