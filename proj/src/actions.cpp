#include "anchorweave/actions.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "anchorweave/error.hpp"

namespace anchorweave {

namespace {

constexpr std::array<std::pair<Action, const char*>, 10> kNames{{
    {Action::move_forward, "move_forward"},
    {Action::move_backward, "move_backward"},
    {Action::move_left, "move_left"},
    {Action::move_right, "move_right"},
    {Action::move_up, "move_up"},
    {Action::move_down, "move_down"},
    {Action::orient_up, "orient_up"},
    {Action::orient_down, "orient_down"},
    {Action::orient_left, "orient_left"},
    {Action::orient_right, "orient_right"},
}};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const char* to_string(Action a) noexcept {
  for (const auto& [action, name] : kNames) {
    if (action == a) return name;
  }
  return "unknown";
}

Action action_from_string(std::string_view s) {
  for (const auto& [action, name] : kNames) {
    if (s == name) return action;
  }
  throw Error(ErrorCode::parse, "unknown action '" + std::string(s) + "'");
}

namespace actions {

Pose step_delta(Action a, const StepSizes& sizes) {
  const double s = sizes.translation;
  const double r = sizes.rotation_deg * M_PI / 180.0;
  // Camera axes: x right, y down, z forward.
  switch (a) {
    case Action::move_forward: return geometry::translate(0, 0, s);
    case Action::move_backward: return geometry::translate(0, 0, -s);
    case Action::move_left: return geometry::translate(-s, 0, 0);
    case Action::move_right: return geometry::translate(s, 0, 0);
    case Action::move_up: return geometry::translate(0, -s, 0);
    case Action::move_down: return geometry::translate(0, s, 0);
    case Action::orient_up: return geometry::rotate_x(r);
    case Action::orient_down: return geometry::rotate_x(-r);
    case Action::orient_left: return geometry::rotate_y(-r);
    case Action::orient_right: return geometry::rotate_y(r);
  }
  throw Error(ErrorCode::parse, "unknown action");
}

std::vector<Pose> actions_to_trajectory(const Pose& start, std::span<const ActionStep> script,
                                        const StepSizes& sizes) {
  if (!(sizes.translation > 0.0) || !(sizes.rotation_deg > 0.0)) {
    throw Error(ErrorCode::validation, "step sizes must be > 0");
  }
  geometry::validate(start);
  std::vector<Pose> out;
  out.reserve(step_count(script));
  Pose current = start;
  for (const ActionStep& step : script) {
    if (step.repeat < 1) throw Error(ErrorCode::validation, "action repeat must be >= 1");
    const Pose delta = step_delta(step.action, sizes);
    for (int i = 0; i < step.repeat; ++i) {
      current = geometry::compose(current, delta);
      out.push_back(current);
    }
  }
  return out;
}

std::size_t step_count(std::span<const ActionStep> steps) {
  std::size_t n = 0;
  for (const ActionStep& s : steps) n += static_cast<std::size_t>(std::max(s.repeat, 0));
  return n;
}

ActionScript parse_script(std::string_view text) {
  ActionScript script;
  ActionBatch batch;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "commit") {
      if (!batch.empty()) script.push_back(std::move(batch));
      batch.clear();
      continue;
    }
    std::istringstream fields{std::string(line)};
    std::string name, count, extra;
    fields >> name >> count;
    if (fields >> extra) throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": trailing text");
    ActionStep step;
    try {
      step.action = action_from_string(name);
    } catch (const Error& e) {
      throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (count.empty()) {
      step.repeat = 1;
    } else {
      const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), step.repeat);
      if (ec != std::errc{} || ptr != count.data() + count.size() || step.repeat < 1) {
        throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": bad repeat count '" + count + "'");
      }
    }
    batch.push_back(step);
  }
  if (!batch.empty()) script.push_back(std::move(batch));
  return script;
}

std::string format_script(const ActionScript& script) {
  std::string out;
  for (const ActionBatch& batch : script) {
    for (const ActionStep& s : batch) out += std::string(to_string(s.action)) + " " + std::to_string(s.repeat) + "\n";
    out += "commit\n";
  }
  return out;
}

}  // namespace actions
}  // namespace anchorweave
