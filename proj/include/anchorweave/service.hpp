#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "anchorweave/io.hpp"
#include "anchorweave/loop_engine.hpp"

namespace anchorweave::service {

using Json = io::Json;

/// Builds the geometry estimator for a session's scene. Tests swap this out to
/// inject failures.
using EstimatorFactory = std::function<std::shared_ptr<const GeometryEstimator>(const SceneSpec&)>;

EstimatorFactory default_estimator_factory();

struct ManagerOptions {
  std::size_t max_sessions = 16;
  std::uint64_t default_scene_seed = 0;
  /// Directory holding named context banks (bank directories with scene.json).
  /// Empty disables bank-based session creation.
  std::filesystem::path bank_root;
  EstimatorFactory estimator_factory = default_estimator_factory();
};

struct CreateRequest {
  std::optional<std::uint64_t> scene_seed;
  std::optional<std::string> bank;  // name under bank_root
  Json config = Json::object();

  static CreateRequest from_json(const Json& j);
};

enum class SessionStatus { ready, stepping, error };
const char* to_string(SessionStatus s) noexcept;

class SessionManager {
 public:
  explicit SessionManager(ManagerOptions options = {});

  std::string create(const CreateRequest& request);
  /// Runs the batch as one or more segments. Rejects with `conflict` while
  /// another step on the same session is in flight. On failure the session
  /// keeps its previous state.
  Json step(const std::string& id, const ActionBatch& actions);
  Json state(const std::string& id) const;
  Json list() const;
  std::vector<std::uint8_t> frame_png(const std::string& id, std::int64_t index, bool holes = false) const;
  std::vector<std::uint8_t> anchor_png(const std::string& id, std::int64_t index, int slot,
                                       bool visibility = false) const;
  /// Covered coverage cells shaded green over the composite of one chunk frame.
  std::vector<std::uint8_t> coverage_png(const std::string& id, std::int64_t chunk, int frame_offset = 0) const;
  /// Every committed step as script text, each batch closed by `commit`.
  std::string history(const std::string& id) const;
  void remove(const std::string& id);
  std::size_t size() const;

 private:
  struct Session {
    std::string id;
    std::string created_at;
    std::shared_ptr<const GeometryEstimator> estimator;
    mutable std::shared_mutex mu;  // guards everything below
    SessionState state;
    ActionScript history;
    SessionStatus status = SessionStatus::ready;
    std::string last_error;
    std::atomic<bool> stepping{false};
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  static Json state_json(const Session& s);

  ManagerOptions options_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

/// Composite with covered cells blended towards green.
RgbImage coverage_overlay(const RgbImage& composite, const CoverageMap& covered, std::size_t frame, int scale);

}  // namespace anchorweave::service
