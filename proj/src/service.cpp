#include "anchorweave/service.hpp"

#include <ctime>
#include <random>

#include "anchorweave/error.hpp"

namespace anchorweave::service {

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string random_suffix() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

bool plain_name(const std::string& name) {
  return !name.empty() && name.find('/') == std::string::npos && name.find('\\') == std::string::npos &&
         name != "." && name != "..";
}

const GeneratedFrame& generated_at(const SessionState& state, std::int64_t index) {
  const std::int64_t first = state.generated.empty() ? 0 : state.generated.front().index;
  if (state.generated.empty() || index < first || index >= first + static_cast<std::int64_t>(state.generated.size())) {
    throw Error(ErrorCode::not_found, "no generated frame " + std::to_string(index));
  }
  return state.generated[static_cast<std::size_t>(index - first)];
}

}  // namespace

EstimatorFactory default_estimator_factory() {
  return [](const SceneSpec& spec) -> std::shared_ptr<const GeometryEstimator> {
    return ground_truth_estimator(spec);
  };
}

CreateRequest CreateRequest::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::validation, "request body must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "scene_seed" && key != "bank" && key != "config") {
      throw Error(ErrorCode::validation, "unknown field '" + key + "'");
    }
  }
  CreateRequest r;
  if (j.contains("scene_seed")) {
    const Json& v = j["scene_seed"];
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw Error(ErrorCode::validation, "scene_seed must be a non-negative integer");
    }
    r.scene_seed = v.get<std::uint64_t>();
  }
  if (j.contains("bank")) {
    if (!j["bank"].is_string()) throw Error(ErrorCode::validation, "bank must be a string");
    r.bank = j["bank"].get<std::string>();
  }
  if (r.scene_seed && r.bank) throw Error(ErrorCode::validation, "give either scene_seed or bank, not both");
  if (j.contains("config")) r.config = j["config"];
  return r;
}

const char* to_string(SessionStatus s) noexcept {
  switch (s) {
    case SessionStatus::ready: return "ready";
    case SessionStatus::stepping: return "stepping";
    case SessionStatus::error: return "error";
  }
  return "unknown";
}

SessionManager::SessionManager(ManagerOptions options) : options_(std::move(options)) {
  if (!options_.estimator_factory) options_.estimator_factory = default_estimator_factory();
}

std::string SessionManager::create(const CreateRequest& request) {
  const LoopConfig cfg = io::loop_config_from_json(request.config);
  {
    std::shared_lock lock(mu_);
    if (sessions_.size() >= options_.max_sessions) {
      throw Error(ErrorCode::capacity, "session limit of " + std::to_string(options_.max_sessions) + " reached");
    }
  }

  auto session = std::make_shared<Session>();
  if (request.bank) {
    if (options_.bank_root.empty()) throw Error(ErrorCode::validation, "server has no bank root configured");
    if (!plain_name(*request.bank)) throw Error(ErrorCode::validation, "bank must be a plain directory name");
    const auto dir = options_.bank_root / *request.bank;
    if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::not_found, "no bank named '" + *request.bank + "'");
    const SceneSpec spec = io::scene_from_json(io::read_json(dir / "scene.json"));
    session->estimator = options_.estimator_factory(spec);
    session->state = loop::resume_session(cfg, io::load_bank(dir));
  } else {
    const SceneSpec spec = scene::make_scene(request.scene_seed.value_or(options_.default_scene_seed));
    session->estimator = options_.estimator_factory(spec);
    const auto poses = loop::default_context_trajectory(cfg.context_frames);
    const auto context = loop::render_context(spec, poses, cfg.intrinsics);
    session->state = loop::start_session(cfg, context, *session->estimator);
  }
  session->created_at = utc_now();

  std::unique_lock lock(mu_);
  if (sessions_.size() >= options_.max_sessions) {
    throw Error(ErrorCode::capacity, "session limit of " + std::to_string(options_.max_sessions) + " reached");
  }
  session->id = "s" + std::to_string(++counter_) + "-" + random_suffix();
  sessions_.emplace(session->id, session);
  return session->id;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::not_found, "no session '" + id + "'");
  return it->second;
}

Json SessionManager::step(const std::string& id, const ActionBatch& actions) {
  if (actions.empty()) throw Error(ErrorCode::validation, "step needs at least one action");
  const auto session = find(id);
  bool expected = false;
  if (!session->stepping.compare_exchange_strong(expected, true)) {
    throw Error(ErrorCode::conflict, "session '" + id + "' is already stepping");
  }
  struct Release {
    std::atomic<bool>& flag;
    ~Release() { flag.store(false); }
  } release{session->stepping};

  SessionState before;
  {
    std::unique_lock lock(session->mu);
    session->status = SessionStatus::stepping;
    before = session->state;
  }
  SessionState after;
  try {
    const auto traj = actions::actions_to_trajectory(before.current_pose, actions, before.config.steps);
    after = loop::run_trajectory(before, traj, *session->estimator);
  } catch (const std::exception& e) {
    std::unique_lock lock(session->mu);
    session->status = SessionStatus::error;
    session->last_error = e.what();
    throw;
  }

  Json response;
  response["session"] = id;
  response["new_frame_indices"] = {{"begin", before.next_frame_index}, {"end", after.next_frame_index}};
  Json chunks = Json::array();
  for (std::size_t s = before.trace.size(); s < after.trace.size(); ++s) {
    const Json seg = io::to_json(after.trace[s]);
    for (const Json& c : seg["chunks"]) {
      Json entry = c;
      entry["coverage_url"] = "/sessions/" + id + "/coverage/" + std::to_string(c["chunk"].get<std::int64_t>());
      chunks.push_back(std::move(entry));
    }
  }
  response["chunks"] = chunks;
  Json frames = Json::array();
  for (std::int64_t i = before.next_frame_index; i < after.next_frame_index; ++i) {
    const GeneratedFrame& g = generated_at(after, i);
    Json anchors = Json::array();
    for (int slot = 0; slot < after.config.budget; ++slot) {
      anchors.push_back("/sessions/" + id + "/anchors/" + std::to_string(i) + "/" + std::to_string(slot));
    }
    frames.push_back({{"index", i},
                      {"url", "/sessions/" + id + "/frames/" + std::to_string(i)},
                      {"weights", g.composite.weights},
                      {"anchors", anchors}});
  }
  response["frames"] = frames;
  response["bank_size"] = after.bank.size();

  std::unique_lock lock(session->mu);
  session->state = std::move(after);
  session->history.push_back(actions);
  session->status = SessionStatus::ready;
  session->last_error.clear();
  return response;
}

Json SessionManager::state_json(const Session& s) {
  const SessionState& st = s.state;
  Json segments = Json::array();
  for (const SegmentTrace& t : st.trace) segments.push_back(io::to_json(t));
  return {{"id", s.id},
          {"created_at", s.created_at},
          {"status", to_string(s.status)},
          {"last_error", s.last_error},
          {"config", io::to_json(st.config)},
          {"bank_size", st.bank.size()},
          {"context_count", st.context_count},
          {"generated_count", st.generated.size()},
          {"next_frame_index", st.next_frame_index},
          {"current_pose", io::to_json(st.current_pose)},
          {"segments", segments}};
}

Json SessionManager::state(const std::string& id) const {
  const auto session = find(id);
  std::shared_lock lock(session->mu);
  return state_json(*session);
}

Json SessionManager::list() const {
  std::shared_lock lock(mu_);
  Json out = Json::array();
  for (const auto& [id, s] : sessions_) {
    std::shared_lock slock(s->mu);
    out.push_back({{"id", id}, {"created_at", s->created_at}, {"status", to_string(s->status)}});
  }
  return out;
}

std::vector<std::uint8_t> SessionManager::frame_png(const std::string& id, std::int64_t index, bool holes) const {
  const auto session = find(id);
  std::shared_lock lock(session->mu);
  const GeneratedFrame& g = generated_at(session->state, index);
  return holes ? encode_mask_png(g.composite.hole_mask) : encode_png(g.composite.rgb);
}

std::vector<std::uint8_t> SessionManager::anchor_png(const std::string& id, std::int64_t index, int slot,
                                                     bool visibility) const {
  const auto session = find(id);
  std::shared_lock lock(session->mu);
  const AnchorFrame a = loop::render_slot(session->state, index, slot);
  return visibility ? encode_mask_png(a.visibility) : encode_png(a.rgb);
}

RgbImage coverage_overlay(const RgbImage& composite, const CoverageMap& covered, std::size_t frame, int scale) {
  RgbImage out = composite;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (!covered.test(frame, std::min(x / scale, covered.cell_width() - 1),
                        std::min(y / scale, covered.cell_height() - 1))) {
        continue;
      }
      Rgb8& p = out(x, y);
      p = {static_cast<std::uint8_t>(p[0] / 2), static_cast<std::uint8_t>((p[1] + 255) / 2),
           static_cast<std::uint8_t>(p[2] / 2)};
    }
  }
  return out;
}

std::vector<std::uint8_t> SessionManager::coverage_png(const std::string& id, std::int64_t chunk,
                                                       int frame_offset) const {
  const auto session = find(id);
  std::shared_lock lock(session->mu);
  const SessionState& st = session->state;
  for (const SegmentTrace& t : st.trace) {
    const std::int64_t local = chunk - t.first_chunk;
    if (local < 0 || local >= static_cast<std::int64_t>(t.chunks.size())) continue;
    const ChunkPlan& c = t.chunks[static_cast<std::size_t>(local)];
    if (frame_offset < 0 || frame_offset >= static_cast<int>(c.size())) {
      throw Error(ErrorCode::not_found, "chunk " + std::to_string(chunk) + " has no frame " +
                                            std::to_string(frame_offset));
    }
    const GeneratedFrame& g = generated_at(st, t.first_frame + c.frame_begin + frame_offset);
    return encode_png(coverage_overlay(g.composite.rgb, t.retrievals[static_cast<std::size_t>(local)].covered,
                                       static_cast<std::size_t>(frame_offset), st.config.coverage_scale));
  }
  throw Error(ErrorCode::not_found, "no chunk " + std::to_string(chunk));
}

std::string SessionManager::history(const std::string& id) const {
  const auto session = find(id);
  std::shared_lock lock(session->mu);
  return actions::format_script(session->history);
}

void SessionManager::remove(const std::string& id) {
  std::unique_lock lock(mu_);
  if (sessions_.erase(id) == 0) throw Error(ErrorCode::not_found, "no session '" + id + "'");
}

std::size_t SessionManager::size() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

}  // namespace anchorweave::service
