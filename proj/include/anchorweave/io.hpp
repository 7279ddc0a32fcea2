#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "anchorweave/anchor_assembly.hpp"
#include "anchorweave/loop_engine.hpp"
#include "anchorweave/memory_bank.hpp"
#include "anchorweave/retrieval.hpp"
#include "anchorweave/scene.hpp"

namespace anchorweave::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

Json to_json(const Pose& pose);
Pose pose_from_json(const Json& j);
Json poses_to_json(std::span<const Pose> poses);
std::vector<Pose> poses_from_json(const Json& j);

Json to_json(const Intrinsics& k);
Intrinsics intrinsics_from_json(const Json& j);

Json to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const Json& j);

Json to_json(const LoopConfig& cfg);
/// Starts from `base` and overrides the keys present in `j`; unknown keys are
/// rejected.
LoopConfig loop_config_from_json(const Json& j, const LoopConfig& base = {});

Json to_json(const RetrievalResult& r);
Json to_json(const SegmentTrace& t);

Json read_json(const fs::path& path);
void write_json(const fs::path& path, const Json& j);

/// Binary little-endian PLY with double x,y,z and uchar red,green,blue.
std::vector<std::uint8_t> encode_ply(const LocalPointCloud& cloud);
/// Reads points and colours; capture pose and intrinsics are left default.
LocalPointCloud decode_ply(std::span<const std::uint8_t> bytes);

/// Directory of one PLY per entry plus index.json.
void save_bank(const fs::path& dir, const MemoryBank& bank);
MemoryBank load_bank(const fs::path& dir);

/// Per-slot PNG sequences, visibility masks and manifest.json.
void export_bundle(const fs::path& dir, const AnchorBundle& bundle, int chunk_length);

/// Frames, hole masks and trace.json of a session.
void export_session(const fs::path& dir, const SessionState& state);

std::string frame_file_name(std::int64_t index, const char* ext = "png");

}  // namespace anchorweave::io
