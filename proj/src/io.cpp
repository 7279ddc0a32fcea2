#include "anchorweave/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "anchorweave/error.hpp"

namespace anchorweave::io {

namespace {

template <typename T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::validation, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::validation, std::string("field '") + key + "' has the wrong type");
  }
}

Json rgb_json(const Rgb8& c) { return Json::array({c[0], c[1], c[2]}); }

Rgb8 rgb_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::validation, "colour must be [r, g, b]");
  Rgb8 c{};
  for (std::size_t i = 0; i < 3; ++i) {
    const int v = j[i].get<int>();
    if (v < 0 || v > 255) throw Error(ErrorCode::validation, "colour channel out of range");
    c[i] = static_cast<std::uint8_t>(v);
  }
  return c;
}

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::validation, "vector must have 3 entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json material_json(const Material& m) {
  return {{"primary", rgb_json(m.primary)}, {"secondary", rgb_json(m.secondary)}, {"checker_period", m.checker_period}};
}

Material material_from(const Json& j) {
  return {rgb_from(j.at("primary")), rgb_from(j.at("secondary")), get<double>(j, "checker_period")};
}

Json source_json(const std::optional<std::int64_t>& s) { return s ? Json(*s) : Json("PAD"); }

static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");

}  // namespace

Json to_json(const Pose& pose) {
  const Mat4 m = pose.matrix();
  Json rows = Json::array();
  for (int r = 0; r < 4; ++r) rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2), m(r, 3)}));
  return rows;
}

Pose pose_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::validation, "pose must be a 4x4 array");
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 4) throw Error(ErrorCode::validation, "pose must be a 4x4 array");
    for (int c = 0; c < 4; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) throw Error(ErrorCode::validation, "pose entries must be numbers");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return Pose::from_matrix(m);
}

Json poses_to_json(std::span<const Pose> poses) {
  Json out = Json::array();
  for (const Pose& p : poses) out.push_back(to_json(p));
  return out;
}

std::vector<Pose> poses_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::validation, "pose file must hold a JSON array of 4x4 matrices");
  std::vector<Pose> out;
  for (const Json& p : j) out.push_back(pose_from_json(p));
  return out;
}

Json to_json(const Intrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

Intrinsics intrinsics_from_json(const Json& j) {
  Intrinsics k;
  k.fx = get<double>(j, "fx");
  k.fy = get<double>(j, "fy");
  k.cx = get<double>(j, "cx");
  k.cy = get<double>(j, "cy");
  k.width = get<int>(j, "width");
  k.height = get<int>(j, "height");
  geometry::validate(k);
  return k;
}

Json to_json(const SceneSpec& spec) {
  Json prims = Json::array();
  for (const Primitive& p : spec.primitives) {
    if (const Box* b = std::get_if<Box>(&p)) {
      Json faces = Json::array();
      for (const Material& m : b->faces) faces.push_back(material_json(m));
      prims.push_back({{"type", "box"}, {"center", vec_json(b->center)}, {"half_extents", vec_json(b->half_extents)},
                       {"faces", faces}});
    } else {
      const Plane& pl = std::get<Plane>(p);
      prims.push_back({{"type", "plane"},
                       {"normal_axis", pl.normal_axis},
                       {"center", vec_json(pl.center)},
                       {"half_extents", Json::array({pl.half_extents.x(), pl.half_extents.y()})},
                       {"material", material_json(pl.material)}});
    }
  }
  return {{"seed", spec.seed},
          {"primitives", prims},
          {"bounds", {{"min", vec_json(spec.bounds.min)}, {"max", vec_json(spec.bounds.max)}}}};
}

SceneSpec scene_from_json(const Json& j) {
  SceneSpec spec;
  try {
    spec.seed = get<std::uint64_t>(j, "seed");
    for (const Json& p : j.at("primitives")) {
      const std::string type = get<std::string>(p, "type");
      if (type == "box") {
        Box b;
        b.center = vec_from(p.at("center"));
        b.half_extents = vec_from(p.at("half_extents"));
        const Json& faces = p.at("faces");
        if (!faces.is_array() || faces.size() != 6) throw Error(ErrorCode::validation, "box needs 6 faces");
        for (std::size_t f = 0; f < 6; ++f) b.faces[f] = material_from(faces[f]);
        spec.primitives.emplace_back(b);
      } else if (type == "plane") {
        Plane pl;
        pl.normal_axis = get<int>(p, "normal_axis");
        pl.center = vec_from(p.at("center"));
        const Json& he = p.at("half_extents");
        pl.half_extents = {he.at(0).get<double>(), he.at(1).get<double>()};
        pl.material = material_from(p.at("material"));
        spec.primitives.emplace_back(pl);
      } else {
        throw Error(ErrorCode::validation, "unknown primitive type '" + type + "'");
      }
    }
    spec.bounds.min = vec_from(j.at("bounds").at("min"));
    spec.bounds.max = vec_from(j.at("bounds").at("max"));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::validation, std::string("bad scene JSON: ") + e.what());
  }
  scene::validate(spec);
  return spec;
}

Json to_json(const LoopConfig& cfg) {
  return {{"chunk_length", cfg.chunk_length},
          {"budget", cfg.budget},
          {"segment_length", cfg.segment_length},
          {"step_translation", cfg.steps.translation},
          {"step_rotation_deg", cfg.steps.rotation_deg},
          {"cloud_stride", cfg.cloud_stride},
          {"splat_radius", cfg.splat_radius},
          {"tau", cfg.tau},
          {"coverage_scale", cfg.coverage_scale},
          {"fusion",
           {{"lambda_r", cfg.fusion.lambda_r},
            {"lambda_t", cfg.fusion.lambda_t},
            {"beta", cfg.fusion.beta},
            {"fill", to_string(cfg.fusion.fill)}}},
          {"intrinsics", to_json(cfg.intrinsics)},
          {"context_frames", cfg.context_frames},
          {"max_memories", cfg.max_memories}};
}

LoopConfig loop_config_from_json(const Json& j, const LoopConfig& base) {
  if (!j.is_object()) throw Error(ErrorCode::validation, "config must be a JSON object");
  static const std::set<std::string> known{"chunk_length", "budget",         "segment_length", "step_translation",
                                           "step_rotation_deg", "cloud_stride", "splat_radius", "tau",
                                           "coverage_scale", "fusion",       "intrinsics",     "context_frames",
                                           "max_memories"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::validation, "unknown config key '" + key + "'");
  }
  LoopConfig cfg = base;
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) field = get<std::remove_reference_t<decltype(field)>>(j, key);
  };
  opt("chunk_length", cfg.chunk_length);
  opt("budget", cfg.budget);
  opt("segment_length", cfg.segment_length);
  opt("step_translation", cfg.steps.translation);
  opt("step_rotation_deg", cfg.steps.rotation_deg);
  opt("cloud_stride", cfg.cloud_stride);
  opt("splat_radius", cfg.splat_radius);
  opt("tau", cfg.tau);
  opt("coverage_scale", cfg.coverage_scale);
  opt("context_frames", cfg.context_frames);
  opt("max_memories", cfg.max_memories);
  if (j.contains("fusion")) {
    const Json& f = j.at("fusion");
    if (!f.is_object()) throw Error(ErrorCode::validation, "fusion must be an object");
    for (const auto& [key, value] : f.items()) {
      if (key != "lambda_r" && key != "lambda_t" && key != "beta" && key != "fill") {
        throw Error(ErrorCode::validation, "unknown fusion key '" + key + "'");
      }
    }
    if (f.contains("lambda_r")) cfg.fusion.lambda_r = get<double>(f, "lambda_r");
    if (f.contains("lambda_t")) cfg.fusion.lambda_t = get<double>(f, "lambda_t");
    if (f.contains("beta")) cfg.fusion.beta = get<double>(f, "beta");
    if (f.contains("fill")) cfg.fusion.fill = fill_mode_from_string(get<std::string>(f, "fill"));
  }
  if (j.contains("intrinsics")) cfg.intrinsics = intrinsics_from_json(j.at("intrinsics"));
  cfg.validate();
  return cfg;
}

Json to_json(const RetrievalResult& r) {
  return {{"chunk_index", r.chunk_index},
          {"selected", r.selected},
          {"gains", r.gains},
          {"termination", to_string(r.termination)},
          {"final_coverage_fraction", r.final_coverage_fraction},
          {"covered_count", r.covered_count},
          {"universe_count", r.universe_count},
          {"candidates", r.candidates}};
}

Json to_json(const SegmentTrace& t) {
  Json chunks = Json::array();
  for (std::size_t m = 0; m < t.chunks.size(); ++m) {
    Json sources = Json::array();
    for (const auto& s : t.slot_sources[m]) sources.push_back(source_json(s));
    Json r = to_json(t.retrievals[m]);
    r["chunk"] = t.first_chunk + static_cast<std::int64_t>(m);
    r["frames"] = {t.first_frame + t.chunks[m].frame_begin, t.first_frame + t.chunks[m].frame_end};
    r["slot_sources"] = sources;
    chunks.push_back(std::move(r));
  }
  return {{"first_frame", t.first_frame}, {"frame_count", t.frame_count}, {"chunks", chunks}};
}

Json read_json(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path.string());
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) {
  const std::string text = j.dump(2) + "\n";
  write_file(path.string(), std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> encode_ply(const LocalPointCloud& cloud) {
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\nelement vertex " << cloud.size()
         << "\nproperty double x\nproperty double y\nproperty double z\n"
            "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  const std::string h = header.str();
  constexpr std::size_t kStride = 3 * sizeof(double) + 3;
  std::vector<std::uint8_t> out(h.begin(), h.end());
  const std::size_t base = out.size();
  out.resize(base + cloud.size() * kStride);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    std::uint8_t* p = out.data() + base + i * kStride;
    const double xyz[3] = {cloud.x[i], cloud.y[i], cloud.z[i]};
    std::memcpy(p, xyz, sizeof(xyz));
    std::memcpy(p + sizeof(xyz), cloud.colors[i].data(), 3);
  }
  return out;
}

LocalPointCloud decode_ply(std::span<const std::uint8_t> bytes) {
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  const std::string_view end_marker = "end_header\n";
  const auto end = text.find(end_marker);
  if (text.substr(0, 4) != "ply\n" || end == std::string_view::npos) throw Error(ErrorCode::format, "not a PLY file");
  std::istringstream header{std::string(text.substr(0, end))};
  std::string line;
  std::size_t count = 0;
  std::vector<std::string> props;
  bool binary_le = false;
  while (std::getline(header, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (word == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex") throw Error(ErrorCode::format, "unsupported PLY element '" + name + "'");
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(type + " " + name);
    }
  }
  const std::vector<std::string> expected{"double x",  "double y",    "double z",
                                          "uchar red", "uchar green", "uchar blue"};
  if (!binary_le || props != expected) throw Error(ErrorCode::format, "unsupported PLY layout");
  constexpr std::size_t kStride = 3 * sizeof(double) + 3;
  const std::size_t body = end + end_marker.size();
  if (bytes.size() - body != count * kStride) throw Error(ErrorCode::format, "PLY body size does not match header");
  LocalPointCloud cloud;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* p = bytes.data() + body + i * kStride;
    double xyz[3];
    std::memcpy(xyz, p, sizeof(xyz));
    Rgb8 c;
    std::memcpy(c.data(), p + sizeof(xyz), 3);
    cloud.push_back({xyz[0], xyz[1], xyz[2]}, c);
  }
  return cloud;
}

std::string frame_file_name(std::int64_t index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%06lld.%s", static_cast<long long>(index), ext);
  return buf;
}

void save_bank(const fs::path& dir, const MemoryBank& bank) {
  fs::create_directories(dir);
  Json entries = Json::array();
  for (const MemoryEntryPtr& e : bank.entries()) {
    const std::string file = "memory_" + frame_file_name(e->id, "ply");
    write_file((dir / file).string(), encode_ply(e->cloud));
    entries.push_back({{"id", e->id},
                       {"frame_index", e->frame_index},
                       {"pose", to_json(e->cloud.capture_pose)},
                       {"intrinsics", to_json(e->cloud.capture_intrinsics)},
                       {"source", to_string(e->source)},
                       {"file", file},
                       {"points", e->cloud.size()}});
  }
  write_json(dir / "index.json", {{"max_entries", bank.max_entries()}, {"entries", entries}});
}

MemoryBank load_bank(const fs::path& dir) {
  const Json index = read_json(dir / "index.json");
  MemoryBank bank(index.value("max_entries", std::size_t{0}));
  try {
    for (const Json& e : index.at("entries")) {
      MemoryEntry entry;
      entry.id = get<std::int64_t>(e, "id");
      entry.frame_index = get<std::int64_t>(e, "frame_index");
      entry.source = memory_source_from_string(get<std::string>(e, "source"));
      const std::string file = get<std::string>(e, "file");
      if (fs::path(file).has_parent_path()) throw Error(ErrorCode::validation, "bank entry file must be a plain name");
      entry.cloud = decode_ply(read_file((dir / file).string()));
      entry.cloud.capture_pose = pose_from_json(e.at("pose"));
      entry.cloud.capture_intrinsics = intrinsics_from_json(e.at("intrinsics"));
      bank.restore(std::move(entry));
    }
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::validation, std::string("bad bank index: ") + ex.what());
  }
  return bank;
}

void export_bundle(const fs::path& dir, const AnchorBundle& bundle, int chunk_length) {
  fs::create_directories(dir);
  Json videos = Json::array();
  for (const AnchorVideo& v : bundle.videos) {
    const fs::path slot_dir = dir / ("slot_" + std::to_string(v.slot));
    fs::create_directories(slot_dir / "rgb");
    fs::create_directories(slot_dir / "mask");
    for (std::size_t t = 0; t < v.frames.size(); ++t) {
      write_file((slot_dir / "rgb" / frame_file_name(static_cast<std::int64_t>(t))).string(),
                 encode_png(v.frames[t].rgb));
      write_file((slot_dir / "mask" / frame_file_name(static_cast<std::int64_t>(t))).string(),
                 encode_mask_png(v.frames[t].visibility));
    }
    Json sources = Json::array();
    for (const auto& s : v.per_chunk_sources) sources.push_back(source_json(s));
    videos.push_back({{"slot", v.slot}, {"per_chunk_sources", sources}, {"rel_poses", poses_to_json(v.rel_poses)}});
  }
  write_json(dir / "manifest.json", {{"K", bundle.videos.size()},
                                     {"D", chunk_length},
                                     {"T", bundle.length()},
                                     {"videos", videos},
                                     {"target_relative_trajectory",
                                      poses_to_json(assembly::relative_trajectory(bundle.target_poses))}});
}

void export_session(const fs::path& dir, const SessionState& state) {
  fs::create_directories(dir / "frames");
  fs::create_directories(dir / "masks");
  Json frames = Json::array();
  for (const GeneratedFrame& g : state.generated) {
    write_file((dir / "frames" / frame_file_name(g.index)).string(), encode_png(g.composite.rgb));
    write_file((dir / "masks" / frame_file_name(g.index)).string(), encode_mask_png(g.composite.hole_mask));
    frames.push_back({{"index", g.index}, {"pose", to_json(g.pose)}, {"weights", g.composite.weights}});
  }
  Json segments = Json::array();
  for (const SegmentTrace& t : state.trace) segments.push_back(to_json(t));
  write_json(dir / "trace.json", {{"config", to_json(state.config)},
                                  {"context_count", state.context_count},
                                  {"bank_size", state.bank.size()},
                                  {"frames", frames},
                                  {"segments", segments}});
}

}  // namespace anchorweave::io
