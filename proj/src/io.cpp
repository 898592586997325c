#include "handgeo/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace handgeo::io {

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  return j;
}

double finite_number(const json& j, std::size_t line, const char* what) {
  if (!j.is_number()) {
    throw SchemaViolation(line, std::string(what) + " must be a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw SchemaViolation(line, std::string(what) + " must be finite");
  }
  return v;
}

const json& required_field(const json& rec, std::size_t line,
                           const char* name) {
  auto it = rec.find(name);
  if (it == rec.end()) {
    throw SchemaViolation(line, std::string("missing field '") + name + "'");
  }
  return *it;
}

HandSample parse_record(const json& rec, std::size_t line,
                        const JointOrderMap& order) {
  if (!rec.is_object()) throw SchemaViolation(line, "record must be an object");

  HandSample sample;
  const json& id = required_field(rec, line, "id");
  if (!id.is_string() || id.get<std::string>().empty()) {
    throw SchemaViolation(line, "'id' must be a non-empty string");
  }
  sample.id = id.get<std::string>();

  const json& side = required_field(rec, line, "side");
  if (side == "left") {
    sample.pose.side = HandSide::kLeft;
  } else if (side == "right") {
    sample.pose.side = HandSide::kRight;
  } else {
    throw SchemaViolation(line, "'side' must be \"left\" or \"right\"");
  }

  const json& kp2d = required_field(rec, line, "kp2d");
  if (!kp2d.is_array() || kp2d.size() != kNumJoints) {
    throw SchemaViolation(line, "'kp2d' must hold exactly 21 [u, v] pairs");
  }
  for (int i = 0; i < kNumJoints; ++i) {
    const json& p = kp2d[order.to_canonical[i]];
    if (!p.is_array() || p.size() != 2) {
      throw SchemaViolation(line, "'kp2d' entries must be [u, v]");
    }
    sample.pose.joints2d[i] =
        Vec2(finite_number(p[0], line, "kp2d"), finite_number(p[1], line, "kp2d"));
  }

  const json& kp3d = required_field(rec, line, "kp3d");
  if (kp3d.is_null()) {
    sample.has_3d = false;
  } else {
    if (!kp3d.is_array() || kp3d.size() != kNumJoints) {
      throw SchemaViolation(line, "'kp3d' must be null or 21 [x, y, z] triples");
    }
    sample.has_3d = true;
    for (int i = 0; i < kNumJoints; ++i) {
      const json& p = kp3d[order.to_canonical[i]];
      if (!p.is_array() || p.size() != 3) {
        throw SchemaViolation(line, "'kp3d' entries must be [x, y, z]");
      }
      sample.pose.joints3d[i] = Vec3(finite_number(p[0], line, "kp3d"),
                                     finite_number(p[1], line, "kp3d"),
                                     finite_number(p[2], line, "kp3d"));
    }
  }

  const json& vis = required_field(rec, line, "vis");
  if (!vis.is_array() || vis.size() != kNumJoints) {
    throw SchemaViolation(line, "'vis' must hold exactly 21 booleans");
  }
  for (int i = 0; i < kNumJoints; ++i) {
    const json& v = vis[order.to_canonical[i]];
    if (!v.is_boolean()) {
      throw SchemaViolation(line, "'vis' entries must be booleans");
    }
    sample.pose.visibility[i] = v.get<bool>();
  }

  const json& intr = required_field(rec, line, "intrinsics");
  if (!intr.is_null()) {
    if (!intr.is_object()) {
      throw SchemaViolation(line, "'intrinsics' must be null or an object");
    }
    CameraIntrinsics K;
    K.fx = finite_number(required_field(intr, line, "fx"), line, "fx");
    K.fy = finite_number(required_field(intr, line, "fy"), line, "fy");
    K.cx = finite_number(required_field(intr, line, "cx"), line, "cx");
    K.cy = finite_number(required_field(intr, line, "cy"), line, "cy");
    sample.intrinsics = K;
  }
  return sample;
}

}  // namespace

JointOrderMap JointOrderMap::identity() {
  JointOrderMap m;
  for (int i = 0; i < kNumJoints; ++i) m.to_canonical[i] = i;
  return m;
}

JointOrderMap builtin_joint_order(const std::string& name) {
  if (name == "canonical") return JointOrderMap::identity();
  if (name == "rhd") {
    // RHD-style sources store each finger tip-first; reverse within fingers.
    JointOrderMap m;
    m.name = "rhd";
    m.to_canonical[0] = 0;
    for (int f = 0; f < kNumFingers; ++f) {
      for (int r = 0; r < 4; ++r) {
        m.to_canonical[f * 4 + 1 + r] = f * 4 + 1 + (3 - r);
      }
    }
    return m;
  }
  if (name == "stb") {
    // STB-style sources already run thumb-to-little, root-to-tip; joint 0 is
    // the palm center, carried over as the wrist stand-in (see data/README).
    JointOrderMap m = JointOrderMap::identity();
    m.name = "stb";
    return m;
  }
  throw Error("unknown joint order: " + name +
              " (builtins: canonical, rhd, stb)");
}

JointOrderMap load_joint_order(const std::string& path) {
  const json j = load_json_file(path);
  JointOrderMap m;
  m.name = j.value("name", std::string("custom"));
  const json& arr = j.at("to_canonical");
  if (!arr.is_array() || arr.size() != kNumJoints) {
    throw Error(path + ": 'to_canonical' must hold 21 indices");
  }
  std::array<bool, kNumJoints> seen{};
  for (int i = 0; i < kNumJoints; ++i) {
    const int v = arr[i].get<int>();
    if (v < 0 || v >= kNumJoints || seen[v]) {
      throw Error(path + ": 'to_canonical' must be a permutation of 0..20");
    }
    seen[v] = true;
    m.to_canonical[i] = v;
  }
  return m;
}

std::vector<HandSample> ingest(const std::string& path,
                               const JointOrderMap& order) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);

  std::vector<HandSample> samples;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    samples.push_back(parse_record(rec, line_no, order));
  }
  return samples;
}

void write_annotations(const std::string& path,
                       const std::vector<HandSample>& samples) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (const HandSample& s : samples) {
    json rec;
    rec["id"] = s.id;
    rec["side"] = s.pose.side == HandSide::kLeft ? "left" : "right";
    json kp2d = json::array();
    for (int j = 0; j < kNumJoints; ++j) {
      kp2d.push_back({s.pose.joints2d[j].x(), s.pose.joints2d[j].y()});
    }
    rec["kp2d"] = std::move(kp2d);
    if (s.has_3d) {
      json kp3d = json::array();
      for (int j = 0; j < kNumJoints; ++j) {
        kp3d.push_back({s.pose.joints3d[j].x(), s.pose.joints3d[j].y(),
                        s.pose.joints3d[j].z()});
      }
      rec["kp3d"] = std::move(kp3d);
    } else {
      rec["kp3d"] = nullptr;
    }
    json vis = json::array();
    for (int j = 0; j < kNumJoints; ++j) vis.push_back(s.pose.visibility[j]);
    rec["vis"] = std::move(vis);
    if (s.intrinsics) {
      rec["intrinsics"] = {{"fx", s.intrinsics->fx},
                           {"fy", s.intrinsics->fy},
                           {"cx", s.intrinsics->cx},
                           {"cy", s.intrinsics->cy}};
    } else {
      rec["intrinsics"] = nullptr;
    }
    out << rec.dump() << '\n';
  }
}

void write_stats_json(const std::string& path,
                      const anatomy::AnatomyStats& stats) {
  json j;
  j["mean_ratio"] = stats.mean_ratio;
  j["ratio_variance"] = stats.ratio_variance;
  json ranges = json::array();
  for (const anatomy::AngleRange& r : stats.angle_ranges) {
    ranges.push_back({{"kind", anatomy::angle_kind_name(r.id.kind)},
                      {"finger", finger_name(r.id.finger)},
                      {"min_deg", r.min_deg},
                      {"max_deg", r.max_deg}});
  }
  j["angle_ranges"] = std::move(ranges);
  json lengths = json::array();
  for (double v : stats.per_finger_mean_lengths) lengths.push_back(v);
  j["finger_lengths_norm"] = std::move(lengths);

  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

anatomy::AnatomyStats read_stats_json(const std::string& path) {
  const json j = load_json_file(path);
  anatomy::AnatomyStats stats;
  try {
    stats.mean_ratio = j.at("mean_ratio").get<double>();
    stats.ratio_variance = j.at("ratio_variance").get<double>();
    for (const json& r : j.at("angle_ranges")) {
      anatomy::AngleRange range;
      range.id.kind =
          anatomy::angle_kind_from_name(r.at("kind").get<std::string>());
      range.id.finger = finger_from_name(r.at("finger").get<std::string>());
      range.min_deg = r.at("min_deg").get<double>();
      range.max_deg = r.at("max_deg").get<double>();
      stats.angle_ranges.push_back(range);
    }
    const json& lengths = j.at("finger_lengths_norm");
    for (int f = 0; f < kNumFingers; ++f) {
      stats.per_finger_mean_lengths[f] = lengths.at(f).get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  stats.validate();
  return stats;
}

void RunConfig::validate() const {
  loss.validate();
  if (threads < 1) throw Error("threads must be >= 1");
  if (!(pck_max > pck_min)) throw Error("pck_max must exceed pck_min");
  if (pck_steps < 2) throw Error("pck_steps must be >= 2");
  if (joint_order != "canonical" && joint_order != "rhd" &&
      joint_order != "stb") {
    throw Error("joint_order must be canonical, rhd, or stb");
  }
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.effective = {
      {"lambda", "1"},           {"lambda_reg", "1"},
      {"lambda_geo", "1"},       {"beta_fr", "1"},
      {"beta_ar", "1"},          {"delta_mm", "1"},
      {"sigma_px", "2"},         {"tau", "0.25"},
      {"depth_mode", "per_joint"}, {"refine_step", "0.01"},
      {"refine_max_iters", "2000"}, {"refine_tol", "1e-09"},
      {"refine_full_3d", "false"}, {"crop_step", "0.15"},
      {"crop_max_iters", "2000"}, {"seed", "0"},
      {"threads", "1"},          {"pck_min", "20"},
      {"pck_max", "50"},         {"pck_steps", "31"},
      {"joint_order", "canonical"},
  };
  return cfg;
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t idx = 0;
    const double v = std::stod(value, &idx);
    if (idx != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error("config key '" + key + "': cannot parse number '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t idx = 0;
    const long v = std::stol(value, &idx);
    if (idx != value.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw Error("config key '" + key + "': cannot parse integer '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error("config key '" + key + "': cannot parse boolean '" + value + "'");
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  anatomy::LossConfig& l = cfg.loss;
  if (key == "lambda") l.lambda = parse_double(key, value);
  else if (key == "lambda_reg") l.lambda_reg = parse_double(key, value);
  else if (key == "lambda_geo") l.lambda_geo = parse_double(key, value);
  else if (key == "beta_fr") l.beta_fr = parse_double(key, value);
  else if (key == "beta_ar") l.beta_ar = parse_double(key, value);
  else if (key == "delta_mm") l.delta_mm = parse_double(key, value);
  else if (key == "sigma_px") l.sigma_px = parse_double(key, value);
  else if (key == "tau") l.tau = parse_double(key, value);
  else if (key == "depth_mode") {
    if (value == "per_joint") l.depth_mode = anatomy::DepthLossMode::kPerJointHuber;
    else if (value == "literal") l.depth_mode = anatomy::DepthLossMode::kLiteralSquaredNorm;
    else throw Error("depth_mode must be per_joint or literal");
  }
  else if (key == "refine_step") l.refine_step = parse_double(key, value);
  else if (key == "refine_max_iters") l.refine_max_iters = parse_int(key, value);
  else if (key == "refine_tol") l.refine_tol = parse_double(key, value);
  else if (key == "refine_full_3d") l.refine_full_3d = parse_bool(key, value);
  else if (key == "crop_step") l.crop_step = parse_double(key, value);
  else if (key == "crop_max_iters") l.crop_max_iters = parse_int(key, value);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(
      std::stoull(value));
  else if (key == "threads") cfg.threads = parse_int(key, value);
  else if (key == "pck_min") cfg.pck_min = parse_double(key, value);
  else if (key == "pck_max") cfg.pck_max = parse_double(key, value);
  else if (key == "pck_steps") cfg.pck_steps = parse_int(key, value);
  else if (key == "joint_order") cfg.joint_order = value;
  else throw Error("unknown config key: " + key);
  cfg.effective[key] = value;
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  RunConfig cfg = default_run_config();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(line_no, "expected key=value, got '" + line + "'");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    try {
      apply_config_entry(cfg, key, value);
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  cfg.validate();
  return cfg;
}

void apply_env_overrides(RunConfig& cfg) {
  static const char* keys[] = {
      "lambda", "lambda_reg", "lambda_geo", "beta_fr", "beta_ar", "delta_mm",
      "sigma_px", "tau", "depth_mode", "refine_step", "refine_max_iters",
      "refine_tol", "refine_full_3d", "crop_step", "crop_max_iters", "seed",
      "threads", "pck_min", "pck_max", "pck_steps", "joint_order"};
  for (const char* key : keys) {
    std::string env_name = "HANDGEO_";
    for (const char* p = key; *p; ++p) {
      env_name += static_cast<char>(std::toupper(*p));
    }
    if (const char* value = std::getenv(env_name.c_str())) {
      apply_config_entry(cfg, key, value);
    }
  }
  cfg.validate();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64(buf.str());
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[value & 0xf];
    value >>= 4;
  }
  return s;
}

void write_manifest(const std::string& path, const std::string& command,
                    const RunConfig& cfg,
                    const std::vector<ManifestInput>& inputs,
                    const std::vector<std::string>& outputs) {
  json j;
  j["command"] = command;
  json config = json::object();
  std::string config_blob;
  for (const auto& [key, value] : cfg.effective) {
    config[key] = value;
    config_blob += key + "=" + value + "\n";
  }
  j["config"] = std::move(config);
  j["config_digest"] = hex64(fnv1a64(config_blob));
  j["seed"] = cfg.seed;
  json ins = json::array();
  for (const ManifestInput& input : inputs) {
    ins.push_back({{"path", input.path},
                   {"fnv1a64", input.digest},
                   {"bytes", input.bytes}});
  }
  j["inputs"] = std::move(ins);
  j["outputs"] = outputs;

  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace handgeo::io
