#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "handgeo/anatomy.hpp"
#include "handgeo/hand_model.hpp"

namespace handgeo::io {

/// Joint-order remap: canonical joint i is read from source array position
/// to_canonical[i]. Built-in names: "canonical", "rhd", "stb"; arbitrary
/// tables load from JSON files {"name": ..., "to_canonical": [21 ints]}.
struct JointOrderMap {
  std::string name = "canonical";
  std::array<int, kNumJoints> to_canonical{};

  static JointOrderMap identity();
};

JointOrderMap builtin_joint_order(const std::string& name);
JointOrderMap load_joint_order(const std::string& path);

/// Reads one JSONL annotation file. Each line:
///   {"id": str, "side": "left"|"right", "kp2d": 21x[u,v],
///    "kp3d": 21x[x,y,z] | null, "vis": 21xbool,
///    "intrinsics": {"fx","fy","cx","cy"} | null}
/// kp3d null => has_3d=false. Joint arrays are remapped from the declared
/// source ordering to canonical. Throws ParseError / SchemaViolation with
/// the 1-based line number.
std::vector<HandSample> ingest(
    const std::string& path,
    const JointOrderMap& order = JointOrderMap::identity());

/// Writes samples in canonical joint order, one JSON object per line.
/// Round trips losslessly through ingest().
void write_annotations(const std::string& path,
                       const std::vector<HandSample>& samples);

void write_stats_json(const std::string& path,
                      const anatomy::AnatomyStats& stats);
anatomy::AnatomyStats read_stats_json(const std::string& path);

/// Flat key=value run configuration ('#' comments allowed). Unknown keys are
/// rejected; HANDGEO_<UPPERCASE_KEY> environment variables override file
/// values. All values are validated against their documented ranges.
struct RunConfig {
  anatomy::LossConfig loss;
  std::uint64_t seed = 0;
  int threads = 1;
  double pck_min = 20.0;
  double pck_max = 50.0;
  int pck_steps = 31;
  std::string joint_order = "canonical";

  // Effective settings as written, for manifests and reproduction.
  std::map<std::string, std::string> effective;

  void validate() const;
};

RunConfig default_run_config();
RunConfig parse_run_config(const std::string& path);

/// Applies one key=value assignment (file line or env override).
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

/// Applies every HANDGEO_* environment override to cfg.
void apply_env_overrides(RunConfig& cfg);

// FNV-1a 64-bit digests for manifests.
std::uint64_t fnv1a64(std::string_view data);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t value);

struct ManifestInput {
  std::string path;
  std::string digest;
  std::uint64_t bytes = 0;
};

/// Reproduction record written next to every CLI output: the command, the
/// effective config and its digest, the seed, and input file digests.
void write_manifest(const std::string& path, const std::string& command,
                    const RunConfig& cfg,
                    const std::vector<ManifestInput>& inputs,
                    const std::vector<std::string>& outputs);

}  // namespace handgeo::io
