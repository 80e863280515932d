#ifndef GRBM_CHECKPOINT_HPP
#define GRBM_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "grbm/infomax.hpp"
#include "grbm/model.hpp"

namespace grbm {

// Checkpoint file: magic "GRBM", u32 version=1, u32 M, u32 N, then
// W, a, b, sigma as little-endian f64 (W row-major), trailing u64 epoch.
void write_checkpoint(const std::filesystem::path& path,
                      const GrbmParams& params, std::uint64_t epoch);

struct Checkpoint {
  GrbmParams params;
  std::uint64_t epoch = 0;
};

Checkpoint read_checkpoint(const std::filesystem::path& path);

// Directory of checkpoint files plus a manifest recording every trace
// entry (epoch, ami, optional file).
class CheckpointStore {
 public:
  struct Entry {
    long epoch = 0;
    double ami = 0.0;
    std::string file;  // empty when no checkpoint was written
  };

  // Creates the directory if needed; starts with an empty manifest.
  static CheckpointStore create(const std::filesystem::path& directory,
                                std::uint64_t seed,
                                const std::string& config_hash);

  // Opens an existing store by reading its manifest.
  static CheckpointStore open(const std::filesystem::path& directory);

  const std::filesystem::path& directory() const { return directory_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& config_hash() const { return config_hash_; }

  // Writes ckpt_<epoch>.grbm and records it; returns the checkpoint id
  // (the file name). Rewrites the manifest.
  std::string save(const GrbmParams& params, long epoch, double ami);

  // Records an epoch that was evaluated but not checkpointed.
  void record_epoch(long epoch, double ami);

  GrbmParams load(const std::string& checkpoint_id) const;

  // Rebuilds the AMI trace recorded in the manifest.
  AmiTrace trace() const;

  // Loader usable with select_parameters.
  CheckpointLoader loader() const;

  void write_manifest() const;

 private:
  std::filesystem::path directory_;
  std::vector<Entry> entries_;
  std::uint64_t seed_ = 0;
  std::string config_hash_;
};

}  // namespace grbm

#endif
