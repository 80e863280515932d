#include "grbm/checkpoint.hpp"

#include <fstream>

#include "grbm/binio.hpp"
#include "json.hpp"

namespace grbm {

namespace fs = std::filesystem;
using nlohmann::json;

void write_checkpoint(const fs::path& path, const GrbmParams& params,
                      std::uint64_t epoch) {
  params.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  binio::write_magic(out, "GRBM");
  binio::write_u32(out, 1);
  binio::write_u32(out, static_cast<std::uint32_t>(params.hidden_units()));
  binio::write_u32(out, static_cast<std::uint32_t>(params.visible_units()));
  for (Index i = 0; i < params.W.rows(); ++i)
    for (Index j = 0; j < params.W.cols(); ++j)
      binio::write_f64(out, params.W(i, j));
  for (Index i = 0; i < params.a.size(); ++i) binio::write_f64(out, params.a[i]);
  for (Index j = 0; j < params.b.size(); ++j) binio::write_f64(out, params.b[j]);
  for (Index j = 0; j < params.sigma.size(); ++j)
    binio::write_f64(out, params.sigma[j]);
  binio::write_u64(out, epoch);
  if (!out) throw IoError("failed while writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  binio::expect_magic(in, "GRBM", path.string());
  const std::uint32_t version = binio::read_u32(in, "checkpoint version");
  if (version != 1)
    throw FormatError(path.string() + ": unsupported checkpoint version " +
                      std::to_string(version));
  const auto m = static_cast<Index>(binio::read_u32(in, "checkpoint M"));
  const auto n = static_cast<Index>(binio::read_u32(in, "checkpoint N"));
  Checkpoint ckpt;
  ckpt.params.W.resize(m, n);
  ckpt.params.a.resize(m);
  ckpt.params.b.resize(n);
  ckpt.params.sigma.resize(n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      ckpt.params.W(i, j) = binio::read_f64(in, "checkpoint W");
  for (Index i = 0; i < m; ++i)
    ckpt.params.a[i] = binio::read_f64(in, "checkpoint a");
  for (Index j = 0; j < n; ++j)
    ckpt.params.b[j] = binio::read_f64(in, "checkpoint b");
  for (Index j = 0; j < n; ++j)
    ckpt.params.sigma[j] = binio::read_f64(in, "checkpoint sigma");
  ckpt.epoch = binio::read_u64(in, "checkpoint epoch");
  in.peek();
  if (!in.eof())
    throw FormatError(path.string() + ": trailing bytes after checkpoint");
  ckpt.params.validate();
  return ckpt;
}

CheckpointStore CheckpointStore::create(const fs::path& directory,
                                        std::uint64_t seed,
                                        const std::string& config_hash) {
  fs::create_directories(directory);
  CheckpointStore store;
  store.directory_ = directory;
  store.seed_ = seed;
  store.config_hash_ = config_hash;
  store.write_manifest();
  return store;
}

CheckpointStore CheckpointStore::open(const fs::path& directory) {
  const fs::path manifest = directory / "manifest.json";
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string() +
                         "; run `grbm train` first");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& err) {
    throw FormatError(manifest.string() + ": " + err.what());
  }
  CheckpointStore store;
  store.directory_ = directory;
  store.seed_ = doc.value("seed", std::uint64_t{0});
  store.config_hash_ = doc.value("config_hash", std::string{});
  for (const auto& item : doc.at("epochs")) {
    Entry entry;
    entry.epoch = item.at("epoch").get<long>();
    entry.ami = item.at("ami").get<double>();
    entry.file = item.value("file", std::string{});
    store.entries_.push_back(std::move(entry));
  }
  return store;
}

void CheckpointStore::write_manifest() const {
  json doc;
  doc["version"] = 1;
  doc["seed"] = seed_;
  doc["config_hash"] = config_hash_;
  json list = json::array();
  for (const auto& entry : entries_) {
    json item;
    item["epoch"] = entry.epoch;
    item["ami"] = entry.ami;
    if (!entry.file.empty()) item["file"] = entry.file;
    list.push_back(std::move(item));
  }
  doc["epochs"] = std::move(list);
  const fs::path manifest = directory_ / "manifest.json";
  std::ofstream out(manifest);
  if (!out) throw IoError("cannot write manifest " + manifest.string());
  out << doc.dump(2) << "\n";
}

std::string CheckpointStore::save(const GrbmParams& params, long epoch,
                                  double ami) {
  char name[32];
  std::snprintf(name, sizeof(name), "ckpt_%06ld.grbm", epoch);
  write_checkpoint(directory_ / name, params,
                   static_cast<std::uint64_t>(epoch));
  entries_.push_back({epoch, ami, name});
  write_manifest();
  return name;
}

void CheckpointStore::record_epoch(long epoch, double ami) {
  entries_.push_back({epoch, ami, std::string{}});
  write_manifest();
}

GrbmParams CheckpointStore::load(const std::string& checkpoint_id) const {
  require(!checkpoint_id.empty(), "CheckpointStore::load: empty checkpoint id");
  return read_checkpoint(directory_ / checkpoint_id).params;
}

AmiTrace CheckpointStore::trace() const {
  AmiTrace t;
  for (const auto& entry : entries_) t.push(entry.epoch, entry.ami, entry.file);
  return t;
}

CheckpointLoader CheckpointStore::loader() const {
  return [this](const std::string& id) { return load(id); };
}

}  // namespace grbm
