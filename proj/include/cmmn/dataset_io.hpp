#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cmmn/signal.hpp"

namespace cmmn::io {

inline constexpr const char* kDatasetFormatVersion = "cmmn-dataset/1";

/// On-disk dataset description. Each domain entry points at a raw binary
/// file of little-endian floats laid out row-major as (N, C, T).
struct DatasetManifest {
  std::string version = kDatasetFormatVersion;
  double sample_rate_hz = 1.0;
  std::size_t channels = 0;
  std::string dtype = "f64le";  // "f32le" or "f64le"
  struct Entry {
    std::string id;
    std::string file;  // relative to the manifest's directory
    std::size_t num_samples = 0;
    std::size_t length = 0;
  };
  std::vector<Entry> domains;
};

DatasetManifest read_manifest(const std::filesystem::path& manifest_path);

/// Loads manifest plus binaries. f32 data is widened to double; byte sizes
/// are checked exactly against the declared shapes.
DomainSet load_dataset(const std::filesystem::path& manifest_path);

/// Writes manifest.json plus one <id>.bin per domain into out_dir.
/// Returns the manifest path. dtype must be "f32le" or "f64le".
std::filesystem::path save_dataset(const DomainSet& set, const std::filesystem::path& out_dir,
                                   const std::string& dtype = "f64le");

/// Write-temp-then-rename so readers never observe partial files.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace cmmn::io
