#include "cmmn/dataset_io.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace cmmn::io {

namespace {

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "f32le") return 4;
  if (dtype == "f64le") return 8;
  fail(ErrorCode::BadMagicOrVersion, "unsupported dtype '" + dtype + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::MissingFile, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

DatasetManifest read_manifest(const std::filesystem::path& manifest_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::BadMagicOrVersion,
         "manifest '" + manifest_path.string() + "' is not valid JSON: " + e.what());
  }
  DatasetManifest m;
  try {
    m.version = j.at("version").get<std::string>();
    if (m.version != kDatasetFormatVersion)
      fail(ErrorCode::BadMagicOrVersion, "unsupported dataset version '" + m.version + "'");
    m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    m.channels = j.at("channels").get<std::size_t>();
    m.dtype = j.at("dtype").get<std::string>();
    dtype_size(m.dtype);
    for (const auto& d : j.at("domains")) {
      DatasetManifest::Entry e;
      e.id = d.at("id").get<std::string>();
      e.file = d.at("file").get<std::string>();
      e.num_samples = d.at("num_samples").get<std::size_t>();
      e.length = d.at("length").get<std::size_t>();
      m.domains.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadMagicOrVersion,
         "manifest '" + manifest_path.string() + "' is malformed: " + e.what());
  }
  return m;
}

DomainSet load_dataset(const std::filesystem::path& manifest_path) {
  const DatasetManifest m = read_manifest(manifest_path);
  const std::filesystem::path base = manifest_path.parent_path();
  const std::size_t elem_size = dtype_size(m.dtype);

  DomainSet set;
  for (const auto& entry : m.domains) {
    if (entry.num_samples == 0)
      fail(ErrorCode::EmptyInput, "domain '" + entry.id + "' declares zero samples");
    const std::filesystem::path file = base / entry.file;
    std::ifstream in(file, std::ios::binary);
    if (!in) fail(ErrorCode::MissingFile, "cannot open '" + file.string() + "'");

    const std::size_t count = entry.num_samples * m.channels * entry.length;
    const std::uintmax_t expected = count * elem_size;
    const std::uintmax_t actual = std::filesystem::file_size(file);
    if (actual != expected)
      fail(ErrorCode::SizeMismatch, "'" + file.string() + "' holds " + std::to_string(actual) +
                                        " bytes, expected " + std::to_string(expected));

    SignalSet signals;
    signals.num_samples = entry.num_samples;
    signals.num_channels = m.channels;
    signals.num_timepoints = entry.length;
    signals.sample_rate_hz = m.sample_rate_hz;
    signals.data.resize(count);

    if (m.dtype == "f64le") {
      in.read(reinterpret_cast<char*>(signals.data.data()),
              static_cast<std::streamsize>(expected));
    } else {
      std::vector<float> narrow(count);
      in.read(reinterpret_cast<char*>(narrow.data()), static_cast<std::streamsize>(expected));
      for (std::size_t i = 0; i < count; ++i) signals.data[i] = static_cast<double>(narrow[i]);
    }
    if (!in) fail(ErrorCode::SizeMismatch, "short read from '" + file.string() + "'");
    signals.validate();
    set.domains.push_back({entry.id, std::move(signals)});
  }
  set.validate();
  return set;
}

std::filesystem::path save_dataset(const DomainSet& set, const std::filesystem::path& out_dir,
                                   const std::string& dtype) {
  set.validate();
  const std::size_t elem_size = dtype_size(dtype);
  std::filesystem::create_directories(out_dir);

  DatasetManifest m;
  m.sample_rate_hz = set.domains.front().signals.sample_rate_hz;
  m.channels = set.channel_count();
  m.dtype = dtype;

  nlohmann::json j;
  j["version"] = m.version;
  j["sample_rate_hz"] = m.sample_rate_hz;
  j["channels"] = m.channels;
  j["dtype"] = m.dtype;
  nlohmann::json domains = nlohmann::json::array();

  for (const auto& d : set.domains) {
    const std::string file_name = d.id + ".bin";
    std::string bytes;
    if (elem_size == 8) {
      bytes.assign(reinterpret_cast<const char*>(d.signals.data.data()),
                   d.signals.data.size() * sizeof(double));
    } else {
      std::vector<float> narrow(d.signals.data.size());
      for (std::size_t i = 0; i < narrow.size(); ++i)
        narrow[i] = static_cast<float>(d.signals.data[i]);
      bytes.assign(reinterpret_cast<const char*>(narrow.data()),
                   narrow.size() * sizeof(float));
    }
    write_file_atomic(out_dir / file_name, bytes);
    domains.push_back({{"id", d.id},
                       {"file", file_name},
                       {"num_samples", d.signals.num_samples},
                       {"length", d.signals.num_timepoints}});
  }
  j["domains"] = std::move(domains);

  const std::filesystem::path manifest_path = out_dir / "manifest.json";
  write_file_atomic(manifest_path, j.dump(2) + "\n");
  return manifest_path;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::MissingFile, "cannot create '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorCode::SizeMismatch, "short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cmmn::io
