#include "lipirm/persistence.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <stdexcept>

#include <unistd.h>

namespace lipirm {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char *hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

RunWriter::RunWriter(fs::path final_dir, bool overwrite)
    : final_(std::move(final_dir)), overwrite_(overwrite) {
  if (fs::exists(final_) && !overwrite_)
    throw std::runtime_error("run directory already exists: " + final_.string());
  const fs::path parent = final_.has_parent_path() ? final_.parent_path() : fs::path(".");
  fs::create_directories(parent);
  staging_ = parent / ("." + final_.filename().string() + ".tmp-" + std::to_string(::getpid()));
  fs::remove_all(staging_);
  fs::create_directories(staging_);
}

RunWriter::~RunWriter() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
}

void RunWriter::write_text(const std::string &relative, std::string_view content) {
  const fs::path p = staging_ / relative;
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + p.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    throw std::runtime_error("write failed for " + p.string());
  hashes_[relative] = sha256_hex(content);
}

void RunWriter::write_json(const std::string &relative, const nlohmann::json &j) {
  write_text(relative, j.dump(2) + "\n");
}

void RunWriter::commit(const nlohmann::json &resolved_inputs) {
  nlohmann::json manifest;
  manifest["inputs_sha256"] = sha256_hex(resolved_inputs.dump());
  manifest["files"] = hashes_;
  write_json("manifest.json", manifest);
  if (fs::exists(final_)) {
    if (!overwrite_)
      throw std::runtime_error("run directory appeared during the run: " + final_.string());
    fs::remove_all(final_);
  }
  fs::rename(staging_, final_);
  committed_ = true;
}

nlohmann::json read_json_file(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

} // namespace lipirm
