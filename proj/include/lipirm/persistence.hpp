#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace lipirm {

std::string sha256_hex(std::string_view data);

/// Stages files in a sibling temporary directory and renames it into place
/// on commit, so a run directory is either complete or absent. Abandoned
/// writers remove their staging directory.
class RunWriter {
public:
  explicit RunWriter(std::filesystem::path final_dir, bool overwrite = false);
  ~RunWriter();
  RunWriter(const RunWriter &) = delete;
  RunWriter &operator=(const RunWriter &) = delete;

  void write_text(const std::string &relative, std::string_view content);
  void write_json(const std::string &relative, const nlohmann::json &j);

  /// Writes manifest.json (hash of the resolved inputs plus a hash per file)
  /// and renames the staging directory to the final path.
  void commit(const nlohmann::json &resolved_inputs);

  const std::filesystem::path &staging() const { return staging_; }

private:
  std::filesystem::path final_;
  std::filesystem::path staging_;
  std::map<std::string, std::string> hashes_;
  bool overwrite_;
  bool committed_ = false;
};

nlohmann::json read_json_file(const std::filesystem::path &path);

} // namespace lipirm
