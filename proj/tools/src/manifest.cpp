#include "manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "kolmo/binary_io.hpp"
#include "kolmo/error.hpp"

namespace kolmo::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) fail(ErrorKind::Io, "SHA-256 unavailable");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::vector<ArtifactHash> hash_artifacts(const std::vector<std::string>& paths) {
  std::vector<ArtifactHash> out;
  for (const auto& p : paths) {
    if (p.empty()) continue;
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::recursive_directory_iterator(p))
        if (e.is_regular_file() && !e.path().filename().string().ends_with("manifest.json")) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out.push_back({f.string(), sha256_file(f)});
    } else {
      out.push_back({p, sha256_file(p)});
    }
  }
  return out;
}

namespace {

nlohmann::json hashes_json(const std::vector<ArtifactHash>& v) {
  auto arr = nlohmann::json::array();
  for (const auto& a : v) arr.push_back({{"path", a.path}, {"sha256", a.sha256}});
  return arr;
}

std::vector<ArtifactHash> hashes_from(const nlohmann::json& arr) {
  std::vector<ArtifactHash> out;
  for (const auto& a : arr) out.push_back({a.at("path").get<std::string>(), a.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  nlohmann::json j;
  j["tool"] = "kolmo";
  j["version"] = m.version;
  j["stage"] = m.stage;
  j["seed"] = m.seed;
  j["config"] = m.config;
  j["inputs"] = hashes_json(m.inputs);
  j["outputs"] = hashes_json(m.outputs);
  write_file_atomic(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; }, false);
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open manifest " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    Manifest m;
    m.stage = j.at("stage").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config").get<std::string>();
    m.inputs = hashes_from(j.at("inputs"));
    m.outputs = hashes_from(j.at("outputs"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& primary_output, const std::string& stage) {
  if (std::filesystem::is_directory(primary_output)) return primary_output / (stage + ".manifest.json");
  return std::filesystem::path(primary_output.string() + ".manifest.json");
}

}  // namespace kolmo::cli
