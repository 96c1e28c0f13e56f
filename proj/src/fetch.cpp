#include "timberline/fetch.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include "timberline/error.hpp"
#include "timberline/schema.hpp"
#include "timberline/states.hpp"

namespace fs = std::filesystem;

namespace timberline {

std::string resolveDatamartUrl(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("TIMBERLINE_DATAMART_URL"); env && *env) return env;
  return kDefaultDatamartUrl;
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

Endpoint splitUrl(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw UsageError("base URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

enum class Outcome { Saved, NotFound };

Outcome download(httplib::Client& client, const std::string& path, const fs::path& target, int attempts,
                 std::vector<std::string>& warnings) {
  for (int attempt = 1;; ++attempt) {
    auto res = client.Get(path);
    if (res && res->status == 200) {
      if (res->has_header("Content-Length")) {
        const auto declared = std::strtoull(res->get_header_value("Content-Length").c_str(), nullptr, 10);
        if (declared != res->body.size())
          warnings.push_back(path + ": Content-Length " + std::to_string(declared) + " but received " +
                             std::to_string(res->body.size()) + " bytes");
      }
      std::ofstream out(target, std::ios::binary | std::ios::trunc);
      out.write(res->body.data(), static_cast<std::streamsize>(res->body.size()));
      out.close();
      if (!out) throw DataError("cannot write " + target.string());
      return Outcome::Saved;
    }
    if (res && res->status == 404) return Outcome::NotFound;
    const int status = res ? res->status : 0;
    const bool retriable = !res || status >= 500 || status == 429 || status == 408;
    if (!retriable || attempt >= attempts) {
      const std::string why = res ? "HTTP " + std::to_string(status) : httplib::to_string(res.error());
      throw NetworkError("GET " + path + " failed: " + why, status, retriable);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
  }
}

fs::path scratchDirectory(const fs::path& parent) {
  std::random_device rd;
  for (int i = 0; i < 100; ++i) {
    fs::path p = parent / (".fetch-" + std::to_string(rd()));
    if (fs::create_directory(p)) return p;
  }
  throw DataError("cannot create scratch directory in " + parent.string());
}

}  // namespace

FetchResult fetchState(const std::string& stateCode, const fs::path& directory, const FetchOptions& options) {
  std::string state = stateCode;
  std::transform(state.begin(), state.end(), state.begin(), [](unsigned char c) { return std::toupper(c); });
  if (!stateFips(state)) throw UsageError("unknown state code '" + stateCode + "'");
  if (options.attempts < 1) throw UsageError("attempts must be at least 1");

  const Endpoint endpoint = splitUrl(resolveDatamartUrl(options.baseUrl));
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(options.timeoutSeconds);
  client.set_read_timeout(options.timeoutSeconds);
  client.set_follow_location(true);

  std::error_code ec;
  fs::create_directories(directory, ec);
  if (!fs::is_directory(directory)) throw DataError("cannot create directory " + directory.string());

  const fs::path scratch = scratchDirectory(directory);
  FetchResult result;
  std::vector<std::string> saved;
  try {
    auto get = [&](const std::string& file, bool mandatory) {
      const std::string path = endpoint.path + "/" + file;
      if (download(client, path, scratch / file, options.attempts, result.warnings) == Outcome::Saved)
        saved.push_back(file);
      else if (mandatory)
        throw NetworkError("GET " + path + " failed: HTTP 404", 404, false);
    };
    for (auto table : kMandatoryTables) get(state + "_" + std::string(table) + ".csv", true);
    for (auto table : kOptionalTables) get(state + "_" + std::string(table) + ".csv", false);
    get(std::string(kSpeciesFile), false);
  } catch (...) {
    fs::remove_all(scratch, ec);
    throw;
  }
  for (const auto& file : saved) {
    fs::rename(scratch / file, directory / file);
    result.files.push_back(directory / file);
  }
  fs::remove_all(scratch, ec);
  if (options.warn)
    for (const auto& w : result.warnings) options.warn(w);
  return result;
}

}  // namespace timberline
