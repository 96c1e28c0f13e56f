#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace timberline {

/// Public DataMart CSV endpoint.
inline constexpr const char* kDefaultDatamartUrl = "https://apps.fs.usda.gov/fia/datamart/CSV";

struct FetchOptions {
  /// Empty means TIMBERLINE_DATAMART_URL, else kDefaultDatamartUrl.
  std::string baseUrl;
  int attempts = 3;
  int timeoutSeconds = 60;
  /// Receives non-fatal warnings such as size mismatches.
  std::function<void(const std::string&)> warn;
};

struct FetchResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

/// Resolves the base URL the same way fetchState does.
std::string resolveDatamartUrl(const std::string& configured);

/// Downloads `<ST>_<TABLE>.csv` for every known table into `directory`.
/// Files land in a scratch directory first and are moved into place only
/// when every mandatory table arrived, so a failure leaves nothing behind.
/// Throws UsageError for an unknown state and NetworkError for HTTP failures.
FetchResult fetchState(const std::string& stateCode, const std::filesystem::path& directory,
                       const FetchOptions& options = {});

}  // namespace timberline
