#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "timberline/database.hpp"
#include "timberline/error.hpp"
#include "timberline/fetch.hpp"

using namespace timberline;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(TIMBERLINE_FIXTURE_DIR) / "SYNTH-1";

/// Serves files from the SYNTH-1 fixture under /CSV/, optionally failing one path.
class LocalServer {
 public:
  explicit LocalServer(std::string failPath = {}, int failStatus = 500) : fail_(std::move(failPath)) {
    server_.Get(R"(/CSV/(.+))", [this, failStatus](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      const std::string file = req.matches[1];
      if (file == fail_) {
        res.status = failStatus;
        return;
      }
      std::ifstream in(kFixture / file, std::ios::binary);
      if (!in) {
        res.status = 404;
        return;
      }
      std::ostringstream body;
      body << in.rdbuf();
      res.set_content(body.str(), "text/csv");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/CSV"; }
  int requests() const { return requests_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string fail_;
  std::atomic<int> requests_{0};
};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("timberline-fetch-" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("fetch downloads every available table from a local server") {
  LocalServer server;
  TempDir dir("ok");
  FetchOptions opt;
  opt.baseUrl = server.url();
  const auto result = fetchState("ct", dir.path, opt);
  CHECK(fs::exists(dir.path / "CT_PLOT.csv"));
  CHECK(fs::exists(dir.path / "CT_TREE.csv"));
  CHECK(fs::exists(dir.path / "REF_SPECIES.csv"));
  CHECK_FALSE(fs::exists(dir.path / "CT_SEEDLING.csv"));
  CHECK(result.files.size() == 8);
  CHECK(loadDatabase(dir.path) == loadDatabase(kFixture));
}

TEST_CASE("unknown state code is a usage error") {
  TempDir dir("unknown");
  CHECK_THROWS_AS(fetchState("ZZ", dir.path, {}), UsageError);
}

TEST_CASE("unreachable host is a network error and leaves no files") {
  TempDir dir("unreachable");
  FetchOptions opt;
  opt.baseUrl = "http://127.0.0.1:1/CSV";
  opt.attempts = 1;
  opt.timeoutSeconds = 2;
  CHECK_THROWS_AS(fetchState("CT", dir.path, opt), NetworkError);
  CHECK((!fs::exists(dir.path) || fs::is_empty(dir.path)));
}

TEST_CASE("a failing mandatory table after retries leaves nothing behind") {
  LocalServer server("CT_POP_STRATUM.csv", 503);
  TempDir dir("partial");
  FetchOptions opt;
  opt.baseUrl = server.url();
  opt.attempts = 2;
  try {
    fetchState("CT", dir.path, opt);
    FAIL("expected a network error");
  } catch (const NetworkError& e) {
    CHECK(e.status() == 503);
    CHECK(e.retriable());
  }
  CHECK(fs::is_empty(dir.path));
}

TEST_CASE("client errors are not retried") {
  LocalServer server("CT_COND.csv", 403);
  TempDir dir("forbidden");
  FetchOptions opt;
  opt.baseUrl = server.url();
  opt.attempts = 3;
  CHECK_THROWS_AS(fetchState("CT", dir.path, opt), NetworkError);
  // PLOT then COND once each.
  CHECK(server.requests() == 2);
}

TEST_CASE("base URL resolution prefers explicit, then environment, then default") {
  CHECK(resolveDatamartUrl("http://x/y") == "http://x/y");
  ::setenv("TIMBERLINE_DATAMART_URL", "http://mirror/CSV", 1);
  CHECK(resolveDatamartUrl("") == "http://mirror/CSV");
  ::unsetenv("TIMBERLINE_DATAMART_URL");
  CHECK(resolveDatamartUrl("") == kDefaultDatamartUrl);
}
