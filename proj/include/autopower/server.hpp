#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "autopower/pipeline.hpp"
#include "vendor_json.hpp"

namespace httplib {
class Server;
}

namespace autopower::server {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds an ephemeral port
  std::filesystem::path data_dir = "autopower-data";
  std::size_t max_upload_bytes = 64u << 20;
  std::size_t concurrency = 0;  // 0 = hardware concurrency
  pipeline::PipelineConfig pipeline;

  void validate() const;
};

// File settings (JSON: listen, data_dir, max_upload_bytes, concurrency,
// pipeline) overridden by AUTOPOWER_LISTEN, AUTOPOWER_DATA_DIR,
// AUTOPOWER_MAX_UPLOAD_BYTES and AUTOPOWER_CONCURRENCY.
ServerConfig load_config(const std::optional<std::filesystem::path>& file);
void apply_env_overrides(ServerConfig& config);
// "host:port" or ":port".
void parse_listen(const std::string& listen, ServerConfig& config);

enum class JobState { received, cleaning, selecting, benchmarking, ranked, failed };

std::string to_string(JobState s);
JobState job_state_from_string(const std::string& s);

struct JobRecord {
  std::string job_id;
  JobState state = JobState::received;
  std::size_t rows = 0;
  std::string source_id;
  std::optional<std::string> result_ref;  // set iff ranked
  std::optional<std::string> error;
};

nlohmann::json to_json(const JobRecord& job);
JobRecord job_from_json(const nlohmann::json& j);

// Job bookkeeping and the pipeline worker pool, independent of HTTP.
class JobService {
 public:
  explicit JobService(ServerConfig config);
  ~JobService();
  JobService(const JobService&) = delete;
  JobService& operator=(const JobService&) = delete;

  // Persists the payload and queues the job. Raises too_large or format errors;
  // no job exists afterwards in either case.
  std::string submit(const std::string& payload, const std::string& source_id);
  // Raises not_found for an unknown id.
  JobRecord job(const std::string& job_id) const;
  // The artifact text. Raises not_found, or conflict when the job is not ranked.
  std::string model(const std::string& job_id) const;
  // Blocks until no job is queued or running.
  void wait_idle();
  void shutdown();

  const ServerConfig& config() const { return config_; }

 private:
  struct Slot {
    std::shared_ptr<const JobRecord> record;
  };

  void worker();
  void run_job(const std::string& job_id);
  void publish(const JobRecord& record);
  std::shared_ptr<const JobRecord> snapshot(const std::string& job_id) const;
  void recover();
  std::string next_id();

  ServerConfig config_;
  mutable std::shared_mutex jobs_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> jobs_;
  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::condition_variable idle_cv_;
  std::deque<std::string> queue_;
  std::size_t running_ = 0;
  bool stopping_ = false;
  std::uint64_t counter_ = 0;
  std::uint64_t nonce_ = 0;
  std::vector<std::thread> workers_;
};

class HttpServer {
 public:
  explicit HttpServer(ServerConfig config);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and returns the bound port.
  int bind();
  // Serves until stop(); bind() first.
  void serve();
  // bind() plus serve() on a background thread.
  int start();
  void stop();

  JobService& jobs() { return *jobs_; }

 private:
  void routes();

  std::unique_ptr<JobService> jobs_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace autopower::server
