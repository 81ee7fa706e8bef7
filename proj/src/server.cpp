#include "autopower/server.hpp"

#include <charconv>
#include <cstdlib>
#include <random>

#include "autopower/error.hpp"
#include "autopower/ingest.hpp"
#include "httplib.h"

namespace autopower::server {

using nlohmann::json;

namespace {

constexpr const char* kModule = "server";

std::size_t parse_size(const std::string& text, const char* what) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error(ErrorKind::parameter, kModule, std::string("bad ") + what + " '" + text + "'");
  return v;
}

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

}  // namespace

void ServerConfig::validate() const {
  if (port < 0 || port > 65535) throw Error(ErrorKind::parameter, kModule, "port out of range");
  if (max_upload_bytes == 0) throw Error(ErrorKind::parameter, kModule, "max_upload_bytes must be positive");
  pipeline.validate();
}

void parse_listen(const std::string& listen, ServerConfig& config) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorKind::parameter, kModule, "listen address needs host:port");
  if (colon > 0) config.host = listen.substr(0, colon);
  const auto port = parse_size(listen.substr(colon + 1), "port");
  if (port > 65535) throw Error(ErrorKind::parameter, kModule, "port out of range");
  config.port = static_cast<int>(port);
}

void apply_env_overrides(ServerConfig& config) {
  if (const char* v = env("AUTOPOWER_LISTEN")) parse_listen(v, config);
  if (const char* v = env("AUTOPOWER_DATA_DIR")) config.data_dir = v;
  if (const char* v = env("AUTOPOWER_MAX_UPLOAD_BYTES")) config.max_upload_bytes = parse_size(v, "AUTOPOWER_MAX_UPLOAD_BYTES");
  if (const char* v = env("AUTOPOWER_CONCURRENCY")) config.concurrency = parse_size(v, "AUTOPOWER_CONCURRENCY");
}

ServerConfig load_config(const std::optional<std::filesystem::path>& file) {
  ServerConfig config;
  if (file) {
    json j;
    try {
      j = json::parse(pipeline::read_file(*file));
      if (j.contains("listen")) parse_listen(j.at("listen").get<std::string>(), config);
      if (j.contains("data_dir")) config.data_dir = j.at("data_dir").get<std::string>();
      config.max_upload_bytes = j.value("max_upload_bytes", config.max_upload_bytes);
      config.concurrency = j.value("concurrency", config.concurrency);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::format, kModule, "bad server config " + file->string() + ": " + e.what());
    }
    if (j.contains("pipeline")) config.pipeline = pipeline::config_from_json(j.at("pipeline"));
  }
  apply_env_overrides(config);
  config.validate();
  return config;
}

std::string to_string(JobState s) {
  switch (s) {
    case JobState::received: return "received";
    case JobState::cleaning: return "cleaning";
    case JobState::selecting: return "selecting";
    case JobState::benchmarking: return "benchmarking";
    case JobState::ranked: return "ranked";
    case JobState::failed: return "failed";
  }
  return "failed";
}

JobState job_state_from_string(const std::string& s) {
  for (auto st : {JobState::received, JobState::cleaning, JobState::selecting, JobState::benchmarking, JobState::ranked,
                  JobState::failed}) {
    if (to_string(st) == s) return st;
  }
  throw Error(ErrorKind::format, kModule, "unknown job state '" + s + "'");
}

json to_json(const JobRecord& job) {
  json j = {{"job_id", job.job_id},
            {"state", to_string(job.state)},
            {"trace_meta", {{"rows", job.rows}, {"source_id", job.source_id}}}};
  j["result_ref"] = job.result_ref ? json(*job.result_ref) : json(nullptr);
  j["error"] = job.error ? json(*job.error) : json(nullptr);
  return j;
}

JobRecord job_from_json(const json& j) {
  JobRecord r;
  r.job_id = j.at("job_id").get<std::string>();
  r.state = job_state_from_string(j.at("state").get<std::string>());
  r.rows = j.at("trace_meta").at("rows").get<std::size_t>();
  r.source_id = j.at("trace_meta").at("source_id").get<std::string>();
  if (!j.at("result_ref").is_null()) r.result_ref = j.at("result_ref").get<std::string>();
  if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  return r;
}

JobService::JobService(ServerConfig config) : config_(std::move(config)) {
  config_.validate();
  std::filesystem::create_directories(config_.data_dir);
  nonce_ = std::random_device{}();
  nonce_ = (nonce_ << 32) ^ std::random_device{}();
  recover();
  std::size_t c = config_.concurrency ? config_.concurrency : std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t i = 0; i < c; ++i) workers_.emplace_back([this] { worker(); });
}

JobService::~JobService() { shutdown(); }

void JobService::shutdown() {
  {
    std::lock_guard lock(queue_mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  queue_cv_.notify_all();
  for (auto& t : workers_) t.join();
  workers_.clear();
}

// Jobs left unfinished by an earlier process are failed rather than rerun.
void JobService::recover() {
  for (const auto& entry : std::filesystem::directory_iterator(config_.data_dir)) {
    const auto record_path = entry.path() / "job.json";
    if (!entry.is_directory() || !std::filesystem::exists(record_path)) continue;
    JobRecord r;
    try {
      r = job_from_json(json::parse(pipeline::read_file(record_path)));
    } catch (const std::exception&) {
      continue;
    }
    if (r.state != JobState::ranked && r.state != JobState::failed) {
      r.state = JobState::failed;
      r.error = "interrupted by server restart";
      pipeline::write_file(record_path, pipeline::dump(to_json(r)));
    }
    auto slot = std::make_shared<Slot>();
    slot->record = std::make_shared<const JobRecord>(r);
    jobs_[r.job_id] = slot;
  }
}

std::string JobService::next_id() {
  char buf[40];
  std::lock_guard lock(queue_mutex_);
  std::snprintf(buf, sizeof buf, "%016llx%06llx", static_cast<unsigned long long>(nonce_),
                static_cast<unsigned long long>(++counter_));
  return buf;
}

std::string JobService::submit(const std::string& payload, const std::string& source_id) {
  if (payload.size() > config_.max_upload_bytes) {
    throw Error(ErrorKind::too_large, kModule,
                "upload of " + std::to_string(payload.size()) + " bytes exceeds cap " +
                    std::to_string(config_.max_upload_bytes));
  }
  const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size());
  const auto csv = ingest::decompress_upload(bytes);

  JobRecord r;
  r.job_id = next_id();
  r.source_id = source_id;
  const auto dir = config_.data_dir / r.job_id;
  std::filesystem::create_directories(dir);
  pipeline::write_file(dir / "upload.zip", payload);
  pipeline::write_file(dir / "usage_log.csv", std::string_view(reinterpret_cast<const char*>(csv.data()), csv.size()));
  pipeline::write_file(dir / "job.json", pipeline::dump(to_json(r)));
  {
    std::unique_lock lock(jobs_mutex_);
    auto slot = std::make_shared<Slot>();
    slot->record = std::make_shared<const JobRecord>(r);
    jobs_[r.job_id] = slot;
  }
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(r.job_id);
  }
  queue_cv_.notify_one();
  return r.job_id;
}

std::shared_ptr<const JobRecord> JobService::snapshot(const std::string& job_id) const {
  std::shared_ptr<Slot> slot;
  {
    std::shared_lock lock(jobs_mutex_);
    const auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw Error(ErrorKind::not_found, kModule, "unknown job '" + job_id + "'");
    slot = it->second;
  }
  return std::atomic_load(&slot->record);
}

JobRecord JobService::job(const std::string& job_id) const { return *snapshot(job_id); }

std::string JobService::model(const std::string& job_id) const {
  const auto r = snapshot(job_id);
  if (r->state != JobState::ranked) {
    std::string detail = "job '" + job_id + "' is " + to_string(r->state);
    if (r->error) detail += ": " + *r->error;
    throw Error(ErrorKind::conflict, kModule, detail);
  }
  return pipeline::read_file(*r->result_ref);
}

void JobService::publish(const JobRecord& record) {
  pipeline::write_file(config_.data_dir / record.job_id / "job.json", pipeline::dump(to_json(record)));
  std::shared_ptr<Slot> slot;
  {
    std::shared_lock lock(jobs_mutex_);
    slot = jobs_.at(record.job_id);
  }
  std::atomic_store(&slot->record, std::make_shared<const JobRecord>(record));
}

void JobService::worker() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      ++running_;
    }
    run_job(id);
    {
      std::lock_guard lock(queue_mutex_);
      --running_;
    }
    idle_cv_.notify_all();
  }
}

void JobService::wait_idle() {
  std::unique_lock lock(queue_mutex_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && running_ == 0; });
}

void JobService::run_job(const std::string& job_id) {
  JobRecord r = job(job_id);
  const auto dir = config_.data_dir / job_id;
  try {
    const auto trace = ingest::parse_trace(pipeline::read_file(dir / "usage_log.csv"), r.source_id);
    r.rows = trace.rows;
    publish(r);
    const auto result = pipeline::run_pipeline(trace, config_.pipeline, [&](const std::string& stage) {
      JobState next = r.state;
      if (stage == "cleaning") next = JobState::cleaning;
      if (stage == "selecting") next = JobState::selecting;
      if (stage == "benchmarking") next = JobState::benchmarking;
      if (next != r.state) {
        r.state = next;
        publish(r);
      }
    });
    pipeline::write_artifacts(dir, result, config_.pipeline, r.source_id);
    r.state = JobState::ranked;
    r.result_ref = (dir / "artifact.json").string();
    publish(r);
  } catch (const std::exception& e) {
    r.state = JobState::failed;
    r.error = e.what();
    r.result_ref.reset();
    publish(r);
  }
}

namespace {

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::too_large: return 413;
    default: return 400;
  }
}

void reply_error(httplib::Response& res, const Error& e) {
  res.status = status_for(e.kind());
  res.set_content(json{{"error", e.what()}, {"kind", to_string(e.kind())}}.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(ServerConfig config)
    : jobs_(std::make_unique<JobService>(std::move(config))), http_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpServer::~HttpServer() {
  stop();
  jobs_->shutdown();
}

void HttpServer::routes() {
  // Oversized bodies are refused by the transport with 413 before buffering.
  http_->set_payload_max_length(jobs_->config().max_upload_bytes);

  http_->Post("/api/v1/traces", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const std::string source = req.has_header("X-Source-Id") ? req.get_header_value("X-Source-Id") : "anonymous";
      const auto id = jobs_->submit(req.body, source);
      res.status = 202;
      res.set_content(json{{"job_id", id}}.dump(), "application/json");
    } catch (const Error& e) {
      reply_error(res, e);
    }
  });
  http_->Get(R"(/api/v1/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      res.set_content(to_json(jobs_->job(req.matches[1])).dump(), "application/json");
    } catch (const Error& e) {
      reply_error(res, e);
    }
  });
  http_->Get(R"(/api/v1/models/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      res.set_content(jobs_->model(req.matches[1]), "application/json");
    } catch (const Error& e) {
      reply_error(res, e);
    }
  });
}

int HttpServer::bind() {
  const auto& c = jobs_->config();
  if (c.port == 0) {
    port_ = http_->bind_to_any_port(c.host);
  } else {
    port_ = http_->bind_to_port(c.host, c.port) ? c.port : -1;
  }
  if (port_ < 0) throw Error(ErrorKind::parameter, kModule, "cannot bind " + c.host + ":" + std::to_string(c.port));
  return port_;
}

void HttpServer::serve() { http_->listen_after_bind(); }

int HttpServer::start() {
  const int port = bind();
  thread_ = std::thread([this] { serve(); });
  http_->wait_until_ready();
  return port;
}

void HttpServer::stop() {
  http_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace autopower::server
