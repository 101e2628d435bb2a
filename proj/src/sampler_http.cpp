#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "giftforge/rng.hpp"
#include "giftforge/sampler.hpp"

namespace gf::sample {

namespace {

struct ParsedEndpoint {
  std::string host_port;
  std::string path_prefix;
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
  // httplib::Client accepts scheme://host:port; any trailing path becomes the
  // request prefix.
  const auto scheme = endpoint.find("://");
  const std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = endpoint.find('/', host_start);
  if (slash == std::string::npos) return {endpoint, ""};
  return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

}  // namespace

HttpResult sample_http(const HttpOptions& options, const std::string& input_id,
                       const std::string& image_ref, const PlanEntry& entry,
                       std::uint64_t run_seed) {
  CandidateSet set;
  set.input_id = input_id;
  set.budget_n = entry.budget_n;
  set.candidates.resize(entry.budget_n);

  // Round-robin config assignment; one request per config for its share.
  struct Request {
    const SamplerConfig* cfg;
    std::vector<int> slots;  // candidate indices served by this request
  };
  std::vector<Request> requests(entry.configs.size());
  for (std::size_t c = 0; c < entry.configs.size(); ++c) requests[c].cfg = &entry.configs[c];
  for (int k = 0; k < entry.budget_n; ++k)
    requests[k % entry.configs.size()].slots.push_back(k);

  const ParsedEndpoint ep = split_endpoint(options.endpoint);

  std::string transport_failure;
  std::string malformed_failure;

  const int in_flight = std::max(1, options.max_in_flight);
  std::vector<std::thread> workers;
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;

  auto run_request = [&](Request& req) {
    const std::uint64_t seed = derive_seed(run_seed, input_id, req.cfg->id, 0);
    nlohmann::ordered_json body;
    body["image_ref"] = image_ref;
    body["prompt"] = options.prompt;
    body["temperature"] = req.cfg->temperature;
    body["top_p"] = req.cfg->top_p;
    body["n"] = req.slots.size();
    body["seed"] = seed;

    httplib::Client client(ep.host_port);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);

    httplib::Result res;
    int backoff = options.backoff_ms;
    for (int attempt = 0; attempt < options.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        backoff *= 2;
      }
      res = client.Post(ep.path_prefix + "/generate", body.dump(), "application/json");
      if (res && res->status < 500) break;
    }
    if (!res || res->status >= 500) {
      std::lock_guard lock(failure_mutex);
      if (transport_failure.empty())
        transport_failure = "POST /generate failed after " + std::to_string(options.retries) +
                            " attempts" + (res ? " (status " + std::to_string(res->status) + ")"
                                               : "");
      return;
    }
    if (res->status != 200) {
      std::lock_guard lock(failure_mutex);
      if (malformed_failure.empty())
        malformed_failure = "unexpected status " + std::to_string(res->status);
      return;
    }
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("candidates") || !j["candidates"].is_array()) {
      std::lock_guard lock(failure_mutex);
      if (malformed_failure.empty()) malformed_failure = "response lacks a candidates array";
      return;
    }
    const auto& texts = j["candidates"];
    for (std::size_t i = 0; i < req.slots.size(); ++i) {
      Candidate cand;
      cand.candidate_id = req.slots[i];
      cand.config_id = req.cfg->id;
      cand.seed = seed;
      // Short responses leave empty placeholder texts, recorded downstream as
      // generation failures.
      if (i < texts.size() && texts[i].is_string()) cand.text = texts[i].get<std::string>();
      set.candidates[req.slots[i]] = std::move(cand);
    }
  };

  for (int w = 0; w < in_flight; ++w)
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= requests.size()) return;
        run_request(requests[i]);
      }
    });
  for (std::thread& t : workers) t.join();

  if (!transport_failure.empty()) return TransportError{transport_failure};
  if (!malformed_failure.empty()) return MalformedResponse{malformed_failure};
  for (int k = 0; k < entry.budget_n; ++k) set.candidates[k].candidate_id = k;
  return set;
}

}  // namespace gf::sample
