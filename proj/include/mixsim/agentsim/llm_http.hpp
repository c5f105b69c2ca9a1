#pragma once
// JSON-over-HTTP backend. Request body:
//   {"template_id": "...", "prompt": "...", "temperature": 1.0}
// Response body:
//   {"text": "<raw model output>"}
// The endpoint comes from MIXSIM_LLM_ENDPOINT, e.g. http://127.0.0.1:8080/generate.

#include <cstdlib>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "mixsim/agentsim/llm.hpp"

namespace mixsim::agentsim {

inline constexpr const char* kEndpointEnv = "MIXSIM_LLM_ENDPOINT";

class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Endpoint {
    std::string origin;   // scheme://host[:port]
    std::string path;

    // Plain http only.
    static Endpoint parse(const std::string& url) {
        const std::string scheme = "http://";
        if (url.rfind(scheme, 0) != 0) throw ConfigError("backend endpoint must start with http://");
        const auto slash = url.find('/', scheme.size());
        Endpoint e;
        e.origin = url.substr(0, slash);
        e.path = slash == std::string::npos ? "/" : url.substr(slash);
        if (e.origin.size() == scheme.size()) throw ConfigError("backend endpoint has no host");
        return e;
    }
};

class HttpBackend : public TextBackend {
public:
    explicit HttpBackend(const std::string& url, int timeout_s = 60) : ep_(Endpoint::parse(url)), timeout_s_(timeout_s) {}

    static HttpBackend from_env() {
        const char* v = std::getenv(kEndpointEnv);
        if (!v || !*v) throw ConfigError(std::string(kEndpointEnv) + " is not set");
        return HttpBackend(v);
    }

    std::string complete(const LlmRequest& request) override {
        httplib::Client cli(ep_.origin);
        cli.set_read_timeout(timeout_s_, 0);
        cli.set_connection_timeout(timeout_s_, 0);
        const nlohmann::json body = {{"template_id", std::string(to_string(request.template_id))},
                                     {"prompt", request.prompt},
                                     {"temperature", request.temperature}};
        auto res = cli.Post(ep_.path, body.dump(), "application/json");
        if (!res) throw BackendError("backend request failed: " + httplib::to_string(res.error()));
        if (res->status != 200) throw BackendError("backend returned HTTP " + std::to_string(res->status));
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error&) {
            throw BackendError("backend reply is not JSON");
        }
        if (!j.is_object() || !j.contains("text") || !j.at("text").is_string())
            throw BackendError("backend reply lacks a 'text' string");
        return j.at("text").get<std::string>();
    }

    const Endpoint& endpoint() const noexcept { return ep_; }

private:
    Endpoint ep_;
    int timeout_s_;
};

}  // namespace mixsim::agentsim
