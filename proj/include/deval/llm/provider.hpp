#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "deval/errors.hpp"
#include "deval/rng.hpp"

namespace deval {

// Outcome of one chat-completions request. ok means an assistant message
// came back; whether its content parses into a usable verdict is the
// judge's business, not the provider's.
struct ChatResult {
    bool ok = false;
    std::string content;
    std::string error;
    int http_status = 0;
};

inline std::string request_digest(const nlohmann::json& request) {
    return to_hex64(fnv1a64(request.dump()));
}

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResult complete(const nlohmann::json& request) = 0;
    virtual std::string name() const = 0;
    // Offline providers pair with the logical clock so reruns are
    // byte-identical.
    virtual bool offline() const { return false; }
};

// Talks to any chat-completions-style endpoint. The endpoint URL is split
// into base and path; credentials come from the environment variable named
// in the config and travel as a bearer token.
class HttpChatProvider : public ChatProvider {
public:
    HttpChatProvider(std::string endpoint, std::string api_key, int timeout_seconds)
        : api_key_(std::move(api_key)), timeout_seconds_(timeout_seconds) {
        const std::size_t scheme = endpoint.find("://");
        if (scheme == std::string::npos) {
            throw ValidationError("llm.endpoint: expected scheme://host/path");
        }
        const std::size_t slash = endpoint.find('/', scheme + 3);
        if (slash == std::string::npos) {
            base_ = endpoint;
            path_ = "/";
        } else {
            base_ = endpoint.substr(0, slash);
            path_ = endpoint.substr(slash);
        }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (base_.rfind("https://", 0) == 0) {
            throw ValidationError("llm.endpoint: https requires a TLS-enabled build");
        }
#endif
    }

    std::string name() const override { return "http"; }

    ChatResult complete(const nlohmann::json& request) override {
        httplib::Client client(base_);
        client.set_connection_timeout(timeout_seconds_, 0);
        client.set_read_timeout(timeout_seconds_, 0);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        ChatResult out;
        const httplib::Result res =
            client.Post(path_, headers, request.dump(), "application/json");
        if (!res) {
            out.error = "transport error: " + httplib::to_string(res.error());
            return out;
        }
        out.http_status = res->status;
        // surfaced in transcripts so failures can be traced provider-side
        const std::string request_id = res->get_header_value("x-request-id");
        if (res->status != 200) {
            out.error = "http " + std::to_string(res->status) +
                        (request_id.empty() ? "" : " (request id " + request_id + ")") +
                        ": " + res->body;
            return out;
        }
        try {
            const nlohmann::json body = nlohmann::json::parse(res->body);
            out.content =
                body.at("choices").at(0).at("message").at("content").get<std::string>();
            out.ok = true;
        } catch (const nlohmann::json::exception& e) {
            out.error = std::string("malformed completion body: ") + e.what();
        }
        return out;
    }

private:
    std::string base_;
    std::string path_;
    std::string api_key_;
    int timeout_seconds_ = 60;
};

// Serves responses recorded in a transcript (line-delimited JSON). Entries
// queue up per request digest, so repeated identical requests replay in
// their recorded order, including recorded failures.
class ReplayChatProvider : public ChatProvider {
public:
    explicit ReplayChatProvider(const std::string& transcript_jsonl) {
        std::size_t start = 0, line_no = 0;
        while (start < transcript_jsonl.size()) {
            std::size_t end = transcript_jsonl.find('\n', start);
            if (end == std::string::npos) end = transcript_jsonl.size();
            ++line_no;
            const std::string line = transcript_jsonl.substr(start, end - start);
            start = end + 1;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError("transcript line " + std::to_string(line_no) + ": " +
                                 e.what());
            }
            Recorded rec;
            rec.http_error = j.value("status", "") == "http_error";
            rec.content = j.value("response", "");
            rec.error = j.value("error", "");
            std::string digest = j.value("request_digest", "");
            if (digest.empty() && j.contains("request")) {
                digest = request_digest(j["request"]);
            }
            if (!digest.empty()) queues_[digest].push_back(std::move(rec));
        }
    }

    std::string name() const override { return "replay"; }
    bool offline() const override { return true; }

    ChatResult complete(const nlohmann::json& request) override {
        const std::string digest = request_digest(request);
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = queues_.find(digest);
        ChatResult out;
        if (it == queues_.end() || it->second.empty()) {
            out.error = "replay: no recorded response for request digest " + digest;
            return out;
        }
        Recorded rec = std::move(it->second.front());
        it->second.pop_front();
        if (rec.http_error) {
            out.error = rec.error.empty() ? "replayed http error" : rec.error;
            return out;
        }
        out.ok = true;
        out.http_status = 200;
        out.content = std::move(rec.content);
        return out;
    }

private:
    struct Recorded {
        bool http_error = false;
        std::string content;
        std::string error;
    };
    std::mutex mutex_;
    std::map<std::string, std::deque<Recorded>> queues_;
};

// Deterministic offline stand-in for a judge: answers depend only on the
// seed, the request bytes and how often that exact request has been seen.
// Useful for wiring tests and offline pipeline runs; it does not assess
// anything.
class StubChatProvider : public ChatProvider {
public:
    explicit StubChatProvider(std::uint64_t seed) : seed_(seed) {}

    std::string name() const override { return "stub"; }
    bool offline() const override { return true; }

    ChatResult complete(const nlohmann::json& request) override {
        const std::string dump = request.dump();
        std::uint64_t occurrence;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            occurrence = ++counts_[fnv1a64(dump)];
        }
        std::uint64_t h = fnv1a64(dump);
        unsigned char extra[16];
        for (int i = 0; i < 8; ++i) {
            extra[i] = static_cast<unsigned char>(seed_ >> (8 * i));
            extra[8 + i] = static_cast<unsigned char>(occurrence >> (8 * i));
        }
        h = fnv1a64_bytes(extra, sizeof extra, h);

        ChatResult out;
        out.ok = true;
        out.http_status = 200;
        if (dump.find("better_design") != std::string::npos) {
            static const char* choices[] = {"a", "b", "both"};
            out.content = std::string("{\"better_design\": \"") + choices[h % 3] +
                          "\", \"explanation\": \"stub verdict\"}";
        } else {
            const int score = 1 + static_cast<int>(h % 10);
            out.content = "{\"score\": " + std::to_string(score) +
                          ", \"explanation\": \"stub verdict\"}";
        }
        return out;
    }

private:
    std::uint64_t seed_;
    std::mutex mutex_;
    std::map<std::uint64_t, std::uint64_t> counts_;
};

} // namespace deval
