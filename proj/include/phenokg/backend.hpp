#pragma once

#include <json.hpp>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phenokg/common.hpp"

namespace phenokg {

using nlohmann::json;

struct BackendUnavailable : Error {
    using Error::Error;
};
struct NetworkError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// LLM backend: POST <base>/hypotheses and POST <base>/claims with a JSON
// body; fixture mode replays responses from llm-<hash>.json files where
// <hash> is the first 16 hex chars of sha256 over the canonical (sorted-key,
// compact) request dump.
// ---------------------------------------------------------------------------

struct PicoTuple {
    std::string population;
    std::string intervention;
    std::string comparison;
    std::string outcome;
};

struct RawClaim {
    std::string subject;
    std::string relation;
    std::string object;
    std::string evidence_type;
    double confidence = 0.0;
    std::string context;
    std::string recommendation;
};

std::string canonical_request_key(const json& request);

std::vector<PicoTuple> parse_hypotheses_response(const json& body);
std::vector<RawClaim> parse_claims_response(const json& body);

class LlmBackend {
  public:
    virtual ~LlmBackend() = default;
    virtual std::vector<PicoTuple> hypotheses(const json& request) = 0;
    virtual std::vector<RawClaim> claims(const json& request) = 0;
};

class FixtureLlmBackend : public LlmBackend {
  public:
    explicit FixtureLlmBackend(std::string dir) : dir_(std::move(dir)) {}
    std::vector<PicoTuple> hypotheses(const json& request) override;
    std::vector<RawClaim> claims(const json& request) override;

    static std::string fixture_path(const std::string& dir, const json& request);
    // used by the fixture generator
    static void write_fixture(const std::string& dir, const json& request, const json& response);

    // invoked on a fixture miss before BackendUnavailable is thrown
    std::function<void(const json& request)> on_miss;

  private:
    json load(const json& request) const;
    std::string dir_;
};

class HttpLlmBackend : public LlmBackend {
  public:
    // base_url like "http://127.0.0.1:8080"; retries with exponential backoff
    explicit HttpLlmBackend(std::string base_url, int max_retries = 3);
    std::vector<PicoTuple> hypotheses(const json& request) override;
    std::vector<RawClaim> claims(const json& request) override;

  private:
    json post(const std::string& path, const json& request);
    std::string host_;
    int port_ = 80;
    std::string path_prefix_;
    int max_retries_;
};

// ---------------------------------------------------------------------------
// Literature client speaking the E-utilities protocol: esearch (JSON) +
// efetch (XML). Responses are cached on disk keyed by query hash; fixture
// mode is the same client with no transport, reading only the cache files.
// ---------------------------------------------------------------------------

struct LitRecord {
    std::string doc_id;
    std::string title;
    std::string abstract_text;
    int year = 0;
    std::vector<std::string> publication_types;
};

struct EfetchStats {
    size_t skipped = 0;  // malformed article blocks
};

std::vector<std::string> parse_esearch(const std::string& body);
std::vector<LitRecord> parse_efetch(const std::string& xml, EfetchStats* stats = nullptr);

// cache/fixture file names
std::string esearch_key(const std::string& term, int retmax);
std::string efetch_key(const std::vector<std::string>& ids);

class LitTransport {
  public:
    virtual ~LitTransport() = default;
    // path_and_query e.g. "/esearch.fcgi?db=pubmed&..."; throws NetworkError
    virtual std::string get(const std::string& path_and_query) = 0;
};

class HttpLitTransport : public LitTransport {
  public:
    explicit HttpLitTransport(std::string base_url, int max_retries = 3);
    std::string get(const std::string& path_and_query) override;

  private:
    std::string host_;
    int port_ = 80;
    std::string path_prefix_;
    int max_retries_;
};

class LiteratureClient {
  public:
    // transport == nullptr -> fixture mode (cache_dir is read-only)
    LiteratureClient(std::string cache_dir, std::unique_ptr<LitTransport> transport);

    std::vector<std::string> search(const std::string& term, int retmax);
    std::vector<LitRecord> fetch(const std::vector<std::string>& ids, EfetchStats* stats = nullptr);

    bool fixture_mode() const { return transport_ == nullptr; }

    // invoked when fixture mode has no file for a search term
    std::function<void(const std::string& term, int retmax)> on_search_miss;

    // fixture generation helpers
    static void write_esearch_fixture(const std::string& dir, const std::string& term,
                                      int retmax, const std::vector<std::string>& ids);
    static void write_efetch_fixture(const std::string& dir,
                                     const std::vector<std::string>& ids,
                                     const std::vector<LitRecord>& records);
    static std::string render_efetch_xml(const std::vector<LitRecord>& records);

  private:
    std::optional<std::string> read_cached(const std::string& filename) const;
    void write_cached(const std::string& filename, const std::string& body) const;

    std::string cache_dir_;
    std::unique_ptr<LitTransport> transport_;
};

std::string url_encode(const std::string& s);

}  // namespace phenokg
