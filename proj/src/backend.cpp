#include "phenokg/backend.hpp"

#include <httplib.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "phenokg/hash.hpp"

namespace fs = std::filesystem;

namespace phenokg {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& body) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << body;
}

// split "http://host:port/prefix" into host/port/prefix
void split_url(const std::string& url, std::string& host, int& port, std::string& prefix) {
    std::string rest = url;
    port = 80;
    if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
    else if (rest.rfind("https://", 0) == 0) {
        rest = rest.substr(8);
        port = 443;
    }
    auto slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    prefix = slash == std::string::npos ? "" : rest.substr(slash);
    if (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    auto colon = hostport.find(':');
    if (colon != std::string::npos) {
        host = hostport.substr(0, colon);
        port = std::stoi(hostport.substr(colon + 1));
    } else {
        host = hostport;
    }
}

template <typename Fn>
std::string with_retries(int max_retries, const std::string& what, Fn&& attempt) {
    int backoff_ms = 100;
    for (int tries = 0;; ++tries) {
        auto result = attempt();
        if (result) return *result;
        if (tries + 1 >= max_retries)
            throw NetworkError(what + " failed after " + std::to_string(max_retries) + " attempts");
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
        backoff_ms *= 2;
    }
}

}  // namespace

std::string url_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xf]);
        }
    }
    return out;
}

std::string canonical_request_key(const json& request) {
    // nlohmann::json keeps object keys sorted, so dump() is canonical
    return short_hash(request.dump());
}

std::vector<PicoTuple> parse_hypotheses_response(const json& body) {
    std::vector<PicoTuple> out;
    if (!body.is_object() || !body.contains("hypotheses") || !body["hypotheses"].is_array())
        throw ParseError("hypotheses response missing 'hypotheses' array");
    for (const auto& h : body["hypotheses"]) {
        PicoTuple t;
        t.population = h.value("population", "");
        t.intervention = h.value("intervention", "");
        t.comparison = h.value("comparison", "no intervention");
        t.outcome = h.value("outcome", "");
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<RawClaim> parse_claims_response(const json& body) {
    std::vector<RawClaim> out;
    if (!body.is_object() || !body.contains("claims") || !body["claims"].is_array())
        throw ParseError("claims response missing 'claims' array");
    for (const auto& c : body["claims"]) {
        RawClaim rc;
        rc.subject = c.value("subject", "");
        rc.relation = c.value("relation", "");
        rc.object = c.value("object", "");
        rc.evidence_type = c.value("evidence_type", "");
        rc.confidence = c.value("confidence", 0.0);
        rc.context = c.value("context", "");
        rc.recommendation = c.value("recommendation", "");
        out.push_back(std::move(rc));
    }
    return out;
}

// --------------------------- FixtureLlmBackend ----------------------------

std::string FixtureLlmBackend::fixture_path(const std::string& dir, const json& request) {
    return (fs::path(dir) / ("llm-" + canonical_request_key(request) + ".json")).string();
}

void FixtureLlmBackend::write_fixture(const std::string& dir, const json& request,
                                      const json& response) {
    write_file(fixture_path(dir, request), response.dump(2) + "\n");
}

json FixtureLlmBackend::load(const json& request) const {
    std::string path = fixture_path(dir_, request);
    if (!fs::exists(path)) {
        if (on_miss) on_miss(request);
        throw BackendUnavailable("no fixture for request (expected " + path + ")");
    }
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ParseError("bad fixture " + path + ": " + e.what());
    }
}

std::vector<PicoTuple> FixtureLlmBackend::hypotheses(const json& request) {
    return parse_hypotheses_response(load(request));
}

std::vector<RawClaim> FixtureLlmBackend::claims(const json& request) {
    return parse_claims_response(load(request));
}

// ----------------------------- HttpLlmBackend -----------------------------

HttpLlmBackend::HttpLlmBackend(std::string base_url, int max_retries)
    : max_retries_(max_retries) {
    split_url(base_url, host_, port_, path_prefix_);
}

json HttpLlmBackend::post(const std::string& path, const json& request) {
    std::string body = with_retries(max_retries_, "POST " + path, [&]() -> std::optional<std::string> {
        httplib::Client cli(host_, port_);
        cli.set_connection_timeout(5);
        cli.set_read_timeout(60);
        auto res = cli.Post((path_prefix_ + path).c_str(), request.dump(), "application/json");
        if (!res || res->status < 200 || res->status >= 300) return std::nullopt;
        return res->body;
    });
    try {
        return json::parse(body);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad backend response: ") + e.what());
    }
}

std::vector<PicoTuple> HttpLlmBackend::hypotheses(const json& request) {
    return parse_hypotheses_response(post("/hypotheses", request));
}

std::vector<RawClaim> HttpLlmBackend::claims(const json& request) {
    return parse_claims_response(post("/claims", request));
}

// ------------------------------ E-utilities -------------------------------

std::vector<std::string> parse_esearch(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad esearch response: ") + e.what());
    }
    if (!j.contains("esearchresult") || !j["esearchresult"].contains("idlist"))
        throw ParseError("esearch response missing esearchresult.idlist");
    std::vector<std::string> ids;
    for (const auto& id : j["esearchresult"]["idlist"]) ids.push_back(id.get<std::string>());
    return ids;
}

namespace {

// minimal tag scanning; enough for the PubMed article fields we consume
std::string strip_tags(const std::string& s) {
    std::string out;
    bool in_tag = false;
    for (char c : s) {
        if (c == '<') in_tag = true;
        else if (c == '>') in_tag = false;
        else if (!in_tag) out.push_back(c);
    }
    return out;
}

std::string decode_entities(const std::string& s) {
    std::string out;
    for (size_t i = 0; i < s.size();) {
        if (s[i] == '&') {
            if (s.compare(i, 5, "&amp;") == 0) { out += '&'; i += 5; continue; }
            if (s.compare(i, 4, "&lt;") == 0) { out += '<'; i += 4; continue; }
            if (s.compare(i, 4, "&gt;") == 0) { out += '>'; i += 4; continue; }
            if (s.compare(i, 6, "&quot;") == 0) { out += '"'; i += 6; continue; }
            if (s.compare(i, 6, "&apos;") == 0) { out += '\''; i += 6; continue; }
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

std::string encode_entities(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

// first <tag ...>content</tag> inside `block` starting at `from`
std::optional<std::string> find_tag(const std::string& block, const std::string& tag,
                                    size_t from = 0) {
    std::string open = "<" + tag;
    std::string close = "</" + tag + ">";
    size_t start = block.find(open, from);
    while (start != std::string::npos) {
        char after = start + open.size() < block.size() ? block[start + open.size()] : '\0';
        if (after == '>' || after == ' ' || after == '\t' || after == '\n') break;
        start = block.find(open, start + 1);
    }
    if (start == std::string::npos) return std::nullopt;
    size_t open_end = block.find('>', start);
    if (open_end == std::string::npos) return std::nullopt;
    size_t end = block.find(close, open_end);
    if (end == std::string::npos) return std::nullopt;
    return block.substr(open_end + 1, end - open_end - 1);
}

std::vector<std::string> find_all_tags(const std::string& block, const std::string& tag) {
    std::vector<std::string> out;
    std::string close = "</" + tag + ">";
    size_t from = 0;
    while (true) {
        auto content = find_tag(block, tag, from);
        if (!content) break;
        size_t pos = block.find("<" + tag, from);
        size_t end = block.find(close, pos);
        out.push_back(*content);
        from = end + close.size();
    }
    return out;
}

}  // namespace

std::vector<LitRecord> parse_efetch(const std::string& xml, EfetchStats* stats) {
    std::vector<LitRecord> out;
    size_t from = 0;
    while (true) {
        size_t start = xml.find("<PubmedArticle>", from);
        if (start == std::string::npos) break;
        size_t end = xml.find("</PubmedArticle>", start);
        if (end == std::string::npos) {
            if (stats) ++stats->skipped;
            break;
        }
        std::string block = xml.substr(start, end - start);
        from = end + 16;

        LitRecord rec;
        auto pmid = find_tag(block, "PMID");
        auto title = find_tag(block, "ArticleTitle");
        if (!pmid || !title || pmid->empty()) {
            if (stats) ++stats->skipped;
            continue;
        }
        rec.doc_id = decode_entities(strip_tags(*pmid));
        rec.title = decode_entities(strip_tags(*title));
        std::string abstract;
        for (const auto& part : find_all_tags(block, "AbstractText")) {
            if (!abstract.empty()) abstract += " ";
            abstract += decode_entities(strip_tags(part));
        }
        rec.abstract_text = abstract;
        if (auto year = find_tag(block, "Year")) {
            try {
                rec.year = std::stoi(*year);
            } catch (...) {
                rec.year = 0;
            }
        } else if (auto medline = find_tag(block, "MedlineDate")) {
            if (medline->size() >= 4) {
                try {
                    rec.year = std::stoi(medline->substr(0, 4));
                } catch (...) {
                    rec.year = 0;
                }
            }
        }
        for (const auto& pt : find_all_tags(block, "PublicationType"))
            rec.publication_types.push_back(decode_entities(strip_tags(pt)));
        out.push_back(std::move(rec));
    }
    return out;
}

std::string esearch_key(const std::string& term, int retmax) {
    return "es-" + short_hash("esearch|" + term + "|" + std::to_string(retmax)) + ".json";
}

std::string efetch_key(const std::vector<std::string>& ids) {
    std::string joined;
    for (const auto& id : ids) {
        if (!joined.empty()) joined += ",";
        joined += id;
    }
    return "ef-" + short_hash("efetch|" + joined) + ".xml";
}

HttpLitTransport::HttpLitTransport(std::string base_url, int max_retries)
    : max_retries_(max_retries) {
    split_url(base_url, host_, port_, path_prefix_);
}

std::string HttpLitTransport::get(const std::string& path_and_query) {
    return with_retries(max_retries_, "GET " + path_and_query,
                        [&]() -> std::optional<std::string> {
                            httplib::Client cli(host_, port_);
                            cli.set_connection_timeout(5);
                            cli.set_read_timeout(60);
                            auto res = cli.Get((path_prefix_ + path_and_query).c_str());
                            if (!res || res->status < 200 || res->status >= 300)
                                return std::nullopt;
                            return res->body;
                        });
}

LiteratureClient::LiteratureClient(std::string cache_dir,
                                   std::unique_ptr<LitTransport> transport)
    : cache_dir_(std::move(cache_dir)), transport_(std::move(transport)) {}

std::optional<std::string> LiteratureClient::read_cached(const std::string& filename) const {
    fs::path p = fs::path(cache_dir_) / filename;
    if (!fs::exists(p)) return std::nullopt;
    return read_file(p.string());
}

void LiteratureClient::write_cached(const std::string& filename, const std::string& body) const {
    write_file((fs::path(cache_dir_) / filename).string(), body);
}

std::vector<std::string> LiteratureClient::search(const std::string& term, int retmax) {
    std::string key = esearch_key(term, retmax);
    if (auto cached = read_cached(key)) return parse_esearch(*cached);
    if (!transport_) {
        if (on_search_miss) on_search_miss(term, retmax);
        return {};  // fixture miss counts as zero hits
    }
    std::string body = transport_->get("/esearch.fcgi?db=pubmed&retmode=json&retmax=" +
                                       std::to_string(retmax) + "&term=" + url_encode(term));
    parse_esearch(body);  // validate before caching
    write_cached(key, body);
    return parse_esearch(body);
}

std::vector<LitRecord> LiteratureClient::fetch(const std::vector<std::string>& ids,
                                               EfetchStats* stats) {
    if (ids.empty()) return {};
    std::string key = efetch_key(ids);
    if (auto cached = read_cached(key)) return parse_efetch(*cached, stats);
    if (!transport_) return {};
    std::string joined;
    for (const auto& id : ids) {
        if (!joined.empty()) joined += ",";
        joined += id;
    }
    std::string body =
        transport_->get("/efetch.fcgi?db=pubmed&retmode=xml&id=" + url_encode(joined));
    write_cached(key, body);
    return parse_efetch(body, stats);
}

void LiteratureClient::write_esearch_fixture(const std::string& dir, const std::string& term,
                                             int retmax, const std::vector<std::string>& ids) {
    json idlist = json::array();
    for (const auto& id : ids) idlist.push_back(id);
    json body = {{"esearchresult",
                  {{"count", std::to_string(ids.size())}, {"idlist", idlist}}}};
    write_file((fs::path(dir) / esearch_key(term, retmax)).string(), body.dump(2) + "\n");
}

std::string LiteratureClient::render_efetch_xml(const std::vector<LitRecord>& records) {
    std::ostringstream xml;
    xml << "<?xml version=\"1.0\" ?>\n<PubmedArticleSet>\n";
    for (const auto& r : records) {
        xml << "<PubmedArticle><MedlineCitation>";
        xml << "<PMID Version=\"1\">" << encode_entities(r.doc_id) << "</PMID>";
        xml << "<Article><ArticleTitle>" << encode_entities(r.title) << "</ArticleTitle>";
        xml << "<Abstract><AbstractText>" << encode_entities(r.abstract_text)
            << "</AbstractText></Abstract>";
        xml << "<Journal><JournalIssue><PubDate><Year>" << r.year
            << "</Year></PubDate></JournalIssue></Journal>";
        xml << "<PublicationTypeList>";
        for (const auto& pt : r.publication_types)
            xml << "<PublicationType>" << encode_entities(pt) << "</PublicationType>";
        xml << "</PublicationTypeList></Article></MedlineCitation></PubmedArticle>\n";
    }
    xml << "</PubmedArticleSet>\n";
    return xml.str();
}

void LiteratureClient::write_efetch_fixture(const std::string& dir,
                                            const std::vector<std::string>& ids,
                                            const std::vector<LitRecord>& records) {
    write_file((fs::path(dir) / efetch_key(ids)).string(), render_efetch_xml(records));
}

}  // namespace phenokg
