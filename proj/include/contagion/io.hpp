#pragma once

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace contagion {

inline constexpr const char* kToolVersion = "0.1.0";

// Shortest decimal that round-trips a double (printf cascade, locale-free).
inline std::string format_double(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// FNV-1a, used for the config hash echoed into output headers.
inline std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : path_(path), out_(path) {
        if (!out_) throw std::runtime_error("csv: cannot open " + path + " for writing");
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    void close() {
        out_.flush();
        if (!out_) throw std::runtime_error("csv: write failure on " + path_);
        out_.close();
    }

private:
    std::string path_;
    std::ofstream out_;
};

// Plain-text key/value config. Lines are `key value...` or `key = value`;
// '#' starts a comment. Repeated keys keep every occurrence in order, which
// is how per-index and per-coupling records are expressed.
struct KvConfig {
    std::vector<std::pair<std::string, std::string>> entries;
    std::string raw;  // verbatim file content, for hashing

    bool has(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return true;
        return false;
    }

    std::string get(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return v;
        throw std::invalid_argument("config: missing key '" + key + "'");
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? get(key) : fallback;
    }

    double get_double(const std::string& key) const { return std::stod(get(key)); }
    double get_double_or(const std::string& key, double fallback) const {
        return has(key) ? std::stod(get(key)) : fallback;
    }
    long long get_int(const std::string& key) const { return std::stoll(get(key)); }
    long long get_int_or(const std::string& key, long long fallback) const {
        return has(key) ? std::stoll(get(key)) : fallback;
    }

    std::vector<std::string> all(const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries)
            if (k == key) out.push_back(v);
        return out;
    }
};

inline KvConfig parse_kv(std::istream& in) {
    KvConfig cfg;
    std::ostringstream raw;
    std::string line;
    while (std::getline(in, line)) {
        raw << line << '\n';
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::string rest;
        std::getline(ls, rest);
        // strip an optional '=' and surrounding whitespace
        std::size_t b = rest.find_first_not_of(" \t=");
        std::size_t e = rest.find_last_not_of(" \t\r");
        cfg.entries.emplace_back(key, b == std::string::npos ? "" : rest.substr(b, e - b + 1));
    }
    cfg.raw = raw.str();
    return cfg;
}

inline KvConfig load_kv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    return parse_kv(in);
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string subcommand;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string rng_algorithm;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;
};

inline std::string now_iso8601() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// Written atomically (temp file + rename) after a successful run.
inline void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("manifest: cannot open " + tmp.string());
        out << "{\n";
        out << "  \"tool_version\": \"" << m.tool_version << "\",\n";
        out << "  \"subcommand\": \"" << m.subcommand << "\",\n";
        out << "  \"config_hash\": \"" << m.config_hash << "\",\n";
        out << "  \"seed\": " << m.seed << ",\n";
        out << "  \"rng_algorithm\": \"" << m.rng_algorithm << "\",\n";
        out << "  \"started_at\": \"" << m.started_at << "\",\n";
        out << "  \"finished_at\": \"" << m.finished_at << "\",\n";
        out << "  \"outputs\": [";
        for (std::size_t i = 0; i < m.outputs.size(); ++i)
            out << (i ? ", " : "") << '"' << m.outputs[i] << '"';
        out << "]\n}\n";
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace contagion
