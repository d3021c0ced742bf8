#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cilfit {

struct ParseError : std::runtime_error {
    int line;
    ParseError(const std::string& msg, int line_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
};

// Flat key=value text with [section] headers. '#' starts a comment.
struct KvSection {
    std::string name;
    std::map<std::string, std::string> values;
    std::map<std::string, int> lines;  // for error reporting

    bool has(const std::string& key) const { return values.count(key) > 0; }
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;
};

struct KvFile {
    std::vector<KvSection> sections;

    const KvSection* find(const std::string& name) const;
    const KvSection& require(const std::string& name) const;
};

KvFile parse_kv_text(const std::string& text);
KvFile parse_kv_file(const std::string& path);
void write_kv_file(const std::string& path, const KvFile& file);

}  // namespace cilfit
