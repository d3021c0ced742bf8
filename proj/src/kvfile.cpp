#include "cilfit/kvfile.hpp"

#include <fstream>
#include <sstream>

namespace cilfit {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::string KvSection::get_string(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end())
        throw std::runtime_error("missing key '" + key + "' in section [" + name + "]");
    return it->second;
}

double KvSection::get_double(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ParseError("invalid number '" + raw + "' for key '" + key + "'",
                         lines.count(key) ? lines.at(key) : 0);
    }
}

double KvSection::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long KvSection::get_long(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t pos = 0;
        const long v = std::stol(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ParseError("invalid integer '" + raw + "' for key '" + key + "'",
                         lines.count(key) ? lines.at(key) : 0);
    }
}

long KvSection::get_long(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
}

const KvSection* KvFile::find(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

const KvSection& KvFile::require(const std::string& name) const {
    if (const KvSection* s = find(name)) return *s;
    throw std::runtime_error("missing section [" + name + "]");
}

KvFile parse_kv_text(const std::string& text) {
    KvFile file;
    file.sections.push_back({"", {}, {}});  // default section
    std::istringstream stream(text);
    std::string line;
    int lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", lineno);
            file.sections.push_back({trim(line.substr(1, line.size() - 2)), {}, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", lineno);
        auto& section = file.sections.back();
        section.values[key] = value;
        section.lines[key] = lineno;
    }
    return file;
}

KvFile parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_kv_text(buf.str());
}

void write_kv_file(const std::string& path, const KvFile& file) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& section : file.sections) {
        if (section.values.empty() && section.name.empty()) continue;
        if (!section.name.empty()) out << "[" << section.name << "]\n";
        for (const auto& [key, value] : section.values) out << key << " = " << value << "\n";
    }
}

}  // namespace cilfit
