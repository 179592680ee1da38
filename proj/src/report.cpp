#include "heightlab/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace heightlab {

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

nlohmann::json measured(double value, double uncertainty) { return {{"value", value}, {"uncertainty", uncertainty}}; }

nlohmann::json exact(const nlohmann::json& value) { return {{"value", value}, {"tag", "exact"}}; }

DegreeCache::DegreeCache(std::string dir) : dir_(std::move(dir)) {}

DegreeCache DegreeCache::from_env() {
    const char* d = std::getenv("HEIGHTLAB_CACHE");
    return DegreeCache(d ? d : "");
}

std::string DegreeCache::path_for(const std::string& key) const {
    return (std::filesystem::path(dir_) / (hex64(fnv1a64(key)) + ".entry")).string();
}

std::optional<std::string> DegreeCache::get(const std::string& key) const {
    if (!enabled()) return std::nullopt;
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    std::string stored_key, value;
    if (!std::getline(in, stored_key) || stored_key != key) return std::nullopt;  // hash collision
    std::getline(in, value);
    return value;
}

void DegreeCache::put(const std::string& key, const std::string& value) const {
    if (!enabled()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    const std::string path = path_for(key);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) return;
        out << key << '\n' << value << '\n';
    }
    std::filesystem::rename(tmp, path, ec);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace heightlab
