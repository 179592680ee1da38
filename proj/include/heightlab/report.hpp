#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace heightlab {

uint64_t fnv1a64(const std::string& data);
std::string hex64(uint64_t v);

// {"value": v, "uncertainty": u}
nlohmann::json measured(double value, double uncertainty);
// {"value": v, "tag": "exact"}
nlohmann::json exact(const nlohmann::json& value);

// Content-addressed key/value store under a directory; disabled when the directory is empty.
class DegreeCache {
public:
    explicit DegreeCache(std::string dir = {});
    static DegreeCache from_env();  // HEIGHTLAB_CACHE
    bool enabled() const { return !dir_.empty(); }
    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& value) const;

private:
    std::string path_for(const std::string& key) const;
    std::string dir_;
};

// Writes to path, or stdout when path is empty or "-".
void write_text(const std::string& path, const std::string& text);

}  // namespace heightlab
