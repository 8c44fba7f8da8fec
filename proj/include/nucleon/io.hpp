#pragma once

// Artifact emission: CSV tables, JSON documents and the run manifest.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace nucleon::io {

using json = nlohmann::json;

/// Scientific notation with 17 significant digits; "nan", "inf", "-inf" otherwise.
std::string format_number(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// 16 hex digits of fnv1a over the compact dump of cfg (keys sorted).
std::string config_hash(const json& cfg);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(std::string_view s);
    void end_row();

private:
    std::ofstream out_;
    std::size_t columns_;
    std::size_t pending_ = 0;
};

/// Collects the artifacts of one run and writes manifest.json next to them.
class RunArtifacts {
public:
    RunArtifacts(std::filesystem::path dir, std::string command, json config);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    const std::string& hash() const noexcept { return hash_; }

    /// Path for a new artifact, recorded in the manifest.
    std::filesystem::path add(const std::string& name, const std::string& kind);

    /// Writes doc (with "config_hash" added) as indented JSON.
    void write_json(const std::string& name, const std::string& kind, json doc);

    void write_manifest(double wall_seconds) const;

private:
    std::filesystem::path dir_;
    std::string command_;
    json config_;
    std::string hash_;
    std::vector<std::pair<std::string, std::string>> artifacts_;
};

/// Numbers as JSON with non-finite values mapped to strings.
json number(double v);
json numbers(const std::vector<double>& v);

}  // namespace nucleon::io
