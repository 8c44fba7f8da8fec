#include "nucleon/io.hpp"

#include <cmath>
#include <cstdio>

#include "nucleon/errors.hpp"

namespace nucleon::io {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const json& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.dump())));
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
    : out_(path), columns_(header.size()) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    bool first = true;
    for (std::string_view h : header) {
        if (!first) out_ << ',';
        out_ << h;
        first = false;
    }
    out_ << '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_number(v))); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::cell(std::string_view s) {
    if (pending_ > 0) out_ << ',';
    out_ << s;
    ++pending_;
    return *this;
}

void CsvWriter::end_row() {
    if (pending_ != columns_) throw Error("csv row has " + std::to_string(pending_) + " cells, expected " +
                                          std::to_string(columns_));
    out_ << '\n';
    pending_ = 0;
}

RunArtifacts::RunArtifacts(std::filesystem::path dir, std::string command, json config)
    : dir_(std::move(dir)), command_(std::move(command)), config_(std::move(config)) {
    hash_ = config_hash(config_);
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path RunArtifacts::add(const std::string& name, const std::string& kind) {
    artifacts_.emplace_back(name, kind);
    return dir_ / name;
}

void RunArtifacts::write_json(const std::string& name, const std::string& kind, json doc) {
    doc["config_hash"] = hash_;
    std::ofstream out(add(name, kind));
    if (!out) throw Error("cannot write " + name);
    out << doc.dump(2) << '\n';
}

void RunArtifacts::write_manifest(double wall_seconds) const {
    json m;
    m["command"] = command_;
    m["config"] = config_;
    m["config_hash"] = hash_;
    m["version"] = "1.0.0";
    m["wall_time_s"] = wall_seconds;
    json list = json::array();
    for (const auto& [name, kind] : artifacts_)
        list.push_back({{"path", name}, {"kind", kind}, {"config_hash", hash_}});
    m["artifacts"] = list;
    std::ofstream out(dir_ / "manifest.json");
    if (!out) throw Error("cannot write manifest.json");
    out << m.dump(2) << '\n';
}

json number(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

}  // namespace nucleon::io
