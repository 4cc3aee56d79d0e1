#include "qcr/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "qcr/errors.hpp"

namespace qcr::io {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void ensure_parent_dir(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

namespace {

void write_text_file(const std::string& path, const std::string& text) {
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw ConfigError("write failed for " + path);
}

}  // namespace

void write_csv(const std::string& path, const std::vector<Column>& columns) {
    if (columns.empty()) throw ValidationError("write_csv: no columns");
    const size_t n = columns.front().values.size();
    for (const auto& c : columns)
        if (c.values.size() != n)
            throw ValidationError("write_csv: column length mismatch in " + c.name);

    std::ostringstream out;
    for (size_t j = 0; j < columns.size(); ++j)
        out << (j ? "," : "") << columns[j].name;
    out << "\n";
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < columns.size(); ++j)
            out << (j ? "," : "") << format_value(columns[j].values[i]);
        out << "\n";
    }
    write_text_file(path, out.str());
}

void write_csv_rows(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw ValidationError("write_csv_rows: row width mismatch");
        for (size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
        out << "\n";
    }
    write_text_file(path, out.str());
}

uint64_t fnv1a64(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 1469598103934665603ull;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string digest_hex(const std::string& text) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
    return buf;
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return digest_hex(ss.str());
}

void write_manifest(const std::string& path, const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["tool_version"] = m.tool_version;
    j["config_path"] = m.config_path;
    j["config_digest"] = m.config_digest;
    j["resolved_params"] = m.resolved_params;
    j["wall_seconds"] = m.wall_seconds;
    j["status"] = m.status;
    if (!m.error.empty()) j["error"] = m.error;
    auto& outs = j["outputs"] = nlohmann::json::array();
    for (const auto& o : m.outputs) {
        nlohmann::json entry;
        entry["path"] = o;
        try {
            entry["digest"] = digest_file(o);
        } catch (const ConfigError&) {
            entry["digest"] = "";
        }
        outs.push_back(entry);
    }
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace qcr::io
