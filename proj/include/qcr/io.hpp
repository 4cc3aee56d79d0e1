#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qcr::io {

// Fixed float formatting shared by every CSV value: %.12g, so identical
// inputs produce byte-identical files.
std::string format_value(double v);

struct Column {
    std::string name;
    std::vector<double> values;
};

// Header row of names, then one row per index. All columns must have equal
// length. Creates parent directories as needed.
void write_csv(const std::string& path, const std::vector<Column>& columns);

// Row-oriented variant for mixed text/number tables (values pre-formatted).
void write_csv_rows(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

uint64_t fnv1a64(const void* data, size_t n);
std::string digest_hex(const std::string& text);
std::string digest_file(const std::string& path);  // throws ConfigError when unreadable

void ensure_parent_dir(const std::string& path);

struct RunManifest {
    std::string command;       // the invoked subcommand plus flags
    std::string tool_version;
    std::string config_path;
    std::string config_digest;
    std::string resolved_params;  // SI dump of the loaded parameter set
    double wall_seconds = 0.0;
    std::vector<std::string> outputs;  // paths; digests computed at write time
    std::string status = "ok";         // "ok" or "error"
    std::string error;                 // message when status == "error"
};

// JSON manifest next to the primary output. Output digests are computed from
// the files on disk; missing outputs are recorded with an empty digest.
void write_manifest(const std::string& path, const RunManifest& m);

}  // namespace qcr::io
