#pragma once
// key=value manifest files ('#' starts a comment line).
#include <map>
#include <string>
#include <vector>

namespace mlcsc {

using Manifest = std::map<std::string, std::string>;

Manifest read_manifest(const std::string& path);
Manifest parse_manifest(const std::string& text);
void write_manifest(const std::string& path, const Manifest& m);

std::vector<std::string> split_csv(const std::string& s);
std::string join_path(const std::string& dir, const std::string& name);
std::string parent_dir(const std::string& path);

}  // namespace mlcsc
