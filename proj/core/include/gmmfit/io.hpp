#pragma once

#include <string>
#include <vector>

namespace gmmfit {

// One value per line, no header. Blank lines are skipped.
std::vector<double> read_samples_csv(const std::string& path);
void write_samples_csv(const std::string& path, const std::vector<double>& values);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace gmmfit
