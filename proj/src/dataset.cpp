// SPDX-License-Identifier: Apache-2.0
//
// Dataset manifests and spectrogram CSV import/export for the classifier.
#include "aysense/classify.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aysense::classify {

void save_spectrogram_csv(const std::string &path, const std::vector<double> &values, int rows, int cols,
                          const std::vector<double> &velocity_axis)
{
    if (values.size() != static_cast<size_t>(rows) * cols)
        throw std::invalid_argument("save_spectrogram_csv: value count does not match rows*cols");
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path);
    f.precision(10);
    if (!velocity_axis.empty()) {
        f << "# velocity_mps";
        for (double v : velocity_axis)
            f << ' ' << v;
        f << '\n';
    }
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c)
            f << (c ? "," : "") << values[static_cast<size_t>(r) * cols + c];
        f << '\n';
    }
    if (!f)
        throw std::runtime_error("write failure: " + path);
}

std::vector<std::vector<double>> load_csv_matrix(const std::string &path, int &rows, int &cols)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open csv: " + path);
    std::vector<std::vector<double>> out;
    std::string line;
    cols = -1;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(std::stod(cell));
        if (cols < 0)
            cols = static_cast<int>(row.size());
        else if (static_cast<int>(row.size()) != cols)
            throw std::runtime_error("ragged csv: " + path);
        out.push_back(std::move(row));
    }
    rows = static_cast<int>(out.size());
    if (rows == 0)
        throw std::runtime_error("empty csv: " + path);
    return out;
}

// Manifest lines: "label: <index> <name>" declares a class name; any other
// non-comment line is "<csv path>,<label index>". Paths are relative to the
// manifest's directory.
LabeledDataset load_manifest(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open manifest: " + path);
    const auto base = std::filesystem::path(path).parent_path();

    LabeledDataset ds;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (line.rfind("label:", 0) == 0) {
            std::stringstream ss(line.substr(6));
            int idx;
            std::string name;
            if (!(ss >> idx >> name) || idx < 0)
                throw std::runtime_error("bad label line in manifest: " + line);
            if (static_cast<size_t>(idx) >= ds.label_names.size())
                ds.label_names.resize(static_cast<size_t>(idx) + 1);
            ds.label_names[static_cast<size_t>(idx)] = name;
            continue;
        }
        auto comma = line.find_last_of(',');
        if (comma == std::string::npos)
            throw std::runtime_error("bad manifest line: " + line);
        std::string rel = line.substr(0, comma);
        int label = std::stoi(line.substr(comma + 1));
        int rows = 0, cols = 0;
        auto mat = load_csv_matrix((base / rel).string(), rows, cols);
        if (ds.rows == 0) {
            ds.rows = rows;
            ds.cols = cols;
        } else if (rows != ds.rows || cols != ds.cols) {
            throw std::runtime_error("sample shape mismatch in manifest at: " + rel);
        }
        std::vector<double> flat;
        flat.reserve(static_cast<size_t>(rows) * cols);
        for (const auto &r : mat)
            flat.insert(flat.end(), r.begin(), r.end());
        ds.samples.push_back(std::move(flat));
        ds.labels.push_back(label);
    }
    if (ds.samples.empty())
        throw std::runtime_error("manifest lists no samples: " + path);
    return ds;
}

} // namespace aysense::classify
