#pragma once

#include <array>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bisque/error.hpp"
#include "bisque/mixture.hpp"
#include "bisque/models/furseal.hpp"
#include "bisque/models/spatial.hpp"

namespace bisque {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

inline void expect_header(const std::string& got, const std::string& want, const char* what) {
    if (got != want) {
        throw ConfigError(std::string(what) + ": expected header '" + want + "', got '" + got + "'");
    }
}

inline std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    return in;
}

} // namespace detail

// Fur-seal census format: visit,captured,newly_captured
inline FurSealData read_furseal_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("fur-seal CSV is empty");
    detail::expect_header(line, "visit,captured,newly_captured", "fur-seal CSV");
    FurSealData data;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 3) throw ConfigError("fur-seal CSV: malformed row '" + line + "'");
        ++data.visits;
        data.captured.push_back(std::stoi(fields[1]));
        data.newly_captured.push_back(std::stoi(fields[2]));
        data.total_marked += data.newly_captured.back();
    }
    data.validate();
    return data;
}

inline void write_furseal_csv(const FurSealData& data, std::ostream& os) {
    os << "visit,captured,newly_captured\n";
    for (int i = 0; i < data.visits; ++i) {
        os << (i + 1) << ',' << data.captured[i] << ',' << data.newly_captured[i] << '\n';
    }
}

// Spatial observation format: x,y,value
inline void read_spatial_csv(std::istream& in, Eigen::MatrixXd& locations,
                             Eigen::VectorXd& responses) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("spatial CSV is empty");
    detail::expect_header(line, "x,y,value", "spatial CSV");
    std::vector<std::array<double, 3>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 3) throw ConfigError("spatial CSV: malformed row '" + line + "'");
        rows.push_back({std::stod(fields[0]), std::stod(fields[1]), std::stod(fields[2])});
    }
    locations.resize(static_cast<int>(rows.size()), 2);
    responses.resize(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        locations(static_cast<int>(i), 0) = rows[i][0];
        locations(static_cast<int>(i), 1) = rows[i][1];
        responses[static_cast<int>(i)] = rows[i][2];
    }
}

inline void write_spatial_csv(const Eigen::MatrixXd& locations, const Eigen::VectorXd& responses,
                              std::ostream& os) {
    os << "x,y,value\n" << std::setprecision(17);
    for (int i = 0; i < locations.rows(); ++i) {
        os << locations(i, 0) << ',' << locations(i, 1) << ',' << responses[i] << '\n';
    }
}

// Prediction-grid format: x,y
inline Eigen::MatrixXd read_grid_points_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("grid CSV is empty");
    detail::expect_header(line, "x,y", "grid CSV");
    std::vector<std::array<double, 2>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 2) throw ConfigError("grid CSV: malformed row '" + line + "'");
        rows.push_back({std::stod(fields[0]), std::stod(fields[1])});
    }
    Eigen::MatrixXd points(static_cast<int>(rows.size()), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        points(static_cast<int>(i), 0) = rows[i][0];
        points(static_cast<int>(i), 1) = rows[i][1];
    }
    return points;
}

inline void write_grid_points_csv(const Eigen::MatrixXd& points, std::ostream& os) {
    os << "x,y\n" << std::setprecision(17);
    for (int i = 0; i < points.rows(); ++i) {
        os << points(i, 0) << ',' << points(i, 1) << '\n';
    }
}

// Density curves emit as theta1,density
inline void write_density_csv(const DensityCurve& curve, std::ostream& os) {
    os << "theta1,density\n" << std::setprecision(17);
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        os << curve.points[i] << ',' << curve.values[i] << '\n';
    }
}

} // namespace bisque
