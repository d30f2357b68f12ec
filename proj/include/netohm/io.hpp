#pragma once

#include <Eigen/Dense>
#include <string>

#include "netohm/problem.hpp"

namespace netohm {

// Network JSON ("netohm/1"): nodes carry an id, a boundary flag and optional
// x/y coordinates; edges carry an id, tail/head node ids and the edge
// admittance (sigma_im optional).  Internal indices are assigned by sorted
// id, and the writer emits nodes and edges in that order, so a load/save
// round trip is byte identical.
struct NetworkBundle {
  Network net;
  Eigen::VectorXd sigma_re;
  Eigen::VectorXd sigma_im;
};

NetworkBundle load_network_json(const std::string& text);
std::string save_network_json(const Network& net, const Eigen::VectorXd& sigma_re,
                              const Eigen::VectorXd& sigma_im);

// Measurement JSON ("netohm-data/1"): variant, omega1 (null for the real
// variants) and per-experiment boundary conditions and functional blocks.
struct MeasurementFile {
  Variant variant = Variant::real_conductivity;
  double omega1 = 0.0;
  std::vector<Eigen::VectorXd> f0;
  std::vector<Eigen::VectorXcd> f1;
  PowerData data;
};

std::string save_measurements_json(const ProblemSpec& spec, const PowerData& data);
MeasurementFile load_measurements_json(const std::string& text);

// One row per edge/vertex, one column per experiment (two columns per
// experiment for the two-frequency variants).
std::string measurements_csv(const PowerData& data);

std::string matrix_csv(const Eigen::MatrixXd& m);
std::string matrix_csv(const Eigen::MatrixXcd& m);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace netohm
