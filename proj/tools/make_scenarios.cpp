// Writes the bundled scenario files: make_scenarios <output-dir>

#include <filesystem>
#include <iostream>

#include "supergeom/io.hpp"
#include "supergeom/scenarios.hpp"

using namespace supergeom;

namespace {

io::ScenarioFile wrap(GeometryScenario g, std::vector<std::vector<double>> points, std::uint64_t seed = 1,
                      int count = 5) {
  io::ScenarioFile f;
  f.geometry = std::move(g);
  f.geometry.point.clear();
  f.points = std::move(points);
  f.sampler = {seed, count};
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_scenarios <output-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);

  std::vector<io::ScenarioFile> files;
  files.push_back(wrap(scenarios::flat_euclidean(3), {{0.0, 0.0, 0.0}, {0.5, -0.25, 1.0}}));

  auto sphere = [](const std::string& name, double a, double b) {
    auto g = scenarios::round_sphere(1.0, 0.0, a, b);
    g.name = name;
    return g;
  };
  files.push_back(wrap(sphere("sphere-metric-H", 1.0, 0.0), {{0.6, 0.0}, {1.0, 0.3}, {1.4, -0.2}}));
  files.push_back(wrap(sphere("sphere-symplectic", 0.0, 1.0), {{0.6, 0.0}, {1.2, 0.3}}));
  files.push_back(wrap(sphere("sphere-generic", 0.7, 0.5), {{0.7, 0.0}, {1.3, 0.2}}));

  auto sym4 = scenarios::symplectic_cubic(4, 3);
  sym4.name = "symplectic4";
  files.push_back(wrap(sym4, {{0.0, 0.0, 0.0, 0.0}, {0.1, -0.2, 0.05, 0.1}}, 1, 3));

  auto metric3 = scenarios::random_metric(3, 5);
  metric3.name = "metric3";
  files.push_back(wrap(metric3, {{0.0, 0.0, 0.0}, {0.1, 0.2, -0.1}}));

  auto line = scenarios::surface_times_line(3, 0.7, 0.4, 2.0);
  line.name = "surface-line-generic";
  files.push_back(wrap(line, {{0.0, 0.0, 0.0}, {0.1, -0.1, 0.3}}));

  auto nonpar = scenarios::random_connection(Matrix::Identity(2, 2) * 1.5, 7);
  nonpar.name = "nonparallel-H";
  files.push_back(wrap(nonpar, {{0.0, 0.0}, {0.2, 0.1}}));

  for (const auto& f : files) {
    const auto path = dir / (f.geometry.name + ".json");
    io::write_file(path.string(), io::to_json(f).dump(2) + "\n");
    std::cout << path.string() << "\n";
  }
  return 0;
}
