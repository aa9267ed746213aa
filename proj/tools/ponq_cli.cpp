// ponq: sample, fit, mesh, simplify and evaluate from the command line.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#include "ponq/json.hpp"
#include "ponq/ponq.hpp"

namespace {

using namespace ponq;

constexpr int kExitUsage = 2;
constexpr int kExitUnexpected = 1;
constexpr int kExitBase = 10;

int exit_code(ErrorCode c) { return kExitBase + static_cast<int>(c); }

std::string exit_code_help() {
  std::string s = "Exit codes:\n  0  success\n  1  unexpected failure\n  2  invalid command line\n";
  for (int c = 1; c <= static_cast<int>(ErrorCode::kIo); ++c)
    s += "  " + std::to_string(kExitBase + c) + " " + std::string(to_string(static_cast<ErrorCode>(c))) + "\n";
  s += "Errors are printed to stderr as one JSON object.\nPONQ_THREADS caps the worker count (0 = auto).\n";
  return s;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

struct SampleArgs {
  std::string in, out;
  std::size_t count = samples_for_resolution(32);
  std::size_t boundary_count = 0;
  std::uint64_t seed = 0;
  bool open_boundary = false;
};

void run_sample(const SampleArgs& a) {
  const TriMesh mesh = read_mesh(a.in);
  SampleSet set;
  const std::size_t nb = a.open_boundary ? (a.boundary_count > 0 ? a.boundary_count : a.count / 8) : 0;
  set.samples = augmented_samples(mesh, a.count, nb, a.seed);
  set.open_boundary = a.open_boundary;
  write_samples(std::filesystem::path(a.out), set);
}

struct FitArgs {
  std::string in, out, json;
  int res = 32;
  int epochs = 400;
  double lr = 0.0;
  std::uint64_t seed = 0;
};

void run_fit(const FitArgs& a) {
  const SampleSet set = read_samples(std::filesystem::path(a.in));
  FitConfig cfg;
  cfg.grid_res = a.res;
  cfg.epochs = a.epochs;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  const FitResult fit = fit_ponq(set.samples, cfg);
  PoNQFile file;
  file.elements = fit.elements;
  if (set.open_boundary) file.flags |= kFlagOpenSurface;
  write_ponq(std::filesystem::path(a.out), file);
  if (!a.json.empty()) write_json(a.json, to_json(file));
}

struct MeshArgs {
  std::string in, out;
  double edge_threshold = 0.0;
  double h = 0.0;
  bool open = false;
  double anisotropy = kDefaultAnisotropyThreshold;
};

void run_mesh(const MeshArgs& a) {
  const PoNQFile file = read_ponq(std::filesystem::path(a.in));
  MeshOptions opt;
  opt.h = a.h;
  opt.smallest_edge_threshold = a.edge_threshold;
  opt.open_surface = a.open || file.open_surface();
  opt.anisotropy_threshold = a.anisotropy;
  opt.normalize_quadrics = !file.normalized();
  const MeshResult r = mesh_elements(file.elements, opt);
  if (r.boundary.mesh.triangles.empty()) std::cerr << R"({"warning":"culling removed every triangle"})" << "\n";
  write_mesh(a.out, r.boundary.mesh);
}

struct LiteArgs {
  std::string in, out, json;
  int levels = 1;
  int res = 32;
};

void run_lite(const LiteArgs& a) {
  const PoNQFile file = read_ponq(std::filesystem::path(a.in));
  const Hierarchy h = coarsen_grid(file.elements, a.res, a.levels);
  PoNQFile out;
  out.flags = file.flags;
  out.elements = h.levels.back();
  write_ponq(std::filesystem::path(a.out), out);
  if (!a.json.empty()) write_json(a.json, to_json(out));
}

struct EvalArgs {
  std::string a, b, out;
  EvalOptions opt;
};

void run_eval(const EvalArgs& a) {
  const TriMesh mesh = read_mesh(a.a);
  const TriMesh truth = read_mesh(a.b);
  write_json(a.out, to_json(evaluate_mesh(mesh, truth, a.opt)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-normal-quadric surface reconstruction"};
  app.footer(exit_code_help());
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Sample a mesh (OBJ/PLY) into oriented points (PLY)");
  sample->add_option("in_mesh", sa.in, "Input mesh")->required()->check(CLI::ExistingFile);
  sample->add_option("out_samples", sa.out, "Output sample PLY")->required();
  sample->add_option("--count", sa.count, "Surface sample count (default 1024*32^2)")->check(CLI::PositiveNumber);
  sample->add_option("--seed", sa.seed, "Random seed");
  sample->add_flag("--open-boundary", sa.open_boundary, "Add boundary samples and their rotated copies");
  sample->add_option("--boundary-count", sa.boundary_count, "Boundary sample count (default count/8)");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit PoNQ elements to a sample PLY");
  fit->add_option("in_samples", fa.in, "Input sample PLY")->required()->check(CLI::ExistingFile);
  fit->add_option("out_ponq", fa.out, "Output PoNQ file")->required();
  fit->add_option("--res", fa.res, "Initialization grid resolution")->check(CLI::Range(1, 1024));
  fit->add_option("--epochs", fa.epochs, "Adam epochs")->check(CLI::Range(1, 1000000));
  fit->add_option("--lr", fa.lr, "Learning rate (default half the grid spacing)")->check(CLI::NonNegativeNumber);
  fit->add_option("--seed", fa.seed, "Random seed");
  fit->add_option("--json", fa.json, "Also write a JSON dump of the elements");

  MeshArgs ma;
  auto* mesh = app.add_subcommand("mesh", "Extract a triangle mesh from a PoNQ file");
  mesh->add_option("in_ponq", ma.in, "Input PoNQ file")->required()->check(CLI::ExistingFile);
  mesh->add_option("out_mesh", ma.out, "Output mesh (.obj or .ply)")->required();
  mesh->add_option("--edge-threshold", ma.edge_threshold,
                   "Smallest-edge rule threshold (default 4x median vertex spacing)")
      ->check(CLI::NonNegativeNumber);
  mesh->add_option("--h", ma.h, "Quadric score weight (default inverse squared vertex spacing)")
      ->check(CLI::NonNegativeNumber);
  mesh->add_flag("--open", ma.open, "Cull anisotropic triangles to open the boundaries");
  mesh->add_option("--anisotropy", ma.anisotropy, "Culling threshold on lambda2/lambda1")->check(CLI::Range(0.0, 1.0));

  LiteArgs la;
  auto* lite = app.add_subcommand("lite", "Pool PoNQ elements over 2x2x2 cell blocks");
  lite->add_option("in_ponq", la.in, "Input PoNQ file")->required()->check(CLI::ExistingFile);
  lite->add_option("out_ponq", la.out, "Output PoNQ file")->required();
  lite->add_option("--levels", la.levels, "Number of halvings")->check(CLI::Range(1, 10));
  lite->add_option("--res", la.res, "Grid resolution of the input fit")->check(CLI::Range(1, 1024));
  lite->add_option("--json", la.json, "Also write a JSON dump of the elements");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Compare a mesh against a reference mesh");
  eval->add_option("mesh_a", ea.a, "Evaluated mesh")->required()->check(CLI::ExistingFile);
  eval->add_option("mesh_b", ea.b, "Reference mesh")->required()->check(CLI::ExistingFile);
  eval->add_option("out_json", ea.out, "Output report")->required();
  eval->add_option("--f1", ea.opt.f1_threshold, "F-score distance threshold")->check(CLI::PositiveNumber);
  eval->add_option("--ef1", ea.opt.ef1_threshold, "Edge F-score distance threshold")->check(CLI::PositiveNumber);
  eval->add_option("--edge-angle", ea.opt.edge_angle, "Sharp-edge dihedral angle (radians)")
      ->check(CLI::Range(0.0, std::numbers::pi));
  eval->add_option("--samples", ea.opt.samples, "Samples per mesh")->check(CLI::PositiveNumber);
  eval->add_option("--edge-samples", ea.opt.edge_samples, "Sharp-edge samples per mesh")->check(CLI::PositiveNumber);
  eval->add_option("--seed", ea.opt.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sample) run_sample(sa);
    if (*fit) run_fit(fa);
    if (*mesh) run_mesh(ma);
    if (*lite) run_lite(la);
    if (*eval) run_eval(ea);
  } catch (const Error& e) {
    std::cerr << error_json(e).dump() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "unexpected"}, {"message", e.what()}}.dump() << "\n";
    return kExitUnexpected;
  }
  return 0;
}
