// pixie: command-line front end for the grid toolchain.
//
//   pixie grid gen --width 9 --levels 5 --bits 8 -o grid.json
//   pixie grid stats grid.json
//   pixie grid netlist grid.json -o netlist.json
//   pixie compile --graph g.json --grid grid.json --config cfg.json --bitstream cfg.pxv
//   pixie bitstream encode --grid grid.json --config cfg.json -o cfg.pxv
//   pixie bitstream decode --grid grid.json --bitstream cfg.pxv -o cfg.json
//   pixie sim --grid grid.json --bitstream cfg.pxv --frames frames.json -o out.json [--trace t.csv]
//   pixie sobel --input in.pgm --mask gx -o out.pgm [--compare-reference]
//
// Exit codes: 0 success, 1 usage, 2 validation/infeasibility, 3 I/O.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pixie/pixie.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  const auto text = read_text(path);
  return {text.begin(), text.end()};
}

void write_bytes(const std::string& path, const void* data, std::size_t size) {
  if (path.empty() || path == "-") {
    std::cout.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("failed writing " + path);
}

void write_text(const std::string& path, const std::string& text) { write_bytes(path, text.data(), text.size()); }

void write_json(const std::string& path, const pixie::Json& doc) { write_text(path, doc.dump(2) + "\n"); }

pixie::GridSpec load_grid(const std::string& path) {
  auto spec = pixie::parse_grid(read_text(path));
  pixie::require_valid(spec);
  return spec;
}

std::vector<pixie::Frame> load_frames(const std::string& path) {
  const auto doc = pixie::detail::parse_json(read_text(path), "frames");
  const auto& arr = pixie::detail::as_array(doc, "frames");
  std::vector<pixie::Frame> frames;
  for (std::size_t f = 0; f < arr.size(); ++f) {
    const std::string at = "frames/" + std::to_string(f);
    auto& frame = frames.emplace_back();
    for (std::size_t i = 0; i < pixie::detail::as_array(arr[f], at).size(); ++i)
      frame.push_back(pixie::detail::as_signed(arr[f][i], at + "/" + std::to_string(i)));
  }
  return frames;
}

pixie::Json results_to_json(const pixie::RunResult& r) {
  pixie::Json outputs = pixie::Json::array();
  for (const auto& out : r.outputs) {
    pixie::Json row = pixie::Json::array();
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      if (out.valid[i]) {
        row.push_back(out.values[i]);
      } else {
        row.push_back(nullptr);
      }
    }
    outputs.push_back(std::move(row));
  }
  pixie::Json doc = pixie::Json::object();
  doc["outputs"] = std::move(outputs);
  doc["cycles"] = r.cycles;
  doc["div_by_zero"] = r.div_by_zero;
  return doc;
}

struct Options {
  // grid
  std::size_t width = 0, levels = 0;
  unsigned bits = 0;
  std::size_t memory_inputs = 0;
  std::string grid_path, output_path;
  // compile / bitstream / sim
  std::string graph_path, config_path, bitstream_path, frames_path, trace_path;
  // sobel
  std::string input_path, kernel_path, mask = "gx", emit_graph_path;
  bool compare_reference = false;
};

int cmd_grid_gen(const Options& o) {
  auto spec = pixie::generate_rectangular(o.width, o.levels, o.bits);
  if (o.memory_inputs != 0) spec.memory_input_count = o.memory_inputs;
  pixie::require_valid(spec);
  write_json(o.output_path, pixie::grid_to_json(spec));
  return 0;
}

int cmd_grid_stats(const Options& o) {
  const auto spec = load_grid(o.grid_path);
  const auto s = pixie::grid_stats(spec);
  std::cout << s.total_pe_slots << " PE slots, " << s.intermediate_channel_count << " channels, "
            << s.total_config_bits << " configuration bits\n";
  return 0;
}

int cmd_grid_netlist(const Options& o) {
  write_text(o.output_path, pixie::export_netlist(load_grid(o.grid_path)));
  return 0;
}

int cmd_compile(const Options& o) {
  const auto graph = pixie::parse_graph(read_text(o.graph_path));
  const auto spec = load_grid(o.grid_path);

  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = pixie::map_to_grid(graph, spec);
  const auto t1 = std::chrono::steady_clock::now();
  const auto bits = pixie::encode(cfg, spec);

  write_json(o.config_path, pixie::config_to_json(cfg));
  const auto bytes = pixie::serialize(bits);
  write_bytes(o.bitstream_path, bytes.data(), bytes.size());

  std::size_t used = 0, slots = 0;
  for (const auto& level : cfg.pe_configs)
    for (auto op : level) {
      ++slots;
      used += op != pixie::Opcode::None;
    }
  std::cout << "mapped " << used << " of " << slots << " PE slots, " << pixie::grid_stats(spec).total_config_bits
            << " configuration bits\n";
  std::cerr << "mapping time: " << std::chrono::duration<double, std::milli>(t1 - t0).count() << " ms\n";
  return 0;
}

int cmd_bitstream_encode(const Options& o) {
  const auto spec = load_grid(o.grid_path);
  const auto cfg = pixie::parse_config(read_text(o.config_path));
  const auto bytes = pixie::serialize(pixie::encode(cfg, spec));
  write_bytes(o.output_path, bytes.data(), bytes.size());
  return 0;
}

int cmd_bitstream_decode(const Options& o) {
  const auto spec = load_grid(o.grid_path);
  const auto bytes = read_bytes(o.bitstream_path);
  write_json(o.output_path, pixie::config_to_json(pixie::decode(pixie::deserialize(bytes), spec)));
  return 0;
}

int cmd_sim(const Options& o) {
  const auto spec = load_grid(o.grid_path);
  const auto cfg = pixie::decode(pixie::deserialize(read_bytes(o.bitstream_path)), spec);
  const auto frames = load_frames(o.frames_path);
  std::vector<pixie::TraceRow> rows;
  std::function<void(const pixie::SimGrid&)> on_step;
  if (!o.trace_path.empty()) on_step = [&rows](const pixie::SimGrid& g) { rows.push_back(pixie::trace(g)); };
  const auto result = pixie::run(spec, cfg, frames, on_step);
  write_json(o.output_path, results_to_json(result));
  if (!o.trace_path.empty()) {
    std::ostringstream csv;
    pixie::write_trace_csv(csv, spec, rows);
    write_text(o.trace_path, csv.str());
  }
  return 0;
}

int cmd_sobel(const Options& o) {
  if (!o.emit_graph_path.empty()) {
    write_json(o.emit_graph_path, pixie::graph_to_json(pixie::build_sobel_graph()));
    if (o.input_path.empty()) return 0;
  }
  if (o.input_path.empty() || o.output_path.empty()) throw CLI::ValidationError("--input and --output are required");

  const auto bytes = read_bytes(o.input_path);
  const auto img = pixie::load_pgm(bytes);
  const auto spec = o.grid_path.empty() ? pixie::generate_rectangular(o.width, o.levels, o.bits) : load_grid(o.grid_path);

  std::vector<pixie::Kernel3x3> kernels;
  if (!o.kernel_path.empty()) {
    kernels.push_back(pixie::parse_kernel(read_text(o.kernel_path)));
  } else if (o.mask == "gx") {
    kernels.push_back(pixie::kSobelGx);
  } else if (o.mask == "gy") {
    kernels.push_back(pixie::kSobelGy);
  } else {
    kernels = {pixie::kSobelGx, pixie::kSobelGy};
  }

  std::vector<pixie::Image> grid_out, ref_out;
  for (const auto& k : kernels) {
    grid_out.push_back(pixie::run_sobel_on_grid(img, k, spec));
    if (o.compare_reference) ref_out.push_back(pixie::sobel_reference(img, k));
  }
  const auto result = grid_out.size() == 1 ? grid_out[0] : pixie::gradient_magnitude(grid_out[0], grid_out[1]);
  const auto pgm = pixie::save_pgm(result);
  write_bytes(o.output_path, pgm.data(), pgm.size());

  if (o.compare_reference) {
    std::size_t mismatches = 0;
    for (std::size_t n = 0; n < grid_out.size(); ++n)
      for (std::size_t i = 0; i < grid_out[n].pixels.size(); ++i)
        mismatches += grid_out[n].pixels[i] != ref_out[n].pixels[i];
    if (mismatches != 0) {
      std::cerr << "pixie: " << mismatches << " pixels differ from the software reference\n";
      return kExitInvalid;
    }
    std::cerr << "reference comparison passed (" << img.width << "x" << img.height << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid generator, mapper and cycle-level simulator for a virtual CGRA"};
  app.require_subcommand(1);
  Options o;
  std::function<int(const Options&)> action;

  auto* grid = app.add_subcommand("grid", "Grid architectures");
  grid->require_subcommand(1);
  auto* gen = grid->add_subcommand("gen", "Generate a rectangular grid spec");
  gen->add_option("--width", o.width, "PEs per level")->required();
  gen->add_option("--levels", o.levels, "Number of levels")->required();
  gen->add_option("--bits", o.bits, "Data bitwidth")->required();
  gen->add_option("--memory-inputs", o.memory_inputs, "Override the memory interface word count");
  gen->add_option("-o,--output", o.output_path, "Output file (default stdout)");
  gen->callback([&] { action = cmd_grid_gen; });

  auto* stats = grid->add_subcommand("stats", "Print grid statistics");
  stats->add_option("grid", o.grid_path, "Grid spec file")->required();
  stats->callback([&] { action = cmd_grid_stats; });

  auto* netlist = grid->add_subcommand("netlist", "Export the structural netlist");
  netlist->add_option("grid", o.grid_path, "Grid spec file")->required();
  netlist->add_option("-o,--output", o.output_path, "Output file (default stdout)");
  netlist->callback([&] { action = cmd_grid_netlist; });

  auto* compile = app.add_subcommand("compile", "Map a task graph onto a grid");
  compile->add_option("--graph", o.graph_path, "Task graph file")->required();
  compile->add_option("--grid", o.grid_path, "Grid spec file")->required();
  compile->add_option("--config", o.config_path, "Output config JSON")->required();
  compile->add_option("--bitstream", o.bitstream_path, "Output bitstream")->required();
  compile->callback([&] { action = cmd_compile; });

  auto* bitstream = app.add_subcommand("bitstream", "Virtual bitstream conversion");
  bitstream->require_subcommand(1);
  auto* enc = bitstream->add_subcommand("encode", "Config JSON to bitstream");
  enc->add_option("--grid", o.grid_path, "Grid spec file")->required();
  enc->add_option("--config", o.config_path, "Config JSON")->required();
  enc->add_option("-o,--output", o.output_path, "Output bitstream")->required();
  enc->callback([&] { action = cmd_bitstream_encode; });
  auto* dec = bitstream->add_subcommand("decode", "Bitstream to config JSON");
  dec->add_option("--grid", o.grid_path, "Grid spec file")->required();
  dec->add_option("--bitstream", o.bitstream_path, "Bitstream file")->required();
  dec->add_option("-o,--output", o.output_path, "Output config JSON (default stdout)");
  dec->callback([&] { action = cmd_bitstream_decode; });

  auto* sim = app.add_subcommand("sim", "Run frames through a configured grid");
  sim->add_option("--grid", o.grid_path, "Grid spec file")->required();
  sim->add_option("--bitstream", o.bitstream_path, "Bitstream file")->required();
  sim->add_option("--frames", o.frames_path, "Frames JSON (array of arrays)")->required();
  sim->add_option("-o,--output", o.output_path, "Results JSON (default stdout)");
  sim->add_option("--trace", o.trace_path, "Write a per-cycle CSV trace");
  sim->callback([&] { action = cmd_sim; });

  auto* sobel = app.add_subcommand("sobel", "Edge detection through the simulated grid");
  o.width = 9;
  o.levels = 5;
  o.bits = 16;
  sobel->add_option("--input", o.input_path, "Input PGM");
  sobel->add_option("--kernel", o.kernel_path, "Kernel JSON (9 integers, row-major)");
  sobel->add_option("--mask", o.mask, "Built-in mask when no --kernel: gx, gy or magnitude")
      ->check(CLI::IsMember({"gx", "gy", "magnitude"}));
  sobel->add_option("--grid", o.grid_path, "Grid spec file (overrides --width/--levels/--bits)");
  sobel->add_option("--width", o.width, "Rectangular grid width")->capture_default_str();
  sobel->add_option("--levels", o.levels, "Rectangular grid levels")->capture_default_str();
  sobel->add_option("--bits", o.bits, "Rectangular grid bitwidth")->capture_default_str();
  sobel->add_option("-o,--output", o.output_path, "Output PGM");
  sobel->add_flag("--compare-reference", o.compare_reference, "Fail if any pixel differs from the software path");
  sobel->add_option("--emit-graph", o.emit_graph_path, "Also write the mask task graph JSON");
  sobel->callback([&] { action = cmd_sobel; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    return action(o);
  } catch (const CLI::Error& e) {
    std::cerr << "pixie: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "pixie: " << e.what() << "\n";
    return kExitIo;
  } catch (const pixie::Error& e) {
    std::cerr << "pixie: " << e.what() << "\n";
    return kExitInvalid;
  }
}
