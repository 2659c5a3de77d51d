#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sogm/core/map_io.hpp"
#include "sogm/geo/raster.hpp"
#include "sogm/sim/pipeline.hpp"

namespace {

std::ifstream open_input(const std::string& path, bool binary = true) {
    std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
    if (!is)
        throw sogm::Error(sogm::ErrorCode::BadConfig, "cannot open " + path);
    return is;
}

int cmd_info(const std::string& map_path) {
    auto is = open_input(map_path);
    const sogm::SemanticGrid grid = sogm::load_map(is);
    const auto& s = grid.spec();
    std::cout << "width=" << s.width_cells << "\n"
              << "height=" << s.height_cells << "\n"
              << "layers=" << s.layers() << "\n"
              << "resolution=" << s.resolution << "\n"
              << "origin_x=" << s.origin_x << "\n"
              << "origin_y=" << s.origin_y << "\n";
    for (const auto& name : s.layer_names)
        std::cout << "layer_name=" << name << "\n";
    return 0;
}

int cmd_render(const std::string& map_path, const std::string& layer,
               const std::string& out_path) {
    auto is = open_input(map_path);
    const sogm::SemanticGrid grid = sogm::load_map(is);
    const int l = grid.spec().layer_index(layer);
    if (l < 0)
        throw sogm::Error(sogm::ErrorCode::UnknownLayer, "no such layer: " + layer);
    std::ofstream os(out_path, std::ios::binary);
    if (!os)
        throw sogm::Error(sogm::ErrorCode::BadConfig, "cannot write " + out_path);
    sogm::render_layer_pgm(grid, l, os);
    return 0;
}

int cmd_fuse(const std::string& map_path, const std::string& patch_path) {
    sogm::SemanticGrid grid = [&] {
        auto is = open_input(map_path);
        return sogm::load_map(is);
    }();
    auto ps = open_input(patch_path);
    grid.apply_patch(sogm::load_patch(ps));
    std::ofstream os(map_path, std::ios::binary);
    sogm::save_map(grid, os);
    return 0;
}

int cmd_decompose(const std::string& raster_path, const std::string& legend_path,
                  const std::string& out_dir) {
    auto rs = open_input(raster_path, false);
    sogm::ClassifiedRaster raster = sogm::load_raster(rs);
    auto ls = open_input(legend_path, false);
    sogm::load_legend(ls, raster);
    std::filesystem::create_directories(out_dir);
    for (const auto& patch : sogm::decompose_classes(raster)) {
        std::ofstream os(std::filesystem::path(out_dir) / (patch.layer_name + ".ismp"),
                         std::ios::binary);
        sogm::save_patch(patch, os);
    }
    return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 long seed_override, bool no_error_propagation) {
    auto is = open_input(scenario_path, false);
    sogm::Scenario sc = sogm::load_scenario(is);
    if (seed_override >= 0) sc.seed = static_cast<uint64_t>(seed_override);
    sogm::RunOptions opt;
    opt.error_propagation = !no_error_propagation;
    opt.out_dir = out_dir;
    const sogm::RunResult result = sogm::run_pipeline(sc, opt);
    for (const auto& st : result.report.layers)
        std::cout << "layer " << st.name << ": occupied=" << st.occupied
                  << " free=" << st.free << " informative=" << st.informative << "\n";
    std::cout << "conflict: max=" << result.report.conflict_max
              << " cells>0.3=" << result.report.conflict_over_03 << "\n";
    std::cout << "wrote " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic occupancy grid mapping tool"};
    app.require_subcommand(1);

    std::string map_path, patch_path, layer, out_path, raster_path, legend_path;
    std::string scenario_path, out_dir;
    long seed_override = -1;
    bool no_error_propagation = false;

    auto* info = app.add_subcommand("info", "print a map header");
    info->add_option("map", map_path)->required();

    auto* render = app.add_subcommand("render", "export one layer as P5 graymap");
    render->add_option("--map", map_path)->required();
    render->add_option("--layer", layer)->required();
    render->add_option("-o,--output", out_path)->required();

    auto* fuse = app.add_subcommand("fuse", "apply a patch file to a map in place");
    fuse->add_option("--map", map_path)->required();
    fuse->add_option("--patch", patch_path)->required();

    auto* decompose = app.add_subcommand("decompose", "split a classified raster into per-class patches");
    decompose->add_option("--raster", raster_path)->required();
    decompose->add_option("--legend", legend_path)->required();
    decompose->add_option("--out", out_dir)->required();

    auto* simulate = app.add_subcommand("simulate", "run a scenario end to end");
    simulate->add_option("--scenario", scenario_path)->required();
    simulate->add_option("--out", out_dir)->required();
    simulate->add_option("--seed", seed_override);
    simulate->add_flag("--no-error-propagation", no_error_propagation);

    CLI11_PARSE(app, argc, argv);

    try {
        if (info->parsed()) return cmd_info(map_path);
        if (render->parsed()) return cmd_render(map_path, layer, out_path);
        if (fuse->parsed()) return cmd_fuse(map_path, patch_path);
        if (decompose->parsed()) return cmd_decompose(raster_path, legend_path, out_dir);
        if (simulate->parsed())
            return cmd_simulate(scenario_path, out_dir, seed_override, no_error_propagation);
    } catch (const sogm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_parse_error() ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
