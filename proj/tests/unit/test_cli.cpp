#include <doctest.h>

#include <cstdlib>
#include <regex>
#include <set>
#include <sstream>

#include "lsc/cli.hpp"
#include "lsc/graph.hpp"
#include "lsc/io.hpp"
#include "lsc/manifest.hpp"
#include "lsc/render.hpp"
#include "lsc/rf_eval.hpp"
#include "lsc/trainer.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace lsc;
namespace fs = std::filesystem;
namespace o = lsc::oracle;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "lsc");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> parse_summary(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

/// Minimal well-formedness check: balanced, properly nested tags.
bool well_formed_xml(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t pos = 0;
    while ((pos = text.find('<', pos)) != std::string::npos) {
        const std::size_t end = text.find('>', pos);
        if (end == std::string::npos) return false;
        const std::string tag = text.substr(pos + 1, end - pos - 1);
        pos = end + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;
        if (tag.back() == '/') continue;
        if (tag[0] == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
    }
    return stack.empty();
}

fs::path small_image(const fs::path& dir) {
    Tensor img({64, 64});
    CounterRng rng(12);
    for (double& v : img.data()) v = rng.uniform();
    const auto path = dir / "noise.pgm";
    save_pgm(img, path);
    return path;
}

} // namespace

TEST_CASE("usage errors exit with 2") {
    const auto dir = test::scratch_dir("cli_usage");
    const auto img = small_image(dir).string();
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"train", "--data", img, "--penalty", "l2", "--out", (dir / "m").string()}).code == 2);
    CHECK(cli({"train", "--data", img, "--lr", "-1", "--out", (dir / "m").string()}).code == 2);
    CHECK(cli({"eval", "--model", (dir / "m").string(), "--bins", "1", "--out", (dir / "e").string()}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("runtime failures exit with 1") {
    const auto dir = test::scratch_dir("cli_runtime");
    CHECK(cli({"eval", "--model", (dir / "missing").string(), "--out", (dir / "e").string()}).code == 1);
    CHECK(cli({"train", "--data", (dir / "nope.pgm").string(), "--out", (dir / "m").string()}).code == 1);
    const auto r = cli({"render", "--tensor", (dir / "nope.sct").string(), "--out", (dir / "x.svg").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("nope.sct") != std::string::npos);
}

TEST_CASE("train and eval produce their files") {
    const auto dir = test::scratch_dir("cli_train");
    const auto img = small_image(dir).string();
    const auto prefix = (dir / "model").string();
    const auto t = cli({"train", "--data", img, "--penalty", "wl", "--patch-size", "4", "--num-atoms", "9",
                        "--epochs", "2", "--batch-size", "30", "--seed", "3", "--out", prefix});
    REQUIRE(t.code == 0);
    for (const char* ext : {".sct", ".meta", ".loss.csv", ".manifest.txt"}) CHECK(fs::exists(prefix + ext));
    CHECK(load_tensor(prefix + ".sct").dims() == std::vector<std::size_t>{16, 9});
    CHECK(read_text_file(prefix + ".loss.csv").rfind("batch,loss\n", 0) == 0);

    CHECK(cli({"verify", "--manifest", prefix + ".manifest.txt"}).code == 0);
    save_pgm(Tensor({64, 64}, 0.5), img);
    const auto v = cli({"verify", "--manifest", prefix + ".manifest.txt"});
    CHECK(v.code == 1);
    CHECK(v.out.find("mismatch") != std::string::npos);
}

TEST_CASE("eval conserves neurons for both sources") {
    const auto dir = test::scratch_dir("cli_eval");
    // A model whose atoms are Gabors; the L1 encoder's STA recovers them.
    TrainedModel model;
    model.config.num_atoms = 9;
    model.config.patch_side = 8;
    model.config.encoder.penalty.kind = PenaltyKind::L1;
    model.config.encoder.penalty.lambda = 0.5;
    model.dictionary.patch_side = 8;
    model.dictionary.atoms.resize(64, 9);
    for (int j = 0; j < 9; ++j) {
        GaborParams g;
        g.amplitude = 1.0;
        g.u0 = g.v0 = 3.5;
        g.theta = j * 0.35;
        g.freq = 0.2;
        g.phase = 0.4 * j - 1.5;
        g.sigma_x = g.sigma_y = 1.8;
        const Tensor img = render_gabor(g, 8);
        for (int i = 0; i < 64; ++i) model.dictionary.atoms(i, j) = img[static_cast<std::size_t>(i)];
        model.dictionary.atoms.col(j).normalize();
    }
    model.dictionary.atoms.col(8).setZero();
    model.dictionary.atoms(0, 8) = 1.0;  // a single-pixel atom never fits a Gabor
    const auto prefix = (dir / "gabors").string();
    save_model(model, prefix);

    for (const std::string source : {"sta", "atoms"}) {
        const auto out = prefix + "_" + source;
        const auto e = cli({"eval", "--model", prefix, "--source", source, "--samples", "20000", "--out", out});
        REQUIRE(e.code == 0);
        for (const char* ext : {".gabor.csv", ".phases.csv", ".summary.txt", ".manifest.txt"})
            CHECK(fs::exists(out + ext));
        auto kv = parse_summary(read_text_file(out + ".summary.txt"));
        CHECK(kv["source"] == source);
        CHECK(std::stoi(kv["neurons"]) == 9);
        CHECK(std::stoi(kv["dead"]) + std::stoi(kv["converged"]) + std::stoi(kv["non_converged"]) == 9);
        CHECK(std::stoi(kv["converged"]) >= 7);
        const std::string csv = read_text_file(out + ".gabor.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
    }

    model.dictionary.atoms.setZero();
    model.dictionary.atoms.row(0).setOnes();
    save_model(model, prefix + "_flat");
    CHECK(cli({"eval", "--model", prefix + "_flat", "--source", "atoms", "--out", prefix + "_flat"}).code == 1);
}

TEST_CASE("laplacian training defaults to k = 4") {
    const auto dir = test::scratch_dir("cli_lap");
    const auto img = small_image(dir).string();
    const auto prefix = (dir / "lap").string();
    REQUIRE(cli({"train", "--data", img, "--penalty", "lap", "--patch-size", "4", "--num-atoms", "6",
                 "--batch-size", "20", "--out", prefix}).code == 0);
    CHECK(load_model(prefix).config.knn_k == 4);
    CHECK(read_text_file(prefix + ".manifest.txt").find("config.knn_k=4") != std::string::npos);
}

TEST_CASE("cluster recovers disjoint blocks") {
    const auto dir = test::scratch_dir("cli_cluster");
    // 2 + 2 atoms, 3 + 3 stimuli, codes only inside each block.
    Matrix codes = Matrix::Zero(4, 6);
    codes.block(0, 0, 2, 3).setConstant(0.5);
    codes.block(2, 3, 2, 3).setConstant(0.5);
    codes(0, 1) = 0.9;
    codes(1, 1) = 0.1;
    save_tensor(from_matrix(codes), dir / "codes.sct");
    const auto csv = (dir / "labels.csv").string();
    REQUIRE(cli({"cluster", "--codes", (dir / "codes.sct").string(), "--k", "2", "--out", csv}).code == 0);
    CHECK(read_text_file(csv) ==
          "vertex_id,side,label\n0,atom,0\n1,atom,0\n2,atom,1\n3,atom,1\n"
          "4,stimulus,0\n5,stimulus,0\n6,stimulus,0\n7,stimulus,1\n8,stimulus,1\n9,stimulus,1\n");
    CHECK(read_text_file(csv + ".manifest.txt").find("config.laplacian=unnormalized") != std::string::npos);

    REQUIRE(cli({"cluster", "--codes", (dir / "codes.sct").string(), "--k", "1", "--out", csv}).code == 0);
    CHECK(read_text_file(csv).find(",1\n") == std::string::npos);
    CHECK(cli({"cluster", "--codes", (dir / "codes.sct").string(), "--k", "11", "--out", csv}).code == 2);
}

TEST_CASE("cluster stimuli on a disconnected kNN graph") {
    const auto dir = test::scratch_dir("cli_stimuli");
    CounterRng rng(4);
    Matrix pts(2, 10);
    for (int i = 0; i < 10; ++i) {
        const double cx = i < 5 ? 0.0 : 100.0;
        pts(0, i) = cx + rng.normal();
        pts(1, i) = rng.normal();
    }
    save_tensor(from_matrix(pts), dir / "pts.sct");
    const auto csv = (dir / "labels.csv").string();
    REQUIRE(cli({"cluster", "--codes", (dir / "pts.sct").string(), "--mode", "stimuli", "--knn-k", "2", "--k",
                 "2", "--out", csv}).code == 0);
    int comps = 0;
    const auto truth = o::connected_components(knn_adjacency(pts, 2), &comps);
    REQUIRE(comps == 2);
    std::vector<int> labels;
    std::istringstream in(read_text_file(csv));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) labels.push_back(std::stoi(line.substr(line.rfind(',') + 1)));
    CHECK(o::same_partition(labels, truth));
}

TEST_CASE("render layout and SVG") {
    const auto dir = test::scratch_dir("cli_render");
    Matrix atoms = init_dictionary(64, 64, 1);
    atoms.col(5).setZero();
    const auto layout = filter_grid_layout(atoms, 8, 8);
    CHECK(layout.cols == 8);
    CHECK(layout.rows == 8);
    CHECK(layout.patch_side == 8);

    save_tensor(from_matrix(atoms), dir / "atoms.sct");
    const auto svg_path = (dir / "atoms.svg").string();
    REQUIRE(cli({"render", "--tensor", (dir / "atoms.sct").string(), "--cols", "8", "--out", svg_path}).code == 0);
    const std::string svg = read_text_file(svg_path);
    CHECK(well_formed_xml(svg));
    CHECK(svg.find("<svg") != std::string::npos);

    // The zero filter is a uniform mid-gray tile.
    const auto start = svg.find("<g id=\"filter5\"");
    REQUIRE(start != std::string::npos);
    const std::string group = svg.substr(start, svg.find("</g>", start) - start);
    const std::regex fill("fill=\"([^\"]+)\"");
    std::set<std::string> fills;
    for (auto it = std::sregex_iterator(group.begin(), group.end(), fill); it != std::sregex_iterator(); ++it)
        fills.insert((*it)[1]);
    CHECK(fills == std::set<std::string>{"rgb(128,128,128)"});

    save_tensor(Tensor({3, 4, 2}), dir / "cube.sct");
    CHECK(cli({"render", "--tensor", (dir / "cube.sct").string(), "--out", svg_path}).code == 2);
    save_tensor(Tensor({10, 2}), dir / "odd.sct");
    CHECK(cli({"render", "--tensor", (dir / "odd.sct").string(), "--out", svg_path}).code == 2);
}

TEST_CASE("installed binary reports exit codes") {
    const std::string bin = LSC_CLI_PATH;
    CHECK(std::system((bin + " train --data x --penalty nope --out y >/dev/null 2>&1").c_str()) != 0);
    CHECK(std::system((bin + " --help >/dev/null 2>&1").c_str()) == 0);
}
