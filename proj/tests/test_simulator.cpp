#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "airwaynav/simulator.hpp"

using namespace airwaynav;

namespace {

AirwayTree load_phantom() {
    std::ifstream in(std::string(AIRWAYNAV_DATA_DIR) + "/phantom_tree.json");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_tree_document(buf.str());
}

bool adjacent_or_equal(const AirwayTree& tree, int a, int b) {
    if (a == b) return true;
    for (int v : tree.adjacency[a])
        if (v == b) return true;
    return false;
}

double frame_accuracy(const SimulatedSequence& seq) {
    std::size_t hits = 0;
    for (std::size_t n = 0; n < seq.likelihoods.frames(); ++n) {
        const auto row = seq.likelihoods.p.row(n);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c)
            if (row[c] > row[best]) best = c;
        hits += (static_cast<int>(best) == seq.truth[n]);
    }
    return static_cast<double>(hits) / static_cast<double>(seq.likelihoods.frames());
}

} // namespace

TEST_CASE("walks are valid tree walks anchored at the root", "[simulator]") {
    const auto tree = load_phantom();
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        WalkConfig cfg;
        cfg.frames = 200;
        cfg.dwell = 10.0;
        cfg.seed = seed;
        const auto seq = simulate_walk(tree, cfg);
        REQUIRE(seq.truth.size() == 200);
        REQUIRE(seq.truth.front() == tree.root);
        REQUIRE(seq.truth.back() == tree.root);
        for (std::size_t n = 1; n < seq.truth.size(); ++n)
            REQUIRE(adjacent_or_equal(tree, seq.truth[n - 1], seq.truth[n]));
    }
}

TEST_CASE("without return-to-root the walk may end anywhere but stays a walk", "[simulator]") {
    const auto tree = load_phantom();
    WalkConfig cfg;
    cfg.frames = 50;
    cfg.dwell = 2.0;
    cfg.seed = 9;
    cfg.return_to_root = false;
    const auto seq = simulate_walk(tree, cfg);
    REQUIRE(seq.truth.front() == tree.root);
    for (std::size_t n = 1; n < seq.truth.size(); ++n)
        REQUIRE(adjacent_or_equal(tree, seq.truth[n - 1], seq.truth[n]));
}

TEST_CASE("same seed reproduces the sequence bit for bit", "[simulator]") {
    const auto tree = load_phantom();
    WalkConfig cfg;
    cfg.frames = 300;
    cfg.dwell = 15.0;
    cfg.seed = 1234;
    const auto a = simulate_walk(tree, cfg);
    const auto b = simulate_walk(tree, cfg);
    REQUIRE(a.truth == b.truth);
    REQUIRE(a.logits == b.logits);
    REQUIRE(a.likelihoods.p == b.likelihoods.p);

    cfg.seed = 1235;
    const auto c = simulate_walk(tree, cfg);
    REQUIRE(a.truth != c.truth);
}

TEST_CASE("noise-free limit pins the argmax to the truth", "[simulator]") {
    const auto tree = load_phantom();
    WalkConfig cfg;
    cfg.frames = 300;
    cfg.dwell = 8.0;
    cfg.noise = 1e6;
    cfg.seed = 3;
    const auto seq = simulate_walk(tree, cfg);
    REQUIRE(frame_accuracy(seq) == 1.0);
}

TEST_CASE("likelihood rows are valid probability vectors at any noise", "[simulator]") {
    const auto tree = load_phantom();
    for (double noise : {0.05, 0.5, kDefaultNoise, 20.0}) {
        WalkConfig cfg;
        cfg.frames = 120;
        cfg.dwell = 5.0;
        cfg.noise = noise;
        cfg.seed = 77;
        const auto seq = simulate_walk(tree, cfg);  // from_matrix validated already
        for (std::size_t n = 0; n < seq.likelihoods.frames(); ++n) {
            double sum = 0.0;
            for (double v : seq.likelihoods.p.row(n)) sum += v;
            REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-9));
        }
    }
}

TEST_CASE("frozen default noise lands frame accuracy in the target band", "[simulator]") {
    const auto tree = load_phantom();
    double total = 0.0;
    for (std::uint64_t seed = 1001; seed <= 1020; ++seed) {
        WalkConfig cfg;
        cfg.frames = 2000;
        cfg.dwell = 100.0;
        cfg.seed = seed;
        total += frame_accuracy(simulate_walk(tree, cfg));
    }
    const double mean = total / 20.0;
    REQUIRE(mean >= 0.7);
    REQUIRE(mean <= 0.85);
}

TEST_CASE("impossible return window is rejected", "[simulator]") {
    const auto tree = load_phantom();
    WalkConfig cfg;
    cfg.frames = 2;
    cfg.dwell = 1.0;  // forced move every frame: cannot sit at the root
    cfg.seed = 0;
    REQUIRE_THROWS_AS(simulate_walk(tree, cfg), ValidationError);
}

TEST_CASE("config validation", "[simulator]") {
    const auto tree = load_phantom();
    WalkConfig cfg;
    cfg.frames = 1;
    REQUIRE_THROWS_AS(simulate_walk(tree, cfg), ValidationError);
    cfg.frames = 10;
    cfg.dwell = 0.5;
    REQUIRE_THROWS_AS(simulate_walk(tree, cfg), ValidationError);
    cfg.dwell = 5.0;
    cfg.noise = 0.0;
    REQUIRE_THROWS_AS(simulate_walk(tree, cfg), ValidationError);
}

TEST_CASE("enumeration oracle hand cases", "[simulator]") {
    CostModel cost;
    cost.data = Matrix(2, 2, 0.5);
    cost.reg.values = Matrix(2, 2, 1.0);
    cost.lambda = 1.0;
    const auto [path, value] = enumerate_map_oracle(cost);
    REQUIRE(path == std::vector<int>{0, 0});  // all costs equal: lexicographic
    REQUIRE_THAT(value, Catch::Matchers::WithinAbs(2.0, 1e-12));

    // dominant data term at lambda = 0: per-frame argmin
    cost.data(0, 1) = 0.1;
    cost.data(1, 0) = 0.2;
    cost.lambda = 0.0;
    const auto [path2, value2] = enumerate_map_oracle(cost);
    REQUIRE(path2 == std::vector<int>{1, 0});
    REQUIRE_THAT(value2, Catch::Matchers::WithinAbs(0.3, 1e-12));

    // size guard
    cost.data = Matrix(30, 5, 0.1);
    cost.reg.values = Matrix(5, 5, 1.0);
    REQUIRE_THROWS_AS(enumerate_map_oracle(cost), ValidationError);
}
