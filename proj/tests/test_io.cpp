#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "frame/checkpoint.hpp"
#include "frame/config.hpp"
#include "frame/io.hpp"

using namespace frame;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("frame_io_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("binary primitives round-trip little-endian") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    io::write_u8(ss, 0xAB);
    io::write_u32(ss, 0xDEADBEEFu);
    io::write_u64(ss, 0x0123456789ABCDEFull);
    io::write_f32(ss, 1.5f);
    io::write_f64(ss, -2.75);
    io::write_string(ss, "frame");

    const std::string bytes = ss.str();
    CHECK(bytes[0] == static_cast<char>(0xAB));
    CHECK(bytes[1] == static_cast<char>(0xEF)); // low byte first
    CHECK(bytes[2] == static_cast<char>(0xBE));

    CHECK(io::read_u8(ss) == 0xAB);
    CHECK(io::read_u32(ss) == 0xDEADBEEFu);
    CHECK(io::read_u64(ss) == 0x0123456789ABCDEFull);
    CHECK(io::read_f32(ss) == 1.5f);
    CHECK(io::read_f64(ss) == -2.75);
    CHECK(io::read_string(ss) == "frame");

    CHECK_THROWS_AS(io::read_u32(ss), DataError); // stream exhausted
}

TEST_CASE("string reads guard against absurd lengths") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    io::write_u32(ss, 0xFFFFFFFFu);
    CHECK_THROWS_AS(io::read_string(ss), DataError);
}

TEST_CASE("real formatting is stable and round-trippable") {
    CHECK(io::format_real(0.0) == "0");
    CHECK(io::format_real(1.0) == "1");
    CHECK(io::format_real(-2.5) == "-2.5");
    CHECK(io::format_real(0.1) == io::format_real(0.1));
    // formatting then parsing is idempotent at the printed precision
    for (double v : {3.14159265358979, 1e-7, 123456.789, -0.000125}) {
        const std::string s = io::format_real(v);
        CHECK(io::format_real(std::stod(s)) == s);
    }
}

TEST_CASE("csv output is deterministic") {
    TempDir dir;
    auto path_a = dir.path / "a.csv";
    auto path_b = dir.path / "b.csv";
    for (const auto& p : {path_a, path_b}) {
        io::CsvWriter csv(p);
        csv.header({"step", "loss"});
        csv.row({"1", io::format_real(0.25)});
        csv.row({"2", io::format_real(1.0 / 3.0)});
        csv.flush();
    }
    CHECK(io::read_text_file(path_a) == io::read_text_file(path_b));
    const std::string text = io::read_text_file(path_a);
    CHECK(text.find("step,loss\n") == 0);
    CHECK(text.find("1,0.25\n") != std::string::npos);
}

TEST_CASE("graymap output clamps to the declared range") {
    TempDir dir;
    auto path = dir.path / "labels.pgm";
    io::write_pgm(path, {0, 1, 5, -2}, 2, 2, 3);
    std::istringstream is(io::read_text_file(path));
    std::string magic;
    std::int64_t w, h;
    int maxval;
    is >> magic >> w >> h >> maxval;
    CHECK(magic == "P2");
    CHECK(w == 2);
    CHECK(h == 2);
    CHECK(maxval == 3);
    int a, b, c, d;
    is >> a >> b >> c >> d;
    CHECK(a == 0);
    CHECK(b == 1);
    CHECK(c == 3);  // clamped down
    CHECK(d == 0);  // clamped up
}

TEST_CASE("svg bar charts are self-contained") {
    TempDir dir;
    auto path = dir.path / "chart.svg";
    io::write_svg_bars(path, "losses", {{"s1", 0.5}, {"s2", 0.25}});
    const std::string text = io::read_text_file(path);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("losses") != std::string::npos);
    CHECK(text.find("s2") != std::string::npos);
    CHECK(text.rfind("</svg>") != std::string::npos);
}

TEST_CASE("checkpoints round-trip bit-exactly at width 8") {
    TempDir dir;
    auto path = dir.path / "model.ckpt";
    ParamStore ps;
    Rng rng(61);
    ps.create_trunc_normal("enc.w", {3, 4}, rng);
    ps.create_trunc_normal("enc.b", {4}, rng);
    ps.create_trunc_normal("head.w", {4, 2}, rng);
    ps.get("head.w").values()[0] = 1e-17; // survives only at full width

    save_checkpoint(path, ps, "depth=2\nseed=5\n", 8);
    Checkpoint back = load_checkpoint(path);
    CHECK(back.config_text == "depth=2\nseed=5\n");
    CHECK(back.params.size() == 3);
    for (const auto& name : ps.names()) {
        REQUIRE(back.params.contains(name));
        CHECK(back.params.get(name).shape() == ps.get(name).shape());
        CHECK(back.params.get(name).values() == ps.get(name).values());
    }
    // loaded tensors are plain values, not live gradient leaves
    CHECK_FALSE(back.params.get("enc.w").requires_grad());
}

TEST_CASE("width-4 checkpoints quantize to f32 and then round-trip exactly") {
    TempDir dir;
    auto path = dir.path / "model4.ckpt";
    ParamStore ps;
    Rng rng(62);
    ps.create_trunc_normal("w", {2, 3}, rng);

    save_checkpoint(path, ps, "", 4);
    Checkpoint once = load_checkpoint(path);
    for (std::size_t i = 0; i < once.params.get("w").values().size(); ++i) {
        CHECK(once.params.get("w").values()[i] ==
              static_cast<double>(static_cast<float>(ps.get("w").values()[i])));
    }

    auto path2 = dir.path / "model4b.ckpt";
    save_checkpoint(path2, once.params, "", 4);
    Checkpoint twice = load_checkpoint(path2);
    CHECK(twice.params.get("w").values() == once.params.get("w").values());
}

TEST_CASE("checkpoint validation") {
    TempDir dir;
    auto path = dir.path / "model.ckpt";
    ParamStore ps;
    ps.create("w", {1, 1});
    save_checkpoint(path, ps, "", 8);

    SUBCASE("bad magic") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.put('X');
        f.close();
        CHECK_THROWS_AS(load_checkpoint(path), DataError);
    }
    SUBCASE("bad version") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(8);
        f.put(9);
        f.close();
        CHECK_THROWS_AS(load_checkpoint(path), DataError);
    }
    SUBCASE("bad scalar width") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(12);
        f.put(7);
        f.close();
        CHECK_THROWS_AS(load_checkpoint(path), DataError);
    }
    SUBCASE("truncation") {
        std::filesystem::resize_file(path, std::filesystem::file_size(path) - 2);
        CHECK_THROWS_AS(load_checkpoint(path), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_checkpoint(dir.path / "none.ckpt"), DataError);
    }
    SUBCASE("unsupported width at save") {
        CHECK_THROWS_AS(save_checkpoint(dir.path / "x.ckpt", ps, "", 2), ConfigError);
    }
}

TEST_CASE("run configuration parsing") {
    RunConfig rc;

    SUBCASE("typed setters") {
        rc.set("depth", "6");
        CHECK(rc.depth == 6);
        rc.set("base_lr", "0.5");
        CHECK(rc.base_lr == 0.5);
        rc.set("deterministic", "false");
        CHECK_FALSE(rc.deterministic);
        rc.set("deterministic", "true");
        CHECK(rc.deterministic);
        rc.set("data", "/tmp/clips");
        CHECK(rc.data == "/tmp/clips");
        rc.set("precision", "f64");
        CHECK(rc.precision == "f64");
    }

    SUBCASE("malformed values are rejected") {
        CHECK_THROWS_AS(rc.set("depth", "abc"), ConfigError);
        CHECK_THROWS_AS(rc.set("depth", "4.5"), ConfigError);
        CHECK_THROWS_AS(rc.set("depth", ""), ConfigError);
        CHECK_THROWS_AS(rc.set("base_lr", "fast"), ConfigError);
        CHECK_THROWS_AS(rc.set("deterministic", "maybe"), ConfigError);
        CHECK_THROWS_AS(rc.set("no_such_key", "1"), ConfigError);
    }

    SUBCASE("validation") {
        rc.validate();
        RunConfig bad = rc;
        bad.precision = "f16";
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = rc;
        bad.loss_dropout = true; // accepted key, unsupported behavior
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = rc;
        bad.grad_balance = true;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = rc;
        bad.memory_frames = -1;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = rc;
        bad.threads = 0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = rc;
        bad.steps = 0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = rc;
        bad.spatial_delta = -1;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = rc;
        bad.memory_frames = 0; // memoryless ablation stays legal
        bad.validate();
    }

    SUBCASE("echo parses back to an identical config") {
        rc.set("depth", "3");
        rc.set("base_lr", "0.025");
        rc.set("out", "results");
        const std::string echo = rc.echo();
        RunConfig back;
        std::istringstream lines(echo);
        std::string line;
        while (std::getline(lines, line)) {
            const auto eq = line.find('=');
            REQUIRE(eq != std::string::npos);
            back.set(line.substr(0, eq), line.substr(eq + 1));
        }
        CHECK(back.echo() == echo);
        CHECK(back.depth == 3);
        CHECK(back.base_lr == 0.025);
        CHECK(back.out == "results");
    }
}

TEST_CASE("config files support comments and blank lines") {
    TempDir dir;
    auto path = dir.path / "run.cfg";
    io::write_text_file(path,
                        "# training setup\n"
                        "\n"
                        "depth = 2\n"
                        "  base_lr=0.01  \n"
                        "out=exp1\n");
    RunConfig rc;
    rc.load_file(path);
    CHECK(rc.depth == 2);
    CHECK(rc.base_lr == 0.01);
    CHECK(rc.out == "exp1");

    auto bad = dir.path / "bad.cfg";
    io::write_text_file(bad, "depth = 2\nnot a key value line\n");
    RunConfig rc2;
    try {
        rc2.load_file(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    CHECK_THROWS_AS(rc.load_file(dir.path / "absent.cfg"), DataError);
}
