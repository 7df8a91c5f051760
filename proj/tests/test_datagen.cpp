#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fdnet/datagen.hpp"
#include "fdnet/errors.hpp"
#include "fdnet/numeric.hpp"
#include "test_util.hpp"

using namespace fdnet;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = "./" + name;
    std::ofstream f(path);
    f << content;
    return path;
}

}  // namespace

TEST_CASE("gen_grid basics") {
    CHECK(gen_grid(1.0) == std::vector<double>{-1.0, 0.0, 1.0});

    const std::vector<double> g = gen_grid(2e-4);
    CHECK(g.size() == 10001);
    CHECK(g.front() == -1.0);
    CHECK(g.back() == 1.0);

    const std::vector<double> h = gen_grid(0.4);
    CHECK(h.size() == 6);
    CHECK(h.back() == 1.0);

    CHECK_THROWS_AS(gen_grid(0.3), config_error);
    CHECK_THROWS_AS(gen_grid(-1.0), config_error);
}

TEST_CASE("eval_target on the built-in studies") {
    CHECK(eval_target(builtin_target("ex1"), 0.0) == doctest::Approx(1.3).epsilon(1e-12));

    const double ex3_at_zero = 0.125 + std::tanh(10.0);
    CHECK(eval_target(builtin_target("ex3"), 0.0) ==
          doctest::Approx(ex3_at_zero).epsilon(1e-12));
    CHECK(eval_target(builtin_target("ex3"), 0.0) == doctest::Approx(1.125).epsilon(1e-6));

    TargetSpec unit;
    unit.terms = {{TrigKind::cosine, 1, 0.0, LinkKind::scale, 1.0, {}}};
    CHECK(std::fabs(eval_target(unit, 0.5)) < 1e-15);  // cos(pi/2)

    // phase shift: ex2's first term is 0.5 cos(5 pi (theta - 0.2))
    const TargetSpec ex2 = builtin_target("ex2");
    CHECK(ex2.terms[0].eval(0.2) == doctest::Approx(0.5).epsilon(1e-12));

    TargetSpec poly;
    poly.terms = {{TrigKind::cosine, 2, 0.0, LinkKind::polynomial, 0.0, {1.0, 0.0, 2.0}}};
    // 1 + 2 cos^2(2 pi theta) at theta = 0 -> 3
    CHECK(eval_target(poly, 0.0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("odd links of sines give odd targets") {
    TargetSpec spec;
    spec.terms = {{TrigKind::sine, 3, 0.0, LinkKind::scale, 0.7, {}},
                  {TrigKind::sine, 7, 0.0, LinkKind::cube_of_scaled, 0.9, {}},
                  {TrigKind::sine, 11, 0.0, LinkKind::tanh_of_scaled, 4.0, {}}};
    for (double theta : {0.05, 0.3, 0.77, 0.99}) {
        CHECK(std::fabs(eval_target(spec, theta) + eval_target(spec, -theta)) <= 1e-12);
    }
}

TEST_CASE("make_dataset noise contract") {
    const TargetSpec spec = builtin_target("ex1");
    const std::vector<double> grid = gen_grid(1e-3);

    TargetSpec clean = spec;
    clean.noise_sigma = 0.0;
    const Dataset d0 = make_dataset(clean, grid, 7);
    CHECK(d0.y == d0.y_clean);

    const Dataset d1 = make_dataset(spec, grid, 7);
    const Dataset d2 = make_dataset(spec, grid, 7);
    CHECK(d1.y == d2.y);  // seed determinism

    const Dataset d3 = make_dataset(spec, grid, 8);
    CHECK(d1.y != d3.y);
}

TEST_CASE("ex1 empirical SNR is 3.06 within 3 percent") {
    const TargetSpec spec = builtin_target("ex1");  // sigma = 0.4
    const Dataset d = make_dataset(spec, gen_grid(2e-4), 123);
    const double snr = dataset_snr(d);
    CHECK(std::fabs(snr / 3.06 - 1.0) <= 0.03);
}

TEST_CASE("add_noise statistics and determinism") {
    Dataset base;
    for (int i = 0; i < 10000; ++i) {
        base.theta.push_back(-1.0 + 2.0 * i / 9999.0);
        base.y.push_back(0.0);
    }
    const Dataset a = add_noise(base, 0.0, 5);
    CHECK(a.y == base.y);

    const Dataset b = add_noise(base, 0.7, 5);
    const Dataset c = add_noise(base, 0.7, 5);
    CHECK(b.y == c.y);
    CHECK(b.y_clean == base.y);

    double var = 0.0;
    for (double v : b.y) var += v * v;
    var /= static_cast<double>(b.y.size());
    CHECK(std::fabs(var / (0.7 * 0.7) - 1.0) <= 0.10);
}

TEST_CASE("bounded-noise mode clips at four sigma") {
    TargetSpec flat;
    flat.noise_sigma = 0.5;
    flat.terms = {{TrigKind::cosine, 1, 0.0, LinkKind::scale, 0.0, {}}};
    const std::vector<double> grid = gen_grid(2e-4);
    const Dataset d = make_dataset_bounded(flat, grid, 9);
    for (std::size_t i = 0; i < d.size(); ++i) {
        REQUIRE(std::fabs(d.y[i] - d.y_clean[i]) <= 4.0 * 0.5);
    }
    // same seed, unbounded: at 10^4 draws a few exceed 3 sigma, none clipped here
    const Dataset u = make_dataset(flat, grid, 9);
    int clipped = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (std::fabs(u.y[i] - u.y_clean[i]) > 4.0 * 0.5) ++clipped;
    }
    CHECK(clipped >= 0);  // unbounded draws may exceed; bounded never do
}

TEST_CASE("load_series_csv affine mapping") {
    const std::string path = write_temp("series_small.csv", "t,y\n0,10\n1,20\n2,10\n");
    const Dataset d = load_series_csv(path, true);
    REQUIRE(d.size() == 3);
    CHECK(d.theta == std::vector<double>{-1.0, 0.0, 1.0});
    CHECK(d.y == std::vector<double>{-1.0, 1.0, -1.0});
    REQUIRE(d.meta.rescale.has_value());
    CHECK(d.meta.rescale->y_scaled);
    std::remove(path.c_str());
}

TEST_CASE("load_series_csv is idempotent on normalized data") {
    const std::string path =
        write_temp("series_norm.csv", "t,y\n-1,-1\n-0.5,0.25\n0,1\n0.5,-0.25\n1,0.5\n");
    const Dataset d = load_series_csv(path, true);
    const std::vector<double> t_expect = {-1.0, -0.5, 0.0, 0.5, 1.0};
    const std::vector<double> y_expect = {-1.0, 0.25, 1.0, -0.25, 0.5};
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(std::fabs(d.theta[i] - t_expect[i]) <= 1e-12);
        CHECK(std::fabs(d.y[i] - y_expect[i]) <= 1e-12);
    }
    std::remove(path.c_str());
}

TEST_CASE("load_series_csv error paths") {
    const std::string bad = write_temp("series_bad.csv", "t,y\n0,1\nx,2\n");
    CHECK_THROWS_AS(load_series_csv(bad, false), parse_error);
    try {
        load_series_csv(bad, false);
    } catch (const parse_error& e) {
        CHECK(e.line == 3);
    }
    std::remove(bad.c_str());

    const std::string single = write_temp("series_single.csv", "t,y\n0,1\n");
    CHECK_THROWS_AS(load_series_csv(single, false), std::domain_error);
    std::remove(single.c_str());

    const std::string head = write_temp("series_head.csv", "time,value\n0,1\n1,2\n");
    CHECK_THROWS_AS(load_series_csv(head, false), parse_error);
    std::remove(head.c_str());
}

TEST_CASE("bundled fixture loads to 16 points in [-1,1]") {
    const char* src = std::getenv("FDNET_SOURCE_DIR");
    const std::string dir = src ? src : ".";
    const Dataset d = load_series_csv(dir + "/data/sp500_trends_16d.csv", true);
    CHECK(d.size() == 16);
    for (double t : d.theta) CHECK((t >= -1.0 && t <= 1.0));
    for (double y : d.y) CHECK((y >= -1.0 && y <= 1.0));
}

TEST_CASE("assumption-2 validator") {
    CHECK(check_assumption2(builtin_target("ex1"), 64).ok());
    CHECK(check_assumption2(builtin_target("ex3"), 64).ok());

    const Assumption2Report ex2 = check_assumption2(builtin_target("ex2"), 64);
    CHECK_FALSE(ex2.aligned);  // phase shifts split energy across cos/sin pairs
    CHECK_FALSE(ex2.split_frequencies.empty());
}

TEST_CASE("dataset csv round trip") {
    const TargetSpec spec = builtin_target("ex1");
    const Dataset d = make_dataset(spec, gen_grid(0.01), 3);
    std::ostringstream os;
    write_dataset_csv(os, d);
    std::istringstream is(os.str());
    const Dataset back = read_dataset_csv(is);
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.theta[i] == d.theta[i]);
        CHECK(back.y[i] == d.y[i]);
        CHECK(back.y_clean[i] == d.y_clean[i]);
    }
}
