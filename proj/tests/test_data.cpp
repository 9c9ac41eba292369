#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "dcfl/data.hpp"
#include "dcfl/errors.hpp"
#include "doctest.h"

using namespace dcfl;
using namespace dcfl::data;

namespace {

std::string temp_path(const std::string& name) {
    return "/tmp/dcfl_test_" + name;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("labeled line parses into label plus values") {
    const auto path = temp_path("labeled.csv");
    write_file(path, "2,0.1,0.2,0.3\n");
    const auto samples = load_dataset(path, true);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].label == 2);
    CHECK(samples[0].values == std::vector<double>{0.1, 0.2, 0.3});
    std::remove(path.c_str());
}

TEST_CASE("tab delimiter is autodetected") {
    const auto path = temp_path("tabs.tsv");
    write_file(path, "1\t4.5\t6.0\n0\t1.0\t2.0\n");
    const auto samples = load_dataset(path, true);
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].label == 1);
    CHECK(samples[1].values == std::vector<double>{1.0, 2.0});
    std::remove(path.c_str());
}

TEST_CASE("matrix format reads every field as a value") {
    const auto path = temp_path("matrix.csv");
    write_file(path, "1.0,2.0\n3.0,4.0\n");
    const auto samples = load_dataset(path, false);
    REQUIRE(samples.size() == 2);
    CHECK(!samples[0].label.has_value());
    CHECK(samples[0].values == std::vector<double>{1.0, 2.0});
    std::remove(path.c_str());
}

TEST_CASE("loader errors carry line numbers") {
    const auto path = temp_path("bad.csv");
    write_file(path, "1,2,3\n1,oops,3\n");
    try {
        load_dataset(path, false);
        FAIL("expected parse error");
    } catch (const StructuralError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    write_file(path, "1,2,3\n1,2\n");
    try {
        load_dataset(path, false);
        FAIL("expected ragged-row error");
    } catch (const StructuralError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    write_file(path, "");
    CHECK_THROWS_AS(load_dataset(path, false), StructuralError);
    std::remove(path.c_str());
}

TEST_CASE("save then load round-trips bitwise") {
    Rng rng(3);
    std::vector<TimeSeriesSample> samples(5);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i].label = static_cast<int>(i % 2);
        samples[i].values.resize(7);
        for (double& v : samples[i].values) v = rng.uniform(-10.0, 10.0);
    }
    const auto path = temp_path("roundtrip.csv");
    save_dataset(path, samples, true);
    const auto back = load_dataset(path, true);
    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(back[i].label == samples[i].label);
        CHECK(back[i].values == samples[i].values);
    }
    std::remove(path.c_str());
}

TEST_CASE("normalize examples") {
    TimeSeriesSample a;
    a.values = {2.0, 4.0, 6.0};
    const auto per = normalize({a}, NormalizeMode::per_series_minmax);
    CHECK(per[0].values == std::vector<double>{0.0, 0.5, 1.0});

    TimeSeriesSample flat;
    flat.values = {3.0, 3.0, 3.0};
    const auto conv = normalize({flat}, NormalizeMode::per_series_minmax);
    for (double v : conv[0].values) CHECK(v == 0.5);

    TimeSeriesSample x, y;
    x.values = {0.0, 10.0};
    y.values = {5.0, 5.0};
    const auto ds = normalize({x, y}, NormalizeMode::dataset_minmax);
    CHECK(ds[0].values == std::vector<double>{0.0, 1.0});
    CHECK(ds[1].values == std::vector<double>{0.5, 0.5});
}

TEST_CASE("normalized values always land in the unit interval") {
    Rng rng(5);
    for (auto mode : {NormalizeMode::dataset_minmax, NormalizeMode::per_series_minmax}) {
        std::vector<TimeSeriesSample> samples(8);
        for (auto& s : samples) {
            s.values.resize(12);
            for (double& v : s.values) v = rng.uniform(-100.0, 100.0);
        }
        for (const auto& s : normalize(samples, mode))
            for (double v : s.values) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
    }
}

TEST_CASE("non-iid partition spreads classes round-robin with per-class purity") {
    Rng rng(7);
    auto samples = synth_sinusoid_classes(200, 20, 2, 0.0, rng);
    const auto pool = partition_non_iid(samples, 30, SplitSpec{}, ForecastSpec{}, 11);
    REQUIRE(pool.clients.size() == 30);
    int class0 = 0, class1 = 0;
    for (const auto& c : pool.clients) {
        REQUIRE(c.label.has_value());
        (*c.label == 0 ? class0 : class1)++;
        CHECK(!c.train.empty());
        for (const auto& s : c.train) CHECK(s.label == c.label);
        for (const auto& s : c.test) CHECK(s.label == c.label);
        CHECK(c.gan_train.size() == c.train.size());
        CHECK(!c.fc_train.empty());
    }
    CHECK(class0 == 15);
    CHECK(class1 == 15);
    // overwrite store holds both classes
    CHECK(pool.overwrite_store.size() == 2);

    // split is exhaustive: everything dealt lands in train, store, or test
    std::size_t total = 0;
    for (const auto& c : pool.clients) total += c.train.size() + c.test.size();
    for (const auto& [cls, store] : pool.overwrite_store) total += store.size();
    CHECK(total == samples.size());
}

TEST_CASE("one client per class when counts match") {
    Rng rng(9);
    auto samples = synth_sinusoid_classes(30, 20, 3, 0.0, rng);
    const auto pool = partition_non_iid(samples, 3, SplitSpec{}, ForecastSpec{}, 13);
    REQUIRE(pool.clients.size() == 3);
    std::set<int> labels;
    for (const auto& c : pool.clients) labels.insert(*c.label);
    CHECK(labels == std::set<int>{0, 1, 2});
}

TEST_CASE("partition is deterministic in the root seed") {
    Rng rng(15);
    auto samples = synth_sinusoid_classes(60, 16, 2, 0.1, rng);
    const auto a = partition_non_iid(samples, 6, SplitSpec{}, ForecastSpec{}, 21);
    const auto b = partition_non_iid(samples, 6, SplitSpec{}, ForecastSpec{}, 21);
    for (std::size_t i = 0; i < a.clients.size(); ++i) {
        CHECK(a.clients[i].train == b.clients[i].train);
        CHECK(a.clients[i].test == b.clients[i].test);
        CHECK(a.clients[i].seed == b.clients[i].seed);
    }
}

TEST_CASE("overwrite event swaps one client's data to one stored class") {
    Rng data_rng(17);
    auto samples = synth_sinusoid_classes(120, 20, 2, 0.05, data_rng);
    auto pool = partition_non_iid(samples, 6, SplitSpec{}, ForecastSpec{}, 23);
    auto pool_copy = partition_non_iid(samples, 6, SplitSpec{}, ForecastSpec{}, 23);

    Rng ev_rng(31);
    const auto ev = apply_overwrite_event(pool, ev_rng);
    const auto& hit = pool.client_by_id(ev.client_id);
    CHECK(hit.label == ev.new_class);
    for (const auto& s : hit.train) CHECK(s.label == ev.new_class);
    for (const auto& s : hit.test) CHECK(s.label == ev.new_class);
    CHECK(!hit.fc_train.empty());

    // identical rng → identical event
    Rng ev_rng2(31);
    const auto ev2 = apply_overwrite_event(pool_copy, ev_rng2);
    CHECK(ev2.client_id == ev.client_id);
    CHECK(ev2.new_class == ev.new_class);

    // untouched clients keep their data
    for (const auto& c : pool.clients) {
        if (c.id == ev.client_id) continue;
        CHECK(c.train == pool_copy.client_by_id(c.id).train);
    }
}

TEST_CASE("window_augment counts and contiguity") {
    TimeSeriesSample s;
    s.values.resize(30);
    for (int i = 0; i < 30; ++i) s.values[i] = i;
    const auto w = window_augment(s, 19, 1);
    REQUIRE(w.size() == 12);
    for (std::size_t k = 0; k < w.size(); ++k)
        for (int i = 0; i < 19; ++i)
            CHECK(w[k].values[i] == doctest::Approx(static_cast<double>(k + i)));

    TimeSeriesSample exact;
    exact.values.resize(19, 1.0);
    const auto one = window_augment(exact, 19, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].values == exact.values);

    TimeSeriesSample big;
    big.values.resize(1392);
    CHECK(window_augment(big, 19, 1).size() == 1374);

    TimeSeriesSample tiny;
    tiny.values.resize(5);
    CHECK_THROWS_AS(window_augment(tiny, 19, 1), StructuralError);
}

TEST_CASE("forecast pairs split at floor(input_frac * len)") {
    TimeSeriesSample s;
    s.values = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    ForecastSpec spec;  // input_frac 0.7
    const auto pairs = forecast_pairs({s}, spec);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].input.size() == 7);
    CHECK(pairs[0].target.size() == 3);
    CHECK(pairs[0].input[6] == 6.0);
    CHECK(pairs[0].target[0] == 7.0);

    // 19-step windows with input_frac 0.6 give 11-in / 8-out pairs
    TimeSeriesSample longer;
    longer.values.resize(25, 0.5);
    ForecastSpec win;
    win.input_frac = 0.6;
    win.window_len = 19;
    const auto wp = forecast_pairs({longer}, win);
    REQUIRE(wp.size() == 7);
    CHECK(wp[0].input.size() == 11);
    CHECK(wp[0].target.size() == 8);
}

TEST_CASE("per-client pool slices train prefix and gan windows") {
    Rng rng(19);
    auto series = synth_handover(4, 60, 2, 0.1, rng);
    ForecastSpec spec;
    spec.input_frac = 0.6;
    spec.window_len = 19;
    const auto pool = build_per_client_pool(series, 48, 12, spec, 29);
    REQUIRE(pool.clients.size() == 4);
    for (const auto& c : pool.clients) {
        REQUIRE(c.train.size() == 1);
        REQUIRE(c.test.size() == 1);
        CHECK(c.train[0].values.size() == 48);
        CHECK(c.test[0].values.size() == 12);
        CHECK(c.gan_train.size() == 4);  // non-overlapping 12-step slices
        CHECK(!c.fc_train.empty());
        CHECK(!c.fc_test.empty());  // direct split fallback for the short test slice
    }
}

TEST_CASE("synthetic generators produce the advertised shapes") {
    Rng rng(23);
    const auto handover = synth_handover(149, 1392, 4, 0.1, rng);
    REQUIRE(handover.size() == 149);
    for (const auto& s : handover) {
        CHECK(s.values.size() == 1392);
        CHECK(*s.label >= 0);
        CHECK(*s.label < 4);
    }

    const auto power = synth_power_demand(20, 24, rng);
    REQUIRE(power.size() == 20);
    for (const auto& s : power) {
        CHECK(s.values.size() == 24);
        CHECK((*s.label == 0 || *s.label == 1));
    }
}

TEST_CASE("zero-noise handover series repeat their archetype curve exactly") {
    Rng rng(29);
    const auto series = synth_handover(6, 100, 3, 0.0, rng);
    // clients 0 and 3 share archetype 0, etc.
    for (int a = 0; a < 3; ++a) CHECK(series[a].values == series[a + 3].values);
    // different archetypes differ
    CHECK(series[0].values != series[1].values);
}
