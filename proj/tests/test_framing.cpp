#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "foveal/errors.hpp"
#include "foveal/framing.hpp"
#include "foveal/stimulus.hpp"

using namespace foveal;

namespace {

std::vector<Recording> seven_recordings(std::size_t frames) {
    std::vector<Recording> recs;
    for (int k = 0; k < kNumClasses; ++k) recs.push_back(generate_recording(k, {}, frames));
    return recs;
}

}  // namespace

TEST(Accumulate, EmptyStream) {
    EXPECT_EQ(accumulate(EventStream{}, 1000).count, 0u);
    EXPECT_EQ(accumulate(EventStream{}, 1000, 4).count, 4u);
    EXPECT_THROW(accumulate(EventStream{}, 0), ParameterError);
}

TEST(Accumulate, OnAndOffCancel) {
    EventStream s;
    s.events = {{10, 3, 4, 1}, {20, 3, 4, -1}, {25, 5, 4, 1}};
    const FrameTensor f = accumulate(s, 100);
    ASSERT_EQ(f.count, 1u);
    EXPECT_EQ(f.at(0, 4, 3), 0.0f);
    EXPECT_EQ(f.at(0, 4, 5), 1.0f);
}

TEST(Accumulate, CountIsCeilOfSpan) {
    EventStream s;
    s.events = {{0, 0, 0, 1}, {99, 0, 0, 1}};
    EXPECT_EQ(accumulate(s, 100).count, 1u);
    s.events.push_back({100, 0, 0, 1});
    EXPECT_EQ(accumulate(s, 100).count, 2u);
    EXPECT_EQ(accumulate(s, 100, 5).count, 5u);
}

TEST(Accumulate, MatchesHashMapTallyAndConservesPolarity) {
    const EventStream s = generate_recording(2, {}, 15).stream;
    const std::uint64_t period = 7000;  // windows straddle emulator frames
    std::map<std::tuple<std::uint64_t, int, int>, int> tally;
    for (const auto& e : s.events) tally[{e.t_us / period, e.y, e.x}] += e.polarity;
    const FrameTensor f = accumulate(s, period);
    double total = 0.0;
    std::size_t nonzero = 0;
    for (std::uint32_t k = 0; k < f.count; ++k)
        for (std::uint32_t y = 0; y < f.height; ++y)
            for (std::uint32_t x = 0; x < f.width; ++x) {
                const float v = f.at(k, y, x);
                total += v;
                const auto it = tally.find({k, static_cast<int>(y), static_cast<int>(x)});
                ASSERT_EQ(v, it == tally.end() ? 0.0f : static_cast<float>(it->second));
                nonzero += v != 0.0f;
            }
    EXPECT_GT(nonzero, 0u);
    const PolarityCounts pc = polarity_counts(s);
    EXPECT_EQ(total, static_cast<double>(pc.on) - static_cast<double>(pc.off));
}

TEST(Normalize, ZeroExtremesAndIdempotence) {
    FrameTensor z(2, 3, 3);
    EXPECT_EQ(normalize(z), z);

    FrameTensor t(1, 2, 2);
    t.values = {2.0f, -4.0f, 1.0f, 0.0f};
    const FrameTensor n = normalize(t);
    EXPECT_EQ(n.values[1], -1.0f);
    EXPECT_EQ(n.values[0], 0.5f);

    std::mt19937 gen(2);
    std::uniform_real_distribution<float> d(-9.0f, 9.0f);
    FrameTensor r(3, 8, 8);
    for (float& v : r.values) v = d(gen);
    const FrameTensor nr = normalize(r);
    float m = 0.0f;
    for (float v : nr.values) m = std::max(m, std::abs(v));
    EXPECT_EQ(m, 1.0f);
    EXPECT_EQ(normalize(nr), nr);

    FrameTensor small(1, 1, 2);
    small.values = {0.25f, -0.5f};
    EXPECT_EQ(normalize(small), small);  // max(1, ...) keeps sub-unit tensors
}

TEST(Downsample, BlockMean) {
    FrameTensor t(1, 4, 4);
    for (std::size_t i = 0; i < 16; ++i) t.values[i] = static_cast<float>(i);
    const FrameTensor d = downsample(t, 2);
    ASSERT_EQ(d.height, 2u);
    EXPECT_FLOAT_EQ(d.at(0, 0, 0), (0 + 1 + 4 + 5) / 4.0f);
    EXPECT_FLOAT_EQ(d.at(0, 1, 1), (10 + 11 + 14 + 15) / 4.0f);
    EXPECT_THROW(downsample(t, 3), DimensionError);
    EXPECT_EQ(downsample(t, 1), t);
}

TEST(BuildDataset, SevenByHundredSplit) {
    const auto recs = seven_recordings(100);
    const Dataset ds = build_dataset(recs, 10000, 42, 100);
    EXPECT_EQ(ds.frames.count, 700u);
    EXPECT_EQ(ds.labels.size(), 700u);
    EXPECT_EQ(ds.split.size(), 700u);
    EXPECT_EQ(ds.indices(Split::test).size(), 70u);
    std::map<int, int> per_class_test, per_class_all;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        per_class_all[ds.labels[i]]++;
        if (ds.split[i] == Split::test) per_class_test[ds.labels[i]]++;
    }
    for (int k = 0; k < kNumClasses; ++k) {
        EXPECT_EQ(per_class_all[k], 100);
        EXPECT_EQ(per_class_test[k], 10);
    }
}

TEST(BuildDataset, DeterministicDisjointExhaustive) {
    const auto recs = seven_recordings(30);
    const Dataset a = build_dataset(recs, 10000, 42, 30), b = build_dataset(recs, 10000, 42, 30);
    EXPECT_EQ(a.split, b.split);
    EXPECT_EQ(a.frames, b.frames);
    const Dataset c = build_dataset(recs, 10000, 43, 30);
    EXPECT_NE(a.split, c.split);

    const auto train = a.indices(Split::train), test = a.indices(Split::test);
    std::set<std::size_t> all(train.begin(), train.end());
    for (std::size_t i : test) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), a.frames.count);
    // 30 frames per class -> 3 test frames each.
    std::map<int, int> per_class;
    for (std::size_t i : test) per_class[a.labels[i]]++;
    for (int k = 0; k < kNumClasses; ++k) EXPECT_EQ(per_class[k], 3);
}

TEST(BuildDataset, SmallClassesKeepOneTestFrame) {
    const auto recs = seven_recordings(5);
    const Dataset ds = build_dataset(recs, 10000, 1, 5);
    std::map<int, int> per_class;
    for (std::size_t i : ds.indices(Split::test)) per_class[ds.labels[i]]++;
    for (int k = 0; k < kNumClasses; ++k) EXPECT_EQ(per_class[k], 1);
}

TEST(BuildDataset, RecordingsNormalizedIndependently) {
    const auto recs = seven_recordings(20);
    const Dataset ds = build_dataset(recs, 10000, 0, 20);
    for (int k = 0; k < 6; ++k) {
        float m = 0.0f;
        for (std::size_t f = 0; f < ds.frames.count; ++f) {
            if (ds.labels[f] != k) continue;
            for (float v : ds.frames.frame(f).values) m = std::max(m, std::abs(v));
        }
        EXPECT_EQ(m, 1.0f) << k;
    }
}

TEST(BuildDataset, MissingLabelIsCoverageError) {
    auto recs = seven_recordings(5);
    recs.pop_back();
    EXPECT_THROW(build_dataset(recs, 10000, 0, 5), CoverageError);
}

TEST(SplitCsv, RoundTrip) {
    const auto recs = seven_recordings(10);
    const Dataset ds = build_dataset(recs, 10000, 5, 10);
    std::ostringstream os;
    write_split_csv(ds, os);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "frame_idx,label,split");
    std::istringstream is(os.str());
    const Dataset back = read_split_csv(is, ds.frames);
    EXPECT_EQ(back.labels, ds.labels);
    EXPECT_EQ(back.split, ds.split);
}
