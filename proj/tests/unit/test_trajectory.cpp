#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "neurosym/error.hpp"
#include "neurosym/trajectory.hpp"
#include "synthetic.hpp"

using namespace neurosym;

namespace {

Scene parse(const std::string& text, double rate = 2.5, std::int64_t step = 1) {
    std::istringstream in(text);
    return parse_tsv_scene(in, rate, step);
}

Trajectory track(const std::vector<std::pair<std::int64_t, Vec2>>& frames, double dt = 0.4) {
    Trajectory t;
    t.agent_id = 1;
    t.dt = dt;
    for (const auto& [f, p] : frames) t.samples.push_back({f, static_cast<double>(f) * dt, p});
    return t;
}

}  // namespace

TEST(ParseTsvScene, TwoAgentsTenFrames) {
    std::ostringstream text;
    for (int f = 9; f >= 0; --f) {
        text << f << "\t1\t" << f * 0.5 << "\t0\n";
        text << f << " 2 " << -f * 0.5 << " 1.5\n";
    }
    const auto s = parse(text.str());
    ASSERT_EQ(s.trajectories.size(), 2u);
    for (const auto& t : s.trajectories) {
        EXPECT_EQ(t.size(), 10u);
        EXPECT_DOUBLE_EQ(t.dt, 0.4);
        EXPECT_TRUE(t.is_contiguous());
        for (std::size_t i = 0; i < t.size(); ++i) {
            EXPECT_EQ(t.samples[i].frame, static_cast<std::int64_t>(i));
            EXPECT_DOUBLE_EQ(t.samples[i].t, static_cast<double>(i) / 2.5);
        }
    }
    EXPECT_EQ(s.trajectories[0].agent_id, 1);
    EXPECT_DOUBLE_EQ(s.trajectories[1].samples[3].position.x, -1.5);
    EXPECT_DOUBLE_EQ(s.frame_rate, 2.5);
}

TEST(ParseTsvScene, EmptyInput) {
    EXPECT_TRUE(parse("").trajectories.empty());
    EXPECT_TRUE(parse("# comment only\n\n   \n").trajectories.empty());
}

TEST(ParseTsvScene, MalformedFieldNamesLine) {
    try {
        parse("0 3 1.0 2.0\n5 3 abc 2.0\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    EXPECT_THROW(parse("1 2 3\n"), ParseError);
    EXPECT_THROW(parse("1.5 2 3 4\n"), ParseError);
    EXPECT_THROW(parse("1 2 nan 4\n"), ParseError);
}

TEST(ParseTsvScene, DuplicateObservation) {
    try {
        parse("0 1 0 0\n1 1 0 0\n0 1 5 5\n");
        FAIL() << "expected DuplicateObservationError";
    } catch (const DuplicateObservationError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(ParseTsvScene, FrameStepAndConfig) {
    const auto s = parse("0.0 1.0 1 2\n10.0 1.0 2 3\n20.0 1.0 3 4\n", 2.5, 10);
    ASSERT_EQ(s.trajectories.size(), 1u);
    EXPECT_EQ(s.trajectories[0].samples[2].frame, 2);
    EXPECT_TRUE(s.trajectories[0].is_contiguous());
    EXPECT_THROW(parse("5 1 0 0\n", 2.5, 10), ParseError);
    EXPECT_THROW(parse("", 0.0), InvalidConfigError);
    EXPECT_THROW(parse("", 2.5, 0), InvalidConfigError);
}

TEST(ParseTsvScene, EthExportFixture) {
    const auto s = parse_tsv_scene_file(NEUROSYM_DATA_DIR "/eth_mini.txt", kEthUcyFrameRate, 10);
    EXPECT_EQ(s.trajectories.size(), 5u);
    for (const auto& t : s.trajectories) EXPECT_GE(t.size(), 1u);
    EXPECT_THROW(parse_tsv_scene_file(NEUROSYM_DATA_DIR "/does_not_exist.tsv", 2.5), IoError);
}

TEST(ParseTsvScene, RoundTrip) {
    synth::Random rng(3);
    std::vector<std::vector<Vec2>> tracks(4);
    for (auto& tr : tracks) {
        for (int k = 0; k < 15; ++k) tr.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10)});
    }
    const auto scene = synth::scene_from(tracks, 2.5, 3);
    std::ostringstream out;
    write_tsv_scene(out, scene);
    const auto back = parse(out.str());
    EXPECT_EQ(back, scene);
    std::ostringstream again;
    write_tsv_scene(again, back);
    EXPECT_EQ(again.str(), out.str());
}

TEST(StaticObjects, Parse) {
    std::istringstream in("# objects\nkiosk -1 2\nbar 3 -2.5\n");
    const auto objs = parse_static_objects(in);
    ASSERT_EQ(objs.size(), 2u);
    EXPECT_EQ(objs[1].label, "bar");
    EXPECT_EQ(objs[1].position, (Vec2{3, -2.5}));
    std::istringstream dup("a 0 0\na 1 1\n");
    EXPECT_THROW(parse_static_objects(dup), ParseError);
    std::istringstream bad("a 0\n");
    EXPECT_THROW(parse_static_objects(bad), ParseError);
}

TEST(FillGaps, InterpolatesShortGap) {
    const auto t = fill_gaps(track({{0, {0, 0}}, {1, {1, 0}}, {3, {3, 2}}}), 1);
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t.samples[2].frame, 2);
    EXPECT_DOUBLE_EQ(t.samples[2].position.x, 2.0);
    EXPECT_DOUBLE_EQ(t.samples[2].position.y, 1.0);
    EXPECT_DOUBLE_EQ(t.samples[2].t, 0.8);
    EXPECT_TRUE(t.is_contiguous());
}

TEST(FillGaps, LongGapKeepsLongestSegment) {
    const auto t = fill_gaps(track({{0, {0, 0}}, {1, {1, 0}}, {9, {3, 2}}}), 1);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.samples[0].frame, 0);
    EXPECT_EQ(t.samples[1].frame, 1);
    const auto later = fill_gaps(track({{0, {0, 0}}, {5, {1, 0}}, {6, {3, 2}}, {7, {3, 2}}}), 1);
    ASSERT_EQ(later.size(), 3u);
    EXPECT_EQ(later.samples[0].frame, 5);
}

TEST(FillGaps, GapFreeIsIdentity) {
    const auto in = track({{4, {0, 0}}, {5, {1, 0}}, {6, {3, 2}}});
    EXPECT_EQ(fill_gaps(in, 0), in);
    EXPECT_EQ(fill_gaps(in, 5), in);
    const Trajectory empty;
    EXPECT_EQ(fill_gaps(empty, 2), empty);
}

TEST(FillGaps, NeverAltersObservedSamples) {
    synth::Random rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<std::int64_t, Vec2>> frames;
        std::int64_t f = 0;
        for (int k = 0; k < 20; ++k) {
            f += 1 + static_cast<std::int64_t>(rng.index(4));
            frames.push_back({f, {rng.uniform(-5, 5), rng.uniform(-5, 5)}});
        }
        const auto in = track(frames);
        const auto out = fill_gaps(in, 2);
        EXPECT_TRUE(out.is_contiguous());
        for (const auto& s : out.samples) {
            const auto idx = in.index_of(s.frame);
            if (idx) EXPECT_EQ(in.samples[*idx], s);
        }
    }
}

TEST(SlidingWindows, Examples) {
    auto windows = [](std::size_t len, std::size_t stride) {
        std::vector<Vec2> tr;
        for (std::size_t k = 0; k < len; ++k) tr.push_back({static_cast<double>(k), 0});
        return sliding_windows(synth::scene_from({tr}), {8, 12, stride});
    };
    const auto one = windows(20, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].observed.size(), 8u);
    EXPECT_EQ(one[0].future.size(), 12u);
    EXPECT_DOUBLE_EQ(one[0].future[0].x, 8.0);
    EXPECT_EQ(windows(21, 1).size(), 2u);
    EXPECT_EQ(windows(10, 1).size(), 0u);
    EXPECT_EQ(windows(30, 5).size(), 3u);
}

TEST(SlidingWindows, CountIsExhaustive) {
    for (std::size_t len = 0; len < 40; ++len) {
        std::vector<Vec2> tr(len, Vec2{1, 1});
        const ObservationWindow w{5, 3, 1};
        const auto n = sliding_windows(synth::scene_from({tr, tr}), w).size();
        const std::size_t expected = len >= w.total() ? len - w.total() + 1 : 0;
        EXPECT_EQ(n, 2 * expected) << len;
    }
}

TEST(SlidingWindows, SplitRunsAndValidation) {
    Scene s;
    s.frame_rate = 2.5;
    std::vector<std::pair<std::int64_t, Vec2>> frames;
    for (std::int64_t f = 0; f < 6; ++f) frames.push_back({f, {0, 0}});
    for (std::int64_t f = 10; f < 17; ++f) frames.push_back({f, {0, 0}});
    s.trajectories.push_back(track(frames));
    EXPECT_EQ(sliding_windows(s, {4, 2, 1}).size(), 3u);
    EXPECT_THROW(sliding_windows(s, {2, 2, 1}), InvalidConfigError);
    EXPECT_THROW(sliding_windows(s, {4, 0, 1}), InvalidConfigError);
    EXPECT_THROW(sliding_windows(s, {4, 2, 0}), InvalidConfigError);
}
