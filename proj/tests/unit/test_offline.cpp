#include "doctest.h"

#include "../support/oracles.hpp"
#include "symalign/metrics.hpp"
#include "symalign/offline_aligner.hpp"
#include "symalign/synth.hpp"

#include <algorithm>
#include <set>

using namespace symalign;
using namespace symalign::testing;

namespace {

Performance transform(const Performance& p, double scale, double shift) {
    std::vector<PerfNote> notes = p.notes();
    for (auto& n : notes) n.onset_sec = n.onset_sec * scale + shift;
    return Performance(std::move(notes));
}

std::multiset<std::tuple<int, std::string, std::string>> record_set(const NoteAlignment& a) {
    std::multiset<std::tuple<int, std::string, std::string>> out;
    for (const auto& r : a.records) out.insert({static_cast<int>(r.kind), r.perf_id, r.score_id});
    return out;
}

} // namespace

TEST_CASE("time map") {
    SUBCASE("constant tempo") {
        const TimeMap m({{0, 0}, {4, 2}});
        for (double b : {-1.0, 0.0, 0.75, 3.0, 9.5}) CHECK(m(b) == doctest::Approx(0.5 * b).epsilon(1e-12));
    }
    SUBCASE("piecewise with extrapolation from the end segments") {
        const TimeMap m({{0, 1}, {1, 2}, {3, 2.5}});
        CHECK(m(0.5) == doctest::Approx(1.5));
        CHECK(m(2) == doctest::Approx(2.25));
        CHECK(m(-1) == doctest::Approx(0));
        CHECK(m(5) == doctest::Approx(3));
    }
    SUBCASE("single anchor uses the default period") {
        const TimeMap m({{2, 10}});
        CHECK(m(4) == doctest::Approx(11));
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(TimeMap({}), Error);
        CHECK_THROWS_AS(TimeMap({{1, 0}, {1, 1}}), Error);
        CHECK_THROWS_AS(TimeMap({{0, 1}, {1, 0}}), Error);
    }
}

TEST_CASE("build_time_map") {
    SUBCASE("exact performance at 120 BPM") {
        const Score s = mono_score({60, 62, 64, 65, 67});
        const Performance p = make_perf({{60, 0}, {62, 0.5}, {64, 1.0}, {65, 1.5}, {67, 2.0}});
        const auto m = build_time_map({{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}}, s, p);
        for (double b = -2; b <= 8; b += 0.25) CHECK(std::abs(m(b) - 0.5 * b) < 1e-9);
    }
    SUBCASE("anchor at the median of its notes") {
        const Score s = make_score({{0, {60}}, {1, {64, 67}}});
        const Performance p = make_perf({{60, 0}, {64, 1.0}, {67, 1.02}});
        const auto m = build_time_map({{0, 0}, {1, 1}, {2, 1}}, s, p);
        REQUIRE(m.anchors().size() == 2);
        CHECK(m.anchors()[1].sec == doctest::Approx(1.01));
    }
    SUBCASE("anchor running backwards is dropped") {
        const Score s = mono_score({60, 62, 64});
        const Performance p = make_perf({{60, 0}, {62, 1.0}, {64, 0.5}});
        // Onset 1 pairs with the 1.0 s note, onset 2 with the 0.5 s note.
        const auto m = build_time_map({{0, 0}, {1, 2}, {2, 1}}, s, p);
        CHECK(m.anchors() == std::vector<TimeAnchor>{{0, 0}, {1, 1.0}});
    }
    SUBCASE("no pairs") {
        const Score s = mono_score({60});
        const Performance p = make_perf({{60, 0}});
        CHECK_THROWS_AS(build_time_map({}, s, p), Error);
    }
}

TEST_CASE("pitch_sequence_align") {
    SUBCASE("exact monophonic playback agrees everywhere") {
        const Score s = mono_score({60, 62, 64, 62, 60});
        const Performance p = make_perf({{60, 0}, {62, 0.5}, {64, 1}, {62, 1.5}, {60, 2}});
        const auto r = pitch_sequence_align(s, p);
        CHECK(r.agreed.size() == 5);
        CHECK(r.brackets.empty());
    }
    SUBCASE("repeated D4 lands in a bracket") {
        const Score s = make_score({{0, {55}}, {1, {62, 58}}, {2, {62, 65}}, {3, {75}}});
        const Performance p = make_perf({{55, 0}, {58, 0.5}, {62, 0.75}, {65, 1.0}, {75, 1.5}});
        const auto r = pitch_sequence_align(s, p);
        REQUIRE(r.brackets.size() == 1);
        const auto& b = r.brackets[0];
        CHECK(b.a_begin() <= 2);
        CHECK(b.a_end() > 2);
    }
    SUBCASE("agreed pairs of exact synthetic playback have zero cost") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Score s = generate_score({.onsets = 80, .seed = seed});
            SynthParams params;
            params.seed = seed;
            const auto synth = generate_performance(s, params);
            const auto r = pitch_sequence_align(s, synth.performance);
            for (const auto& pr : r.agreed)
                CHECK(inclusion_cost(synth.performance[pr.i].pitch, s[pr.j].pitch_set) == 0.0);
        }
    }
}

TEST_CASE("resolve_brackets") {
    const Score s = make_score({{0, {55}}, {1, {62}}, {2, {62}}, {3, {75}}});
    SUBCASE("equal per-pitch counts pair in order") {
        const Performance p = make_perf({{55, 0}, {62, 0.5}, {62, 1.0}, {75, 1.5}});
        const Bracket b{{0, 0}, {3, 3}};
        CHECK(resolve_brackets({b}, s, p) == std::vector<IndexPair>{{1, 1}, {2, 2}});
    }
    SUBCASE("count mismatch falls back to interpolation") {
        const Performance p = make_perf({{55, 0}, {60, 0.4}, {61, 0.8}, {63, 1.0}, {75, 1.5}});
        const Bracket b{{0, 0}, {4, 3}};
        const auto r = resolve_brackets({b}, s, p);
        // j = round(i * 3 / 4): 0.75 -> 1, 1.5 -> 2, 2.25 -> 2.
        CHECK(r == std::vector<IndexPair>{{1, 1}, {2, 2}, {3, 2}});
    }
    SUBCASE("no brackets") {
        const Performance p = make_perf({{55, 0}});
        CHECK(resolve_brackets({}, s, p).empty());
    }
}

TEST_CASE("resolve_brackets at anchor onsets") {
    SUBCASE("a pitch the lower anchor left unplayed joins the count") {
        const Score s = make_score({{0, {40}}, {1, {38, 48}}, {2, {38, 48}}, {3, {48}}, {4, {41}}});
        const Performance p = make_perf({{40, 0}, {38, 1}, {48, 1}, {38, 2}, {48, 2}, {48, 3}, {41, 4}});
        const Bracket b{{1, 1}, {6, 4}};
        CHECK(resolve_brackets({b}, s, p) == std::vector<IndexPair>{{2, 1}, {3, 2}, {4, 2}, {5, 3}});
    }
    SUBCASE("an upper-anchor pitch played after the anchor stays out") {
        const Score s = make_score({{0, {40}}, {1, {48}}, {2, {48}}, {3, {41, 48}}});
        const Performance p = make_perf({{40, 0}, {48, 1}, {48, 2}, {41, 3}, {48, 3}});
        const Bracket b{{0, 0}, {3, 3}};
        CHECK(resolve_brackets({b}, s, p) == std::vector<IndexPair>{{1, 1}, {2, 2}});
    }
    SUBCASE("agreed pairs claim their pitch") {
        const Score s = make_score({{0, {40, 48}}, {1, {48}}, {2, {41}}});
        const Performance p = make_perf({{40, 0}, {48, 0}, {48, 1}, {41, 2}});
        const Bracket b{{1, 0}, {3, 2}};
        const std::vector<IndexPair> agreed = {{0, 0}, {1, 0}, {3, 2}};
        CHECK(resolve_brackets({b}, s, p, agreed) == std::vector<IndexPair>{{2, 1}});
    }
}

TEST_CASE("split_by_pitch") {
    const Score s = make_score({{0, {60, 64}}, {1, {60}}});
    const Performance p = make_perf({{60, 0}, {64, 0.1}, {61, 0.3}, {60, 0.5}});
    const auto ch = split_by_pitch(s, p);
    REQUIRE(ch.size() == 3);
    CHECK(ch[0].pitch.midi() == 60);
    CHECK(ch[0].perf.size() == 2);
    CHECK(ch[0].score.size() == 2);
    CHECK(ch[1].pitch.midi() == 61);
    CHECK(ch[1].score.empty());
}

TEST_CASE("onset_align") {
    SUBCASE("extra C4 between two scored C4s becomes an insertion") {
        const Score s = mono_score({60, 60});
        const Performance p = make_perf({{60, 0.0}, {60, 0.3}, {60, 0.5}});
        const auto a = onset_align(s, p, TimeMap({{0, 0}, {1, 0.5}}));
        CHECK(a.count(AlignmentRecord::Kind::match) == 2);
        CHECK(a.count(AlignmentRecord::Kind::deletion) == 0);
        CHECK(std::find(a.records.begin(), a.records.end(), AlignmentRecord::insertion("p1")) != a.records.end());
        CHECK(std::find(a.records.begin(), a.records.end(), AlignmentRecord::match("p0", "s0_60")) !=
              a.records.end());
        CHECK(std::find(a.records.begin(), a.records.end(), AlignmentRecord::match("p2", "s1_60")) !=
              a.records.end());
    }
    SUBCASE("a link further than the cutoff is broken") {
        const Score s = mono_score({60, 62});
        const Performance p = make_perf({{60, 0.0}, {62, 6.5}});
        const auto a = onset_align(s, p, TimeMap({{0, 0}, {1, 0.5}}));
        CHECK(a.count(AlignmentRecord::Kind::match) == 1);
        CHECK(std::find(a.records.begin(), a.records.end(), AlignmentRecord::insertion("p1")) != a.records.end());
        CHECK(std::find(a.records.begin(), a.records.end(), AlignmentRecord::deletion("s1_62")) != a.records.end());
        OfflineConfig wide;
        wide.cutoff_sec = 10;
        CHECK(onset_align(s, p, TimeMap({{0, 0}, {1, 0.5}}), wide).count(AlignmentRecord::Kind::match) == 2);
    }
    SUBCASE("doubled voices share one key press") {
        const Score s = make_score({{0, {60, 60}}});
        const Performance p = make_perf({{60, 0.0}, {60, 0.01}});
        const auto a = onset_align(s, p, TimeMap({{0, 0}}));
        CHECK(a.count(AlignmentRecord::Kind::match) == 1);
        CHECK(std::find(a.records.begin(), a.records.end(), AlignmentRecord::match("p0", "s0_60")) !=
              a.records.end());
        CHECK(std::find(a.records.begin(), a.records.end(), AlignmentRecord::insertion("p1")) != a.records.end());
        CHECK(std::find(a.records.begin(), a.records.end(), AlignmentRecord::deletion("s0_60b")) !=
              a.records.end());
    }
}

TEST_CASE("align_offline on synthetic pieces") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Score s = generate_score({.onsets = 120, .seed = seed});
        SynthParams params;
        params.tempo = random_tempo_curve(seed, s.onsets().back().beat);
        params.seed = seed;
        const auto exact = generate_performance(s, params);
        const auto a = align_offline(s, exact.performance);
        CAPTURE(seed);
        CHECK_NOTHROW(check_alignment(a, s, exact.performance));
        CHECK(fscore(a, exact.truth).f == 1.0);

        for (double c : {0.5, 3.0, 60.0})
            CHECK(record_set(align_offline(s, transform(exact.performance, 1.0, c))) == record_set(a));
        for (double k : {0.5, 0.8, 1.3, 2.0})
            CHECK(record_set(align_offline(s, transform(exact.performance, k, 0.0))) == record_set(a));
    }
}

TEST_CASE("align_offline is independent of the worker count") {
    const Score s = generate_score({.onsets = 150, .seed = 4});
    SynthParams params;
    params.jitter_ms = 30;
    params.chord_spread_ms = 20;
    params.p_insert = params.p_delete = 0.05;
    params.seed = 9;
    const auto perf = generate_performance(s, params).performance;
    OfflineConfig one, many;
    one.threads = 1;
    many.threads = 6;
    CHECK(align_offline(s, perf, one) == align_offline(s, perf, many));
}

TEST_CASE("matches always pair equal pitches") {
    for (std::uint64_t seed = 10; seed < 16; ++seed) {
        const Score s = generate_score({.onsets = 100, .seed = seed});
        SynthParams params;
        params.jitter_ms = 40;
        params.chord_spread_ms = 30;
        params.p_insert = params.p_delete = 0.05;
        params.seed = seed;
        const auto perf = generate_performance(s, params).performance;
        CHECK_NOTHROW(check_alignment(align_offline(s, perf), s, perf));
    }
}
