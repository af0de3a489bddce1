#include "symalign/cli.hpp"

#include "symalign/error.hpp"
#include "symalign/metrics.hpp"
#include "symalign/midi.hpp"
#include "symalign/note_json.hpp"
#include "symalign/offline_aligner.hpp"
#include "symalign/online_aligner.hpp"
#include "symalign/state_sampler.hpp"
#include "symalign/synth.hpp"
#include "symalign/value_model.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <condition_variable>
#include <deque>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

namespace symalign::cli {

namespace {

using nlohmann::json;

Performance load_performance(const std::string& path, std::ostream& err) {
    const auto ext = std::filesystem::path(path).extension().string();
    if (ext == ".mid" || ext == ".midi" || ext == ".MID") {
        auto imported = load_performance_midi(path);
        if (imported.dropped_out_of_range > 0)
            err << "warning: dropped " << imported.dropped_out_of_range << " notes outside the piano range\n";
        return std::move(imported.performance);
    }
    return load_performance_json(path);
}

struct ValueSource {
    std::string weights;
    bool heuristic = false;

    void attach(CLI::App* cmd) {
        auto* w = cmd->add_option("--weights", weights, "SMAW weight file");
        auto* h = cmd->add_flag("--heuristic", heuristic, "use the training-free heuristic value function");
        w->excludes(h);
        h->excludes(w);
    }

    std::unique_ptr<ValueFunction> make() const {
        if (heuristic) return std::make_unique<HeuristicValueFunction>();
        return std::make_unique<NetworkValueFunction>(std::make_shared<ValueModelWeights>(load_weights(weights)));
    }
};

Policy parse_policy(const std::string& mode) { return mode == "gam" ? Policy::greedy : Policy::alignment; }

/// Single-producer single-consumer handoff with a fixed capacity.
template <class T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    void push(T value) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return items_.size() < capacity_; });
        items_.push_back(std::move(value));
        not_empty_.notify_one();
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        not_empty_.notify_all();
    }

    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
        if (items_.empty()) return std::nullopt;
        T v = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return v;
    }

private:
    std::size_t capacity_;
    std::deque<T> items_;
    bool closed_ = false;
    std::mutex mutex_;
    std::condition_variable not_full_, not_empty_;
};

struct StreamEvent {
    std::size_t index = 0;
    std::optional<PerfNote> note;  // empty when the line was rejected
    std::string problem;
};

StreamEvent parse_event(const std::string& line, std::size_t index) {
    StreamEvent ev;
    ev.index = index;
    try {
        const json rec = json::parse(line);
        if (!rec.is_object() || !rec.contains("pitch") || !rec.contains("onset_sec"))
            throw Error("expected {pitch, onset_sec}");
        const int midi = rec.at("pitch").get<int>();
        const double sec = rec.at("onset_sec").get<double>();
        if (!PitchIndex::valid_midi(midi)) throw Error("pitch " + std::to_string(midi) + " outside 21..108");
        ev.note = PerfNote{"e" + std::to_string(index), PitchIndex::from_midi(midi), sec, 64};
    } catch (const std::exception& e) {
        ev.problem = e.what();
    }
    return ev;
}

int run_follow(const Score& score, const ValueFunction& value_fn, Policy policy, std::istream& in,
               std::ostream& out, std::ostream& err) {
    BoundedQueue<StreamEvent> queue(64);
    std::jthread reader([&] {
        std::string line;
        std::size_t index = 0;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            queue.push(parse_event(line, index++));
        }
        queue.close();
    });

    FollowerSession session(score, value_fn);
    while (auto ev = queue.pop()) {
        std::size_t onset = session.current_onset();
        if (ev->note) {
            onset = session.follow(*ev->note, policy).onset_index;
        } else {
            err << "warning: event " << ev->index << " ignored: " << ev->problem << "\n";
        }
        out << json{{"onset_index", onset}, {"beat", score[onset].beat}}.dump() << "\n" << std::flush;
    }
    return 0;
}

std::string fscore_text(const MatchFScore& f, bool as_json) {
    if (as_json)
        return json{{"f", f.f}, {"precision", f.precision}, {"recall", f.recall},
                    {"tp", f.tp}, {"fp", f.fp},               {"fn", f.fn}}
                   .dump() +
               "\n";
    std::ostringstream s;
    s << "f=" << f.f << " precision=" << f.precision << " recall=" << f.recall << " tp=" << f.tp << " fp=" << f.fp
      << " fn=" << f.fn << "\n";
    return s.str();
}

} // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"symalign: symbolic score/performance note alignment", "symalign"};
    app.require_subcommand(1);

    std::string score_path, perf_path, truth_path, pred_path, out_path, out_perf, out_truth, states_path, mode = "oam";
    double cutoff = 5.0, default_period = 0.5, jitter = 0.0, p_insert = 0.0, p_delete = 0.0, spread = 0.0, bpm = 120.0;
    double stddev = 0.02, time_slack = 1.0;
    std::size_t candidates = 3, augment = 0, onsets = 200;
    std::uint64_t seed = 0;
    bool as_json = false, zero = false, no_slack = false;
    ValueSource value_source;

    auto* offline = app.add_subcommand("align-offline", "two-step DTW offline alignment");
    offline->add_option("--score", score_path)->required();
    offline->add_option("--perf", perf_path, "performance (.json or .mid)")->required();
    offline->add_option("--out", out_path)->required();
    offline->add_option("--cutoff-sec", cutoff)->check(CLI::PositiveNumber);

    auto* online = app.add_subcommand("align-online", "online alignment with the value-function agent");
    online->add_option("--score", score_path)->required();
    online->add_option("--perf", perf_path)->required();
    online->add_option("--out", out_path)->required();
    online->add_option("--candidates", candidates)->check(CLI::Range(1, 16));
    online->add_option("--default-beat-period", default_period)->check(CLI::PositiveNumber);
    auto* slack_opt = online->add_option("--time-slack", time_slack, "seconds a candidate may miss its expected time")
                          ->check(CLI::NonNegativeNumber);
    online->add_flag("--no-time-slack", no_slack, "never drop candidates for timing")->excludes(slack_opt);
    value_source.attach(online);

    auto* follow = app.add_subcommand("follow", "stream {pitch, onset_sec} lines from stdin, print positions");
    follow->add_option("--score", score_path)->required();
    follow->add_option("--mode", mode)->check(CLI::IsMember({"oam", "gam"}));
    value_source.attach(follow);

    auto* evaluate = app.add_subcommand("evaluate", "match F-score of a predicted alignment");
    evaluate->add_option("--pred", pred_path)->required();
    evaluate->add_option("--truth", truth_path)->required();
    evaluate->add_flag("--json", as_json);

    auto* follow_eval = app.add_subcommand("follow-eval", "score-following asynchrony against a truth alignment");
    follow_eval->add_option("--score", score_path)->required();
    follow_eval->add_option("--perf", perf_path)->required();
    follow_eval->add_option("--truth", truth_path)->required();
    follow_eval->add_option("--mode", mode)->check(CLI::IsMember({"oam", "gam"}));
    follow_eval->add_flag("--json", as_json);
    value_source.attach(follow_eval);

    auto* topk = app.add_subcommand("topk", "Top0/1/2 hit rates of the greedy policy on a states file");
    topk->add_option("--states", states_path)->required();
    topk->add_flag("--json", as_json);
    value_source.attach(topk);

    auto* sample = app.add_subcommand("sample-states", "exhaustive agent states from an aligned performance");
    sample->add_option("--score", score_path)->required();
    sample->add_option("--perf", perf_path)->required();
    sample->add_option("--truth", truth_path)->required();
    sample->add_option("--out", out_path)->required();
    sample->add_option("--augment", augment, "pitch-shifted copies per state");
    sample->add_option("--seed", seed);

    auto* synth = app.add_subcommand("synth", "synthetic performance with ground truth");
    synth->add_option("--score", score_path)->required();
    synth->add_option("--seed", seed);
    synth->add_option("--jitter-ms", jitter)->check(CLI::NonNegativeNumber);
    synth->add_option("--p-insert", p_insert)->check(CLI::Range(0.0, 1.0));
    synth->add_option("--p-delete", p_delete)->check(CLI::Range(0.0, 1.0));
    synth->add_option("--chord-spread-ms", spread)->check(CLI::NonNegativeNumber);
    synth->add_option("--bpm", bpm)->check(CLI::PositiveNumber);
    synth->add_option("--out-perf", out_perf)->required();
    synth->add_option("--out-truth", out_truth)->required();

    auto* gen_score = app.add_subcommand("gen-score", "random synthetic score");
    gen_score->add_option("--seed", seed);
    gen_score->add_option("--onsets", onsets)->check(CLI::PositiveNumber);
    gen_score->add_option("--out", out_path)->required();

    auto* init_weights = app.add_subcommand("init-weights", "write randomly initialised value-model weights");
    init_weights->add_option("--seed", seed);
    init_weights->add_option("--stddev", stddev)->check(CLI::PositiveNumber);
    init_weights->add_flag("--zero", zero);
    init_weights->add_option("--out", out_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    for (auto* cmd : {online, follow, follow_eval, topk})
        if (cmd->parsed() && value_source.weights.empty() && !value_source.heuristic) {
            err << "error: " << cmd->get_name() << " needs --weights or --heuristic\n" << cmd->help();
            return 2;
        }

    try {
        if (offline->parsed()) {
            const Score score = load_score_json(score_path);
            const Performance perf = load_performance(perf_path, err);
            OfflineConfig cfg;
            cfg.cutoff_sec = cutoff;
            save_alignment_json(align_offline(score, perf, cfg), out_path);
        } else if (online->parsed()) {
            const Score score = load_score_json(score_path);
            const Performance perf = load_performance(perf_path, err);
            const auto value_fn = value_source.make();
            OnlineConfig cfg;
            cfg.candidates = candidates;
            cfg.default_beat_period = default_period;
            cfg.time_slack_sec = time_slack;
            if (no_slack) cfg.time_slack_sec.reset();
            save_alignment_json(align_online(score, perf, *value_fn, cfg), out_path);
        } else if (follow->parsed()) {
            const Score score = load_score_json(score_path);
            const auto value_fn = value_source.make();
            return run_follow(score, *value_fn, parse_policy(mode), in, out, err);
        } else if (evaluate->parsed()) {
            out << fscore_text(fscore(load_alignment_json(pred_path), load_alignment_json(truth_path)), as_json);
        } else if (follow_eval->parsed()) {
            const Score score = load_score_json(score_path);
            const Performance perf = load_performance(perf_path, err);
            const NoteAlignment truth = load_alignment_json(truth_path);
            const auto value_fn = value_source.make();
            const auto reports = follow_performance(score, perf, *value_fn, parse_policy(mode));
            std::vector<EstimatedPosition> estimates;
            for (std::size_t k = 0; k < reports.size(); ++k)
                if (!reports[k].insertion) estimates.push_back({k, reports[k].onset_index});
            const auto r = asynchrony(estimates, score, perf, truth);
            if (as_json) {
                out << json{{"median_ms", r.median_ms}, {"pct_le_25", r.pct_le_25}, {"pct_le_50", r.pct_le_50},
                            {"pct_le_100", r.pct_le_100}, {"evaluated", r.evaluated}, {"excluded", r.excluded}}
                           .dump()
                    << "\n";
            } else {
                out << "median_ms=" << r.median_ms << " le25=" << r.pct_le_25 << "% le50=" << r.pct_le_50
                    << "% le100=" << r.pct_le_100 << "% evaluated=" << r.evaluated << " excluded=" << r.excluded
                    << "\n";
            }
        } else if (topk->parsed()) {
            const auto states = import_states(states_path);
            const auto value_fn = value_source.make();
            const auto r = topk_hits(states, *value_fn);
            if (as_json)
                out << json{{"top0", r.top0}, {"top1", r.top1}, {"top2", r.top2}, {"states", states.size()}}.dump()
                    << "\n";
            else
                out << "top0=" << r.top0 << " top1=" << r.top1 << " top2=" << r.top2 << " states=" << states.size()
                    << "\n";
        } else if (sample->parsed()) {
            const Score score = load_score_json(score_path);
            const Performance perf = load_performance(perf_path, err);
            const NoteAlignment truth = load_alignment_json(truth_path);
            check_alignment(truth, score, perf);
            auto states = sample_states(score, perf, truth);
            if (augment > 0) {
                std::mt19937_64 rng(seed);
                std::uniform_int_distribution<int> shift(-12, 12);
                const std::size_t base = states.size();
                for (std::size_t k = 0; k < base; ++k)
                    for (std::size_t a = 0; a < augment; ++a) states.push_back(augment_pitch_shift(states[k], shift(rng)));
            }
            export_states(states, out_path);
        } else if (synth->parsed()) {
            const Score score = load_score_json(score_path);
            SynthParams params;
            params.tempo = TempoCurve(bpm);
            params.jitter_ms = jitter;
            params.p_insert = p_insert;
            params.p_delete = p_delete;
            params.chord_spread_ms = spread;
            params.seed = seed;
            const auto result = generate_performance(score, params);
            save_performance_json(result.performance, out_perf);
            save_alignment_json(result.truth, out_truth);
        } else if (gen_score->parsed()) {
            ScoreGenParams params;
            params.onsets = onsets;
            params.seed = seed;
            save_score_json(generate_score(params), out_path);
        } else if (init_weights->parsed()) {
            const auto w = zero ? ValueModelWeights::zeros() : ValueModelWeights::random(seed, {}, static_cast<float>(stddev));
            save_weights(w, out_path);
            out << "parameters=" << w.parameter_count() << "\n";
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace symalign::cli
