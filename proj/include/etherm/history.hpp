#pragma once

#include <deque>
#include <stdexcept>

namespace etherm {

/// Past (t, T_sep, valve) samples for delayed-argument lookups.
/// Lookups interpolate linearly; queries before the first sample return the
/// initialization values. Samples older than `span` before the newest one are
/// dropped, keeping one sample at or beyond the span boundary.
class HistoryBuffer {
public:
    struct Sample {
        double t;
        double t_sep;
        double valve;
    };

    HistoryBuffer(double span, double init_t_sep, double init_valve)
        : span_(span), init_{0.0, init_t_sep, init_valve} {}

    void push(double t, double t_sep, double valve) {
        if (!samples_.empty() && t <= samples_.back().t) {
            // Same timestamp overwrites (controller update at a step boundary).
            if (t == samples_.back().t) {
                samples_.back() = {t, t_sep, valve};
                return;
            }
            throw std::invalid_argument("HistoryBuffer::push: time must be non-decreasing");
        }
        samples_.push_back({t, t_sep, valve});
        while (samples_.size() > 2 && samples_[1].t <= t - span_) samples_.pop_front();
    }

    Sample at(double t) const {
        if (samples_.empty() || t <= samples_.front().t) {
            if (!samples_.empty() && t == samples_.front().t) return samples_.front();
            return {t, init_.t_sep, init_.valve};
        }
        if (t >= samples_.back().t) return {t, samples_.back().t_sep, samples_.back().valve};
        // Samples are uniformly spaced in practice; binary search keeps it general.
        std::size_t lo = 0, hi = samples_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (samples_[mid].t <= t) lo = mid; else hi = mid;
        }
        const Sample& a = samples_[lo];
        const Sample& b = samples_[hi];
        const double w = (t - a.t) / (b.t - a.t);
        return {t, a.t_sep + w * (b.t_sep - a.t_sep), a.valve + w * (b.valve - a.valve)};
    }

    std::size_t size() const { return samples_.size(); }
    double span() const { return span_; }

private:
    double span_;
    Sample init_;
    std::deque<Sample> samples_;
};

}  // namespace etherm
