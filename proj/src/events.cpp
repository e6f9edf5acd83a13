#include "foveal/events.hpp"

#include <algorithm>

namespace foveal {

std::vector<Violation> validate(const EventStream& stream) {
    std::vector<Violation> out;
    const auto& ev = stream.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const DvsEvent& e = ev[i];
        if (e.x >= stream.width || e.y >= stream.height) {
            out.push_back({i, "event " + std::to_string(i) + ": coordinate (" + std::to_string(e.x) + ", " +
                                  std::to_string(e.y) + ") outside " + std::to_string(stream.width) + "x" +
                                  std::to_string(stream.height)});
        }
        if (e.polarity != 1 && e.polarity != -1) {
            out.push_back({i, "event " + std::to_string(i) + ": polarity " + std::to_string(int{e.polarity}) +
                                  " is not +1/-1"});
        }
        if (i > 0 && e.t_us < ev[i - 1].t_us) {
            out.push_back({i, "event " + std::to_string(i) + ": timestamp " + std::to_string(e.t_us) +
                                  " precedes " + std::to_string(ev[i - 1].t_us)});
        }
    }
    return out;
}

EventStream sort_events(EventStream stream) {
    std::stable_sort(stream.events.begin(), stream.events.end(),
                     [](const DvsEvent& a, const DvsEvent& b) { return a.t_us < b.t_us; });
    return stream;
}

PolarityCounts polarity_counts(const EventStream& stream) {
    PolarityCounts c;
    for (const DvsEvent& e : stream.events) {
        if (e.polarity > 0)
            ++c.on;
        else
            ++c.off;
    }
    return c;
}

}  // namespace foveal
