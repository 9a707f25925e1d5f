// Derives the pointwise slack tolerance eps_h = c1 h + c2 dt^2 from the identity preset.
// The printed constants are the ones frozen in SlackTolerance.

#include <algorithm>
#include <cstdio>

#include "bilinear/harness/pointwise.hpp"

using namespace bilinear;
using namespace bilinear::harness;

int main() {
    constexpr double kSafety = 2.0;
    const PointwiseProtocol protocol;
    const SlackTolerance none{0.0, 0.0};
    double c1 = 0.0, c2 = 0.0;
    for (int dim : protocol.dims) {
        for (double p : protocol.exponents) {
            const PresetOptions base = protocol.options("identity", dim, p);
            for (const auto& level : pointwise_ladder(base, protocol.cells, none)) {
                c1 = std::max(c1, -level.worst_slack / level.h);
                std::printf("n=%d p=%g cells=%d h=%.17g dt=%.17g worst=%.17g\n", dim, p, level.cells, level.h,
                            level.dt, level.worst_slack);
            }
            // dt sensitivity at the middle level: rerun with a step ten times larger
            PresetOptions coarse = base;
            coarse.cells = protocol.cells[protocol.cells.size() / 2];
            const auto fine = pointwise_ladder(coarse, {coarse.cells}, none).front();
            coarse.dt = 10.0 * fine.dt;
            const auto wide = pointwise_ladder(coarse, {coarse.cells}, none).front();
            c2 = std::max(c2, (fine.worst_slack - wide.worst_slack) / (wide.dt * wide.dt));
        }
    }
    std::printf("c1 = %.17g\nc2 = %.17g\n", kSafety * c1, kSafety * std::max(c2, 0.0));
    return 0;
}
