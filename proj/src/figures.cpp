// Bundled reproduction configs. Parameter values not fixed by the physics
// are choices, stated in the comments of each config.

#include "poleflow/commands.hpp"

namespace poleflow {

const std::vector<Figure>& bundled_figures() {
  static const std::vector<Figure> figs = {
      {"fig3",
       "square well a = 1.5, depth swept from a deep well to a tall wall",
       {{"well", "flow", R"({
  // Well branch. U = 40 down to 0.01; U = 0 itself is the free particle,
  // where every resonance has left through Im k -> -inf.
  "potential": {"pieces": [{"from": -1.5, "to": 1.5, "value": -40}]},
  "sweep": {"target": "depth:0", "from": 40, "to": 0.01},
  "window": {"re_min": -7, "re_max": 7, "im_min": -12, "im_max": 10},
  "output": {"flow": "well_flow.csv"}
})"},
        {"wall", "flow", R"({
  // Wall branch, U = -0.01 down to -40 (V = +|U| on the piece).
  "potential": {"pieces": [{"from": -1.5, "to": 1.5, "value": 0.01}]},
  "sweep": {"target": "depth:0", "from": -0.01, "to": -40},
  "window": {"re_min": -7, "re_max": 7, "im_min": -12, "im_max": 10},
  "output": {"flow": "wall_flow.csv"}
})"}}},
      {"fig4",
       "square well a = 1.5: bound and anti-bound poles with the branch points of K",
       {{"axis", "flow", R"({
  // Imaginary-axis strip only; U from 3 down to 0.01 passes the zero-energy
  // depths n^2 pi^2 / 18 for n = 1, 2 and the coalescence near U = 1.96.
  "potential": {"pieces": [{"from": -1.5, "to": 1.5, "value": -3}]},
  "sweep": {"target": "depth:0", "from": 3, "to": 0.01},
  "window": {"re_min": -1.5, "re_max": 1.5, "im_min": -4, "im_max": 3},
  "output": {"flow": "axis_flow.csv", "branch_points": "branch_points.csv"}
})"}}},
      {"fig5",
       "square well a = 1.5: two anti-bound poles merge at k = -i/a and leave as a resonance pair",
       {{"merge", "flow", R"({
  // U from 2.4 down to 1.6 brackets the coalescence near U = 1.96.
  "potential": {"pieces": [{"from": -1.5, "to": 1.5, "value": -2.4}]},
  "sweep": {"target": "depth:0", "from": 2.4, "to": 1.6},
  "window": {"re_min": -1.5, "re_max": 1.5, "im_min": -2, "im_max": 0.5},
  "continuation": {"dp_max": 0.002},
  "output": {"flow": "merge_flow.csv"}
})"}}},
      {"fig6",
       "well + wall, well U = 2 fixed on [-1.5, 0], second piece swept from a well to a wall",
       {{"second_piece", "flow", R"({
  // Fixed piece magnitude 2 and the swept value over [-50, 50] are
  // representative choices. Positive values are walls.
  "potential": {"pieces": [{"from": -1.5, "to": 0, "value": -2},
                           {"from": 0, "to": 1.5, "value": -50}]},
  "sweep": {"target": "value:1", "from": -50, "to": 50},
  "window": {"re_min": -10, "re_max": 10, "im_min": -6, "im_max": 11},
  // Near a zero value the resonances of that piece leave through Im k -> -inf
  // at a rate ~1/|p|; the window bottom is only passed for |p| ~ 1e-11.
  "continuation": {"dp_min": 1e-13},
  "output": {"flow": "second_piece_flow.csv"}
})"}}},
      {"fig7",
       "well + wall, wall H = 2 fixed on [0, 1.5], first piece depth swept",
       {{"first_piece", "flow", R"({
  // Depth U of the first piece over [-50, 50]; U < 0 makes it a wall.
  "potential": {"pieces": [{"from": -1.5, "to": 0, "value": 50},
                           {"from": 0, "to": 1.5, "value": 2}]},
  "sweep": {"target": "depth:0", "from": -50, "to": 50},
  "window": {"re_min": -10, "re_max": 10, "im_min": -6, "im_max": 11},
  // Near a zero value the resonances of that piece leave through Im k -> -inf
  // at a rate ~1/|p|; the window bottom is only passed for |p| ~ 1e-11.
  "continuation": {"dp_min": 1e-13},
  "output": {"flow": "first_piece_flow.csv"}
})"}}},
      {"fig8",
       "shallow well U = 0.5 next to a rising wall: the resonance line splits in two",
       {{"unzip", "flow", R"({
  // Both widths 1.5; the wall height H runs from 10 to 100.
  "potential": {"pieces": [{"from": -1.5, "to": 0, "value": -0.5},
                           {"from": 0, "to": 1.5, "value": 10}]},
  "sweep": {"target": "value:1", "from": 10, "to": 100},
  "window": {"re_min": 0.05, "re_max": 20, "im_min": -4, "im_max": -0.01},
  "output": {"flow": "unzip_flow.csv"}
})"},
        {"reflection", "spectrum", R"({
  // Transmission and reflection at H = 100 with the census peaks listed.
  "potential": {"pieces": [{"from": -1.5, "to": 0, "value": -0.5},
                           {"from": 0, "to": 1.5, "value": 100}]},
  "spectrum": {"k_min": 0.05, "k_max": 20, "n": 4000},
  "window": {"re_min": 0.05, "re_max": 20, "im_min": -4, "im_max": -0.01},
  "output": {"spectrum": "reflection_spectrum.csv"}
})"}}},
      {"fig9",
       "as fig8 with the wall twice as wide",
       {{"unzip_wide", "flow", R"({
  // Wall width 3 instead of 1.5, everything else as in fig8.
  "potential": {"pieces": [{"from": -1.5, "to": 0, "value": -0.5},
                           {"from": 0, "to": 3, "value": 10}]},
  "sweep": {"target": "value:1", "from": 10, "to": 100},
  "window": {"re_min": 0.05, "re_max": 20, "im_min": -4, "im_max": -0.01},
  "output": {"flow": "unzip_wide_flow.csv"}
})"},
        {"reflection_wide", "spectrum", R"({
  "potential": {"pieces": [{"from": -1.5, "to": 0, "value": -0.5},
                           {"from": 0, "to": 3, "value": 100}]},
  "spectrum": {"k_min": 0.05, "k_max": 20, "n": 4000},
  "window": {"re_min": 0.05, "re_max": 20, "im_min": -4, "im_max": -0.01},
  "output": {"spectrum": "reflection_wide_spectrum.csv"}
})"}}},
      {"fig10",
       "fixed well U = 2 plus a variable well/wall: bound trajectories with inflexion points",
       {{"bound", "flow", R"({
  // Second piece value from -20 (deep well) to 20 (wall); only the
  // imaginary-axis strip is tracked.
  "potential": {"pieces": [{"from": -1.5, "to": 0, "value": -2},
                           {"from": 0, "to": 1.5, "value": -20}]},
  "sweep": {"target": "value:1", "from": -20, "to": 20},
  "window": {"re_min": -0.5, "re_max": 0.5, "im_min": -3, "im_max": 7},
  "output": {"flow": "bound_flow.csv"}
})"}}},
      {"fig11",
       "fixed wall H = 2 next to a deepening well",
       {{"deepening", "flow", R"({
  // Well depth from 0.01 to 50 on [-1.5, 0], wall on [0, 1.5].
  "potential": {"pieces": [{"from": -1.5, "to": 0, "value": -0.01},
                           {"from": 0, "to": 1.5, "value": 2}]},
  "sweep": {"target": "depth:0", "from": 0.01, "to": 50},
  "window": {"re_min": -10, "re_max": 10, "im_min": -6, "im_max": 11},
  "output": {"flow": "deepening_flow.csv"}
})"}}},
      {"fig12",
       "unequal widths: well U = 2 on [-1, 0], second piece on [0, 2] swept from a well to a wall",
       {{"unequal", "flow", R"({
  "potential": {"pieces": [{"from": -1, "to": 0, "value": -2},
                           {"from": 0, "to": 2, "value": -50}]},
  "sweep": {"target": "value:1", "from": -50, "to": 50},
  "window": {"re_min": -10, "re_max": 10, "im_min": -6, "im_max": 11},
  // Near a zero value the resonances of that piece leave through Im k -> -inf
  // at a rate ~1/|p|; the window bottom is only passed for |p| ~ 1e-11.
  "continuation": {"dp_min": 1e-13},
  "output": {"flow": "unequal_flow.csv"}
})"}}},
      {"fig13",
       "delta sequence, 2aU = 1 held fixed as a -> 0: one bound pole tends to k = i",
       {{"delta", "flow", R"({
  // Square well template of half width 0.5 and depth 1 (area -1); the
  // fixed_area constraint rescales the depth as the half width shrinks.
  "potential": {"pieces": [{"from": -0.5, "to": 0.5, "value": -1}]},
  "sweep": {"target": "half_width", "from": 0.5, "to": 0.005, "constraint": "fixed_area"},
  "window": {"re_min": -10, "re_max": 10, "im_min": -10, "im_max": 1.5},
  "output": {"flow": "delta_flow.csv"}
})"}}},
      {"fig14",
       "antisymmetric step pair with U = 1 fixed as a -> 0: the bound pole tends to k = 0",
       {{"delta_prime", "flow", R"({
  // -U on [-a, 0], +U on [0, a], U held fixed (constraint none).
  "potential": {"pieces": [{"from": -0.5, "to": 0, "value": -1},
                           {"from": 0, "to": 0.5, "value": 1}]},
  "sweep": {"target": "half_width", "from": 0.5, "to": 0.01},
  "window": {"re_min": -10, "re_max": 10, "im_min": -10, "im_max": 1},
  "output": {"flow": "delta_prime_flow.csv"}
})"}}},
      {"fig15",
       "resonances of both limiting sequences leave every bounded window",
       {{"delta_wide", "flow", R"({
  "potential": {"pieces": [{"from": -0.5, "to": 0.5, "value": -1}]},
  "sweep": {"target": "half_width", "from": 0.5, "to": 0.01, "constraint": "fixed_area"},
  "window": {"re_min": -20, "re_max": 20, "im_min": -20, "im_max": 2},
  "output": {"flow": "delta_wide_flow.csv"}
})"},
        {"delta_prime_wide", "flow", R"({
  "potential": {"pieces": [{"from": -0.5, "to": 0, "value": -1},
                           {"from": 0, "to": 0.5, "value": 1}]},
  "sweep": {"target": "half_width", "from": 0.5, "to": 0.01},
  "window": {"re_min": -20, "re_max": 20, "im_min": -20, "im_max": 2},
  "output": {"flow": "delta_prime_wide_flow.csv"}
})"}}},
  };
  return figs;
}

}  // namespace poleflow
