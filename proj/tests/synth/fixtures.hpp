#pragma once

// Hand-checkable fixture databases.
//
// SYNTH-1: Connecticut (STATECD 9), one VOL evaluation 91801 reporting 2018,
// one estimation unit of 1000 acres, one stratum (W = 1, adjustments 1.0),
// four fully forested single-condition plots measured in 2018.
//   P1 (-72.5, 41.5) OWNCD 31: two live SPCD 316 trees, DIA 10, TPA_UNADJ 6
//   P2 (-72.4, 41.6) OWNCD 31: one live SPCD 129 tree, DIA 20, TPA_UNADJ 6
//   P3 (-71.5, 41.5) OWNCD 46: no trees
//   P4 (-71.4, 41.6) OWNCD 46: one live SPCD 316 tree, DIA 6, TPA_UNADJ 6
// Every tree: VOLCFNET 100, VOLCSNET 80, DRYBIO_AG 1000, DRYBIO_BG 200,
// CARBON_AG 500, CARBON_BG 100 (lb).
//
// SYNTH-5PANEL: 20 plots in two strata (W 0.6 / 0.4, plots 1-12 / 13-20) of a
// 5000-acre unit; panel years 2014-2018 with plot i in year 2014 + (i-1) % 5,
// so each panel holds 20% of the plots. Plot i carries 1 + i % 3 live SPCD
// 316 trees of DIA 8 + i % 7 and TPA_UNADJ 6.
//
// SYNTH-GRM: the SYNTH-1 plots with REMPER 5 plus a GRM evaluation 91803
// over the same unit and stratum.
//   P1: mortality tree DIA 8, TPAMORT_UNADJ 6 (MORT_TPA = 6/5/4 = 0.3)
//   P2: survivor SPCD 316, DIA 11 (prev 10), TPAGROW_UNADJ 6,
//       VOLCFNET 20 (prev 15), DRYBIO_AG 300 (prev 250)
//   P3: cut tree DIA 12, TPAREMV_UNADJ 6
//   P4: ingrowth tree DIA 5.5, TPAGROW_UNADJ 6, and a live 1.2-inch sapling
//       (microplot, TPA_UNADJ 74.965) recorded as ingrowth, which the
//       default DIA >= 5 growMort domain excludes and tpa includes.
//
// SYNTH-INV: SYNTH-1 with the invasive protocol on P1, P2, and P4 (not P3).
//   P1: ALPE4 cover 40
//   P2: ALPE4 cover 10, CEOR7 cover 25
// P2 also carries seedlings (SPCD 316, TREECOUNT 2, TPA_UNADJ 74.97, so
// seedling TPA = 2 * 74.97 / 4 = 37.485) and P1 carries down woody
// material (1000HR: 50 ft3, 0.8 t, 0.4 t per acre).

#include <string_view>
#include <vector>

#include "timberline/database.hpp"

namespace timberline::synth {

inline const std::vector<std::string_view> kFixtureNames = {"SYNTH-1", "SYNTH-5PANEL", "SYNTH-GRM", "SYNTH-INV"};

ForestDatabase buildFixture(std::string_view name);

Tables synth1Tables();

}  // namespace timberline::synth
