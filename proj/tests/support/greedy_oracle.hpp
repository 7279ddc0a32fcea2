#pragma once

#include <algorithm>
#include <random>
#include <sstream>
#include <string>

#include "anchorweave/retrieval.hpp"
#include "oracles.hpp"

namespace awtest {

struct RandomBankCase {
  anchorweave::MemoryBank bank;
  ChunkPlan chunk;
  Intrinsics k;
  anchorweave::RetrievalConfig cfg;
};

/// Small random bank (1..8 memories) and a chunk of 1..4 poses near the origin.
/// Some banks keep every memory behind the cameras so the empty-pool path runs.
inline RandomBankCase random_bank_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomBankCase c;
  c.k.fx = c.k.fy = 30.0;
  c.k.width = c.k.height = 32;
  c.k.cx = c.k.cy = 15.5;
  const int poses = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < poses; ++i) {
    c.chunk.poses.push_back(anchorweave::geometry::compose(anchorweave::geometry::translate(0.3 * u(rng) - 0.15, 0, 0.2 * i),
                                                           anchorweave::geometry::rotate_y(0.3 * u(rng) - 0.15)));
  }
  c.chunk.frame_end = poses;
  const int memories = 1 + static_cast<int>(rng() % 8);
  const bool all_behind = rng() % 12 == 0;
  for (int m = 0; m < memories; ++m) {
    const std::size_t n = 5 + rng() % 300;
    const bool behind = all_behind || rng() % 6 == 0;
    c.bank.add(m, random_blob(rng, n, behind, Pose::identity()));
  }
  c.cfg.budget = 1 + static_cast<int>(rng() % 6);
  const double taus[] = {0.0, 0.01, 0.2};
  c.cfg.tau = taus[rng() % 3];
  c.cfg.coverage_scale = 1 + static_cast<int>(rng() % 4);
  c.cfg.splat_radius = 0.5 + 2.0 * u(rng);
  return c;
}

/// Replays greedy selection with set-based coverage and checks each step of
/// `r` against the exhaustive maximum over the remaining pool. Returns an
/// empty string on agreement.
inline std::string check_greedy(const RandomBankCase& c, const anchorweave::RetrievalResult& r) {
  using anchorweave::Termination;
  std::ostringstream err;
  const auto& bank = c.bank;
  const auto& seed = bank.latest();

  std::vector<std::int64_t> candidates;
  for (const auto& e : bank.entries()) {
    if (in_view(e->cloud, c.chunk, c.k, c.cfg.tau)) candidates.push_back(e->id);
  }
  if (candidates != r.candidates) return "candidate set differs from full-cloud field-of-view test";

  std::vector<std::pair<std::int64_t, CellSet>> pool;
  for (std::int64_t id : candidates) {
    if (id != seed.id) pool.emplace_back(id, coverage(bank.at(id).cloud, c.chunk, c.k, c.cfg.splat_radius, c.cfg.coverage_scale));
  }
  CellSet covered = coverage(seed.cloud, c.chunk, c.k, c.cfg.splat_radius, c.cfg.coverage_scale);
  CellSet universe = covered;
  for (const auto& [id, cells] : pool) universe.insert(cells.begin(), cells.end());
  if (universe.size() != r.universe_count) return "universe size differs";

  if (r.selected.empty() || r.selected[0] != seed.id) return "seed is not the latest memory";
  if (r.gains.size() != r.selected.size()) return "gain/selection length mismatch";
  if (r.gains[0] != covered.size()) return "seed gain differs";
  if (r.selected.size() > static_cast<std::size_t>(c.cfg.budget)) return "budget exceeded";

  std::uint64_t running = covered.size();
  for (std::size_t step = 1; step < r.selected.size(); ++step) {
    std::size_t best_gain = 0;
    std::int64_t best_id = -1;
    for (const auto& [id, cells] : pool) {
      const std::size_t g = count_new(cells, covered);
      if (g > best_gain) {
        best_gain = g;
        best_id = id;
      }
    }
    if (r.gains[step] != best_gain || r.selected[step] != best_id) {
      err << "step " << step << ": picked " << r.selected[step] << " gain " << r.gains[step] << ", oracle "
          << best_id << " gain " << best_gain;
      return err.str();
    }
    if (best_gain == 0) return "zero-gain selection";
    auto it = std::find_if(pool.begin(), pool.end(), [&](const auto& p) { return p.first == best_id; });
    covered.insert(it->second.begin(), it->second.end());
    pool.erase(it);
    if (covered.size() <= running) return "coverage not strictly increasing";
    running = covered.size();
  }
  if (r.covered_count != covered.size()) return "covered count differs";

  const bool full = !universe.empty() && covered.size() == universe.size();
  Termination expect;
  if (full) {
    expect = Termination::full_coverage;
  } else if (r.selected.size() >= static_cast<std::size_t>(c.cfg.budget)) {
    expect = Termination::budget_exhausted;
  } else {
    expect = Termination::pool_exhausted;
    for (const auto& [id, cells] : pool) {
      if (count_new(cells, covered) > 0) return "stopped early with positive gain available";
    }
  }
  if (r.termination != expect) {
    err << "termination " << anchorweave::to_string(r.termination) << ", oracle " << anchorweave::to_string(expect);
    return err.str();
  }
  return {};
}

}  // namespace awtest
