// Serial vs OpenMP timings for the three parallel kernels: subset
// assembly, batch pair scoring, and report building. Each kernel's two
// modes must agree exactly; the point of the numbers is the speedup.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "ontomatch/cache.hpp"
#include "ontomatch/dataset.hpp"
#include "ontomatch/eval.hpp"
#include "ontomatch/retrieval.hpp"
#include "ontomatch/scorers.hpp"

#include "../tests/testutil.hpp"

using namespace ontomatch;
using Clock = std::chrono::steady_clock;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto start = Clock::now();
    fn();
    const std::chrono::duration<double, std::milli> took = Clock::now() - start;
    if (took.count() < best) best = took.count();
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-18s serial %9.1f ms   parallel %9.1f ms   speedup %.2fx\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const int scale = argc > 1 ? std::atoi(argv[1]) : 1;
  if (scale < 1) {
    std::fprintf(stderr, "usage: %s [scale>=1]\n", argv[0]);
    return 1;
  }
  const int repeats = 3;

  // Subset assembly: candidate retrieval dominates.
  {
    const auto world =
        testutil::make_world(200 * scale, 300 * scale, 1500 * scale);
    const InvertedIndex ix = InvertedIndex::build(world.tgt, world.vocab);
    const std::size_t n = 60;
    const std::size_t width = 100;

    AssembledSubset serial_out, parallel_out;
    const double serial = best_of(repeats, [&] {
      serial_out = assemble_subset(world.src, world.tgt, world.refs, ix, n, n,
                                   width, 3, ExecMode::Serial);
    });
    const double parallel = best_of(repeats, [&] {
      parallel_out = assemble_subset(world.src, world.tgt, world.refs, ix, n, n,
                                     width, 3, ExecMode::Parallel);
    });
    if (serialize_subset_jsonl(serial_out.subset) !=
        serialize_subset_jsonl(parallel_out.subset)) {
      std::fprintf(stderr, "assemble_subset modes disagree\n");
      return 1;
    }
    report("assemble_subset", serial, parallel);
  }

  // Batch scoring with the edit-similarity scorer.
  {
    const auto world = testutil::make_world(400 * scale, 0, 0);
    std::vector<PairTask> tasks;
    for (const auto& [src_iri, src_c] : world.src.concepts()) {
      for (const MappingPair& ref : world.refs) {
        PairTask t;
        t.source = src_iri;
        t.target = ref.target;
        t.source_labels = src_c.labels;
        t.target_labels = world.tgt.at(ref.target).labels;
        tasks.push_back(std::move(t));
        if (tasks.size() % 50 == 0) break;
      }
    }
    EditSimilarityScorer scorer(0.9);

    BatchOutcome serial_out, parallel_out;
    const double serial = best_of(repeats, [&] {
      serial_out = score_pairs(tasks, scorer, nullptr, ExecMode::Serial);
    });
    const double parallel = best_of(repeats, [&] {
      parallel_out = score_pairs(tasks, scorer, nullptr, ExecMode::Parallel);
    });
    if (serial_out.verdicts != parallel_out.verdicts) {
      std::fprintf(stderr, "score_pairs modes disagree\n");
      return 1;
    }
    std::printf("(score_pairs: %zu pairs)\n", tasks.size());
    report("score_pairs", serial, parallel);
  }

  // Report building over a large scored run.
  {
    std::mt19937_64 g(17);
    std::vector<testutil::RandomRun> runs;
    for (int i = 0; i < 6 * scale; ++i) runs.push_back(testutil::random_run(g, 60, 90));

    EvalSettings settings;
    settings.threshold = 0.65;
    settings.scorer_id = "bench";

    std::vector<EvalReport> serial_reports, parallel_reports;
    const double serial = best_of(repeats, [&] {
      serial_reports.clear();
      for (const auto& rr : runs) {
        serial_reports.push_back(build_report(rr.subset, rr.reference, rr.run,
                                              settings, ExecMode::Serial));
      }
    });
    const double parallel = best_of(repeats, [&] {
      parallel_reports.clear();
      for (const auto& rr : runs) {
        parallel_reports.push_back(build_report(rr.subset, rr.reference, rr.run,
                                                settings, ExecMode::Parallel));
      }
    });
    if (serial_reports != parallel_reports) {
      std::fprintf(stderr, "build_report modes disagree\n");
      return 1;
    }
    report("build_report", serial, parallel);
  }

  return 0;
}
