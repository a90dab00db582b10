# 04_corpus_evaluation.py
#
# Score both classifiers on the frozen 300-scenario corpus: three families
# of 100 (oscillating delayed recovery, over-voltage, slow recovery), each
# with violating, benign and nominal members. Ground truth is the
# 0.005 pu / 250 ms rule against the example criteria.
import sys

from fidvr.criteria import example_criteria
from fidvr.report import evaluate_corpus, format_matrix
from fidvr.synth import build_corpus, builtin_template

criteria = example_criteria()
corpus = build_corpus(builtin_template("acceptance"))
jobs = int(sys.argv[1]) if len(sys.argv) > 1 else 1
ev = evaluate_corpus(corpus, criteria, jobs=jobs)

print(format_matrix(ev.legacy, "legacy KL index"))
print()
print(format_matrix(ev.evrvi, "EVRVI"))
print()

# where the plain index goes wrong, by family
for fam in ("osc", "ov", "fidvr"):
    rows = [r for r in ev.rows if r.scenario_id.startswith(fam + "-")]
    fn = sum(r.truth and not r.legacy_pred for r in rows)
    fp = sum(r.legacy_pred and not r.truth for r in rows)
    print(f"{fam:6s} legacy misses {fn:3d}, false alarms {fp:3d}")

if jobs == 1:
    print(f"\nclassifier time: legacy {ev.legacy_seconds * 1e3:.1f} ms, "
          f"EVRVI {ev.evrvi_seconds * 1e3:.1f} ms, ratio {ev.runtime_ratio:.2f}")
