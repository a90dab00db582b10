# 03_parameter_sensitivity.py
#
# The envelope index divides two divergences computed the same way, so the
# Gaussian spread s and the partition count N largely cancel. The plain KL
# index has no such normalisation, and its verdicts move with lambda.
import itertools

from fidvr.criteria import criterion_trace, example_criteria
from fidvr.entropy import LegacyConfig, legacy_kl_index
from fidvr.evrvi import EvrviConfig, assess
from fidvr.synth import build_corpus, builtin_template

criteria = example_criteria()
corpus = build_corpus(builtin_template("acceptance"))
print(f"{len(corpus)} scenarios")

baseline = None
for s, n in itertools.product((0.01, 0.02, 0.05, 0.1), (64, 128, 256, 512)):
    cfg = EvrviConfig(s=s, n_partitions=n)
    flags = [(r.uv_violation, r.ov_violation)
             for r in (assess(sc.trace, criteria.uv, criteria.ov, cfg) for sc in corpus)]
    baseline = flags if baseline is None else baseline
    changed = sum(a != b for a, b in zip(flags, baseline))
    print(f"EVRVI  s={s:<5} N={n:<4} violations={sum(any(f) for f in flags):3d} "
          f"changed vs first={changed}")

reference = criterion_trace(criteria.uv, 0.01, 10.0)
for lam in (0.05, 0.1, 0.2):
    flags = [legacy_kl_index(sc.trace, reference, LegacyConfig(lam=lam)).violated for sc in corpus]
    print(f"legacy lambda={lam:<4} violations={sum(flags):3d}")
