"""Configuration-driven runs and the golden-report corpus.

Runs one shipped configuration, prints its checks, and re-checks the whole
corpus in ``fixtures/`` against the stored golden reports.
"""
from pathlib import Path

from cslab.experiments import corpus_regression, run

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

report = run(FIXTURES / "s3_galois.config.json")
for check in report.checks:
    print(f"  {check.name:28s} {check.status:5s} {check.residual}")
print(f"report ok: {report.ok}")

summary = corpus_regression(FIXTURES)
print(f"corpus: {len(summary['cases'])} cases, {len(summary['drifts'])} drifts, "
      f"{len(summary['failed_checks'])} failing")
