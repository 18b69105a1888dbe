"""Configuration-driven experiments and the golden-report regression corpus.

A configuration names a ``kind``, input files (relative to the config file),
a seed and optional tolerance overrides and parameters.  ``run`` turns it
into a ``Report`` whose checks carry a status, a residual and a witness;
mathematical failures become failing checks rather than exceptions.
"""
from __future__ import annotations

import csv
import importlib.metadata
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import AlgElement, expectation_axioms, operator_norm
from .bimodule import Correspondence, bimodular_isometry, fuse, generates, mostow_radius, random_perturbation
from .crossed import CrossedElement, build_crossed_product, freeness_infimum, galois_scan, \
    reconstruction_residual, simplicity_probe, support
from .formats import action_from, correspondence_from, covariance_from, dump_json, element_from, load_json, \
    validate
from .semicircular import TruncatedFock, build_T, central_vectors, fgp_and_generator_check, \
    spanning_check, traciality_check, word_moment
from .tolerances import CSLabError, SchemaError, eps, override

STOCHASTIC_KINDS = {"crossed", "galois", "freeness", "mostow"}
IGNORED_KEYS = {"wall_time", "versions"}


def jsonable(obj):
    """Convert numbers, arrays and algebra objects into plain JSON values."""
    if isinstance(obj, AlgElement):
        return obj.to_json()
    if isinstance(obj, CrossedElement):
        return {"coefficients": [c.to_json()["blocks"] for c in obj.coeffs]}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return jsonable([[float(z.real), float(z.imag)] for z in obj.ravel()]) if obj.ndim == 1 \
                else [jsonable(row) for row in obj]
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


@dataclass
class Check:
    name: str
    status: str
    residual: float = None
    witness: object = None

    def to_json(self):
        return {"name": self.name, "status": self.status, "residual": jsonable(self.residual),
                "witness": jsonable(self.witness)}


def _status(ok):
    return "pass" if ok else "fail"


@dataclass
class Report:
    config: dict
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def ok(self):
        return all(c.status != "fail" for c in self.checks)

    def add(self, name, ok=None, residual=None, witness=None):
        status = "info" if ok is None else _status(bool(ok))
        self.checks.append(Check(name, status, residual, witness))

    def to_json(self):
        return {
            "config": self.config,
            "checks": [c.to_json() for c in self.checks],
            "results": jsonable(self.results),
            "ok": self.ok,
            "versions": versions(),
            "wall_time": self.wall_time,
        }

    def write(self, path):
        dump_json(self.to_json(), path)

    def write_csv(self, path):
        """Residual table: one row per check."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "status", "residual"])
            for c in self.checks:
                w.writerow([c.name, c.status, "" if c.residual is None else repr(float(c.residual))])


def versions():
    out = {"cslab": __version__}
    for pkg in ("numpy", "scipy", "networkx", "jsonschema"):
        try:
            out[pkg] = importlib.metadata.version(pkg)
        except importlib.metadata.PackageNotFoundError:
            out[pkg] = "unknown"
    return out


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def load_config(path):
    path = Path(path)
    cfg = load_json(path)
    return cfg, path.parent


def _input(cfg, base, key):
    try:
        ref = cfg["inputs"][key]
    except KeyError:
        raise SchemaError(f"config kind {cfg['kind']!r} needs inputs.{key}") from None
    refs = ref if isinstance(ref, list) else [ref]
    paths = [Path(base) / r for r in refs]
    for p in paths:
        if not p.exists():
            raise SchemaError(f"missing input file {p}")
    return paths if isinstance(ref, list) else paths[0]


def run(config, base=None):
    """Run one experiment; ``config`` is a dict or a path to a JSON file."""
    if isinstance(config, (str, Path)):
        config, base = load_config(config)
    base = Path(base or ".")
    validate(config, "config")
    kind = config["kind"]
    if kind in STOCHASTIC_KINDS and "seed" not in config:
        raise SchemaError(f"kind {kind!r} is stochastic and needs a seed")
    tols = config.get("tolerances", {})
    report = Report(config)
    start = time.perf_counter()
    with override(tols.get("eps"), tols.get("eps_psd")):
        try:
            RUNNERS[kind](config, base, report)
        except CSLabError as exc:
            if isinstance(exc, SchemaError):
                raise
            report.add(f"{kind}:error", False, witness={"error": type(exc).__name__, "message": str(exc)})
    report.wall_time = time.perf_counter() - start
    return report


def _params(cfg):
    return cfg.get("params", {})


def _seed(cfg):
    return int(cfg.get("seed", 0))


def _run_crossed(cfg, base, report):
    act = action_from(load_json(_input(cfg, base, "action")), _input(cfg, base, "action").parent)
    B = build_crossed_product(act)
    rng = np.random.default_rng(_seed(cfg))
    samples = int(_params(cfg).get("samples", 20))
    mult = four = supp_law = 0.0
    for _ in range(samples):
        x, y = B.random_element(rng), B.random_element(rng)
        mult = max(mult, float(np.linalg.norm((x * y).regular() - x.regular() @ y.regular(), 2)))
        four = max(four, reconstruction_residual(x) / (1.0 + x.norm()))
        sx, sy = support(x), support(y)
        prod = {int(B.group.mul[g, h]) for g in sx for h in sy}
        inv = {int(B.group.inv[g]) for g in sx}
        supp_law = max(supp_law, float(not support(x * y) <= prod), float(support(x.adjoint()) != inv))
    report.add("multiplication_law", mult <= eps(), mult)
    report.add("fourier_reconstruction", four <= 1e-12, four)
    report.add("support_laws", supp_law == 0.0, supp_law)
    big = [x.regular() for x in B.basis()]
    sub = [B.embed(e).regular() for e in B.algebra.basis()]
    rep = expectation_axioms(lambda m: B.embed(B.expectation(m)).regular(), big, sub, seed=_seed(cfg))
    report.add("canonical_expectation", rep.ok, max(v for k, v in rep.residuals.items()
                                                    if k != "faithful_min_eigenvalue"),
               [f["axiom"] for f in rep.failures] or None)
    report.results.update(dim=B.dim, group_order=B.group.order, algebra=B.algebra.label)


def _run_galois(cfg, base, report):
    path = _input(cfg, base, "action")
    B = build_crossed_product(action_from(load_json(path), path.parent))
    gal = galois_scan(B, samples=int(_params(cfg).get("samples", 10)), seed=_seed(cfg))
    for node in gal.nodes:
        res = max(node.subalgebra_residual, node.expectation_residual, node.compatibility_residual)
        report.add(f"subgroup:{list(node.subgroup)}", node.ok, res)
    report.add("lattice_complete", not gal.partial)
    report.results.update(nodes=[n.to_json() for n in gal.nodes], edges=gal.edges, count=len(gal.nodes))


def _run_freeness(cfg, base, report):
    path = _input(cfg, base, "action")
    act = action_from(load_json(path), path.parent)
    p = _params(cfg)
    expect = p.get("expect")
    budget = int(p.get("budget", 2000))
    xi_data = p.get("xi")
    out = []
    for g in range(act.group.order):
        if g == act.group.e:
            continue
        xi = element_from({"algebra": act.algebra.to_json(), "blocks": xi_data}, act.algebra) \
            if xi_data is not None else act.algebra.unit()
        res = freeness_infimum(act, g, xi, budget=budget, seed=_seed(cfg))
        ok = None
        if expect == "free":
            ok = res.value <= float(p.get("threshold", 1e-12))
        elif expect == "not_free":
            ok = res.value >= float(p.get("threshold", 0.4))
        report.add(f"freeness:g={g}", ok, res.value, {"strategy": res.strategy, "evaluations": res.evaluations})
        out.append({"g": g, "value": res.value, "strategy": res.strategy})
    report.results["freeness"] = out


def _run_simplicity(cfg, base, report):
    path = _input(cfg, base, "action")
    B = build_crossed_product(action_from(load_json(path), path.parent))
    rep = simplicity_probe(B)
    expect = _params(cfg).get("expect_simple")
    report.add("simplicity", None if expect is None else rep.is_simple == bool(expect), None,
               {"is_simple": rep.is_simple, "center_dim": rep.center_dim})
    report.results.update(is_simple=rep.is_simple, center_dim=rep.center_dim, block_sizes=rep.block_sizes)


def _run_fock(cfg, base, report):
    path = _input(cfg, base, "covariance")
    cov = covariance_from(load_json(path), path.parent)
    p = _params(cfg)
    depth = int(p.get("depth", 2))
    vac = bool(p.get("vacuum_exact", False))
    checks = p.get("checks", ["identity", "moment"])
    T = build_T(cov)
    F = TruncatedFock(T, depth)
    report.results["level_dims"] = F.dims
    report.add("build_T_postcondition", T.meta["postcondition_residual"] <= eps(),
               T.meta["postcondition_residual"])
    if "identity" in checks and depth >= 2:
        res = 0.0
        for e in cov.algebra.basis():
            for i in range(cov.index_count):
                for j in range(cov.index_count):
                    res = max(res, operator_norm(word_moment(F, [i, e, j]) - cov(i, j, e)))
        report.add("covariance_identity", res <= 1e-10, res)
    if "moment" in checks:
        expected = p.get("expected", {})
        moments = {}
        for word in p.get("words", []):
            m = word_moment(F, word, vacuum_exact=vac, elements=cov.elements)
            moments[word] = m
            if word in expected:
                target = expected[word]
                target = cov.algebra.scalar(complex(target)) if isinstance(target, (int, float)) else \
                    element_from({"algebra": cov.algebra.to_json(), "blocks": target}, cov.algebra)
                err = operator_norm(m - target)
                report.add(f"moment:{word}", err <= 1e-10, err)
            else:
                report.add(f"moment:{word}", None, None, m)
        report.results["moments"] = moments
    if "central" in checks:
        cv = central_vectors(F)
        report.add("central_vectors", None, None, {"level_dims": cv.level_dims,
                                                   "irreducible_truncated": cv.irreducible_truncated})
        report.results["central"] = {"level_dims": cv.level_dims, "irreducible_truncated": cv.irreducible_truncated,
                                     "scalar_vacuum_only": cv.scalar_vacuum_only}
    if "span" in checks:
        sp = spanning_check(F, cov)
        report.add("spanning", sp.full, float(sum(sp.deficits)), {"reached": sp.reached})
    if "traciality" in checks:
        tr = traciality_check(cov, seed=_seed(cfg))
        report.add("traciality", None, tr.residual, {"passed": tr.passed,
                                                     "conjugation_residual": tr.conjugation_residual})
    if "fgp" in checks:
        recs = fgp_and_generator_check(cov, trials=int(p.get("trials", 100)), seed=_seed(cfg))
        for r in recs:
            report.add(f"fgp:{r['index']}", r["fgp"], r["pp_residual"], r)


def _run_mostow(cfg, base, report):
    M = correspondence_from(load_json(_input(cfg, base, "correspondence")))
    p = _params(cfg)
    side = p.get("side", "bimodule")
    gens = p.get("gens", "distinguished")
    if gens == "distinguished":
        gens = list(M.distinguished)
    else:
        gens = [np.asarray(g, dtype=float)[:, 0] + 1j * np.asarray(g, dtype=float)[:, 1] for g in gens]
    trials = int(p.get("trials", 1000))
    delta = mostow_radius(M, gens, side)
    rng = np.random.default_rng(_seed(cfg))
    fails = 0
    for _ in range(trials):
        pert = [g + random_perturbation(M, delta, rng) for g in gens]
        fails += not generates(M, pert, side)
    report.add("mostow_soundness", fails == 0, float(fails), {"delta": delta, "trials": trials})
    report.results.update(delta=delta, side=side, carrier_dim=M.carrier_dim)


def _run_fusion(cfg, base, report):
    mods = [correspondence_from(load_json(pth)) for pth in _input(cfg, base, "correspondences")]
    A = mods[0].algebra
    unit = Correspondence.trivial(A)
    for k, M in enumerate(mods):
        for name, F in (("left_unit", fuse(unit, M)), ("right_unit", fuse(M, unit))):
            iso = bimodular_isometry(F, M)
            report.add(f"{name}:{k}", iso is not None and iso.residual <= eps(), None if iso is None else iso.residual)
    if len(mods) >= 3:
        M, N, P = mods[:3]
        iso = bimodular_isometry(fuse(fuse(M, N), P), fuse(M, fuse(N, P)))
        report.add("associativity", iso is not None and iso.residual <= eps(), None if iso is None else iso.residual)
    if "target" in cfg["inputs"]:
        target = correspondence_from(load_json(_input(cfg, base, "target")))
        F = fuse(mods[0], mods[1])
        iso = bimodular_isometry(F, target)
        report.add("target_isomorphism", iso is not None and iso.residual <= eps(),
                   None if iso is None else iso.residual)
    report.results["carrier_dims"] = [M.carrier_dim for M in mods]


RUNNERS = {
    "crossed": _run_crossed,
    "galois": _run_galois,
    "freeness": _run_freeness,
    "simplicity": _run_simplicity,
    "fock": _run_fock,
    "mostow": _run_mostow,
    "fusion": _run_fusion,
}


# ---------------------------------------------------------------------------
# regression corpus
# ---------------------------------------------------------------------------

def _diff(golden, actual, path, out, atol):
    if isinstance(golden, dict) and isinstance(actual, dict):
        for k in sorted(set(golden) | set(actual)):
            if k in IGNORED_KEYS:
                continue
            if k not in golden or k not in actual:
                out.append({"path": f"{path}/{k}", "golden": golden.get(k), "actual": actual.get(k)})
            else:
                _diff(golden[k], actual[k], f"{path}/{k}", out, atol)
    elif isinstance(golden, list) and isinstance(actual, list):
        if len(golden) != len(actual):
            out.append({"path": path, "golden": f"len {len(golden)}", "actual": f"len {len(actual)}"})
        else:
            for i, (g, a) in enumerate(zip(golden, actual)):
                _diff(g, a, f"{path}[{i}]", out, atol)
    elif isinstance(golden, (int, float)) and isinstance(actual, (int, float)) \
            and not isinstance(golden, bool) and not isinstance(actual, bool):
        if abs(golden - actual) > atol:
            out.append({"path": path, "golden": golden, "actual": actual})
    elif golden != actual:
        out.append({"path": path, "golden": golden, "actual": actual})


def diff_reports(golden, actual, atol=1e-12):
    out = []
    _diff(golden, actual, "", out, atol)
    return out


def corpus_cases(directory):
    return sorted(Path(directory).glob("*.config.json"))


def corpus_regression(directory, atol=1e-12):
    """Re-run every ``*.config.json`` and diff it against its ``*.golden.json``."""
    summary = {"cases": [], "drifts": [], "missing_golden": [], "failed_checks": []}
    for cfg_path in corpus_cases(directory):
        name = cfg_path.name[: -len(".config.json")]
        summary["cases"].append(name)
        report = run(cfg_path)
        if not report.ok:
            summary["failed_checks"].append(name)
        gold_path = cfg_path.with_name(f"{name}.golden.json")
        if not gold_path.exists():
            summary["missing_golden"].append(name)
            continue
        actual = jsonable(report.to_json())
        for d in diff_reports(load_json(gold_path), actual, atol):
            summary["drifts"].append({"case": name, **d})
    return summary


def update_corpus(directory):
    """Write golden reports for every config in ``directory``."""
    written = []
    for cfg_path in corpus_cases(directory):
        name = cfg_path.name[: -len(".config.json")]
        dump_json(jsonable(run(cfg_path).to_json()), cfg_path.with_name(f"{name}.golden.json"))
        written.append(name)
    return written
