"""Command-line front end: manifest-driven experiment runs, a self-test suite,
and configuration printing. Outputs are CSV tables plus JSON mirrors whose
data sections are byte-stable across thread counts."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import estimation as est
from . import gla
from .clusters import (
    chain_inequality_check,
    cluster_tail_estimate,
    marginal_domination_check,
)
from .coloring import (
    PC_SITE,
    ColoringLaw,
    LawRegionParams,
    derive_seed,
    sample_color_field,
)
from .lattice import ORACLE_MAX_PATH_LEN, LatticeBox, LatticePath, neighbors

KINDS = (
    "timeconst",
    "mu-k",
    "shape",
    "hausdorff-sweep",
    "animals",
    "cluster-tail",
    "chain-check",
    "domination",
)

EXIT_MANIFEST = 2
EXIT_PRECONDITION = 3
EXIT_INVARIANT = 4


class ManifestError(Exception):
    pass


def manifest_digest(manifest: dict) -> str:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _load_law(manifest: dict, key: str = "law", file_key: str = "law_file") -> ColoringLaw:
    if file_key in manifest:
        return ColoringLaw.load(manifest[file_key])
    if key not in manifest:
        raise ManifestError(f"manifest needs {key!r} or {file_key!r}")
    return ColoringLaw.from_json(manifest[key])


def _require(manifest: dict, *keys: str) -> None:
    for key in keys:
        if key not in manifest:
            raise ManifestError(f"manifest missing required field {key!r}")


def load_manifest(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot parse manifest: {exc}") from exc
    if not isinstance(manifest, dict):
        raise ManifestError("manifest must be a JSON object")
    if manifest.get("kind") not in KINDS:
        raise ManifestError(f"unknown kind {manifest.get('kind')!r}; expected one of {KINDS}")
    for key in ("dimension", "seed"):
        if key not in manifest:
            raise ManifestError(f"manifest missing required field {key!r}")
    return manifest


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path: Path, meta: dict, columns: list[str], rows: list[tuple]) -> None:
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(f"# generated={time.strftime('%Y-%m-%dT%H:%M:%S')}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _config_from_manifest(manifest: dict) -> est.EstimatorConfig:
    _require(manifest, "n_schedule", "replicas")
    d = int(manifest["dimension"])
    count = int(manifest.get("directions", 64))
    dirs = est.default_directions(d, count)
    k_list = manifest.get("k_list")
    return est.EstimatorConfig(
        dimension=d,
        n_schedule=tuple(int(n) for n in manifest["n_schedule"]),
        replicas=int(manifest["replicas"]),
        base_seed=int(manifest["seed"]),
        directions=dirs,
        margin=float(manifest.get("margin", 1.5)),
        k_list=tuple(float(k) for k in k_list) if k_list else None,
        eps_zero=float(manifest.get("eps_zero", est.DEFAULT_EPS_ZERO)),
    )


def _meta(manifest: dict, digest: str) -> dict:
    return {
        "artifact": f"colorfpp {__version__}",
        "kind": manifest["kind"],
        "manifest_digest": digest,
        "seed": manifest["seed"],
    }


def _run_timeconst(manifest: dict, digest: str, out: Path, threads: int) -> list[Path]:
    law = _load_law(manifest)
    cfg = _config_from_manifest(manifest)
    result = est.estimate_mu(law, cfg, threads=threads)
    rows = []
    for n in cfg.n_schedule:
        means, discarded = result.trace[n]
        for i in range(result.n_directions):
            if n == cfg.n_max:
                rows.append(
                    (digest, manifest["seed"], i, n, means[i], result.stderr[i], int(discarded[i]))
                )
            else:
                rows.append((digest, manifest["seed"], i, n, means[i], float("nan"), int(discarded[i])))
    csv_path = out / f"timeconst-{digest[:12]}.csv"
    write_csv(csv_path, _meta(manifest, digest), ["manifest_digest", "seed", "direction", "n", "mean", "stderr", "discarded"], rows)
    payload = {
        "meta": _meta(manifest, digest),
        "law": law.to_json(),
        "directions": result.directions,
        "values": result.values,
        "stderr": result.stderr,
        "discarded": result.discarded,
        "classification": est.positivity_classify(law, cfg.dimension).value,
    }
    json_path = out / f"timeconst-{digest[:12]}.json"
    write_json(json_path, payload)
    return [csv_path, json_path]


def _run_mu_k(manifest: dict, digest: str, out: Path, threads: int) -> list[Path]:
    law = _load_law(manifest)
    cfg = _config_from_manifest(manifest)
    if cfg.k_list is None:
        raise ManifestError("mu-k manifest needs k_list")
    result = est.estimate_mu_k(law, cfg, threads=threads)
    rows = []
    for i in range(result.base.n_directions):
        rows.append(
            (digest, manifest["seed"], i, 0.0, cfg.n_max, result.base.values[i], result.base.stderr[i], int(result.base.discarded[i]))
        )
        for ki, k in enumerate(result.k_list):
            rows.append(
                (digest, manifest["seed"], i, k, cfg.n_max, result.values[ki, i], result.stderr[ki, i], int(result.base.discarded[i]))
            )
    csv_path = out / f"mu-k-{digest[:12]}.csv"
    write_csv(
        csv_path,
        _meta(manifest, digest),
        ["manifest_digest", "seed", "direction", "k", "n", "mean", "stderr", "discarded"],
        rows,
    )
    payload = {
        "meta": _meta(manifest, digest),
        "law": law.to_json(),
        "k_list": list(result.k_list),
        "mu": result.base.values,
        "mu_k": result.values,
        "hop_truncated": result.hop_truncated,
    }
    json_path = out / f"mu-k-{digest[:12]}.json"
    write_json(json_path, payload)
    return [csv_path, json_path]


def _run_shape(manifest: dict, digest: str, out: Path, threads: int) -> list[Path]:
    law = _load_law(manifest)
    cfg = _config_from_manifest(manifest)
    _require(manifest, "t_grid")
    report = est.shape_theorem_check(
        law,
        [int(t) for t in manifest["t_grid"]],
        cfg,
        box_radius=manifest.get("box_radius"),
        replicas=manifest.get("shape_replicas"),
        threads=threads,
    )
    rows = [
        (digest, manifest["seed"], row.t, row.mean_dh, row.se_dh, row.mean_dh_prev, row.discarded)
        for row in report.rows
    ]
    csv_path = out / f"shape-{digest[:12]}.csv"
    write_csv(
        csv_path,
        _meta(manifest, digest),
        ["manifest_digest", "seed", "t", "mean_dh", "se_dh", "mean_dh_prev", "discarded"],
        rows,
    )
    payload = {
        "meta": _meta(manifest, digest),
        "law": law.to_json(),
        "box_radius": report.box_radius,
        "alpha": report.shape.alpha,
        "shape_vertices": report.shape.vertices,
        "rows": [row.__dict__ for row in report.rows],
    }
    json_path = out / f"shape-{digest[:12]}.json"
    write_json(json_path, payload)
    return [csv_path, json_path]


def _run_sweep(manifest: dict, digest: str, out: Path, threads: int) -> list[Path]:
    law = _load_law(manifest)
    if "laws" not in manifest:
        raise ManifestError("hausdorff-sweep manifest needs 'laws'")
    q_laws = [ColoringLaw.from_json(obj) for obj in manifest["laws"]]
    cfg = _config_from_manifest(manifest)
    report = est.continuity_sweep(law, q_laws, cfg, threads=threads)
    rows = []
    for j, row in enumerate(report.rows):
        rows.append(
            (
                digest,
                manifest["seed"],
                j,
                row.sup_distance,
                row.l1_distance,
                row.sup_gap,
                row.sup_gap_se,
                row.hausdorff,
                row.hausdorff_se,
                int(row.degenerate),
            )
        )
    csv_path = out / f"hausdorff-sweep-{digest[:12]}.csv"
    write_csv(
        csv_path,
        _meta(manifest, digest),
        [
            "manifest_digest",
            "seed",
            "q_index",
            "sup_dist",
            "l1_dist",
            "sup_gap",
            "sup_gap_se",
            "hausdorff",
            "hausdorff_se",
            "degenerate",
        ],
        rows,
    )
    if cfg.directions.shape[0] >= 2 * cfg.dimension:
        shape_p = est.build_shape_ball(report.p_estimate)
        shape_vertices = None if shape_p.degenerate else shape_p.vertices
    else:
        shape_vertices = None
    payload = {
        "meta": _meta(manifest, digest),
        "p_law": law.to_json(),
        "q_laws": [q.to_json() for q in q_laws],
        "p_shape_vertices": shape_vertices,
        "rows": [
            {
                "sup_dist": r.sup_distance,
                "l1_dist": r.l1_distance,
                "sup_gap": r.sup_gap,
                "sup_gap_se": r.sup_gap_se,
                "hausdorff": r.hausdorff,
                "hausdorff_se": r.hausdorff_se,
                "degenerate": r.degenerate,
            }
            for r in report.rows
        ],
    }
    json_path = out / f"hausdorff-sweep-{digest[:12]}.json"
    write_json(json_path, payload)
    return [csv_path, json_path]


def _model_from_manifest(manifest: dict) -> gla.WeightModel:
    _require(manifest, "model")
    spec = manifest["model"]
    law = ColoringLaw.from_json(spec["law"]) if "law" in spec else None
    return gla.WeightModel(
        kind=spec["kind"],
        value=float(spec.get("value", 1.0)),
        theta=float(spec.get("theta", 0.3)),
        law=law,
        cap=float(spec["cap"]) if spec.get("cap") is not None else None,
    )


def _run_animals(manifest: dict, digest: str, out: Path, threads: int) -> list[Path]:
    _require(manifest, "n_grid", "replicas", "box_radius")
    model = _model_from_manifest(manifest)
    series = gla.estimate_W_limit(
        model,
        int(manifest["dimension"]),
        [int(n) for n in manifest["n_grid"]],
        int(manifest["replicas"]),
        int(manifest["seed"]),
        int(manifest["box_radius"]),
        threads=threads,
    )
    rows = [
        (digest, manifest["seed"], n, series.mean_ratios[i], series.ci_low[i], series.ci_high[i], series.mode)
        for i, n in enumerate(series.n_grid)
    ]
    csv_path = out / f"animals-{digest[:12]}.csv"
    write_csv(
        csv_path,
        _meta(manifest, digest),
        ["manifest_digest", "seed", "n", "mean_ratio", "ci_low", "ci_high", "mode"],
        rows,
    )
    payload = {
        "meta": _meta(manifest, digest),
        "n_grid": list(series.n_grid),
        "mean_ratios": series.mean_ratios,
        "w_estimate": series.w_estimate,
        "plateau_rel_change": series.plateau_rel_change,
        "boundary_touched": series.boundary_touched,
    }
    if "deviation" in manifest:
        dev = manifest["deviation"]
        w_ref = float(dev["w_ref"]) if dev.get("w_ref") is not None else series.w_estimate
        freq, lo, hi = gla.deviation_frequency(
            model,
            int(manifest["dimension"]),
            int(dev["n"]),
            w_ref,
            int(dev["replicas"]),
            derive_seed(int(manifest["seed"]), 0xDE),
            int(manifest["box_radius"]),
            threads=threads,
        )
        payload["deviation"] = {"n": int(dev["n"]), "w_ref": w_ref, "frequency": freq, "ci": [lo, hi]}
    json_path = out / f"animals-{digest[:12]}.json"
    write_json(json_path, payload)
    return [csv_path, json_path]


def _run_cluster_tail(manifest: dict, digest: str, out: Path, threads: int) -> list[Path]:
    _require(manifest, "theta", "n_grid", "replicas")
    curve = cluster_tail_estimate(
        float(manifest["theta"]),
        int(manifest["dimension"]),
        [int(n) for n in manifest["n_grid"]],
        int(manifest["replicas"]),
        int(manifest["seed"]),
        cap=manifest.get("cap"),
    )
    rows = [
        (digest, manifest["seed"], n, curve.estimates[i], curve.ci_low[i], curve.ci_high[i])
        for i, n in enumerate(curve.n_grid)
    ]
    csv_path = out / f"cluster-tail-{digest[:12]}.csv"
    write_csv(
        csv_path,
        _meta(manifest, digest),
        ["manifest_digest", "seed", "n", "estimate", "ci_low", "ci_high"],
        rows,
    )
    payload = {
        "meta": _meta(manifest, digest),
        "theta": curve.theta,
        "subcritical": curve.subcritical,
        "capped": curve.capped,
        "estimates": curve.estimates,
    }
    json_path = out / f"cluster-tail-{digest[:12]}.json"
    write_json(json_path, payload)
    return [csv_path, json_path]


def random_self_avoiding_path(box: LatticeBox, rng: np.random.Generator, target_len: int) -> LatticePath:
    """A random in-box self-avoiding path grown by uniform unvisited steps."""
    for _ in range(64):
        start = tuple(int(c) for c in rng.integers(-box.radius, box.radius + 1, size=box.dimension))
        trail = [start]
        seen = {start}
        while len(trail) < target_len:
            options = [w for w in neighbors(trail[-1], box) if w not in seen]
            if not options:
                break
            step = options[int(rng.integers(len(options)))]
            trail.append(step)
            seen.add(step)
        if len(trail) == target_len:
            return LatticePath(tuple(trail))
    return LatticePath(tuple(trail))


def _run_chain_check(manifest: dict, digest: str, out: Path, threads: int) -> list[Path]:
    _require(manifest, "box_radius", "n_paths", "path_len", "S", "replicas")
    law = _load_law(manifest)
    d = int(manifest["dimension"])
    box = LatticeBox(d, int(manifest["box_radius"]))
    S = int(manifest["S"])
    rows = []
    violations = 0
    for f in range(int(manifest["replicas"])):
        seed_f = derive_seed(int(manifest["seed"]), 0xF1E1D, f)
        field = sample_color_field(box, law, seed_f)
        rng = np.random.default_rng(seed_f & 0xFFFFFFFF)
        for j in range(int(manifest["n_paths"])):
            path = random_self_avoiding_path(box, rng, int(manifest["path_len"]))
            try:
                rep = chain_inequality_check(field, path, S)
            except AssertionError:
                violations += 1
                continue
            one_plus_t, touched, jensen, full, trunc = rep.as_floats()
            rows.append((digest, manifest["seed"], f, j, rep.n_vertices, one_plus_t, touched, jensen, full, trunc))
    csv_path = out / f"chain-check-{digest[:12]}.csv"
    write_csv(
        csv_path,
        _meta(manifest, digest),
        ["manifest_digest", "seed", "field", "path", "n_vertices", "one_plus_t", "clusters_touched", "jensen_term", "full_term", "truncated_term"],
        rows,
    )
    payload = {
        "meta": _meta(manifest, digest),
        "paths_checked": len(rows) + violations,
        "violations": violations,
    }
    json_path = out / f"chain-check-{digest[:12]}.json"
    write_json(json_path, payload)
    if violations:
        raise AssertionError(f"{violations} chain inequality violations")
    return [csv_path, json_path]


def _run_domination(manifest: dict, digest: str, out: Path, threads: int) -> list[Path]:
    _require(manifest, "theta", "S", "sizes", "replicas")
    law = _load_law(manifest)
    params = LawRegionParams(theta=float(manifest["theta"]), S=int(manifest["S"]))
    report = marginal_domination_check(
        law,
        params,
        int(manifest["dimension"]),
        [int(m) for m in manifest["sizes"]],
        int(manifest["replicas"]),
        int(manifest["seed"]),
    )
    rows = [
        (digest, manifest["seed"], r.color, r.m, r.p_color, r.p_bernoulli, r.sigma, int(r.violated))
        for r in report.rows
    ]
    csv_path = out / f"domination-{digest[:12]}.csv"
    write_csv(
        csv_path,
        _meta(manifest, digest),
        ["manifest_digest", "seed", "color", "m", "p_color", "p_bernoulli", "sigma", "violated"],
        rows,
    )
    payload = {"meta": _meta(manifest, digest), "any_violation": report.any_violation}
    json_path = out / f"domination-{digest[:12]}.json"
    write_json(json_path, payload)
    return [csv_path, json_path]


_RUNNERS = {
    "timeconst": _run_timeconst,
    "mu-k": _run_mu_k,
    "shape": _run_shape,
    "hausdorff-sweep": _run_sweep,
    "animals": _run_animals,
    "cluster-tail": _run_cluster_tail,
    "chain-check": _run_chain_check,
    "domination": _run_domination,
}


def run_manifest(manifest: dict, out_dir: str | Path = "out", threads: int | None = None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    threads = threads or (os.cpu_count() or 1)
    digest = manifest_digest(manifest)
    return _RUNNERS[manifest["kind"]](manifest, digest, out, threads)


# ---------------------------------------------------------------------------
# selftest


def selftest() -> int:
    """Small-instance oracle suite; prints one line per check."""
    from itertools import combinations

    from .lattice import enumerate_self_avoiding_paths
    from .passage import k_short_passage_time, passage_times_from, path_passage_time

    failures = 0

    def check(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"selftest: {name}: {'PASS' if ok else 'FAIL'}")
        if not ok:
            failures += 1

    ok_pc = all(0.0 < v < 1.0 for v in PC_SITE.values())
    check("p_c table valid", ok_pc)
    if not ok_pc:
        return 1

    box = LatticeBox(2, 1)
    law = ColoringLaw.uniform(3)
    ok_bfs = True
    ok_k = True
    for trial in range(3):
        field = sample_color_field(box, law, derive_seed(99, trial))
        for u_idx in range(box.n_vertices):
            u = box.vertex_at(u_idx)
            res = passage_times_from(field, u)
            for v_idx in range(box.n_vertices):
                v = box.vertex_at(v_idx)
                best = None
                by_budget: dict[int, int] = {}
                for path in enumerate_self_avoiding_paths(u, v, 8, box):
                    t = path_passage_time(field, path)
                    best = t if best is None else min(best, t)
                    for k in (1, 2, 3):
                        budget = k * sum(abs(a - b) for a, b in zip(u, v))
                        if path.length <= budget:
                            by_budget[k] = min(by_budget.get(k, 10**9), t)
                if res.distance(v) != best:
                    ok_bfs = False
                for k in (1, 2, 3):
                    got = k_short_passage_time(field, u, v, k).value(v)
                    if got != by_budget[k]:
                        ok_k = False
    check("0-1 BFS matches exhaustive enumeration (3x3)", ok_bfs)
    check("k-short matches budget-filtered enumeration (3x3)", ok_k)

    wf = gla.WeightModel(kind="iid_bernoulli", theta=0.4).sample(box, 7)
    naive_best = None
    origin = (0, 0)
    cells = [box.vertex_at(i) for i in range(box.n_vertices)]
    for n in (1, 2, 3, 4):
        best_n = None
        for subset in combinations(cells, n):
            if origin not in subset:
                continue
            rest = set(subset)
            stack = [subset[0]]
            seen = {subset[0]}
            while stack:
                cur = stack.pop()
                for w in neighbors(cur, box):
                    if w in rest and w not in seen:
                        seen.add(w)
                        stack.append(w)
            if len(seen) != n:
                continue
            score = sum(wf.weight_at(v) for v in subset)
            best_n = score if best_n is None else max(best_n, score)
        got, witness = gla.exact_animal_max(wf, n)
        if abs(got - best_n) > 1e-12 or len(witness) != n:
            naive_best = False
    check("exact animals match naive subset filter (3x3)", naive_best is None)

    p = ColoringLaw((0.5, 0.5))
    q = ColoringLaw((0.4, 0.6))
    from .coloring import disagreement_bound, disagreement_exact, sample_uniform_field, couple_fields

    exact = disagreement_exact(p, q)
    big = LatticeBox(2, 40)
    uf = sample_uniform_field(big, 1234)
    fp, fq = couple_fields(uf, [p, q])
    emp = float((fp.colors != fq.colors).mean())
    sigma = (exact * (1 - exact) / big.n_vertices) ** 0.5
    check("coupling disagreement near exact value", abs(emp - exact) <= 4 * sigma)
    check("disagreement bound dominates exact value", disagreement_bound(p, q, 2) >= exact)

    field = sample_color_field(LatticeBox(2, 4), ColoringLaw.uniform(4), 5)
    rng = np.random.default_rng(0)
    ok_chain = True
    for _ in range(20):
        path = random_self_avoiding_path(LatticeBox(2, 4), rng, 12)
        try:
            chain_inequality_check(field, path, 2)
        except AssertionError:
            ok_chain = False
    check("cluster chain inequality holds on sampled paths", ok_chain)

    return 1 if failures else 0


def print_config() -> None:
    cfg = {
        "version": __version__,
        "pc_site": PC_SITE,
        "eps_zero_default": est.DEFAULT_EPS_ZERO,
        "exact_animal_guards": gla.EXACT_GUARDS,
        "oracle_max_path_len": ORACLE_MAX_PATH_LEN,
    }
    print(json.dumps(cfg, indent=2, sort_keys=True))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="colorfpp", description="First-passage percolation on random colorings")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute an experiment manifest")
    run_p.add_argument("manifest")
    run_p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    run_p.add_argument("--seed", type=int, default=None, help="override the manifest seed")
    run_p.add_argument("--out", default="out")
    sub.add_parser("selftest", help="run the small-instance oracle suite")
    sub.add_parser("print-config", help="print configuration defaults")
    args = parser.parse_args(argv)

    if args.command == "print-config":
        print_config()
        return 0
    if args.command == "selftest":
        return selftest()

    try:
        manifest = load_manifest(args.manifest)
        if args.seed is not None:
            manifest["seed"] = args.seed
    except ManifestError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return EXIT_MANIFEST
    try:
        paths = run_manifest(manifest, out_dir=args.out, threads=args.threads)
    except ManifestError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return EXIT_MANIFEST
    except ValueError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except AssertionError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
