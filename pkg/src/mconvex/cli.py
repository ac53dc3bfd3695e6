"""Batch front end: argparse subcommands, pipeline dispatch, report emission.

Consumers are scripts and CI: no interactivity, deterministic output for a
fixed config and seed, and the exit-code contract 0 = pass, 1 = pipeline
failure, 2 = config schema violation.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import barrier, discs, hyperbolicity, mpsh, surfaces, tubular
from .config import AnalysisConfig, ConfigError, KINDS, load_config, validate
from .report import CheckRecord, Report, emit, write_atomic

CHUNK = 256


def chunked_map(fn, items: np.ndarray, workers: int):
    """Apply fn to fixed-size chunks, merging in chunk order.

    The chunk size never depends on the worker count, so results are
    identical for any number of workers.
    """
    chunks = [items[i : i + CHUNK] for i in range(0, len(items), CHUNK)]
    if workers <= 1 or len(chunks) <= 1:
        results = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, chunks))
    return results


def _build_domain(cfg: AnalysisConfig) -> surfaces.ImplicitDomain:
    params = {k: v for k, v in cfg.domain.items() if k != "name"}
    return surfaces.make_domain(cfg.domain["name"], **params)


def _reach_for(domain: surfaces.ImplicitDomain, samples: int, probes: int):
    pts = domain.boundary_samples(samples)
    return tubular.reach_estimate(domain, pts, probe_count=probes)


def _barrier_for(cfg: AnalysisConfig, domain: surfaces.ImplicitDomain):
    p = cfg.params
    eps = p.get("epsilon")
    if eps is None:
        est = _reach_for(domain, min(cfg.grid["boundary"], 256), 8)
        eps = p["epsilon_fraction"] * est.value
    bf = barrier.build_barrier(
        domain,
        m=p["m"],
        eps=float(eps),
        alpha=p.get("alpha"),
        safety=p["safety"],
        ratios=tuple(p.get("ratios", (0.9, 0.6, 0.3))),
        cap_degree=p["cap_degree"],
    )
    return bf


def _interior_grid(domain, bf, count: int) -> np.ndarray:
    n_collar = max(1, int(0.7 * count))
    pts = tubular.collar_points(domain, n_collar, 1e-3, 0.98 * bf.collar.eps0p)
    deep = tubular.collar_points(
        domain, count - n_collar, 0.98 * bf.collar.eps0p, 0.45 * bf.collar.reach
    )
    return np.concatenate([pts, deep]) if len(deep) else pts


# ---------------------------------------------------------------------------
# pipelines


def _run_curvature(cfg: AnalysisConfig, report: Report) -> None:
    domain = _build_domain(cfg)
    m = cfg.params["m"]
    samples = domain.boundary_samples(cfg.grid["boundary"])
    flat = surfaces.m_flatness_report(
        domain, samples, m, tol=cfg.params.get("flat_tol"), r0=cfg.params["r0"]
    )
    worst_tangency = 0.0
    tangency_pt = samples[0]
    worst_sigma = np.inf
    worst_pt = samples[0]
    minimal_resid = 0.0
    minimal_pt = samples[0]
    for row in samples:
        sp = surfaces.principal_curvatures(domain, row)
        tangency = float(np.max(np.abs(sp.directions @ sp.inner_normal)))
        if tangency > worst_tangency:
            worst_tangency, tangency_pt = tangency, row
        sigma = surfaces.m_convexity_defect(sp, m)
        if sigma < worst_sigma:
            worst_sigma, worst_pt = sigma, row
        if domain.name in ("catenoid", "scherk"):
            resid = abs(float(np.sum(sp.curvatures)))
            if resid > minimal_resid:
                minimal_resid, minimal_pt = resid, row
    report.add(
        CheckRecord(
            "tangency", worst_tangency, 1e-9, worst_tangency <= 1e-9,
            location=tangency_pt,
            detail="max |inner_normal . principal_direction|",
        )
    )
    report.add(
        CheckRecord(
            "m-convexity-min-sigma", float(worst_sigma), -1e-9,
            worst_sigma >= -1e-9, location=worst_pt,
            detail=f"minimum sum of the {m} smallest curvatures",
        )
    )
    if domain.name in ("catenoid", "scherk"):
        report.add(
            CheckRecord(
                "minimality-residual", minimal_resid, 1e-6,
                minimal_resid <= 1e-6, location=minimal_pt,
                detail="max |sum of curvatures|",
            )
        )
    report.add(
        CheckRecord(
            "flat-count", float(flat.flat_count), None, True,
            detail=f"of {flat.total} samples at tol {flat.tol:.3e}; "
            f"{flat.note}",
        )
    )
    report.add(
        CheckRecord(
            "flat-outside-fraction", flat.outside_fraction, None, True,
            detail=f"fraction of flat samples beyond radius {flat.r0}",
        )
    )


def _run_reach(cfg: AnalysisConfig, report: Report) -> None:
    domain = _build_domain(cfg)
    m = cfg.params["m"]
    samples = domain.boundary_samples(cfg.grid["boundary"])
    est = tubular.reach_estimate(domain, samples, probe_count=cfg.params["probes"])
    report.add(
        CheckRecord(
            "reach-estimate", est.value, None, True,
            detail=f"focal {est.focal_bound:.6g}, bottleneck "
            f"{est.bottleneck_bound:.6g}; {est.note}",
        )
    )
    eps = est.value
    bounds = tubular.curvature_bounds_check(domain, eps, m, samples)
    report.add(
        CheckRecord(
            "curvature-lower-margin", bounds.worst_lower, -1e-9,
            bounds.worst_lower >= -1e-9,
            detail=f"min over samples of nu_j + (m-1)/eps at eps={eps:.6g}",
        )
    )
    report.add(
        CheckRecord(
            "curvature-upper-margin", bounds.worst_upper, -1e-9,
            bounds.worst_upper >= -1e-9,
            detail="min over samples of 1/eps - nu_j",
        )
    )
    report.add(
        CheckRecord(
            "negative-sum-margin", bounds.worst_negative_sum, -1e-9,
            bounds.worst_negative_sum >= -1e-9,
            detail="min over samples of sum(nu_j <= 0) + (m-1)/eps",
        )
    )
    report.add(
        CheckRecord(
            "bound-violations", float(len(bounds.violations)), 0.0,
            len(bounds.violations) == 0,
            location=bounds.violations[0].point if bounds.violations else None,
            detail=bounds.violations[0].check if bounds.violations else "",
        )
    )


def _run_barrier(cfg: AnalysisConfig, report: Report) -> None:
    domain = _build_domain(cfg)
    bf = _barrier_for(cfg, domain)
    interior = _interior_grid(domain, bf, cfg.grid["interior"])
    boundary = domain.boundary_samples(cfg.grid["boundary"])
    rep = barrier.verify_barrier(
        bf,
        interior,
        boundary,
        psh_tol=cfg.params["psh_tol"],
        level_count=cfg.params["levels"],
        fd_check_count=cfg.params["fd_checks"],
    )
    report.add(
        CheckRecord(
            "collar-radii", bf.collar.eps0p, None, True,
            detail=f"eps0={bf.collar.eps0:.6g} eps2={bf.collar.eps2:.6g} "
            f"eps1={bf.collar.eps1:.6g} scale={bf.scale:.6g}",
        )
    )
    for c in rep.checks:
        report.add(
            CheckRecord(
                c.name, c.worst_value, c.threshold, c.passed,
                location=c.worst_point, detail=f"{c.count} samples",
            )
        )


def _run_verify(cfg: AnalysisConfig, report: Report) -> None:
    domain = _build_domain(cfg)
    bf = _barrier_for(cfg, domain)
    interior = _interior_grid(domain, bf, cfg.grid["interior"])
    chunks = chunked_map(lambda c: bf.hessian_batch(c)[0], interior, cfg.workers)
    hessians = np.concatenate(chunks)
    verdict = mpsh.grid_verdict(
        bf, interior, bf.m, tol=cfg.params["psh_tol"], hessians=hessians
    )
    report.add(
        CheckRecord(
            "psh-violations", float(verdict.violated_count), 0.0,
            verdict.violated_count == 0, location=verdict.worst_point,
            detail=f"{verdict.total} samples "
            f"({verdict.strict_count} strict, {verdict.psh_count} marginal)",
        )
    )
    report.add(
        CheckRecord(
            "worst-margin", verdict.worst_margin, -cfg.params["psh_tol"],
            verdict.worst_margin >= -cfg.params["psh_tol"],
            location=verdict.worst_point,
        )
    )


def default_test_maps(domain_name: str):
    """Conformal harmonic maps fitted inside each catalog domain."""
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0])
    e3 = np.array([0.0, 0.0, 1.0])
    diag = (e1 + e3) / np.sqrt(2.0)
    if domain_name == "sphere":
        return [
            discs.affine_disc(np.zeros(3), 0.9 * e1, 0.9 * e2, name="equator"),
            discs.affine_disc(np.array([0.5, 0.0, 0.0]), 0.4 * e2, 0.4 * e3,
                              name="cap-cross"),
            discs.affine_disc(np.array([0.0, 0.4, 0.3]), 0.3 * diag,
                              0.3 * e2, name="tilted"),
            discs.catenoid_map(scale=0.3, radius=0.6),
            discs.helicoid_map(scale=0.3, radius=0.7),
            discs.enneper_map(scale=0.25, radius=0.7),
            discs.weierstrass_map(discs.weierstrass_catenoid(), scale=0.3,
                                  shift=(0.3, 0.0, 0.0), center=1.0, radius=0.35),
            discs.weierstrass_map(discs.weierstrass_helicoid(), scale=0.3,
                                  radius=0.6),
        ]
    if domain_name == "slab":
        return [
            discs.affine_disc(np.zeros(3), 2.0 * e1, 2.0 * e2, name="midplane"),
            discs.affine_disc(np.array([0.0, 0.0, 0.9]), 1.5 * e1, 1.5 * e2,
                              name="collar-plane"),
            discs.affine_disc(np.zeros(3), 0.9 * diag, 0.9 * e2, name="tilted"),
            discs.catenoid_map(scale=0.4, radius=0.8),
            discs.helicoid_map(scale=0.4, radius=0.8),
            discs.enneper_map(scale=0.2, radius=0.8),
            discs.weierstrass_map(discs.weierstrass_enneper(), scale=0.2,
                                  radius=0.6),
        ]
    if domain_name == "catenoid":
        return [
            discs.affine_disc(np.zeros(3), 0.5 * e1, 0.5 * e3, name="axial"),
            discs.affine_disc(np.array([0.0, 0.0, 0.3]), 0.6 * e1, 0.6 * e2,
                              name="horizontal"),
            discs.affine_disc(np.zeros(3), 0.45 * e2, 0.45 * e3, name="axial-y"),
            discs.catenoid_map(scale=0.5, radius=0.8),
            discs.weierstrass_map(discs.weierstrass_catenoid(), scale=0.45,
                                  shift=(0.45, 0.0, 0.0), center=1.0, radius=0.4),
        ]
    raise ValueError(f"no standard test maps for domain {domain_name!r}")


def map_from_spec(entry: dict):
    """Build a conformal map from a declarative config entry."""
    kind = entry.get("type")
    if kind == "affine":
        return discs.affine_disc(
            np.asarray(entry["p"], dtype=float),
            np.asarray(entry["u"], dtype=float),
            np.asarray(entry["w"], dtype=float),
            radius=float(entry.get("radius", 1.0)),
            name=entry.get("name", "affine"),
        )
    shift = tuple(entry.get("shift", (0.0, 0.0, 0.0)))
    scale = float(entry.get("scale", 1.0))
    radius = float(entry.get("radius", 0.5))
    charts = {
        "catenoid-chart": discs.catenoid_map,
        "helicoid-chart": discs.helicoid_map,
        "enneper-chart": discs.enneper_map,
    }
    if kind in charts:
        return charts[kind](scale=scale, shift=shift, radius=radius)
    generators = {
        "weierstrass-catenoid": discs.weierstrass_catenoid,
        "weierstrass-helicoid": discs.weierstrass_helicoid,
        "weierstrass-enneper": discs.weierstrass_enneper,
    }
    if kind in generators:
        return discs.weierstrass_map(
            generators[kind](), scale=scale, shift=shift,
            center=complex(entry.get("center", 0.0)), radius=radius,
        )
    raise ConfigError("subharmonicity.maps", f"unknown map type {kind!r}")


def _run_subharmonicity(cfg: AnalysisConfig, report: Report) -> None:
    domain = _build_domain(cfg)
    bf = _barrier_for(cfg, domain)
    tol = cfg.params["tol"]
    inside = lambda x: float(domain.phi(x)) <= 1e-9
    maps = (
        default_test_maps(domain.name)
        if cfg.params.get("maps") is None
        else [map_from_spec(entry) for entry in cfg.params["maps"]]
    )
    for cm in maps:
        sweep = discs.subharmonicity_sweep(bf, cm, tol=tol, inside=inside)
        report.add(
            CheckRecord(
                f"min-laplacian:{cm.name}", sweep.min_laplacian, -tol,
                sweep.violations == 0,
                location=[sweep.argmin.real, sweep.argmin.imag],
                detail=f"{sweep.total} samples, rho in "
                f"[{sweep.rho_min:.6g}, {sweep.rho_max:.6g}]",
            )
        )
    if cfg.params["negative_control"]:
        neg = mpsh.ScalarField(
            lambda x: -float(x @ x),
            grad=lambda x: -2.0 * x,
            hess=lambda x: -2.0 * np.eye(3),
            name="negative-control",
        )
        cm = default_test_maps(domain.name)[0]
        sweep = discs.subharmonicity_sweep(neg, cm, tol=tol)
        report.add(
            CheckRecord(
                "negative-control-flagged", float(sweep.violations), 1.0,
                sweep.violations >= 1,
                detail="violations must be detected for a concave field",
            )
        )


def _run_metric(cfg: AnalysisConfig, report: Report) -> None:
    domain = _build_domain(cfg)
    rng = np.random.default_rng(cfg.seed)
    tol = cfg.params["tolerance"]
    is_ball = domain.name == "sphere" and float(cfg.domain.get("radius", 1.0)) == 1.0
    pairs = []
    if cfg.params.get("point") is not None:
        if cfg.params.get("direction") is None:
            raise ConfigError("metric.direction", "missing required field")
        pairs.append(
            (
                np.asarray(cfg.params["point"], dtype=float),
                np.asarray(cfg.params["direction"], dtype=float),
            )
        )
    else:
        for _ in range(cfg.params["pairs"]):
            direction = rng.standard_normal(3)
            radius = cfg.params["max_radius"] * rng.uniform() ** (1.0 / 3.0)
            point = rng.standard_normal(3)
            point *= radius / np.linalg.norm(point)
            pairs.append((point, direction / np.linalg.norm(direction)))
    worst_ratio = 0.0
    worst_deficit = 0.0
    for i, (p, v) in enumerate(pairs):
        est = hyperbolicity.metric_upper_bound(domain, p, v)
        if is_ball:
            ref = hyperbolicity.bck_metric(p, v)
            ratio = est.bound / ref
            worst_ratio = max(worst_ratio, ratio)
            worst_deficit = min(worst_deficit, est.bound - ref)
            report.add(
                CheckRecord(
                    f"pair-{i}", ratio, 1.0 + tol, ratio <= 1.0 + tol,
                    location=list(p) + list(v),
                    detail=f"bound {est.bound:.8g} vs exact {ref:.8g}",
                )
            )
        else:
            report.add(
                CheckRecord(
                    f"pair-{i}", est.bound, None, True,
                    location=list(p) + list(v),
                    detail="upper bound only",
                )
            )
    if is_ball and pairs:
        report.add(
            CheckRecord("max-ratio", worst_ratio, 1.0 + tol, worst_ratio <= 1.0 + tol)
        )
        report.add(
            CheckRecord(
                "min-deficit", worst_deficit, -1e-6, worst_deficit >= -1e-6,
                detail="upper bounds may never undershoot the exact metric",
            )
        )


def _run_omega_d(cfg: AnalysisConfig, report: Report) -> None:
    slices = {
        "disc": hyperbolicity.planar_disc,
        "punctured-plane": hyperbolicity.punctured_plane,
        "plane": hyperbolicity.full_plane,
    }
    dom = slices[cfg.params["slice"]]()
    p = np.asarray(cfg.params["p"], dtype=float)
    q = np.asarray(cfg.params["q"], dtype=float)
    prev = np.inf
    last = np.inf
    monotone = True
    for k in cfg.params["ks"]:
        cb = hyperbolicity.omega_d_distance_chain(dom, p, q, int(k))
        monotone = monotone and cb.total <= prev + 1e-12
        report.add(
            CheckRecord(
                f"chain-k{k}", cb.total, prev + 1e-12, cb.total <= prev + 1e-12,
                location=[float(k)],
                detail=f"vertical {cb.vertical_p:.6g}+{cb.vertical_q:.6g}, "
                f"horizontal {cb.horizontal:.6g}",
            )
        )
        prev = cb.total
        last = cb.total
    report.add(
        CheckRecord(
            "degeneration", last, cfg.params["threshold"],
            monotone and last < cfg.params["threshold"],
            detail="bound at the largest k must fall below the threshold",
        )
    )


def _run_convex(cfg: AnalysisConfig, report: Report) -> None:
    rng = np.random.default_rng(cfg.seed)
    for fx in cfg.params["fixtures"]:
        h = hyperbolicity.HalfspaceIntersection(
            normals=np.asarray(fx["normals"], dtype=float),
            constants=np.asarray(fx["constants"], dtype=float),
            interior_point=np.asarray(fx["interior"], dtype=float),
        )
        contains, rank, witness = hyperbolicity.convex_contains_2plane(h)
        n = np.atleast_2d(h.normals).shape[1]
        expected = fx.get("contains_plane")
        report.add(
            CheckRecord(
                f"{fx['name']}:rank", float(rank), None, True,
                detail=f"dimension {n}; contains 2-plane: {contains}",
            )
        )
        if expected is not None:
            report.add(
                CheckRecord(
                    f"{fx['name']}:classification", float(contains),
                    float(expected), contains == bool(expected),
                )
            )
        if contains and witness is not None:
            probes = 64
            angles = 2.0 * np.pi * np.arange(probes) / probes
            ring = (
                witness.base[None, :]
                + 1e6 * np.cos(angles)[:, None] * witness.span[0][None, :]
                + 1e6 * np.sin(angles)[:, None] * witness.span[1][None, :]
            )
            inside = all(h.contains(row) for row in ring)
            report.add(
                CheckRecord(
                    f"{fx['name']}:witness-contained", float(inside), 1.0, inside,
                    detail="exhibited plane stays inside out to radius 1e6",
                )
            )
        else:
            hits, _ = hyperbolicity.plane_escape_trials(
                h, cfg.params["trials"], rng
            )
            report.add(
                CheckRecord(
                    f"{fx['name']}:escape-trials", float(hits), 0.0, hits == 0,
                    detail=f"{cfg.params['trials']} random 2-planes, all must exit",
                )
            )


_PIPELINES = {
    "curvature": _run_curvature,
    "reach": _run_reach,
    "barrier": _run_barrier,
    "verify": _run_verify,
    "subharmonicity": _run_subharmonicity,
    "metric": _run_metric,
    "omega-d": _run_omega_d,
    "convex-classify": _run_convex,
}


def run(cfg: AnalysisConfig) -> Report:
    """Dispatch the configured pipeline; failures become a failure record."""
    report = Report(kind=cfg.kind, seed=cfg.seed, config_echo=cfg.raw)
    try:
        _PIPELINES[cfg.kind](cfg, report)
    except ConfigError:
        raise
    except Exception as exc:
        report.failure = f"{type(exc).__name__}: {exc}"
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mconvex",
        description="Batch analyses of m-convex domains: curvature, reach, "
        "distance barriers, subharmonicity, and hyperbolicity probes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run the {kind} pipeline")
        sp.add_argument("--config", default=None, help="YAML config path")
        sp.add_argument("--seed", type=int, default=None, help="RNG seed override")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument(
            "--format", choices=["json-lines", "csv-summary"], default=None
        )
        sp.add_argument("--workers", type=int, default=None)
    args = parser.parse_args(argv)

    overrides = {
        "kind": args.command,
        "seed": args.seed,
        "output.path": args.out,
        "output.format": args.format,
        "workers": args.workers,
    }
    try:
        data = load_config(args.config, overrides)
        cfg = validate(data)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    report = run(cfg)
    payload = emit(report, cfg.fmt)
    if cfg.out is not None:
        write_atomic(cfg.out, payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    if report.failure is not None:
        return 1
    return 0 if report.verdict == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
