"""Batch front door: JSON run config in, JSON report (plus CSV probe tables) out.

Exit codes: 0 all requested checks ran and passed their brackets, 1 a
bracket failed or a check raised, 2 configuration or input error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conformal_maps as cm
from .carleson_checkers import (
    boundary_ball_profile,
    equivalence_report,
    luecking_suite,
    square_profile,
    whitney_profile,
)
from .embedding_lab import Bergman, Hardy, default_family, embedding_ratios
from .measures import (
    AtomicMeasure,
    EmbeddingParams,
    PlanarMeasure,
    disc_area_measure,
    radial_power_measure,
    weighted_pullback,
)
from .planar_domain import Domain
from .quasi_subharmonic import analytic_power, constant, harmonic_mixture, qns_profile, random_balls
from .stopping_time import (
    StoppingConfig,
    build_generations,
    decay_rate,
    default_M,
    default_root,
    generation_decay,
    region_oscillations,
    region_pullback,
)

ALL_CHECKS = ("square", "whitney", "boundary", "embed", "stopping", "qns", "equivalence")
SUBCOMMAND_CHECKS = {
    "check": ("square", "whitney", "boundary", "equivalence"),
    "embed": ("embed",),
    "stopping": ("stopping",),
    "qns": ("qns",),
}

DEFAULT_CONFIG = {
    "domain": {"map": {"tag": "identity"}, "boundary_samples": 4096},
    "measure": {"density": "empty"},
    "params": {"p": 1.0, "q": 1.0, "alpha": 0.0},
    "space": "hardy",
    "checks": list(ALL_CHECKS),
    "depth": 8,
    "seed": 0,
    "stopping": {"M": None, "max_depth": 10, "top_samples": 8},
    "embed": {"family_depth": 6, "oversample": 2, "max_degree": 32},
    "qns": {"balls": 200},
    "brackets": {},
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("map", "measure"):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class RunConfig:
    raw: dict
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def load(cls, path: str | Path | None, overrides: dict | None = None) -> "RunConfig":
        raw: dict = {}
        base = Path.cwd()
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigError("--config", f"file not found: {path}")
            try:
                raw = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError("--config", f"invalid JSON: {exc}") from exc
            base = path.parent
        cfg = cls(_merge(DEFAULT_CONFIG, raw), base)
        for k, v in (overrides or {}).items():
            if v is not None:
                cfg.raw[k] = v
        cfg.validate()
        return cfg

    def validate(self) -> None:
        r = self.raw
        try:
            self.map = cm.from_descriptor(r["domain"]["map"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError("domain.map", str(exc)) from exc
        n = r["domain"].get("boundary_samples")
        if not isinstance(n, int) or n < 16:
            raise ConfigError("domain.boundary_samples", "must be an integer >= 16")
        try:
            self.params = EmbeddingParams(**{k: float(v) for k, v in r["params"].items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError("params", str(exc)) from exc
        if r["space"] not in ("hardy", "bergman"):
            raise ConfigError("space", "must be 'hardy' or 'bergman'")
        bad = [c for c in r["checks"] if c not in ALL_CHECKS]
        if bad:
            raise ConfigError("checks", f"unknown checks {bad}; choose from {list(ALL_CHECKS)}")
        if not isinstance(r["depth"], int) or not 0 <= r["depth"] <= 20:
            raise ConfigError("depth", "must be an integer in [0, 20]")
        if not isinstance(r["seed"], int):
            raise ConfigError("seed", "must be an integer")
        for name, br in r["brackets"].items():
            if name not in ALL_CHECKS:
                raise ConfigError(f"brackets.{name}", "not a check name")
            if not (isinstance(br, list) and len(br) == 2):
                raise ConfigError(f"brackets.{name}", "must be [lo, hi]")
        self._validate_measure(r["measure"])
        try:
            st = r["stopping"]
            StoppingConfig(st["M"] if st["M"] is not None else 2.0, st["max_depth"], st["top_samples"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("stopping", str(exc)) from exc

    def _validate_measure(self, m: dict) -> None:
        if "on" in m and m["on"] not in ("disc", "domain"):
            raise ConfigError("measure.on", "must be 'disc' or 'domain'")
        kinds = [k for k in ("atoms", "csv", "density") if k in m]
        if len(kinds) != 1:
            raise ConfigError("measure", "give exactly one of 'atoms', 'csv', 'density'")
        if "csv" in m:
            p = self.resolve(m["csv"])
            if not p.is_file():
                raise ConfigError("measure.csv", f"file not found: {p}")
        if "atoms" in m:
            try:
                a = np.asarray(m["atoms"], dtype=float).reshape(-1, 3)
            except ValueError as exc:
                raise ConfigError("measure.atoms", "expected a list of [x, y, weight]") from exc
            if (a[:, 2] < 0).any():
                raise ConfigError("measure.atoms", "weights must be non-negative")
        if "density" in m and m["density"] not in ("empty", "area", "radial_power"):
            raise ConfigError("measure.density", "choose from 'empty', 'area', 'radial_power'")

    def resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    @property
    def checks(self) -> list[str]:
        return [c for c in ALL_CHECKS if c in self.raw["checks"]]


def build_measure(cfg: RunConfig) -> PlanarMeasure:
    m = cfg.raw["measure"]
    if "atoms" in m:
        a = np.asarray(m["atoms"], dtype=float).reshape(-1, 3)
        return AtomicMeasure(a[:, 0] + 1j * a[:, 1], a[:, 2])
    if "csv" in m:
        return AtomicMeasure.from_csv(cfg.resolve(m["csv"]))
    if m["density"] == "empty":
        return AtomicMeasure.empty()
    if m["density"] == "area":
        return disc_area_measure(levels=m.get("levels", 14), n_angular=m.get("n_angular", 512))
    return radial_power_measure(float(m.get("exponent", 0.0)), levels=m.get("levels", 14), n_angular=m.get("n_angular", 512))


def _write_probes(out: Path | None, name: str, rows, header) -> None:
    if out is None:
        return
    with open(out / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _num(x) -> float | str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


class Runner:
    def __init__(self, cfg: RunConfig, out: Path | None = None):
        self.cfg = cfg
        self.out = out
        self.warnings: list[str] = []
        self.map = cfg.map
        self.params = cfg.params
        self.depth = cfg.raw["depth"]
        self.seed = cfg.raw["seed"]
        self._domain = None

    @property
    def domain(self) -> Domain:
        if self._domain is None:
            self._domain = Domain.from_map(self.map, self.cfg.raw["domain"]["boundary_samples"])
        return self._domain

    def prepare_measures(self) -> None:
        mu = build_measure(self.cfg)
        on_domain = self.cfg.raw["measure"].get("on", "disc") == "domain"
        if on_domain:
            self.mu_domain = mu
            nu = weighted_pullback(self.map, mu, self.params.hardy_exponent)
            rep = nu.report
            if rep is not None and rep.rejected_mass > 0:
                self.warnings.append(f"pullback: {len(rep.rejected_points)} atoms failed to invert (mass {rep.rejected_mass:.6g})")
            self.mu_disc = nu
        else:
            self.mu_disc = mu
            pts = mu.points
            self.mu_domain = AtomicMeasure(self.map(pts), mu.weights) if len(pts) else AtomicMeasure.empty()

    @property
    def beta_hardy(self) -> float:
        return self.params.hardy_exponent

    @property
    def beta_bergman(self) -> float:
        return self.params.bergman_exponent

    # --- checks -----------------------------------------------------------

    def check_square(self) -> dict:
        t = square_profile(self.mu_disc, self.beta_hardy, self.depth)
        _write_probes(self.out, "square_probes", zip(t.probe_id, t.parameter, t.measure, t.ratio), ["probe_id", "level", "measure", "ratio"])
        return {"value": t.best, "beta": self.beta_hardy, "probes": len(t.ratio)}

    def check_whitney(self) -> dict:
        t = whitney_profile(self.mu_disc, self.beta_bergman, depth=self.depth)
        _write_probes(self.out, "whitney_probes", zip(t.probe_id, t.parameter, t.measure, t.ratio), ["probe_id", "radius", "measure", "ratio"])
        return {"value": t.best, "beta": self.beta_bergman, "probes": len(t.ratio)}

    def check_boundary(self) -> dict:
        t = boundary_ball_profile(self.mu_domain, self.domain, self.beta_hardy)
        _write_probes(self.out, "boundary_probes", zip(t.probe_id, t.parameter, t.measure, t.ratio), ["probe_id", "radius", "measure", "ratio"])
        return {"value": t.best, "beta": self.beta_hardy, "probes": len(t.ratio), "sagitta": self.domain.sagitta}

    def check_embed(self) -> dict:
        e = self.cfg.raw["embed"]
        p, q, alpha = self.params.p, self.params.q, self.params.alpha
        space = Hardy(p) if self.cfg.raw["space"] == "hardy" else Bergman(p, alpha)
        fam = default_family(space, e["family_depth"], e["oversample"], e["max_degree"])
        r = embedding_ratios(self.mu_disc, space, q, fam)
        _write_probes(self.out, "embed_ratios", ((repr(f), x) for f, x in zip(r.functions, r.ratios)), ["function", "ratio"])
        return {"value": r.best, "space": self.cfg.raw["space"], "family_size": len(fam), "argmax": repr(r.argbest)}

    def check_stopping(self) -> dict:
        st = self.cfg.raw["stopping"]
        M = st["M"] if st["M"] is not None else default_M(self.map)
        tree = build_generations(self.map, default_root(), StoppingConfig(M, st["max_depth"], st["top_samples"]))
        osc = region_oscillations(self.map, tree)
        totals = generation_decay(tree)
        res = {
            "value": decay_rate(tree),
            "M": M,
            "regions": tree.n_regions,
            "generation_totals": [float(x) for x in totals],
            "max_region_oscillation": float(osc.max()),
            "log_M": math.log(M),
            "partition_defect": tree.partition_defect(),
        }
        if len(self.mu_domain.points):
            pb = region_pullback(self.map, self.mu_domain, tree, self.params)
            res["pullback_ratio"] = _num(pb.ratio)
            res["pullback_failed"] = pb.failed_count
        if self.out is not None:
            (self.out / "stopping_tree.csv").write_text("\n".join(tree.report_lines()) + "\n")
        return res

    def check_qns(self) -> dict:
        balls = random_balls(self.cfg.raw["qns"]["balls"], seed=self.seed)
        rng = np.random.default_rng(self.seed)
        zetas = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, 4))
        cands = {
            "constant": constant(1.0),
            "harmonic": harmonic_mixture(zetas, rng.uniform(0.1, 1.0, 4), 0.5),
            "abs_derivative_p": analytic_power(self.map.deriv, self.params.p, "|phi'|^p"),
        }
        values = {}
        for name, u in cands.items():
            prof = qns_profile(u, None, balls)
            values[name] = _num(prof.constant)
            if self.out is not None:
                prof.to_csv(self.out / f"qns_{name}.csv")
        return {"value": max(float(v) for v in values.values()), "candidates": values, "balls": len(balls)}

    def check_equivalence(self) -> dict:
        r = equivalence_report(self.mu_disc, self.beta_bergman, self.depth)
        return {"value": _num(r.ratio), "square": r.square_c, "ball": r.ball_c, "beta": r.beta}

    def run(self, checks) -> dict:
        results: dict = {}
        self.prepare_measures()
        brackets = self.cfg.raw["brackets"]
        for name in checks:
            try:
                res = getattr(self, f"check_{name}")()
                v = float(res["value"])
                br = brackets.get(name)
                if br is None:
                    passed = not math.isnan(v)
                else:
                    passed = float(br[0]) <= v <= float(br[1])
                    res["bracket"] = [float(br[0]), float(br[1])]
                res["value"] = _num(v)
                res["status"] = "pass" if passed else "fail"
            except Exception as exc:  # noqa: BLE001 - every numeric failure is reported, later checks still run
                res = {"status": "error", "error": f"{type(exc).__name__}: {exc}"}
            results[name] = res
        return results


def run(cfg: RunConfig, checks=None, out: Path | None = None) -> dict:
    """Execute the requested checks and return the report body (no timing)."""
    runner = Runner(cfg, out)
    results = runner.run(checks or cfg.checks)
    ok = all(r["status"] == "pass" for r in results.values())
    return {
        "checks": results,
        "exit_code": 0 if ok else 1,
        "provenance": {
            "config": cfg.raw,
            "seed": cfg.raw["seed"],
            "resolution": {"depth": cfg.raw["depth"], "boundary_samples": cfg.raw["domain"]["boundary_samples"]},
            "warnings": runner.warnings,
        },
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def run_suite(cfg: RunConfig, out: Path | None) -> dict:
    beta = max(cfg.params.bergman_exponent, 1.5)
    s = luecking_suite(beta=beta, depth=cfg.raw["depth"], seed=cfg.raw["seed"])
    balls = random_balls(cfg.raw["qns"]["balls"], seed=cfg.raw["seed"])
    rng = np.random.default_rng(cfg.raw["seed"])
    h = harmonic_mixture(np.exp(2j * np.pi * rng.uniform(0.0, 1.0, 4)), rng.uniform(0.1, 1.0, 4), 0.5)
    harmonic = qns_profile(h, None, balls).constant
    if out is not None:
        _write_probes(out, "suite_ratios", enumerate(s.ratios), ["measure", "ratio"])
    return {
        "checks": {
            "equivalence_suite": {"K": s.K, "lo": s.lo, "hi": s.hi, "beta": beta, "measures": len(s.ratios)},
            "qns_harmonic_baseline": {"value": harmonic, "target": 1.0 / math.pi},
        },
        "exit_code": 0,
        "provenance": {"config": cfg.raw, "seed": cfg.raw["seed"], "resolution": {"depth": cfg.raw["depth"]}, "warnings": []},
    }


def render_report(path: Path, out: Path | None) -> str:
    """Flatten a JSON report into ``check,field,value`` CSV rows."""
    rep = json.loads(Path(path).read_text())
    lines = ["check,field,value"]
    for name, res in sorted(rep["checks"].items()):
        for k, v in sorted(res.items()):
            if isinstance(v, (dict, list)):
                v = json.dumps(v, sort_keys=True)
            lines.append(f"{name},{k},{json.dumps(v) if isinstance(v, str) and ',' in v else v}")
    text = "\n".join(lines) + "\n"
    if out is not None:
        (out / (Path(path).stem + ".csv")).write_text(text)
    return text


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="carleson-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("check", "embed", "stopping", "qns", "suite", "run"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--depth", type=int)
        sp.add_argument("--out", help="directory for report.json and CSV side files")
    rp = sub.add_parser("report")
    rp.add_argument("report", help="report.json to render as CSV")
    rp.add_argument("--out")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    out = Path(args.out) if getattr(args, "out", None) else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    if args.command == "report":
        if not Path(args.report).is_file():
            print(f"report: file not found: {args.report}", file=sys.stderr)
            return 2
        sys.stdout.write(render_report(Path(args.report), out))
        return 0
    try:
        cfg = RunConfig.load(args.config, {"seed": args.seed, "depth": args.depth})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    if args.command == "suite":
        report = run_suite(cfg, out)
    else:
        checks = cfg.checks if args.command == "run" else SUBCOMMAND_CHECKS[args.command]
        report = run(cfg, checks, out)
    elapsed = time.perf_counter() - t0
    body = dumps(report)
    if out is not None:
        (out / "report.json").write_text(body)
        (out / "timing.json").write_text(json.dumps({"seconds": elapsed}) + "\n")
    else:
        sys.stdout.write(body)
    print(f"elapsed {elapsed:.2f}s", file=sys.stderr)
    return report["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
