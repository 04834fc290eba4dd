"""Command-line front end: ``harmsec list | describe | verify | convergence``.

Exit codes: 0 when every applicable check passes, 1 when at least one
fails, 2 for usage, configuration or target errors.  The default seed can
be set with the ``HARMSEC_SEED`` environment variable.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from .catalog import ENTRIES, get_entry, perturb
from .chart import Chart, FDConfig
from .dsl import build_structure, load_config
from .errors import HarmsecError
from .identities import REGISTRY, Subject, check_identity, get_check, run_checks
from .report import FORMATS, ResidualReport, emit_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(HarmsecError):
    pass


@dataclass
class RunSpec:
    target: str
    params: dict = field(default_factory=dict)
    checks: Optional[List[str]] = None
    points: int = 20
    seed: int = 42
    step: Optional[float] = None
    order: Optional[int] = None
    tol_scale: float = 1.0
    perturb: float = 0.0
    fmt: str = "text"


_CALL = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\((.*)\)$")


def _split_params(tokens: Sequence[str]) -> dict:
    out = {}
    for tok in tokens:
        for part in [t.strip() for t in tok.split(",") if t.strip()]:
            if "=" not in part:
                raise UsageError(f"parameter {part!r} is not of the form name=value")
            k, v = part.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def parse_target(target: str, params: Sequence[str] = ()) -> tuple:
    """``key``, ``key(a=1, b=2)`` or a config path, plus ``name=value`` tokens."""
    extra = _split_params(params)
    m = _CALL.match(target.strip())
    if m:
        key = m.group(1)
        inline = _split_params([m.group(2)]) if m.group(2).strip() else {}
        inline.update(extra)
        return key, inline
    return target, extra


def _is_config(target: str) -> bool:
    return target.endswith(".toml") or os.sep in target or Path(target).is_file()


def resolve(spec: RunSpec):
    """Build the subject and the FD settings for a run."""
    fd_kwargs = {}
    if _is_config(spec.target):
        if spec.params:
            raise UsageError("catalog parameters cannot be combined with a config file target")
        cfg = load_config(spec.target)
        fd_kwargs.update(cfg.fd)
        obj = build_structure(cfg)
        label = cfg.name
    else:
        key, params = parse_target(spec.target, [f"{k}={v}" for k, v in spec.params.items()])
        obj = get_entry(key, **params)
        label = key if not params else f"{key}({', '.join(f'{k}={v}' for k, v in sorted(params.items()))})"
    if spec.step is not None:
        fd_kwargs["step"] = spec.step
    if spec.order is not None:
        fd_kwargs["order"] = spec.order
    fd = FDConfig(**{k: (int(v) if k == "order" else float(v)) for k, v in fd_kwargs.items()})
    if spec.tol_scale != 1.0:
        fd = fd.scaled(spec.tol_scale)
    if isinstance(obj, Chart):
        raise UsageError(f"{label} is a bare chart; it carries no structure to verify (try describe)")
    subj = Subject.wrap(obj, label)
    if spec.perturb:
        if subj.structure is None:
            raise UsageError("--perturb needs an almost contact structure")
        s = perturb(subj.structure, spec.perturb, spec.seed)
        subj = Subject.wrap(s, f"{label}~perturbed({spec.perturb:g})")
    return subj, fd


def _harmonic_summary(subj: Subject, points, fd) -> dict:
    if subj.structure is not None:
        eq1 = check_identity("harmonic_eq1", subj, points, fd)
        eq2 = check_identity("harmonic_eq2", subj, points, fd)
        return {"eq1": eq1.passed, "eq2": eq2.passed, "harmonic": bool(eq1.passed and eq2.passed)}
    eq = check_identity("hermitian_eq", subj, points, fd)
    return {"harmonic": bool(eq.passed)}


def verify(spec: RunSpec) -> ResidualReport:
    t0 = time.perf_counter()
    subj, fd = resolve(spec)
    points = subj.chart.sample_points(spec.points, spec.seed, fd)
    results = run_checks(subj, points, fd, spec.checks)
    flags = subj.classification(points, fd)
    flag_dict = {}
    if subj.structure is not None:
        flag_dict = {"contact_metric": flags.is_contact_metric, "K_contact": flags.is_K_contact,
                     "H_contact": flags.is_H_contact}
    settings = {"points": spec.points, "seed": spec.seed, "step": fd.step, "order": fd.order,
                "tol_scale": spec.tol_scale}
    if spec.perturb:
        settings["perturb"] = spec.perturb
    rep = ResidualReport(subj.name, results, flag_dict, _harmonic_summary(subj, points, fd), settings)
    rep.runtime = time.perf_counter() - t0
    return rep


@dataclass
class ConvergenceStudy:
    target: str
    check: str
    steps: List[float]
    residuals: List[float]
    order: int

    @property
    def ratios(self) -> List[float]:
        r = self.residuals
        return [r[i] / r[i + 1] if r[i + 1] > 0 else math.inf for i in range(len(r) - 1)]

    @property
    def expected(self) -> List[float]:
        s = self.steps
        return [(s[i] / s[i + 1]) ** self.order for i in range(len(s) - 1)]

    @property
    def at_roundoff(self) -> bool:
        # exact-in-FD fields leave only rounding noise, where ratios mean nothing
        return max(self.residuals) < 1e-12

    def as_text(self) -> str:
        out = [f"target: {self.target}  check: {self.check}  order: {self.order}"]
        out.append(f"{'step':>12}  {'max_residual':>24}  ratio")
        for i, (h, r) in enumerate(zip(self.steps, self.residuals)):
            ratio = "" if i == 0 else f"{self.ratios[i - 1]:.4f} (expected {self.expected[i - 1]:.2f})"
            out.append(f"{h:>12.4e}  {r:>24.17g}  {ratio}")
        if self.at_roundoff:
            out.append("residuals are at rounding level: the fields are resolved exactly by the stencil, "
                       "so the ratios carry no convergence information")
        return "\n".join(out) + "\n"

    def as_json(self) -> str:
        from .report import _json_value

        d = {"target": self.target, "check": self.check, "order": self.order, "steps": self.steps,
             "residuals": self.residuals, "ratios": self.ratios, "expected": self.expected,
             "at_roundoff": self.at_roundoff}
        return _json_value(d) + "\n"


def convergence(spec: RunSpec, check_id: str, steps: Sequence[float]) -> ConvergenceStudy:
    """Max residual of one check at each step size, on a common point set."""
    if len(steps) < 2:
        raise UsageError("convergence needs at least two steps")
    steps = [float(h) for h in steps]
    check = get_check(check_id)
    subj, fd = resolve(spec)
    # sample once with the widest stencil so every step stays inside the domain
    coarse = FDConfig(step=max(steps), order=fd.order)
    points = subj.chart.sample_points(spec.points, spec.seed, coarse)
    if not check.applies(subj, subj.classification(points, fd)):
        raise UsageError(f"check {check_id!r} does not apply to {subj.name}")
    residuals = []
    for h in steps:
        fdh = FDConfig(step=h, order=fd.order)
        residuals.append(max(check.evaluate(subj, points, fdh)))
    return ConvergenceStudy(subj.name, check_id, steps, residuals, fd.order)


def _list_text() -> str:
    out = ["catalog entries:"]
    w = max(len(k) for k in ENTRIES)
    for k, e in ENTRIES.items():
        params = ", ".join(f"{p}={v}" for p, v in e.params.items())
        out.append(f"  {k:<{w}}  [{e.kind}] {e.description}" + (f"  (params: {params})" if params else ""))
    out.append("checks:")
    w = max(len(k) for k in REGISTRY)
    for k, c in REGISTRY.items():
        out.append(f"  {k:<{w}}  [{c.tolerance_class}] {c.description}")
    return "\n".join(out) + "\n"


def _describe_text(target: str, params: Sequence[str], points: int, seed: int) -> str:
    key, kw = parse_target(target, params)
    if key not in ENTRIES:
        get_entry(key)  # raises UnknownEntry with the list of keys
    e = ENTRIES[key]
    obj = get_entry(key, **kw)
    out = [f"{key}: {e.description}", f"kind: {e.kind}"]
    if e.params:
        out.append("parameters (defaults): " + ", ".join(f"{p}={v!r}" for p, v in e.params.items()))
    if e.expected:
        out.append("expected: " + ", ".join(f"{k}={v}" for k, v in e.expected.items()))
    if isinstance(obj, Chart):
        out.append(f"chart: dim={obj.dim}, coordinates={obj.coords}")
        return "\n".join(out) + "\n"
    subj = Subject.wrap(obj, key)
    fd = FDConfig()
    pts = subj.chart.sample_points(points, seed, fd)
    out.append(f"chart: dim={subj.chart.dim}, coordinates={subj.chart.coords}, box={subj.chart.box}")
    if subj.structure is not None:
        fl = subj.classification(pts, fd)
        out.append(f"classified: contact_metric={fl.is_contact_metric}, K_contact={fl.is_K_contact}, "
                   f"H_contact={fl.is_H_contact}")
    flags = subj.classification(pts, fd)
    out.append("applicable checks: " + ", ".join(k for k, c in REGISTRY.items() if c.applies(subj, flags)))
    return "\n".join(out) + "\n"


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="harmsec", description="Verify harmonic almost contact structures numerically.")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="catalog entries and registered checks")

    d = sub.add_parser("describe", help="describe a catalog entry")
    d.add_argument("entry")
    d.add_argument("params", nargs="*", help="name=value entry parameters")

    default_seed = int(os.environ.get("HARMSEC_SEED", "42"))

    def common(p):
        p.add_argument("target", help="catalog key, key(name=value,...), or a TOML config path")
        p.add_argument("params", nargs="*", help="name=value entry parameters")
        p.add_argument("--points", type=int, default=20)
        p.add_argument("--seed", type=int, default=default_seed)
        p.add_argument("--step", type=float)
        p.add_argument("--order", type=int, choices=(2, 4))
        p.add_argument("--perturb", type=float, default=0.0, metavar="EPS")
        p.add_argument("--tol-scale", type=float, default=1.0)
        p.add_argument("--format", choices=FORMATS, default=None)
        p.add_argument("--out", type=Path)

    v = sub.add_parser("verify", help="run residual checks on a structure")
    common(v)
    v.add_argument("--checks", help="comma-separated check ids (default: all applicable)")

    c = sub.add_parser("convergence", help="residual of one check under step refinement")
    common(c)
    c.add_argument("--check", required=True)
    c.add_argument("--steps", type=_float_list, default=[1e-3, 5e-4, 2.5e-4])
    return ap


def _spec(args) -> RunSpec:
    if args.points < 1:
        raise UsageError("--points must be positive")
    key, params = parse_target(args.target, args.params)
    target = args.target if _is_config(args.target) else key
    return RunSpec(target, params, getattr(args, "checks", None) and
                   [x.strip() for x in args.checks.split(",") if x.strip()],
                   args.points, args.seed, args.step, args.order, args.tol_scale, args.perturb,
                   args.format or "text")


def _write(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        out.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from exc


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "list":
            sys.stdout.write(_list_text())
            return EXIT_OK
        if args.command == "describe":
            sys.stdout.write(_describe_text(args.entry, args.params, 20, 42))
            return EXIT_OK
        spec = _spec(args)
        if args.command == "verify":
            rep = verify(spec)
            _write(emit_report(rep, spec.fmt), args.out)
            return EXIT_OK if rep.all_pass else EXIT_FAIL
        study = convergence(spec, args.check, args.steps)
        _write(study.as_json() if spec.fmt == "json" else study.as_text(), args.out)
        return EXIT_OK
    except (HarmsecError, ValueError) as exc:
        print(f"harmsec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
