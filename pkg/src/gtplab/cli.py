"""Command-line front end: gtplab {solve,report,toy,plot}.

Exit codes: 0 success, 1 configuration error, 2 resonance abort (partial
output kept), 3 internal-consistency failure.

Config file (JSON, every key optional, unknown keys rejected)::

    {
      "command": "solve",
      "precision": 384,
      "order": 40,
      "out": "out",
      "params": {"b0": "golden", "b_higher": [], "q_odd": {"3": 1},
                 "rotation": "1/2", "resonance_threshold": null},
      "solve":  {"verify_trees": false, "verify_order": 8, "residual_check_order": 10,
                 "dump_trees": null},
      "report": {"spectrum": 200, "reduced": 50, "degenerate": 50, "grid": 100,
                 "cone": 100, "gevrey": true, "input": null, "dps": 40},
      "toy":    {"max_n": 100, "phi": "main", "normalization": "coefficient"},
      "plot":   {"order": 25, "z": [0.01, 0.005], "samples": 400, "t_range": null,
                 "input": null}
    }

``b0`` is "golden", a number, a decimal string or "pi*p/q".  ``dump_trees``
names a coefficient ("j,k" for phi_jk, "q2n" for q_2n) whose contributing
trees are written to trees.json.  Command-line
flags override the file; GTPLAB_PRECISION sets the default precision.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath

from .errors import (ConfigurationError, ConsistencyError, DegenerateError, DomainError,
                     GtpError, ResonanceError)
from .series import acb_str, check_precision, default_precision, mag, to_acb, workprec

log = logging.getLogger("gtplab")

EXIT_OK, EXIT_CONFIG, EXIT_RESONANCE, EXIT_CONSISTENCY = 0, 1, 2, 3
COMMANDS = ("solve", "report", "toy", "plot")

TOP_KEYS = {"command", "precision", "order", "out", "params", "solve", "report", "toy", "plot"}
SECTION_KEYS = {
    "params": {"b0", "b_higher", "q_odd", "rotation", "resonance_threshold"},
    "solve": {"verify_trees", "verify_order", "residual_check_order", "dump_trees"},
    "report": {"spectrum", "reduced", "degenerate", "grid", "cone", "gevrey", "input", "dps"},
    "toy": {"max_n", "phi", "normalization"},
    "plot": {"order", "z", "samples", "t_range", "input"},
}
REPORT_DEFAULTS = {"spectrum": 200, "reduced": 50, "degenerate": 50, "grid": 100, "cone": 100}
TREE_VERIFY_MAX = 8


@dataclass
class RunConfig:
    command: str
    precision: int
    order: int
    out: Path
    params: dict = field(default_factory=dict)
    solve: dict = field(default_factory=dict)
    report: dict = field(default_factory=dict)
    toy: dict = field(default_factory=dict)
    plot: dict = field(default_factory=dict)
    parallel: int = 0


# ---------------------------------------------------------------------------
# config

def read_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path}: malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    return data


def _int(v, name, lo=None, hi=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigurationError(f"{name} must be an integer, got {v!r}")
    if lo is not None and v < lo or hi is not None and v > hi:
        raise ConfigurationError(f"{name}={v} outside [{lo}, {hi}]")
    return v


def _number(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigurationError(f"{name} must be a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigurationError(f"{name} must be finite")
    return v


def _fraction(v, name):
    try:
        return Fraction(v) if not isinstance(v, float) else Fraction(v).limit_denominator(10 ** 6)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise ConfigurationError(f"{name}: cannot parse {v!r} as a fraction") from e


_PI_FRACTION = re.compile(r"^\s*pi\s*(\*\s*(\d+))?\s*(/\s*(\d+))?\s*$")


def parse_b0(v, prec: int):
    """'golden', a number, a decimal string or 'pi*p/q'."""
    from flint import arb
    if v == "golden":
        return "golden"
    if isinstance(v, bool):
        raise ConfigurationError("b0 must not be boolean")
    if isinstance(v, (int, float)):
        return _number(v, "b0")
    if isinstance(v, str):
        m = _PI_FRACTION.match(v)
        with workprec(prec):
            if m:
                p = int(m.group(2) or 1)
                q = int(m.group(4) or 1)
                return arb.pi() * p / q
            try:
                return arb(v)
            except (ValueError, TypeError) as e:
                raise ConfigurationError(f"b0: cannot parse {v!r}") from e
    raise ConfigurationError(f"b0: unsupported value {v!r}")


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigurationError(f"{where} must be an object")
    extra = set(d) - allowed
    if extra:
        raise ConfigurationError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def build_config(raw: dict, args: argparse.Namespace) -> RunConfig:
    """Merge file config with command-line flags and validate everything."""
    _check_keys(raw, TOP_KEYS, "config")
    for sec, keys in SECTION_KEYS.items():
        _check_keys(raw.get(sec, {}), keys, sec)
    cmd = args.command
    if raw.get("command") not in (None, cmd):
        raise ConfigurationError(f"config is for command {raw['command']!r}, invoked as {cmd!r}")
    prec = args.precision if args.precision is not None else raw.get("precision", default_precision())
    check_precision(prec)
    default_order = {"plot": 25}.get(cmd, 20)
    order = args.order if args.order is not None else raw.get("order", default_order)
    _int(order, "order", 1, 400)
    out = Path(args.out if args.out is not None else raw.get("out", f"gtplab_{cmd}"))

    params = dict(raw.get("params", {}))
    params.setdefault("b0", "golden")
    parse_b0(params["b0"], prec)
    params["b_higher"] = [_number(x, "b_higher[]") for x in params.get("b_higher", [])]
    qo = params.get("q_odd", {"3": 1})
    if not isinstance(qo, dict):
        raise ConfigurationError("q_odd must map odd index -> value")
    try:
        params["q_odd"] = {int(k): _number(v, f"q_odd[{k}]") for k, v in qo.items()}
    except ValueError as e:
        raise ConfigurationError(f"q_odd keys must be integers: {e}") from e
    params["rotation"] = _fraction(params.get("rotation", "1/2"), "rotation")
    thr = params.get("resonance_threshold")
    params["resonance_threshold"] = None if thr is None else _number(thr, "resonance_threshold")

    solve = {"verify_trees": False, "verify_order": TREE_VERIFY_MAX, "residual_check_order": 10,
             "dump_trees": None}
    solve.update(raw.get("solve", {}))
    if args.verify_trees:
        solve["verify_trees"] = True
    if getattr(args, "dump_trees", None) is not None:
        solve["dump_trees"] = args.dump_trees
    if solve["dump_trees"] is not None:
        parse_tree_target(solve["dump_trees"])
    _int(solve["verify_order"], "verify_order", 2, TREE_VERIFY_MAX)
    _int(solve["residual_check_order"], "residual_check_order", 0, 40)

    report = dict(raw.get("report", {}))
    for key in ("spectrum", "reduced", "degenerate", "grid", "cone"):
        v = getattr(args, key, None)
        if v is not None:
            report[key] = v
        if report.get(key) is True:
            report[key] = REPORT_DEFAULTS[key]
        if report.get(key) not in (None, False):
            _int(report[key], key, 2, 2000)
    if getattr(args, "gevrey", False):
        report["gevrey"] = True
    if args.input is not None:
        report["input"] = args.input
    report.setdefault("dps", 40)
    _int(report["dps"], "dps", 15, 2000)
    if cmd == "report" and not any(report.get(k) for k in ("spectrum", "reduced", "degenerate", "grid", "cone", "gevrey")):
        report.update({k: REPORT_DEFAULTS[k] for k in ("spectrum", "reduced", "degenerate", "grid")})

    toy = {"max_n": 100, "phi": "main", "normalization": "coefficient"}
    toy.update(raw.get("toy", {}))
    if getattr(args, "max_n", None) is not None:
        toy["max_n"] = args.max_n
    if getattr(args, "variant", None) is not None:
        toy["phi"] = args.variant
    _int(toy["max_n"], "max_n", 3, 5000)
    if toy["normalization"] not in ("coefficient", "derivative"):
        raise ConfigurationError("normalization must be 'coefficient' or 'derivative'")

    plot = {"order": None, "z": [0.01, 0.005], "samples": 400, "t_range": None, "input": None}
    plot.update(raw.get("plot", {}))
    if args.order is not None or plot["order"] is None:
        plot["order"] = order
    if getattr(args, "z", None):
        plot["z"] = args.z
    if args.input is not None:
        plot["input"] = args.input
    zs = plot["z"] if isinstance(plot["z"], list) else [plot["z"]]
    plot["z"] = [_number(z, "z") for z in zs]
    _int(plot["samples"], "samples", 2, 100000)
    _int(plot["order"], "plot order", 1, 400)
    if plot["t_range"] is not None:
        tr = plot["t_range"]
        if not (isinstance(tr, list) and len(tr) == 2):
            raise ConfigurationError("t_range must be [t_min, t_max]")
        plot["t_range"] = (_number(tr[0], "t_range"), _number(tr[1], "t_range"))
    par = args.parallel if args.parallel is not None else 0
    _int(par, "parallel", 0, 256)
    return RunConfig(cmd, prec, order, out, params, solve, report, toy, plot, par)


def parse_tree_target(spec) -> tuple:
    """'3,0' -> ('circle', (3, 0)); 'q4' -> ('box', 4)."""
    s = str(spec).strip().lower()
    m = re.fullmatch(r"q(\d+)", s)
    if m:
        n = int(m.group(1))
        if n < 2 or n % 2:
            raise ConfigurationError(f"tree target {spec!r}: q index must be even and >= 2")
        return "box", n
    m = re.fullmatch(r"(\d+)\s*,\s*(\d+)", s)
    if not m:
        raise ConfigurationError(f"tree target {spec!r}: expected 'j,k' or 'q2n'")
    j, k = int(m.group(1)), int(m.group(2))
    if j + k < 2 or abs(j - k) == 1:
        raise ConfigurationError(f"tree target {spec!r}: need j+k >= 2 and |j-k| != 1")
    return "circle", (j, k)


def make_params(cfg: RunConfig, order: int | None = None):
    from .solver import ProblemParams
    p = cfg.params
    return ProblemParams.create(b0=parse_b0(p["b0"], cfg.precision), b_higher=p["b_higher"], q_odd=p["q_odd"],
                                rotation=p["rotation"], precision=cfg.precision,
                                max_order=cfg.order if order is None else order,
                                resonance_threshold=p["resonance_threshold"])


# ---------------------------------------------------------------------------
# output helpers

def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, default=_json_default))
    return path


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, Path):
        return str(o)
    if isinstance(o, (mpmath.mpf, mpmath.mpc)):
        return str(o)
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def _write_mp_csv(path: Path, values, dps: int) -> Path:
    bits = int(math.ceil(dps * math.log2(10)))
    with open(path, "w", newline="") as fh:
        fh.write(f"# precision={bits}\n")
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, v in enumerate(values):
            v = mpmath.mpmathify(v)
            w.writerow([i, mpmath.nstr(mpmath.re(v), dps), mpmath.nstr(mpmath.im(v), dps)])
    return path


def _semilogy_svg(path: Path, xs, ys, title: str, xlabel: str, ylabel: str, marks=()) -> Path:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, ys, ".-", lw=0.8, ms=3)
    for m in marks:
        ax.axvline(m, color="0.8", lw=0.5, zorder=0)
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def _emit(msg: str):
    print(msg, flush=True)


# ---------------------------------------------------------------------------
# solve

def _verify_chunk(job):
    """Tree-oracle check of one chunk of targets; runs in a worker process."""
    cfg, targets, values = job
    from .trees import TreeOracle
    P = make_params(cfg, order=max(cfg.order, TREE_VERIFY_MAX))
    oracle = TreeOracle(P, max_order=TREE_VERIFY_MAX)
    worst = 0.0
    with workprec(P.precision):
        for t, (re_, im_) in zip(targets, values):
            ref = to_acb((re_, im_))
            a = oracle.coefficient(t)
            worst = max(worst, mag(a - ref) / max(1.0, mag(ref)))
    return worst


def _tree_targets(order: int, q_order: int):
    targets = []
    for n in range(2, order + 1):
        for j in range(n + 1):
            if abs(2 * j - n) != 1:
                targets.append((j, n - j))
    for k in range(2, q_order + 1, 2):
        targets.append(("q", k))
    return targets


def verify_trees(cfg: RunConfig, sol, through: int) -> dict:
    targets = _tree_targets(through, min(through, sol.q_even.order))
    with workprec(sol.params.precision):
        vals = []
        for t in targets:
            c = sol.q(t[1]) if t[0] == "q" else sol.phi[t]
            re_, im_ = acb_str(c)
            vals.append((re_, im_))
    t0 = time.time()
    if cfg.parallel > 1:
        k = cfg.parallel
        jobs = [(cfg, targets[i::k], vals[i::k]) for i in range(k)]
        with ProcessPoolExecutor(max_workers=k) as ex:
            worst = max(ex.map(_verify_chunk, jobs))
    else:
        worst = _verify_chunk((cfg, targets, vals))
    tol = 2.0 ** (-sol.params.precision / 2)
    return {"through_order": through, "targets": len(targets), "max_rel_error": worst,
            "tolerance": tol, "ok": worst <= tol, "seconds": round(time.time() - t0, 2)}


def dump_trees(spec, out: Path) -> Path:
    from .trees import enumerate_trees
    kind, target = parse_tree_target(spec)
    trees = enumerate_trees(kind, target)
    return _write_json(out / "trees.json", {"target": str(spec), "root_kind": kind,
                                            "count": len(trees),
                                            "trees": [t.to_dict() for t in trees]})


def cmd_solve(cfg: RunConfig) -> int:
    from .export import save_solution
    from .solver import newmain_series, solve
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    order = cfg.order
    if cfg.solve["verify_trees"]:
        order = max(order, cfg.solve["verify_order"])
    P = make_params(cfg, order)
    t0 = time.time()
    summary = {"command": "solve", "precision": cfg.precision, "order": order}
    try:
        sol = solve(P)
    except ResonanceError as e:
        partial = getattr(e, "partial", None)
        summary.update(status="resonance", message=str(e), index=e.index, magnitude=e.magnitude)
        if partial is not None:
            save_solution(partial, out, partial=True)
            _write_resonance_log(out, partial)
            summary["completed_order"] = partial.order
        _write_json(out / "summary.json", summary)
        raise
    save_solution(sol, out)
    _write_resonance_log(out, sol)
    summary.update(status="ok", seconds=round(time.time() - t0, 2),
                   min_denominator=sol.min_denominator)

    rc = min(cfg.solve["residual_check_order"], sol.order)
    if rc >= 1:
        S = newmain_series(sol, rc)
        worst = max(mag(S[j, n - j]) for n in range(1, rc + 1) for j in range(n + 1))
        tol = 2.0 ** (-cfg.precision / 2)
        summary["residual_check"] = {"through_order": rc, "max_abs": worst, "tolerance": tol}
        if worst > tol:
            _write_json(out / "summary.json", summary)
            raise ConsistencyError(f"independent residual {worst:.3e} exceeds {tol:.3e}")

    if cfg.solve["verify_trees"]:
        rep = verify_trees(cfg, sol, cfg.solve["verify_order"])
        summary["tree_verification"] = rep
        _write_json(out / "summary.json", summary)
        if not rep["ok"]:
            raise ConsistencyError(f"tree oracle disagrees with solver: {rep['max_rel_error']:.3e}")
        _emit(f"tree oracle: verified through order {rep['through_order']} "
              f"({rep['targets']} coefficients, max rel error {rep['max_rel_error']:.1e})")
    if cfg.solve["dump_trees"] is not None:
        path = dump_trees(cfg.solve["dump_trees"], out)
        summary["trees_file"] = path.name
    _write_json(out / "summary.json", summary)
    _emit(f"solved through order {sol.order} in {summary['seconds']} s; wrote {out}")
    return EXIT_OK


def _write_resonance_log(out: Path, sol):
    rows = [{"j": j, "k": k, "denominator": d} for j, k, d in sol.resonance_log]
    _write_json(out / "resonance_log.json", {"threshold": sol.params.threshold,
                                             "min_denominator": sol.min_denominator,
                                             "records": rows})


# ---------------------------------------------------------------------------
# report

def cmd_report(cfg: RunConfig) -> int:
    from . import recurrence as rl
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    rep = cfg.report
    dps = rep["dps"]
    summary = {"command": "report"}

    if rep.get("spectrum"):
        M = rep["spectrum"]
        ev = rl.spectrum(M, dps=dps)
        lead = []
        for m, z in enumerate(ev[:10]):
            z = mpmath.mpmathify(z)
            lead.append({"re": mpmath.nstr(mpmath.re(z), 20), "im": mpmath.nstr(mpmath.im(z), 20),
                         "exact": rl.exact_eigenvalue(m),
                         "abs_error": float(abs(z - rl.exact_eigenvalue(m)))})
        with mpmath.workdps(dps):
            lam, x = rl.leading_eigenvector(M, dps=dps)
            vec_err = max(float(abs(x[j] * lam ** j * mpmath.factorial(j) - 1)) for j in range(min(21, M)))
        res = {"M": M, "leading": lead, "eigenvector_rel_error_j_le_20": vec_err,
               "hilbert_schmidt_sq": rl.hilbert_schmidt_sq(M),
               "all": [[float(mpmath.re(z)), float(mpmath.im(z))] for z in ev]}
        _write_json(out / "spectrum.json", res)
        summary["spectrum"] = {k: res[k] for k in ("M", "eigenvector_rel_error_j_le_20")}
        summary["spectrum"]["leading"] = [float(l["re"]) for l in lead[:2]]

    if rep.get("reduced"):
        N = rep["reduced"]
        q = rl.solve_reduced(N, dps=dps)
        ref = rl.sech_coefficients(N, dps=dps)
        _write_mp_csv(out / "reduced.csv", q, dps)
        summary["reduced"] = {"N": N, "max_abs_diff_sech": float(max(abs(a - b) for a, b in zip(q, ref)))}

    if rep.get("degenerate"):
        N = rep["degenerate"]
        q = rl.solve_degenerate(N, dps=dps)
        with mpmath.workdps(dps):
            diff = max(abs(v - mpmath.mpf(-1) ** j / mpmath.factorial(j)) for j, v in enumerate(q))
        _write_mp_csv(out / "degenerate.csv", q, dps)
        summary["degenerate"] = {"N": N, "max_abs_diff_exp": float(diff)}

    if rep.get("grid"):
        N = rep["grid"]
        P = make_params(cfg, 1)
        g = rl.small_denominator_grid(P.b0.real, N, cfg.params["rotation"])
        with open(out / "grid.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j\\k", *range(N + 1)])
            for j in range(N + 1):
                w.writerow([j, *(repr(float(v)) for v in g.values[j])])
        pairs = [{"D": D, "diagonals": list(dd), "min_value": v} for D, dd, v in g.pairs]
        _write_json(out / "grid_pairs.json", {"b0": g.b0, "N": N, "pairs": pairs})
        summary["grid"] = {"N": N, "pairs": [p["D"] for p in pairs]}

    if rep.get("cone"):
        steps = rep["cone"]
        cone = rl.Cone(M=200, dps=dps)
        run = rl.forced_iteration(100, N=steps, M=200, dps=dps, perturb=True, cone=cone)
        first_in = next((i + 1 for i, v in enumerate(run.inside) if v), None)
        stays = first_in is not None and all(run.inside[first_in - 1:])
        res = {"n0": 100, "steps": steps, "N2": cone.N2, "condition": cone.condition,
               "inside": run.inside, "margins": run.margins, "first_inside_step": first_in,
               "stays_inside": stays}
        _write_json(out / "cone.json", res)
        summary["cone"] = {"first_inside_step": first_in, "stays_inside": stays, "N2": cone.N2}

    if rep.get("gevrey"):
        res = {}
        P = make_params(cfg, 1)
        try:
            q = rl.solve_reduced(60, dps=dps)
            with workprec(P.precision):
                qhat = [to_acb(mpmath.nstr(v, dps)) * rl.scale_factor(2 * j, P) for j, v in enumerate(q)]
            fit = rl.gevrey_fit(qhat, start=5)
            res["reduced_proxy"] = {"alpha": fit.alpha, "alpha_band": fit.alpha_band, "residual": fit.residual}
        except (DegenerateError, ConfigurationError) as e:
            res["reduced_proxy"] = {"skipped": str(e)}
        if rep.get("input"):
            from .export import load_solution
            sol = load_solution(rep["input"])
            coeffs = [sol.q_even[2 * n] for n in range(sol.q_even.order // 2 + 1)]
            try:
                fit = rl.gevrey_fit(coeffs, start=5)
                res["solution"] = {"input": str(rep["input"]), "order": sol.order, "alpha": fit.alpha,
                                   "alpha_band": fit.alpha_band, "residual": fit.residual}
            except ConfigurationError as e:
                res["solution"] = {"input": str(rep["input"]), "skipped": str(e)}
        _write_json(out / "gevrey.json", res)
        summary["gevrey"] = res

    _write_json(out / "report.json", summary)
    _emit(f"report written to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# toy

def _toy_phi(spec):
    from .toy import MAIN_PHI, VARIANTS
    if spec == "main":
        return dict(MAIN_PHI), "main"
    if isinstance(spec, str):
        if spec not in VARIANTS:
            raise ConfigurationError(f"unknown toy phi {spec!r}; choose main or one of {sorted(VARIANTS)}")
        return dict(VARIANTS[spec]), spec
    if isinstance(spec, dict):
        try:
            phi = {tuple(int(x) for x in k.split(",")): _number(v, "phi") for k, v in spec.items()}
        except ValueError as e:
            raise ConfigurationError(f"toy phi keys must look like 'j,k': {e}") from e
        return phi, "custom"
    raise ConfigurationError(f"toy phi: unsupported value {spec!r}")


def cmd_toy(cfg: RunConfig) -> int:
    from . import toy as tl
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    phi, name = _toy_phi(cfg.toy["phi"])
    prob = tl.ToyProblem(phi, cfg.toy["normalization"], cfg.toy["max_n"])
    t0 = time.time()
    sol = tl.solve_toy(prob)
    rep = tl.ratio_sequence(sol)
    with open(out / "q.csv", "w", newline="") as fh:
        fh.write("# precision=exact\n")
        w = csv.writer(fh)
        w.writerow(["index", "re", "im", "exact"])
        for n, x in enumerate(sol.q, start=1):
            w.writerow([2 * n - 1, repr(float(Fraction(int(x.p), int(x.q)))), "0", str(x)])
    with open(out / "r.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "r", "normalized"])
        for n in range(1, len(rep.r)):
            w.writerow([n, rep.r[n], rep.normalized[n]])
    logs = tl.log_abs_q(sol)
    xs = [n for n, v in enumerate(logs, start=1) if v is not None]
    ys = [math.exp(v) if v > -700 else 1e-300 for v in logs if v is not None]
    _semilogy_svg(out / "q_log.svg", xs, ys, "|q_{2n-1}|", "n", "|q_{2n-1}|", rep.dips)

    summary = {"phi": name, "normalization": prob.normalization, "max_n": prob.max_n,
               "q_first": [str(x) for x in sol.q[:4]], "dips": rep.dips,
               "seconds": round(time.time() - t0, 2)}
    if not rep.dips:
        summary["dip_summary"] = "no dips"
    else:
        summary["dip_summary"] = f"{len(rep.dips)} dips"
        try:
            fit = tl.dip_analysis(rep)
            summary["spacing_fit"] = {"C": fit.C, "exponent": fit.exponent, "ratio_spread": fit.ratio_spread}
        except ConfigurationError as e:
            summary["spacing_fit"] = {"skipped": str(e)}
        summary["reference_window"] = tl.find_window(rep)
    _write_json(out / "dips.json", summary)
    _emit(f"toy {name}: {len(sol.q)} coefficients, {summary['dip_summary']}; wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# plot

def cmd_plot(cfg: RunConfig) -> int:
    from .orbit import boundary_points, orbit_report
    from .solver import solve
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    pc = cfg.plot
    if pc["input"]:
        from .export import load_solution
        sol = load_solution(pc["input"])
    else:
        sol = solve(make_params(cfg, pc["order"]))
    N = min(pc["order"], sol.order)
    warns = []
    if N < pc["order"]:
        warns.append(f"solution only reaches order {sol.order}; plotting with {N} terms")

    B = boundary_points(sol, N, pc["samples"], pc["t_range"])
    if not B.convex:
        warns.append(f"reconstructed boundary is not convex: min q+q'' = {B.curvature_radius.min():.3g}")
    with open(out / "boundary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"])
        w.writerows(B.points.tolist())
    _boundary_svg(out / "boundary.svg", B, N, not B.convex)

    orb = orbit_report(sol, pc["z"], N)
    warns += orb.warnings
    res = {"order": N, "precision": sol.params.precision, "rotation": str(sol.params.rotation),
           "convex": B.convex, "copies": B.copies,
           "orbit": [{"z": [p.z.real, p.z.imag], "abs_z": abs(p.z), "times": list(p.times),
                      "residual": p.residual} for p in orb.points],
           "slopes": orb.slopes, "warnings": warns}
    _write_json(out / "orbit.json", res)
    for wmsg in warns:
        print(f"warning: {wmsg}", file=sys.stderr)
    for p in orb.points:
        _emit(f"|z|={abs(p.z):.3g}: criticality residual {p.residual:.3e}")
    if orb.slopes:
        _emit(f"log-log slope {orb.slopes[0]:.3f} (truncation order {N})")
    return EXIT_OK


def _boundary_svg(path: Path, B, N: int, nonconvex: bool):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5, 5))
    n = len(B.t)
    for k in range(B.copies):
        seg = B.points[k * n:(k + 1) * n]
        ax.plot(seg[:, 0], seg[:, 1], lw=1)
    ax.set_aspect("equal")
    title = f"boundary from {N} terms"
    if nonconvex:
        title += " (warning: not convex)"
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gtplab", description="Formal series laboratory for billiard inverse problems.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--precision", type=int, help="working precision in bits")
    common.add_argument("--order", type=int, help="truncation order")
    common.add_argument("--out", help="output directory")
    common.add_argument("--parallel", type=int, nargs="?", const=2,
                        help="worker processes for tree verification")
    common.add_argument("--input", help="solution directory written by 'solve'")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve the coefficient system")
    s.add_argument("--verify-trees", action="store_true", help="cross-check orders <= 8 with the tree oracle")
    s.add_argument("--dump-trees", dest="dump_trees", metavar="TARGET",
                   help="write contributing trees of TARGET ('j,k' or 'q2n') to trees.json")

    r = sub.add_parser("report", parents=[common], help="recurrence diagnostics")
    r.add_argument("--spectrum", type=int, nargs="?", const=200, metavar="M")
    r.add_argument("--reduced", type=int, nargs="?", const=50, metavar="N")
    r.add_argument("--degenerate", type=int, nargs="?", const=50, metavar="N")
    r.add_argument("--grid", type=int, nargs="?", const=100, metavar="N")
    r.add_argument("--cone", type=int, nargs="?", const=100, metavar="STEPS")
    r.add_argument("--gevrey", action="store_true")

    t = sub.add_parser("toy", parents=[common], help="diagonal inversion toy problem")
    t.add_argument("--max-n", type=int, dest="max_n")
    t.add_argument("--variant", help="main or a variant name")

    p = sub.add_parser("plot", parents=[common], help="boundary plot and orbit residual")
    p.add_argument("--z", type=float, nargs="+", help="orbit |z| values")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    for key in ("verify_trees", "dump_trees", "spectrum", "reduced", "degenerate", "grid", "cone", "gevrey", "max_n",
                "variant", "z"):
        if not hasattr(args, key):
            setattr(args, key, None if key not in ("verify_trees", "gevrey") else False)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = read_config(args.config) if args.config else {}
        cfg = build_config(raw, args)
        return {"solve": cmd_solve, "report": cmd_report, "toy": cmd_toy, "plot": cmd_plot}[cfg.command](cfg)
    except ResonanceError as e:
        print(f"error: resonance: {e}", file=sys.stderr)
        return EXIT_RESONANCE
    except ConsistencyError as e:
        print(f"error: consistency: {e}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (ConfigurationError, DomainError, DegenerateError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except GtpError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONSISTENCY


if __name__ == "__main__":
    raise SystemExit(main())
