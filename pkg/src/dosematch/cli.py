"""Command-line interface and file I/O.

Subcommands: ``match`` (write a subclassification + quality report),
``evaluate`` (recompute the report for an existing assignment), ``infer``
(randomization test on a clustered-study file), ``simulate`` (run a
simulation harness from a config file).

Conventions: CSV for tables, JSON for reports, floats at 17 significant
digits so files round-trip exactly. Exit codes: 0 success, 1 usage error,
2 data error, 3 infeasible matching; errors print one line on stderr.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cover import CardinalityPenalty, full_match
from .distances import DistanceMatrix, DosePenaltyConfig, UnitTable, apply_dose_penalty, mahalanobis_matrix
from .errors import (
    DoseMatchError,
    DuplicateId,
    Infeasible,
    IsolatedVertex,
    MissingColumn,
    NoPerfectMatching,
    NonFiniteValue,
    ParseError,
)
from .homogeneity import report
from .inference import Alternative, ClusteredStudy, randomization_test
from .matching import optimal_pair_match
from .simulation import DoseModel, SimulationConfig, run_factorial, run_pair_vs_full
from .subclassification import Subclass, Subclassification

__all__ = ["load_units", "main"]

_INFEASIBLE = (Infeasible, NoPerfectMatching, IsolatedVertex)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _jsonify(obj):
    """Round floats through 17-significant-digit text for exact round-trips."""
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


def load_units(
    path: str | Path,
    id_col: str = "id",
    dose_col: str = "dose",
    covariate_cols: list[str] | None = None,
) -> UnitTable:
    """Read a CSV with a header row into a UnitTable, preserving row order.

    When ``covariate_cols`` is None, every column other than the id and dose
    columns is taken as a covariate, in file order.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        rows = list(reader)
    for col in [id_col, dose_col] + (covariate_cols or []):
        if col not in header:
            raise MissingColumn(col)
    if covariate_cols is None:
        covariate_cols = [c for c in header if c not in (id_col, dose_col)]
    idx = {c: header.index(c) for c in header}
    ids: list[str] = []
    dose = np.empty(len(rows))
    cov = np.empty((len(rows), len(covariate_cols)))
    seen: set[str] = set()
    for r, row in enumerate(rows):
        line = r + 2  # 1-based, after the header
        if len(row) != len(header):
            raise ParseError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
        uid = row[idx[id_col]]
        if uid in seen:
            raise DuplicateId(uid)
        seen.add(uid)
        ids.append(uid)
        for col, target in [(dose_col, None)] + [(c, k) for k, c in enumerate(covariate_cols)]:
            try:
                val = float(row[idx[col]])
            except ValueError:
                raise ParseError(f"{path}:{line}: column {col!r} is not numeric") from None
            if not np.isfinite(val):
                raise NonFiniteValue(f"row {line}, column {col!r}")
            if target is None:
                dose[r] = val
            else:
                cov[r, target] = val
    return UnitTable(ids=tuple(ids), dose=dose, covariates=cov)


def _write_units(path: Path, u: UnitTable, id_col="id", dose_col="dose") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([id_col, dose_col] + [f"x{k + 1}" for k in range(u.d)])
        for i in range(u.n):
            w.writerow([u.ids[i], _fmt(u.dose[i])] + [_fmt(v) for v in u.covariates[i]])


def _write_subclasses(path: Path, pi: Subclassification, ids: tuple[str, ...]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["unit_id", "subclass_id", "is_reference"])
        for k, s in enumerate(pi.subclasses):
            for m in s.members:
                w.writerow([ids[m], k, int(m == s.reference)])


def _read_subclasses(path: Path, ids: tuple[str, ...]) -> Subclassification:
    index = {uid: i for i, uid in enumerate(ids)}
    groups: dict[str, list[int]] = {}
    refs: dict[str, int] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for col in ("unit_id", "subclass_id", "is_reference"):
            if reader.fieldnames is None or col not in reader.fieldnames:
                raise MissingColumn(col)
        for row in reader:
            uid = row["unit_id"]
            if uid not in index:
                raise ParseError(f"{path}: unknown unit_id {uid!r}")
            i = index[uid]
            groups.setdefault(row["subclass_id"], []).append(i)
            if row["is_reference"] not in ("0", "1"):
                raise ParseError(f"{path}: is_reference must be 0 or 1")
            if row["is_reference"] == "1":
                if row["subclass_id"] in refs:
                    raise ParseError(f"{path}: subclass {row['subclass_id']} has two references")
                refs[row["subclass_id"]] = i
    subclasses = []
    for sid, members in groups.items():
        if sid not in refs:
            raise ParseError(f"{path}: subclass {sid} has no reference unit")
        subclasses.append(Subclass(tuple(members), reference=refs[sid]))
    assigned = {m for s in subclasses for m in s.members}
    discarded = tuple(i for i in range(len(ids)) if i not in assigned)
    return Subclassification(tuple(subclasses), unit_count=len(ids), discarded=discarded)


def _distance_pair(u: UnitTable, tau0: float, C: float) -> tuple[DistanceMatrix, DistanceMatrix]:
    dm_cov = mahalanobis_matrix(u, squared=True)
    dm = apply_dose_penalty(dm_cov, u, DosePenaltyConfig(C=C, tau0=tau0)) if tau0 > 0 else dm_cov
    return dm_cov, dm


def _report_json(pi: Subclassification, dm_cov, u: UnitTable, args, mode: str) -> dict:
    rep = report(pi, dm_cov, u)
    return _jsonify(
        {
            "report": rep.to_dict(),
            "metadata": {
                "version": __version__,
                "mode": mode,
                "input": str(args.input),
                "id_col": args.id_col,
                "dose_col": args.dose_col,
                "tau0": args.tau0,
                "C": args.C,
                "lambda": getattr(args, "lam", 0.0),
                "seed": args.seed,
                "n_units": u.n,
                "n_discarded": len(pi.discarded),
            },
        }
    )


def _cmd_match(args) -> int:
    cols = args.covariates.split(",") if args.covariates else None
    u = load_units(args.input, args.id_col, args.dose_col, cols)
    dm_cov, dm = _distance_pair(u, args.tau0, args.C)
    if args.pairs:
        pi = optimal_pair_match(dm)
        mode = "pairs"
    else:
        pi = full_match(dm, CardinalityPenalty(args.lam))
        mode = "full"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_subclasses(out / "subclasses.csv", pi, u.ids)
    with open(out / "report.json", "w") as fh:
        json.dump(_report_json(pi, dm_cov, u, args, mode), fh, indent=2)
        fh.write("\n")
    return 0


def _cmd_evaluate(args) -> int:
    cols = args.covariates.split(",") if args.covariates else None
    u = load_units(args.input, args.id_col, args.dose_col, cols)
    pi = _read_subclasses(Path(args.assignment), u.ids)
    dm_cov = mahalanobis_matrix(u, squared=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w") as fh:
        json.dump(_report_json(pi, dm_cov, u, args, "evaluate"), fh, indent=2)
        fh.write("\n")
    return 0


def _load_study(path: Path) -> ClusteredStudy:
    groups: dict[str, list[tuple[str, float, float]]] = {}
    order: list[str] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for col in ("set_id", "cluster_id", "dose", "response"):
            if reader.fieldnames is None or col not in reader.fieldnames:
                raise MissingColumn(col)
        for r, row in enumerate(reader):
            try:
                z, resp = float(row["dose"]), float(row["response"])
            except ValueError:
                raise ParseError(f"{path}: row {r + 2} has non-numeric dose/response") from None
            if not (np.isfinite(z) and np.isfinite(resp)):
                raise NonFiniteValue(f"row {r + 2}")
            sid = row["set_id"]
            if sid not in groups:
                groups[sid] = []
                order.append(sid)
            groups[sid].append((row["cluster_id"], z, resp))
    return ClusteredStudy(tuple(tuple(groups[sid]) for sid in order))


def _cmd_infer(args) -> int:
    study = _load_study(Path(args.input))
    result = randomization_test(
        study, draws=args.draws, seed=args.seed, alternative=Alternative(args.alternative)
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "test_result.json", "w") as fh:
        payload = result.to_dict()
        payload["version"] = __version__
        json.dump(_jsonify(payload), fh, indent=2)
        fh.write("\n")
    with open(out / "reference_distribution.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["draw_index", "t"])
        for i, t in enumerate(result.reference_draws):
            w.writerow([i, _fmt(t)])
    return 0


def _sim_config_from_ini(section) -> SimulationConfig:
    return SimulationConfig(
        d=section.getint("d"),
        n=section.getint("n"),
        dose_model=DoseModel(section.get("dose_model")),
        c=section.getfloat("c"),
        a=section.getfloat("a"),
        b=section.getfloat("b"),
        beta=section.getfloat("beta", 1.0),
        intercept=section.getfloat("intercept", 1.0),
        replications=section.getint("replications", 1),
        seed=section.getint("seed", 0),
    )


def _cmd_simulate(args) -> int:
    if not args.config:
        raise ParseError("simulate requires --config")
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case-sensitive (c vs C)
    read = parser.read(args.config)
    if not read:
        raise ParseError(f"cannot read config file {args.config}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mode = parser.get("simulate", "mode", fallback="factorial")
    if mode == "factorial":
        cells = [
            _sim_config_from_ini(parser[name])
            for name in parser.sections()
            if name.startswith("cell")
        ]
        if not cells:
            raise ParseError("factorial mode needs at least one [cell*] section")
        if args.seed is not None:
            cells = [
                SimulationConfig(**{**c.__dict__, "seed": args.seed}) for c in cells
            ]
        results = run_factorial(cells)
        with open(out / "factorial.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["d", "n", "dose_model", "c", "a", "b", "beta", "replications", "seed",
                 "bias_reg", "se_reg", "mse_reg",
                 "bias_reg_match", "se_reg_match", "mse_reg_match", "failures"]
            )
            for row in results:
                cfg = row["config"]
                w.writerow(
                    [cfg.d, cfg.n, cfg.dose_model.value, _fmt(cfg.c), _fmt(cfg.a),
                     _fmt(cfg.b), _fmt(cfg.beta), cfg.replications, cfg.seed,
                     _fmt(row["reg"].bias), _fmt(row["reg"].se), _fmt(row["reg"].mse),
                     _fmt(row["reg_match"].bias), _fmt(row["reg_match"].se),
                     _fmt(row["reg_match"].mse), row["failures"]]
                )
    elif mode == "pair_vs_full":
        cfg = _sim_config_from_ini(parser["simulate"])
        if args.seed is not None:
            cfg = SimulationConfig(**{**cfg.__dict__, "seed": args.seed})
        tau0_grid = tuple(
            float(t) for t in parser.get("simulate", "tau0_grid", fallback="0,0.1,0.2,0.3,0.4").split(",")
        )
        lam = parser.getfloat("simulate", "lambda", fallback=0.0)
        C = parser.getfloat("simulate", "C", fallback=100000.0)
        res = run_pair_vs_full(cfg, tau0_grid, lam=lam, C=C)
        with open(out / "pair_vs_full.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            keys = ["hm1", "hm2", "hm3", "hm4", "ss", "set_count",
                    "mu_min", "mu_q25", "mu_q50", "mu_q75"]
            w.writerow(["tau0", "matcher"] + keys)
            for row in res["rows"]:
                for matcher in ("pair", "full"):
                    rep = row[matcher]
                    w.writerow([_fmt(row["tau0"]), matcher]
                               + [_fmt(getattr(rep, k)) if k != "set_count" else rep.set_count
                                  for k in keys])
        with open(out / "prematch.json", "w") as fh:
            json.dump(
                _jsonify({"mean_pairwise_distance": res["prematch_mean_distance"],
                          "ss": res["prematch_ss"], "version": __version__}),
                fh, indent=2)
            fh.write("\n")
    else:
        raise ParseError(f"unknown simulate mode {mode!r}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dosematch", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True):
        if data:
            sp.add_argument("--input", required=True, help="input CSV path")
            sp.add_argument("--id-col", default="id", dest="id_col")
            sp.add_argument("--dose-col", default="dose", dest="dose_col")
            sp.add_argument("--covariates", default=None,
                            help="comma-separated covariate columns (default: all others)")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--config", default=None, help="INI config file; flags override it")

    m = sub.add_parser("match", help="compute a subclassification and its quality report")
    common(m)
    m.add_argument("--tau0", type=float, default=0.0, help="dose caliper")
    m.add_argument("--C", type=float, default=100000.0, help="dose penalty constant")
    m.add_argument("--lambda", type=float, default=0.0, dest="lam",
                   help="cardinality penalty coefficient")
    m.add_argument("--pairs", action="store_true", help="pair matching instead of full matching")
    m.set_defaults(func=_cmd_match)

    e = sub.add_parser("evaluate", help="recompute the report for an existing assignment")
    common(e)
    e.add_argument("--assignment", required=True, help="subclasses.csv to evaluate")
    e.add_argument("--tau0", type=float, default=0.0)
    e.add_argument("--C", type=float, default=100000.0)
    e.set_defaults(func=_cmd_evaluate)

    i = sub.add_parser("infer", help="randomization test on a clustered-study CSV")
    common(i)
    i.add_argument("--draws", type=int, default=100000)
    i.add_argument("--alternative", choices=["less", "greater"], default="less")
    i.set_defaults(func=_cmd_infer)

    s = sub.add_parser("simulate", help="run a simulation harness from a config file")
    common(s, data=False)
    s.set_defaults(func=_cmd_simulate)
    return p


def _apply_config_file(args) -> None:
    """Fill flag values from an INI file's [dosematch] section; flags win."""
    if not getattr(args, "config", None) or args.command == "simulate":
        return
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not parser.read(args.config):
        raise ParseError(f"cannot read config file {args.config}")
    if not parser.has_section("dosematch"):
        return
    sec = parser["dosematch"]
    defaults = {"tau0": 0.0, "C": 100000.0, "lam": 0.0, "seed": None,
                "draws": 100000, "alternative": "less", "id_col": "id",
                "dose_col": "dose", "covariates": None, "out": "."}
    casts = {"tau0": float, "C": float, "lam": float, "seed": int, "draws": int}
    keymap = {"lambda": "lam"}
    for key in sec:
        attr = keymap.get(key, key.replace("-", "_"))
        if not hasattr(args, attr):
            continue
        if getattr(args, attr) == defaults.get(attr, getattr(args, attr)):
            cast = casts.get(attr, str)
            setattr(args, attr, cast(sec[key]))


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        _apply_config_file(args)
        if getattr(args, "seed", None) is None and args.command != "simulate":
            args.seed = 0
        return args.func(args)
    except _INFEASIBLE as exc:
        print(f"dosematch: infeasible: {exc}", file=sys.stderr)
        return 3
    except (DoseMatchError, OSError, ValueError, configparser.Error) as exc:
        print(f"dosematch: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
